#include "angina/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "angina/error.hpp"
#include "angina/rng.hpp"

namespace angina::nn {
namespace {

constexpr double kMaskBias = -1e9;
constexpr double kLayerNormEps = 1e-5;
constexpr char kCheckpointMagic[8] = {'A', 'N', 'G', 'N', 'N', 'C', 'K', 'P'};

using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Building blocks

struct NormCache {
  Matrix xhat;
  Vector rstd;
};

Matrix layer_norm(const Matrix& x, const ConstMatrixMap& gain, const ConstMatrixMap& bias,
                  NormCache* cache) {
  Matrix xhat(x.rows(), x.cols());
  Vector rstd(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const auto centered = (x.row(i).array() - mean).eval();
    const double r = 1.0 / std::sqrt(centered.square().mean() + kLayerNormEps);
    xhat.row(i) = centered * r;
    rstd(i) = r;
  }
  Matrix y = (xhat.array().rowwise() * gain.row(0).array()).rowwise() + bias.row(0).array();
  if (cache) cache->xhat = std::move(xhat), cache->rstd = std::move(rstd);
  return y;
}

Matrix layer_norm_backward(const Matrix& dy, const NormCache& c, const ConstMatrixMap& gain,
                           MatrixMap dgain, MatrixMap dbias) {
  dgain.row(0) += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  dbias.row(0) += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * gain.row(0).array();
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double m1 = dxhat.row(i).mean();
    const double m2 = (dxhat.row(i).array() * c.xhat.row(i).array()).mean();
    dx.row(i) = c.rstd(i) * (dxhat.row(i).array() - m1 - c.xhat.row(i).array() * m2);
  }
  return dx;
}

double normal_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }

// d/dx [x * cdf(x)]
double gelu_grad(double x, double cdf) {
  return cdf + x * std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

void softmax_in_place(Matrix& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double top = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - top).exp();
    s.row(i) /= s.row(i).sum();
  }
}

// Inverted dropout scale factors; empty in evaluation mode.
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng* rng) {
  if (!rng || rate <= 0.0) return {};
  Matrix mask(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng->uniform() < rate ? 0.0 : keep;
  return mask;
}

void apply_mask(Matrix& x, const Matrix& mask) {
  if (mask.size() != 0) x.array() *= mask.array();
}

// ---------------------------------------------------------------------------
// Forward pass with optional caches for backpropagation

struct LayerCache {
  NormCache ln1;
  Matrix a, q, k, v, o;
  std::vector<Matrix> probs;
  Matrix drop_attn;
  NormCache ln2;
  Matrix b, h, cdf, g;
  Matrix drop_ff;
};

struct ExampleCache {
  std::vector<TokenId> ids;  // attended window only
  std::vector<std::uint8_t> mask;
  Matrix drop_embed;
  std::vector<LayerCache> layers;
  NormCache final_norm;
  Matrix cls;  // 1 x model_dim, input to every head
};

// Positions past the last attended token never influence position 0.
std::size_t window_length(const TokenizedInput& input, const EncoderConfig& config) {
  if (input.ids.size() != config.max_len || input.mask.size() != config.max_len)
    throw DataError("input length " + std::to_string(input.ids.size()) +
                    " does not match model max_len " + std::to_string(config.max_len));
  std::size_t n = 0;
  for (std::size_t i = 0; i < input.mask.size(); ++i)
    if (input.mask[i]) n = i + 1;
  if (n == 0) throw DataError("input has no attended positions");
  for (std::size_t i = 0; i < n; ++i)
    if (input.ids[i] < 0 || static_cast<std::size_t>(input.ids[i]) >= config.vocab_size)
      throw DataError("token id " + std::to_string(input.ids[i]) + " outside model vocabulary");
  return n;
}

// Keys come from all `x` rows; only the first `m` rows are updated.
Matrix layer_forward(const ModelParams& p, const LayerLayout& L, const Matrix& x, Eigen::Index m,
                     const std::vector<std::uint8_t>& key_mask, Rng* rng, LayerCache* cache) {
  const EncoderConfig& cfg = p.config();
  const auto dh = static_cast<Eigen::Index>(cfg.model_dim / cfg.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  NormCache ln1;
  Matrix a = layer_norm(x, p.view(L.ln1_gain), p.view(L.ln1_bias), cache ? &ln1 : nullptr);
  Matrix q = (a.topRows(m) * p.view(L.wq)).rowwise() + p.view(L.bq).row(0);
  Matrix k = (a * p.view(L.wk)).rowwise() + p.view(L.bk).row(0);
  Matrix v = (a * p.view(L.wv)).rowwise() + p.view(L.bv).row(0);

  Matrix o(m, static_cast<Eigen::Index>(cfg.model_dim));
  std::vector<Matrix> probs;
  for (std::size_t head = 0; head < cfg.heads; ++head) {
    const Eigen::Index c0 = static_cast<Eigen::Index>(head) * dh;
    Matrix s = q.middleCols(c0, dh) * k.middleCols(c0, dh).transpose() * scale;
    for (std::size_t j = 0; j < key_mask.size(); ++j)
      if (!key_mask[j]) s.col(static_cast<Eigen::Index>(j)).array() += kMaskBias;
    softmax_in_place(s);
    o.middleCols(c0, dh) = s * v.middleCols(c0, dh);
    if (cache) probs.push_back(std::move(s));
  }

  Matrix y = (o * p.view(L.wo)).rowwise() + p.view(L.bo).row(0);
  Matrix drop_attn = dropout_mask(y.rows(), y.cols(), cfg.dropout_rate, rng);
  apply_mask(y, drop_attn);
  Matrix mid = x.topRows(m) + y;

  NormCache ln2;
  Matrix b = layer_norm(mid, p.view(L.ln2_gain), p.view(L.ln2_bias), cache ? &ln2 : nullptr);
  Matrix h = (b * p.view(L.w1)).rowwise() + p.view(L.b1).row(0);
  Matrix cdf = h.unaryExpr([](double t) { return normal_cdf(t); });
  Matrix g = h.cwiseProduct(cdf);
  Matrix z = (g * p.view(L.w2)).rowwise() + p.view(L.b2).row(0);
  Matrix drop_ff = dropout_mask(z.rows(), z.cols(), cfg.dropout_rate, rng);
  apply_mask(z, drop_ff);
  Matrix out = mid + z;

  if (cache) {
    cache->ln1 = std::move(ln1);
    cache->a = std::move(a);
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->o = std::move(o);
    cache->probs = std::move(probs);
    cache->drop_attn = std::move(drop_attn);
    cache->ln2 = std::move(ln2);
    cache->b = std::move(b);
    cache->h = std::move(h);
    cache->cdf = std::move(cdf);
    cache->g = std::move(g);
    cache->drop_ff = std::move(drop_ff);
  }
  return out;
}

// Final-norm [CLS] representation, 1 x model_dim.
Matrix encode_cls(const ModelParams& p, const TokenizedInput& input, Rng* rng,
                  ExampleCache* cache) {
  const EncoderConfig& cfg = p.config();
  const ParamLayout& layout = p.layout();
  const std::size_t n = window_length(input, cfg);
  const auto d = static_cast<Eigen::Index>(cfg.model_dim);
  const auto tokens = p.view(layout.token_embedding);
  const auto positions = p.view(layout.position_embedding);

  std::vector<std::uint8_t> key_mask(input.mask.begin(), input.mask.begin() + static_cast<std::ptrdiff_t>(n));
  Matrix x(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i)
    x.row(static_cast<Eigen::Index>(i)) =
        tokens.row(input.ids[i]) + positions.row(static_cast<Eigen::Index>(i));
  Matrix drop_embed = dropout_mask(x.rows(), x.cols(), cfg.dropout_rate, rng);
  apply_mask(x, drop_embed);

  if (cache) {
    cache->ids.assign(input.ids.begin(), input.ids.begin() + static_cast<std::ptrdiff_t>(n));
    cache->mask = key_mask;
    cache->drop_embed = std::move(drop_embed);
    cache->layers.assign(cfg.layers, {});
  }
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const Eigen::Index m = l + 1 == cfg.layers ? 1 : x.rows();
    x = layer_forward(p, layout.layers[l], x, m, key_mask, rng, cache ? &cache->layers[l] : nullptr);
  }
  Matrix cls = layer_norm(x.topRows(1), p.view(layout.final_gain), p.view(layout.final_bias),
                          cache ? &cache->final_norm : nullptr);
  if (cache) cache->cls = cls;
  return cls;
}

Matrix head_logits(const ModelParams& p, const Matrix& cls, std::size_t task) {
  const HeadLayout& head = p.layout().heads.at(task);
  return (cls * p.view(head.weight)).rowwise() + p.view(head.bias).row(0);
}

// ---------------------------------------------------------------------------
// Backward pass

struct GradView {
  Buffer& g;
  MatrixMap operator()(const TensorRef& t) const {
    return MatrixMap(g.data() + t.offset, static_cast<Eigen::Index>(t.rows),
                     static_cast<Eigen::Index>(t.cols));
  }
};

Matrix layer_backward(const ModelParams& p, const LayerLayout& L, const LayerCache& c,
                      const Matrix& dout, Eigen::Index n, const GradView& grad) {
  const EncoderConfig& cfg = p.config();
  const auto dh = static_cast<Eigen::Index>(cfg.model_dim / cfg.heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Eigen::Index m = dout.rows();

  // Feed-forward sublayer.
  Matrix dz = dout;
  apply_mask(dz, c.drop_ff);
  grad(L.w2).noalias() += c.g.transpose() * dz;
  grad(L.b2).row(0) += dz.colwise().sum();
  Matrix dh_ff = (dz * p.view(L.w2).transpose()).array() *
                 c.h.binaryExpr(c.cdf, [](double t, double cdf) { return gelu_grad(t, cdf); }).array();
  grad(L.w1).noalias() += c.b.transpose() * dh_ff;
  grad(L.b1).row(0) += dh_ff.colwise().sum();
  const Matrix db = dh_ff * p.view(L.w1).transpose();
  Matrix dmid = dout + layer_norm_backward(db, c.ln2, p.view(L.ln2_gain), grad(L.ln2_gain),
                                           grad(L.ln2_bias));

  // Attention sublayer.
  Matrix dx = Matrix::Zero(n, dout.cols());
  dx.topRows(m) += dmid;
  Matrix dy = dmid;
  apply_mask(dy, c.drop_attn);
  grad(L.wo).noalias() += c.o.transpose() * dy;
  grad(L.bo).row(0) += dy.colwise().sum();
  const Matrix d_o = dy * p.view(L.wo).transpose();

  Matrix dq(m, dout.cols()), dk(n, dout.cols()), dv(n, dout.cols());
  for (std::size_t head = 0; head < cfg.heads; ++head) {
    const Eigen::Index c0 = static_cast<Eigen::Index>(head) * dh;
    const Matrix& prob = c.probs[head];
    const Matrix dprob = d_o.middleCols(c0, dh) * c.v.middleCols(c0, dh).transpose();
    dv.middleCols(c0, dh) = prob.transpose() * d_o.middleCols(c0, dh);
    const Vector row_dot = (dprob.array() * prob.array()).rowwise().sum();
    const Matrix ds = (prob.array() * (dprob.colwise() - row_dot).array()) * scale;
    dq.middleCols(c0, dh) = ds * c.k.middleCols(c0, dh);
    dk.middleCols(c0, dh) = ds.transpose() * c.q.middleCols(c0, dh);
  }
  grad(L.wq).noalias() += c.a.topRows(m).transpose() * dq;
  grad(L.bq).row(0) += dq.colwise().sum();
  grad(L.wk).noalias() += c.a.transpose() * dk;
  grad(L.bk).row(0) += dk.colwise().sum();
  grad(L.wv).noalias() += c.a.transpose() * dv;
  grad(L.bv).row(0) += dv.colwise().sum();

  Matrix da = dk * p.view(L.wk).transpose() + dv * p.view(L.wv).transpose();
  da.topRows(m) += dq * p.view(L.wq).transpose();
  dx += layer_norm_backward(da, c.ln1, p.view(L.ln1_gain), grad(L.ln1_gain), grad(L.ln1_bias));
  return dx;
}

void backward_example(const ModelParams& p, const ExampleCache& c, const Matrix& dcls,
                      Buffer& gradient) {
  const EncoderConfig& cfg = p.config();
  const ParamLayout& layout = p.layout();
  const GradView grad{gradient};
  const auto n = static_cast<Eigen::Index>(c.ids.size());

  Matrix dx = layer_norm_backward(dcls, c.final_norm, p.view(layout.final_gain),
                                  grad(layout.final_gain), grad(layout.final_bias));
  if (cfg.layers == 0) {
    Matrix full = Matrix::Zero(n, dx.cols());
    full.topRows(1) = dx;
    dx = std::move(full);
  }
  for (std::size_t l = cfg.layers; l-- > 0;)
    dx = layer_backward(p, layout.layers[l], c.layers[l], dx, n, grad);

  apply_mask(dx, c.drop_embed);
  auto tokens = grad(layout.token_embedding);
  auto positions = grad(layout.position_embedding);
  for (Eigen::Index i = 0; i < n; ++i) {
    tokens.row(c.ids[static_cast<std::size_t>(i)]) += dx.row(i);
    positions.row(i) += dx.row(i);
  }
}

struct Target {
  std::size_t task;
  Label3 label;
  double weight;
};

// Loss of one example summed over its weighted targets; accumulates
// `scale` times its gradient when `gradient` is non-null.
double example_loss(const ModelParams& p, const TokenizedInput& input,
                    std::span<const Target> targets, Rng* rng, double scale,
                    Buffer* gradient) {
  ExampleCache cache;
  const Matrix cls = encode_cls(p, input, rng, gradient ? &cache : nullptr);
  double total = 0.0;
  Matrix dcls = Matrix::Zero(1, cls.cols());
  for (const Target& t : targets) {
    if (t.weight == 0.0) continue;
    const Matrix logits = head_logits(p, cls, t.task);
    const Matrix prob = softmax_rows(logits);
    const auto gold = static_cast<Eigen::Index>(index_of(t.label));
    total += t.weight * -std::log(std::max(prob(0, gold), 1e-300));
    if (gradient) {
      Matrix dlogits = prob;
      dlogits(0, gold) -= 1.0;
      dlogits *= t.weight * scale;
      const HeadLayout& head = p.layout().heads[t.task];
      const GradView grad{*gradient};
      grad(head.weight).noalias() += cls.transpose() * dlogits;
      grad(head.bias) += dlogits;
      dcls.noalias() += dlogits * p.view(head.weight).transpose();
    }
  }
  if (gradient) backward_example(p, cache, dcls, *gradient);
  return total;
}

// ---------------------------------------------------------------------------
// Optimizer

class Adam {
 public:
  Adam(std::size_t size, const TrainConfig& config)
      : config_(config), m_(size, 0.0), v_(size, 0.0) {}

  void step(Buffer& params, const Buffer& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grad[i];
      v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
      params[i] -= config_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.epsilon);
    }
  }

 private:
  TrainConfig config_;
  Buffer m_, v_;
  std::size_t t_ = 0;
};

void append(ParamLayout& layout, TensorRef& t, std::size_t rows, std::size_t cols) {
  t = {layout.total, rows, cols};
  layout.total += rows * cols;
}

template <typename ExampleT, typename TargetsFn, typename RecordFn>
std::vector<double> run_training(ModelParams& params, std::span<const ExampleT> train_set,
                                 const TrainConfig& config, TargetsFn targets_of,
                                 RecordFn record) {
  config.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  Rng rng(config.seed);
  Adam adam(params.values().size(), config);
  Buffer gradient(params.values().size());
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> epoch_loss;
  const std::set<std::size_t> checkpoints(config.checkpoints.begin(), config.checkpoints.end());

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    double sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      std::fill(gradient.begin(), gradient.end(), 0.0);
      for (std::size_t i = start; i < stop; ++i) {
        const ExampleT& ex = train_set[order[i]];
        const auto targets = targets_of(ex);
        sum += example_loss(params, ex.input, targets, &rng, scale, &gradient);
      }
      adam.step(params.values(), gradient);
    }
    epoch_loss.push_back(sum / static_cast<double>(order.size()));
    if (!params.all_finite())
      throw PipelineError("train", "parameters diverged at epoch " + std::to_string(epoch));
    if (checkpoints.contains(epoch)) record(epoch);
  }
  return epoch_loss;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration and parameters

void EncoderConfig::validate() const {
  if (heads == 0 || model_dim == 0 || ff_dim == 0) throw ConfigError("encoder dimensions must be positive");
  if (model_dim % heads != 0) throw ConfigError("model_dim must be divisible by heads");
  if (vocab_size == 0 || max_len == 0) throw ConfigError("vocab_size and max_len must be positive");
  if (num_classes != kNumLabels) throw ConfigError("num_classes must be 3");
  if (tasks == 0) throw ConfigError("tasks must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must be in [0, 1)");
}

ParamLayout ParamLayout::from(const EncoderConfig& config) {
  config.validate();
  const std::size_t d = config.model_dim;
  ParamLayout layout;
  append(layout, layout.token_embedding, config.vocab_size, d);
  append(layout, layout.position_embedding, config.max_len, d);
  layout.layers.resize(config.layers);
  for (auto& L : layout.layers) {
    append(layout, L.ln1_gain, 1, d);
    append(layout, L.ln1_bias, 1, d);
    append(layout, L.wq, d, d);
    append(layout, L.bq, 1, d);
    append(layout, L.wk, d, d);
    append(layout, L.bk, 1, d);
    append(layout, L.wv, d, d);
    append(layout, L.bv, 1, d);
    append(layout, L.wo, d, d);
    append(layout, L.bo, 1, d);
    append(layout, L.ln2_gain, 1, d);
    append(layout, L.ln2_bias, 1, d);
    append(layout, L.w1, d, config.ff_dim);
    append(layout, L.b1, 1, config.ff_dim);
    append(layout, L.w2, config.ff_dim, d);
    append(layout, L.b2, 1, d);
  }
  append(layout, layout.final_gain, 1, d);
  append(layout, layout.final_bias, 1, d);
  layout.heads.resize(config.tasks);
  for (auto& h : layout.heads) {
    append(layout, h.weight, d, config.num_classes);
    append(layout, h.bias, 1, config.num_classes);
  }
  return layout;
}

ModelParams::ModelParams(const EncoderConfig& config)
    : config_(config), layout_(ParamLayout::from(config)), values_(layout_.total, 0.0) {}

MatrixMap ModelParams::view(const TensorRef& t) {
  return MatrixMap(values_.data() + t.offset, static_cast<Eigen::Index>(t.rows),
                   static_cast<Eigen::Index>(t.cols));
}

ConstMatrixMap ModelParams::view(const TensorRef& t) const {
  return ConstMatrixMap(values_.data() + t.offset, static_cast<Eigen::Index>(t.rows),
                        static_cast<Eigen::Index>(t.cols));
}

bool ModelParams::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ModelParams init_params(const EncoderConfig& config) {
  ModelParams params(config);
  Rng rng(config.seed);
  auto embedding = [&](const TensorRef& t) {
    auto m = params.view(t);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      double z;
      do {
        z = rng.normal();
      } while (std::abs(z) > 2.0);
      m.data()[i] = 0.02 * z;
    }
  };
  auto dense = [&](const TensorRef& t) {
    const double limit = std::min(1.0, std::sqrt(6.0 / static_cast<double>(t.rows + t.cols)));
    auto m = params.view(t);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
  };
  auto ones = [&](const TensorRef& t) { params.view(t).setOnes(); };

  const ParamLayout& layout = params.layout();
  embedding(layout.token_embedding);
  embedding(layout.position_embedding);
  for (const auto& L : layout.layers) {
    ones(L.ln1_gain);
    for (const TensorRef* w : {&L.wq, &L.wk, &L.wv, &L.wo}) dense(*w);
    ones(L.ln2_gain);
    dense(L.w1);
    dense(L.w2);
  }
  ones(layout.final_gain);
  for (const auto& h : layout.heads) dense(h.weight);
  return params;
}

// ---------------------------------------------------------------------------
// Inference

Matrix softmax_rows(const Matrix& logits) {
  Matrix out = logits;
  softmax_in_place(out);
  return out;
}

double loss(const Matrix& logits, std::span<const Label3> gold) {
  if (static_cast<std::size_t>(logits.rows()) != gold.size())
    throw DataError("loss needs one gold label per logits row");
  if (gold.empty()) throw DataError("loss of an empty batch");
  if (logits.cols() != static_cast<Eigen::Index>(kNumLabels)) throw DataError("logits must have 3 columns");
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    const double lse = top + std::log((logits.row(i).array() - top).exp().sum());
    total += lse - logits(i, static_cast<Eigen::Index>(index_of(gold[static_cast<std::size_t>(i)])));
  }
  return total / static_cast<double>(gold.size());
}

void MultiTaskConfig::validate() const {
  double sum = 0.0;
  for (double w : task_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("task weights must be finite and non-negative");
    sum += w;
  }
  if (sum <= 0.0) throw ConfigError("at least one task weight must be positive");
}

double combine_task_losses(std::span<const double> task_losses, const MultiTaskConfig& config) {
  config.validate();
  if (task_losses.size() != kNumSymptoms) throw DataError("expected one loss per symptom");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < kNumSymptoms; ++k) {
    num += config.task_weights[k] * task_losses[k];
    den += config.task_weights[k];
  }
  return num / den;
}

double multi_task_loss(std::span<const Matrix> logits, std::span<const std::vector<Label3>> gold,
                       const MultiTaskConfig& config) {
  if (logits.size() != kNumSymptoms || gold.size() != kNumSymptoms)
    throw DataError("multi-task loss needs six logits matrices and six label lists");
  std::array<double, kNumSymptoms> losses{};
  for (std::size_t k = 0; k < kNumSymptoms; ++k)
    losses[k] = config.task_weights[k] == 0.0 && gold[k].empty() ? 0.0 : loss(logits[k], gold[k]);
  return combine_task_losses(losses, config);
}

Matrix forward(const ModelParams& params, std::span<const TokenizedInput> batch, std::size_t task) {
  if (task >= params.config().tasks) throw ConfigError("no output head " + std::to_string(task));
  Matrix logits(static_cast<Eigen::Index>(batch.size()), static_cast<Eigen::Index>(kNumLabels));
  for (std::size_t i = 0; i < batch.size(); ++i)
    logits.row(static_cast<Eigen::Index>(i)) =
        head_logits(params, encode_cls(params, batch[i], nullptr, nullptr), task);
  return logits;
}

std::vector<Matrix> forward_all_tasks(const ModelParams& params,
                                      std::span<const TokenizedInput> batch) {
  const std::size_t tasks = params.config().tasks;
  std::vector<Matrix> out(tasks, Matrix(static_cast<Eigen::Index>(batch.size()),
                                        static_cast<Eigen::Index>(kNumLabels)));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Matrix cls = encode_cls(params, batch[i], nullptr, nullptr);
    for (std::size_t t = 0; t < tasks; ++t)
      out[t].row(static_cast<Eigen::Index>(i)) = head_logits(params, cls, t);
  }
  return out;
}

Label3 argmax_label(std::span<const double> logits) {
  if (logits.size() != kNumLabels) throw DataError("argmax needs exactly 3 logits");
  std::size_t best = 0;
  for (std::size_t k = 1; k < kNumLabels; ++k)
    if (logits[k] > logits[best]) best = k;
  return kAllLabels[best];
}

namespace {
Label3 row_label(const Matrix& logits, Eigen::Index row) {
  const std::array<double, kNumLabels> r{logits(row, 0), logits(row, 1), logits(row, 2)};
  return argmax_label(r);
}
}  // namespace

Label3 predict(const ModelParams& params, const TokenizedInput& input, std::size_t task) {
  return row_label(forward(params, std::span(&input, 1), task), 0);
}

std::vector<Label3> predict_all(const ModelParams& params, std::span<const TokenizedInput> inputs,
                                std::size_t task) {
  const Matrix logits = forward(params, inputs, task);
  std::vector<Label3> out;
  out.reserve(inputs.size());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out.push_back(row_label(logits, i));
  return out;
}

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("Adam betas must be in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
  for (std::size_t c : checkpoints)
    if (c == 0 || c > epochs)
      throw ConfigError("checkpoint epoch " + std::to_string(c) + " outside 1.." + std::to_string(epochs));
}

TrainResult train(ModelParams params, std::span<const Example> train_set,
                  std::span<const Example> val_set, const TrainConfig& config,
                  const CheckpointCallback& on_checkpoint) {
  std::vector<TokenizedInput> val_inputs;
  for (const auto& ex : val_set) val_inputs.push_back(ex.input);
  TrainResult result{params, {}, {}};
  auto targets_of = [](const Example& ex) { return std::array<Target, 1>{Target{0, ex.label, 1.0}}; };
  auto record = [&](std::size_t epoch) {
    result.val_predictions[epoch] = predict_all(result.params, val_inputs);
    if (on_checkpoint) on_checkpoint(epoch, result.params);
  };
  result.epoch_loss = run_training(result.params, train_set, config, targets_of, record);
  return result;
}

MultiTaskTrainResult train_multi_task(ModelParams params, std::span<const MultiExample> train_set,
                                      std::span<const MultiExample> val_set,
                                      const TrainConfig& config, const MultiTaskConfig& weights,
                                      const CheckpointCallback& on_checkpoint) {
  weights.validate();
  if (params.config().tasks != kNumSymptoms)
    throw ConfigError("multi-task training needs a model with six output heads");
  const double total_weight =
      std::accumulate(weights.task_weights.begin(), weights.task_weights.end(), 0.0);
  std::vector<TokenizedInput> val_inputs;
  for (const auto& ex : val_set) val_inputs.push_back(ex.input);

  MultiTaskTrainResult result{params, {}, {}};
  auto targets_of = [&](const MultiExample& ex) {
    std::array<Target, kNumSymptoms> targets;
    for (SymptomKind s : kAllSymptoms)
      targets[index_of(s)] = {index_of(s), ex.labels[s], weights.task_weights[index_of(s)] / total_weight};
    return targets;
  };
  auto record = [&](std::size_t epoch) {
    const auto logits = forward_all_tasks(result.params, val_inputs);
    std::vector<SymptomLabels> predicted(val_inputs.size());
    for (SymptomKind s : kAllSymptoms)
      for (std::size_t i = 0; i < val_inputs.size(); ++i)
        predicted[i][s] = row_label(logits[index_of(s)], static_cast<Eigen::Index>(i));
    result.val_predictions[epoch] = std::move(predicted);
    if (on_checkpoint) on_checkpoint(epoch, result.params);
  };
  result.epoch_loss = run_training(result.params, train_set, config, targets_of, record);
  return result;
}

double loss_and_gradient(const ModelParams& params, std::span<const Example> batch,
                         Buffer* gradient, std::size_t task) {
  if (batch.empty()) throw DataError("loss of an empty batch");
  if (task >= params.config().tasks) throw ConfigError("no output head " + std::to_string(task));
  if (gradient) gradient->assign(params.values().size(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& ex : batch) {
    const Target target{task, ex.label, 1.0};
    total += example_loss(params, ex.input, std::span(&target, 1), nullptr, scale, gradient);
  }
  return total * scale;
}

GradCheckReport grad_check(const ModelParams& params, std::span<const Example> batch,
                           std::size_t samples, double step, std::uint64_t seed) {
  Buffer analytic;
  loss_and_gradient(params, batch, &analytic);
  const std::size_t total = params.values().size();

  std::vector<std::size_t> indices(total);
  std::iota(indices.begin(), indices.end(), 0);
  if (samples < total) {
    Rng rng(seed);
    rng.shuffle(std::span(indices));
    indices.resize(samples);
    std::sort(indices.begin(), indices.end());
  }

  ModelParams probe = params;
  GradCheckReport report;
  for (std::size_t i : indices) {
    const double original = probe.values()[i];
    probe.values()[i] = original + step;
    const double up = loss_and_gradient(probe, batch, nullptr);
    probe.values()[i] = original - step;
    const double down = loss_and_gradient(probe, batch, nullptr);
    probe.values()[i] = original;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic[i];
    const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
    report.max_relative_error = std::max(report.max_relative_error, rel);
    report.max_abs_analytic = std::max(report.max_abs_analytic, std::abs(a));
    report.max_abs_numeric = std::max(report.max_abs_numeric, std::abs(numeric));
    ++report.checked;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

nlohmann::json config_to_json(const EncoderConfig& c) {
  return {{"layers", c.layers},       {"heads", c.heads},         {"model_dim", c.model_dim},
          {"ff_dim", c.ff_dim},       {"vocab_size", c.vocab_size}, {"max_len", c.max_len},
          {"num_classes", c.num_classes}, {"tasks", c.tasks},     {"dropout_rate", c.dropout_rate},
          {"seed", c.seed}};
}

EncoderConfig config_from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.layers = j.at("layers").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.model_dim = j.at("model_dim").get<std::size_t>();
  c.ff_dim = j.at("ff_dim").get<std::size_t>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.num_classes = j.at("num_classes").get<std::size_t>();
  c.tasks = j.at("tasks").get<std::size_t>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& what) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw DataError("truncated checkpoint " + what);
  return value;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  const std::string header = config_to_json(params.config()).dump();
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_pod(out, kCheckpointVersion);
  write_pod(out, static_cast<std::uint64_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  write_pod(out, static_cast<std::uint64_t>(params.values().size()));
  out.write(reinterpret_cast<const char*>(params.values().data()),
            static_cast<std::streamsize>(params.values().size() * sizeof(double)));
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw DataError(path.string() + " is not a model checkpoint");
  const auto version = read_pod<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  const auto header_size = read_pod<std::uint64_t>(in, "header size");
  std::string header(header_size, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(header_size)))
    throw DataError("truncated checkpoint header");
  EncoderConfig config;
  try {
    config = config_from_json(nlohmann::json::parse(header));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad checkpoint header: ") + e.what());
  }
  ModelParams params(config);
  const auto count = read_pod<std::uint64_t>(in, "parameter count");
  if (count != params.values().size())
    throw DataError("checkpoint holds " + std::to_string(count) + " values, config needs " +
                    std::to_string(params.values().size()));
  if (!in.read(reinterpret_cast<char*>(params.values().data()),
               static_cast<std::streamsize>(count * sizeof(double))))
    throw DataError("truncated checkpoint parameters");
  if (!params.all_finite()) throw DataError("checkpoint contains non-finite parameters");
  return params;
}

}  // namespace angina::nn
