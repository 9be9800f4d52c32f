#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "angina/symptom.hpp"
#include "angina/tokenizer.hpp"

namespace angina::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstMatrixMap = Eigen::Map<const Matrix>;
// Fixed alignment keeps vectorized reductions bitwise reproducible.
using Buffer = std::vector<double, Eigen::aligned_allocator<double>>;

struct EncoderConfig {
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t model_dim = 64;
  std::size_t ff_dim = 256;
  std::size_t vocab_size = 4096;
  std::size_t max_len = 512;
  std::size_t num_classes = 3;
  // 1 for a single-symptom model, 6 for the multi-task variant.
  std::size_t tasks = 1;
  double dropout_rate = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

// Slice of the flat parameter buffer viewed as a rows x cols matrix.
struct TensorRef {
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t size() const { return rows * cols; }
};

struct LayerLayout {
  TensorRef ln1_gain, ln1_bias;
  TensorRef wq, bq, wk, bk, wv, bv, wo, bo;
  TensorRef ln2_gain, ln2_bias;
  TensorRef w1, b1, w2, b2;
};

struct HeadLayout {
  TensorRef weight, bias;
};

struct ParamLayout {
  TensorRef token_embedding;
  TensorRef position_embedding;
  std::vector<LayerLayout> layers;
  TensorRef final_gain, final_bias;
  std::vector<HeadLayout> heads;
  std::size_t total = 0;

  static ParamLayout from(const EncoderConfig& config);
};

// All weights live in one contiguous buffer; the layout names the slices.
class ModelParams {
 public:
  explicit ModelParams(const EncoderConfig& config);

  const EncoderConfig& config() const { return config_; }
  const ParamLayout& layout() const { return layout_; }
  Buffer& values() { return values_; }
  const Buffer& values() const { return values_; }

  MatrixMap view(const TensorRef& t);
  ConstMatrixMap view(const TensorRef& t) const;

  bool all_finite() const;
  bool operator==(const ModelParams& other) const {
    return config_ == other.config_ && values_ == other.values_;
  }

 private:
  EncoderConfig config_;
  ParamLayout layout_;
  Buffer values_;
};

// Xavier-uniform dense weights, truncated-normal (std 0.02, |z| <= 2)
// embeddings, unit layer-norm gains, zero biases. Every value is in [-1, 1].
ModelParams init_params(const EncoderConfig& config);

// Evaluation-mode logits [batch x num_classes] for output head `task`.
Matrix forward(const ModelParams& params, std::span<const TokenizedInput> batch,
               std::size_t task = 0);
// One logits matrix per output head.
std::vector<Matrix> forward_all_tasks(const ModelParams& params,
                                      std::span<const TokenizedInput> batch);

Matrix softmax_rows(const Matrix& logits);

// Mean cross-entropy over rows.
double loss(const Matrix& logits, std::span<const Label3> gold);

struct MultiTaskConfig {
  std::array<double, kNumSymptoms> task_weights{1, 1, 1, 1, 1, 1};
  void validate() const;
};

// Weighted average of per-task losses: sum_k w_k L_k / sum_k w_k.
double combine_task_losses(std::span<const double> task_losses, const MultiTaskConfig& config);
double multi_task_loss(std::span<const Matrix> logits,
                       std::span<const std::vector<Label3>> gold,
                       const MultiTaskConfig& config);

// Argmax; ties go to the earlier label (Absent, Positive, Negative).
Label3 argmax_label(std::span<const double> logits);
Label3 predict(const ModelParams& params, const TokenizedInput& input, std::size_t task = 0);
std::vector<Label3> predict_all(const ModelParams& params, std::span<const TokenizedInput> inputs,
                                std::size_t task = 0);

struct Example {
  TokenizedInput input;
  Label3 label = Label3::Absent;
};

struct MultiExample {
  TokenizedInput input;
  SymptomLabels labels;
};

inline const std::vector<std::size_t> kCandidateEpochs{2, 4, 8, 16, 32, 64, 128};

struct TrainConfig {
  std::size_t epochs = 128;
  // Epoch counts at which validation predictions are recorded.
  std::vector<std::size_t> checkpoints = kCandidateEpochs;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;

  void validate() const;
};

using CheckpointCallback = std::function<void(std::size_t epoch, const ModelParams& params)>;

struct TrainResult {
  ModelParams params;
  std::map<std::size_t, std::vector<Label3>> val_predictions;
  std::vector<double> epoch_loss;  // mean training loss per epoch
};

// Seeded shuffling and dropout; single-threaded and deterministic.
TrainResult train(ModelParams params, std::span<const Example> train_set,
                  std::span<const Example> val_set, const TrainConfig& config,
                  const CheckpointCallback& on_checkpoint = {});

struct MultiTaskTrainResult {
  ModelParams params;
  std::map<std::size_t, std::vector<SymptomLabels>> val_predictions;
  std::vector<double> epoch_loss;
};

MultiTaskTrainResult train_multi_task(ModelParams params, std::span<const MultiExample> train_set,
                                      std::span<const MultiExample> val_set,
                                      const TrainConfig& config, const MultiTaskConfig& weights,
                                      const CheckpointCallback& on_checkpoint = {});

// Evaluation-mode mean loss of head `task`; fills `gradient` (same layout
// as the parameters) when non-null.
double loss_and_gradient(const ModelParams& params, std::span<const Example> batch,
                         Buffer* gradient, std::size_t task = 0);

struct GradCheckReport {
  double max_relative_error = 0.0;
  double max_abs_analytic = 0.0;
  double max_abs_numeric = 0.0;
  std::size_t checked = 0;
};

// Central differences over up to `samples` parameters (all of them when the
// model is smaller); relative error floor 1e-6.
GradCheckReport grad_check(const ModelParams& params, std::span<const Example> batch,
                           std::size_t samples = 256, double step = 1e-5,
                           std::uint64_t seed = 0);

// Binary checkpoint: magic, version, JSON config header, raw doubles.
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace angina::nn
