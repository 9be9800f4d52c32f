#include "angina/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "angina/corpus.hpp"
#include "angina/error.hpp"
#include "angina/lexicon.hpp"
#include "angina/report.hpp"
#include "angina/rng.hpp"
#include "angina/text_scan.hpp"

namespace angina::rules {
extern const std::string_view kBuiltinLexiconText;
}

namespace angina::cli {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kWithholdSalt = 7;

// ---------------------------------------------------------------------------
// Config (de)serialization

class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("config key '" + name_ + "." + key + "' has the wrong type");
    }
  }

  std::optional<Section> child(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return Section(*it, name_.empty() ? key : name_ + "." + key);
  }

  const Json& raw() const { return j_; }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.contains(key))
        throw ConfigError("unknown config key '" + (name_.empty() ? key : name_ + "." + key) + "'");
  }

 private:
  const Json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

SymptomKind symptom_or_throw(const std::string& name) {
  const auto s = parse_symptom(name);
  if (!s) throw ConfigError("unknown symptom '" + name + "'");
  return *s;
}

std::vector<SymptomKind> parse_symptoms(const std::vector<std::string>& names) {
  std::vector<SymptomKind> out;
  for (const auto& n : names) {
    if (rules::ascii_lower(n) == "all") {
      out.assign(kAllSymptoms.begin(), kAllSymptoms.end());
      continue;
    }
    const SymptomKind s = symptom_or_throw(n);
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  // Reports follow the canonical symptom order.
  std::sort(out.begin(), out.end(), [](SymptomKind a, SymptomKind b) { return index_of(a) < index_of(b); });
  return out;
}

void read_config(Section root, RunConfig& c) {
  if (auto s = root.child("paths")) {
    s->get("corpus", c.paths.corpus);
    s->get("lexicon", c.paths.lexicon);
    s->get("vocab", c.paths.vocab);
    s->get("checkpoint", c.paths.checkpoint);
    s->get("output_dir", c.paths.output_dir);
    s->finish();
  }
  if (auto s = root.child("seeds")) {
    s->get("corpus", c.seeds.corpus);
    s->get("init", c.seeds.init);
    s->get("train", c.seeds.train);
    s->finish();
  }
  if (auto s = root.child("generator")) {
    s->get("n_notes", c.generator.n_notes);
    s->get("distractor_rate", c.generator.distractor_rate);
    s->get("conflict_rate", c.generator.conflict_rate);
    s->get("long_note_rate", c.generator.long_note_rate);
    if (auto p = s->child("prevalence")) {
      for (const auto& [name, value] : p->raw().items()) {
        Section rate(value, "generator.prevalence." + name);
        Prevalence& prev = c.generator[symptom_or_throw(name)];
        rate.get("positive", prev.positive_rate);
        rate.get("negative", prev.negative_rate);
        rate.finish();
      }
    }
    s->finish();
  }
  if (auto s = root.child("tokenizer")) {
    s->get("max_len", c.tokenizer.max_len);
    s->get("vocab_size", c.tokenizer.vocab_size);
    s->get("lowercase", c.tokenizer.lowercase);
    s->finish();
  }
  if (auto s = root.child("encoder")) {
    s->get("layers", c.encoder.layers);
    s->get("heads", c.encoder.heads);
    s->get("model_dim", c.encoder.model_dim);
    s->get("ff_dim", c.encoder.ff_dim);
    s->get("dropout_rate", c.encoder.dropout_rate);
    s->finish();
  }
  if (auto s = root.child("train")) {
    s->get("batch_size", c.train.batch_size);
    s->get("learning_rate", c.train.learning_rate);
    s->get("beta1", c.train.beta1);
    s->get("beta2", c.train.beta2);
    s->get("epsilon", c.train.epsilon);
    s->finish();
  }
  root.get("epoch_set", c.epoch_set);
  root.get("folds", c.folds);
  if (auto s = root.child("segmenter")) {
    s->get("headers", c.segmenter.header_lexicon);
    s->get("terminators", c.segmenter.terminator_lexicon);
    s->finish();
  }
  if (auto s = root.child("rules")) {
    s->get("negation_window", c.rules.negation_window);
    s->get("sentence_delimiters", c.rules.sentence_delimiters);
    s->get("duration_window", c.rules.duration_window);
    s->finish();
  }
  std::vector<std::string> symptoms;
  root.get("symptoms", symptoms);
  if (!symptoms.empty()) c.symptoms = parse_symptoms(symptoms);
  root.get("multi_task", c.multi_task);
  if (auto s = root.child("task_weights")) {
    for (const auto& [name, value] : s->raw().items()) {
      if (!value.is_number()) throw ConfigError("task weight for " + name + " must be a number");
      c.task_weights.task_weights[index_of(symptom_or_throw(name))] = value.get<double>();
    }
  }
  root.get("withhold_grid", c.withhold_grid);
  root.finish();
}

Json config_json(const RunConfig& c, bool include_output_dir) {
  Json paths = {{"corpus", c.paths.corpus},
                {"lexicon", c.paths.lexicon},
                {"vocab", c.paths.vocab},
                {"checkpoint", c.paths.checkpoint}};
  if (include_output_dir) paths["output_dir"] = c.paths.output_dir;
  Json prevalence = Json::object();
  for (SymptomKind s : kAllSymptoms)
    prevalence[std::string(symptom_name(s))] = {{"positive", c.generator[s].positive_rate},
                                                {"negative", c.generator[s].negative_rate}};
  Json symptoms = Json::array();
  for (SymptomKind s : c.symptoms) symptoms.push_back(symptom_name(s));
  Json weights = Json::object();
  for (SymptomKind s : kAllSymptoms)
    weights[std::string(symptom_name(s))] = c.task_weights.task_weights[index_of(s)];
  return {
      {"paths", paths},
      {"seeds", {{"corpus", c.seeds.corpus}, {"init", c.seeds.init}, {"train", c.seeds.train}}},
      {"generator",
       {{"n_notes", c.generator.n_notes},
        {"distractor_rate", c.generator.distractor_rate},
        {"conflict_rate", c.generator.conflict_rate},
        {"long_note_rate", c.generator.long_note_rate},
        {"prevalence", prevalence}}},
      {"tokenizer",
       {{"max_len", c.tokenizer.max_len},
        {"vocab_size", c.tokenizer.vocab_size},
        {"lowercase", c.tokenizer.lowercase}}},
      {"encoder",
       {{"layers", c.encoder.layers},
        {"heads", c.encoder.heads},
        {"model_dim", c.encoder.model_dim},
        {"ff_dim", c.encoder.ff_dim},
        {"dropout_rate", c.encoder.dropout_rate}}},
      {"train",
       {{"batch_size", c.train.batch_size},
        {"learning_rate", c.train.learning_rate},
        {"beta1", c.train.beta1},
        {"beta2", c.train.beta2},
        {"epsilon", c.train.epsilon}}},
      {"epoch_set", c.epoch_set},
      {"folds", c.folds},
      {"segmenter",
       {{"headers", c.segmenter.header_lexicon}, {"terminators", c.segmenter.terminator_lexicon}}},
      {"rules",
       {{"negation_window", c.rules.negation_window},
        {"sentence_delimiters", c.rules.sentence_delimiters},
        {"duration_window", c.rules.duration_window}}},
      {"symptoms", symptoms},
      {"multi_task", c.multi_task},
      {"task_weights", weights},
      {"withhold_grid", c.withhold_grid},
  };
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// Commands

struct Context {
  RunConfig config;
  std::vector<std::string> inputs;  // positional files
  std::string text;
  std::ostream& out;
  std::ostream& err;
  std::string stage = "setup";
};

rules::CueLexicon lexicon_for(const RunConfig& c) {
  return c.paths.lexicon.empty() ? rules::CueLexicon::builtin() : rules::CueLexicon::load(c.paths.lexicon);
}

std::filesystem::path output_dir(const RunConfig& c) { return c.paths.output_dir; }

Corpus require_corpus(Context& ctx) {
  ctx.stage = "load corpus";
  if (ctx.config.paths.corpus.empty()) throw ConfigError("no corpus path given (--corpus)");
  Corpus corpus = load_corpus(ctx.config.paths.corpus);
  if (corpus.empty()) throw DataError("corpus " + ctx.config.paths.corpus + " has no notes");
  return corpus;
}

int cmd_generate(Context& ctx) {
  RunConfig& c = ctx.config;
  ctx.stage = "generate";
  GeneratorConfig g = c.generator;
  g.seed = c.seeds.corpus;
  const rules::CueLexicon lexicon = lexicon_for(c);
  const Corpus corpus = generate_synthetic(g, lexicon);
  ctx.stage = "write corpus";
  const std::filesystem::path path =
      c.paths.corpus.empty() ? output_dir(c) / "corpus.jsonl" : std::filesystem::path(c.paths.corpus);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  save_corpus(corpus, path);
  ctx.out << "wrote " << corpus.size() << " notes to " << path.string() << '\n';
  return kOk;
}

std::vector<std::string> read_inputs(Context& ctx) {
  std::vector<std::string> texts;
  if (!ctx.text.empty()) texts.push_back(ctx.text);
  for (const auto& path : ctx.inputs) texts.push_back(report::read_file(path));
  if (texts.empty()) throw ConfigError("give note text with --text or input files");
  return texts;
}

int cmd_segment(Context& ctx) {
  ctx.stage = "segment";
  int code = kOk;
  for (const auto& text : read_inputs(ctx)) {
    const auto section = extract_hpi(text, ctx.config.segmenter);
    if (!section) {
      ctx.err << "no HPI section found\n";
      code = kDataError;
      continue;
    }
    ctx.out << section->text << '\n';
  }
  return code;
}

void print_labels(std::ostream& out, const SymptomLabels& labels) {
  bool first = true;
  for (SymptomKind s : kAllSymptoms) {
    out << (first ? "" : " ") << symptom_abbrev(s) << '=' << label_name(labels[s]);
    first = false;
  }
  out << '\n';
}

int cmd_annotate(Context& ctx) {
  RunConfig& c = ctx.config;
  ctx.stage = "annotate";
  const rules::CueLexicon lexicon = lexicon_for(c);
  c.rules.validate();
  if (!ctx.text.empty() || !ctx.inputs.empty()) {
    for (const auto& text : read_inputs(ctx))
      print_labels(ctx.out, rules::label_note(hpi_or_whole(text, c.segmenter), lexicon, c.rules));
    return kOk;
  }
  const Corpus corpus = require_corpus(ctx);
  ctx.stage = "annotate";
  std::vector<AnnotatedNote> notes;
  std::size_t agree = 0;
  for (const auto& note : corpus) {
    AnnotatedNote labelled = note;
    labelled.labels = rules::label_note(hpi_or_whole(note.hpi_text, c.segmenter), lexicon, c.rules);
    agree += labelled.labels == note.labels;
    notes.push_back(std::move(labelled));
  }
  ctx.stage = "write corpus";
  const auto path = output_dir(c) / "annotated.jsonl";
  std::filesystem::create_directories(output_dir(c));
  save_corpus(Corpus(std::move(notes)), path);
  ctx.out << "annotated " << corpus.size() << " notes (" << agree
          << " match the stored labels) into " << path.string() << '\n';
  return kOk;
}

int cmd_baseline(Context& ctx) {
  RunConfig& c = ctx.config;
  const Corpus corpus = require_corpus(ctx);
  ctx.stage = "annotate";
  c.rules.validate();
  const RunReport report = rule_baseline(corpus, lexicon_for(c), c.rules, c.segmenter, c.symptoms);
  ctx.stage = "write report";
  report::write_bundle(output_dir(c), report);
  ctx.out << report::format_metrics_table(report.symptoms);
  return kOk;
}

Vocabulary vocabulary_for(const RunConfig& c, const Corpus& corpus) {
  if (!c.paths.vocab.empty() && std::filesystem::exists(c.paths.vocab)) return Vocabulary::load(c.paths.vocab);
  return build_vocab(corpus, c.tokenizer);
}

int cmd_run(Context& ctx) {
  RunConfig& c = ctx.config;
  const PipelineConfig pipeline = c.pipeline();
  const Corpus corpus = require_corpus(ctx);
  ctx.stage = "tokenize";
  const Vocabulary vocab = vocabulary_for(c, corpus);
  ctx.stage = "segment";
  const PreparedData data = prepare_inputs(corpus, vocab, c.tokenizer, c.segmenter);
  ctx.stage = "train";
  const RunReport report = cross_validate(data, c.symptoms, pipeline);

  ctx.stage = "write report";
  const auto dir = output_dir(c);
  std::filesystem::create_directories(dir);
  vocab.save(dir / "vocab.txt");
  auto files = report::write_bundle(dir, report);
  files.insert(files.begin(), dir / "vocab.txt");

  if (!c.paths.checkpoint.empty()) {
    ctx.stage = "final models";
    std::filesystem::create_directories(c.paths.checkpoint);
    for (const auto& r : report.symptoms) {
      if (c.multi_task) break;
      std::vector<nn::Example> all;
      for (std::size_t i = 0; i < data.inputs.size(); ++i) all.push_back({data.inputs[i], data.gold[i][r.symptom]});
      nn::EncoderConfig enc = pipeline.encoder;
      enc.vocab_size = data.vocab_size;
      enc.max_len = c.tokenizer.max_len;
      enc.seed = mix_seed(c.seeds.init, index_of(r.symptom));
      nn::TrainConfig t = pipeline.train;
      t.epochs = r.selected_epochs;
      t.checkpoints = {r.selected_epochs};
      t.seed = mix_seed(c.seeds.train, index_of(r.symptom));
      const auto trained = nn::train(nn::init_params(enc), all, {}, t);
      nn::save_checkpoint(trained.params, std::filesystem::path(c.paths.checkpoint) /
                                              ("model_" + std::string(symptom_name(r.symptom)) + ".bin"));
    }
  }

  Json hashes = {{"corpus", hex64(fnv1a64(report::read_file(c.paths.corpus)))},
                 {"lexicon", hex64(fnv1a64(c.paths.lexicon.empty() ? std::string(rules::kBuiltinLexiconText)
                                                                   : report::read_file(c.paths.lexicon)))},
                 {"config", hex64(fnv1a64(run_config_to_json(c, false)))}};
  Json outputs = Json::object();
  for (const auto& f : files) outputs[f.filename().string()] = hex64(fnv1a64(report::read_file(f)));
  const Json manifest = {
      {"config", config_json(c, false)},
      {"hashes", hashes},
      {"truncation",
       {{"truncated", report.truncation.truncated},
        {"total", report.truncation.total},
        {"chi_square", report.truncation.chi_square.statistic},
        {"df", report.truncation.chi_square.df},
        {"p_value", report.truncation.chi_square.p_value}}},
      {"outputs", outputs},
  };
  report::write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  ctx.out << report::format_metrics_table(report.symptoms);
  ctx.out << "truncated " << report.truncation.truncated << " of " << report.truncation.total
          << " notes";
  if (report.truncation.chi_square.df > 0) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), " (chi-square %.3f, df %zu, p = %.3f)",
                  report.truncation.chi_square.statistic, report.truncation.chi_square.df,
                  report.truncation.chi_square.p_value);
    ctx.out << buf;
  }
  ctx.out << '\n';
  return kOk;
}

int cmd_withhold(Context& ctx) {
  RunConfig& c = ctx.config;
  const PipelineConfig pipeline = c.pipeline();
  const Corpus corpus = require_corpus(ctx);
  ctx.stage = "tokenize";
  const Vocabulary vocab = vocabulary_for(c, corpus);
  const auto dir = output_dir(c);
  for (SymptomKind s : c.symptoms) {
    ctx.stage = "withhold " + std::string(symptom_name(s));
    const auto rows = withholding_sweep(corpus, s, c.withhold_grid, vocab, c.segmenter, pipeline,
                                        mix_seed(c.seeds.corpus, kWithholdSalt));
    std::ostringstream csv;
    csv << "n_positives,precision,recall,f1,specificity,mcc,epochs\n";
    char buf[160];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%zu\n", r.n_positives,
                    r.metrics.precision, r.metrics.recall, r.metrics.f1, r.metrics.specificity,
                    r.metrics.mcc, r.selected_epochs);
      csv << buf;
    }
    const auto path = dir / ("withholding_" + std::string(symptom_name(s)) + ".csv");
    report::write_file(path, csv.str());
    ctx.out << csv.str();
  }
  return kOk;
}

int cmd_report(Context& ctx) {
  RunConfig& c = ctx.config;
  ctx.stage = "read confusion table";
  if (ctx.inputs.size() != 1) throw ConfigError("report needs exactly one confusion table file");
  std::istringstream in(report::read_file(ctx.inputs.front()));
  const auto table = report::read_confusion_table(in);
  RunReport run;
  for (SymptomKind s : c.symptoms) {
    const auto it = table.find(s);
    if (it == table.end()) continue;
    SymptomReport r;
    r.symptom = s;
    r.test_confusion = it->second;
    r.test_metrics = eval::metrics(eval::collapse(it->second));
    run.symptoms.push_back(r);
  }
  if (run.symptoms.empty()) throw DataError("confusion table has none of the selected symptoms");
  ctx.stage = "write report";
  report::write_bundle(output_dir(c), run);
  ctx.out << report::format_metrics_table(run.symptoms);
  return kOk;
}

}  // namespace

PipelineConfig RunConfig::pipeline() const {
  PipelineConfig p;
  p.tokenizer = tokenizer;
  p.encoder = encoder;
  p.train = train;
  p.epoch_set = epoch_set;
  p.folds = folds;
  p.fold_seed = seeds.corpus;
  p.init_seed = seeds.init;
  p.train_seed = seeds.train;
  p.multi_task = multi_task;
  p.task_weights = task_weights;
  p.validate();
  return p;
}

void RunConfig::validate() const {
  GeneratorConfig g = generator;
  g.validate();
  segmenter.validate();
  rules.validate();
  pipeline();
  if (symptoms.empty()) throw ConfigError("no symptoms selected");
}

RunConfig parse_run_config(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("config") && j.contains("hashes")) j = Json(j["config"]);
  RunConfig c;
  read_config(Section(j, ""), c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = report::read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(text);
}

std::string run_config_to_json(const RunConfig& config, bool include_output_dir) {
  return config_json(config, include_output_dir).dump(2);
}

std::vector<std::size_t> parse_count_list(std::string_view text) {
  std::vector<std::size_t> out;
  std::string cell;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, cell, ',')) {
    cell.erase(std::remove_if(cell.begin(), cell.end(), [](char ch) { return ch == ' '; }), cell.end());
    if (cell.empty() || !std::all_of(cell.begin(), cell.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
      throw ConfigError("'" + std::string(text) + "' is not a comma-separated list of counts");
    out.push_back(static_cast<std::size_t>(std::stoull(cell)));
  }
  if (out.empty()) throw ConfigError("empty count list");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anginal symptom extraction from clinical notes"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, corpus, lexicon, vocab, checkpoint, out_dir, epochs_set, grid, text;
  std::optional<std::uint64_t> seed_corpus, seed_init, seed_train;
  std::optional<std::size_t> max_len, n_notes;
  std::vector<std::string> symptoms, inputs;
  bool multi_task = false;

  app.add_option("--config", config_path, "JSON run config or a run manifest");
  app.add_option("--corpus", corpus, "Corpus file (line-delimited JSON)");
  app.add_option("--lexicon", lexicon, "Cue lexicon file (built-in when omitted)");
  app.add_option("--vocab", vocab, "Vocabulary file to reuse");
  app.add_option("--checkpoint", checkpoint, "Directory for final per-symptom models");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed-corpus", seed_corpus, "Corpus and fold seed");
  app.add_option("--seed-init", seed_init, "Weight initialization seed");
  app.add_option("--seed-train", seed_train, "Shuffling and dropout seed");
  app.add_option("--symptom", symptoms, "Symptom name or abbreviation, or 'all' (repeatable)");
  app.add_flag("--multi-task", multi_task, "Train one six-head model per fold");
  app.add_option("--max-len", max_len, "Tokens per input");
  app.add_option("--epochs-set", epochs_set, "Comma-separated candidate epoch counts");
  app.add_option("--n-notes", n_notes, "Notes to generate");
  app.add_option("--grid", grid, "Comma-separated positive counts for withholding");
  app.add_option("--text", text, "Note text (segment, annotate)");

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(Context&);
  };
  const Command commands[] = {
      {"generate", "Write a seeded synthetic corpus", cmd_generate},
      {"segment", "Print the HPI section of note files", cmd_segment},
      {"annotate", "Label notes with the rule annotator", cmd_annotate},
      {"baseline", "Score the rule annotator against corpus labels", cmd_baseline},
      {"run", "Cross-validate transformer models and write the report bundle", cmd_run},
      {"withhold", "Sweep the number of positive training examples", cmd_withhold},
      {"report", "Metrics from a confusion table CSV", cmd_report},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("inputs", inputs, "Input files");
    subs.emplace_back(sub, &cmd);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kUsage;
  }

  Context ctx{RunConfig{}, inputs, text, out, err};
  try {
    if (!config_path.empty()) ctx.config = load_run_config(config_path);
    RunConfig& c = ctx.config;
    if (!corpus.empty()) c.paths.corpus = corpus;
    if (!lexicon.empty()) c.paths.lexicon = lexicon;
    if (!vocab.empty()) c.paths.vocab = vocab;
    if (!checkpoint.empty()) c.paths.checkpoint = checkpoint;
    if (!out_dir.empty()) c.paths.output_dir = out_dir;
    if (seed_corpus) c.seeds.corpus = *seed_corpus;
    if (seed_init) c.seeds.init = *seed_init;
    if (seed_train) c.seeds.train = *seed_train;
    if (!symptoms.empty()) c.symptoms = parse_symptoms(symptoms);
    if (multi_task) c.multi_task = true;
    if (max_len) c.tokenizer.max_len = *max_len;
    if (!epochs_set.empty()) c.epoch_set = parse_count_list(epochs_set);
    if (n_notes) c.generator.n_notes = *n_notes;
    if (!grid.empty()) c.withhold_grid = parse_count_list(grid);
    c.validate();

    for (const auto& [sub, cmd] : subs)
      if (sub->parsed()) return cmd->fn(ctx);
    return kUsage;
  } catch (const ConfigError& e) {
    err << "error: " << ctx.stage << ": " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << ctx.stage << ": " << e.what() << '\n';
    return kDataError;
  } catch (const PipelineError& e) {
    err << "error: " << e.what() << '\n';
    return kPipelineFailure;
  } catch (const std::exception& e) {
    err << "error: " << ctx.stage << ": " << e.what() << '\n';
    return kPipelineFailure;
  }
}

}  // namespace angina::cli
