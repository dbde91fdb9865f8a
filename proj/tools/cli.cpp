#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cantm/analysis.hpp"
#include "cantm/annotations.hpp"
#include "cantm/checkpoint.hpp"
#include "cantm/corpus.hpp"
#include "cantm/embedding.hpp"
#include "cantm/enrich.hpp"
#include "cantm/error.hpp"
#include "cantm/evaluation.hpp"
#include "cantm/plot.hpp"
#include "cantm/topics.hpp"
#include "cantm/training.hpp"

#ifndef CANTM_VERSION
#define CANTM_VERSION "0.0.0"
#endif

namespace cantm::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using Model = model::CantmModel<double>;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  bool quiet = false;
  std::string out;
  std::string replay;
};

// Everything a command reports about itself for the run manifest.
struct RunRecord {
  ordered_json config = ordered_json::object();
  ordered_json inputs = ordered_json::object();
  ordered_json outputs = ordered_json::object();
  std::uint64_t seed = 0;
  fs::path manifest_path;
};

class Context {
 public:
  Context(const Globals& g, std::ostream& out, std::ostream& err) : g_(g), out_(out), err_(err) {
    if (!g.config_path.empty()) {
      std::ifstream in(g.config_path);
      if (!in) throw ValidationError("cannot open config " + g.config_path);
      try {
        config_ = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ParseError(g.config_path + ": " + e.what());
      }
      if (!config_.is_object()) throw ValidationError(g.config_path + ": config must be a JSON object");
    } else {
      config_ = json::object();
    }
  }

  const Globals& globals() const { return g_; }
  const json& config() const { return config_; }
  std::ostream& out() { return out_; }
  RunRecord& record() { return record_; }

  std::ostream& log() {
    static std::ostringstream sink;
    if (g_.quiet) {
      sink.str("");
      return sink;
    }
    return err_;
  }

  fs::path require_out(const char* what) const {
    if (g_.out.empty()) throw ValidationError(std::string("--out <path> is required (") + what + ")");
    return g_.out;
  }

  std::uint64_t seed(std::uint64_t fallback = 0) const { return g_.seed.value_or(fallback); }

 private:
  const Globals& g_;
  std::ostream& out_;
  std::ostream& err_;
  json config_;
  RunRecord record_;
};

corpus::RecordFormat format_for(const fs::path& p, const std::string& flag) {
  if (!flag.empty()) {
    auto f = corpus::parse_record_format(flag);
    if (!f) throw ValidationError("unknown record format \"" + flag + "\"");
    return *f;
  }
  return p.extension() == ".csv" ? corpus::RecordFormat::Csv : corpus::RecordFormat::JsonLines;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return out;
}

void write_text(const fs::path& p, const std::string& text) {
  auto out = open_out(p);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + p.string());
}

void write_json(const fs::path& p, const ordered_json& j) { write_text(p, j.dump(2) + "\n"); }

fs::path sibling(const fs::path& out, const std::string& suffix) { return fs::path(out.string() + suffix); }

// Model, training and vocabulary settings from --config plus command flags.
struct Settings {
  json model = json::object();
  training::TrainConfig train;
  std::size_t max_vocab = 2000;
  std::string stopwords;
};

Settings load_settings(const Context& ctx) {
  Settings s;
  const json& c = ctx.config();
  static const std::set<std::string> known = {"model", "train", "vocabulary", "folds", "perplexity_mode"};
  for (const auto& [k, _] : c.items()) {
    if (!known.contains(k)) throw ValidationError("config: unknown key \"" + k + "\"");
  }
  if (c.contains("model")) s.model = c.at("model");
  if (c.contains("train")) s.train = training::train_config_from_json(c.at("train"));
  if (c.contains("vocabulary")) {
    const auto& v = c.at("vocabulary");
    s.max_vocab = v.value("max_size", s.max_vocab);
    s.stopwords = v.value("stopwords", s.stopwords);
  }
  return s;
}

struct ModelFlags {
  std::string variant;
  std::string embeddings;
  int epochs = 0;
  int patience = 0;
  int batch_size = 0;
  double lr = 0;
  int samples = 0;
  std::size_t vocab_size = 0;
  std::string stopwords;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--variant", f.variant, "Model variant: cantm or nvdm")->check(CLI::IsMember({"cantm", "nvdm"}));
  cmd->add_option("--embeddings", f.embeddings, "Precomputed document embeddings (JSON-lines); selects the embedding encoder")
      ->check(CLI::ExistingFile);
  cmd->add_option("--epochs", f.epochs, "Maximum training epochs");
  cmd->add_option("--patience", f.patience, "Early-stopping patience in epochs");
  cmd->add_option("--batch-size", f.batch_size, "Minibatch size");
  cmd->add_option("--lr", f.lr, "Adam learning rate");
  cmd->add_option("--samples", f.samples, "Latent samples per document during training");
  cmd->add_option("--vocab-size", f.vocab_size, "Maximum vocabulary size");
  cmd->add_option("--stopwords", f.stopwords, "Stopword file, one token per line")->check(CLI::ExistingFile);
}

void apply_flags(Settings& s, const ModelFlags& f) {
  if (!f.variant.empty()) s.model["variant"] = f.variant;
  if (!f.embeddings.empty()) s.model["encoder"] = "embedding";
  if (f.epochs) s.train.max_epochs = f.epochs;
  if (f.patience) s.train.patience = f.patience;
  if (f.batch_size) s.train.batch_size = f.batch_size;
  if (f.lr) s.train.learning_rate = f.lr;
  if (f.samples) s.train.n_train_samples = f.samples;
  if (f.vocab_size) s.max_vocab = f.vocab_size;
  if (!f.stopwords.empty()) s.stopwords = f.stopwords;
  s.train.validate();
}

text::StopwordSet stopwords_for(const Settings& s) {
  return s.stopwords.empty() ? text::default_stopwords() : text::load_stopwords(s.stopwords);
}

std::shared_ptr<const EmbeddingTable> load_embeddings(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const EmbeddingTable>(EmbeddingTable::load(path));
}

// Final model config for a vocabulary: labels default to every category and
// lambda to |V|/C unless the config file sets them.
model::ModelConfig resolve_model_config(const Settings& s, std::size_t vocab_size, const EmbeddingTable* table) {
  json j = s.model;
  if (!j.contains("labels")) {
    std::vector<std::string> labels;
    for (Category c : kAllCategories) labels.emplace_back(to_string(c));
    j["labels"] = labels;
  }
  j["num_classes"] = j["labels"].size();
  j["vocab_size"] = vocab_size;
  if (table) {
    j["encoder"] = "embedding";
    j["d_h"] = table->dim();
  } else if (j.value("encoder", "bow") == "embedding") {
    throw ValidationError("the embedding encoder needs --embeddings");
  }
  if (!j.contains("lambda"))
    j["lambda"] = training::lambda_weight(static_cast<int>(vocab_size), j["num_classes"].get<int>());
  return model::config_from_json(j);
}

std::vector<corpus::LabeledDocument> to_documents(std::vector<corpus::DebunkRecord> records, bool labeled_only,
                                                  std::size_t& skipped) {
  std::vector<corpus::LabeledDocument> docs;
  skipped = 0;
  for (auto& r : records) {
    if (labeled_only && !r.category) {
      ++skipped;
      continue;
    }
    auto label = r.category;
    docs.push_back(corpus::make_document(std::move(r), label));
  }
  return docs;
}

ordered_json resolved_config(const model::ModelConfig& m, const training::TrainConfig& t, const Settings& s) {
  return {{"model", model::config_to_json(m)},
          {"train", training::train_config_to_json(t)},
          {"vocabulary", {{"max_size", s.max_vocab}, {"stopwords", s.stopwords}}}};
}

// ---- ingest ----

struct IngestOptions {
  std::string input;
  std::string format;
};

void cmd_ingest(Context& ctx, const IngestOptions& o) {
  const fs::path out = ctx.require_out("ingest output");
  auto records = corpus::load_debunks(o.input, format_for(o.input, o.format));
  auto file = open_out(out);
  corpus::write_debunks_jsonl(file, records);
  ctx.log() << "ingested " << records.size() << " records\n";
  for (auto d : {analysis::Dimension::Category, analysis::Dimension::MediaType, analysis::Dimension::Veracity,
                 analysis::Dimension::Platform}) {
    std::size_t unset = 0;
    for (const auto& r : records) unset += analysis::dimension_values(r, d).empty();
    if (unset) ctx.log() << "  " << unset << " records without " << analysis::to_string(d) << "\n";
  }
  ctx.record().inputs["records"] = o.input;
  ctx.record().outputs["records"] = out.string();
  ctx.record().manifest_path = sibling(out, ".manifest.json");
}

// ---- enrich ----

struct EnrichOptions {
  std::string input;
  std::string veracity_map;
  std::string platform_map;
  std::string media_rules;
  std::string source_dir;
};

std::string field_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) {
      if (!e.is_string()) continue;
      if (!s.empty()) s += " ; ";
      s += e.get<std::string>();
    }
    return s;
  }
  return {};
}

void cmd_enrich(Context& ctx, const EnrichOptions& o) {
  const fs::path out = ctx.require_out("enriched records");
  const auto veracity = o.veracity_map.empty() ? enrich::default_veracity_mapping() : enrich::MappingList::load(o.veracity_map);
  const auto platform = o.platform_map.empty() ? enrich::default_platform_mapping() : enrich::MappingList::load(o.platform_map);
  const auto rules = o.media_rules.empty() ? enrich::default_media_rules() : enrich::MediaRuleSet::load(o.media_rules);

  std::ifstream in(o.input);
  if (!in) throw ParseError("cannot open " + o.input);
  std::vector<corpus::DebunkRecord> records;
  std::size_t line_no = 0, unmapped_veracity = 0, unmapped_platform = 0, no_media = 0;
  std::set<std::string> seen;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(o.input + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) throw ParseError(o.input + ":" + std::to_string(line_no) + ": expected a JSON object");
    if (obj.contains("veracity")) {
      const auto v = enrich::normalize_field(field_text(obj["veracity"]), veracity);
      if (v.empty()) {
        ++unmapped_veracity;
        obj.erase("veracity");
      } else {
        obj["veracity"] = v.front();
      }
    }
    if (obj.contains("platform")) {
      const auto p = enrich::normalize_field(field_text(obj["platform"]), platform);
      if (p.empty()) ++unmapped_platform;
      obj["platform"] = p;
    }
    corpus::DebunkRecord rec;
    try {
      rec = corpus::record_from_json(obj);
    } catch (const std::exception& e) {
      throw ParseError(o.input + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.insert(rec.id).second) throw ValidationError("duplicate record id \"" + rec.id + "\"");
    if (!rec.media_type) {
      std::optional<std::string> source;
      if (!o.source_dir.empty()) {
        std::ifstream page(fs::path(o.source_dir) / (rec.id + ".txt"));
        if (page) source = std::string(std::istreambuf_iterator<char>(page), {});
      }
      rec.media_type = enrich::extract_media_type(rec, source, rules);
      no_media += !rec.media_type;
    }
    records.push_back(std::move(rec));
  }
  auto file = open_out(out);
  corpus::write_debunks_jsonl(file, records);
  ctx.log() << "enriched " << records.size() << " records; unmapped veracity " << unmapped_veracity
            << ", unmapped platform " << unmapped_platform << ", no media type " << no_media << "\n";
  auto& rec = ctx.record();
  rec.inputs = {{"records", o.input},
                {"veracity_map", o.veracity_map},
                {"platform_map", o.platform_map},
                {"media_rules", o.media_rules},
                {"source_dir", o.source_dir}};
  rec.outputs["records"] = out.string();
  rec.manifest_path = sibling(out, ".manifest.json");
}

// ---- merge-annotations ----

struct MergeOptions {
  std::string annotations;
  std::string records;
  std::string report;
  int threshold = corpus::kDefaultConfidenceThreshold;
  std::vector<std::string> annotator_thresholds;
  std::vector<std::string> exclude;
};

ordered_json agreement_json(const corpus::AnnotationSet& set) {
  const auto counts = corpus::count_annotations(set);
  ordered_json j = {{"annotations", set.size()},
                    {"single", counts.single},
                    {"double", counts.double_},
                    {"multiple", counts.multiple}};
  try {
    j["agreement"] = corpus::pairwise_agreement(set);
    j["kappa"] = corpus::cohen_kappa(set);
  } catch (const NumericError&) {
    j["agreement"] = nullptr;
    j["kappa"] = nullptr;
  }
  return j;
}

void cmd_merge(Context& ctx, const MergeOptions& o) {
  const fs::path out = ctx.require_out("merged labels");
  const auto all = corpus::load_annotations(o.annotations);
  std::map<std::string, int> thresholds;
  for (const auto& spec : o.annotator_thresholds) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--annotator-threshold expects NAME=VALUE, got " + spec);
    try {
      thresholds[spec.substr(0, eq)] = std::stoi(spec.substr(eq + 1));
    } catch (const std::logic_error&) {
      throw ValidationError("--annotator-threshold expects an integer value, got " + spec);
    }
  }
  const std::set<std::string> excluded(o.exclude.begin(), o.exclude.end());
  const auto kept = corpus::filter_annotations(all, thresholds, excluded, o.threshold);
  const auto merged = corpus::merge_labels(kept);

  ordered_json report = {{"before", agreement_json(all)}, {"after", agreement_json(kept)}};
  try {
    ordered_json scores = ordered_json::object();
    for (const auto& [a, s] : corpus::score_annotators(all)) scores[a] = s ? ordered_json(*s) : ordered_json(nullptr);
    report["annotator_scores"] = scores;
  } catch (const ValidationError&) {
    report["annotator_scores"] = nullptr;
  }
  report["merged_documents"] = merged.size();

  auto file = open_out(out);
  if (!o.records.empty()) {
    auto records = corpus::load_debunks(o.records, format_for(o.records, ""));
    std::size_t labeled = 0;
    for (auto& r : records) {
      if (auto it = merged.find(r.id); it != merged.end()) {
        r.category = it->second;
        ++labeled;
      }
    }
    corpus::write_debunks_jsonl(file, records);
    report["labeled_records"] = labeled;
    ctx.record().inputs["records"] = o.records;
  } else {
    for (const auto& [doc, cat] : merged) {
      file << ordered_json{{"doc_id", doc}, {"category", std::string(to_string(cat))}}.dump() << '\n';
    }
  }
  if (!o.report.empty()) write_json(o.report, report);
  if (!ctx.globals().quiet) ctx.out() << report.dump(2) << '\n';

  auto& rec = ctx.record();
  rec.config = {{"threshold", o.threshold}, {"annotator_thresholds", thresholds}, {"exclude", o.exclude}};
  rec.inputs["annotations"] = o.annotations;
  rec.outputs["labels"] = out.string();
  if (!o.report.empty()) rec.outputs["report"] = o.report;
  rec.manifest_path = sibling(out, ".manifest.json");
}

// ---- train ----

struct TrainOptions {
  std::string data;
  std::string mode = "full";
  std::string m1_checkpoint;
  std::string history;
  ModelFlags flags;
};

training::EpochCallback progress(Context& ctx) {
  if (ctx.globals().quiet) return {};
  return [&ctx](int epoch, const model::LossBreakdown& b) {
    ctx.log() << "epoch " << epoch << " total " << b.total << " cls " << b.cls << "\n";
  };
}

void cmd_train(Context& ctx, const TrainOptions& o) {
  auto mode = training::parse_train_mode(o.mode);
  if (!mode) throw ValidationError("--mode must be full or m2_only");
  if (*mode == training::TrainMode::M2Only && o.m1_checkpoint.empty()) {
    throw ValidationError("train --mode m2_only needs --m1-checkpoint");
  }
  const fs::path out = ctx.require_out("model checkpoint");
  Settings s = load_settings(ctx);
  apply_flags(s, o.flags);
  s.train.mode = *mode;
  s.train.seed = ctx.seed(s.train.seed);
  const auto table = load_embeddings(o.flags.embeddings);

  auto records = corpus::load_debunks(o.data, format_for(o.data, ""));
  std::size_t skipped = 0;
  std::optional<Model> model;
  corpus::Vocabulary vocab;
  std::vector<model::Example> examples;

  if (*mode == training::TrainMode::Full) {
    const bool supervised = s.model.value("variant", "cantm") == "cantm";
    auto docs = to_documents(std::move(records), supervised, skipped);
    if (skipped) ctx.log() << "skipping " << skipped << " unlabeled records\n";
    if (docs.empty()) throw ValidationError("no usable training records in " + o.data);
    vocab = corpus::build_vocabulary(docs, s.max_vocab, stopwords_for(s));
    corpus::attach_bows(docs, vocab);
    const auto cfg = resolve_model_config(s, vocab.size(), table.get());
    model = Model::initialized(cfg, s.train.seed);
    examples = model::make_examples(docs, cfg.labels, supervised);
  } else {
    auto loaded = checkpoint::load_model<double>(fs::path(o.m1_checkpoint));
    if (loaded.model.config().variant != model::Variant::Cantm) {
      throw ValidationError("--m1-checkpoint must hold a cantm model");
    }
    vocab = std::move(loaded.vocab);
    model = std::move(loaded.model);
    auto docs = to_documents(std::move(records), false, skipped);
    if (docs.empty()) throw ValidationError("no training records in " + o.data);
    corpus::attach_bows(docs, vocab);
    examples = model::make_examples(docs, model->config().labels, false);
    ctx.record().inputs["m1_checkpoint"] = o.m1_checkpoint;
  }
  if (model->config().encoder == model::EncoderKind::Embedding) {
    if (!table) throw ValidationError("this model uses the embedding encoder; pass --embeddings");
    model->set_embeddings(table);
  }

  auto result = training::train(std::move(*model), std::span<const model::Example>(examples), s.train, progress(ctx));
  const auto history = training::history_to_json(result.history);
  checkpoint::save_model(out, result.model, vocab,
                         {{"train", training::train_config_to_json(s.train)}, {"history", history}});
  if (!o.history.empty()) write_json(o.history, history);
  ctx.log() << "stopped after epoch " << result.history.stopped_epoch << " ("
            << training::to_string(result.history.stop_reason) << "), best epoch " << result.history.best_epoch
            << "\n";

  auto& rec = ctx.record();
  rec.config = resolved_config(result.model.config(), s.train, s);
  rec.seed = s.train.seed;
  rec.inputs["data"] = o.data;
  if (!o.flags.embeddings.empty()) rec.inputs["embeddings"] = o.flags.embeddings;
  rec.outputs["checkpoint"] = out.string();
  if (!o.history.empty()) rec.outputs["history"] = o.history;
  rec.manifest_path = sibling(out, ".manifest.json");
}

// ---- evaluate ----

struct EvaluateOptions {
  std::string data;
  std::size_t folds = 0;
  std::string confusion;
  std::string perplexity_mode;
  std::string name;
  ModelFlags flags;
};

void cmd_evaluate(Context& ctx, const EvaluateOptions& o) {
  const fs::path out = ctx.require_out("cross-validation summary");
  Settings s = load_settings(ctx);
  apply_flags(s, o.flags);
  s.train.seed = ctx.seed(s.train.seed);
  std::size_t folds = o.folds ? o.folds : ctx.config().value("folds", std::size_t{5});
  evaluation::EvalOptions eval;
  const std::string pmode = !o.perplexity_mode.empty() ? o.perplexity_mode
                                                         : ctx.config().value("perplexity_mode", std::string("per_document"));
  auto parsed = evaluation::parse_perplexity_mode(pmode);
  if (!parsed) throw ValidationError("perplexity mode must be per_document or corpus");
  eval.perplexity_mode = *parsed;

  const auto table = load_embeddings(o.flags.embeddings);
  const bool supervised = s.model.value("variant", "cantm") == "cantm";
  std::size_t skipped = 0;
  auto docs = to_documents(corpus::load_debunks(o.data, format_for(o.data, "")), supervised, skipped);
  if (skipped) ctx.log() << "skipping " << skipped << " unlabeled records\n";
  if (docs.size() < folds) throw ValidationError("fewer usable records than folds");
  const auto vocab = corpus::build_vocabulary(docs, s.max_vocab, stopwords_for(s));
  corpus::attach_bows(docs, vocab);
  const auto cfg = resolve_model_config(s, vocab.size(), table.get());
  const auto examples = model::make_examples(docs, cfg.labels, supervised);

  evaluation::ModelFactory<double> factory = [&](std::uint64_t seed) {
    auto m = Model::initialized(cfg, seed);
    m.set_embeddings(table);
    return m;
  };
  auto on_fold = [&](std::size_t f, const evaluation::EvalReport& r) {
    ctx.log() << "fold " << f + 1 << "/" << folds;
    if (r.accuracy) ctx.log() << " accuracy " << *r.accuracy << " macro-F1 " << *r.macro_f1;
    if (r.perplexity) ctx.log() << " perplexity " << *r.perplexity;
    ctx.log() << "\n";
  };
  const auto summary = evaluation::cross_validate<double>(examples, factory, folds, s.train.seed, s.train, eval, on_fold);
  ordered_json j = evaluation::to_json(summary);
  j["perplexity_mode"] = std::string(evaluation::to_string(eval.perplexity_mode));
  write_json(out, j);

  if (!o.confusion.empty() && !summary.folds.empty() && summary.folds.front().accuracy) {
    evaluation::EvalReport total = summary.folds.front();
    for (std::size_t f = 1; f < summary.folds.size(); ++f) total.confusion += summary.folds[f].confusion;
    write_text(o.confusion, evaluation::confusion_csv(total));
  }
  const std::string name = o.name.empty() ? (supervised ? "CANTM" : "NVDM") : o.name;
  if (!ctx.globals().quiet) {
    ctx.out() << evaluation::format_table_header() << '\n' << evaluation::format_table_row(name, summary) << '\n';
  }

  auto& rec = ctx.record();
  rec.config = resolved_config(cfg, s.train, s);
  rec.config["folds"] = folds;
  rec.config["perplexity_mode"] = std::string(evaluation::to_string(eval.perplexity_mode));
  rec.seed = s.train.seed;
  rec.inputs["data"] = o.data;
  if (!o.flags.embeddings.empty()) rec.inputs["embeddings"] = o.flags.embeddings;
  rec.outputs["summary"] = out.string();
  if (!o.confusion.empty()) rec.outputs["confusion"] = o.confusion;
  rec.manifest_path = sibling(out, ".manifest.json");
}

// ---- predict ----

struct PredictOptions {
  std::string model;
  std::string input;
  std::string embeddings;
};

void cmd_predict(Context& ctx, const PredictOptions& o) {
  const fs::path out = ctx.require_out("predictions");
  auto loaded = checkpoint::load_model<double>(fs::path(o.model));
  auto& m = loaded.model;
  if (m.config().variant != model::Variant::Cantm) throw ValidationError("prediction needs a cantm model");
  if (static_cast<int>(m.config().labels.size()) != m.config().num_classes) {
    throw ValidationError("checkpoint does not name its classes");
  }
  if (m.config().encoder == model::EncoderKind::Embedding) {
    if (o.embeddings.empty()) throw ValidationError("this model uses the embedding encoder; pass --embeddings");
    m.set_embeddings(load_embeddings(o.embeddings));
  }

  std::ifstream in(o.input);
  if (!in) throw ParseError("cannot open " + o.input);
  auto file = open_out(out);
  std::size_t line_no = 0, n = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(o.input + ":" + std::to_string(line_no) + ": " + e.what());
    }
    std::string id, text;
    try {
      id = obj.contains("doc_id") ? obj.at("doc_id").get<std::string>() : obj.at("id").get<std::string>();
      if (obj.contains("text")) {
        text = obj.at("text").get<std::string>();
      } else {
        text = obj.value("claim", std::string()) + " " + obj.value("explanation", std::string());
      }
    } catch (const json::exception& e) {
      throw ParseError(o.input + ":" + std::to_string(line_no) + ": needs id/doc_id and text or claim: " + e.what());
    }
    model::Example ex{corpus::to_bow(text, loaded.vocab, id), id, std::nullopt};
    const auto p = model::predict_distribution(ex, m);
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < p.size(); ++c) {
      if (p[c] > p[best]) best = c;
    }
    ordered_json dist = ordered_json::object();
    for (Eigen::Index c = 0; c < p.size(); ++c) dist[std::string(to_string(m.config().labels[c]))] = p[c];
    file << ordered_json{{"doc_id", id},
                         {"category", std::string(to_string(m.config().labels[best]))},
                         {"distribution", dist}}
                .dump()
         << '\n';
    ++n;
  }
  ctx.log() << "wrote " << n << " predictions\n";
  auto& rec = ctx.record();
  rec.inputs = {{"model", o.model}, {"input", o.input}};
  if (!o.embeddings.empty()) rec.inputs["embeddings"] = o.embeddings;
  rec.outputs["predictions"] = out.string();
  rec.manifest_path = sibling(out, ".manifest.json");
}

// ---- topics ----

struct TopicsOptions {
  std::string model;
  std::string kind = "all";
  std::size_t k = topics::kDefaultTopWords;
  std::string text;
};

void cmd_topics(Context& ctx, const TopicsOptions& o) {
  const fs::path out = ctx.require_out("topic report");
  const auto loaded = checkpoint::load_model<double>(fs::path(o.model));
  std::vector<topics::TopicKind> kinds;
  if (o.kind == "all") {
    kinds.push_back(topics::TopicKind::Latent);
    if (loaded.model.config().variant == model::Variant::Cantm) {
      kinds.push_back(topics::TopicKind::ClassAssociated);
      kinds.push_back(topics::TopicKind::ClassificationAware);
    }
  } else {
    auto k = topics::parse_topic_kind(o.kind);
    if (!k) throw ValidationError("unknown topic kind \"" + o.kind + "\"");
    kinds.push_back(*k);
  }
  ordered_json j = ordered_json::object();
  std::string text;
  for (auto kind : kinds) {
    const auto report = topics::model_topics(loaded.model, loaded.vocab, kind, o.k);
    j[std::string(topics::to_string(kind))] = topics::to_json(report);
    text += "[" + std::string(topics::to_string(kind)) + "]\n" + topics::to_text(report) + "\n";
  }
  write_json(out, j);
  if (!o.text.empty()) write_text(o.text, text);
  if (!ctx.globals().quiet) ctx.out() << text;
  auto& rec = ctx.record();
  rec.config = {{"kind", o.kind}, {"k", o.k}};
  rec.inputs["model"] = o.model;
  rec.outputs["topics"] = out.string();
  if (!o.text.empty()) rec.outputs["text"] = o.text;
  rec.manifest_path = sibling(out, ".manifest.json");
}

// ---- analyze ----

struct AnalyzeOptions {
  std::string input;
  std::string from;
  std::string to;
  std::string search_trend;
  std::vector<std::string> breakdowns;
};

corpus::Date date_flag(const std::string& s, const char* name) {
  auto d = corpus::parse_date(s);
  if (!d) throw ValidationError(std::string(name) + " must be a YYYY-MM-DD date, got \"" + s + "\"");
  return *d;
}

void cmd_analyze(Context& ctx, const AnalyzeOptions& o) {
  const fs::path dir = ctx.require_out("analysis output directory");
  const auto records = corpus::load_debunks(o.input, format_for(o.input, ""));
  fs::create_directories(dir);
  auto& rec = ctx.record();

  analysis::DateRange range;
  if (o.from.empty() || o.to.empty()) {
    if (records.empty()) throw ValidationError("no records and no explicit date range");
    range = analysis::record_span(records);
  }
  if (!o.from.empty()) range.first = date_flag(o.from, "--from");
  if (!o.to.empty()) range.last = date_flag(o.to, "--to");
  const auto trend = analysis::weekly_trend(records, range);
  std::vector<analysis::SearchPoint> search;
  if (!o.search_trend.empty()) {
    search = analysis::load_search_trend(o.search_trend);
    rec.inputs["search_trend"] = o.search_trend;
  }
  write_text(dir / "trend.csv", analysis::trend_csv(trend));
  write_text(dir / "trend.svg", plot::trend_svg(trend, search, "Weekly debunks"));
  rec.outputs["trend_csv"] = (dir / "trend.csv").string();
  rec.outputs["trend_svg"] = (dir / "trend.svg").string();

  ordered_json counts = ordered_json::object();
  for (auto d : {analysis::Dimension::Category, analysis::Dimension::MediaType, analysis::Dimension::Veracity,
                 analysis::Dimension::Platform, analysis::Dimension::Language}) {
    ordered_json c = ordered_json::object();
    for (const auto& v : analysis::value_counts(records, d)) c[v.value] = v.count;
    counts[std::string(analysis::to_string(d))] = c;
  }
  counts["records"] = records.size();
  write_json(dir / "counts.json", counts);
  rec.outputs["counts"] = (dir / "counts.json").string();

  auto specs = o.breakdowns;
  if (specs.empty()) specs = {"media_type:category", "platform:category"};
  for (const auto& spec : specs) {
    const auto colon = spec.find(':');
    const auto row = analysis::parse_dimension(spec.substr(0, colon));
    const auto col = colon == std::string::npos ? std::nullopt : analysis::parse_dimension(spec.substr(colon + 1));
    if (!row || !col) throw ValidationError("--breakdown expects ROW:COL dimensions, got \"" + spec + "\"");
    const auto t = analysis::stacked_breakdown(records, *row, *col);
    const std::string stem =
        "breakdown_" + std::string(analysis::to_string(*row)) + "_by_" + std::string(analysis::to_string(*col));
    write_text(dir / (stem + ".csv"), analysis::breakdown_csv(t, true));
    write_text(dir / (stem + "_counts.csv"), analysis::breakdown_csv(t, false));
    write_text(dir / (stem + ".svg"),
               plot::stacked_columns_svg(t, std::string(analysis::to_string(*row)) + " by " +
                                                std::string(analysis::to_string(*col))));
    rec.outputs[stem] = (dir / (stem + ".csv")).string();
    if (t.excluded) ctx.log() << stem << ": excluded " << t.excluded << " records with unset values\n";
    for (const auto& c : t.omitted_columns) ctx.log() << stem << ": omitted empty column " << c << "\n";
  }
  rec.config = {{"from", corpus::format_date(range.first)},
                {"to", corpus::format_date(range.last)},
                {"breakdowns", specs}};
  rec.inputs["records"] = o.input;
  rec.manifest_path = dir / "manifest.json";
}

void write_manifest(const RunRecord& rec, const std::string& command, const std::vector<std::string>& args,
                    double seconds) {
  if (rec.manifest_path.empty()) return;
  ordered_json j = {{"command", command},
                    {"args", args},
                    {"config", rec.config},
                    {"inputs", rec.inputs},
                    {"outputs", rec.outputs},
                    {"seed", rec.seed},
                    {"version", CANTM_VERSION},
                    {"duration_seconds", seconds}};
  write_json(rec.manifest_path, j);
}

std::vector<std::string> replay_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest " + path);
  try {
    const auto j = json::parse(in);
    return j.at("args").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(path + ": not a run manifest: " + e.what());
  }
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
  CLI::App app{"Classification-aware neural topic modelling toolkit for fact-check debunks", "cantm"};
  app.set_version_flag("--version", CANTM_VERSION);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice");
  app.add_option("--config", g.config_path, "JSON config document")->check(CLI::ExistingFile);
  app.add_flag("--quiet", g.quiet, "Suppress progress output");
  app.add_option("--out", g.out, "Output path (a directory for analyze)");
  app.add_option("--replay", g.replay, "Re-run the command recorded in a run manifest")->check(CLI::ExistingFile);

  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Validate debunk records and write them as JSON-lines");
  c_ingest->add_option("--input", ingest.input, "Debunk file (.jsonl or .csv)")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--format", ingest.format, "jsonl or csv (default: by extension)");

  EnrichOptions enrich_o;
  auto* c_enrich = app.add_subcommand("enrich", "Normalize veracity and platform fields and assign media types");
  c_enrich->add_option("--input", enrich_o.input, "Raw debunk JSON-lines")->required()->check(CLI::ExistingFile);
  c_enrich->add_option("--veracity-map", enrich_o.veracity_map, "Veracity mapping list")->check(CLI::ExistingFile);
  c_enrich->add_option("--platform-map", enrich_o.platform_map, "Platform mapping list")->check(CLI::ExistingFile);
  c_enrich->add_option("--media-rules", enrich_o.media_rules, "Media-type rule file")->check(CLI::ExistingFile);
  c_enrich->add_option("--source-dir", enrich_o.source_dir, "Directory of <id>.txt debunk-page texts")
      ->check(CLI::ExistingDirectory);

  MergeOptions merge;
  auto* c_merge = app.add_subcommand("merge-annotations", "Filter annotations and merge them into one label per document");
  c_merge->add_option("--annotations", merge.annotations, "Annotation JSON-lines")->required()->check(CLI::ExistingFile);
  c_merge->add_option("--records", merge.records, "Debunk records to label")->check(CLI::ExistingFile);
  c_merge->add_option("--report", merge.report, "Write agreement statistics as JSON");
  c_merge->add_option("--threshold", merge.threshold, "Default minimum confidence")->check(CLI::Range(0, 9));
  c_merge->add_option("--annotator-threshold", merge.annotator_thresholds, "Per-annotator minimum, NAME=VALUE");
  c_merge->add_option("--exclude", merge.exclude, "Annotators to drop")->delimiter(',');

  TrainOptions train;
  auto* c_train = app.add_subcommand("train", "Train a model and save a checkpoint");
  c_train->add_option("--data", train.data, "Debunk records")->required()->check(CLI::ExistingFile);
  c_train->add_option("--mode", train.mode, "full or m2_only")->check(CLI::IsMember({"full", "m2_only"}));
  c_train->add_option("--m1-checkpoint", train.m1_checkpoint, "Trained model whose M1 part is kept frozen")
      ->check(CLI::ExistingFile);
  c_train->add_option("--history", train.history, "Write per-epoch losses as JSON");
  add_model_flags(c_train, train.flags);

  EvaluateOptions evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "k-fold cross-validation");
  c_eval->add_option("--data", evaluate.data, "Labelled debunk records")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--folds", evaluate.folds, "Number of folds (default 5)")->check(CLI::PositiveNumber);
  c_eval->add_option("--confusion", evaluate.confusion, "Write the summed confusion matrix as CSV");
  c_eval->add_option("--perplexity-mode", evaluate.perplexity_mode, "per_document or corpus")
      ->check(CLI::IsMember({"per_document", "corpus"}));
  c_eval->add_option("--name", evaluate.name, "Row name for the results line");
  add_model_flags(c_eval, evaluate.flags);

  PredictOptions predict;
  auto* c_predict = app.add_subcommand("predict", "Predict categories for documents");
  c_predict->add_option("--model", predict.model, "Model checkpoint")->required()->check(CLI::ExistingFile);
  c_predict->add_option("--input", predict.input, "JSON-lines with id and claim/explanation or text")
      ->required()
      ->check(CLI::ExistingFile);
  c_predict->add_option("--embeddings", predict.embeddings, "Document embeddings for embedding-encoder models")
      ->check(CLI::ExistingFile);

  TopicsOptions topics_o;
  auto* c_topics = app.add_subcommand("topics", "Top words of each topic");
  c_topics->add_option("--model", topics_o.model, "Model checkpoint")->required()->check(CLI::ExistingFile);
  c_topics->add_option("--kind", topics_o.kind, "latent, class_associated, classification_aware or all")
      ->check(CLI::IsMember({"all", "latent", "class_associated", "classification_aware"}));
  c_topics->add_option("-k,--top", topics_o.k, "Words per topic")->check(CLI::PositiveNumber);
  c_topics->add_option("--text", topics_o.text, "Also write a plain-text table");

  AnalyzeOptions analyze;
  auto* c_analyze = app.add_subcommand("analyze", "Weekly trend and stacked breakdown tables and plots");
  c_analyze->add_option("--input", analyze.input, "Debunk records")->required()->check(CLI::ExistingFile);
  c_analyze->add_option("--from", analyze.from, "First day of the trend range (YYYY-MM-DD)");
  c_analyze->add_option("--to", analyze.to, "Last day of the trend range (YYYY-MM-DD)");
  c_analyze->add_option("--search-trend", analyze.search_trend, "Weekly search-interest CSV to overlay")
      ->check(CLI::ExistingFile);
  c_analyze->add_option("--breakdown", analyze.breakdowns,
                        "ROW:COL dimensions (category, media_type, platform, veracity, language); repeatable");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (!g.replay.empty()) {
      if (depth > 0) throw ValidationError("a replayed manifest cannot itself use --replay");
      return dispatch(replay_args(g.replay), out, err, depth + 1);
    }
    if (app.get_subcommands().size() != 1) throw CLI::RequiredError("a subcommand");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const auto start = std::chrono::steady_clock::now();
  try {
    Context ctx(g, out, err);
    if (command == "ingest") cmd_ingest(ctx, ingest);
    if (command == "enrich") cmd_enrich(ctx, enrich_o);
    if (command == "merge-annotations") cmd_merge(ctx, merge);
    if (command == "train") cmd_train(ctx, train);
    if (command == "evaluate") cmd_evaluate(ctx, evaluate);
    if (command == "predict") cmd_predict(ctx, predict);
    if (command == "topics") cmd_topics(ctx, topics_o);
    if (command == "analyze") cmd_analyze(ctx, analyze);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(ctx.record(), command, args, seconds);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const LookupError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return dispatch(args, out, err, 0);
}

}  // namespace cantm::cli
