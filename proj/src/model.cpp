#include "cantm/model.hpp"

#include <algorithm>

namespace cantm::model {

void ModelConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ValidationError(std::string("model config: ") + name + " must be >= 1");
  };
  positive(d_h, "d_h");
  positive(d_z, "d_z");
  positive(d_zs, "d_zs");
  positive(d_t, "d_t");
  positive(d_m, "d_m");
  positive(num_classes, "num_classes");
  positive(vocab_size, "vocab_size");
  positive(n_train_samples, "n_train_samples");
  positive(n_test_samples, "n_test_samples");
  if (!(lambda > 0)) throw ValidationError("model config: lambda must be > 0");
  if (!(leaky_slope >= 0 && leaky_slope < 1)) throw ValidationError("model config: leaky_slope must be in [0,1)");
  if (!labels.empty() && static_cast<int>(labels.size()) != num_classes)
    throw ValidationError("model config: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(num_classes) + " classes");
}

std::string_view to_string(Variant v) { return v == Variant::Cantm ? "cantm" : "nvdm"; }
std::string_view to_string(EncoderKind e) { return e == EncoderKind::Bow ? "bow" : "embedding"; }

std::optional<Variant> parse_variant(std::string_view s) {
  if (s == "cantm") return Variant::Cantm;
  if (s == "nvdm") return Variant::Nvdm;
  return std::nullopt;
}

std::optional<EncoderKind> parse_encoder_kind(std::string_view s) {
  if (s == "bow") return EncoderKind::Bow;
  if (s == "embedding") return EncoderKind::Embedding;
  return std::nullopt;
}

nlohmann::json config_to_json(const ModelConfig& c) {
  std::vector<std::string> labels;
  for (auto l : c.labels) labels.emplace_back(to_string(l));
  return {
      {"d_h", c.d_h},
      {"d_z", c.d_z},
      {"d_zs", c.d_zs},
      {"d_t", c.d_t},
      {"d_m", c.d_m},
      {"num_classes", c.num_classes},
      {"vocab_size", c.vocab_size},
      {"lambda", c.lambda},
      {"n_train_samples", c.n_train_samples},
      {"n_test_samples", c.n_test_samples},
      {"leaky_slope", c.leaky_slope},
      {"variant", std::string(to_string(c.variant))},
      {"encoder", std::string(to_string(c.encoder))},
      {"labels", labels},
  };
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.d_h = j.value("d_h", c.d_h);
    c.d_z = j.value("d_z", c.d_z);
    c.d_zs = j.value("d_zs", c.d_zs);
    c.d_t = j.value("d_t", c.d_t);
    c.d_m = j.value("d_m", c.d_m);
    c.num_classes = j.value("num_classes", c.num_classes);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.lambda = j.value("lambda", c.lambda);
    c.n_train_samples = j.value("n_train_samples", c.n_train_samples);
    c.n_test_samples = j.value("n_test_samples", c.n_test_samples);
    c.leaky_slope = j.value("leaky_slope", c.leaky_slope);
    if (j.contains("variant")) {
      auto v = parse_variant(j.at("variant").get<std::string>());
      if (!v) throw ValidationError("model config: unknown variant");
      c.variant = *v;
    }
    if (j.contains("encoder")) {
      auto e = parse_encoder_kind(j.at("encoder").get<std::string>());
      if (!e) throw ValidationError("model config: unknown encoder");
      c.encoder = *e;
    }
    if (j.contains("labels")) {
      for (const auto& s : j.at("labels").get<std::vector<std::string>>()) {
        auto cat = parse_category(s);
        if (!cat) throw ValidationError("model config: unknown label \"" + s + "\"");
        c.labels.push_back(*cat);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<Example> make_examples(std::span<const corpus::LabeledDocument> docs, std::span<const Category> labels,
                                   bool require_labels) {
  std::vector<Example> out;
  out.reserve(docs.size());
  for (const auto& d : docs) {
    Example ex{d.bow, d.encoder_key(), std::nullopt};
    if (d.label) {
      auto it = std::find(labels.begin(), labels.end(), *d.label);
      if (it == labels.end())
        throw ValidationError("document \"" + d.record.id + "\" has label " + std::string(to_string(*d.label)) +
                              " outside the model's class set");
      ex.label = static_cast<int>(it - labels.begin());
    } else if (require_labels) {
      throw ValidationError("document \"" + d.record.id + "\" is unlabeled");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace cantm::model
