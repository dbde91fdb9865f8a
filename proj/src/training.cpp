#include "cantm/training.hpp"

#include <set>

namespace cantm::training {

std::string_view to_string(TrainMode m) { return m == TrainMode::Full ? "full" : "m2_only"; }

std::optional<TrainMode> parse_train_mode(std::string_view s) {
  if (s == "full") return TrainMode::Full;
  if (s == "m2_only") return TrainMode::M2Only;
  return std::nullopt;
}

std::string_view to_string(StopReason r) { return r == StopReason::EarlyStop ? "early_stop" : "max_epochs"; }

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("train config: ") + what);
  };
  require(learning_rate > 0, "learning_rate must be > 0");
  require(beta1 > 0 && beta1 < 1, "beta1 must be in (0,1)");
  require(beta2 > 0 && beta2 < 1, "beta2 must be in (0,1)");
  require(epsilon > 0, "epsilon must be > 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(max_epochs >= 1, "max_epochs must be >= 1");
  require(patience >= 1, "patience must be >= 1");
  require(n_train_samples >= 1, "n_train_samples must be >= 1");
  require(clip_grad_norm >= 0, "clip_grad_norm must be >= 0");
}

nlohmann::json train_config_to_json(const TrainConfig& c) {
  return {
      {"learning_rate", c.learning_rate},
      {"beta1", c.beta1},
      {"beta2", c.beta2},
      {"epsilon", c.epsilon},
      {"batch_size", c.batch_size},
      {"max_epochs", c.max_epochs},
      {"patience", c.patience},
      {"n_train_samples", c.n_train_samples},
      {"seed", c.seed},
      {"mode", std::string(to_string(c.mode))},
      {"clip_grad_norm", c.clip_grad_norm},
  };
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {"learning_rate", "beta1",           "beta2", "epsilon",
                                              "batch_size",    "max_epochs",      "patience",
                                              "n_train_samples", "seed",          "mode",  "clip_grad_norm"};
  if (!j.is_object()) throw ParseError("train config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ValidationError("train config: unknown key \"" + key + "\"");
  }
  TrainConfig c;
  try {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.n_train_samples = j.value("n_train_samples", c.n_train_samples);
    c.seed = j.value("seed", c.seed);
    c.clip_grad_norm = j.value("clip_grad_norm", c.clip_grad_norm);
    if (j.contains("mode")) {
      auto m = parse_train_mode(j.at("mode").get<std::string>());
      if (!m) throw ValidationError("train config: mode must be \"full\" or \"m2_only\"");
      c.mode = *m;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

double lambda_weight(int vocab_size, int num_classes) {
  if (vocab_size < 1 || num_classes < 1) throw ValidationError("lambda_weight needs positive vocab size and class count");
  return static_cast<double>(vocab_size) / static_cast<double>(num_classes);
}

bool EarlyStopping::update(double monitored) {
  ++epoch_;
  if (best_epoch_ == 0 || monitored < best_) {
    best_ = monitored;
    best_epoch_ = epoch_;
    stale_ = 0;
    return false;
  }
  return ++stale_ >= patience_;
}

nlohmann::json history_to_json(const TrainHistory& h) {
  nlohmann::json epochs = nlohmann::json::array();
  for (std::size_t i = 0; i < h.epochs.size(); ++i) {
    const auto& b = h.epochs[i];
    epochs.push_back({{"epoch", i + 1},
                      {"monitored", h.monitored[i]},
                      {"cls", b.cls},
                      {"m1_recon", b.m1_recon},
                      {"m1_kl", b.m1_kl},
                      {"class_recon", b.class_recon},
                      {"m2_recon", b.m2_recon},
                      {"m2_cls", b.m2_cls},
                      {"m2_kl", b.m2_kl},
                      {"total", b.total}});
  }
  return {{"epochs", epochs},
          {"stopped_epoch", h.stopped_epoch},
          {"best_epoch", h.best_epoch},
          {"stop_reason", std::string(to_string(h.stop_reason))}};
}

bool is_trainable(model::ParamGroup group, model::Variant variant, TrainMode mode) {
  using model::ParamGroup;
  if (mode == TrainMode::M2Only) {
    return group == ParamGroup::ClassDecoder || group == ParamGroup::M2Inference || group == ParamGroup::M2Decoder;
  }
  if (variant == model::Variant::Nvdm) {
    return group == ParamGroup::Encoder || group == ParamGroup::M1Inference || group == ParamGroup::M1Decoder;
  }
  return true;
}

model::LossTerms loss_terms(model::Variant variant, TrainMode mode) {
  if (mode == TrainMode::M2Only) return model::LossTerms::m2_only();
  return model::LossTerms::for_variant(variant);
}

double monitored_loss(const model::LossBreakdown& b, model::Variant variant, TrainMode mode) {
  if (variant == model::Variant::Cantm && mode == TrainMode::Full) return b.cls;
  return b.total;
}

}  // namespace cantm::training
