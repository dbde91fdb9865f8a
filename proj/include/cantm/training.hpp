#ifndef CANTM_TRAINING_HPP_
#define CANTM_TRAINING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cantm/loss.hpp"
#include "cantm/model.hpp"

namespace cantm::training {

enum class TrainMode { Full, M2Only };

std::string_view to_string(TrainMode m);
std::optional<TrainMode> parse_train_mode(std::string_view s);

struct TrainConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int max_epochs = 200;
  int patience = 4;
  int n_train_samples = 10;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::Full;
  double clip_grad_norm = 0;  // 0 disables clipping

  void validate() const;
};

nlohmann::json train_config_to_json(const TrainConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json& j);

// Classifier loss weight |V| / C.
double lambda_weight(int vocab_size, int num_classes);

// Stops once the monitored value has failed to decrease for `patience`
// consecutive epochs.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Records one epoch; returns true when training should stop after it.
  bool update(double monitored);

  int best_epoch() const { return best_epoch_; }  // 1-based, 0 before any update
  double best_value() const { return best_; }
  int epochs() const { return epoch_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int stale_ = 0;
  double best_ = 0;
};

enum class StopReason { EarlyStop, MaxEpochs };

std::string_view to_string(StopReason r);

struct TrainHistory {
  std::vector<model::LossBreakdown> epochs;
  std::vector<double> monitored;
  int stopped_epoch = 0;
  int best_epoch = 0;
  StopReason stop_reason = StopReason::MaxEpochs;
};

nlohmann::json history_to_json(const TrainHistory& h);

// The returned model is the last-epoch state; best_params holds the state at
// best_epoch.
template <typename Scalar>
struct TrainResult {
  model::CantmModel<Scalar> model;
  TrainHistory history;
  model::Parameters<Scalar> best_params;
};

using EpochCallback = std::function<void(int epoch, const model::LossBreakdown&)>;

bool is_trainable(model::ParamGroup group, model::Variant variant, TrainMode mode);
model::LossTerms loss_terms(model::Variant variant, TrainMode mode);

// Full CANTM monitors the classification loss; everything else the total.
double monitored_loss(const model::LossBreakdown& b, model::Variant variant, TrainMode mode);

// Adam with bias correction; moments start at zero.
template <typename Scalar>
class Adam {
 public:
  Adam(const model::Parameters<Scalar>& shape, const TrainConfig& cfg)
      : cfg_(cfg), m_(shape.zeros_like()), v_(shape.zeros_like()) {}

  template <typename Mask>
  void step(model::Parameters<Scalar>& params, const model::Parameters<Scalar>& grad, Mask&& trainable) {
    ++t_;
    const Scalar b1 = static_cast<Scalar>(cfg_.beta1), b2 = static_cast<Scalar>(cfg_.beta2);
    const Scalar c1 = Scalar(1) - static_cast<Scalar>(std::pow(cfg_.beta1, t_));
    const Scalar c2 = Scalar(1) - static_cast<Scalar>(std::pow(cfg_.beta2, t_));
    const Scalar lr = static_cast<Scalar>(cfg_.learning_rate), eps = static_cast<Scalar>(cfg_.epsilon);

    std::vector<const Scalar*> g_data;
    grad.visit([&](std::string_view, model::ParamGroup, const auto& t) { g_data.push_back(t.data()); });
    std::vector<Scalar*> m_data, v_data;
    m_.visit([&](std::string_view, model::ParamGroup, auto& t) { m_data.push_back(t.data()); });
    v_.visit([&](std::string_view, model::ParamGroup, auto& t) { v_data.push_back(t.data()); });

    std::size_t i = 0;
    params.visit([&](std::string_view, model::ParamGroup group, auto& t) {
      const std::size_t idx = i++;
      if (!trainable(group)) return;
      const Scalar* g = g_data[idx];
      Scalar* m = m_data[idx];
      Scalar* v = v_data[idx];
      Scalar* w = t.data();
      for (Eigen::Index k = 0; k < t.size(); ++k) {
        m[k] = b1 * m[k] + (Scalar(1) - b1) * g[k];
        v[k] = b2 * v[k] + (Scalar(1) - b2) * g[k] * g[k];
        w[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
      }
    });
  }

  long steps() const { return t_; }

 private:
  TrainConfig cfg_;
  model::Parameters<Scalar> m_, v_;
  long t_ = 0;
};

template <typename Scalar>
void clip_gradient(model::Parameters<Scalar>& grad, double max_norm) {
  double sq = 0;
  grad.visit([&](std::string_view, model::ParamGroup, const auto& t) { sq += static_cast<double>(t.squaredNorm()); });
  const double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0) return;
  const auto scale = static_cast<Scalar>(max_norm / norm);
  grad.visit([&](std::string_view, model::ParamGroup, auto& t) { t *= scale; });
}

// Minibatch training with per-epoch reshuffling (the final short batch is
// kept) and early stopping on the monitored loss. Deterministic in cfg.seed.
template <typename Scalar>
TrainResult<Scalar> train(model::CantmModel<Scalar> model, std::span<const model::Example> data,
                          const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (data.empty()) throw ValidationError("training data is empty");
  const auto variant = model.config().variant;
  if (cfg.mode == TrainMode::M2Only && variant != model::Variant::Cantm)
    throw ValidationError("m2_only training requires the cantm variant");
  const auto terms = loss_terms(variant, cfg.mode);
  if (terms.classifier) {
    for (const auto& ex : data) {
      if (!ex.label) throw ValidationError("document \"" + ex.key + "\" is unlabeled; full mode needs labels");
    }
  }
  auto trainable = [&](model::ParamGroup g) { return is_trainable(g, variant, cfg.mode); };

  std::mt19937_64 rng(cfg.seed);
  Adam<Scalar> adam(model.params(), cfg);
  EarlyStopping stopper(cfg.patience);
  TrainResult<Scalar> result{model, {}, model.params()};

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<model::Example> batch;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    model::LossBreakdown sum;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
      const auto noise =
          model::draw_noise<Scalar>(model.config(), static_cast<Eigen::Index>(batch.size()), cfg.n_train_samples, rng);
      auto grad = model.params().zeros_like();
      const auto loss = model::loss_and_gradient<Scalar>(model, batch, noise, terms, &grad);
      if (const char* bad = loss.first_non_finite()) {
        throw NumericError("non-finite loss term '" + std::string(bad) + "' at epoch " + std::to_string(epoch) +
                           ", batch starting at " + std::to_string(start));
      }
      if (cfg.clip_grad_norm > 0) clip_gradient(grad, cfg.clip_grad_norm);
      adam.step(model.params(), grad, trainable);

      const double w = static_cast<double>(batch.size());
      sum.cls += w * loss.cls;
      sum.m1_recon += w * loss.m1_recon;
      sum.m1_kl += w * loss.m1_kl;
      sum.class_recon += w * loss.class_recon;
      sum.m2_recon += w * loss.m2_recon;
      sum.m2_cls += w * loss.m2_cls;
      sum.m2_kl += w * loss.m2_kl;
      sum.total += w * loss.total;
      seen += batch.size();
    }
    const double inv = 1.0 / static_cast<double>(seen);
    for (double* f : {&sum.cls, &sum.m1_recon, &sum.m1_kl, &sum.class_recon, &sum.m2_recon, &sum.m2_cls, &sum.m2_kl,
                      &sum.total})
      *f *= inv;

    const double monitored = monitored_loss(sum, variant, cfg.mode);
    result.history.epochs.push_back(sum);
    result.history.monitored.push_back(monitored);
    const bool stop = stopper.update(monitored);
    if (stopper.best_epoch() == epoch) result.best_params = model.params();
    if (on_epoch) on_epoch(epoch, sum);
    if (stop) {
      result.history.stop_reason = StopReason::EarlyStop;
      break;
    }
  }
  result.history.stopped_epoch = static_cast<int>(result.history.epochs.size());
  result.history.best_epoch = stopper.best_epoch();
  if (result.history.stop_reason != StopReason::EarlyStop) result.history.stop_reason = StopReason::MaxEpochs;
  result.model = std::move(model);
  return result;
}

}  // namespace cantm::training

#endif  // CANTM_TRAINING_HPP_
