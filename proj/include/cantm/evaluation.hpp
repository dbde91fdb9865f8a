#ifndef CANTM_EVALUATION_HPP_
#define CANTM_EVALUATION_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "cantm/corpus.hpp"
#include "cantm/model.hpp"
#include "cantm/training.hpp"

namespace cantm::evaluation {

using ConfusionMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

// Labels are class indices in [0, num_classes).
double accuracy(std::span<const int> pred, std::span<const int> gold);
// Rows are predicted labels, columns gold labels.
ConfusionMatrix confusion_matrix(std::span<const int> pred, std::span<const int> gold, int num_classes);
// A class absent from both pred and gold scores 0.
std::vector<double> per_class_f1(std::span<const int> pred, std::span<const int> gold, int num_classes);
double macro_f1(std::span<const int> pred, std::span<const int> gold, int num_classes);

enum class PerplexityMode { PerDocument, Corpus };

std::string_view to_string(PerplexityMode m);
std::optional<PerplexityMode> parse_perplexity_mode(std::string_view s);

// exp(-(1/D) sum_d L_d / N_d) per document, or exp(-sum_d L_d / sum_d N_d)
// corpus-wide, where L_d is the document's bound at z = mu.
template <typename Scalar>
double perplexity(const model::CantmModel<Scalar>& m, std::span<const model::Example> docs,
                  PerplexityMode mode = PerplexityMode::PerDocument) {
  if (docs.empty()) throw ValidationError("perplexity of an empty document set");
  double sum = 0, tokens = 0;
  for (const auto& d : docs) {
    if (d.bow.empty()) throw ValidationError("perplexity: document \"" + d.key + "\" has an empty bag of words");
    const double bound = static_cast<double>(model::document_elbo(d, m));
    const double n = static_cast<double>(d.bow.total());
    if (mode == PerplexityMode::PerDocument) {
      sum += bound / n;
    } else {
      sum += bound;
      tokens += n;
    }
  }
  const double avg = mode == PerplexityMode::PerDocument ? sum / static_cast<double>(docs.size()) : sum / tokens;
  return std::exp(-avg);
}

// Most probable class at z = mu; ties go to the lower index.
template <typename Scalar>
int predict_label(const model::Example& doc, const model::CantmModel<Scalar>& m) {
  const auto p = model::predict_distribution(doc, m);
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < p.size(); ++c) {
    if (p[c] > p[best]) best = c;
  }
  return static_cast<int>(best);
}

struct EvalReport {
  std::vector<std::string> labels;
  std::size_t size = 0;
  // Classification metrics are unset for models without a classifier.
  std::optional<double> accuracy;
  std::optional<double> macro_f1;
  std::vector<double> per_class_f1;
  ConfusionMatrix confusion;
  std::optional<double> perplexity;
};

nlohmann::ordered_json to_json(const EvalReport& r);
// First column is the predicted label, one column per gold label.
std::string confusion_csv(const EvalReport& r);

struct EvalOptions {
  PerplexityMode perplexity_mode = PerplexityMode::PerDocument;
  bool with_perplexity = true;
};

// Documents with an empty bag of words count for classification but are left
// out of perplexity.
template <typename Scalar>
EvalReport evaluate(const model::CantmModel<Scalar>& m, std::span<const model::Example> docs,
                    const EvalOptions& opts = {}) {
  if (docs.empty()) throw ValidationError("evaluation set is empty");
  EvalReport r;
  r.size = docs.size();
  for (Category c : m.config().labels) r.labels.emplace_back(to_string(c));
  if (r.labels.empty()) {
    for (int c = 0; c < m.config().num_classes; ++c) r.labels.push_back(std::to_string(c));
  }
  if (m.config().variant == model::Variant::Cantm) {
    std::vector<int> pred, gold;
    for (const auto& d : docs) {
      if (!d.label) throw ValidationError("document \"" + d.key + "\" has no gold label");
      pred.push_back(predict_label(d, m));
      gold.push_back(*d.label);
    }
    const int c = m.config().num_classes;
    r.accuracy = accuracy(pred, gold);
    r.per_class_f1 = per_class_f1(pred, gold, c);
    r.macro_f1 = macro_f1(pred, gold, c);
    r.confusion = confusion_matrix(pred, gold, c);
  }
  if (opts.with_perplexity) {
    std::vector<model::Example> scored;
    for (const auto& d : docs) {
      if (!d.bow.empty()) scored.push_back(d);
    }
    if (!scored.empty()) r.perplexity = perplexity(m, std::span<const model::Example>(scored), opts.perplexity_mode);
  }
  return r;
}

struct MetricSummary {
  double mean = 0;
  double std = 0;  // sample standard deviation (n - 1); 0 for a single value
};

MetricSummary summarize(std::span<const double> values);

struct CvSummary {
  std::vector<EvalReport> folds;
  std::optional<MetricSummary> accuracy;
  std::optional<MetricSummary> macro_f1;
  std::optional<MetricSummary> perplexity;
};

CvSummary summarize(std::vector<EvalReport> folds);
nlohmann::ordered_json to_json(const CvSummary& s);

// One results-table row: "NAME | 63.34(1.43) | 55.48(6.32) | 749(63)", with
// accuracy and F-1 as percentages and n/a for unset metrics.
std::string format_table_header();
std::string format_table_row(std::string_view name, const CvSummary& s);

template <typename Scalar>
using ModelFactory = std::function<model::CantmModel<Scalar>(std::uint64_t seed)>;

using FoldCallback = std::function<void(std::size_t fold, const EvalReport&)>;

// Fold i trains a fresh model from factory(seed + i) with training seed
// seed + i on the other folds and evaluates on fold i.
template <typename Scalar>
CvSummary cross_validate(std::span<const model::Example> data, const ModelFactory<Scalar>& factory, std::size_t k,
                         std::uint64_t seed, const training::TrainConfig& config, const EvalOptions& opts = {},
                         const FoldCallback& on_fold = {}) {
  if (k < 2) throw ValidationError("cross-validation needs k >= 2");
  const auto folds = corpus::split_folds(data.size(), k, seed);
  std::vector<EvalReport> reports;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<char> held(data.size(), 0);
    for (std::size_t i : folds[f]) held[i] = 1;
    std::vector<model::Example> train_set, test_set;
    for (std::size_t i = 0; i < data.size(); ++i) (held[i] ? test_set : train_set).push_back(data[i]);

    const std::uint64_t fold_seed = seed + f;
    auto cfg = config;
    cfg.seed = fold_seed;
    auto trained = training::train(factory(fold_seed), std::span<const model::Example>(train_set), cfg);
    reports.push_back(evaluate(trained.model, std::span<const model::Example>(test_set), opts));
    if (on_fold) on_fold(f, reports.back());
  }
  return summarize(std::move(reports));
}

}  // namespace cantm::evaluation

#endif  // CANTM_EVALUATION_HPP_
