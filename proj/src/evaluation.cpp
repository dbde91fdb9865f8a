#include "cantm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace cantm::evaluation {
namespace {

void check_labels(std::span<const int> pred, std::span<const int> gold, int num_classes) {
  if (pred.size() != gold.size()) throw ValidationError("prediction and gold label counts differ");
  if (pred.empty()) throw ValidationError("no labels to score");
  if (num_classes < 1) return;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= num_classes || gold[i] < 0 || gold[i] >= num_classes) {
      throw ValidationError("label at position " + std::to_string(i) + " is outside the label set");
    }
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

nlohmann::ordered_json summary_json(const std::optional<MetricSummary>& m) {
  if (!m) return nullptr;
  return {{"mean", m->mean}, {"std", m->std}};
}

std::string cell(const std::optional<MetricSummary>& m, double scale, int digits) {
  if (!m) return "n/a";
  return fixed(m->mean * scale, digits) + "(" + fixed(m->std * scale, digits) + ")";
}

}  // namespace

double accuracy(std::span<const int> pred, std::span<const int> gold) {
  check_labels(pred, gold, 0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

ConfusionMatrix confusion_matrix(std::span<const int> pred, std::span<const int> gold, int num_classes) {
  check_labels(pred, gold, num_classes);
  ConfusionMatrix m = ConfusionMatrix::Zero(num_classes, num_classes);
  for (std::size_t i = 0; i < pred.size(); ++i) ++m(pred[i], gold[i]);
  return m;
}

std::vector<double> per_class_f1(std::span<const int> pred, std::span<const int> gold, int num_classes) {
  const auto m = confusion_matrix(pred, gold, num_classes);
  std::vector<double> f1(static_cast<std::size_t>(num_classes), 0.0);
  for (int c = 0; c < num_classes; ++c) {
    const double tp = static_cast<double>(m(c, c));
    const double predicted = static_cast<double>(m.row(c).sum());
    const double actual = static_cast<double>(m.col(c).sum());
    if (predicted + actual > 0) f1[static_cast<std::size_t>(c)] = 2 * tp / (predicted + actual);
  }
  return f1;
}

double macro_f1(std::span<const int> pred, std::span<const int> gold, int num_classes) {
  const auto f1 = per_class_f1(pred, gold, num_classes);
  return std::accumulate(f1.begin(), f1.end(), 0.0) / static_cast<double>(f1.size());
}

std::string_view to_string(PerplexityMode m) { return m == PerplexityMode::PerDocument ? "per_document" : "corpus"; }

std::optional<PerplexityMode> parse_perplexity_mode(std::string_view s) {
  if (s == "per_document") return PerplexityMode::PerDocument;
  if (s == "corpus") return PerplexityMode::Corpus;
  return std::nullopt;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["size"] = r.size;
  j["accuracy"] = r.accuracy ? nlohmann::ordered_json(*r.accuracy) : nlohmann::ordered_json(nullptr);
  j["macro_f1"] = r.macro_f1 ? nlohmann::ordered_json(*r.macro_f1) : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json f1 = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < r.per_class_f1.size(); ++c) f1[r.labels[c]] = r.per_class_f1[c];
  j["per_class_f1"] = f1;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index k = 0; k < r.confusion.cols(); ++k) row.push_back(r.confusion(i, k));
    rows.push_back(row);
  }
  j["confusion"] = {{"labels", r.labels}, {"rows", "predicted"}, {"columns", "gold"}, {"counts", rows}};
  j["perplexity"] = r.perplexity ? nlohmann::ordered_json(*r.perplexity) : nlohmann::ordered_json(nullptr);
  return j;
}

std::string confusion_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "predicted";
  for (const auto& l : r.labels) out << ',' << l;
  out << '\n';
  for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
    out << r.labels[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < r.confusion.cols(); ++k) out << ',' << r.confusion(i, k);
    out << '\n';
  }
  return out.str();
}

MetricSummary summarize(std::span<const double> values) {
  if (values.empty()) throw ValidationError("cannot summarize an empty metric list");
  MetricSummary s;
  const double n = static_cast<double>(values.size());
  // Shifted by the first value so a constant series has exactly zero spread.
  const double shift = values.front();
  double sum = 0, sq = 0;
  for (double v : values) {
    sum += v - shift;
    sq += (v - shift) * (v - shift);
  }
  s.mean = shift + sum / n;
  if (values.size() > 1) s.std = std::sqrt(std::max(0.0, (sq - sum * sum / n) / (n - 1)));
  return s;
}

CvSummary summarize(std::vector<EvalReport> folds) {
  CvSummary s;
  s.folds = std::move(folds);
  auto collect = [&](auto field) -> std::optional<MetricSummary> {
    std::vector<double> v;
    for (const auto& r : s.folds) {
      if (const auto& x = r.*field) v.push_back(*x);
    }
    if (v.empty()) return std::nullopt;
    return summarize(std::span<const double>(v));
  };
  s.accuracy = collect(&EvalReport::accuracy);
  s.macro_f1 = collect(&EvalReport::macro_f1);
  s.perplexity = collect(&EvalReport::perplexity);
  return s;
}

nlohmann::ordered_json to_json(const CvSummary& s) {
  nlohmann::ordered_json folds = nlohmann::ordered_json::array();
  for (const auto& r : s.folds) folds.push_back(to_json(r));
  return {{"k", s.folds.size()},
          {"std_convention", "sample"},
          {"accuracy", summary_json(s.accuracy)},
          {"macro_f1", summary_json(s.macro_f1)},
          {"perplexity", summary_json(s.perplexity)},
          {"folds", folds}};
}

std::string format_table_header() { return "| Acc. | F-1 | Perp."; }

std::string format_table_row(std::string_view name, const CvSummary& s) {
  return std::string(name) + " | " + cell(s.accuracy, 100, 2) + " | " + cell(s.macro_f1, 100, 2) + " | " +
         cell(s.perplexity, 1, 0);
}

}  // namespace cantm::evaluation
