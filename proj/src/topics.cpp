#include "cantm/topics.hpp"

#include <algorithm>
#include <numeric>

namespace cantm::topics {

std::string_view to_string(TopicKind k) {
  switch (k) {
    case TopicKind::Latent:
      return "latent";
    case TopicKind::ClassAssociated:
      return "class_associated";
    case TopicKind::ClassificationAware:
      return "classification_aware";
  }
  return "latent";
}

std::optional<TopicKind> parse_topic_kind(std::string_view s) {
  for (auto k : {TopicKind::Latent, TopicKind::ClassAssociated, TopicKind::ClassificationAware}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

TopicReport top_words(const Eigen::MatrixXd& weights, const corpus::Vocabulary& vocab, std::size_t k, TopicKind kind,
                      const std::vector<std::string>& row_labels) {
  const auto v = static_cast<std::size_t>(weights.cols());
  if (v != vocab.size()) {
    throw ValidationError("topic matrix has " + std::to_string(v) + " columns but the vocabulary has " +
                          std::to_string(vocab.size()) + " words");
  }
  if (k < 1 || k > v) {
    throw ValidationError("k must be between 1 and the vocabulary size (" + std::to_string(v) + "), got " +
                          std::to_string(k));
  }
  if (!row_labels.empty() && row_labels.size() != static_cast<std::size_t>(weights.rows())) {
    throw ValidationError("row label count does not match topic count");
  }

  TopicReport report;
  report.kind = kind;
  std::vector<Eigen::Index> order(v);
  for (Eigen::Index r = 0; r < weights.rows(); ++r) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return weights(r, a) > weights(r, b); });
    Topic t;
    t.label = row_labels.empty() ? std::to_string(r) : row_labels[static_cast<std::size_t>(r)];
    for (std::size_t i = 0; i < k; ++i) {
      t.words.push_back(vocab.token(static_cast<std::size_t>(order[i])));
      t.weights.push_back(weights(r, order[i]));
    }
    report.topics.push_back(std::move(t));
  }
  return report;
}

nlohmann::ordered_json to_json(const TopicReport& r) {
  nlohmann::ordered_json topics = nlohmann::ordered_json::array();
  for (const auto& t : r.topics) topics.push_back({{"label", t.label}, {"words", t.words}, {"weights", t.weights}});
  return {{"kind", std::string(to_string(r.kind))}, {"topics", topics}};
}

std::string to_text(const TopicReport& r) {
  std::size_t width = 0;
  for (const auto& t : r.topics) width = std::max(width, t.label.size());
  std::string out;
  for (const auto& t : r.topics) {
    out += t.label;
    out.append(width - t.label.size() + 2, ' ');
    for (std::size_t i = 0; i < t.words.size(); ++i) {
      if (i) out += ' ';
      out += t.words[i];
    }
    out += '\n';
  }
  return out;
}

}  // namespace cantm::topics
