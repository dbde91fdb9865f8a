#ifndef CANTM_TOPICS_HPP_
#define CANTM_TOPICS_HPP_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "cantm/corpus.hpp"
#include "cantm/model.hpp"

namespace cantm::topics {

enum class TopicKind { Latent, ClassAssociated, ClassificationAware };

std::string_view to_string(TopicKind k);
std::optional<TopicKind> parse_topic_kind(std::string_view s);

inline constexpr std::size_t kDefaultTopWords = 10;

struct Topic {
  std::string label;  // row number, or category name for class-associated topics
  std::vector<std::string> words;
  std::vector<double> weights;
};

struct TopicReport {
  TopicKind kind = TopicKind::Latent;
  std::vector<Topic> topics;
};

// Each row's k largest-weight words, ties broken by vocabulary order. Rows are
// labelled by `row_labels` when given, otherwise by their index.
TopicReport top_words(const Eigen::MatrixXd& weights, const corpus::Vocabulary& vocab, std::size_t k,
                      TopicKind kind = TopicKind::Latent, const std::vector<std::string>& row_labels = {});

// Ranks the rows of R, R_ct or R_s; decoder biases are not included.
template <typename Scalar>
TopicReport model_topics(const model::CantmModel<Scalar>& m, const corpus::Vocabulary& vocab, TopicKind kind,
                         std::size_t k = kDefaultTopWords) {
  const auto& p = m.params();
  if (kind != TopicKind::Latent && m.config().variant != model::Variant::Cantm) {
    throw ValidationError(std::string(to_string(kind)) + " topics need the cantm variant");
  }
  switch (kind) {
    case TopicKind::Latent:
      return top_words(p.topic_word.template cast<double>(), vocab, k, kind);
    case TopicKind::ClassAssociated: {
      std::vector<std::string> labels;
      for (Category c : m.config().labels) labels.emplace_back(to_string(c));
      return top_words(p.class_word.template cast<double>(), vocab, k, kind, labels);
    }
    case TopicKind::ClassificationAware:
      return top_words(p.aware_word.template cast<double>(), vocab, k, kind);
  }
  return {};
}

nlohmann::ordered_json to_json(const TopicReport& r);
// One line per topic: label, then its words separated by spaces.
std::string to_text(const TopicReport& r);

}  // namespace cantm::topics

#endif  // CANTM_TOPICS_HPP_
