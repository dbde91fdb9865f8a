#ifndef CANTM_ANNOTATIONS_HPP_
#define CANTM_ANNOTATIONS_HPP_

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cantm/category.hpp"

namespace cantm::corpus {

struct Annotation {
  std::string doc_id;
  std::string annotator_id;
  Category category;
  int confidence = 0;  // 0..9
};

// Annotations in input order. Within a document, input order decides which
// member of a pair is the "first" rater for Cohen's kappa.
using AnnotationSet = std::vector<Annotation>;

AnnotationSet parse_annotations_jsonl(std::istream& in, const std::string& source = "<stream>");
AnnotationSet load_annotations(const std::filesystem::path& path);

using LabelPair = std::pair<Category, Category>;

// Every unordered pair of annotations on the same document, earlier
// annotation first. Documents are visited in order of first appearance.
std::vector<LabelPair> annotation_pairs(std::span<const Annotation> annset);

// Fraction of same-document annotation pairs that agree (micro-average over
// all pairs). Throws NumericError when no document has two annotations.
double pairwise_agreement(std::span<const Annotation> annset);

// (p_o - p_e) / (1 - p_e) with p_e from the two raters' marginals; 1.0 when
// p_e = p_o = 1. Throws NumericError on empty input.
double cohen_kappa(std::span<const LabelPair> pairs);
double cohen_kappa(std::span<const Annotation> annset);

// Leave-one-out change in pairwise agreement when an annotator's annotations
// are removed. A larger positive value means the annotator was dragging
// agreement down. nullopt when the annotator shares no document with anyone
// or removal leaves no multiply-annotated document.
std::map<std::string, std::optional<double>> score_annotators(std::span<const Annotation> annset);

inline constexpr int kDefaultConfidenceThreshold = 6;

// Drops excluded annotators, then annotations whose confidence is below the
// annotator's threshold (default_threshold when not listed).
AnnotationSet filter_annotations(std::span<const Annotation> annset,
                                 const std::map<std::string, int>& thresholds,
                                 const std::set<std::string>& excluded,
                                 int default_threshold = kDefaultConfidenceThreshold);

// Strict majority label; otherwise the label of the highest-confidence
// annotation; remaining ties go to the label that sorts first by name.
std::map<std::string, Category> merge_labels(std::span<const Annotation> annset);

struct AnnotationCounts {
  std::size_t single = 0;    // documents with exactly one annotation
  std::size_t double_ = 0;   // exactly two
  std::size_t multiple = 0;  // three or more
};

AnnotationCounts count_annotations(std::span<const Annotation> annset);

}  // namespace cantm::corpus

#endif  // CANTM_ANNOTATIONS_HPP_
