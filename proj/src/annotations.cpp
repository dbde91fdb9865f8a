#include "cantm/annotations.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "cantm/error.hpp"

namespace cantm::corpus {
namespace {

// Document ids in first-appearance order, each with its annotations.
std::vector<std::vector<const Annotation*>> group_by_document(std::span<const Annotation> annset) {
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<const Annotation*>> groups;
  for (const auto& a : annset) {
    auto [it, inserted] = slot.emplace(a.doc_id, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(&a);
  }
  return groups;
}

struct PairTally {
  std::size_t agree = 0;
  std::size_t total = 0;
};

PairTally tally_pairs(std::span<const Annotation> annset, const std::string* skip_annotator) {
  PairTally t;
  for (const auto& group : group_by_document(annset)) {
    std::vector<const Annotation*> kept;
    for (const auto* a : group) {
      if (!skip_annotator || a->annotator_id != *skip_annotator) kept.push_back(a);
    }
    for (std::size_t i = 0; i < kept.size(); ++i) {
      for (std::size_t j = i + 1; j < kept.size(); ++j) {
        ++t.total;
        if (kept[i]->category == kept[j]->category) ++t.agree;
      }
    }
  }
  return t;
}

}  // namespace

AnnotationSet parse_annotations_jsonl(std::istream& in, const std::string& source) {
  AnnotationSet out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string locus = source + ":" + std::to_string(lineno) + ": ";
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(locus + e.what());
    }
    Annotation a;
    try {
      a.doc_id = obj.at("doc_id").get<std::string>();
      a.annotator_id = obj.at("annotator_id").get<std::string>();
      const auto cat_text = obj.at("category").get<std::string>();
      auto cat = parse_category(cat_text);
      if (!cat) throw ValidationError("unknown category \"" + cat_text + "\"");
      a.category = *cat;
      a.confidence = obj.at("confidence").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(locus + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(locus + e.what());
    }
    if (a.confidence < 0 || a.confidence > 9)
      throw ValidationError(locus + "confidence " + std::to_string(a.confidence) + " outside [0,9]");
    out.push_back(std::move(a));
  }
  return out;
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return parse_annotations_jsonl(in, path.string());
}

std::vector<LabelPair> annotation_pairs(std::span<const Annotation> annset) {
  std::vector<LabelPair> pairs;
  for (const auto& group : group_by_document(annset)) {
    for (std::size_t i = 0; i < group.size(); ++i) {
      for (std::size_t j = i + 1; j < group.size(); ++j) pairs.emplace_back(group[i]->category, group[j]->category);
    }
  }
  return pairs;
}

double pairwise_agreement(std::span<const Annotation> annset) {
  const auto t = tally_pairs(annset, nullptr);
  if (t.total == 0) throw NumericError("agreement undefined: no document has two or more annotations");
  return static_cast<double>(t.agree) / static_cast<double>(t.total);
}

double cohen_kappa(std::span<const LabelPair> pairs) {
  if (pairs.empty()) throw NumericError("kappa undefined: no label pairs");
  constexpr std::size_t kNumCategories = kAllCategories.size();
  std::array<double, kNumCategories> first{}, second{};
  double observed = 0.0;
  for (const auto& [a, b] : pairs) {
    first[static_cast<std::size_t>(a)] += 1.0;
    second[static_cast<std::size_t>(b)] += 1.0;
    if (a == b) observed += 1.0;
  }
  const double n = static_cast<double>(pairs.size());
  observed /= n;
  double expected = 0.0;
  for (std::size_t c = 0; c < kNumCategories; ++c) expected += (first[c] / n) * (second[c] / n);
  if (expected >= 1.0) return 1.0;  // both raters used one identical label throughout
  return (observed - expected) / (1.0 - expected);
}

double cohen_kappa(std::span<const Annotation> annset) {
  const auto pairs = annotation_pairs(annset);
  return cohen_kappa(std::span<const LabelPair>(pairs));
}

std::map<std::string, std::optional<double>> score_annotators(std::span<const Annotation> annset) {
  std::map<std::string, std::optional<double>> scores;
  for (const auto& a : annset) scores.emplace(a.annotator_id, std::nullopt);
  if (scores.size() < 3) throw ValidationError("score_annotators requires at least three annotators");

  const auto base = tally_pairs(annset, nullptr);
  if (base.total == 0) return scores;
  const double base_agreement = static_cast<double>(base.agree) / static_cast<double>(base.total);

  for (auto& [annotator, score] : scores) {
    const auto without = tally_pairs(annset, &annotator);
    // Pairs this annotator took part in.
    if (without.total == base.total || without.total == 0) continue;
    score = static_cast<double>(without.agree) / static_cast<double>(without.total) - base_agreement;
  }
  return scores;
}

AnnotationSet filter_annotations(std::span<const Annotation> annset, const std::map<std::string, int>& thresholds,
                                 const std::set<std::string>& excluded, int default_threshold) {
  for (const auto& [annotator, t] : thresholds) {
    if (t < 0 || t > 9) throw ValidationError("threshold for \"" + annotator + "\" outside [0,9]");
  }
  AnnotationSet out;
  for (const auto& a : annset) {
    if (excluded.contains(a.annotator_id)) continue;
    auto it = thresholds.find(a.annotator_id);
    const int threshold = it == thresholds.end() ? default_threshold : it->second;
    if (a.confidence < threshold) continue;
    out.push_back(a);
  }
  return out;
}

std::map<std::string, Category> merge_labels(std::span<const Annotation> annset) {
  std::map<std::string, Category> merged;
  for (const auto& group : group_by_document(annset)) {
    std::map<Category, std::size_t> votes;
    for (const auto* a : group) ++votes[a->category];
    std::optional<Category> winner;
    for (const auto& [cat, n] : votes) {
      if (2 * n > group.size()) winner = cat;
    }
    if (!winner) {
      int best_conf = -1;
      for (const auto* a : group) {
        const bool better = a->confidence > best_conf ||
                            (a->confidence == best_conf && to_string(a->category) < to_string(*winner));
        if (better) {
          best_conf = a->confidence;
          winner = a->category;
        }
      }
    }
    merged.emplace(group.front()->doc_id, *winner);
  }
  return merged;
}

AnnotationCounts count_annotations(std::span<const Annotation> annset) {
  AnnotationCounts c;
  for (const auto& group : group_by_document(annset)) {
    if (group.size() == 1) ++c.single;
    else if (group.size() == 2) ++c.double_;
    else ++c.multiple;
  }
  return c;
}

}  // namespace cantm::corpus
