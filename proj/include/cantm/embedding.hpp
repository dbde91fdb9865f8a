#ifndef CANTM_EMBEDDING_HPP_
#define CANTM_EMBEDDING_HPP_

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>

#include "cantm/numeric.hpp"

namespace cantm {

// Precomputed document vectors (doc_id -> float32 vector of fixed dimension).
//
// File format, JSON-lines:
//   {"format": "cantm-embeddings", "dim": 768}
//   {"doc_id": "d1", "vector": [0.1, ...]}
//   ...
class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  bool contains(const std::string& key) const { return vectors_.contains(key); }

  // Throws ValidationError on dimension mismatch or duplicate key.
  void insert(std::string key, Vector<float> v);

  // Throws LookupError naming the key when absent.
  const Vector<float>& at(const std::string& key) const;

  static EmbeddingTable parse(std::istream& in, const std::string& source = "<stream>");
  static EmbeddingTable load(const std::filesystem::path& path);
  void write(std::ostream& out) const;

 private:
  int dim_;
  std::unordered_map<std::string, Vector<float>> vectors_;
};

}  // namespace cantm

#endif  // CANTM_EMBEDDING_HPP_
