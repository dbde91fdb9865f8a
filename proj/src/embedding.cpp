#include "cantm/embedding.hpp"

#include <algorithm>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "cantm/error.hpp"

namespace cantm {

void EmbeddingTable::insert(std::string key, Vector<float> v) {
  if (v.size() != dim_)
    throw ValidationError("embedding \"" + key + "\" has dimension " + std::to_string(v.size()) + ", expected " +
                          std::to_string(dim_));
  if (!v.allFinite()) throw ValidationError("embedding \"" + key + "\" has non-finite entries");
  auto [it, inserted] = vectors_.emplace(std::move(key), std::move(v));
  if (!inserted) throw ValidationError("duplicate embedding key \"" + it->first + "\"");
}

const Vector<float>& EmbeddingTable::at(const std::string& key) const {
  auto it = vectors_.find(key);
  if (it == vectors_.end()) throw LookupError("no embedding for document \"" + key + "\"");
  return it->second;
}

EmbeddingTable EmbeddingTable::parse(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<EmbeddingTable> table;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string locus = source + ":" + std::to_string(lineno) + ": ";
    try {
      const auto obj = nlohmann::json::parse(line);
      if (!table) {
        if (!obj.contains("dim")) throw ParseError(locus + "first record must be a header with \"dim\"");
        const int dim = obj.at("dim").get<int>();
        if (dim < 1) throw ValidationError(locus + "embedding dim must be positive");
        table.emplace(dim);
        continue;
      }
      const auto values = obj.at("vector").get<std::vector<float>>();
      table->insert(obj.at("doc_id").get<std::string>(),
                    Eigen::Map<const Vector<float>>(values.data(), static_cast<Eigen::Index>(values.size())));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(locus + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(locus + e.what());
    }
  }
  if (!table) throw ParseError(source + ": missing embedding header record");
  return std::move(*table);
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return parse(in, path.string());
}

void EmbeddingTable::write(std::ostream& out) const {
  out << nlohmann::json{{"format", "cantm-embeddings"}, {"dim", dim_}}.dump() << '\n';
  std::vector<const std::string*> keys;
  for (const auto& [k, _] : vectors_) keys.push_back(&k);
  std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return *a < *b; });
  for (const auto* k : keys) {
    const auto& v = vectors_.at(*k);
    out << nlohmann::json{{"doc_id", *k}, {"vector", std::vector<float>(v.data(), v.data() + v.size())}}.dump()
        << '\n';
  }
}

}  // namespace cantm
