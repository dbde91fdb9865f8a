#ifndef CANTM_CHECKPOINT_HPP_
#define CANTM_CHECKPOINT_HPP_

#include <cstring>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "cantm/corpus.hpp"
#include "cantm/model.hpp"

namespace cantm::checkpoint {

inline constexpr std::string_view kFormatTag = "cantm-v1";

// Column-major tensor payload as stored on disk.
struct RawTensor {
  std::string name;
  std::uint8_t scalar_bytes = 8;  // 4 or 8
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<char> data;
};

// Layout: tag, u64 header length, JSON header, u32 tensor count, then per
// tensor: u32 name length, name, u8 scalar bytes, u64 rows, u64 cols, data.
// All integers and floats little-endian.
void write_archive(std::ostream& out, const nlohmann::json& header, const std::vector<RawTensor>& tensors);
std::pair<nlohmann::json, std::vector<RawTensor>> read_archive(std::istream& in, const std::string& source);

template <typename Scalar>
struct LoadedModel {
  model::CantmModel<Scalar> model;
  corpus::Vocabulary vocab;
  nlohmann::json metadata;
};

template <typename Scalar>
std::vector<RawTensor> to_raw(const model::Parameters<Scalar>& p) {
  std::vector<RawTensor> out;
  p.visit([&](std::string_view name, model::ParamGroup, const auto& t) {
    RawTensor r;
    r.name = std::string(name);
    r.scalar_bytes = sizeof(Scalar);
    r.rows = static_cast<std::uint64_t>(t.rows());
    r.cols = static_cast<std::uint64_t>(t.cols());
    r.data.resize(static_cast<std::size_t>(t.size()) * sizeof(Scalar));
    std::memcpy(r.data.data(), t.data(), r.data.size());
    out.push_back(std::move(r));
  });
  return out;
}

template <typename Scalar>
void from_raw(model::Parameters<Scalar>& p, const std::vector<RawTensor>& raw) {
  std::map<std::string, const RawTensor*, std::less<>> by_name;
  for (const auto& r : raw) by_name[r.name] = &r;
  p.visit([&](std::string_view name, model::ParamGroup, auto& t) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw ParseError("checkpoint is missing tensor " + std::string(name));
    const RawTensor& r = *it->second;
    if (r.rows != static_cast<std::uint64_t>(t.rows()) || r.cols != static_cast<std::uint64_t>(t.cols())) {
      throw ParseError("checkpoint tensor " + std::string(name) + " has shape " + std::to_string(r.rows) + "x" +
                       std::to_string(r.cols) + ", expected " + std::to_string(t.rows()) + "x" +
                       std::to_string(t.cols()));
    }
    for (Eigen::Index k = 0; k < t.size(); ++k) {
      if (r.scalar_bytes == 4) {
        float v;
        std::memcpy(&v, r.data.data() + k * 4, 4);
        t.data()[k] = static_cast<Scalar>(v);
      } else {
        double v;
        std::memcpy(&v, r.data.data() + k * 8, 8);
        t.data()[k] = static_cast<Scalar>(v);
      }
    }
  });
}

// The embedding table of an embedding-encoder model is not stored; callers
// attach it after loading.
template <typename Scalar>
void save_model(std::ostream& out, const model::CantmModel<Scalar>& m, const corpus::Vocabulary& vocab,
                const nlohmann::json& metadata = nlohmann::json::object()) {
  if (vocab.size() != static_cast<std::size_t>(m.config().vocab_size)) {
    throw ValidationError("vocabulary size does not match the model");
  }
  nlohmann::json header = {{"format", std::string(kFormatTag)},
                           {"config", model::config_to_json(m.config())},
                           {"vocabulary", vocab.tokens()},
                           {"metadata", metadata}};
  write_archive(out, header, to_raw(m.params()));
}

template <typename Scalar>
LoadedModel<Scalar> load_model(std::istream& in, const std::string& source = "<stream>") {
  auto [header, tensors] = read_archive(in, source);
  try {
    auto cfg = model::config_from_json(header.at("config"));
    corpus::Vocabulary vocab(header.at("vocabulary").get<std::vector<std::string>>());
    if (vocab.size() != static_cast<std::size_t>(cfg.vocab_size)) {
      throw ParseError(source + ": vocabulary size does not match the stored config");
    }
    model::CantmModel<Scalar> m(cfg);
    from_raw(m.params(), tensors);
    return {std::move(m), std::move(vocab), header.value("metadata", nlohmann::json::object())};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source + ": bad checkpoint header: " + e.what());
  }
}

void save_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& write);

template <typename Scalar>
void save_model(const std::filesystem::path& path, const model::CantmModel<Scalar>& m,
                const corpus::Vocabulary& vocab, const nlohmann::json& metadata = nlohmann::json::object()) {
  save_file(path, [&](std::ostream& out) { save_model(out, m, vocab, metadata); });
}

std::unique_ptr<std::istream> open_file(const std::filesystem::path& path);

template <typename Scalar>
LoadedModel<Scalar> load_model(const std::filesystem::path& path) {
  auto in = open_file(path);
  return load_model<Scalar>(*in, path.string());
}

}  // namespace cantm::checkpoint

#endif  // CANTM_CHECKPOINT_HPP_
