#include "cantm/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

namespace cantm::checkpoint {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in, const std::string& source, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw ParseError(source + ": truncated checkpoint (" + what + ")");
  return v;
}

std::string get_bytes(std::istream& in, std::uint64_t n, const std::string& source, const char* what) {
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 34;
  if (n > kLimit) throw ParseError(source + ": implausible " + what + " length");
  std::string s(static_cast<std::size_t>(n), '\0');
  if (!in.read(s.data(), static_cast<std::streamsize>(n))) {
    throw ParseError(source + ": truncated checkpoint (" + what + ")");
  }
  return s;
}

}  // namespace

void write_archive(std::ostream& out, const nlohmann::json& header, const std::vector<RawTensor>& tensors) {
  out.write(kFormatTag.data(), static_cast<std::streamsize>(kFormatTag.size()));
  const std::string h = header.dump();
  put<std::uint64_t>(out, h.size());
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    if (t.scalar_bytes != 4 && t.scalar_bytes != 8) throw ValidationError("tensor scalar size must be 4 or 8");
    if (t.data.size() != t.rows * t.cols * t.scalar_bytes) throw ValidationError("tensor " + t.name + " data size mismatch");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint8_t>(out, t.scalar_bytes);
    put<std::uint64_t>(out, t.rows);
    put<std::uint64_t>(out, t.cols);
    out.write(t.data.data(), static_cast<std::streamsize>(t.data.size()));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint");
}

std::pair<nlohmann::json, std::vector<RawTensor>> read_archive(std::istream& in, const std::string& source) {
  std::string tag(kFormatTag.size(), '\0');
  if (!in.read(tag.data(), static_cast<std::streamsize>(tag.size())) || tag != kFormatTag) {
    throw ParseError(source + ": not a " + std::string(kFormatTag) + " checkpoint");
  }
  const auto header_len = get<std::uint64_t>(in, source, "header length");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(get_bytes(in, header_len, source, "header"));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source + ": bad checkpoint header: " + e.what());
  }
  const auto count = get<std::uint32_t>(in, source, "tensor count");
  std::vector<RawTensor> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    RawTensor t;
    t.name = get_bytes(in, get<std::uint32_t>(in, source, "name length"), source, "tensor name");
    t.scalar_bytes = get<std::uint8_t>(in, source, "scalar size");
    if (t.scalar_bytes != 4 && t.scalar_bytes != 8) throw ParseError(source + ": tensor " + t.name + " has bad scalar size");
    t.rows = get<std::uint64_t>(in, source, "rows");
    t.cols = get<std::uint64_t>(in, source, "cols");
    const std::string data = get_bytes(in, t.rows * t.cols * t.scalar_bytes, source, "tensor data");
    t.data.assign(data.begin(), data.end());
    tensors.push_back(std::move(t));
  }
  return {std::move(header), std::move(tensors)};
}

void save_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& write) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::unique_ptr<std::istream> open_file(const std::filesystem::path& path) {
  auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*in) throw ParseError("cannot open " + path.string());
  return in;
}

}  // namespace cantm::checkpoint
