#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "dchi/embedding.hpp"
#include "dchi/errors.hpp"

namespace dchi {

namespace {

constexpr char kCacheMagic[8] = {'D', 'C', 'H', 'I', 'E', 'M', 'B', '\0'};
constexpr std::uint32_t kCacheVersion = 1;

bool is_field_sep(char c) { return c == ' ' || c == '\t'; }

// Splits a data line into token + floats. Returns false on any parse problem
// and leaves a reason in `why`.
bool parse_line(const std::string& line, std::string& token,
                std::vector<float>& values, std::string& why) {
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (i < n && is_field_sep(line[i])) ++i;
  std::size_t start = i;
  while (i < n && !is_field_sep(line[i])) ++i;
  if (i == start) {
    why = "missing token";
    return false;
  }
  token.assign(line, start, i - start);
  values.clear();
  while (true) {
    while (i < n && is_field_sep(line[i])) ++i;
    if (i == n) break;
    float v = 0.0f;
    auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + n, v);
    if (ec != std::errc{} || (ptr != line.data() + n && !is_field_sep(*ptr))) {
      why = "unparsable number in field " + std::to_string(values.size() + 2);
      return false;
    }
    if (!std::isfinite(v)) {
      why = "non-finite value in field " + std::to_string(values.size() + 2);
      return false;
    }
    values.push_back(v);
    i = static_cast<std::size_t>(ptr - line.data());
  }
  if (values.empty()) {
    why = "no vector values";
    return false;
  }
  return true;
}

void ascii_lowercase(std::string& s) {
  for (char& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
}

}  // namespace

EmbeddingModel load_text_embeddings(const std::filesystem::path& path,
                                    const LoadOptions& opts) {
  if (opts.max_words && *opts.max_words < 1) {
    throw std::invalid_argument("max_words must be >= 1 when set");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open embedding file: " + path.string());

  std::vector<std::string> words;
  std::vector<float> matrix;
  std::size_t dim = 0;
  std::unordered_set<std::string> seen;
  std::string line, token, why;
  std::vector<float> values;
  std::size_t line_no = 0;
  std::size_t header_dim = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && opts.expect_header) {
      std::uint64_t count = 0, hdim = 0;
      const char* b = line.data();
      const char* e = b + line.size();
      auto r1 = std::from_chars(b, e, count);
      if (r1.ec != std::errc{} || r1.ptr == e || !is_field_sep(*r1.ptr)) {
        throw ParseError(line_no, "expected 'count dim' header line");
      }
      const char* b2 = r1.ptr;
      while (b2 != e && is_field_sep(*b2)) ++b2;
      auto r2 = std::from_chars(b2, e, hdim);
      if (r2.ec != std::errc{} || r2.ptr != e || hdim == 0) {
        throw ParseError(line_no, "expected 'count dim' header line");
      }
      header_dim = hdim;
      words.reserve(count);
      continue;
    }
    if (line.empty()) continue;  // tolerate blank lines (e.g. trailing newline)
    if (!parse_line(line, token, values, why)) {
      throw ParseError(line_no, why);
    }
    if (dim == 0) {
      dim = values.size();
      if (header_dim != 0 && dim != header_dim) {
        throw DimensionError("header declares dimension " +
                             std::to_string(header_dim) + " but line " +
                             std::to_string(line_no) + " has " +
                             std::to_string(dim));
      }
    } else if (values.size() != dim) {
      throw DimensionError("line " + std::to_string(line_no) + " has " +
                           std::to_string(values.size()) +
                           " values, expected " + std::to_string(dim));
    }
    if (opts.lowercase) ascii_lowercase(token);
    if (!seen.insert(token).second) {
      if (opts.on_duplicate == LoadOptions::OnDuplicate::kError) {
        throw DuplicateWordError("duplicate token '" + token + "' at line " +
                                 std::to_string(line_no));
      }
      continue;  // keep-first
    }
    words.push_back(token);
    matrix.insert(matrix.end(), values.begin(), values.end());
    if (opts.max_words && words.size() >= *opts.max_words) break;
  }
  if (words.empty()) throw Error("no embeddings in file: " + path.string());
  return EmbeddingModel(std::move(words), std::move(matrix), dim,
                        path.filename().string());
}

namespace {

template <typename T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  // x86-64/aarch64 hosts are little-endian; the memcpy writes the on-disk
  // layout directly.
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw CacheCorruptError("cache file truncated");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void save_cache(const EmbeddingModel& model,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open cache for writing: " + path.string());
  out.write(kCacheMagic, sizeof(kCacheMagic));
  write_le<std::uint32_t>(out, kCacheVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.dim()));
  write_le<std::uint64_t>(out, model.size());
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.name().size()));
  out.write(model.name().data(),
            static_cast<std::streamsize>(model.name().size()));
  for (WordId i = 0; i < model.size(); ++i) {
    const std::string& w = model.word_of(i);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(w.size()));
    out.write(w.data(), static_cast<std::streamsize>(w.size()));
  }
  const auto& m = model.matrix();
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(float)));
  if (!out) throw Error("write failed: " + path.string());
}

EmbeddingModel load_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open cache file: " + path.string());
  char magic[sizeof(kCacheMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0) {
    throw CacheFormatError("not an embedding cache file: " + path.string());
  }
  const auto version = read_le<std::uint32_t>(in);
  if (version != kCacheVersion) {
    throw CacheFormatError("unsupported cache version " +
                           std::to_string(version));
  }
  const auto dim = read_le<std::uint32_t>(in);
  const auto count = read_le<std::uint64_t>(in);
  const auto name_len = read_le<std::uint32_t>(in);
  std::string name(name_len, '\0');
  in.read(name.data(), name_len);
  if (!in) throw CacheCorruptError("cache file truncated");
  std::vector<std::string> words;
  words.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = read_le<std::uint32_t>(in);
    std::string w(len, '\0');
    in.read(w.data(), len);
    if (!in) throw CacheCorruptError("cache file truncated");
    words.push_back(std::move(w));
  }
  std::vector<float> matrix(static_cast<std::size_t>(count) * dim);
  in.read(reinterpret_cast<char*>(matrix.data()),
          static_cast<std::streamsize>(matrix.size() * sizeof(float)));
  if (!in) throw CacheCorruptError("cache file truncated");
  return EmbeddingModel(std::move(words), std::move(matrix), dim,
                        std::move(name));
}

bool is_cache_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[sizeof(kCacheMagic)];
  in.read(magic, sizeof(magic));
  return in && std::memcmp(magic, kCacheMagic, sizeof(magic)) == 0;
}

EmbeddingModel load_model(const std::filesystem::path& path,
                          const LoadOptions& opts) {
  if (is_cache_file(path)) return load_cache(path);
  return load_text_embeddings(path, opts);
}

}  // namespace dchi
