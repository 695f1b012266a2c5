#ifndef DCHI_EMBEDDING_HPP
#define DCHI_EMBEDDING_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dchi {

using WordId = std::uint32_t;

struct LoadOptions {
  enum class OnDuplicate { kKeepFirst, kError };

  bool expect_header = false;  // fastText files start with a "count dim" line
  bool lowercase = false;      // ASCII lowercasing only
  std::optional<std::size_t> max_words;  // >= 1 when set
  OnDuplicate on_duplicate = OnDuplicate::kKeepFirst;
};

// Immutable vocabulary plus a |W| x dim float32 matrix. Distances accumulate
// in double; vectors stay at published float precision. Safe to share across
// threads once constructed.
class EmbeddingModel {
 public:
  struct Neighbor {
    WordId id;
    double distance;

    bool operator==(const Neighbor&) const = default;
  };

  // Takes ownership of the vocabulary and the row-major matrix. Throws if a
  // token repeats, a value is non-finite, or the matrix shape is off.
  EmbeddingModel(std::vector<std::string> words, std::vector<float> matrix,
                 std::size_t dim, std::string name);

  std::size_t size() const { return words_.size(); }
  std::size_t dim() const { return dim_; }
  const std::string& name() const { return name_; }

  const std::string& word_of(WordId id) const;
  std::optional<WordId> lookup(std::string_view word) const;

  std::span<const float> row(WordId id) const;

  // Not-found is a signal, not a failure: nullopt for OOV tokens.
  std::optional<std::span<const float>> vector_of(std::string_view word) const;

  // Exact argmin over the vocabulary of the Euclidean distance to query;
  // ties resolve to the smallest row index. Throws DimensionError on a
  // query of the wrong dimension.
  Neighbor nearest(std::span<const double> query) const;

  // The k closest words to `word` excluding itself, ascending distance with
  // index tie-break. Throws WordNotFoundError / std::invalid_argument.
  std::vector<Neighbor> k_nearest(std::string_view word, std::size_t k) const;
  std::vector<Neighbor> k_nearest(WordId id, std::size_t k) const;

  double distance(WordId a, WordId b) const;

  const std::vector<float>& matrix() const { return matrix_; }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> words_;
  std::vector<float> matrix_;  // row-major, size() * dim_
  std::size_t dim_;
  std::string name_;
  std::unordered_map<std::string, WordId, StringHash, std::equal_to<>> index_;
};

// Sum over positions of per-word Euclidean distances. Sequences must have
// equal length and all words must be in-vocabulary.
double string_distance(const EmbeddingModel& model,
                       std::span<const std::string> x,
                       std::span<const std::string> y);

// Parses the whitespace-separated text format (token + dim floats per line).
EmbeddingModel load_text_embeddings(const std::filesystem::path& path,
                                    const LoadOptions& opts = {});

// Binary cache: magic + version + dim + count + length-prefixed tokens +
// row-major float32 block, little-endian throughout. Round-trips bit-exactly.
void save_cache(const EmbeddingModel& model, const std::filesystem::path& path);
EmbeddingModel load_cache(const std::filesystem::path& path);

// True if the file starts with the cache magic bytes.
bool is_cache_file(const std::filesystem::path& path);

// Loads a cache or a text file depending on the magic sniff.
EmbeddingModel load_model(const std::filesystem::path& path,
                          const LoadOptions& opts = {});

}  // namespace dchi

#endif  // DCHI_EMBEDDING_HPP
