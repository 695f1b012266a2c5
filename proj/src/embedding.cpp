#include "dchi/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dchi/errors.hpp"

namespace dchi {

EmbeddingModel::EmbeddingModel(std::vector<std::string> words,
                               std::vector<float> matrix, std::size_t dim,
                               std::string name)
    : words_(std::move(words)),
      matrix_(std::move(matrix)),
      dim_(dim),
      name_(std::move(name)) {
  if (dim_ == 0) throw DimensionError("embedding dimension must be positive");
  if (matrix_.size() != words_.size() * dim_) {
    throw DimensionError("matrix size " + std::to_string(matrix_.size()) +
                         " does not match " + std::to_string(words_.size()) +
                         " words x dim " + std::to_string(dim_));
  }
  for (float v : matrix_) {
    if (!std::isfinite(v)) {
      throw Error("embedding matrix contains a non-finite value");
    }
  }
  index_.reserve(words_.size());
  for (WordId i = 0; i < words_.size(); ++i) {
    auto [it, inserted] = index_.emplace(words_[i], i);
    if (!inserted) {
      throw DuplicateWordError("duplicate token '" + words_[i] + "'");
    }
  }
}

const std::string& EmbeddingModel::word_of(WordId id) const {
  if (id >= words_.size()) throw std::out_of_range("word id out of range");
  return words_[id];
}

std::optional<WordId> EmbeddingModel::lookup(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingModel::row(WordId id) const {
  if (id >= words_.size()) throw std::out_of_range("word id out of range");
  return {matrix_.data() + static_cast<std::size_t>(id) * dim_, dim_};
}

std::optional<std::span<const float>> EmbeddingModel::vector_of(
    std::string_view word) const {
  auto id = lookup(word);
  if (!id) return std::nullopt;
  return row(*id);
}

namespace {

// Squared distance with early exit once the partial sum reaches `bound`.
// Scanning in ascending row order makes the cut safe for the lowest-index
// tie-break: a row whose partial sum already ties the incumbent can never
// displace it.
double squared_distance_bounded(const float* row, const double* query,
                                std::size_t dim, double bound) {
  double acc = 0.0;
  std::size_t d = 0;
  while (d + 8 <= dim) {
    for (std::size_t j = 0; j < 8; ++j) {
      const double diff = static_cast<double>(row[d + j]) - query[d + j];
      acc += diff * diff;
    }
    d += 8;
    if (acc >= bound) return acc;
  }
  for (; d < dim; ++d) {
    const double diff = static_cast<double>(row[d]) - query[d];
    acc += diff * diff;
  }
  return acc;
}

double squared_row_distance(const float* a, const float* b, std::size_t dim,
                            double bound = std::numeric_limits<double>::infinity()) {
  double acc = 0.0;
  std::size_t d = 0;
  while (d + 8 <= dim) {
    for (std::size_t j = 0; j < 8; ++j) {
      const double diff = static_cast<double>(a[d + j]) - static_cast<double>(b[d + j]);
      acc += diff * diff;
    }
    d += 8;
    if (acc >= bound) return acc;
  }
  for (; d < dim; ++d) {
    const double diff = static_cast<double>(a[d]) - static_cast<double>(b[d]);
    acc += diff * diff;
  }
  return acc;
}

}  // namespace

EmbeddingModel::Neighbor EmbeddingModel::nearest(
    std::span<const double> query) const {
  if (query.size() != dim_) {
    throw DimensionError("query dimension " + std::to_string(query.size()) +
                         " != model dimension " + std::to_string(dim_));
  }
  if (words_.empty()) throw std::invalid_argument("empty model");
  for (double v : query) {
    if (!std::isfinite(v)) throw DimensionError("query has non-finite entry");
  }
  double best = std::numeric_limits<double>::infinity();
  WordId best_id = 0;
  const float* rows = matrix_.data();
  for (WordId i = 0; i < words_.size(); ++i, rows += dim_) {
    const double d2 = squared_distance_bounded(rows, query.data(), dim_, best);
    if (d2 < best) {
      best = d2;
      best_id = i;
    }
  }
  return {best_id, std::sqrt(best)};
}

std::vector<EmbeddingModel::Neighbor> EmbeddingModel::k_nearest(
    std::string_view word, std::size_t k) const {
  auto id = lookup(word);
  if (!id) throw WordNotFoundError(std::string(word));
  return k_nearest(*id, k);
}

std::vector<EmbeddingModel::Neighbor> EmbeddingModel::k_nearest(
    WordId id, std::size_t k) const {
  if (id >= words_.size()) throw std::out_of_range("word id out of range");
  if (k == 0 || k > words_.size() - 1) {
    throw std::invalid_argument("k must be in [1, |W|-1]");
  }
  const float* self = matrix_.data() + static_cast<std::size_t>(id) * dim_;

  // Bounded max-heap on (squared distance, index); ascending scan keeps the
  // lexicographic tie rule exact.
  using Entry = std::pair<double, WordId>;
  std::vector<Entry> heap;
  heap.reserve(k);
  const float* rows = matrix_.data();
  for (WordId i = 0; i < words_.size(); ++i, rows += dim_) {
    if (i == id) continue;
    if (heap.size() < k) {
      heap.emplace_back(squared_row_distance(self, rows, dim_), i);
      if (heap.size() == k) std::make_heap(heap.begin(), heap.end());
      continue;
    }
    const double d2 = squared_row_distance(self, rows, dim_, heap.front().first);
    if (d2 < heap.front().first) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = {d2, i};
      std::push_heap(heap.begin(), heap.end());
    }
  }
  std::sort(heap.begin(), heap.end());
  std::vector<Neighbor> out;
  out.reserve(heap.size());
  for (const auto& [d2, i] : heap) out.push_back({i, std::sqrt(d2)});
  return out;
}

double EmbeddingModel::distance(WordId a, WordId b) const {
  if (a >= words_.size() || b >= words_.size()) {
    throw std::out_of_range("word id out of range");
  }
  const float* ra = matrix_.data() + static_cast<std::size_t>(a) * dim_;
  const float* rb = matrix_.data() + static_cast<std::size_t>(b) * dim_;
  return std::sqrt(squared_row_distance(ra, rb, dim_));
}

double string_distance(const EmbeddingModel& model,
                       std::span<const std::string> x,
                       std::span<const std::string> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("string_distance: length mismatch (" +
                                std::to_string(x.size()) + " vs " +
                                std::to_string(y.size()) + ")");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto a = model.lookup(x[i]);
    if (!a) throw WordNotFoundError(x[i]);
    auto b = model.lookup(y[i]);
    if (!b) throw WordNotFoundError(y[i]);
    total += model.distance(*a, *b);
  }
  return total;
}

}  // namespace dchi
