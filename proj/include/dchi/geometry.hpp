#ifndef DCHI_GEOMETRY_HPP
#define DCHI_GEOMETRY_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "dchi/embedding.hpp"
#include "dchi/stats.hpp"

namespace dchi {

// k values analyzed in the reference experiments.
inline constexpr std::size_t kDefaultKs[] = {1, 5, 10, 20, 50, 100, 200, 500,
                                             1000};
inline constexpr double kDefaultPercentiles[] = {5, 20, 50, 80, 95};

struct KnnDistanceTable {
  std::vector<std::size_t> ks;
  std::vector<double> percentiles;
  // cells[k_idx * percentiles.size() + p_idx]; non-decreasing along both axes.
  std::vector<double> cells;
  std::size_t sample_size = 0;

  double at(std::size_t k_idx, std::size_t p_idx) const;
};

struct GeometryOptions {
  std::size_t workers = 1;
};

// Distance from each sampled word to its k-th nearest neighbor (self
// excluded), exact over the vocabulary, summarized by percentiles with
// linear interpolation. Requires ks strictly ascending with
// max(ks) <= |W|-1 and percentiles strictly ascending in (0, 100).
KnnDistanceTable knn_distance_table(const EmbeddingModel& model,
                                    std::span<const std::size_t> ks,
                                    std::span<const double> percentiles,
                                    std::span<const WordId> sample,
                                    const GeometryOptions& opts = {});

// Histogram of the k-th-neighbor distance across the sample. Bin range is
// [min, max] of the observed distances, so counts partition the sample.
stats::Histogram knn_distance_histogram(const EmbeddingModel& model,
                                        std::size_t k, std::size_t bins,
                                        std::span<const WordId> sample,
                                        const GeometryOptions& opts = {});

// Uniform sample of `count` distinct word ids, deterministic in the seed.
// count >= |W| returns every id in ascending order.
std::vector<WordId> sample_word_ids(const EmbeddingModel& model,
                                    std::size_t count, std::uint64_t seed);

// Tokens present in both models, in `a`'s id order.
std::vector<std::string> intersect_vocabulary(const EmbeddingModel& a,
                                              const EmbeddingModel& b);

// Rows = k, columns = percentiles; header row "k,p5,p20,..." built from the
// table's percentile levels.
void write_knn_table_csv(std::ostream& out, const KnnDistanceTable& table);

}  // namespace dchi

#endif  // DCHI_GEOMETRY_HPP
