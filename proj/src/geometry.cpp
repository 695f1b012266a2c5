#include "dchi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "dchi/format.hpp"
#include "dchi/parallel.hpp"
#include "dchi/rng.hpp"

namespace dchi {
namespace {

void check_sample(const EmbeddingModel& model, std::span<const WordId> sample) {
  if (sample.empty()) throw std::invalid_argument("empty word sample");
  for (WordId id : sample) {
    if (id >= model.size()) {
      throw std::invalid_argument("word id out of range in sample");
    }
  }
}

void check_ks(const EmbeddingModel& model, std::span<const std::size_t> ks) {
  if (ks.empty()) throw std::invalid_argument("empty k list");
  if (ks.front() < 1 || ks.back() > model.size() - 1) {
    throw std::invalid_argument("k out of range [1, |W|-1]");
  }
  for (std::size_t i = 1; i < ks.size(); ++i) {
    if (ks[i] <= ks[i - 1]) {
      throw std::invalid_argument("ks must be strictly ascending");
    }
  }
}

// dists[i * ks.size() + k_idx] = distance from sample[i] to its ks[k_idx]-th
// nearest neighbor.
std::vector<double> kth_distances(const EmbeddingModel& model,
                                  std::span<const std::size_t> ks,
                                  std::span<const WordId> sample,
                                  std::size_t workers) {
  const std::size_t kmax = ks.back();
  std::vector<double> dists(sample.size() * ks.size());
  parallel_chunks(sample.size(), workers,
                  [&](std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      auto neighbors = model.k_nearest(sample[i], kmax);
                      for (std::size_t k = 0; k < ks.size(); ++k) {
                        dists[i * ks.size() + k] =
                            neighbors[ks[k] - 1].distance;
                      }
                    }
                  });
  return dists;
}

}  // namespace

double KnnDistanceTable::at(std::size_t k_idx, std::size_t p_idx) const {
  return cells.at(k_idx * percentiles.size() + p_idx);
}

KnnDistanceTable knn_distance_table(const EmbeddingModel& model,
                                    std::span<const std::size_t> ks,
                                    std::span<const double> percentiles,
                                    std::span<const WordId> sample,
                                    const GeometryOptions& opts) {
  check_ks(model, ks);
  check_sample(model, sample);
  if (percentiles.empty()) throw std::invalid_argument("empty percentile list");
  for (std::size_t i = 0; i < percentiles.size(); ++i) {
    if (!(percentiles[i] > 0.0 && percentiles[i] < 100.0)) {
      throw std::invalid_argument("percentiles must lie in (0, 100)");
    }
    if (i > 0 && percentiles[i] <= percentiles[i - 1]) {
      throw std::invalid_argument("percentiles must be strictly ascending");
    }
  }

  const std::vector<double> dists =
      kth_distances(model, ks, sample, opts.workers);

  KnnDistanceTable table;
  table.ks.assign(ks.begin(), ks.end());
  table.percentiles.assign(percentiles.begin(), percentiles.end());
  table.sample_size = sample.size();
  table.cells.resize(ks.size() * percentiles.size());

  std::vector<double> column(sample.size());
  for (std::size_t k = 0; k < ks.size(); ++k) {
    for (std::size_t i = 0; i < sample.size(); ++i) {
      column[i] = dists[i * ks.size() + k];
    }
    std::sort(column.begin(), column.end());
    for (std::size_t p = 0; p < percentiles.size(); ++p) {
      table.cells[k * percentiles.size() + p] =
          stats::percentile_sorted(column, percentiles[p]);
    }
  }
  return table;
}

stats::Histogram knn_distance_histogram(const EmbeddingModel& model,
                                        std::size_t k, std::size_t bins,
                                        std::span<const WordId> sample,
                                        const GeometryOptions& opts) {
  const std::size_t ks[] = {k};
  check_ks(model, ks);
  check_sample(model, sample);
  if (bins == 0) throw std::invalid_argument("bins must be >= 1");

  std::vector<double> dists = kth_distances(model, ks, sample, opts.workers);
  auto [lo_it, hi_it] = std::minmax_element(dists.begin(), dists.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi == lo) hi = lo + 1.0;  // all-equal sample still partitions
  return stats::fixed_width_histogram(dists, lo, hi, bins);
}

std::vector<WordId> sample_word_ids(const EmbeddingModel& model,
                                    std::size_t count, std::uint64_t seed) {
  const std::size_t n = model.size();
  std::vector<WordId> pool(n);
  std::iota(pool.begin(), pool.end(), WordId{0});
  if (count >= n) return pool;

  // Partial Fisher-Yates; the double-based index draw has bias < 2^-21 for
  // any vocabulary that fits in memory, far below sampling noise. The stream
  // id is a reserved constant ("sample") so small sequential task ids used
  // elsewhere under the same seed never alias this stream.
  RandomStream stream(seed, 0x73616d706c65ULL);
  for (std::size_t i = 0; i < count; ++i) {
    const auto span = static_cast<double>(n - i);
    auto j = i + static_cast<std::size_t>(stream.uniform() * span);
    if (j >= n) j = n - 1;
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<std::string> intersect_vocabulary(const EmbeddingModel& a,
                                              const EmbeddingModel& b) {
  std::vector<std::string> shared;
  for (WordId id = 0; id < a.size(); ++id) {
    const std::string& w = a.word_of(id);
    if (b.lookup(w)) shared.push_back(w);
  }
  return shared;
}

void write_knn_table_csv(std::ostream& out, const KnnDistanceTable& table) {
  out << 'k';
  for (double p : table.percentiles) out << ",p" << format_double(p);
  out << '\n';
  for (std::size_t k = 0; k < table.ks.size(); ++k) {
    out << table.ks[k];
    for (std::size_t p = 0; p < table.percentiles.size(); ++p) {
      out << ',' << format_double(table.at(k, p));
    }
    out << '\n';
  }
}

}  // namespace dchi
