#ifndef DCHI_CALIBRATION_HPP
#define DCHI_CALIBRATION_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dchi/embedding.hpp"
#include "dchi/rng.hpp"
#include "dchi/stats.hpp"

namespace dchi {

// Plausible-deniability statistics for one (word, epsilon) pair, estimated
// from `runs` mechanism invocations. unchanged_count / runs estimates the
// probability the word survives unchanged; distinct_outputs estimates the
// effective output support.
struct DeniabilityStats {
  std::string word;
  double epsilon = 0.0;
  std::uint32_t runs = 0;
  std::uint32_t unchanged_count = 0;
  std::uint32_t distinct_outputs = 0;
  // Smallest output set covering >= 1-eta of the empirical mass; present
  // when an eta was supplied.
  std::optional<std::uint32_t> eta_support;
};

struct EntropyProxies {
  double h0 = 0.0;     // ln(distinct_outputs), nats
  double h_inf = 0.0;  // ln(runs / unchanged_count), nats
  // True when unchanged_count was 0 and the estimate was clamped to
  // ln(runs) instead of diverging.
  bool h_inf_clamped = false;
};

EntropyProxies entropy_proxies(const DeniabilityStats& stats);

// Runs the mechanism `runs` times on `word`, drawing sequentially from
// `stream` (so a longer run shares its sample prefix with a shorter one).
DeniabilityStats estimate_stats(const EmbeddingModel& model, double epsilon,
                                std::string_view word, std::uint32_t runs,
                                RandomStream& stream,
                                std::optional<double> eta = 0.01);

struct SweepOptions {
  std::uint32_t runs = 1000;
  std::optional<double> eta = 0.01;
  std::size_t workers = 1;
};

struct SweepResult {
  std::vector<double> epsilons;
  std::vector<std::string> words;  // in-vocabulary words actually swept
  std::vector<std::string> skipped_words;
  // stats[e * words.size() + w] holds (epsilons[e], words[w]).
  std::vector<DeniabilityStats> stats;
  std::uint32_t runs = 0;
  std::optional<double> eta;
  std::uint64_t seed = 0;

  const DeniabilityStats& at(std::size_t eps_idx, std::size_t word_idx) const;
};

// One stats record per (word, epsilon); tasks are keyed by (epsilon index,
// word index) so the result is identical for any worker count or schedule.
// Words not in the vocabulary are skipped and reported in skipped_words.
SweepResult sweep(const EmbeddingModel& model, std::span<const double> epsilons,
                  std::span<const std::string> words, std::uint64_t seed,
                  const SweepOptions& opts = {});

struct EpsilonSummary {
  double epsilon = 0.0;
  std::uint32_t min_distinct_outputs = 0;
  std::uint32_t max_unchanged_count = 0;
  stats::Histogram unchanged_hist;  // counts out of `runs`
  stats::Histogram distinct_hist;
};

struct WorstCaseSummary {
  std::vector<EpsilonSummary> per_epsilon;
  std::size_t sample_size = 0;
  std::uint32_t runs = 0;
};

// Exact min/max over the sampled words per grid point, with fixed-width
// histograms of the raw counts (bin edges included in the output).
WorstCaseSummary worst_case_summary(const SweepResult& sweep,
                                    std::size_t bins = 20);

// Columns: word,epsilon,runs,unchanged_count,distinct_outputs,eta_support,h0,h_inf
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);

nlohmann::json sweep_to_json(const SweepResult& sweep,
                             const WorstCaseSummary& summary);

void write_summary_text(std::ostream& out, const WorstCaseSummary& summary);

}  // namespace dchi

#endif  // DCHI_CALIBRATION_HPP
