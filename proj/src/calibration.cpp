#include "dchi/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include <json.hpp>

#include "dchi/errors.hpp"
#include "dchi/format.hpp"
#include "dchi/mechanism.hpp"
#include "dchi/parallel.hpp"

namespace dchi {
namespace {

void check_eta(std::optional<double> eta) {
  if (eta && (*eta < 0.0 || *eta >= 1.0 || !std::isfinite(*eta))) {
    throw std::invalid_argument("eta must lie in [0, 1)");
  }
}

}  // namespace

EntropyProxies entropy_proxies(const DeniabilityStats& stats) {
  if (stats.runs == 0 || stats.distinct_outputs == 0) {
    throw std::invalid_argument("entropy proxies need at least one run");
  }
  EntropyProxies p;
  p.h0 = std::log(static_cast<double>(stats.distinct_outputs));
  if (stats.unchanged_count == 0) {
    // The plug-in estimate of -ln Pr[unchanged] diverges; report the
    // resolution limit of the experiment instead.
    p.h_inf = std::log(static_cast<double>(stats.runs));
    p.h_inf_clamped = true;
  } else {
    p.h_inf = std::log(static_cast<double>(stats.runs) /
                       static_cast<double>(stats.unchanged_count));
  }
  return p;
}

DeniabilityStats estimate_stats(const EmbeddingModel& model, double epsilon,
                                std::string_view word, std::uint32_t runs,
                                RandomStream& stream,
                                std::optional<double> eta) {
  if (runs == 0) throw std::invalid_argument("runs must be >= 1");
  check_eta(eta);
  auto id = model.lookup(word);
  if (!id) throw WordNotFoundError(std::string(word));

  DeniabilityStats out;
  out.word = std::string(word);
  out.epsilon = epsilon;
  out.runs = runs;

  WordPerturber perturber(model, epsilon);
  std::unordered_map<WordId, std::uint32_t> counts;
  for (std::uint32_t r = 0; r < runs; ++r) {
    WordId got = perturber.perturb(stream, *id);
    ++counts[got];
    if (got == *id) ++out.unchanged_count;
  }
  out.distinct_outputs = static_cast<std::uint32_t>(counts.size());

  if (eta) {
    // Smallest output set holding >= (1 - eta) of the empirical mass; ties
    // between equal counts break toward the smaller word id so the result
    // does not depend on hash-map iteration order.
    std::vector<std::pair<WordId, std::uint32_t>> ranked(counts.begin(),
                                                         counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    const double needed = (1.0 - *eta) * static_cast<double>(runs) - 1e-6;
    std::uint64_t covered = 0;
    std::uint32_t support = 0;
    for (const auto& [w, c] : ranked) {
      if (static_cast<double>(covered) >= needed) break;
      covered += c;
      ++support;
    }
    out.eta_support = support;
  }
  return out;
}

const DeniabilityStats& SweepResult::at(std::size_t eps_idx,
                                        std::size_t word_idx) const {
  return stats.at(eps_idx * words.size() + word_idx);
}

SweepResult sweep(const EmbeddingModel& model, std::span<const double> epsilons,
                  std::span<const std::string> words, std::uint64_t seed,
                  const SweepOptions& opts) {
  if (epsilons.empty()) throw std::invalid_argument("epsilon grid is empty");
  if (opts.runs == 0) throw std::invalid_argument("runs must be >= 1");
  check_eta(opts.eta);
  for (double e : epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      throw std::invalid_argument("epsilons must be positive and finite");
    }
  }

  SweepResult result;
  result.epsilons.assign(epsilons.begin(), epsilons.end());
  result.runs = opts.runs;
  result.eta = opts.eta;
  result.seed = seed;
  for (const auto& w : words) {
    if (model.lookup(w)) {
      result.words.push_back(w);
    } else {
      result.skipped_words.push_back(w);
    }
  }
  if (result.words.empty()) {
    throw Error("no in-vocabulary words to calibrate");
  }

  const std::size_t n_eps = result.epsilons.size();
  const std::size_t n_words = result.words.size();
  result.stats.resize(n_eps * n_words);

  // Task t = (epsilon index, word index) owns stream id t, so the estimate
  // for a given grid cell is the same for any worker count.
  parallel_chunks(n_eps * n_words, opts.workers,
                  [&](std::size_t begin, std::size_t end) {
                    for (std::size_t t = begin; t < end; ++t) {
                      const std::size_t e = t / n_words;
                      const std::size_t w = t % n_words;
                      RandomStream stream(seed, t);
                      result.stats[t] =
                          estimate_stats(model, result.epsilons[e],
                                         result.words[w], opts.runs, stream,
                                         opts.eta);
                    }
                  });
  return result;
}

WorstCaseSummary worst_case_summary(const SweepResult& sweep,
                                    std::size_t bins) {
  if (sweep.stats.empty()) throw std::invalid_argument("empty sweep");
  if (bins == 0) throw std::invalid_argument("bins must be >= 1");

  WorstCaseSummary summary;
  summary.sample_size = sweep.words.size();
  summary.runs = sweep.runs;

  const std::size_t n_words = sweep.words.size();
  for (std::size_t e = 0; e < sweep.epsilons.size(); ++e) {
    EpsilonSummary s;
    s.epsilon = sweep.epsilons[e];
    s.min_distinct_outputs = sweep.runs + 1;
    std::vector<double> unchanged, distinct;
    unchanged.reserve(n_words);
    distinct.reserve(n_words);
    for (std::size_t w = 0; w < n_words; ++w) {
      const DeniabilityStats& cell = sweep.at(e, w);
      s.min_distinct_outputs =
          std::min(s.min_distinct_outputs, cell.distinct_outputs);
      s.max_unchanged_count =
          std::max(s.max_unchanged_count, cell.unchanged_count);
      unchanged.push_back(static_cast<double>(cell.unchanged_count));
      distinct.push_back(static_cast<double>(cell.distinct_outputs));
    }
    const double hi = static_cast<double>(sweep.runs);
    s.unchanged_hist = stats::fixed_width_histogram(unchanged, 0.0, hi, bins);
    s.distinct_hist = stats::fixed_width_histogram(distinct, 0.0, hi, bins);
    summary.per_epsilon.push_back(std::move(s));
  }
  return summary;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "word,epsilon,runs,unchanged_count,distinct_outputs,eta_support,h0,"
         "h_inf\n";
  for (std::size_t e = 0; e < sweep.epsilons.size(); ++e) {
    for (std::size_t w = 0; w < sweep.words.size(); ++w) {
      const DeniabilityStats& cell = sweep.at(e, w);
      EntropyProxies proxies = entropy_proxies(cell);
      out << csv_escape(cell.word) << ',' << format_double(cell.epsilon) << ','
          << cell.runs << ',' << cell.unchanged_count << ','
          << cell.distinct_outputs << ',';
      if (cell.eta_support) out << *cell.eta_support;
      out << ',' << format_double(proxies.h0) << ','
          << format_double(proxies.h_inf) << '\n';
    }
  }
}

namespace {

nlohmann::json histogram_to_json(const stats::Histogram& h) {
  return {{"edges", h.edges}, {"counts", h.counts}};
}

}  // namespace

nlohmann::json sweep_to_json(const SweepResult& sweep,
                             const WorstCaseSummary& summary) {
  nlohmann::json j;
  j["runs"] = sweep.runs;
  j["seed"] = sweep.seed;
  j["epsilons"] = sweep.epsilons;
  j["words"] = sweep.words;
  j["skipped_words"] = sweep.skipped_words;
  if (sweep.eta) {
    j["eta"] = *sweep.eta;
  } else {
    j["eta"] = nullptr;
  }
  j["note"] =
      "support and entropy figures are plug-in estimates from a finite "
      "number of runs; they understate the true output support";

  nlohmann::json records = nlohmann::json::array();
  for (std::size_t e = 0; e < sweep.epsilons.size(); ++e) {
    for (std::size_t w = 0; w < sweep.words.size(); ++w) {
      const DeniabilityStats& cell = sweep.at(e, w);
      EntropyProxies proxies = entropy_proxies(cell);
      nlohmann::json r;
      r["word"] = cell.word;
      r["epsilon"] = cell.epsilon;
      r["runs"] = cell.runs;
      r["unchanged_count"] = cell.unchanged_count;
      r["distinct_outputs"] = cell.distinct_outputs;
      if (cell.eta_support) {
        r["eta_support"] = *cell.eta_support;
      } else {
        r["eta_support"] = nullptr;
      }
      r["h0"] = proxies.h0;
      r["h_inf"] = proxies.h_inf;
      r["h_inf_clamped"] = proxies.h_inf_clamped;
      records.push_back(std::move(r));
    }
  }
  j["records"] = std::move(records);

  nlohmann::json per_eps = nlohmann::json::array();
  for (const EpsilonSummary& s : summary.per_epsilon) {
    nlohmann::json e;
    e["epsilon"] = s.epsilon;
    e["min_distinct_outputs"] = s.min_distinct_outputs;
    e["max_unchanged_count"] = s.max_unchanged_count;
    e["max_unchanged_probability"] =
        static_cast<double>(s.max_unchanged_count) /
        static_cast<double>(summary.runs);
    e["unchanged_histogram"] = histogram_to_json(s.unchanged_hist);
    e["distinct_histogram"] = histogram_to_json(s.distinct_hist);
    per_eps.push_back(std::move(e));
  }
  j["summary"] = {{"sample_size", summary.sample_size},
                  {"per_epsilon", std::move(per_eps)}};
  return j;
}

void write_summary_text(std::ostream& out, const WorstCaseSummary& summary) {
  out << "worst-case plausible deniability over " << summary.sample_size
      << " words, " << summary.runs << " runs each\n";
  out << "epsilon  min_distinct  max_unchanged  max_unchanged_prob\n";
  for (const EpsilonSummary& s : summary.per_epsilon) {
    const double prob = static_cast<double>(s.max_unchanged_count) /
                        static_cast<double>(summary.runs);
    out << format_double(s.epsilon) << "  " << s.min_distinct_outputs << "  "
        << s.max_unchanged_count << "  " << format_double(prob) << '\n';
  }
}

}  // namespace dchi
