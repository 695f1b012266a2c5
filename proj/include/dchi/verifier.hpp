#ifndef DCHI_VERIFIER_HPP
#define DCHI_VERIFIER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dchi/embedding.hpp"
#include "dchi/rng.hpp"

namespace dchi {

// Deliberate mechanism defects used to prove the audits can fail:
// kHalfNoise scales every noise vector by 0.5 (equivalent to doubling the
// true epsilon while still claiming the configured one), kSharedNoise reuses
// one noise draw for both positions of a two-word input.
enum class Mutant { kNone, kHalfNoise, kSharedNoise };

std::string_view mutant_name(Mutant m);
std::optional<Mutant> parse_mutant(std::string_view name);

struct AuditConfig {
  std::uint64_t samples = 1'000'000;  // >= 10^4 draws per input word
  std::uint32_t min_count = 100;      // >= 20; ratio admission threshold
  double confidence_sigmas = 3.0;
  double tv_threshold = 0.01;  // composition pass bound

  void validate() const;
};

struct OutputRatio {
  WordId output = 0;
  std::uint64_t count_w = 0;
  std::uint64_t count_w_prime = 0;
  double log_ratio = 0.0;       // log(p_hat_w / p_hat_w')
  double standard_error = 0.0;  // delta method: sqrt(1/c_w + 1/c_w')
  double slack = 0.0;           // log_ratio - epsilon * d
};

struct PairAuditResult {
  std::string w;
  std::string w_prime;
  double epsilon = 0.0;
  double distance = 0.0;
  std::uint64_t samples = 0;
  // Outputs seen >= min_count times under both inputs; rarer outputs make
  // the ratio estimator unbounded, so the bound is untestable there.
  std::vector<OutputRatio> admitted;
  double worst_slack = 0.0;
  double worst_slack_se = 0.0;  // SE of the worst-slack output
  bool passed = false;  // every admitted slack <= confidence_sigmas * its SE
};

struct CompositionResult {
  std::string w_a;
  std::string w_b;
  double epsilon = 0.0;
  std::uint64_t samples = 0;
  double tv = 0.0;  // joint vs product of independently estimated marginals
  double threshold = 0.0;
  bool passed = false;
};

// Draws cfg.samples outputs of M for each input and checks the ratio bound
// log(Pr[M(w)=o] / Pr[M(w')=o]) <= epsilon * d(w, w') on every admitted
// output, with a confidence_sigmas * SE statistical band. Streams: w uses
// stream.substream(0), w' uses substream(1).
PairAuditResult audit_pair(const EmbeddingModel& model, double epsilon,
                           std::string_view w, std::string_view w_prime,
                           const AuditConfig& cfg, const RandomStream& stream,
                           Mutant mutant = Mutant::kNone);

// Estimates TV distance between the joint output distribution of the
// two-word input (w_a, w_b) and the product of marginals measured in
// separate runs. Independence of positions makes the true TV zero.
CompositionResult audit_composition(const EmbeddingModel& model,
                                    double epsilon, std::string_view w_a,
                                    std::string_view w_b,
                                    const AuditConfig& cfg,
                                    const RandomStream& stream,
                                    Mutant mutant = Mutant::kNone);

// Empirical output distribution of M(w): frequency per word id, summing
// to 1. Draws sequentially from `stream`.
std::vector<double> exhaustive_distribution(const EmbeddingModel& model,
                                            double epsilon,
                                            std::string_view w,
                                            std::uint64_t samples,
                                            RandomStream& stream);

struct FullAuditReport {
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  Mutant mutant = Mutant::kNone;
  std::vector<PairAuditResult> pairs;  // all ordered pairs, (i, j) row-major
  std::optional<CompositionResult> composition;
  bool passed = false;
};

// Audits every ordered word pair plus one composition check (the first two
// vocabulary words unless composition_input overrides). Pair (i, j) draws
// from stream id i*|W|+j of `seed`, so results are worker-count invariant.
FullAuditReport run_full_audit(
    const EmbeddingModel& model, double epsilon, const AuditConfig& cfg,
    std::uint64_t seed,
    std::optional<std::pair<std::string, std::string>> composition_input = {},
    Mutant mutant = Mutant::kNone, std::size_t workers = 1);

nlohmann::json pair_audit_to_json(const PairAuditResult& result);
nlohmann::json composition_to_json(const CompositionResult& result);
nlohmann::json report_to_json(const FullAuditReport& report);

}  // namespace dchi

#endif  // DCHI_VERIFIER_HPP
