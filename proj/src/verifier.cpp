#include "dchi/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "dchi/errors.hpp"
#include "dchi/mechanism.hpp"
#include "dchi/noise.hpp"
#include "dchi/parallel.hpp"
#include "dchi/stats.hpp"

namespace dchi {
namespace {

constexpr double kHalfNoiseScale = 0.5;

WordId require_word(const EmbeddingModel& model, std::string_view w) {
  auto id = model.lookup(w);
  if (!id) throw WordNotFoundError(std::string(w));
  return *id;
}

double perturber_scale(Mutant mutant) {
  return mutant == Mutant::kHalfNoise ? kHalfNoiseScale : 1.0;
}

std::vector<std::uint64_t> count_outputs(const EmbeddingModel& model,
                                         double epsilon, double noise_scale,
                                         WordId input, std::uint64_t samples,
                                         RandomStream stream) {
  WordPerturber perturber(model, epsilon, noise_scale);
  std::vector<std::uint64_t> counts(model.size(), 0);
  for (std::uint64_t s = 0; s < samples; ++s) {
    ++counts[perturber.perturb(stream, input)];
  }
  return counts;
}

}  // namespace

std::string_view mutant_name(Mutant m) {
  switch (m) {
    case Mutant::kNone:
      return "none";
    case Mutant::kHalfNoise:
      return "half-noise";
    case Mutant::kSharedNoise:
      return "shared-noise";
  }
  return "none";
}

std::optional<Mutant> parse_mutant(std::string_view name) {
  if (name == "none") return Mutant::kNone;
  if (name == "half-noise") return Mutant::kHalfNoise;
  if (name == "shared-noise") return Mutant::kSharedNoise;
  return std::nullopt;
}

void AuditConfig::validate() const {
  if (samples < 10'000) {
    throw std::invalid_argument("audit needs samples >= 10000");
  }
  if (min_count < 20) {
    throw std::invalid_argument("audit needs min_count >= 20");
  }
  if (!(confidence_sigmas > 0.0)) {
    throw std::invalid_argument("confidence_sigmas must be > 0");
  }
  if (!(tv_threshold > 0.0)) {
    throw std::invalid_argument("tv_threshold must be > 0");
  }
}

PairAuditResult audit_pair(const EmbeddingModel& model, double epsilon,
                           std::string_view w, std::string_view w_prime,
                           const AuditConfig& cfg, const RandomStream& stream,
                           Mutant mutant) {
  cfg.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  const WordId id_w = require_word(model, w);
  const WordId id_wp = require_word(model, w_prime);

  const double scale = perturber_scale(mutant);
  const auto counts_w = count_outputs(model, epsilon, scale, id_w, cfg.samples,
                                      stream.substream(0));
  const auto counts_wp = count_outputs(model, epsilon, scale, id_wp,
                                       cfg.samples, stream.substream(1));

  PairAuditResult result;
  result.w = std::string(w);
  result.w_prime = std::string(w_prime);
  result.epsilon = epsilon;
  result.distance = model.distance(id_w, id_wp);
  result.samples = cfg.samples;
  result.worst_slack = -std::numeric_limits<double>::infinity();
  result.passed = true;

  const double bound = epsilon * result.distance;
  for (WordId o = 0; o < model.size(); ++o) {
    if (counts_w[o] < cfg.min_count || counts_wp[o] < cfg.min_count) continue;
    OutputRatio r;
    r.output = o;
    r.count_w = counts_w[o];
    r.count_w_prime = counts_wp[o];
    r.log_ratio = std::log(static_cast<double>(r.count_w) /
                           static_cast<double>(r.count_w_prime));
    r.standard_error = std::sqrt(1.0 / static_cast<double>(r.count_w) +
                                 1.0 / static_cast<double>(r.count_w_prime));
    r.slack = r.log_ratio - bound;
    if (r.slack > cfg.confidence_sigmas * r.standard_error) {
      result.passed = false;
    }
    if (r.slack > result.worst_slack) {
      result.worst_slack = r.slack;
      result.worst_slack_se = r.standard_error;
    }
    result.admitted.push_back(r);
  }
  if (result.admitted.empty()) {
    // Nothing observable to test; report a vacuous pass with zero slack.
    result.worst_slack = 0.0;
  }
  return result;
}

CompositionResult audit_composition(const EmbeddingModel& model,
                                    double epsilon, std::string_view w_a,
                                    std::string_view w_b,
                                    const AuditConfig& cfg,
                                    const RandomStream& stream,
                                    Mutant mutant) {
  cfg.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  const WordId id_a = require_word(model, w_a);
  const WordId id_b = require_word(model, w_b);
  const std::size_t m = model.size();
  const double scale = perturber_scale(mutant);
  const bool shared = mutant == Mutant::kSharedNoise;

  // Joint run: one two-word mechanism invocation per sample.
  std::vector<std::uint64_t> joint(m * m, 0);
  {
    NoiseConfig noise_cfg{epsilon, model.dim()};
    RandomStream s0 = stream.substream(0);
    RandomStream s1 = stream.substream(1);
    std::vector<double> n0(model.dim()), n1(model.dim()),
        query(model.dim());
    auto project = [&](WordId input, const std::vector<double>& noise) {
      const auto row = model.row(input);
      for (std::size_t i = 0; i < query.size(); ++i) {
        query[i] = static_cast<double>(row[i]) + scale * noise[i];
      }
      return model.nearest(query).id;
    };
    for (std::uint64_t s = 0; s < cfg.samples; ++s) {
      sample_noise_into(s0, noise_cfg, n0);
      if (!shared) sample_noise_into(s1, noise_cfg, n1);
      const WordId out_a = project(id_a, n0);
      const WordId out_b = project(id_b, shared ? n0 : n1);
      ++joint[out_a * m + out_b];
    }
  }

  // Marginals come from separate runs so the product is an independent
  // estimate, not a rearrangement of the joint sample.
  const auto marg_a = count_outputs(model, epsilon, scale, id_a, cfg.samples,
                                    stream.substream(2));
  const auto marg_b = count_outputs(model, epsilon, scale, id_b, cfg.samples,
                                    stream.substream(3));

  const double n = static_cast<double>(cfg.samples);
  double tv = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      const double p_joint = static_cast<double>(joint[a * m + b]) / n;
      const double p_prod = (static_cast<double>(marg_a[a]) / n) *
                            (static_cast<double>(marg_b[b]) / n);
      tv += std::abs(p_joint - p_prod);
    }
  }
  tv *= 0.5;

  CompositionResult result;
  result.w_a = std::string(w_a);
  result.w_b = std::string(w_b);
  result.epsilon = epsilon;
  result.samples = cfg.samples;
  result.tv = tv;
  result.threshold = cfg.tv_threshold;
  result.passed = tv <= cfg.tv_threshold;
  return result;
}

std::vector<double> exhaustive_distribution(const EmbeddingModel& model,
                                            double epsilon,
                                            std::string_view w,
                                            std::uint64_t samples,
                                            RandomStream& stream) {
  if (samples == 0) throw std::invalid_argument("samples must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  const WordId id = require_word(model, w);
  WordPerturber perturber(model, epsilon);
  std::vector<std::uint64_t> counts(model.size(), 0);
  for (std::uint64_t s = 0; s < samples; ++s) {
    ++counts[perturber.perturb(stream, id)];
  }
  std::vector<double> freq(model.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    freq[i] = static_cast<double>(counts[i]) / static_cast<double>(samples);
  }
  return freq;
}

FullAuditReport run_full_audit(
    const EmbeddingModel& model, double epsilon, const AuditConfig& cfg,
    std::uint64_t seed,
    std::optional<std::pair<std::string, std::string>> composition_input,
    Mutant mutant, std::size_t workers) {
  cfg.validate();
  const std::size_t m = model.size();
  if (m < 2) throw Error("audit needs at least two vocabulary words");

  FullAuditReport report;
  report.epsilon = epsilon;
  report.seed = seed;
  report.mutant = mutant;

  std::vector<std::pair<WordId, WordId>> pairs;
  pairs.reserve(m * (m - 1));
  for (WordId i = 0; i < m; ++i) {
    for (WordId j = 0; j < m; ++j) {
      if (i != j) pairs.emplace_back(i, j);
    }
  }
  report.pairs.resize(pairs.size());

  parallel_chunks(pairs.size(), workers, [&](std::size_t begin,
                                             std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const auto [i, j] = pairs[t];
      // Stream id is the (i, j) cell index, not t, so the assignment does
      // not depend on how self-pairs were skipped.
      RandomStream stream(seed, static_cast<std::uint64_t>(i) * m + j);
      report.pairs[t] = audit_pair(model, epsilon, model.word_of(i),
                                   model.word_of(j), cfg, stream, mutant);
    }
  });

  std::string comp_a = composition_input ? composition_input->first
                                         : model.word_of(0);
  std::string comp_b = composition_input ? composition_input->second
                                         : model.word_of(1);
  RandomStream comp_stream(seed, static_cast<std::uint64_t>(m) * m);
  report.composition = audit_composition(model, epsilon, comp_a, comp_b, cfg,
                                         comp_stream, mutant);

  report.passed = report.composition->passed;
  for (const auto& p : report.pairs) {
    if (!p.passed) report.passed = false;
  }
  return report;
}

nlohmann::json pair_audit_to_json(const PairAuditResult& result) {
  nlohmann::json outputs = nlohmann::json::array();
  for (const OutputRatio& r : result.admitted) {
    outputs.push_back({{"output", r.output},
                       {"count_w", r.count_w},
                       {"count_w_prime", r.count_w_prime},
                       {"log_ratio", r.log_ratio},
                       {"standard_error", r.standard_error},
                       {"slack", r.slack}});
  }
  return {{"w", result.w},
          {"w_prime", result.w_prime},
          {"epsilon", result.epsilon},
          {"distance", result.distance},
          {"samples", result.samples},
          {"admitted_outputs", std::move(outputs)},
          {"worst_slack", result.worst_slack},
          {"worst_slack_se", result.worst_slack_se},
          {"passed", result.passed}};
}

nlohmann::json composition_to_json(const CompositionResult& result) {
  return {{"w_a", result.w_a},
          {"w_b", result.w_b},
          {"epsilon", result.epsilon},
          {"samples", result.samples},
          {"tv", result.tv},
          {"threshold", result.threshold},
          {"passed", result.passed}};
}

nlohmann::json report_to_json(const FullAuditReport& report) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const PairAuditResult& p : report.pairs) {
    pairs.push_back(pair_audit_to_json(p));
  }
  nlohmann::json j;
  j["epsilon"] = report.epsilon;
  j["seed"] = report.seed;
  j["mutant"] = std::string(mutant_name(report.mutant));
  j["pairs"] = std::move(pairs);
  if (report.composition) {
    j["composition"] = composition_to_json(*report.composition);
  }
  j["verdict"] = report.passed ? "pass" : "fail";
  return j;
}

}  // namespace dchi
