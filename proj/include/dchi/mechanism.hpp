#ifndef DCHI_MECHANISM_HPP
#define DCHI_MECHANISM_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dchi/embedding.hpp"
#include "dchi/noise.hpp"
#include "dchi/rng.hpp"

namespace dchi {

enum class OovPolicy { kPassthrough, kDrop, kError };

struct MechanismConfig {
  double epsilon = 0.0;  // > 0
  OovPolicy oov_policy = OovPolicy::kPassthrough;
  bool record_trace = false;

  void validate() const;
};

// Per-word trace of one mechanism invocation.
struct PerturbationRecord {
  std::string input_word;
  std::string output_word;  // empty when the token was dropped
  double noise_norm = 0.0;
  bool changed = false;  // input_word != output_word
  std::size_t position = 0;
};

// Applies the single-word mechanism: add noise drawn from
// p_N(z) ~ exp(-epsilon ||z||) to the word's embedding, then project to the
// nearest vocabulary word. Holds scratch buffers, so instances are cheap to
// call in a loop but must not be shared across threads; copy one per worker.
class WordPerturber {
 public:
  // noise_scale != 1 is fault injection for audit validation; it breaks the
  // privacy claim on purpose.
  WordPerturber(const EmbeddingModel& model, double epsilon,
                double noise_scale = 1.0);

  // Core loop: in-vocabulary id in, perturbed id out.
  WordId perturb(RandomStream& stream, WordId input);

  // Norm of the noise vector actually added in the last perturb() call.
  double last_noise_norm() const { return last_noise_norm_; }

  const EmbeddingModel& model() const { return *model_; }
  double epsilon() const { return cfg_.epsilon; }

 private:
  const EmbeddingModel* model_;
  NoiseConfig cfg_;
  double noise_scale_;
  double last_noise_norm_ = 0.0;
  std::vector<double> noise_buf_;
  std::vector<double> query_buf_;
};

// Single word, by token. Throws WordNotFoundError on OOV (policy is applied
// one level up, in perturb_string).
std::pair<std::string, PerturbationRecord> perturb_word(
    const EmbeddingModel& model, const MechanismConfig& cfg,
    RandomStream& stream, std::string_view word);

struct StringPerturbation {
  std::vector<std::string> tokens;
  std::vector<PerturbationRecord> records;  // filled when cfg.record_trace
  std::size_t oov_count = 0;
};

// One independent noise draw per position (repeated words included); position
// j draws from stream.substream(j), so results do not depend on processing
// order. OOV tokens follow cfg.oov_policy.
StringPerturbation perturb_string(const EmbeddingModel& model,
                                  const MechanismConfig& cfg,
                                  const RandomStream& stream,
                                  std::span<const std::string> tokens);

// Unicode-whitespace split / single-space join.
std::vector<std::string> tokenize(std::string_view text);
std::string detokenize(std::span<const std::string> tokens);

}  // namespace dchi

#endif  // DCHI_MECHANISM_HPP
