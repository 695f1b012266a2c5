#include "dchi/mechanism.hpp"

#include <cmath>
#include <stdexcept>

#include "dchi/errors.hpp"

namespace dchi {

void MechanismConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be positive and finite");
  }
}

WordPerturber::WordPerturber(const EmbeddingModel& model, double epsilon,
                             double noise_scale)
    : model_(&model),
      cfg_{epsilon, model.dim()},
      noise_scale_(noise_scale),
      noise_buf_(model.dim()),
      query_buf_(model.dim()) {
  cfg_.validate();
  if (!(noise_scale_ > 0.0)) {
    throw std::invalid_argument("noise_scale must be positive");
  }
}

WordId WordPerturber::perturb(RandomStream& stream, WordId input) {
  const auto row = model_->row(input);
  double norm = sample_noise_into(stream, cfg_, noise_buf_);
  if (noise_scale_ != 1.0) {
    norm *= noise_scale_;
    for (double& v : noise_buf_) v *= noise_scale_;
  }
  for (std::size_t i = 0; i < query_buf_.size(); ++i) {
    query_buf_[i] = static_cast<double>(row[i]) + noise_buf_[i];
  }
  last_noise_norm_ = norm;
  return model_->nearest(query_buf_).id;
}

std::pair<std::string, PerturbationRecord> perturb_word(
    const EmbeddingModel& model, const MechanismConfig& cfg,
    RandomStream& stream, std::string_view word) {
  cfg.validate();
  auto id = model.lookup(word);
  if (!id) throw WordNotFoundError(std::string(word));
  WordPerturber perturber(model, cfg.epsilon);
  const WordId out = perturber.perturb(stream, *id);
  PerturbationRecord rec;
  rec.input_word = std::string(word);
  rec.output_word = model.word_of(out);
  rec.noise_norm = perturber.last_noise_norm();
  rec.changed = rec.input_word != rec.output_word;
  rec.position = 0;
  return {rec.output_word, std::move(rec)};
}

StringPerturbation perturb_string(const EmbeddingModel& model,
                                  const MechanismConfig& cfg,
                                  const RandomStream& stream,
                                  std::span<const std::string> tokens) {
  cfg.validate();
  StringPerturbation result;
  result.tokens.reserve(tokens.size());
  if (cfg.record_trace) result.records.reserve(tokens.size());
  WordPerturber perturber(model, cfg.epsilon);

  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    const std::string& word = tokens[pos];
    const auto id = model.lookup(word);
    PerturbationRecord rec;
    rec.input_word = word;
    rec.position = pos;
    if (!id) {
      ++result.oov_count;
      switch (cfg.oov_policy) {
        case OovPolicy::kError:
          throw OovError(word, pos);
        case OovPolicy::kDrop:
          rec.output_word.clear();
          rec.changed = true;
          if (cfg.record_trace) result.records.push_back(std::move(rec));
          continue;
        case OovPolicy::kPassthrough:
          rec.output_word = word;
          rec.changed = false;
          result.tokens.push_back(word);
          if (cfg.record_trace) result.records.push_back(std::move(rec));
          continue;
      }
    }
    RandomStream sub = stream.substream(pos);
    const WordId out = perturber.perturb(sub, *id);
    rec.output_word = model.word_of(out);
    rec.noise_norm = perturber.last_noise_norm();
    rec.changed = rec.input_word != rec.output_word;
    result.tokens.push_back(rec.output_word);
    if (cfg.record_trace) result.records.push_back(std::move(rec));
  }
  return result;
}

namespace {

// Unicode code points with White_Space=Yes.
bool is_unicode_space(char32_t c) {
  switch (c) {
    case 0x0009:
    case 0x000A:
    case 0x000B:
    case 0x000C:
    case 0x000D:
    case 0x0020:
    case 0x0085:
    case 0x00A0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

// Decodes one UTF-8 code point; malformed bytes are treated as opaque
// (non-space) single bytes so arbitrary binary tokens survive a round trip.
char32_t decode_utf8(std::string_view s, std::size_t i, std::size_t& len) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  len = 1;
  if (b0 < 0x80) return b0;
  int extra;
  char32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
  } else {
    return 0xFFFD;
  }
  if (i + static_cast<std::size_t>(extra) >= s.size()) return 0xFFFD;
  for (int k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return 0xFFFD;
    cp = (cp << 6) | (b & 0x3F);
  }
  len = 1 + static_cast<std::size_t>(extra);
  return cp;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = 1;
    const char32_t cp = decode_utf8(text, i, len);
    if (is_unicode_space(cp)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.append(text.substr(i, len));
    }
    i += len;
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace dchi
