#include "dchi/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace dchi {

void NoiseConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("epsilon must be positive and finite");
  }
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
}

namespace {

// Fills out with normals and normalizes in place; returns nothing useful for
// the degenerate zero draw, which the caller re-draws.
bool try_fill_direction(RandomStream& stream, std::span<double> out) {
  stream.fill_normal(out);
  double norm2 = 0.0;
  for (double v : out) norm2 += v * v;
  if (norm2 <= 0.0 || !std::isfinite(norm2)) return false;
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : out) v *= inv;
  return true;
}

}  // namespace

std::vector<double> sample_direction(RandomStream& stream, std::size_t n) {
  if (n < 1) throw std::invalid_argument("dimension must be >= 1");
  std::vector<double> out(n);
  while (!try_fill_direction(stream, out)) {
  }
  return out;
}

double sample_magnitude(RandomStream& stream, const NoiseConfig& cfg) {
  cfg.validate();
  return stream.gamma(static_cast<double>(cfg.dim), 1.0 / cfg.epsilon);
}

NoiseSample sample_noise(RandomStream& stream, const NoiseConfig& cfg) {
  cfg.validate();
  NoiseSample s;
  s.direction = sample_direction(stream, cfg.dim);
  s.magnitude = sample_magnitude(stream, cfg);
  s.vector.resize(cfg.dim);
  for (std::size_t i = 0; i < cfg.dim; ++i) {
    s.vector[i] = s.magnitude * s.direction[i];
  }
  return s;
}

double sample_noise_into(RandomStream& stream, const NoiseConfig& cfg,
                         std::span<double> out) {
  cfg.validate();
  if (out.size() != cfg.dim) {
    throw std::invalid_argument("output span size must equal cfg.dim");
  }
  while (!try_fill_direction(stream, out)) {
  }
  const double magnitude = sample_magnitude(stream, cfg);
  for (double& v : out) v *= magnitude;
  return magnitude;
}

}  // namespace dchi
