#ifndef DCHI_NOISE_HPP
#define DCHI_NOISE_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "dchi/rng.hpp"

namespace dchi {

// Privacy parameter and ambient dimension for the noise density
// p_N(z) proportional to exp(-epsilon * ||z||).
struct NoiseConfig {
  double epsilon = 0.0;  // > 0, units of inverse embedding distance
  std::size_t dim = 0;   // >= 1

  void validate() const;
};

struct NoiseSample {
  std::vector<double> direction;  // unit vector
  double magnitude = 0.0;         // > 0
  std::vector<double> vector;     // magnitude * direction
};

// Isotropic unit vector: n iid standard normals, normalized to the unit
// sphere. The all-zero draw (probability zero in theory) is re-drawn.
std::vector<double> sample_direction(RandomStream& stream, std::size_t n);

// Noise radius: Gamma(shape = dim, scale = 1/epsilon). Mean dim/epsilon,
// variance dim/epsilon^2.
double sample_magnitude(RandomStream& stream, const NoiseConfig& cfg);

// One draw from p_N: direction first, then magnitude. The radial law of
// ||vector|| is exactly the magnitude distribution above.
NoiseSample sample_noise(RandomStream& stream, const NoiseConfig& cfg);

// Allocation-free variant for hot loops: writes the noise vector into `out`
// (size cfg.dim) and returns its magnitude.
double sample_noise_into(RandomStream& stream, const NoiseConfig& cfg,
                         std::span<double> out);

}  // namespace dchi

#endif  // DCHI_NOISE_HPP
