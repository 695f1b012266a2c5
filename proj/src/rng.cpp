#include "dchi/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace dchi {

void RandomStream::normal_pair(double& z0, double& z1) {
  double x, y, s;
  do {
    x = 2.0 * uniform() - 1.0;
    y = 2.0 * uniform() - 1.0;
    s = x * x + y * y;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  z0 = x * f;
  z1 = y * f;
}

double RandomStream::normal() {
  double z0, z1;
  normal_pair(z0, z1);
  return z0;
}

void RandomStream::fill_normal(std::span<double> out) {
  std::size_t i = 0;
  for (; i + 1 < out.size(); i += 2) {
    normal_pair(out[i], out[i + 1]);
  }
  if (i < out.size()) {
    out[i] = normal();
  }
}

double RandomStream::gamma(double shape, double scale) {
  if (!(shape >= 1.0)) {
    throw std::invalid_argument("gamma: shape must be >= 1");
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) {
      return d * v * scale;
    }
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return d * v * scale;
    }
  }
}

}  // namespace dchi
