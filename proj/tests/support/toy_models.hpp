#ifndef DCHI_TESTS_SUPPORT_TOY_MODELS_HPP
#define DCHI_TESTS_SUPPORT_TOY_MODELS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dchi/embedding.hpp"
#include "dchi/rng.hpp"

namespace dchi::testing {

// a(1,0) b(0,1) c(1,1): every distance hand-checkable.
inline EmbeddingModel make_triangle3() {
  return EmbeddingModel({"a", "b", "c"}, {1, 0, 0, 1, 1, 1}, 2, "triangle3");
}

// Five words spanning a unit square plus an outlier; the composition and
// full-support workhorse.
inline EmbeddingModel make_toy5() {
  return EmbeddingModel({"alpha", "beta", "gamma", "delta", "omega"},
                        {0, 0, 1, 0, 0, 1, 1, 1, 2, 2}, 2, "toy5");
}

// Eight words with all pairwise distances inside [0.5, 5]; the audit model.
inline EmbeddingModel make_audit8() {
  return EmbeddingModel(
      {"north", "south", "east", "west", "up", "down", "left", "right"},
      {0.0, 0.0,  //
       0.6, 0.0,  //
       0.0, 0.7,  //
       1.2, 0.5,  //
       2.0, 1.0,  //
       2.5, 0.2,  //
       1.0, 2.0,  //
       3.0, 2.0},
      2, "audit8");
}

// Two words on the x-axis at distance d; its Voronoi boundary is the
// perpendicular bisector, so retention probabilities have a 1-D integral
// oracle.
inline EmbeddingModel make_pair2(double d) {
  return EmbeddingModel({"a", "b"},
                        {0, 0, static_cast<float>(d), 0}, 2, "pair2");
}

// All vectors identical: the degenerate-geometry corner.
inline EmbeddingModel make_flat4() {
  return EmbeddingModel({"p", "q", "r", "s"},
                        {3, 3, 3, 3, 3, 3, 3, 3}, 2, "flat4");
}

// Gaussian point cloud, deterministic in the seed; word i draws its vector
// from stream id i so the layout is independent of construction order.
inline EmbeddingModel make_random_model(std::size_t count, std::size_t dim,
                                        std::uint64_t seed) {
  std::vector<std::string> words;
  std::vector<float> matrix;
  words.reserve(count);
  matrix.reserve(count * dim);
  std::vector<double> row(dim);
  for (std::size_t i = 0; i < count; ++i) {
    words.push_back("w" + std::to_string(i));
    RandomStream stream(seed, i);
    stream.fill_normal(row);
    for (double v : row) matrix.push_back(static_cast<float>(v));
  }
  return EmbeddingModel(std::move(words), std::move(matrix), dim, "random");
}

}  // namespace dchi::testing

#endif  // DCHI_TESTS_SUPPORT_TOY_MODELS_HPP
