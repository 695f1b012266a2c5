#include "dchi/embedding.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "dchi/errors.hpp"
#include "dchi/rng.hpp"
#include "support/oracles.hpp"
#include "support/temp_files.hpp"
#include "support/toy_models.hpp"

using dchi::EmbeddingModel;
using dchi::LoadOptions;
using dchi::WordId;
namespace dt = dchi::testing;

TEST_CASE("constructor validates shape, values, and token uniqueness") {
  CHECK_THROWS_AS(EmbeddingModel({"a"}, {1, 2, 3}, 2, "bad"),
                  dchi::DimensionError);
  CHECK_THROWS_AS(EmbeddingModel({"a"}, {1, 2}, 0, "bad"),
                  dchi::DimensionError);
  CHECK_THROWS_AS(
      EmbeddingModel({"a", "a"}, {1, 2, 3, 4}, 2, "bad"),
      dchi::DuplicateWordError);
  const float inf = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(EmbeddingModel({"a"}, {1, inf}, 2, "bad"), dchi::Error);
}

TEST_CASE("lookup is the inverse of word_of") {
  const auto model = dt::make_audit8();
  REQUIRE(model.size() == 8);
  for (WordId id = 0; id < model.size(); ++id) {
    auto found = model.lookup(model.word_of(id));
    REQUIRE(found.has_value());
    CHECK(*found == id);
  }
  CHECK_FALSE(model.lookup("no-such-token").has_value());
  CHECK_THROWS_AS(model.word_of(8), std::out_of_range);
}

TEST_CASE("vector_of exposes the stored row") {
  const auto model = dt::make_triangle3();
  const auto v = model.vector_of("b");
  REQUIRE(v.has_value());
  REQUIRE(v->size() == 2);
  CHECK((*v)[0] == 0.0f);
  CHECK((*v)[1] == 1.0f);
  CHECK_FALSE(model.vector_of("z").has_value());
}

TEST_CASE("nearest on the triangle model: frozen values") {
  const auto model = dt::make_triangle3();
  const std::vector<double> query{0.9, 0.1};
  const auto hit = model.nearest(query);
  CHECK(hit.id == 0);  // "a"
  CHECK(hit.distance == doctest::Approx(0.1414213562373095).epsilon(1e-12));

  // Zero noise maps every word to itself.
  for (WordId id = 0; id < model.size(); ++id) {
    const auto row = model.row(id);
    const std::vector<double> q(row.begin(), row.end());
    const auto self = model.nearest(q);
    CHECK(self.id == id);
    CHECK(self.distance == 0.0);
  }
}

TEST_CASE("nearest breaks exact ties toward the lowest index") {
  const auto model = dt::make_triangle3();
  // (0.5, 0.5) is equidistant (d^2 = 0.5) from all three words.
  const std::vector<double> query{0.5, 0.5};
  CHECK(model.nearest(query).id == 0);

  const auto flat = dt::make_flat4();
  const std::vector<double> q{0.0, 0.0};
  CHECK(flat.nearest(q).id == 0);
}

TEST_CASE("nearest validates the query") {
  const auto model = dt::make_triangle3();
  CHECK_THROWS_AS(model.nearest(std::vector<double>{1.0}),
                  dchi::DimensionError);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(model.nearest(std::vector<double>{nan, 0.0}),
                  dchi::DimensionError);
}

TEST_CASE("k_nearest on the triangle model: frozen values") {
  const auto model = dt::make_triangle3();
  const auto neighbors = model.k_nearest("a", 2);
  REQUIRE(neighbors.size() == 2);
  CHECK(neighbors[0].id == 2);  // c at distance 1
  CHECK(neighbors[0].distance == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(neighbors[1].id == 1);  // b at distance sqrt(2)
  CHECK(neighbors[1].distance ==
        doctest::Approx(1.4142135623730951).epsilon(1e-12));

  CHECK_THROWS_AS(model.k_nearest("a", 0), std::invalid_argument);
  CHECK_THROWS_AS(model.k_nearest("a", 3), std::invalid_argument);
  CHECK_THROWS_AS(model.k_nearest("zz", 1), dchi::WordNotFoundError);
}

TEST_CASE("k_nearest ranks equal distances by index") {
  const auto flat = dt::make_flat4();
  const auto neighbors = flat.k_nearest(WordId{2}, 3);
  REQUIRE(neighbors.size() == 3);
  CHECK(neighbors[0].id == 0);
  CHECK(neighbors[1].id == 1);
  CHECK(neighbors[2].id == 3);
  for (const auto& n : neighbors) CHECK(n.distance == 0.0);
}

TEST_CASE("nearest and k_nearest agree exactly with the full-scan oracle") {
  const auto model = dt::make_random_model(200, 10, 42);
  dchi::RandomStream stream(7, 0);

  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> query(model.dim());
    stream.fill_normal(query);
    for (double& q : query) q *= 2.0;
    const auto got = model.nearest(query);
    const auto want = dt::nearest_oracle(model, query);
    CHECK(got.id == want.id);
    CHECK(got.distance == want.distance);  // bitwise: same arithmetic order
  }

  for (WordId id : {WordId{0}, WordId{17}, WordId{199}}) {
    for (std::size_t k : {1u, 7u, 50u, 199u}) {
      const auto got = model.k_nearest(id, k);
      const auto want = dt::knn_oracle(model, id, k);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].id == want[i].id);
        CHECK(got[i].distance == want[i].distance);
      }
    }
  }
}

TEST_CASE("distance is symmetric and satisfies the triangle inequality") {
  const auto model = dt::make_random_model(60, 8, 9);
  dchi::RandomStream stream(11, 0);
  for (int rep = 0; rep < 10'000; ++rep) {
    const auto a = static_cast<WordId>(stream.uniform() * 60);
    const auto b = static_cast<WordId>(stream.uniform() * 60);
    const auto c = static_cast<WordId>(stream.uniform() * 60);
    CHECK(model.distance(a, b) == model.distance(b, a));
    CHECK(model.distance(a, c) <=
          model.distance(a, b) + model.distance(b, c) + 1e-9);
  }
}

TEST_CASE("string_distance: frozen values and error cases") {
  const auto model = dt::make_triangle3();
  const std::vector<std::string> ab{"a", "b"};
  const std::vector<std::string> ba{"b", "a"};
  const std::vector<std::string> aa{"a", "a"};

  CHECK(dchi::string_distance(model, ab, ab) == 0.0);
  // d(a,b) + d(b,a) = 2 sqrt(2).
  CHECK(dchi::string_distance(model, ab, ba) ==
        doctest::Approx(2.8284271247461903).epsilon(1e-12));
  CHECK(dchi::string_distance(model, std::vector<std::string>{"a"},
                              std::vector<std::string>{"c"}) ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Positional additivity: sum over positions of per-word distances.
  CHECK(dchi::string_distance(model, ab, aa) ==
        doctest::Approx(model.distance(1, 0)).epsilon(1e-12));

  CHECK_THROWS_AS(
      dchi::string_distance(model, ab, std::vector<std::string>{"a"}),
      std::invalid_argument);
  CHECK_THROWS_AS(dchi::string_distance(model, std::vector<std::string>{"q"},
                                        std::vector<std::string>{"a"}),
                  dchi::WordNotFoundError);
}

TEST_CASE("text loader round-trips a plain file") {
  dt::TempDir dir;
  const auto path = dir.file("toy.vec");
  dt::write_file(path,
                 "alpha 1.5 -2.25 3e-1\n"
                 "beta 0.125 0 -1\n"
                 "\n"  // blank line tolerated
                 "gamma -0.5 1e2 7\n");
  const auto model = dchi::load_text_embeddings(path);
  REQUIRE(model.size() == 3);
  REQUIRE(model.dim() == 3);
  CHECK(model.name() == "toy.vec");
  const auto row = model.row(0);
  CHECK(row[0] == 1.5f);
  CHECK(row[1] == -2.25f);
  CHECK(row[2] == 0.3f);
  CHECK(model.lookup("gamma").value() == 2);
}

TEST_CASE("text loader handles tabs and CRLF") {
  dt::TempDir dir;
  const auto path = dir.file("tabs.vec");
  dt::write_file(path, "one\t1\t2\r\ntwo\t3\t4\r\n");
  const auto model = dchi::load_text_embeddings(path);
  REQUIRE(model.size() == 2);
  CHECK(model.row(1)[1] == 4.0f);
}

TEST_CASE("text loader reports malformed lines with their line number") {
  dt::TempDir dir;

  const auto bad_float = dir.file("bad_float.vec");
  dt::write_file(bad_float, "a 1 2\nb 1 x\n");
  CHECK_THROWS_WITH_AS(dchi::load_text_embeddings(bad_float),
                       doctest::Contains("line 2"), dchi::ParseError);

  const auto no_values = dir.file("no_values.vec");
  dt::write_file(no_values, "lonely\n");
  CHECK_THROWS_AS(dchi::load_text_embeddings(no_values), dchi::ParseError);

  const auto ragged = dir.file("ragged.vec");
  dt::write_file(ragged, "a 1 2\nb 1 2 3\n");
  CHECK_THROWS_AS(dchi::load_text_embeddings(ragged), dchi::DimensionError);

  const auto non_finite = dir.file("nonfinite.vec");
  dt::write_file(non_finite, "a 1 inf\n");
  CHECK_THROWS_AS(dchi::load_text_embeddings(non_finite), dchi::ParseError);

  const auto empty = dir.file("empty.vec");
  dt::write_file(empty, "");
  CHECK_THROWS_AS(dchi::load_text_embeddings(empty), dchi::Error);

  CHECK_THROWS_AS(dchi::load_text_embeddings(dir.file("missing.vec")),
                  dchi::Error);
}

TEST_CASE("fastText-style header line is consumed and cross-checked") {
  dt::TempDir dir;
  const auto path = dir.file("ft.vec");
  dt::write_file(path, "2 3\nfoo 1 2 3\nbar 4 5 6\n");

  LoadOptions opts;
  opts.expect_header = true;
  const auto model = dchi::load_text_embeddings(path, opts);
  REQUIRE(model.size() == 2);
  CHECK(model.dim() == 3);

  // Without the flag the header parses as a 1-D word named "2" and the
  // first real row then fails the dimension check.
  CHECK_THROWS_AS(dchi::load_text_embeddings(path), dchi::DimensionError);

  const auto mismatch = dir.file("ft_bad.vec");
  dt::write_file(mismatch, "2 4\nfoo 1 2 3\nbar 4 5 6\n");
  CHECK_THROWS_AS(dchi::load_text_embeddings(mismatch, opts),
                  dchi::DimensionError);

  const auto garbled = dir.file("ft_garbled.vec");
  dt::write_file(garbled, "not a header\nfoo 1 2 3\n");
  CHECK_THROWS_AS(dchi::load_text_embeddings(garbled, opts),
                  dchi::ParseError);
}

TEST_CASE("duplicate handling: keep-first by default, error on request") {
  dt::TempDir dir;
  const auto path = dir.file("dup.vec");
  dt::write_file(path, "w 1 1\nw 2 2\nv 3 3\n");

  const auto model = dchi::load_text_embeddings(path);
  REQUIRE(model.size() == 2);
  CHECK(model.row(0)[0] == 1.0f);  // first occurrence wins

  LoadOptions strict;
  strict.on_duplicate = LoadOptions::OnDuplicate::kError;
  CHECK_THROWS_AS(dchi::load_text_embeddings(path, strict),
                  dchi::DuplicateWordError);
}

TEST_CASE("lowercasing folds duplicates before the policy applies") {
  dt::TempDir dir;
  const auto path = dir.file("case.vec");
  dt::write_file(path, "Word 1 1\nword 2 2\n");

  LoadOptions lower;
  lower.lowercase = true;
  const auto folded = dchi::load_text_embeddings(path, lower);
  REQUIRE(folded.size() == 1);
  CHECK(folded.lookup("word").value() == 0);
  CHECK(folded.row(0)[0] == 1.0f);

  const auto kept = dchi::load_text_embeddings(path);
  CHECK(kept.size() == 2);
}

TEST_CASE("max_words caps the load") {
  dt::TempDir dir;
  const auto path = dir.file("cap.vec");
  dt::write_file(path, "a 1\nb 2\nc 3\nd 4\n");

  LoadOptions opts;
  opts.max_words = 2;
  const auto model = dchi::load_text_embeddings(path, opts);
  REQUIRE(model.size() == 2);
  CHECK(model.lookup("a").has_value());
  CHECK(model.lookup("b").has_value());
  CHECK_FALSE(model.lookup("c").has_value());

  opts.max_words = 0;
  CHECK_THROWS_AS(dchi::load_text_embeddings(path, opts),
                  std::invalid_argument);
}

TEST_CASE("cache round-trip is bit-exact") {
  dt::TempDir dir;
  const auto model = dt::make_random_model(50, 7, 123);
  const auto path = dir.file("model.cache");
  dchi::save_cache(model, path);

  CHECK(dchi::is_cache_file(path));
  const auto loaded = dchi::load_cache(path);
  REQUIRE(loaded.size() == model.size());
  REQUIRE(loaded.dim() == model.dim());
  CHECK(loaded.name() == model.name());
  for (WordId id = 0; id < model.size(); ++id) {
    CHECK(loaded.word_of(id) == model.word_of(id));
  }
  CHECK(loaded.matrix() == model.matrix());  // float-exact

  // load_model sniffs the magic and dispatches.
  const auto sniffed = dchi::load_model(path);
  CHECK(sniffed.matrix() == model.matrix());
}

TEST_CASE("cache rejects foreign and damaged files") {
  dt::TempDir dir;

  const auto text = dir.file("plain.vec");
  dt::write_file(text, "a 1 2\n");
  CHECK_FALSE(dchi::is_cache_file(text));
  CHECK_THROWS_AS(dchi::load_cache(text), dchi::CacheFormatError);

  const auto model = dt::make_triangle3();
  const auto good = dir.file("good.cache");
  dchi::save_cache(model, good);

  const auto full = dt::read_file(good);
  const auto truncated = dir.file("short.cache");
  dt::write_file(truncated, full.substr(0, full.size() - 5));
  CHECK_THROWS_AS(dchi::load_cache(truncated), dchi::CacheCorruptError);

  // Flip the version field (bytes 8..11 after the magic).
  std::string versioned = full;
  versioned[8] = 0x7f;
  const auto bad_version = dir.file("vers.cache");
  dt::write_file(bad_version, versioned);
  CHECK_THROWS_AS(dchi::load_cache(bad_version), dchi::CacheFormatError);

  CHECK_FALSE(dchi::is_cache_file(dir.file("missing.cache")));
}

TEST_CASE("text and cache loads give identical models") {
  dt::TempDir dir;
  const auto text_path = dir.file("m.vec");
  dt::write_file(text_path,
                 "red 0.25 -1.5\ngreen 2 0.75\nblue -3.125 0.0625\n");
  const auto from_text = dchi::load_text_embeddings(text_path);

  const auto cache_path = dir.file("m.cache");
  dchi::save_cache(from_text, cache_path);
  const auto from_cache = dchi::load_model(cache_path);

  CHECK(from_text.matrix() == from_cache.matrix());
  for (WordId id = 0; id < from_text.size(); ++id) {
    CHECK(from_text.word_of(id) == from_cache.word_of(id));
  }
}
