#include <catch_amalgamated.hpp>

#include <chrono>

#include "bwe/generator.hpp"
#include "support.hpp"

using namespace bwe;
using namespace bwe::gen;
using namespace testsupport;

namespace {

MagPhase random_input(std::size_t f, std::size_t t, std::uint64_t seed) {
  MagPhase mp{Grid<double>(f, t), Grid<double>(f, t), StftConfig::make(2 * (f - 1), 2 * (f - 1), (f - 1) / 2), 0, 16000};
  const auto a = white(f * t, seed), b = white(f * t, seed + 1);
  for (std::size_t i = 0; i < f * t; ++i) {
    mp.mag.flat()[i] = a[i];
    mp.phase.flat()[i] = std::atan2(b[i], a[i]);
  }
  return mp;
}

GeneratorGraph small_graph() {
  GeneratorGraph g;
  g.freq_bins = 33;
  g.hidden = 32;
  for (auto& b : g.blocks) b.heads = 4;
  return g;
}

}  // namespace

TEST_CASE("generator graph validation", "[generator]") {
  GeneratorGraph g;
  CHECK_NOTHROW(validate(g));
  g.blocks[2].heads = 7;
  CHECK_THROWS_AS(validate(g), Error);
  g = {};
  g.blocks[0].conv_kernel = 6;
  CHECK_THROWS_AS(validate(g), Error);
}

TEST_CASE("parameter count of the default graph", "[generator]") {
  const GeneratorGraph g;
  const std::size_t d = 256, f = 257, e = 4 * d, k = 7;
  const std::size_t block = 2 * d + 4 * (d * d + d) + (d * k + d) + 2 * d + (d * e + e) + (e * d + d) + 2 * d +
                            (d * e + e) + (e * d + d);
  const std::size_t expected = 2 * (f * d + d) + 4 * block + 4 * d + 3 * (d * f + f);
  CHECK(param_count(g) == expected);
}

TEST_CASE("zero lattice gates reproduce independent streams bit for bit", "[generator]") {
  auto g = small_graph();
  g.lattice = {0.0, 0.0, 0.0, 0.0};
  const auto w = init_generator(g, 11);
  const auto nb = random_input(g.freq_bins, 12, 5);
  const auto out = generator_forward(g, w, nb);

  // Each stream through its own two blocks, no cross terms.
  Tokens m = linear(transpose(nb.mag), w.mag_in);
  Tokens p = linear(transpose(nb.phase), w.phase_in);
  m = conformernext_forward(conformernext_forward(m, w.blocks[0], g.blocks[0]), w.blocks[2], g.blocks[2]);
  p = conformernext_forward(conformernext_forward(p, w.blocks[1], g.blocks[1]), w.blocks[3], g.blocks[3]);
  const Tokens res = linear(layer_norm(m, w.mag_norm), w.mag_proj);
  const Tokens pn = layer_norm(p, w.phase_norm);
  const Tokens re = linear(pn, w.real_proj), im = linear(pn, w.imag_proj);
  for (std::size_t f = 0; f < g.freq_bins; ++f)
    for (std::size_t t = 0; t < 12; ++t) {
      REQUIRE(out.mag(f, t) == nb.mag(f, t) + res(t, f));
      REQUIRE(out.phase(f, t) == principal_angle(im(t, f), re(t, f)));
    }

  // The phase stream no longer sees the magnitude input.
  auto nb2 = nb;
  for (double& v : nb2.mag.flat()) v += 1.0;
  CHECK(generator_forward(g, w, nb2).phase == out.phase);
}

TEST_CASE("nonzero gates couple the streams", "[generator]") {
  auto g = small_graph();
  const auto w = init_generator(g, 11);
  const auto nb = random_input(g.freq_bins, 8, 5);
  auto nb2 = nb;
  for (double& v : nb2.mag.flat()) v += 1.0;
  CHECK(generator_forward(g, w, nb2).phase != generator_forward(g, w, nb).phase);
}

TEST_CASE("zero weights pass magnitude through with zero phase", "[generator]") {
  const GeneratorGraph g;
  const auto nb = random_input(257, 10, 9);
  const auto out = generator_forward(g, nb, 1, net::WeightInit::zeros);
  CHECK(out.mag == nb.mag);
  for (double v : out.phase.flat()) CHECK(v == 0.0);
}

TEST_CASE("default graph forward at F=257, T=64 is fast and well formed", "[generator]") {
  const GeneratorGraph g;
  const auto nb = random_input(257, 64, 3);
  const auto w = init_generator(g, 1);
  const auto t0 = std::chrono::steady_clock::now();
  const auto out = generator_forward(g, w, nb);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  INFO("forward took " << secs << " s");
  CHECK(secs < 1.0);
  REQUIRE(out.mag.rows() == 257);
  REQUIRE(out.mag.cols() == 64);
  for (double v : out.mag.flat()) REQUIRE(std::isfinite(v));
  for (double v : out.phase.flat()) REQUIRE((v > -std::numbers::pi && v <= std::numbers::pi));
  CHECK(generator_forward(g, w, nb).mag == out.mag);
}

TEST_CASE("generator rejects mismatched inputs", "[generator]") {
  const GeneratorGraph g;
  CHECK_THROWS_AS(generator_forward(g, random_input(129, 4, 1), 1), Error);
  auto fixed = g;
  fixed.frames = 16;
  CHECK_THROWS_AS(generator_forward(fixed, random_input(257, 4, 1), 1), Error);
}

TEST_CASE("building blocks", "[generator]") {
  SECTION("gelu") {
    CHECK(gelu(0.0) == 0.0);
    CHECK(gelu(10.0) == Catch::Approx(10.0));
    CHECK(std::abs(gelu(-10.0)) < 1e-12);
  }
  SECTION("layer norm output has zero mean and unit variance") {
    Tokens x(3, 16);
    const auto r = white(48, 4);
    std::copy(r.begin(), r.end(), x.flat().begin());
    LayerNorm n{{"g", {16}, std::vector<double>(16, 1.0)}, {"b", {16}, std::vector<double>(16, 0.0)}};
    const auto y = layer_norm(x, n);
    for (std::size_t t = 0; t < 3; ++t) {
      double m = 0, v = 0;
      for (std::size_t d = 0; d < 16; ++d) m += y(t, d);
      m /= 16;
      for (std::size_t d = 0; d < 16; ++d) v += (y(t, d) - m) * (y(t, d) - m);
      CHECK(std::abs(m) < 1e-12);
      CHECK(v / 16 == Catch::Approx(1.0).epsilon(1e-4));
    }
  }
}
