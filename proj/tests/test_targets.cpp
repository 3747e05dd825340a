#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "bnaf/targets.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bnaf;
using namespace bnaf_test;

TEST_CASE("normal_log_prob analytic values") {
  const double log2pi = std::log(2.0 * M_PI);
  CHECK(normal_log_prob(Tensor::matrix({{0.0, 0.0}})).at(0) ==
        doctest::Approx(-log2pi).epsilon(1e-12));
  CHECK(normal_log_prob(Tensor::matrix({{1.0}})).at(0) ==
        doctest::Approx(-0.5 * log2pi - 0.5).epsilon(1e-12));

  const Tensor batch = normal_log_prob(Tensor::matrix({{0.0, 0.0}, {1.0, 2.0}}));
  CHECK(batch.shape() == Shape{2});
  CHECK(batch.at(1) == doctest::Approx(-log2pi - 2.5).epsilon(1e-12));
}

TEST_CASE("normal_sample statistics and determinism") {
  Rng a(3), b(3), c(4);
  const Tensor s1 = normal_sample(a, 50000, 2);
  const Tensor s2 = normal_sample(b, 50000, 2);
  const Tensor s3 = normal_sample(c, 50000, 2);
  CHECK(s1 == s2);
  CHECK_FALSE(s1 == s3);

  for (Index col = 0; col < 2; ++col) {
    double sum = 0.0, sq = 0.0;
    for (Index r = 0; r < s1.extent(0); ++r) {
      sum += s1.at(r, col);
      sq += s1.at(r, col) * s1.at(r, col);
    }
    const double mean = sum / static_cast<double>(s1.extent(0));
    const double var = sq / static_cast<double>(s1.extent(0)) - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.02);
  }
}

TEST_CASE("toy_sample generators") {
  SUBCASE("eight gaussians: every sample within 4 sigma of a mode") {
    Rng rng(5);
    const Tensor s = toy_sample(ToyKind::EightGaussians, rng, 500);
    for (Index r = 0; r < s.extent(0); ++r) {
      double best = 1e9;
      for (int m = 0; m < 8; ++m) {
        const double ang = 2.0 * M_PI * m / 8.0;
        const double dx = s.at(r, 0) - 2.0 * std::cos(ang);
        const double dy = s.at(r, 1) - 2.0 * std::sin(ang);
        best = std::min(best, std::sqrt(dx * dx + dy * dy));
      }
      CHECK(best <= 4.0 * 0.2);
    }
  }
  SUBCASE("checkerboard parity is fixed by construction") {
    Rng rng(6);
    const Tensor s = toy_sample(ToyKind::Checkerboard, rng, 2000);
    for (Index r = 0; r < s.extent(0); ++r) {
      const long px = static_cast<long>(std::floor(s.at(r, 0)));
      const long py = static_cast<long>(std::floor(s.at(r, 1)));
      CHECK((px + py) % 2 == 0);
      CHECK(std::abs(s.at(r, 0)) <= 4.0);
      CHECK(std::abs(s.at(r, 1)) <= 4.0);
    }
  }
  SUBCASE("all kinds stay inside [-4.5, 4.5]^2 and are seed-reproducible") {
    for (ToyKind kind : {ToyKind::EightGaussians, ToyKind::TwoSpirals, ToyKind::Checkerboard}) {
      Rng r1(7), r2(7);
      const Tensor a = toy_sample(kind, r1, 3000);
      const Tensor b = toy_sample(kind, r2, 3000);
      CHECK(a == b);
      for (Index i = 0; i < a.numel(); ++i) CHECK(std::abs(a.at(i)) <= 4.5);
    }
  }
  SUBCASE("kind names parse both ways") {
    for (const auto& name : toy_names()) {
      REQUIRE(parse_toy(name).has_value());
      CHECK(toy_name(*parse_toy(name)) == name);
    }
    CHECK_FALSE(parse_toy("nine_gaussians").has_value());
  }
}

TEST_CASE("energy functions") {
  SUBCASE("u1 at (2, 0) is approximately zero") {
    const double u = energy(EnergyKind::U1, Tensor::matrix({{2.0, 0.0}})).at(0);
    CHECK(std::abs(u) < 1e-9);
  }
  SUBCASE("u1 at the origin matches direct evaluation") {
    const double u = energy(EnergyKind::U1, Tensor::matrix({{0.0, 0.0}})).at(0);
    const double e = -0.5 * (2.0 / 0.6) * (2.0 / 0.6);
    const double want = 12.5 - std::log(2.0 * std::exp(e));
    CHECK(u == doctest::Approx(want).epsilon(1e-12));
  }
  SUBCASE("all kinds finite at the origin and on [-5,5]^2 probes") {
    Rng rng(9);
    for (EnergyKind kind : {EnergyKind::U1, EnergyKind::U2, EnergyKind::U3, EnergyKind::U4}) {
      CHECK(std::isfinite(energy(kind, Tensor::matrix({{0.0, 0.0}})).at(0)));
      const Tensor z = random_tensor(rng, {200, 2}, -5.0, 5.0);
      CHECK(energy(kind, z).all_finite());
    }
  }
  SUBCASE("autodiff gradient of U matches finite differences") {
    Rng rng(10);
    for (EnergyKind kind : {EnergyKind::U1, EnergyKind::U2, EnergyKind::U3, EnergyKind::U4}) {
      for (int t = 0; t < 25; ++t) {
        const Tensor z = random_tensor(rng, {1, 2}, -3.0, 3.0);
        Graph g;
        Value zv = g.leaf(z);
        Value u = sum(energy(kind, zv), 0);
        g.backward(u);
        const Tensor ad = g.adjoint(zv);
        auto f = [&](const std::vector<Tensor>& ins) {
          return energy(kind, ins[0]).at(0);
        };
        const Tensor fd = fd_grad(f, {z}, 0);
        for (Index i = 0; i < 2; ++i) CHECK(rel_err(ad.at(i), fd.at(i)) < 1e-6);
      }
    }
  }
  SUBCASE("energy names parse both ways") {
    for (const auto& name : energy_names()) {
      REQUIRE(parse_energy(name).has_value());
      CHECK(energy_name(*parse_energy(name)) == name);
    }
    CHECK_FALSE(parse_energy("u5").has_value());
  }
}
