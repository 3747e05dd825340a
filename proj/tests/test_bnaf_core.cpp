#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include <Eigen/LU>

#include "doctest.h"
#include "test_util.hpp"

using namespace bnaf;
using namespace bnaf_test;

namespace {

// log|det J| of the finite-difference Jacobian; the brute-force oracle for
// the log-domain accumulation.
double fd_log_det(const FlowStack& st, const Tensor& x_row) {
  const Tensor j = fd_jacobian(st, x_row);
  Eigen::MatrixXd m = j.mat();
  return std::log(std::abs(m.determinant()));
}

Tensor random_point(Rng& rng, Index d, double lo = -2.0, double hi = 2.0) {
  return random_tensor(rng, {1, d}, lo, hi);
}

}  // namespace

TEST_CASE("build_masks examples and invariants") {
  SUBCASE("d=1 a=3 b=1: single all-ones diagonal block") {
    const BlockMasks m = build_masks(1, 3, 1);
    CHECK(m.m_d == Tensor::matrix({{1}, {1}, {1}}));
    CHECK(m.m_o == Tensor::matrix({{0}, {0}, {0}}));
  }
  SUBCASE("d=2 a=2 b=1 block layout") {
    const BlockMasks m = build_masks(2, 2, 1);
    CHECK(m.m_d == Tensor::matrix({{1, 0}, {1, 0}, {0, 1}, {0, 1}}));
    CHECK(m.m_o == Tensor::matrix({{0, 0}, {0, 0}, {1, 0}, {1, 0}}));
  }
  SUBCASE("d=3 a=1 b=1 reduces to ordinary triangular masking") {
    const BlockMasks m = build_masks(3, 1, 1);
    CHECK(m.m_d == Tensor::matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
    CHECK(m.m_o == Tensor::matrix({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}));
  }
  SUBCASE("supports are disjoint and cover exactly the lower block triangle") {
    for (auto [d, a, b] : {std::tuple<Index, Index, Index>{2, 3, 2}, {4, 2, 5}, {5, 1, 3}}) {
      const BlockMasks m = build_masks(d, a, b);
      for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
          CHECK(m.m_d.at(r, c) * m.m_o.at(r, c) == 0.0);
          const Index bi = r / a, bj = c / b;
          const double want = bi == bj ? 1.0 : 0.0;
          CHECK(m.m_d.at(r, c) == want);
          CHECK(m.m_o.at(r, c) == (bj < bi ? 1.0 : 0.0));
        }
      }
    }
  }
  SUBCASE("invalid dims") {
    CHECK_THROWS_AS(build_masks(0, 1, 1), ConfigError);
    CHECK_THROWS_AS(build_masks(2, -1, 1), ConfigError);
  }
}

TEST_CASE("effective_weight examples") {
  SUBCASE("unit everything") {
    BnafLayerParams p;
    p.masks = build_masks(1, 1, 1);
    p.w_hat = Tensor::matrix({{0}});
    p.s = Tensor::vector({0});
    p.bias = Tensor::vector({0});
    auto [w, ld] = effective_weight(p);
    CHECK(w.at(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ld.at(0) == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("row formula: w_hat=ln2, s=ln3") {
    BnafLayerParams p;
    p.masks = build_masks(1, 1, 1);
    p.w_hat = Tensor::matrix({{std::log(2.0)}});
    p.s = Tensor::vector({std::log(3.0)});
    p.bias = Tensor::vector({0});
    auto [w, ld] = effective_weight(p);
    CHECK(w.at(0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(ld.at(0) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  }
  SUBCASE("exp(log_diag) equals W on the diagonal blocks") {
    Rng rng(5);
    for (int t = 0; t < 10; ++t) {
      const Index d = 3, a = 2, b = 2;
      BnafLayerParams p;
      p.masks = build_masks(d, a, b);
      p.w_hat = random_tensor(rng, {a * d, b * d});
      p.s = random_tensor(rng, {a * d}, -1.0, 1.0);
      p.bias = Tensor::zeros({a * d});
      auto [w, ld] = effective_weight(p);
      for (Index r = 0; r < a * d; ++r) {
        const Index blk = r / a;
        for (Index c = 0; c < b; ++c) {
          CHECK(std::abs(std::exp(ld.at(r, c)) - w.at(r, blk * b + c)) < 1e-12);
        }
        // masked-out entries are exactly zero
        for (Index c = 0; c < b * d; ++c) {
          if (c / b > blk) CHECK(w.at(r, c) == 0.0);
        }
      }
    }
  }
}

TEST_CASE("log_mat_mul examples") {
  Graph g;
  SUBCASE("1x1") {
    const Tensor r = log_mat_mul(Tensor::matrix({{std::log(1.0)}}), Tensor::matrix({{std::log(2.0)}}));
    CHECK(r.at(0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }
  SUBCASE("sum of two unit factors") {
    const Tensor r = log_mat_mul(Tensor::matrix({{0, 0}}), Tensor::matrix({{0}, {0}}));
    CHECK(r.at(0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }
  SUBCASE("random 3x3 against direct-space multiplication") {
    Rng rng(17);
    for (int t = 0; t < 20; ++t) {
      const Tensor a = random_tensor(rng, {3, 3}, -3.0, 3.0);
      const Tensor b = random_tensor(rng, {3, 3}, -3.0, 3.0);
      const Tensor c = log_mat_mul(a, b);
      Eigen::MatrixXd direct = a.mat().array().exp().matrix() * b.mat().array().exp().matrix();
      for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 3; ++j) {
          CHECK(std::abs(std::exp(c.at(i, j)) - direct(i, j)) /
                    std::max(1e-300, std::abs(direct(i, j))) <
                1e-10);
        }
      }
    }
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(log_mat_mul(g.constant(Tensor::matrix({{0, 0}})),
                                g.constant(Tensor::matrix({{0, 0}}))),
                    DimensionError);
  }
}

TEST_CASE("flow_forward: unit-weight d=1 flow matches finite differences") {
  FlowStack st = make_stack(1, 1, 1, 1);  // all-zero params, gate_raw = 0 (alpha = 0.5)
  const Tensor x = Tensor::matrix({{0.0}});
  const StackEval ev = stack_eval(st, x);
  // dy/dx at 0: 0.5 * tanh'(0) * 1 * 1 + 0.5 = 1
  const double eps = 1e-6;
  const Tensor yp = stack_eval(st, Tensor::matrix({{eps}})).y;
  const Tensor ym = stack_eval(st, Tensor::matrix({{-eps}})).y;
  const double fd = (yp.at(0) - ym.at(0)) / (2 * eps);
  CHECK(std::abs(std::exp(ev.flow_log_diag[0].at(0)) - fd) < 1e-8);
  CHECK(std::exp(ev.flow_log_diag[0].at(0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("flow_forward: y_i is bit-for-bit independent of x_j for j > i") {
  Rng rng(23);
  for (int t = 0; t < 10; ++t) {
    FlowStack st = init_stack(4, 3, 2, 1, rng);
    const Tensor x = random_point(rng, 4);
    const Tensor y = stack_eval(st, x).y;
    for (Index j = 1; j < 4; ++j) {
      Tensor xp = x;
      xp.at(0, j) += 0.75;
      const Tensor yp = stack_eval(st, xp).y;
      for (Index i = 0; i < j; ++i) CHECK(yp.at(0, i) == y.at(0, i));
    }
  }
}

TEST_CASE("flow_forward: log_det equals brute-force Jacobian determinant") {
  Rng rng(29);
  for (Index d : {1, 2, 3, 5}) {
    for (int t = 0; t < 10; ++t) {
      FlowStack st = init_stack(d, 3, 2, 1, rng);
      const Tensor x = random_point(rng, d);
      const double got = stack_eval(st, x).log_det.at(0);
      CHECK(std::abs(got - fd_log_det(st, x)) < 1e-5);
    }
  }
}

TEST_CASE("monotone univariate sections") {
  Rng rng(31);
  FlowStack st = init_stack(2, 4, 2, 1, rng);
  for (Index coord : {Index(0), Index(1)}) {
    const Tensor base = random_point(rng, 2);
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i) {
      Tensor x = base;
      x.at(0, coord) = -6.0 + 12.0 * i / 999.0;
      const double yi = stack_eval(st, x).y.at(0, coord);
      CHECK(yi > prev);
      prev = yi;
    }
  }
}

TEST_CASE("gate consistency: alpha -> 0 collapses the flow to identity") {
  Rng rng(37);
  FlowStack st = init_stack(3, 3, 2, 1, rng);
  st.flows[0].gate_raw = Tensor::scalar(-20.0);
  const double alpha = 1.0 / (1.0 + std::exp(20.0));
  const Tensor x = random_point(rng, 3);
  const StackEval ev = stack_eval(st, x);
  for (Index j = 0; j < 3; ++j) CHECK(std::abs(ev.y.at(0, j) - x.at(0, j)) < 1e-6);
  CHECK(std::abs(ev.log_det.at(0)) < 1e-6);
  CHECK(ev.log_det.at(0) == doctest::Approx(3.0 * std::log1p(-alpha)).epsilon(1e-4));
}

TEST_CASE("stack_forward composition") {
  Rng rng(41);
  SUBCASE("one flow with identity permutation equals flow_forward") {
    FlowStack st = init_stack(3, 2, 1, 1, rng);
    for (Index j = 0; j < 3; ++j) st.permutation[static_cast<size_t>(j)] = j;
    const Tensor x = random_point(rng, 3);
    Graph g;
    BoundStack bs = bind_stack(g, st);
    FlowOutput via_stack = stack_forward(g, bs, g.constant(x));
    FlowOutput via_flow = flow_forward(g, bs.flows[0], g.constant(x));
    CHECK(g.value(via_stack.y) == g.value(via_flow.y));
    CHECK(g.value(via_stack.log_det) == g.value(via_flow.log_det));
  }
  SUBCASE("second flow near identity adds d*log(1-alpha2); matches brute force") {
    FlowStack st = init_stack(2, 3, 2, 2, rng);
    st.flows[1].gate_raw = Tensor::scalar(-18.0);
    const double alpha2 = 1.0 / (1.0 + std::exp(18.0));
    const Tensor x = random_point(rng, 2);

    FlowStack first_only = st;
    first_only.flows.pop_back();
    const double ld_first = stack_eval(first_only, x).log_det.at(0);
    const double ld_stack = stack_eval(st, x).log_det.at(0);
    CHECK(ld_stack == doctest::Approx(ld_first + 2.0 * std::log1p(-alpha2)).epsilon(1e-6));
    CHECK(std::abs(ld_stack - fd_log_det(st, x)) < 1e-5);
  }
  SUBCASE("reversal permutation reindexes between flows") {
    FlowStack st = init_stack(3, 2, 1, 2, rng);
    const Tensor x = random_point(rng, 3);

    FlowStack f1 = st, f2 = st;
    f1.flows.pop_back();
    f2.flows.erase(f2.flows.begin());
    const Tensor mid = stack_eval(f1, x).y;
    Tensor reindexed({1, 3});
    for (Index j = 0; j < 3; ++j) reindexed.at(0, j) = mid.at(0, 2 - j);
    const Tensor manual = stack_eval(f2, reindexed).y;
    CHECK(stack_eval(st, x).y == manual);
  }
}

TEST_CASE("triangularity and positivity on random flows (d=5)") {
  Rng rng(43);
  for (int t = 0; t < 10; ++t) {
    FlowStack st = init_stack(5, 2, 2, 1, rng);
    const Tensor x = random_point(rng, 5);
    const Tensor jac = fd_jacobian(st, x);
    const StackEval ev = stack_eval(st, x);
    for (Index i = 0; i < 5; ++i) {
      for (Index j = i + 1; j < 5; ++j) CHECK(std::abs(jac.at(i, j)) < 1e-8);
      const double diag = std::exp(ev.flow_log_diag[0].at(0, i));
      CHECK(std::isfinite(ev.flow_log_diag[0].at(0, i)));
      CHECK(diag > 0.0);
      CHECK(rel_err(diag, jac.at(i, i)) < 1e-5);
    }
  }
}

TEST_CASE("flow_inverse") {
  Rng rng(47);
  SUBCASE("round-trip at the origin") {
    FlowStack st = init_stack(2, 3, 2, 2, rng);
    const Tensor x0 = Tensor::matrix({{0.0, 0.0}});
    const Tensor y = stack_eval(st, x0).y;
    const Tensor back = flow_inverse(st, y, 1e-8);
    CHECK(std::abs(back.at(0, 0)) < 1e-6);
    CHECK(std::abs(back.at(0, 1)) < 1e-6);
  }
  SUBCASE("100 random round-trips, d=2") {
    FlowStack st = init_stack(2, 3, 2, 2, rng);
    Tensor x({100, 2});
    for (Index i = 0; i < x.numel(); ++i) x.at(i) = -3.0 + 6.0 * rng.uniform01();
    const Tensor y = stack_eval(st, x).y;
    const Tensor back = flow_inverse(st, y, 1e-8);
    double worst = 0.0;
    for (Index i = 0; i < x.numel(); ++i) worst = std::max(worst, std::abs(back.at(i) - x.at(i)));
    CHECK(worst < 1e-6);
  }
  SUBCASE("monotone bracket holds at B=1e3") {
    FlowStack st = init_stack(2, 3, 2, 1, rng);
    for (int t = 0; t < 20; ++t) {
      const Tensor x = random_point(rng, 2, -3.0, 3.0);
      const Tensor y = stack_eval(st, x).y;
      for (Index i = 0; i < 2; ++i) {
        Tensor lo = x, hi = x;
        lo.at(0, i) = -1e3;
        hi.at(0, i) = 1e3;
        CHECK(stack_eval(st, lo).y.at(0, i) < y.at(0, i));
        CHECK(stack_eval(st, hi).y.at(0, i) > y.at(0, i));
      }
    }
  }
  SUBCASE("invalid tolerance") {
    FlowStack st = init_stack(2, 2, 1, 1, rng);
    CHECK_THROWS_AS(flow_inverse(st, Tensor({1, 2}), 0.0), ConfigError);
  }
}

TEST_CASE("flow_forward reports the layer of a non-finite intermediate") {
  FlowStack st = make_stack(2, 2, 1, 2);
  st.flows[1].layers[1].bias = Tensor::full({2}, std::numeric_limits<double>::infinity());
  Graph g;
  BoundStack bs = bind_stack(g, st);
  CHECK_THROWS_WITH_AS(stack_forward(g, bs, g.constant(Tensor::matrix({{0.5, 0.5}}))),
                       doctest::Contains("layer 1"), NumericalError);
}

TEST_CASE("count_params") {
  CHECK(count_params(1, 1, 1, 1) == 7);
  CHECK(count_params(2, 2, 1, 1) == 25);
  for (auto [d, k, L] : {std::tuple<Index, Index, Index>{2, 3, 2}, {3, 2, 1}, {4, 5, 3}}) {
    CHECK(count_params(d, k, L, 2) == 2 * count_params(d, k, L, 1));
  }
  SUBCASE("matches enumeration over materialized masks") {
    Rng rng(53);
    for (int t = 0; t < 5; ++t) {
      const Index d = 1 + static_cast<Index>(rng.below(4));
      const Index k = 1 + static_cast<Index>(rng.below(5));
      const Index L = 1 + static_cast<Index>(rng.below(3));
      const Index f = 1 + static_cast<Index>(rng.below(3));
      const FlowStack st = make_stack(d, k, L, f);
      long enumerated = 0;
      for (const BnafFlow& fl : st.flows) {
        for (const BnafLayerParams& layer : fl.layers) {
          for (Index i = 0; i < layer.w_hat.numel(); ++i) {
            enumerated += static_cast<long>(layer.masks.m_d.at(i) + layer.masks.m_o.at(i));
          }
          enumerated += layer.s.numel() + layer.bias.numel();
        }
        enumerated += 1;  // gate
      }
      CHECK(count_params(d, k, L, f) == enumerated);
    }
  }
  CHECK_THROWS_AS(count_params(0, 1, 1, 1), ConfigError);
}

TEST_CASE("init_params") {
  SUBCASE("fixed seed reproduces the stack bit-for-bit") {
    Rng r1(99), r2(99);
    const FlowStack a = init_stack(3, 4, 2, 2, r1);
    const FlowStack b = init_stack(3, 4, 2, 2, r2);
    auto pa = named_params(a);
    auto pb = named_params(b);
    REQUIRE(pa.size() == pb.size());
    for (size_t i = 0; i < pa.size(); ++i) CHECK(*pa[i].tensor == *pb[i].tensor);
  }
  SUBCASE("w_hat sample statistics") {
    Rng rng(7);
    FlowStack st = init_stack(2, 50, 2, 1, rng);  // first hidden layer alone has 10000 entries
    const Tensor& w = st.flows[0].layers[1].w_hat;
    REQUIRE(w.numel() == 10000);
    const double mean = w.arr().mean();
    const double var = (w.arr() - mean).square().mean();
    CHECK(std::abs(mean) < 0.05);
    CHECK(std::abs(var - 1.0) < 0.1);
  }
  SUBCASE("initial log_diag entries are finite") {
    Rng rng(13);
    const FlowStack st = init_stack(3, 3, 2, 2, rng);
    for (const BnafFlow& f : st.flows) {
      for (const BnafLayerParams& l : f.layers) {
        auto [w, ld] = effective_weight(l);
        CHECK(ld.all_finite());
      }
    }
  }
}
