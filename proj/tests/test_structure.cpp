#include <doctest.h>

#include <cmath>
#include <numbers>

#include "detergo/errors.hpp"
#include "detergo/random.hpp"
#include "detergo/spec_io.hpp"
#include "detergo/structure.hpp"

using namespace detergo;

namespace {

QMultSeq make(int q, std::int64_t r, std::vector<SkeletonRow> period, std::vector<SkeletonRow> pre = {}) {
  SkeletonSpec spec;
  spec.q = q;
  spec.r = r;
  spec.preperiod = std::move(pre);
  spec.period = std::move(period);
  return QMultSeq(spec);
}

// sup_y |sum_j e(b_j/r + j y)| |sum_l e(b'_l/r + l q y)|, square-rooted, by
// dense sampling in long double.
double pair_oracle(const SkeletonRow& a, const SkeletonRow& b, int q, std::int64_t r, int samples) {
  const long double two_pi = 2 * std::numbers::pi_v<long double>;
  long double best = 0;
  for (int s = 0; s < samples; ++s) {
    const long double y = static_cast<long double>(s) / samples;
    long double re1 = 0, im1 = 0, re2 = 0, im2 = 0;
    for (int j = 0; j < q; ++j) {
      const long double t1 = static_cast<long double>(a[j]) / r + j * y;
      const long double t2 = static_cast<long double>(b[j]) / r + j * q * y;
      re1 += std::cos(two_pi * t1);
      im1 += std::sin(two_pi * t1);
      re2 += std::cos(two_pi * t2);
      im2 += std::sin(two_pi * t2);
    }
    best = std::max(best, std::sqrt(std::hypot(re1, im1) * std::hypot(re2, im2)));
  }
  return static_cast<double>(best);
}

}  // namespace

TEST_CASE("Thue-Morse: every level resonant, I empty") {
  const QMultSeq tm(thue_morse_skeleton());
  const auto rr = resonance_sets(tm, 32);
  CHECK(rr.coherent.empty());
  CHECK(rr.alpha_hat == 0.0);
  for (bool m : rr.resonant) CHECK(m);
  CHECK(rr.peak_route_agrees);
  CHECK(peak_modulus(tm, 3) == doctest::Approx(2.0));
}

TEST_CASE("constant skeleton: I is every level") {
  const auto ones = make(3, 5, {{0, 0, 0}});
  const auto rr = resonance_sets(ones, 20);
  CHECK(rr.coherent.size() == 20);
  CHECK(rr.alpha_hat == 1.0);
  CHECK_THROWS_AS(taux_bound(ones, rr), ComputationError);
}

TEST_CASE("coherent set on a mixed skeleton") {
  // Level 0 row (0,1) over r = 4 followed by (0,2): b_{1,1} = 2 b_{0,1}, so 0 is in I.
  const auto seq = make(2, 4, {{0, 1}, {0, 2}, {0, 3}});
  CHECK(in_coherent_set({0, 1}, {0, 2}, 2, 4));
  CHECK_FALSE(in_coherent_set({0, 2}, {0, 3}, 2, 4));
  const auto rr = resonance_sets(seq, 30);
  CHECK(rr.peak_route_agrees);
  CHECK(rr.coherent.front() == 0);
  CHECK(rr.alpha_hat > 0.0);
  CHECK(rr.alpha_hat < 1.0);
}

TEST_CASE("resonance route through peak points agrees on random skeletons") {
  CounterRng rng(21, 0);
  for (int trial = 0; trial < 200; ++trial) {
    SkeletonSpec spec;
    spec.q = static_cast<int>(rng.range(2, 4));
    spec.r = rng.range(1, 6);
    for (int i = 0; i < rng.range(1, 4); ++i) {
      SkeletonRow row{0};
      for (int j = 1; j < spec.q; ++j) row.push_back(rng.range(0, spec.r - 1));
      spec.period.push_back(row);
    }
    const QMultSeq seq(spec);
    REQUIRE(resonance_sets(seq, 24).peak_route_agrees);
  }
}

TEST_CASE("q = r = 2 pair constant is 4 / 3^(3/4)") {
  const double target = 4.0 / std::pow(3.0, 0.75);
  const auto tb = taux_bound(QMultSeq(thue_morse_skeleton()), resonance_sets(QMultSeq(thue_morse_skeleton()), 64));
  CHECK(tb.s <= target + 1e-6);
  CHECK(tb.s == doctest::Approx(target).epsilon(1e-7));
  CHECK(tb.s_upper_slack <= 1e-6);
  CHECK(tb.delta_bound == doctest::Approx(std::log2(target)).epsilon(1e-6));
  REQUIRE(tb.q2r2_linear_bound);
  CHECK(*tb.q2r2_linear_bound == doctest::Approx(0.82));
  // (0,0) -> (0,1) is the other non-coherent type and has the same constant;
  // (0,1) -> (0,0) is coherent and reaches the trivial value 2.
  CHECK(pair_sup({0, 0}, {0, 1}, 2, 2).sup == doctest::Approx(target).epsilon(1e-7));
  CHECK(in_coherent_set({0, 1}, {0, 0}, 2, 2));
  CHECK(pair_sup({0, 1}, {0, 0}, 2, 2).sup == doctest::Approx(2.0));
}

TEST_CASE("(1, j) example: alpha = 0 and delta bound below 0.93") {
  const auto seq = make(2, 3, {{0, 1}});
  const auto rr = resonance_sets(seq, 64);
  CHECK(rr.alpha_hat == 0.0);
  const auto tb = taux_bound(seq, rr);
  CHECK(tb.s == doctest::Approx(1.89063).epsilon(1e-5));
  CHECK(tb.delta_bound <= 0.93);
  CHECK_FALSE(tb.q2r2_linear_bound);
}

TEST_CASE("pair sup against dense sampling") {
  CounterRng rng(4, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const int q = static_cast<int>(rng.range(2, 4));
    const std::int64_t r = rng.range(2, 7);
    SkeletonRow a{0}, b{0};
    for (int j = 1; j < q; ++j) {
      a.push_back(rng.range(0, r - 1));
      b.push_back(rng.range(0, r - 1));
    }
    const auto p = pair_sup(a, b, q, r);
    const double dense = pair_oracle(a, b, q, r, 1 << 16);
    CHECK(dense <= p.sup + p.slack + 1e-12);
    CHECK(p.sup <= dense + 1e-4);
  }
}

TEST_CASE("window constants and block mass") {
  const auto wc = h1_to_h2(0.8, 2, 3.0);
  CHECK(wc.rho == doctest::Approx(0.9));
  CHECK(wc.constant == doctest::Approx(4.0 + 3.0 * std::pow(2.0, 0.8)));
  CHECK_THROWS_AS(h1_to_h2(1.0, 2, 1.0), SpecError);
  const auto h3 = h3_check(WeightSequence::thue_morse(), 2, 40);
  CHECK(h3.pass);
  CHECK(h3.bound == 4.0);
  // Unimodular weights: mass over [n^2, (n+1)^2) is 2n + 1, normalized (2n+1)/n.
  CHECK(h3.values.front() == doctest::Approx(3.0));
}
