#include <doctest.h>

#include <cmath>
#include <numbers>

#include "detergo/errors.hpp"
#include "detergo/expsum.hpp"
#include "detergo/parallel.hpp"
#include "detergo/random.hpp"
#include "detergo/spec_io.hpp"

using namespace detergo;

namespace {

// Plain O(N) evaluation in long double, independent of the library's
// fixed-point phases.
long double direct_abs(const std::vector<complex>& w, const std::vector<std::uint64_t>& u, long double x) {
  long double re = 0, im = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    long double t = x * static_cast<long double>(u[k]);
    t -= std::floor(t);
    const long double c = std::cos(2 * std::numbers::pi_v<long double> * t);
    const long double s = std::sin(2 * std::numbers::pi_v<long double> * t);
    re += w[k].real() * c - w[k].imag() * s;
    im += w[k].real() * s + w[k].imag() * c;
  }
  return std::sqrt(re * re + im * im);
}

// Dense direct sweep of |P| on M points.
long double sweep_max(const std::vector<complex>& w, const std::vector<std::uint64_t>& u, std::uint64_t m) {
  long double best = 0;
  for (std::uint64_t i = 0; i < m; ++i) {
    best = std::max(best, direct_abs(w, u, static_cast<long double>(i) / static_cast<long double>(m)));
  }
  return best;
}

QMultSeq random_seq(CounterRng& rng) {
  SkeletonSpec spec;
  spec.q = static_cast<int>(rng.range(2, 4));
  spec.r = rng.range(2, 6);
  const auto rows = rng.range(1, 3);
  for (std::int64_t i = 0; i < rows; ++i) {
    SkeletonRow row{0};
    for (int j = 1; j < spec.q; ++j) row.push_back(rng.range(0, spec.r - 1));
    spec.period.push_back(row);
  }
  return QMultSeq(spec);
}

}  // namespace

TEST_CASE("weighted sums against a long double oracle") {
  const auto tm = WeightSequence::thue_morse();
  const auto u = IndexSequence::squares();
  std::vector<complex> w;
  std::vector<std::uint64_t> idx;
  for (std::uint64_t k = 0; k < 500; ++k) {
    w.push_back(tm.at(k));
    idx.push_back(u.at(k));
  }
  for (double x : {0.0, 0.1, 0.3333, 0.71}) {
    CHECK(std::abs(weighted_exp_sum(tm, u, 500, x)) ==
          doctest::Approx(static_cast<double>(direct_abs(w, idx, x))).epsilon(1e-10));
  }
}

TEST_CASE("product formula equals the direct sum") {
  CounterRng rng(5, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto seq = random_seq(rng);
    const auto level = static_cast<std::size_t>(rng.range(0, 8));
    const double x = rng.uniform();
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < level; ++i) n *= static_cast<std::uint64_t>(seq.q());
    const auto direct = weighted_exp_sum(WeightSequence::qmult(seq), IndexSequence::identity(), n, x);
    REQUIRE(std::abs(qmult_block_sum(seq, level, x) - direct) <= 1e-9 * static_cast<double>(n));
  }
}

TEST_CASE("Thue-Morse sup at N = 4 is 16 / (3 sqrt 3)") {
  const double expected = 16.0 / (3.0 * std::sqrt(3.0));
  SupOptions opt;
  opt.mode = SupMode::certified;
  opt.tolerance = 1e-6;
  const auto r = sup_norm(WeightSequence::thue_morse(), IndexSequence::identity(), 4, opt);
  CHECK(r.certified);
  CHECK(r.lower == doctest::Approx(expected).epsilon(1e-9));
  CHECK(r.lower <= expected + 1e-12);
  CHECK(r.upper >= expected);
  CHECK(r.upper - r.lower <= 1e-6);
  // At x = 1/3 the modulus is 3, below the true sup.
  CHECK(std::abs(weighted_exp_sum(WeightSequence::thue_morse(), IndexSequence::identity(), 4,
                                  TorusPoint::from_ratio(1, 3))) == doctest::Approx(3.0));
}

TEST_CASE("grid sup brackets a dense direct sweep") {
  CounterRng rng(9, 0);
  for (int trial = 0; trial < 12; ++trial) {
    const auto n = static_cast<std::size_t>(rng.range(3, 200));
    std::vector<complex> w(n);
    std::vector<std::uint64_t> idx(n);
    std::uint64_t pos = static_cast<std::uint64_t>(rng.range(0, 5));
    for (std::size_t k = 0; k < n; ++k) {
      w[k] = unit(rng.uniform());
      idx[k] = pos;
      pos += static_cast<std::uint64_t>(rng.range(1, trial % 2 == 0 ? 1 : 7));
    }
    SupOptions opt;
    opt.mode = SupMode::certified;
    opt.tolerance = 1e-2;
    const auto r = sup_of_terms(w, idx, opt);
    const auto dense = static_cast<double>(sweep_max(w, idx, 1u << 14));
    CAPTURE(trial);
    CHECK(r.lower <= r.upper);
    CHECK(r.lower >= dense - 1e-9);  // refinement never loses to the dense grid
    CHECK(r.upper >= dense);
    CHECK(r.lower == doctest::Approx(static_cast<double>(direct_abs(w, idx, r.argmax))).epsilon(1e-9));
  }
}

TEST_CASE("Parseval floor for unimodular weights") {
  const auto tm = WeightSequence::thue_morse();
  for (std::uint64_t n : {64u, 1000u, 4096u}) {
    CHECK(sup_norm(tm, IndexSequence::identity(), n).lower >= std::sqrt(static_cast<double>(n)) * 0.999);
    CHECK(sup_norm(tm, IndexSequence::squares(), n).lower >= std::sqrt(static_cast<double>(n)) * 0.999);
  }
}

TEST_CASE("sup is independent of thread count") {
  const auto rs = WeightSequence::rudin_shapiro(Rational{1, 2});
  const int saved = thread_count();
  set_thread_count(1);
  const auto a = sup_norm(rs, IndexSequence::identity(), 1 << 14);
  set_thread_count(4);
  const auto b = sup_norm(rs, IndexSequence::identity(), 1 << 14);
  set_thread_count(saved);
  CHECK(a.lower == b.lower);
  CHECK(a.upper == b.upper);
  CHECK(a.argmax == b.argmax);
}

TEST_CASE("delta fit") {
  std::vector<std::uint64_t> ns;
  for (std::uint64_t n = 256; n <= 16384; n *= 2) ns.push_back(n);
  const auto fit = delta_fit(WeightSequence::thue_morse(), IndexSequence::identity(), ns);
  CHECK(fit.slope == doctest::Approx(std::log(3.0) / std::log(4.0)).epsilon(0.05));
  const std::vector<std::uint64_t> few{256, 512, 1024};
  CHECK_THROWS_AS(delta_fit(WeightSequence::thue_morse(), IndexSequence::identity(), few), SpecError);
  const std::vector<std::uint64_t> odd{256, 512, 1000, 2048, 4096};
  CHECK_THROWS_AS(delta_fit(WeightSequence::thue_morse(), IndexSequence::identity(), odd), SpecError);
}

TEST_CASE("window exponents") {
  const std::vector<std::pair<std::uint64_t, std::uint64_t>> windows{{0, 1023}, {1000, 5095}, {4096, 20479}};
  const auto r = window_exponent(WeightSequence::thue_morse(), IndexSequence::identity(), windows);
  CHECK(r.max_exponent < 0.95);
  for (const auto& row : r.rows) CHECK(row.exponent <= row.raw_exponent);
  const std::vector<std::pair<std::uint64_t, std::uint64_t>> tiny{{5, 10}};
  CHECK_THROWS_AS(window_exponent(WeightSequence::thue_morse(), IndexSequence::identity(), tiny), SpecError);
}

TEST_CASE("shifted-sum inequality") {
  const QMultSeq tm(thue_morse_skeleton());
  for (int t = 0; t <= 6; ++t) {
    const auto r = shifted_sum_check(tm, 777, 12345, t, 16, 1);
    CHECK(r.pass);
  }
  // With t large the right side is dominated by 2 q^t.
  CHECK(shifted_sum_check(tm, 50, 3, 10, 4).worst_margin > 1000.0);
}
