#include <doctest.h>

#include <cmath>
#include <numbers>

#include "detergo/alpha.hpp"
#include "detergo/dynamics.hpp"
#include "detergo/errors.hpp"
#include "detergo/expsum.hpp"
#include "detergo/random.hpp"
#include "detergo/spec_io.hpp"

using namespace detergo;

namespace {

RotationSystem rotation(const std::string& name, double x0 = 0.0) {
  return RotationSystem{Irrational::named(name), TorusPoint::from_double(x0)};
}

// (1/N) sum_{k=1}^{N} tm(k) e(k^2 a) in long double with exact residues for
// rational a = p/q; an independent path from the library's fixed-point phases.
long double squares_oracle_rational(std::int64_t p, std::int64_t q, std::uint64_t n) {
  long double re = 0, im = 0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    const int s = __builtin_popcountll(k) % 2 == 0 ? 1 : -1;
    const auto res = static_cast<std::int64_t>((static_cast<unsigned __int128>(k) * k * static_cast<std::uint64_t>(p)) %
                                               static_cast<std::uint64_t>(q));
    const long double t = 2 * std::numbers::pi_v<long double> * res / q;
    re += s * std::cos(t);
    im += s * std::sin(t);
  }
  return std::hypot(re, im) / n;
}

}  // namespace

TEST_CASE("continued fractions of the named constants") {
  CHECK(Irrational::named("golden").partial_quotients(6) == std::vector<std::uint64_t>{1, 1, 1, 1, 1, 1});
  CHECK(Irrational::named("sqrt2").partial_quotients(5) == std::vector<std::uint64_t>{1, 2, 2, 2, 2});
  CHECK(Irrational::named("e_frac").partial_quotients(9) == std::vector<std::uint64_t>{0, 1, 2, 1, 1, 4, 1, 1, 6});
  CHECK(Irrational::named("pi_frac").partial_quotients(8) ==
        std::vector<std::uint64_t>{0, 7, 15, 1, 292, 1, 1, 1});
  CHECK(Irrational::named("pi_frac").value() == doctest::Approx(std::numbers::pi - 3));
  CHECK(Irrational::named("golden").fraction().value() == doctest::Approx((std::sqrt(5.0) - 1) / 2));
  CHECK_THROWS_AS(Irrational::named("tau"), SpecError);
}

TEST_CASE("decimal alpha: depth limited by the digits given") {
  const auto a = Irrational::from_decimal("1.41421356237309504880168872420969807856967187537694", 50);
  CHECK(a.partial_quotients(20) == Irrational::named("sqrt2").partial_quotients(20));
  CHECK_THROWS_AS(a.partial_quotients(200), ComputationError);
  CHECK_THROWS_AS(Irrational::from_decimal("1.4x", 3), SpecError);
}

TEST_CASE("Diophantine type estimates") {
  CHECK(diophantine_type(Irrational::named("golden"), 30).d_hat == doctest::Approx(1.0).epsilon(0.01));
  CHECK(std::abs(diophantine_type(Irrational::named("sqrt2"), 100).d_hat - 1.0) <= 0.01);
  // a_{m+1} = q_m, built from the recursion q_{m+1} = a_{m+1} q_m + q_{m-1}.
  std::vector<std::uint64_t> cf{0};
  std::uint64_t q_prev = 0, q = 1;
  for (int m = 0; m < 8; ++m) {
    const std::uint64_t a = q;
    cf.push_back(a);
    const std::uint64_t next = a * q + q_prev;
    q_prev = q;
    q = next;
  }
  const auto liouville = diophantine_type(Irrational::from_cf(cf), 8);
  CHECK(liouville.d_hat >= 2.0);
  CHECK(liouville.rows[5].q == "734");
  CHECK_THROWS_AS(diophantine_type(Irrational::named("golden"), 4), SpecError);
  // log(1/||q_m alpha||) tracks log q_m for a badly approximable number.
  const auto g = diophantine_type(Irrational::named("golden"), 20);
  CHECK(g.rows[15].log_inv_distance == doctest::Approx(g.rows[15].log_q + std::log(std::sqrt(5.0))).epsilon(0.02));
}

TEST_CASE("orbit precision up to 2^24 steps") {
  const auto sys = rotation("sqrt2", 0.25);
  const long double alpha = std::sqrt(2.0L) - 1.0L;
  TorusPoint incremental = sys.x0;
  const TorusPoint step = sys.alpha.fraction();
  for (std::uint64_t k = 1; k <= (1u << 24); ++k) {
    incremental = incremental + step;
    if ((k & (k - 1)) == 0 || k % 1000003 == 0) {
      REQUIRE(incremental == sys.orbit(k));
      long double expected = 0.25L + k * alpha;
      expected -= std::floor(expected);
      REQUIRE(std::abs(static_cast<long double>(sys.orbit(k).value()) - expected) < 1e-10L);
    }
  }
}

TEST_CASE("weighted Birkhoff averages") {
  const auto id = IndexSequence::identity();
  const std::uint64_t n = 1000000;
  SUBCASE("constant weights, f = e(x): geometric series") {
    const auto sys = rotation("sqrt2");
    const FourierFunction f({{1, 1.0}});
    const auto r = weighted_birkhoff(WeightSequence::constant(1.0), id, f, sys, n, 1.0);
    const double bound = 2.0 / (static_cast<double>(n) * std::abs(1.0 - unit(sys.alpha.fraction())));
    CHECK(std::abs(r.value) <= bound);
    CHECK(std::abs(r.value) < 1e-5);
  }
  SUBCASE("Thue-Morse, f = e(x) + e(-x), golden") {
    const auto r = weighted_birkhoff(WeightSequence::thue_morse(), id, FourierFunction::cosine(), rotation("golden"), n, 1.0);
    CHECK(std::abs(r.value) < 0.01);
    CHECK(std::abs(r.value - r.decomposed) <= 1e-9 * std::max(1e-12, std::abs(r.value)) + 1e-15);
  }
  SUBCASE("constant f: empty spectrum") {
    const auto r = weighted_birkhoff(WeightSequence::thue_morse(), id, FourierFunction::constant(2.5), rotation("golden"), n, 1.0);
    CHECK(std::abs(r.value) < 0.01);
  }
  SUBCASE("decomposition matches expsum kernels") {
    const auto theta = WeightSequence::rudin_shapiro(Rational{1, 2});
    const auto sys = rotation("e_frac", 0.3);
    const FourierFunction f({{1, {0.5, 0.25}}, {-3, 0.75}, {5, {0.0, -1.0}}});
    const auto r = weighted_birkhoff(theta, IndexSequence::squares(), f, sys, 5000, 0.7);
    CHECK(std::abs(r.value - r.decomposed) <= 1e-9 * std::abs(r.value));
    const auto k = weighted_exp_sum(theta, IndexSequence::squares(), 5000, sys.alpha.fraction() * std::int64_t{-3});
    CHECK(std::abs(r.terms[1].kernel - k) < 1e-9);
  }
  CHECK_THROWS_AS(weighted_birkhoff(WeightSequence::thue_morse(), id, FourierFunction::cosine(), rotation("golden"), 10, 1.5),
                  SpecError);
}

TEST_CASE("Birkhoff decay exponent stays below the sup-norm exponent") {
  std::vector<std::uint64_t> ns;
  for (std::uint64_t n = 1 << 10; n <= (1 << 18); n *= 2) ns.push_back(n);
  const auto curve = birkhoff_curve(WeightSequence::thue_morse(), IndexSequence::identity(), FourierFunction::cosine(),
                                    rotation("golden", 0.1), ns, 1.0);
  std::vector<double> xs, ys;
  for (const auto& p : curve) {
    xs.push_back(std::log(static_cast<double>(p.n)));
    ys.push_back(std::log(p.magnitude));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(ys.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
  const double delta_fit_tm = std::log(3.0) / std::log(4.0);
  CHECK(sxy / sxx <= delta_fit_tm - 1.0 + 0.1);
}

TEST_CASE("uniform sup over an x-grid") {
  const auto id = IndexSequence::identity();
  const auto sys = rotation("golden");
  SUBCASE("constant weights, single frequency: modulus independent of x") {
    const FourierFunction f({{1, 1.0}});
    const auto r = uniform_sup_birkhoff(WeightSequence::constant(1.0), id, f, sys, 4096, 128);
    CHECK(r.max_raw == doctest::Approx(std::abs(r.kernels[0])).epsilon(1e-9));
  }
  SUBCASE("frequency zero gives |sum theta|") {
    const auto r = uniform_sup_birkhoff(WeightSequence::thue_morse(), id, FourierFunction::constant(1.0), sys, 1001, 64);
    CHECK(r.max_raw == doctest::Approx(1.0));
  }
  SUBCASE("matches a direct sweep at small N") {
    const auto theta = WeightSequence::thue_morse();
    const auto f = FourierFunction::cosine();
    const std::uint64_t n = 512, grid = 64;
    const auto r = uniform_sup_birkhoff(theta, id, f, sys, n, grid);
    double best = 0;
    for (std::uint64_t g = 0; g < grid; ++g) {
      complex s{0, 0};
      for (std::uint64_t k = 0; k < n; ++k) {
        const double x = static_cast<double>(g) / grid + static_cast<double>(k) * sys.alpha.value();
        s += theta.at(k) * 2.0 * std::cos(2 * std::numbers::pi * x);
      }
      best = std::max(best, std::abs(s));
    }
    CHECK(r.max_raw == doctest::Approx(best).epsilon(1e-9));
  }
  SUBCASE("Thue-Morse within C N^0.8 ||f||_A") {
    const auto r = uniform_sup_birkhoff(WeightSequence::thue_morse(), id, FourierFunction::cosine(), sys, 1 << 16, 1024);
    CHECK(r.max_raw <= 4.0 * std::pow(65536.0, 0.8) * 2.0);
  }
  CHECK_THROWS_AS(uniform_sup_birkhoff(WeightSequence::thue_morse(), id, FourierFunction::cosine(), sys, 10, 32), SpecError);
}

TEST_CASE("squares averages") {
  const auto tm = WeightSequence::thue_morse();
  CHECK(std::abs(squares_average(tm, TorusPoint{}, 1 << 20).value) < 0.01);
  const auto sqrt2 = squares_average(tm, Irrational::named("sqrt2").fraction(), 1000000);
  CHECK(std::abs(sqrt2.value) < 0.02);
  const auto third = squares_average(tm, TorusPoint::from_ratio(1, 3), 100000);
  CHECK(std::abs(third.value) == doctest::Approx(static_cast<double>(squares_oracle_rational(1, 3, 100000))).epsilon(1e-9));
  CHECK(third.curve.back().n == 100000);
  CHECK(third.curve.front().n == 1);
}

TEST_CASE("van der Corput inequality") {
  const std::vector<complex> ones(100, 1.0);
  const auto r = van_der_corput_check(ones, 9);
  CHECK(r.lhs == doctest::Approx(1.0));
  CHECK(r.rhs >= 1.0);
  CHECK(r.pass);
  CHECK_THROWS_AS(van_der_corput_check(ones, 100), SpecError);

  CounterRng rng(1, 0);
  std::vector<complex> random(1000);
  for (auto& g : random) g = unit(rng.uniform());
  CHECK(van_der_corput_check(random, 31).pass);

  const auto alpha = Irrational::named("golden").fraction();
  std::vector<complex> tm(10000);
  for (std::uint64_t k = 0; k < tm.size(); ++k) {
    tm[k] = WeightSequence::thue_morse().at(k) * unit(alpha * (k * k));
  }
  const auto t = van_der_corput_check(tm, 63);
  CHECK(t.pass);
  CHECK(t.first_term <= 2.0 / 64.0);
  CHECK(t.first_term == doctest::Approx((10000.0 + 63.0) / (10000.0 * 64.0)));

  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(rng.range(1, 120));
    std::vector<complex> g(n);
    for (auto& z : g) z = rng.uniform() * unit(rng.uniform());
    REQUIRE(van_der_corput_check(g, static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(n) - 1))).pass);
  }
}

TEST_CASE("CLT harness") {
  const auto sys = rotation("golden");
  SUBCASE("iid mode recovers the classical CLT") {
    CltConfig cfg;
    cfg.kind = ThetaKind::iid;
    cfg.n = 10000;
    cfg.trials = 2000;
    cfg.beta = 0.5;
    cfg.seed = 42;
    const auto r = clt_experiment(cfg, sys, IndexSequence::identity());
    CHECK(r.ks < 0.05);
    CHECK(r.variance == doctest::Approx(1.0).epsilon(0.1));
  }
  SUBCASE("degenerate variance") {
    CltConfig cfg;
    cfg.base = WeightSequence::constant(1.0);
    cfg.f = FourierFunction::constant(1.0);
    cfg.trials = 100;
    cfg.n = 1000;
    CHECK_THROWS_AS(clt_experiment(cfg, sys, IndexSequence::identity()), ComputationError);
  }
  SUBCASE("H4 contract") {
    CltConfig cfg;
    cfg.trials = 100;
    cfg.n = 1024;
    CHECK_THROWS_AS(clt_experiment(cfg, sys, IndexSequence::log_shift()), SpecError);
    const std::vector<std::uint64_t> ns{256, 1024, 4096, 16384};
    const auto h4 = h4_report(IndexSequence::log_shift(), 1.0, ns);
    const auto r = clt_experiment(cfg, sys, IndexSequence::log_shift(), h4);
    REQUIRE(r.sigma);
    CHECK(*r.sigma > 0.0);
    cfg.trials = 50;
    CHECK_THROWS_AS(clt_experiment(cfg, sys, IndexSequence::identity()), SpecError);
  }
  SUBCASE("surrogate is labelled") {
    const auto f = FourierFunction::surrogate(sys.alpha, 0.85);
    CHECK(f.label() == "surrogate");
    CHECK(f.terms().front().frequency == 1);
    CHECK(f.terms().size() % 2 == 0);
  }
}

TEST_CASE("ks distance") {
  std::vector<double> z;
  for (int i = 1; i < 1000; ++i) {
    // Normal quantiles at i/1000 by bisection on erfc.
    double lo = -10, hi = 10;
    for (int it = 0; it < 100; ++it) {
      const double mid = (lo + hi) / 2;
      (0.5 * std::erfc(-mid / std::sqrt(2.0)) < i / 1000.0 ? lo : hi) = mid;
    }
    z.push_back(lo);
  }
  CHECK(ks_normal(z) < 0.002);
}

TEST_CASE("phi-weighted averages") {
  const QMultSeq tm(thue_morse_skeleton());
  const FourierFunction e1({{1, 1.0}});
  const auto sys = rotation("golden");
  const std::map<std::int64_t, complex> identity{{0, 1.0}, {1, -1.0}};
  CHECK(std::abs(phi_weighted_average(tm, identity, e1, sys, 1000000).value) < 0.01);
  const std::map<std::int64_t, complex> one{{0, 1.0}, {1, 1.0}};
  const auto r = phi_weighted_average(tm, one, e1, sys, 1000000);
  CHECK(std::abs(r.value) < 1e-5);
  const auto dirichlet = std::abs((1.0 - unit(sys.alpha.fraction() * std::uint64_t{1000000})) /
                                  (1.0 - unit(sys.alpha.fraction()))) / 1e6;
  CHECK(std::abs(r.value) == doctest::Approx(dirichlet).epsilon(1e-6));
  const std::map<std::int64_t, complex> partial{{0, 1.0}};
  CHECK_THROWS_AS(phi_weighted_average(tm, partial, e1, sys, 10), SpecError);

  SkeletonSpec ones;
  ones.q = 2;
  ones.r = 2;
  ones.period = {{0, 0}};
  const auto flat = phi_weighted_average(QMultSeq(ones), identity, e1, sys, 100000);
  CHECK(std::abs(flat.value) < 1e-3);
  CHECK(flat.curve.back().magnitude < flat.curve.front().magnitude);
}

TEST_CASE("beta threshold") { CHECK(beta_threshold(0.79) == doctest::Approx(0.93)); }
