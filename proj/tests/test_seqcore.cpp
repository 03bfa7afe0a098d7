#include <doctest.h>

#include <bit>
#include <cmath>

#include "detergo/errors.hpp"
#include "detergo/random.hpp"
#include "detergo/seqcore.hpp"
#include "detergo/spec_io.hpp"

using namespace detergo;

namespace {

int tm_sign(std::uint64_t n) { return std::popcount(n) % 2 == 0 ? 1 : -1; }

// Rudin-Shapiro by its recursion r(2n) = r(n), r(2n+1) = (-1)^n r(n).
int rs_recursive(std::uint64_t n) {
  if (n == 0) return 1;
  const int inner = rs_recursive(n / 2);
  return (n % 2 == 1 && (n / 2) % 2 == 1) ? -inner : inner;
}

QMultSeq one_j() {
  SkeletonSpec spec;
  spec.q = 2;
  spec.r = 3;
  spec.period = {{0, 1}};
  return QMultSeq(spec);
}

}  // namespace

TEST_CASE("unit roots are exact") {
  const UnitRoot a(5, 3), b(-1, 3);
  CHECK(a.num() == 2);
  CHECK(b.num() == 2);
  CHECK((a * b).num() == 1);
  CHECK(a.pow(4).num() == 2);
  CHECK_THROWS_AS(UnitRoot(1, 2) * UnitRoot(1, 3), SpecError);
  CHECK(std::abs(UnitRoot(1, 4).value() - complex(0, 1)) < 1e-15);
}

TEST_CASE("rational parsing normalizes commas and reduces") {
  CHECK(Rational::parse("0,82") == Rational{41, 50});
  CHECK(Rational::parse("6/8") == Rational{3, 4});
  CHECK(Rational::parse("-2") == Rational{-2, 1});
  CHECK_THROWS_AS(Rational::parse("1/0"), SpecError);
  CHECK_THROWS_AS(Rational::parse("abc"), SpecError);
}

TEST_CASE("Thue-Morse skeleton matches binary digit parity") {
  const QMultSeq tm(thue_morse_skeleton());
  for (std::uint64_t n = 0; n < 10000; ++n) {
    REQUIRE(std::lround(tm.at(n).value().real()) == tm_sign(n));
  }
}

TEST_CASE("skeleton validation names the offending row") {
  SkeletonSpec spec;
  spec.q = 2;
  spec.r = 3;
  spec.period = {{0, 1}, {1, 1}};
  CHECK_THROWS_WITH_AS(QMultSeq{spec}, doctest::Contains("period row 1: first entry must be 0"), SpecError);
  spec.period = {{0, 3}};
  CHECK_THROWS_WITH_AS(QMultSeq{spec}, doctest::Contains("outside [0, 3)"), SpecError);
  spec.period = {{0, 1, 2}};
  CHECK_THROWS_WITH_AS(QMultSeq{spec}, doctest::Contains("length 3 != q = 2"), SpecError);
  spec.period = {};
  spec.preperiod = {{0, 1}};
  const QMultSeq finite(spec);
  CHECK(finite.finite_prefix());
  CHECK_THROWS_AS((void)finite.row(1), std::out_of_range);
}

TEST_CASE("q-multiplicativity holds on random skeletons") {
  CounterRng rng(3, 0);
  for (int trial = 0; trial < 30; ++trial) {
    SkeletonSpec spec;
    spec.q = static_cast<int>(rng.range(2, 5));
    spec.r = rng.range(2, 7);
    for (int i = 0; i < 2; ++i) {
      SkeletonRow row{0};
      for (int j = 1; j < spec.q; ++j) row.push_back(rng.range(0, spec.r - 1));
      spec.period.push_back(row);
    }
    const QMultSeq seq(spec);
    for (int s = 0; s < 200; ++s) {
      std::uint64_t qt = 1;
      const auto t = rng.range(0, 6);
      for (int i = 0; i < t; ++i) qt *= static_cast<std::uint64_t>(spec.q);
      const auto a = static_cast<std::uint64_t>(rng.range(0, 50));
      const auto b = static_cast<std::uint64_t>(rng.range(0, static_cast<std::int64_t>(qt) - 1));
      REQUIRE(seq.at(a * qt + b) == seq.at(a * qt) * seq.at(b));
    }
  }
}

TEST_CASE("star product and generalized Thue-Morse") {
  const std::vector<std::int64_t> nums{0, 1};
  const Word w = make_word(nums, 3);
  CHECK(format_word(star_product(w, w)) == "0 1 1 2");
  const std::vector<Word> blocks{w};
  const auto prefix = gtm_prefix(blocks, 10000);
  const auto seq = one_j();
  for (std::size_t k = 0; k < prefix.size(); ++k) REQUIRE(prefix[k] == seq.at(k));

  const std::vector<std::int64_t> bad{1, 0};
  CHECK_THROWS_AS(gtm_prefix({make_word(bad, 3)}, 8), SpecError);
}

TEST_CASE("substitution fixed point reproduces the skeleton sequence") {
  SkeletonSpec spec;
  spec.q = 3;
  spec.r = 4;
  spec.period = {{0, 1, 3}, {0, 2, 2}};
  const QMultSeq seq(spec);
  const auto sigma = to_substitution(seq);
  CHECK(sigma.length() == 9);
  const auto fixed = fixed_point_prefix(sigma, UnitRoot(0, 4), 10000);
  for (std::size_t k = 0; k < fixed.size(); ++k) {
    REQUIRE(fixed[k] == seq.at(k));
  }
  CHECK(fixed_point_at(sigma, UnitRoot(0, 4), 12345) == seq.at(12345));

  std::map<std::int64_t, Word> uneven{{0, make_word(std::vector<std::int64_t>{0, 1}, 2)},
                                      {1, make_word(std::vector<std::int64_t>{1}, 2)}};
  CHECK_THROWS_AS(Substitution(2, uneven), SpecError);
  SkeletonSpec pre = spec;
  pre.preperiod = {{0, 0, 0}};
  CHECK_THROWS_AS(to_substitution(QMultSeq(pre)), SpecError);
}

TEST_CASE("Rudin-Shapiro matches its recursion") {
  for (std::uint64_t n = 0; n < 4096; ++n) {
    REQUIRE(std::lround(rudin_shapiro(0.5, n).real()) == rs_recursive(n));
    REQUIRE(rudin_shapiro_exact(Rational{1, 2}, n).num() == (rs_recursive(n) == 1 ? 0 : 1));
  }
  CHECK(count_11_blocks(0b111) == 2);
  CHECK(count_11_blocks(0b1011) == 1);
}

TEST_CASE("weight sequence modifiers") {
  const auto tm = WeightSequence::thue_morse();
  const auto plus = tm.plus_split();
  const auto minus = tm.minus_split();
  const auto sq = tm.power(2);
  for (std::uint64_t n = 0; n < 256; ++n) {
    const double t = tm_sign(n);
    CHECK(plus.at(n).real() == doctest::Approx((1 + t) / 2));
    CHECK(minus.at(n).real() == doctest::Approx((1 - t) / 2));
    CHECK(sq.at(n).real() == doctest::Approx(1.0));
  }
  const auto shifted = tm.shifted(Beta::log());
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto beta = static_cast<std::uint64_t>(std::floor(std::log(static_cast<double>(k) + 1)));
    CHECK(shifted.at(k) == tm.at(k + beta));
  }
  CHECK(tm.root_order() == 2);
  CHECK(plus.unimodular() == false);
}

TEST_CASE("beta and index sequences") {
  CHECK(Beta::power(0.5).at(99) == 9);
  CHECK(Beta::power(0.5).at(100) == 10);
  CHECK_THROWS_AS(Beta::power(1.5), SpecError);
  CHECK_THROWS_AS(Beta::table({3, 2}), SpecError);
  CHECK(IndexSequence::squares().at(12) == 144);
  CHECK(IndexSequence::log_shift().at(10) == 12);
  CHECK(IndexSequence::polynomial({1, 2, 3}).at(2) == 17);
  CHECK_THROWS_AS(IndexSequence::polynomial({0, -1, 1}), SpecError);
  const auto pair = shift_compose(WeightSequence::thue_morse(), IndexSequence::identity(), Beta::power(0.5));
  CHECK(pair.indices.at(16) == 20);
  const auto jump = Beta::custom("drop", [](std::uint64_t k) { return k < 10 ? 5 : 0; });
  CHECK_THROWS_AS(shift_compose(WeightSequence::thue_morse(), IndexSequence::identity(), jump), SpecError);
}

TEST_CASE("smallest period agrees with brute force") {
  CounterRng rng(11, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto len = static_cast<std::size_t>(rng.range(1, 40));
    const auto p = static_cast<std::size_t>(rng.range(1, 6));
    std::vector<std::int64_t> s(len);
    for (std::size_t i = 0; i < len; ++i) s[i] = i < p ? rng.range(0, 2) : s[i - p];
    if (rng.range(0, 3) == 0) s[static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(len) - 1))] = 7;
    std::size_t brute = len;
    for (std::size_t q = 1; q <= len; ++q) {
      bool ok = true;
      for (std::size_t i = q; i < len && ok; ++i) ok = s[i] == s[i - q];
      if (ok) {
        brute = q;
        break;
      }
    }
    REQUIRE(smallest_period(s) == brute);
  }
}

TEST_CASE("Per(theta) on periodic and irreducible sequences") {
  CHECK(per_set(QMultSeq(thue_morse_skeleton()), 64, 4096).irreducible);
  SkeletonSpec alternating;
  alternating.q = 2;
  alternating.r = 2;
  alternating.preperiod = {{0, 1}};
  alternating.period = {{0, 0}};
  const auto per = per_set(QMultSeq(alternating), 8, 64);
  CHECK_FALSE(per.irreducible);
  CHECK(per.periodic_powers.count(1) == 1);
  // theta^2 = 1 for a fourth root of unity of the form e(2 s(n) / 4).
  SkeletonSpec squared;
  squared.q = 2;
  squared.r = 4;
  squared.period = {{0, 2}};
  const auto per4 = per_set(QMultSeq(squared), 8, 256);
  CHECK(per4.periodic_powers == std::set<std::int64_t>{2});
  CHECK_THROWS_AS(per_set(QMultSeq(thue_morse_skeleton()), 10, 15), SpecError);
}

TEST_CASE("H4 reports") {
  const std::vector<std::uint64_t> ns{256, 1024, 4096, 16384, 65536};
  const auto id = h4_report(IndexSequence::identity(), 1.0, ns);
  CHECK(id.exact);
  const auto ls = h4_report(IndexSequence::log_shift(), 1.0, ns);
  CHECK_FALSE(ls.violated);
  CHECK(ls.sigma > 0.8);
  CHECK(h4_report(IndexSequence::polynomial({0, 2}), 0.5, ns).violated);
  CHECK_THROWS_AS(h4_report(IndexSequence::identity(), 1.5, ns), SpecError);
}

TEST_CASE("spec documents") {
  const auto tm = parse_weight_spec(json::parse(R"({"type":"thue_morse","split":"plus"})"));
  CHECK(tm.at(1).real() == doctest::Approx(0.0));
  CHECK_THROWS_WITH_AS(parse_weight_spec(json::parse(R"({"type":"qmult","q":2,"r":2,"skeleton":{"period":[[1,0]]}})")),
                       doctest::Contains("qmult.skeleton: period row 0"), SpecError);
  CHECK_THROWS_WITH_AS(parse_weight_spec(json::parse(R"({"type":"thue_morse","colour":1})")),
                       doctest::Contains("unknown field 'colour'"), SpecError);
  const auto gtm = qmult_from_spec(json::parse(R"({"type":"gtm","r":3,"blocks":[[0,1]]})"));
  REQUIRE(gtm);
  CHECK(gtm->at(3).num() == 2);
  const auto rs = parse_weight_spec(json::parse(R"({"type":"rudin_shapiro","t":"1/2"})"));
  CHECK(rs.exact_at(3)->num() == 1);
  CHECK(parse_index_spec(json::parse(R"({"type":"beta_shift","beta":"pow","gamma":0.5})")).at(16) == 20);
  CHECK(resolve_spec_argument("thue_morse") == json{{"type", "thue_morse"}});
  CHECK_THROWS_AS(resolve_spec_argument("/nonexistent/spec.json"), SpecError);
}
