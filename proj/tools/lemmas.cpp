#include "lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "detergo/dynamics.hpp"
#include "detergo/expsum.hpp"
#include "detergo/parallel.hpp"
#include "detergo/random.hpp"

namespace detergo::cli {

namespace {

constexpr std::uint64_t kVdcStream = 1ULL << 40;
constexpr std::uint64_t kShiftedStream = 2ULL << 40;
constexpr std::uint64_t kProductStream = 3ULL << 40;

SkeletonRow random_row(CounterRng& rng, int q, std::int64_t r) {
  SkeletonRow row(static_cast<std::size_t>(q));
  row[0] = 0;
  for (int j = 1; j < q; ++j) row[static_cast<std::size_t>(j)] = rng.range(0, r - 1);
  return row;
}

/// Per-instance outcome; reduced in index order afterwards.
struct Outcome {
  bool pass = true;
  double score = 0.0;
  json witness;
};

SuiteResult reduce(std::string name, const std::vector<Outcome>& outcomes, bool smallest) {
  SuiteResult r;
  r.name = std::move(name);
  r.instances = outcomes.size();
  r.worst = smallest ? std::numeric_limits<double>::infinity() : 0.0;
  for (const auto& o : outcomes) {
    r.worst = smallest ? std::min(r.worst, o.score) : std::max(r.worst, o.score);
    if (!o.pass) {
      if (r.failures == 0) r.witness = o.witness.dump();
      ++r.failures;
    }
  }
  if (outcomes.empty()) r.worst = 0.0;
  return r;
}

}  // namespace

QMultSeq random_qmult(std::uint64_t seed, std::uint64_t stream, int max_q, int max_r) {
  CounterRng rng(seed, stream);
  SkeletonSpec spec;
  spec.q = static_cast<int>(rng.range(2, max_q));
  spec.r = rng.range(2, max_r);
  const auto pre = rng.range(0, 2);
  const auto per = rng.range(1, 3);
  for (std::int64_t i = 0; i < pre; ++i) spec.preperiod.push_back(random_row(rng, spec.q, spec.r));
  for (std::int64_t i = 0; i < per; ++i) spec.period.push_back(random_row(rng, spec.q, spec.r));
  return QMultSeq(std::move(spec));
}

SuiteResult vdc_suite(std::uint64_t seed, std::size_t instances) {
  std::vector<Outcome> outcomes(instances);
  parallel_for(instances, [&](std::size_t i) {
    CounterRng rng(seed, kVdcStream + i);
    const auto n = static_cast<std::size_t>(rng.range(1, 400));
    const auto h = static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(n) - 1));
    const bool unimodular = (i % 2) == 0;
    std::vector<complex> gamma(n);
    for (auto& g : gamma) {
      const double modulus = unimodular ? 1.0 : rng.uniform();
      g = modulus * unit(rng.uniform());
    }
    const auto res = van_der_corput_check(gamma, h);
    outcomes[i].pass = res.pass;
    outcomes[i].score = res.rhs - res.lhs;
    if (!res.pass) {
      outcomes[i].witness = json{{"instance", i}, {"N", n}, {"H", h}, {"lhs", res.lhs}, {"rhs", res.rhs}};
    }
  });
  return reduce("van_der_corput", outcomes, true);
}

SuiteResult shifted_sum_suite(std::uint64_t seed, std::size_t instances) {
  std::vector<Outcome> outcomes(instances);
  parallel_for(instances, [&](std::size_t i) {
    CounterRng rng(seed, kShiftedStream + i);
    const auto seq = random_qmult(seed, kShiftedStream + (1ULL << 32) + i);
    const int t_max = seq.q() == 2 ? 8 : (seq.q() == 3 ? 5 : 4);
    const int t = static_cast<int>(rng.range(0, t_max));
    const auto n = static_cast<std::uint64_t>(rng.range(1, 1500));
    const auto p = static_cast<std::uint64_t>(rng.range(0, 100000));
    const auto res = shifted_sum_check(seq, n, p, t, 4, counter_hash(seed, kShiftedStream, i));
    outcomes[i].pass = res.pass;
    outcomes[i].score = res.worst_margin;
    if (!res.pass) {
      outcomes[i].witness = json{{"instance", i}, {"sequence", skeleton_to_json(seq.spec())},
                                 {"N", n}, {"p", p}, {"t", t}, {"x", res.witness_x},
                                 {"lhs", res.lhs}, {"rhs", res.rhs}};
    }
  });
  return reduce("shifted_sum", outcomes, true);
}

SuiteResult product_formula_suite(std::uint64_t seed, std::size_t instances) {
  std::vector<Outcome> outcomes(instances);
  parallel_for(instances, [&](std::size_t i) {
    CounterRng rng(seed, kProductStream + i);
    const auto seq = random_qmult(seed, kProductStream + (1ULL << 32) + i, 4, 6);
    std::size_t max_level = 0;
    for (std::uint64_t size = static_cast<std::uint64_t>(seq.q());
         max_level < 12 && size <= (1ULL << 16); size *= static_cast<std::uint64_t>(seq.q())) {
      ++max_level;
    }
    const auto level = static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(max_level)));
    std::uint64_t n = 1;
    for (std::size_t l = 0; l < level; ++l) n *= static_cast<std::uint64_t>(seq.q());
    const TorusPoint x = TorusPoint::from_double(rng.uniform());
    const complex product = qmult_block_sum(seq, level, x);
    CompensatedSum direct;
    for (std::uint64_t k = 0; k < n; ++k) direct.add(seq.at(k).value() * unit(x * k));
    const double ratio = std::abs(product - direct.value()) / static_cast<double>(n);
    outcomes[i].pass = ratio <= 1e-9;
    outcomes[i].score = ratio;
    if (!outcomes[i].pass) {
      outcomes[i].witness = json{{"instance", i}, {"sequence", skeleton_to_json(seq.spec())},
                                 {"level", level}, {"x", x.value()}, {"error_over_qN", ratio}};
    }
  });
  return reduce("product_formula", outcomes, false);
}

json to_json(const SuiteResult& r) {
  json j{{"instances", r.instances}, {"failures", r.failures}, {"worst", r.worst}};
  if (!r.witness.empty()) j["witness"] = json::parse(r.witness);
  return j;
}

}  // namespace detergo::cli
