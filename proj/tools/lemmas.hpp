#pragma once

// Randomized property suites for the inequalities and identities that hold
// unconditionally: van der Corput, the shifted-sum bound, and the product
// formula for q-multiplicative sums. Instance i draws from counter stream i,
// so outcomes are independent of thread count.

#include <cstdint>
#include <string>

#include "detergo/seqcore.hpp"
#include "detergo/spec_io.hpp"

namespace detergo::cli {

struct SuiteResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double worst = 0.0;       ///< smallest margin (vdc, shifted) or largest error ratio (product)
  std::string witness;      ///< first failing instance, as JSON
};

/// Random finitely valued q-multiplicative sequence with q in [2, max_q],
/// r in [2, max_r], preperiod <= 2 rows and period 1..3 rows.
QMultSeq random_qmult(std::uint64_t seed, std::uint64_t stream, int max_q = 5, int max_r = 6);

SuiteResult vdc_suite(std::uint64_t seed, std::size_t instances);
SuiteResult shifted_sum_suite(std::uint64_t seed, std::size_t instances);
/// Levels are capped at 12 and q^level at 2^16 so that the direct sum stays cheap.
SuiteResult product_formula_suite(std::uint64_t seed, std::size_t instances);

json to_json(const SuiteResult& r);

}  // namespace detergo::cli
