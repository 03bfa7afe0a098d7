#pragma once

// Structural conditions on finitely valued q-multiplicative sequences:
// the resonance sets M and I, the density alpha of I, the pair constant s
// bounding |A_n A_{n+1}|^{1/2} outside I, and the exponent bounds derived
// from them.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "detergo/seqcore.hpp"

namespace detergo {

/// b_{n,j} = rows[n][j] / r.
struct BTable {
  int q = 2;
  std::int64_t r = 1;
  std::vector<SkeletonRow> rows;
};
BTable b_values(const QMultSeq& seq, std::size_t levels);

/// n in M: b_{n,j} == j b_{n,1} (mod 1) for every j.
bool in_resonant_set(const SkeletonRow& row, std::int64_t r);
/// n in I, decided by the exact congruences on the rows of levels n, n+1.
bool in_coherent_set(const SkeletonRow& row, const SkeletonRow& next, int q, std::int64_t r);

struct ResonanceReport {
  std::size_t horizon = 0;
  std::vector<bool> resonant;                 ///< n in M, n < horizon
  std::vector<std::uint64_t> coherent;        ///< I_N
  std::vector<double> density;                ///< card I_n / n for n = 1..horizon
  double alpha_hat = 0.0;                     ///< max density over n in [horizon/2, horizon]
  /// x_n numerators over r (x_n = 1 - b_{n,1} mod 1) for n in M.
  std::vector<std::optional<std::int64_t>> peak_points;
  /// The route through q x_n == x_{n+1} reproduced I exactly.
  bool peak_route_agrees = true;
};
ResonanceReport resonance_sets(const QMultSeq& seq, std::size_t horizon);

/// |B_n . E_0(x_n)| for n in M (equals q).
double peak_modulus(const QMultSeq& seq, std::size_t level);

struct PairSup {
  SkeletonRow first;
  SkeletonRow second;
  std::size_t level = 0;   ///< first level where the pair occurs
  double sup = 0.0;        ///< grid value of sup_x |A_n A_{n+1}|^{1/2}
  double slack = 0.0;      ///< certified: true sup <= sup + slack
  std::uint64_t grid = 0;
};
/// sup over y of |B.E_0(y)| |B'.E_0(q y)|, square-rooted, on a grid refined
/// until the second-derivative slack is below `tolerance`.
PairSup pair_sup(const SkeletonRow& first, const SkeletonRow& second, int q, std::int64_t r,
                 double tolerance = 1e-6);

struct TauxBound {
  double s = 0.0;
  double s_upper_slack = 0.0;
  double alpha = 0.0;
  double delta_bound = 0.0;   ///< alpha + (1 - alpha) log(s + slack) / log q
  std::optional<double> q2r2_linear_bound;  ///< 0.82 - 0.18 alpha, when q = r = 2
  std::vector<PairSup> pair_types;
};
/// Enumerates the distinct (row_n, row_{n+1}) pairs with n outside I over
/// one skeleton period plus one level. Throws ComputationError when
/// alpha_hat == 1 or when a pair outside I reaches q.
TauxBound taux_bound(const QMultSeq& seq, const ResonanceReport& report,
                     double tolerance = 1e-6);

struct WindowConstants {
  double rho = 0.0;
  double constant = 0.0;
};
/// From sup |V_N| <= C N^delta to windowed sums bounded by
/// (2q + C q^delta) N^{(1+delta)/2}.
WindowConstants h1_to_h2(double delta, int q, double c);

struct H3Result {
  int gamma = 2;
  std::vector<double> values;  ///< normalized block mass per N = 1..n_max
  double running_sup = 0.0;
  double bound = 0.0;
  bool pass = true;
};
H3Result h3_check(const std::function<double(std::uint64_t)>& magnitude, int gamma,
                  std::uint64_t n_max, std::optional<double> bound = std::nullopt);
H3Result h3_check(const WeightSequence& theta, int gamma, std::uint64_t n_max,
                  std::optional<double> bound = std::nullopt);

}  // namespace detergo
