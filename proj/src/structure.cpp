#include "detergo/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "detergo/errors.hpp"
#include "detergo/parallel.hpp"

namespace detergo {
namespace {

std::int64_t mod(std::int64_t a, std::int64_t r) {
  a %= r;
  return a < 0 ? a + r : a;
}

std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t r) {
  return static_cast<std::int64_t>(mod(static_cast<std::int64_t>((static_cast<__int128>(a) * b) % r), r));
}

}  // namespace

BTable b_values(const QMultSeq& seq, std::size_t levels) {
  BTable t{seq.q(), seq.r(), {}};
  t.rows.reserve(levels);
  for (std::size_t n = 0; n < levels; ++n) t.rows.push_back(seq.row(n));
  return t;
}

bool in_resonant_set(const SkeletonRow& row, std::int64_t r) {
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (mod(row[j] - mulmod(static_cast<std::int64_t>(j), row[1], r), r) != 0) return false;
  }
  return true;
}

bool in_coherent_set(const SkeletonRow& row, const SkeletonRow& next, int q, std::int64_t r) {
  if (!in_resonant_set(row, r)) return false;
  for (std::size_t j = 0; j < next.size(); ++j) {
    const auto target = mulmod(static_cast<std::int64_t>(j) * q % r, row[1], r);
    if (mod(next[j] - target, r) != 0) return false;
  }
  return true;
}

ResonanceReport resonance_sets(const QMultSeq& seq, std::size_t horizon) {
  if (horizon < 2) throw SpecError("resonance horizon must be at least 2");
  const auto q = seq.q();
  const auto r = seq.r();
  ResonanceReport rep;
  rep.horizon = horizon;
  rep.resonant.resize(horizon + 1);
  rep.peak_points.resize(horizon + 1);
  for (std::size_t n = 0; n <= horizon; ++n) {
    rep.resonant[n] = in_resonant_set(seq.row(n), r);
    if (rep.resonant[n]) rep.peak_points[n] = mod(-seq.row(n)[1], r);
  }
  std::size_t count = 0;
  rep.density.reserve(horizon);
  for (std::size_t n = 0; n < horizon; ++n) {
    const bool coherent = in_coherent_set(seq.row(n), seq.row(n + 1), q, r);
    const bool via_peaks = rep.resonant[n] && rep.resonant[n + 1] &&
                           mod(q * *rep.peak_points[n] - *rep.peak_points[n + 1], r) == 0;
    if (coherent != via_peaks) rep.peak_route_agrees = false;
    if (coherent) {
      rep.coherent.push_back(n);
      ++count;
    }
    rep.density.push_back(static_cast<double>(count) / static_cast<double>(n + 1));
  }
  rep.resonant.resize(horizon);
  rep.peak_points.resize(horizon);
  for (std::size_t n = horizon / 2; n <= horizon; ++n) {
    if (n >= 1) rep.alpha_hat = std::max(rep.alpha_hat, rep.density[n - 1]);
  }
  return rep;
}

double peak_modulus(const QMultSeq& seq, std::size_t level) {
  const auto& row = seq.row(level);
  if (!in_resonant_set(row, seq.r())) throw SpecError("level is not in M");
  const TorusPoint x = TorusPoint::from_ratio(-row[1], seq.r());
  complex sum{0.0, 0.0};
  for (int j = 0; j < seq.q(); ++j) {
    sum += unit(TorusPoint::from_ratio(row[j], seq.r()) + x * static_cast<std::uint64_t>(j));
  }
  return std::abs(sum);
}

PairSup pair_sup(const SkeletonRow& first, const SkeletonRow& second, int q, std::int64_t r,
                 double tolerance) {
  if (!(tolerance > 0.0)) throw SpecError("pair_sup tolerance must be positive");
  // F(y) = B.E_0(y) * B'.E_0(q y) = sum_{j,l<q} e((b_j + b'_l)/r) e((j + q l) y);
  // j + q l runs over 0..q^2-1 without repetition.
  const std::size_t degree = static_cast<std::size_t>(q) * static_cast<std::size_t>(q);
  std::vector<complex> coeff(degree);
  for (int j = 0; j < q; ++j) {
    for (int l = 0; l < q; ++l) {
      coeff[static_cast<std::size_t>(j + q * l)] = unit(TorusPoint::from_ratio(first[j] + second[l], r));
    }
  }
  // G = |F|^2 = sum_m g_m e(m y); |G''| <= 4 pi^2 sum m^2 |g_m|.
  double curvature = 0.0;
  for (std::size_t m = 1; m < degree; ++m) {
    complex g{0.0, 0.0};
    for (std::size_t d = 0; d + m < degree; ++d) g += coeff[d + m] * std::conj(coeff[d]);
    curvature += 2.0 * static_cast<double>(m * m) * std::abs(g);
  }
  curvature *= 4.0 * std::numbers::pi * std::numbers::pi;

  PairSup out;
  out.first = first;
  out.second = second;
  for (std::uint64_t grid = 1ULL << 14;; grid *= 2) {
    const double h = 1.0 / static_cast<double>(grid);
    const std::size_t chunks = 64;
    std::vector<double> chunk_max(chunks, 0.0);
    parallel_chunks(grid, chunks, [&](std::size_t c, std::size_t b, std::size_t e) {
      double best = 0.0;
      for (std::size_t m = b; m < e; ++m) {
        const TorusPoint y = TorusPoint::from_ratio(static_cast<std::int64_t>(m), static_cast<std::int64_t>(grid));
        complex f{0.0, 0.0};
        for (std::size_t d = 0; d < degree; ++d) f += coeff[d] * unit(y * static_cast<std::uint64_t>(d));
        best = std::max(best, std::norm(f));
      }
      chunk_max[c] = best;
    });
    const double g_max = *std::max_element(chunk_max.begin(), chunk_max.end());
    // Linear interpolation between grid points plus the curvature term.
    const double g_upper = g_max + curvature * h * h / 8.0;
    out.sup = std::pow(g_max, 0.25);
    out.slack = std::pow(g_upper, 0.25) - out.sup;
    out.grid = grid;
    if (out.slack <= tolerance || grid >= (1ULL << 24)) break;
  }
  return out;
}

TauxBound taux_bound(const QMultSeq& seq, const ResonanceReport& report, double tolerance) {
  if (report.alpha_hat >= 1.0) {
    throw ComputationError("Condition (C) fails: the coherent set I has density 1");
  }
  const auto q = seq.q();
  const auto r = seq.r();
  std::size_t levels = seq.spec().preperiod.size() + seq.spec().period.size() + 1;
  if (seq.finite_prefix()) levels = seq.spec().preperiod.size() - 1;

  TauxBound out;
  out.alpha = report.alpha_hat;
  std::vector<std::pair<SkeletonRow, SkeletonRow>> seen;
  std::vector<std::size_t> first_level;
  for (std::size_t n = 0; n < levels; ++n) {
    const auto& a = seq.row(n);
    const auto& b = seq.row(n + 1);
    if (in_coherent_set(a, b, q, r)) continue;
    const auto key = std::make_pair(a, b);
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    first_level.push_back(n);
  }
  if (seen.empty()) throw ComputationError("no pair types outside I within one period");
  out.pair_types.resize(seen.size());
  parallel_for(seen.size(), [&](std::size_t i) {
    out.pair_types[i] = pair_sup(seen[i].first, seen[i].second, q, r, tolerance);
    out.pair_types[i].level = first_level[i];
  });
  double s_upper = 0.0;
  for (const auto& p : out.pair_types) {
    if (p.sup >= static_cast<double>(q) * (1.0 - 1e-12)) {
      throw ComputationError("pair outside I at level " + std::to_string(p.level) +
                             " reaches q; coherent-set classification is inconsistent");
    }
    if (p.sup > out.s) {
      out.s = p.sup;
    }
    s_upper = std::max(s_upper, p.sup + p.slack);
  }
  out.s_upper_slack = s_upper - out.s;
  out.delta_bound = out.alpha + (1.0 - out.alpha) * std::log(s_upper) / std::log(static_cast<double>(q));
  if (q == 2 && r == 2) out.q2r2_linear_bound = 0.82 - 0.18 * out.alpha;
  return out;
}

WindowConstants h1_to_h2(double delta, int q, double c) {
  if (!(delta > 0.0 && delta < 1.0)) throw SpecError("delta must lie in (0, 1)");
  return {(1.0 + delta) / 2.0, 2.0 * q + c * std::pow(static_cast<double>(q), delta)};
}

H3Result h3_check(const std::function<double(std::uint64_t)>& magnitude, int gamma,
                  std::uint64_t n_max, std::optional<double> bound) {
  if (gamma < 2) throw SpecError("gamma must be at least 2");
  H3Result out;
  out.gamma = gamma;
  out.bound = bound.value_or(std::pow(2.0, gamma));
  const auto ipow = [gamma](std::uint64_t n) {
    std::uint64_t p = 1;
    for (int i = 0; i < gamma; ++i) p *= n;
    return p;
  };
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    double mass = 0.0;
    for (std::uint64_t k = ipow(n); k < ipow(n + 1); ++k) mass += magnitude(k);
    const double v = mass / std::pow(static_cast<double>(n), gamma - 1);
    out.values.push_back(v);
    out.running_sup = std::max(out.running_sup, v);
  }
  out.pass = out.running_sup <= out.bound;
  return out;
}

H3Result h3_check(const WeightSequence& theta, int gamma, std::uint64_t n_max,
                  std::optional<double> bound) {
  return h3_check([&](std::uint64_t k) { return std::abs(theta.at(k)); }, gamma, n_max, bound);
}

}  // namespace detergo
