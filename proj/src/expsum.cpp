#include "detergo/expsum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "detergo/errors.hpp"
#include "detergo/fit.hpp"
#include "detergo/parallel.hpp"
#include "detergo/random.hpp"
#include "grid.hpp"

namespace detergo {

// ---------------------------------------------------------------- plain sums

complex weighted_exp_sum_range(const WeightSequence& theta, const IndexSequence& u,
                               std::uint64_t begin, std::uint64_t end, TorusPoint x) {
  CompensatedSum sum;
  for (std::uint64_t k = begin; k < end; ++k) sum.add(theta.at(k) * unit(x * u.at(k)));
  return sum.value();
}

complex weighted_exp_sum(const WeightSequence& theta, const IndexSequence& u, std::uint64_t n,
                         TorusPoint x) {
  return weighted_exp_sum_range(theta, u, 0, n, x);
}

complex weighted_exp_sum(const WeightSequence& theta, const IndexSequence& u, std::uint64_t n,
                         double x) {
  return weighted_exp_sum(theta, u, n, TorusPoint::from_double(x));
}

complex block_factor(const QMultSeq& seq, std::size_t level, TorusPoint x) {
  TorusPoint scaled = x;
  for (std::size_t i = 0; i < level; ++i) scaled = scaled * static_cast<std::uint64_t>(seq.q());
  const auto& row = seq.row(level);
  complex a{0.0, 0.0};
  for (int j = 0; j < seq.q(); ++j) {
    a += unit(TorusPoint::from_ratio(row[j], seq.r()) + scaled * static_cast<std::uint64_t>(j));
  }
  return a;
}

complex qmult_block_sum(const QMultSeq& seq, std::size_t level, TorusPoint x) {
  complex product{1.0, 0.0};
  TorusPoint scaled = x;  // q^n x
  for (std::size_t n = 0; n < level; ++n) {
    const auto& row = seq.row(n);
    complex a{0.0, 0.0};
    for (int j = 0; j < seq.q(); ++j) {
      a += unit(TorusPoint::from_ratio(row[j], seq.r()) + scaled * static_cast<std::uint64_t>(j));
    }
    product *= a;
    scaled = scaled * static_cast<std::uint64_t>(seq.q());
  }
  return product;
}

complex qmult_block_sum(const QMultSeq& seq, std::size_t level, double x) {
  return qmult_block_sum(seq, level, TorusPoint::from_double(x));
}

// ---------------------------------------------------------------- sup norm

std::string to_string(SupMode mode) { return mode == SupMode::fast ? "fast" : "certified"; }

namespace {

struct Candidate {
  double value;
  std::uint64_t m;
};

struct Refined {
  double value = 0.0;
  TorusPoint x;
};

/// Successive parabolic interpolation on |P| inside the cell around grid
/// point m, keeping a bracket [a, c] around the current best b.
Refined refine_cell(const detail::TermPolynomial& poly, TorusPoint center, double h) {
  const auto f = [&](double d) { return std::abs(poly.at(center + TorusPoint::from_double(d))); };
  double ta = -h, tb = 0.0, tc = h;
  double fa = f(ta), fb = f(tb), fc = f(tc);
  Refined best{fb, center};
  if (fa > best.value) best = {fa, center + TorusPoint::from_double(ta)};
  if (fc > best.value) best = {fc, center + TorusPoint::from_double(tc)};
  if (fa > fb || fc > fb) return best;
  for (int iter = 0; iter < 40; ++iter) {
    const double p = (tb - ta) * (tb - ta) * (fb - fc) - (tb - tc) * (tb - tc) * (fb - fa);
    const double qd = (tb - ta) * (fb - fc) - (tb - tc) * (fb - fa);
    if (!(qd > 0.0)) break;
    double t = tb - 0.5 * p / qd;
    if (!(t > ta && t < tc)) break;
    if (std::abs(t - tb) < 1e-12 * h) break;
    const double ft = f(t);
    if (ft > best.value) best = {ft, center + TorusPoint::from_double(t)};
    if (t > tb) {
      if (ft >= fb) {
        ta = tb, fa = fb, tb = t, fb = ft;
      } else {
        tc = t, fc = ft;
      }
    } else {
      if (ft >= fb) {
        tc = tb, fc = fb, tb = t, fb = ft;
      } else {
        ta = t, fa = ft;
      }
    }
    if (tc - ta < 1e-10 * h) break;
  }
  return best;
}

std::uint64_t fit_to_blocks(std::uint64_t grid) {
  return grid <= detail::kMaxBlock ? grid : std::bit_ceil(grid);
}

}  // namespace

SupReport sup_of_terms(std::span<const complex> weights, std::span<const std::uint64_t> indices,
                       const SupOptions& options) {
  if (weights.empty() || weights.size() != indices.size()) {
    throw SpecError("sup_norm needs at least one term");
  }
  if (options.mode == SupMode::certified && !(options.tolerance > 0.0)) {
    throw SpecError("certified mode needs a positive tolerance");
  }
  const std::uint64_t count = weights.size();
  std::vector<std::uint64_t> offsets(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (k > 0 && indices[k] < indices[k - 1]) throw SpecError("indices must be nondecreasing");
    offsets[k] = indices[k] - indices[0];
  }
  const std::uint64_t degree = offsets.back();
  const detail::TermPolynomial poly(weights, offsets);

  SupReport report;
  report.n = count;
  report.mode = options.mode;
  std::ostringstream note;

  // |d/dx P| <= 2 pi * count * degree, and every x is within 1/(2M) of the grid.
  const auto slack_for = [&](std::uint64_t grid) {
    return std::numbers::pi * static_cast<double>(degree) * static_cast<double>(count) /
           static_cast<double>(grid);
  };

  std::uint64_t coarse = std::max<std::uint64_t>(8 * count, 4096);
  if (degree + 1 > coarse) {
    // Distinct residues keep the grid mean square equal to sum |w_k|^2.
    coarse = std::bit_ceil(degree + 1);
    note << "grid enlarged to cover index degree; ";
  }
  coarse = fit_to_blocks(std::min(coarse, options.max_grid));

  std::uint64_t fine = coarse;
  if (options.mode == SupMode::certified) {
    while (slack_for(fine) > options.tolerance && fine * 2 <= options.max_grid) {
      fine = fit_to_blocks(fine * 2);
    }
    report.certified = slack_for(fine) <= options.tolerance;
    if (!report.certified) {
      report.mode = SupMode::fast;
      note << "certified grid would exceed cap " << options.max_grid << "; fast result with slack stated; ";
    }
  }

  // Coarse pass: candidate cells for refinement.
  std::vector<float> mags(coarse);
  double grid_max = -1.0;
  std::uint64_t grid_arg = 0;
  detail::grid_magnitudes(weights, offsets, coarse, options.grid_offset,
                          [&](std::uint64_t m, double v) {
                            mags[m] = static_cast<float>(v);
                            if (v > grid_max || (v == grid_max && m < grid_arg)) {
                              grid_max = v;
                              grid_arg = m;
                            }
                          });
  std::uint64_t grid_used = coarse;

  if (fine > coarse) {
    double fine_max = -1.0;
    std::uint64_t fine_arg = 0;
    detail::grid_magnitudes(weights, offsets, fine, options.grid_offset,
                            [&](std::uint64_t m, double v) {
                              if (v > fine_max || (v == fine_max && m < fine_arg)) {
                                fine_max = v;
                                fine_arg = m;
                              }
                            });
    grid_max = fine_max;
    grid_arg = fine_arg;
    grid_used = fine;
  }

  std::vector<Candidate> candidates;
  for (std::uint64_t m = 0; m < coarse; ++m) {
    const float prev = mags[(m + coarse - 1) % coarse];
    const float next = mags[(m + 1) % coarse];
    if (mags[m] >= prev && mags[m] > next) candidates.push_back({mags[m], m});
  }
  if (candidates.empty()) candidates.push_back({mags[0], 0});
  const std::size_t keep = std::min(candidates.size(), options.refine_cells);
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), [](const Candidate& a, const Candidate& b) {
                      return a.value > b.value || (a.value == b.value && a.m < b.m);
                    });
  candidates.resize(keep);
  std::vector<Refined> refined(keep);
  const double h = 1.0 / static_cast<double>(coarse);
  parallel_for(keep, [&](std::size_t i) {
    refined[i] = refine_cell(poly, detail::grid_point(candidates[i].m, coarse, options.grid_offset), h);
  });

  report.grid_size = grid_used;
  report.slack = slack_for(grid_used);
  report.lower = grid_max;
  report.argmax = detail::grid_point(grid_arg, grid_used, options.grid_offset).value();
  for (const auto& r : refined) {
    if (r.value > report.lower) {
      report.lower = r.value;
      report.argmax = r.x.value();
    }
  }
  report.upper = std::max(grid_max + report.slack, report.lower);
  report.note = note.str();
  return report;
}

SupReport sup_norm_range(const WeightSequence& theta, const IndexSequence& u,
                         std::uint64_t begin, std::uint64_t end, const SupOptions& options) {
  if (end <= begin) throw SpecError("sup_norm needs N >= 1");
  const auto w = theta.slice(begin, end);
  const auto idx = u.slice(begin, end);
  return sup_of_terms(w, idx, options);
}

SupReport sup_norm(const WeightSequence& theta, const IndexSequence& u, std::uint64_t n,
                   const SupOptions& options) {
  return sup_norm_range(theta, u, 0, n, options);
}

// ---------------------------------------------------------------- exponents

DeltaFit delta_fit(const WeightSequence& theta, const IndexSequence& u,
                   std::span<const std::uint64_t> ns, const SupOptions& options) {
  if (ns.size() < 5) throw SpecError("delta_fit needs at least five N values");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!std::has_single_bit(ns[i])) throw SpecError("delta_fit N values must be powers of two");
    if (i > 0 && ns[i] <= ns[i - 1]) throw SpecError("delta_fit N values must increase");
  }
  const std::uint64_t n_max = ns.back();
  const auto w = theta.prefix(n_max);
  const auto idx = u.slice(0, n_max);
  DeltaFit fit;
  std::vector<double> xs, ys;
  for (auto n : ns) {
    auto report = sup_of_terms(std::span(w).first(n), std::span(idx).first(n), options);
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(std::log(report.lower));
    fit.points.push_back(std::move(report));
  }
  const auto line = fit_line(xs, ys);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.residual = line.residual;
  return fit;
}

WindowReport window_exponent(const WeightSequence& theta, const IndexSequence& u,
                             std::span<const std::pair<std::uint64_t, std::uint64_t>> windows,
                             double epsilon) {
  WindowReport report;
  report.epsilon = epsilon;
  report.max_exponent = -std::numeric_limits<double>::infinity();
  report.max_raw_exponent = -std::numeric_limits<double>::infinity();
  for (const auto& [m, n] : windows) {
    if (n < m || n - m < 16) throw SpecError("window must satisfy n - m >= 16");
    const auto sup = sup_norm_range(theta, u, m, n + 1);
    WindowRow row;
    row.m = m;
    row.n = n;
    row.sup = sup.lower;
    const double len = std::log(static_cast<double>(n - m));
    row.raw_exponent = std::log(sup.lower) / len;
    row.exponent = (std::log(sup.lower) - epsilon * std::log(static_cast<double>(n))) / len;
    report.max_exponent = std::max(report.max_exponent, row.exponent);
    report.max_raw_exponent = std::max(report.max_raw_exponent, row.raw_exponent);
    report.rows.push_back(row);
  }
  return report;
}

// ---------------------------------------------------------------- shifted sums

ShiftedSumResult shifted_sum_check(const QMultSeq& seq, std::uint64_t n, std::uint64_t p, int t,
                                   std::size_t samples, std::uint64_t seed) {
  if (t < 0) throw SpecError("t must be nonnegative");
  ShiftedSumResult result;
  result.n = n;
  result.p = p;
  result.t = t;
  std::uint64_t block = 1;
  for (int i = 0; i < t; ++i) block *= static_cast<std::uint64_t>(seq.q());
  std::vector<complex> shifted(n), head(block);
  for (std::uint64_t k = 0; k < n; ++k) shifted[k] = seq.at(k + p).value();
  for (std::uint64_t k = 0; k < block; ++k) head[k] = seq.at(k).value();

  result.worst_margin = std::numeric_limits<double>::infinity();
  CounterRng rng(seed, counter_hash(n, p, static_cast<std::uint64_t>(t)));
  for (std::size_t s = 0; s < samples; ++s) {
    const TorusPoint x = TorusPoint::from_double(rng.uniform());
    CompensatedSum lhs_sum, head_sum;
    for (std::uint64_t k = 0; k < n; ++k) lhs_sum.add(shifted[k] * unit(x * (k + p)));
    for (std::uint64_t k = 0; k < block; ++k) head_sum.add(head[k] * unit(x * k));
    const double lhs = std::abs(lhs_sum.value());
    const double rhs = 2.0 * static_cast<double>(block) +
                       static_cast<double>(n) / static_cast<double>(block) * std::abs(head_sum.value());
    const double margin = rhs - lhs;
    if (margin < result.worst_margin) {
      result.worst_margin = margin;
      result.witness_x = x.value();
      result.lhs = lhs;
      result.rhs = rhs;
    }
  }
  if (samples == 0) result.worst_margin = 0.0;
  result.pass = result.worst_margin >= -1e-9 * (1.0 + result.rhs);
  return result;
}

}  // namespace detergo
