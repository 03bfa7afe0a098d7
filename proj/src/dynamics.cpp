#include "detergo/dynamics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "detergo/errors.hpp"
#include "detergo/expsum.hpp"
#include "detergo/parallel.hpp"
#include "detergo/random.hpp"

namespace detergo {

// ---------------------------------------------------------------- f in A(T)

FourierFunction::FourierFunction(std::vector<FourierTerm> terms, std::string label)
    : terms_(std::move(terms)), label_(std::move(label)) {
  for (const auto& t : terms_) {
    if (!std::isfinite(t.coefficient.real()) || !std::isfinite(t.coefficient.imag())) {
      throw SpecError("Fourier coefficient at frequency " + std::to_string(t.frequency) + " is not finite");
    }
  }
}

FourierFunction FourierFunction::constant(complex c) { return FourierFunction({{0, c}}, "constant"); }

FourierFunction FourierFunction::cosine() { return FourierFunction({{1, 1.0}, {-1, 1.0}}, "e(x)+e(-x)"); }

FourierFunction FourierFunction::surrogate(const Irrational& alpha, double beta, std::size_t count) {
  if (!(beta > 0.0 && beta <= 1.0)) throw SpecError("surrogate needs beta in (0, 1]");
  if (count == 0) throw SpecError("surrogate needs at least one convergent");
  const auto a = alpha.partial_quotients(count);
  std::vector<FourierTerm> terms;
  std::uint64_t q_prev = 0, q = 1;
  for (std::size_t m = 0; m < count; ++m) {
    if (m > 0) {
      const unsigned __int128 next = static_cast<unsigned __int128>(a[m]) * q + q_prev;
      if (next > (static_cast<unsigned __int128>(1) << 62)) break;
      q_prev = q;
      q = static_cast<std::uint64_t>(next);
    }
    if (m > 0 && q == q_prev) continue;
    const double c = std::pow(static_cast<double>(q), -(1.0 - beta));
    terms.push_back({static_cast<std::int64_t>(q), c});
    terms.push_back({-static_cast<std::int64_t>(q), c});
  }
  return FourierFunction(std::move(terms), "surrogate");
}

complex FourierFunction::at(TorusPoint x) const {
  CompensatedSum sum;
  for (const auto& t : terms_) sum.add(t.coefficient * unit(x * t.frequency));
  return sum.value();
}

double FourierFunction::a_norm() const {
  double s = 0.0;
  for (const auto& t : terms_) s += std::abs(t.coefficient);
  return s;
}

// ---------------------------------------------------------------- averages

namespace {

void check_beta(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw SpecError("beta must lie in (0, 1]");
}

complex kernel(const WeightSequence& theta, const IndexSequence& u, std::uint64_t n,
               const Irrational& alpha, std::int64_t j) {
  return weighted_exp_sum(theta, u, n, alpha.fraction() * j);
}

}  // namespace

std::vector<std::uint64_t> dyadic_checkpoints(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 1; p <= n && p != 0; p <<= 1) out.push_back(p);
  if (!std::has_single_bit(n)) out.push_back(n);
  return out;
}

BirkhoffResult weighted_birkhoff(const WeightSequence& theta, const IndexSequence& u,
                                 const FourierFunction& f, const RotationSystem& sys,
                                 std::uint64_t n, double beta) {
  if (n == 0) throw SpecError("N must be at least 1");
  check_beta(beta);
  const double scale = std::pow(static_cast<double>(n), -beta);
  const TorusPoint a = sys.alpha.fraction();

  CompensatedSum direct;
  for (std::uint64_t k = 0; k < n; ++k) direct.add(theta.at(k) * f.at(sys.x0 + a * u.at(k)));

  BirkhoffResult out;
  out.value = direct.value() * scale;
  out.terms.resize(f.terms().size());
  parallel_for(f.terms().size(), [&](std::size_t i) {
    const auto& t = f.terms()[i];
    auto& row = out.terms[i];
    row.frequency = t.frequency;
    row.coefficient = t.coefficient;
    row.kernel = kernel(theta, u, n, sys.alpha, t.frequency);
    row.contribution = t.coefficient * unit(sys.x0 * t.frequency) * row.kernel * scale;
  });
  CompensatedSum total;
  for (const auto& row : out.terms) total.add(row.contribution);
  out.decomposed = total.value();
  return out;
}

std::vector<CurvePoint> birkhoff_curve(const WeightSequence& theta, const IndexSequence& u,
                                       const FourierFunction& f, const RotationSystem& sys,
                                       std::span<const std::uint64_t> ns, double beta) {
  check_beta(beta);
  if (ns.empty()) return {};
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] == 0 || (i > 0 && ns[i] <= ns[i - 1])) throw SpecError("N list must be increasing and positive");
  }
  const TorusPoint a = sys.alpha.fraction();
  std::vector<CurvePoint> out;
  CompensatedSum sum;
  std::size_t next = 0;
  for (std::uint64_t k = 0; k < ns.back(); ++k) {
    sum.add(theta.at(k) * f.at(sys.x0 + a * u.at(k)));
    if (k + 1 == ns[next]) {
      out.push_back({ns[next], std::abs(sum.value()) * std::pow(static_cast<double>(ns[next]), -beta)});
      ++next;
    }
  }
  return out;
}

UniformSupResult uniform_sup_birkhoff(const WeightSequence& theta, const IndexSequence& u,
                                      const FourierFunction& f, const RotationSystem& sys,
                                      std::uint64_t n, std::uint64_t grid, double beta) {
  if (n == 0) throw SpecError("N must be at least 1");
  if (grid < 64) throw SpecError("x-grid size must be at least 64");
  check_beta(beta);
  const auto& terms = f.terms();
  UniformSupResult out;
  out.grid = grid;
  out.kernels.resize(terms.size());
  parallel_for(terms.size(), [&](std::size_t i) {
    out.kernels[i] = kernel(theta, u, n, sys.alpha, terms[i].frequency);
  });

  const std::size_t chunks = 64;
  std::vector<std::pair<double, std::uint64_t>> best(chunks, {-1.0, 0});
  parallel_chunks(grid, chunks, [&](std::size_t c, std::size_t b, std::size_t e) {
    for (std::size_t g = b; g < e; ++g) {
      const TorusPoint x = TorusPoint::from_ratio(static_cast<std::int64_t>(g), static_cast<std::int64_t>(grid));
      CompensatedSum s;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        s.add(terms[i].coefficient * unit(x * terms[i].frequency) * out.kernels[i]);
      }
      const double v = std::abs(s.value());
      if (v > best[c].first) best[c] = {v, g};
    }
  });
  auto top = best.front();
  for (const auto& cand : best) {
    if (cand.first > top.first) top = cand;
  }
  out.max_raw = top.first;
  out.argmax = static_cast<double>(top.second) / static_cast<double>(grid);
  out.max_normalized = out.max_raw * std::pow(static_cast<double>(n), -beta);
  return out;
}

SquaresResult squares_average(const WeightSequence& theta, TorusPoint alpha, std::uint64_t n) {
  if (n == 0) throw SpecError("N must be at least 1");
  if (n > (1ULL << 32)) throw SpecError("N must be at most 2^32 so that k^2 fits in 64 bits");
  const auto marks = dyadic_checkpoints(n);
  SquaresResult out;
  CompensatedSum sum;
  std::size_t next = 0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    sum.add(theta.at(k) * unit(alpha * (k * k)));
    if (k == marks[next]) {
      out.curve.push_back({k, std::abs(sum.value()) / static_cast<double>(k)});
      ++next;
    }
  }
  out.value = sum.value() / static_cast<double>(n);
  return out;
}

VdcResult van_der_corput_check(std::span<const complex> gamma, std::size_t h) {
  const std::size_t n = gamma.size();
  if (n == 0 || h > n - 1) throw SpecError("van der Corput shift H must satisfy 0 <= H <= N-1");
  const double nn = static_cast<double>(n);
  const double hh = static_cast<double>(h);
  CompensatedSum total;
  double energy = 0.0;
  for (const auto& g : gamma) {
    total.add(g);
    energy += std::norm(g);
  }
  VdcResult out;
  out.lhs = std::norm(total.value() / nn);
  out.first_term = (nn + hh) / (nn * nn * (hh + 1.0)) * energy;
  CompensatedSum corr;
  for (std::size_t s = 1; s <= h; ++s) {
    CompensatedSum inner;
    for (std::size_t k = 0; k + s < n; ++k) inner.add(gamma[k + s] * std::conj(gamma[k]));
    corr.add(static_cast<double>(h + 1 - s) * inner.value());
  }
  out.rhs = out.first_term + 2.0 * (nn + hh) / (nn * nn * (hh + 1.0) * (hh + 1.0)) * corr.value().real();
  out.pass = out.lhs <= out.rhs + 1e-12;
  return out;
}

// ---------------------------------------------------------------- CLT harness

std::string to_string(ThetaKind kind) {
  switch (kind) {
    case ThetaKind::plus:
      return "plus";
    case ThetaKind::minus:
      return "minus";
    case ThetaKind::iid:
      return "iid";
  }
  return "plus";
}

ThetaKind parse_theta_kind(const std::string& text) {
  if (text == "plus") return ThetaKind::plus;
  if (text == "minus") return ThetaKind::minus;
  if (text == "iid") return ThetaKind::iid;
  throw SpecError("theta kind must be plus, minus or iid");
}

double ks_normal(std::vector<double> z) {
  if (z.empty()) throw SpecError("KS distance of an empty sample");
  std::sort(z.begin(), z.end());
  const double n = static_cast<double>(z.size());
  double d = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-z[i] / std::numbers::sqrt2);
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return d;
}

CltResult clt_experiment(const CltConfig& cfg, const RotationSystem& sys, const IndexSequence& u,
                         const std::optional<H4Report>& h4) {
  check_beta(cfg.beta);
  if (cfg.trials < 100) throw SpecError("CLT needs at least 100 trials");
  if (cfg.n == 0) throw SpecError("N must be at least 1");
  CltResult out;
  if (!u.is_identity()) {
    if (!h4) throw SpecError("index sequence " + u.describe() + " needs an H4 report for the CLT harness");
    if (h4->violated) throw SpecError("index sequence " + u.describe() + " fails H4: deviations do not decay");
    out.sigma = h4->sigma;
  }
  const double scale = std::pow(static_cast<double>(cfg.n), -cfg.beta);
  out.samples.resize(cfg.trials);

  if (cfg.kind == ThetaKind::iid) {
    out.f_label = "constant";
    parallel_for(cfg.trials, [&](std::size_t trial) {
      // Stream 0 is reserved for the initial points; trial t uses stream t + 1.
      std::int64_t s = 0;
      for (std::uint64_t k = 0; k < cfg.n; ++k) {
        s += (counter_hash(cfg.seed, trial + 1, k) >> 63) ? -1 : 1;
      }
      out.samples[trial] = static_cast<double>(s) * scale;
    });
  } else {
    const FourierFunction f = cfg.f ? *cfg.f : FourierFunction::surrogate(sys.alpha, cfg.beta);
    out.f_label = f.label();
    const WeightSequence base = cfg.base ? *cfg.base : WeightSequence::thue_morse();
    const WeightSequence theta = cfg.kind == ThetaKind::plus ? base.plus_split() : base.minus_split();
    const auto& terms = f.terms();
    std::vector<complex> kernels(terms.size());
    parallel_for(terms.size(), [&](std::size_t i) {
      kernels[i] = kernel(theta, u, cfg.n, sys.alpha, terms[i].frequency);
    });
    parallel_for(cfg.trials, [&](std::size_t trial) {
      const TorusPoint x{static_cast<uint128>(counter_hash(cfg.seed, 0, trial)) << 64};
      CompensatedSum s;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        s.add(terms[i].coefficient * unit(x * terms[i].frequency) * kernels[i]);
      }
      out.samples[trial] = s.value().real() * scale;
    });
  }

  const double n = static_cast<double>(cfg.trials);
  double mean = 0.0;
  for (double z : out.samples) mean += z;
  mean /= n;
  double var = 0.0;
  for (double z : out.samples) var += (z - mean) * (z - mean);
  var /= n - 1.0;
  out.mean = mean;
  out.variance = var;
  if (!(var > 1e-24 * std::max(1.0, mean * mean))) {
    throw ComputationError("degenerate sample variance: Z is constant across trials");
  }
  std::vector<double> studentized(out.samples.size());
  const double sd = std::sqrt(var);
  for (std::size_t i = 0; i < studentized.size(); ++i) studentized[i] = (out.samples[i] - mean) / sd;
  out.ks = ks_normal(std::move(studentized));
  return out;
}

PhiAverageResult phi_weighted_average(const QMultSeq& seq, const std::map<std::int64_t, complex>& phi,
                                      const FourierFunction& f, const RotationSystem& sys,
                                      std::uint64_t n) {
  if (n == 0) throw SpecError("N must be at least 1");
  const auto marks = dyadic_checkpoints(n);
  const TorusPoint a = sys.alpha.fraction();
  PhiAverageResult out;
  CompensatedSum sum;
  TorusPoint x = sys.x0;
  std::size_t next = 0;
  for (std::uint64_t k = 0; k < n; ++k) {
    const auto value = seq.at(k).num();
    const auto it = phi.find(value);
    if (it == phi.end()) {
      throw SpecError("theta(" + std::to_string(k) + ") = e(" + std::to_string(value) + "/" +
                      std::to_string(seq.r()) + ") lies outside the declared value set");
    }
    sum.add(it->second * f.at(x));
    x = x + a;
    if (k + 1 == marks[next]) {
      out.curve.push_back({k + 1, std::abs(sum.value()) / static_cast<double>(k + 1)});
      ++next;
    }
  }
  out.value = sum.value() / static_cast<double>(n);
  return out;
}

double beta_threshold(double delta) { return (delta + 2.0) / 3.0; }

}  // namespace detergo
