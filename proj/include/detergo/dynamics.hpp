#pragma once

// Weighted ergodic averages along irrational rotations of the circle.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detergo/alpha.hpp"
#include "detergo/seqcore.hpp"
#include "detergo/torus.hpp"

namespace detergo {

struct FourierTerm {
  std::int64_t frequency = 0;
  complex coefficient{0.0, 0.0};
};

/// f(x) = sum_j c_j e(j x) with finitely many terms.
class FourierFunction {
 public:
  FourierFunction() = default;
  explicit FourierFunction(std::vector<FourierTerm> terms, std::string label = "trig");

  static FourierFunction constant(complex c);
  /// e(x) + e(-x).
  static FourierFunction cosine();
  /// sum_{m<count} q_m^{-(1-beta)} (e(q_m x) + e(-q_m x)) over the convergent
  /// denominators of alpha (distinct q_m only).
  static FourierFunction surrogate(const Irrational& alpha, double beta, std::size_t count = 20);

  [[nodiscard]] const std::vector<FourierTerm>& terms() const { return terms_; }
  [[nodiscard]] const std::string& label() const { return label_; }
  [[nodiscard]] complex at(TorusPoint x) const;
  /// sum |c_j|.
  [[nodiscard]] double a_norm() const;

 private:
  std::vector<FourierTerm> terms_;
  std::string label_ = "trig";
};

struct RotationSystem {
  Irrational alpha;
  TorusPoint x0{};

  /// x0 + k alpha, exact modulo 2^-128 per step.
  [[nodiscard]] TorusPoint orbit(std::uint64_t k) const { return x0 + alpha.fraction() * k; }
};

struct FrequencyTerm {
  std::int64_t frequency = 0;
  complex coefficient{0.0, 0.0};
  complex kernel{0.0, 0.0};        ///< K_N(j alpha) = sum_k theta(k) e(j alpha u_k)
  complex contribution{0.0, 0.0};  ///< c_j e(j x0) K_N(j alpha) / N^beta
};

struct BirkhoffResult {
  complex value{0.0, 0.0};          ///< direct N^-beta sum theta(k) f(x0 + u_k alpha)
  complex decomposed{0.0, 0.0};     ///< sum of the per-frequency contributions
  std::vector<FrequencyTerm> terms;
};
BirkhoffResult weighted_birkhoff(const WeightSequence& theta, const IndexSequence& u,
                                 const FourierFunction& f, const RotationSystem& sys,
                                 std::uint64_t n, double beta);

struct CurvePoint {
  std::uint64_t n = 0;
  double magnitude = 0.0;
};
/// |N^-beta sum_{k<N} theta(k) f(x0 + u_k alpha)| at every N in `ns`
/// (increasing), from one pass over k.
std::vector<CurvePoint> birkhoff_curve(const WeightSequence& theta, const IndexSequence& u,
                                       const FourierFunction& f, const RotationSystem& sys,
                                       std::span<const std::uint64_t> ns, double beta);

struct UniformSupResult {
  double max_raw = 0.0;         ///< max over the grid of |sum_{k<N} theta(k) f(x + u_k alpha)|
  double max_normalized = 0.0;  ///< max_raw / N^beta
  double argmax = 0.0;
  std::uint64_t grid = 0;
  std::vector<complex> kernels;  ///< K_N(j alpha), in the order of f.terms()
};
/// The grid is x = g / G, g < G.
UniformSupResult uniform_sup_birkhoff(const WeightSequence& theta, const IndexSequence& u,
                                      const FourierFunction& f, const RotationSystem& sys,
                                      std::uint64_t n, std::uint64_t grid, double beta = 1.0);

struct SquaresResult {
  complex value{0.0, 0.0};        ///< (1/N) sum_{k=1}^{N} theta(k) e(k^2 alpha)
  std::vector<CurvePoint> curve;  ///< dyadic N <= n, then n itself
};
SquaresResult squares_average(const WeightSequence& theta, TorusPoint alpha, std::uint64_t n);

struct VdcResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double first_term = 0.0;  ///< (N+H)/(N^2 (H+1)) sum |gamma|^2
  bool pass = true;
};
/// |mean gamma|^2 against the van der Corput right-hand side with shift H.
VdcResult van_der_corput_check(std::span<const complex> gamma, std::size_t h);

enum class ThetaKind { plus, minus, iid };
std::string to_string(ThetaKind kind);
ThetaKind parse_theta_kind(const std::string& text);

struct CltConfig {
  double beta = 0.5;
  std::size_t trials = 1000;
  std::uint64_t n = 1 << 16;
  ThetaKind kind = ThetaKind::plus;
  std::optional<FourierFunction> f;       ///< default: surrogate for alpha, beta
  std::uint64_t seed = 0;
  std::optional<WeightSequence> base;     ///< default: Thue-Morse
};

struct CltResult {
  std::vector<double> samples;  ///< Z per trial, before studentization
  double mean = 0.0;
  double variance = 0.0;
  double ks = 0.0;              ///< KS distance of the studentized samples to N(0, 1)
  std::string f_label;
  std::optional<double> sigma;  ///< from the H4 report, when u is not the identity
};
/// Z = N^-beta sum_{k<N} theta(k) f(x + u_k alpha), x uniform per trial. In iid
/// mode theta is an independent Rademacher stream per trial and f == 1.
CltResult clt_experiment(const CltConfig& cfg, const RotationSystem& sys, const IndexSequence& u,
                         const std::optional<H4Report>& h4 = std::nullopt);

/// Kolmogorov-Smirnov distance of the empirical law of `z` to N(0, 1).
double ks_normal(std::vector<double> z);

struct PhiAverageResult {
  complex value{0.0, 0.0};
  std::vector<CurvePoint> curve;
};
/// (1/N) sum_{k<N} phi(theta(k)) f(x0 + k alpha); phi is keyed by the
/// numerator a of theta(k) = e(a/r).
PhiAverageResult phi_weighted_average(const QMultSeq& seq, const std::map<std::int64_t, complex>& phi,
                                      const FourierFunction& f, const RotationSystem& sys,
                                      std::uint64_t n);

/// (delta + 2) / 3.
double beta_threshold(double delta);

/// Dyadic sizes 2^a <= n, followed by n when it is not a power of two.
std::vector<std::uint64_t> dyadic_checkpoints(std::uint64_t n);

}  // namespace detergo
