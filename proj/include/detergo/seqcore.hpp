#pragma once

// Exact construction and evaluation of the deterministic weight sequences:
// q-multiplicative sequences given by their skeleton, generalized Thue-Morse
// words, constant-length substitutions, Rudin-Shapiro type sequences, and the
// index sequences u along which the weights are sampled.

#include <compare>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "detergo/torus.hpp"

namespace detergo {

/// An r-th root of unity e(num / order), held exactly.
class UnitRoot {
 public:
  UnitRoot() = default;
  UnitRoot(std::int64_t num, std::int64_t order);

  [[nodiscard]] std::int64_t num() const { return num_; }
  [[nodiscard]] std::int64_t order() const { return order_; }
  [[nodiscard]] UnitRoot pow(std::int64_t a) const;
  [[nodiscard]] complex value() const { return unit(TorusPoint::from_ratio(num_, order_)); }

  friend UnitRoot operator*(UnitRoot a, UnitRoot b);
  friend bool operator==(UnitRoot, UnitRoot) = default;
  friend auto operator<=>(UnitRoot, UnitRoot) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t order_ = 1;
};

using Word = std::vector<UnitRoot>;

/// Builds a word over R_order from numerators.
Word make_word(std::span<const std::int64_t> nums, std::int64_t order);
std::string format_word(const Word& w);

/// Exact rational p/q with q > 0, reduced.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  /// Accepts "p/q", an integer, or a finite decimal ("0.25", "0,25").
  static Rational parse(const std::string& text);
  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

using SkeletonRow = std::vector<std::int64_t>;

/// Eventually periodic skeleton: row n holds the numerators of
/// theta(j q^n) = e(row[j] / r) for j < q. An empty period describes a finite
/// skeleton prefix, usable for indices below q^(preperiod rows).
struct SkeletonSpec {
  int q = 2;
  std::int64_t r = 1;
  std::vector<SkeletonRow> preperiod;
  std::vector<SkeletonRow> period;
};

/// A finitely valued q-multiplicative sequence.
class QMultSeq {
 public:
  /// Throws SpecError naming the offending row on malformed input.
  explicit QMultSeq(SkeletonSpec spec);

  [[nodiscard]] const SkeletonSpec& spec() const { return spec_; }
  [[nodiscard]] int q() const { return spec_.q; }
  [[nodiscard]] std::int64_t r() const { return spec_.r; }
  [[nodiscard]] bool finite_prefix() const { return spec_.period.empty(); }
  /// Row of level n (theta(j q^n) numerators).
  [[nodiscard]] const SkeletonRow& row(std::size_t level) const;
  /// Digit-product evaluation; O(log_q n).
  [[nodiscard]] UnitRoot at(std::uint64_t n) const;

 private:
  SkeletonSpec spec_;
};

QMultSeq make_qmult(SkeletonSpec spec);
UnitRoot eval_qmult(const QMultSeq& seq, std::uint64_t n);

/// (u_1..u_n) * (v_1..v_m) = (u*v_1)(u*v_2)...(u*v_m).
Word star_product(const Word& u, const Word& v);

/// First `length` letters of u_1 * u_2 * ... with the blocks repeated
/// periodically.
Word gtm_prefix(const std::vector<Word>& blocks, std::size_t length);

/// Constant-length substitution on R_order.
class Substitution {
 public:
  Substitution(std::int64_t order, std::map<std::int64_t, Word> images);

  [[nodiscard]] std::int64_t order() const { return order_; }
  [[nodiscard]] std::size_t length() const { return length_; }
  [[nodiscard]] const Word& image(UnitRoot letter) const;
  [[nodiscard]] const std::map<std::int64_t, Word>& images() const { return images_; }
  [[nodiscard]] Word apply(const Word& w) const;

 private:
  std::int64_t order_;
  std::size_t length_ = 0;
  std::map<std::int64_t, Word> images_;
};

/// sigma(a) = (a w_1)...(a w_{q^n}) with w the *-product of one skeleton
/// period. Requires an empty preperiod.
Substitution to_substitution(const QMultSeq& seq);
Word fixed_point_prefix(const Substitution& sigma, UnitRoot seed, std::size_t length);
/// Letter n of the fixed point, read off the base-L digits of n.
UnitRoot fixed_point_at(const Substitution& sigma, UnitRoot seed, std::uint64_t n);

/// Number of occurrences of the pattern 11 in the binary digits of n.
int count_11_blocks(std::uint64_t n);
/// e(t * count_11_blocks(n)).
complex rudin_shapiro(double t, std::uint64_t n);
UnitRoot rudin_shapiro_exact(Rational t, std::uint64_t n);

/// Nondecreasing nonnegative integer shift k -> beta_k.
class Beta {
 public:
  static Beta zero();
  static Beta log();                    ///< floor(log(k + 1))
  static Beta power(double gamma);      ///< floor(k^gamma), gamma in (0, 1)
  static Beta table(std::vector<std::uint64_t> values);
  /// Lifts an arbitrary function; monotonicity is checked lazily by callers.
  static Beta custom(std::string name, std::function<std::uint64_t(std::uint64_t)> fn);

  [[nodiscard]] std::uint64_t at(std::uint64_t k) const;
  [[nodiscard]] const std::string& name() const { return name_; }
  [[nodiscard]] std::optional<std::size_t> domain() const;

 private:
  std::string name_;
  std::function<std::uint64_t(std::uint64_t)> fn_;
  std::optional<std::size_t> domain_;
};

/// Bounded complex weight stream theta.
class WeightSequence {
 public:
  static WeightSequence qmult(QMultSeq seq);
  static WeightSequence thue_morse();
  static WeightSequence rudin_shapiro(Rational t);
  static WeightSequence rudin_shapiro_real(double t);
  static WeightSequence constant(complex c);
  static WeightSequence gtm(std::int64_t order, std::vector<Word> blocks);
  static WeightSequence substitution(Substitution sigma, UnitRoot seed);
  static WeightSequence iid_rademacher(std::uint64_t seed);
  /// Arbitrary bounded weights given by a function, for diagnostics.
  static WeightSequence custom(std::string name, std::function<complex(std::uint64_t)> fn,
                               bool unimodular);

  [[nodiscard]] WeightSequence power(std::int64_t a) const;
  [[nodiscard]] WeightSequence plus_split() const;
  [[nodiscard]] WeightSequence minus_split() const;
  [[nodiscard]] WeightSequence shifted(Beta beta) const;

  [[nodiscard]] complex at(std::uint64_t n) const;
  /// Exact value when the sequence takes values in some R_r.
  [[nodiscard]] std::optional<UnitRoot> exact_at(std::uint64_t n) const;
  [[nodiscard]] std::optional<std::int64_t> root_order() const;
  [[nodiscard]] bool unimodular() const;
  [[nodiscard]] const QMultSeq* as_qmult() const;
  [[nodiscard]] std::string describe() const;
  /// theta(0..n-1), evaluated in parallel.
  [[nodiscard]] std::vector<complex> prefix(std::size_t n) const;
  [[nodiscard]] std::vector<complex> slice(std::uint64_t begin, std::uint64_t end) const;

  struct Node;

 private:
  explicit WeightSequence(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Strictly increasing integer stream u.
class IndexSequence {
 public:
  static IndexSequence identity();
  static IndexSequence squares();
  static IndexSequence log_shift();  ///< k + floor(log(k + 1))
  static IndexSequence beta_shift(IndexSequence base, Beta beta);
  /// sum_i coeffs[i] k^i; must be strictly increasing on k >= 0.
  static IndexSequence polynomial(std::vector<std::int64_t> coeffs);

  [[nodiscard]] std::uint64_t at(std::uint64_t k) const;
  [[nodiscard]] bool is_identity() const;
  [[nodiscard]] std::string describe() const;
  [[nodiscard]] std::vector<std::uint64_t> slice(std::uint64_t begin, std::uint64_t end) const;

  struct Node;

 private:
  explicit IndexSequence(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// theta~(k) = theta(k + beta_k), u~_k = u_{k + beta_k}.
struct ShiftedPair {
  WeightSequence weights;
  IndexSequence indices;
};
/// `check_prefix` terms of k + beta_k are verified strictly increasing.
ShiftedPair shift_compose(const WeightSequence& theta, const IndexSequence& u, const Beta& beta,
                          std::size_t check_prefix = 4096);

/// Powers a in (0, r) for which theta^a is periodic with period <= P on the
/// first L terms. A bounded scan, not a decision procedure.
struct PerResult {
  std::set<std::int64_t> periodic_powers;
  bool irreducible = true;
  std::size_t period_bound = 0;
  std::size_t prefix_length = 0;
};
PerResult per_set(const QMultSeq& seq, std::size_t period_bound, std::size_t prefix_length);

/// Smallest period of s (s.size() when aperiodic); KMP failure function.
std::size_t smallest_period(std::span<const std::int64_t> s);

struct H4Row {
  std::uint64_t n;
  double deviation;  ///< |u_N / N - zeta|
};
struct H4Report {
  double zeta = 1.0;
  std::vector<H4Row> rows;
  bool exact = false;     ///< all deviations zero
  bool violated = false;  ///< deviations do not decay
  double sigma = 0.0;     ///< fitted decay exponent (infinity when exact)
};
H4Report h4_report(const IndexSequence& u, double zeta, std::span<const std::uint64_t> ns);

}  // namespace detergo
