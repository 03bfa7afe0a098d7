#include "detergo/alpha.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "detergo/errors.hpp"

namespace detergo {

namespace mp = boost::multiprecision;
using Big = mp::number<mp::cpp_bin_float<400>>;
using BigInt = mp::cpp_int;

struct Irrational::Impl {
  std::string label;
  Big value;
  std::function<std::uint64_t(std::size_t)> rule;  // exact partial quotients
  std::vector<std::uint64_t> quotients;            // list or reliable prefix
  bool exact = false;
  int digits = 390;                                // trusted digits of `value`
};

namespace {

constexpr int kWorkingDigits = 390;

/// Partial quotients of every number in [lo, lo + 10^-digits], i.e. the
/// prefix that the known digits determine.
std::vector<std::uint64_t> reliable_quotients(const Big& x, int digits) {
  Big lo = x;
  Big hi = x + mp::pow(Big(10), -digits);
  std::vector<std::uint64_t> out;
  for (int guard = 0; guard < 4096; ++guard) {
    const Big a_lo = mp::floor(lo);
    const Big a_hi = mp::floor(hi);
    if (a_lo != a_hi || a_lo > Big(std::numeric_limits<std::uint64_t>::max())) break;
    out.push_back(a_lo.convert_to<std::uint64_t>());
    const Big f_lo = lo - a_lo;
    const Big f_hi = hi - a_hi;
    if (f_lo == 0 || f_hi == 0) break;
    lo = 1 / f_hi;
    hi = 1 / f_lo;
  }
  return out;
}

Big cf_value(const std::vector<std::uint64_t>& a) {
  BigInt p_prev = 1, p = a.empty() ? 0 : a[0];
  BigInt q_prev = 0, q = 1;
  for (std::size_t i = 1; i < a.size(); ++i) {
    BigInt p_next = BigInt(a[i]) * p + p_prev;
    BigInt q_next = BigInt(a[i]) * q + q_prev;
    p_prev = p;
    p = p_next;
    q_prev = q;
    q = q_next;
  }
  return Big(p) / Big(q);
}

std::shared_ptr<Irrational::Impl> make_rule(std::string label, Big value,
                                            std::function<std::uint64_t(std::size_t)> rule) {
  auto impl = std::make_shared<Irrational::Impl>();
  impl->label = std::move(label);
  impl->value = std::move(value);
  impl->rule = std::move(rule);
  impl->exact = true;
  impl->digits = kWorkingDigits;
  return impl;
}

}  // namespace

Irrational Irrational::named(const std::string& name) {
  if (name == "golden") {
    return Irrational(make_rule("golden", (1 + mp::sqrt(Big(5))) / 2, [](std::size_t) { return 1; }));
  }
  if (name == "sqrt2") {
    return Irrational(
        make_rule("sqrt2", mp::sqrt(Big(2)), [](std::size_t m) -> std::uint64_t { return m == 0 ? 1 : 2; }));
  }
  if (name == "e_frac") {
    return Irrational(make_rule("e_frac", mp::exp(Big(1)) - 2, [](std::size_t m) -> std::uint64_t {
      if (m == 0) return 0;
      return m % 3 == 2 ? 2 * (m + 1) / 3 : 1;
    }));
  }
  if (name == "pi_frac") {
    auto impl = std::make_shared<Impl>();
    impl->label = "pi_frac";
    impl->value = boost::math::constants::pi<Big>() - 3;
    impl->digits = kWorkingDigits;
    impl->quotients = reliable_quotients(impl->value, impl->digits);
    return Irrational(impl);
  }
  throw SpecError("unknown named irrational '" + name + "'");
}

Irrational Irrational::from_cf(std::vector<std::uint64_t> partial_quotients) {
  if (partial_quotients.empty()) throw SpecError("continued fraction needs at least a_0");
  for (std::size_t i = 1; i < partial_quotients.size(); ++i) {
    if (partial_quotients[i] == 0) throw SpecError("partial quotient a_" + std::to_string(i) + " is zero");
  }
  auto impl = std::make_shared<Impl>();
  std::ostringstream label;
  label << "cf[" << partial_quotients.size() << " terms]";
  impl->label = label.str();
  impl->value = cf_value(partial_quotients);
  impl->quotients = std::move(partial_quotients);
  impl->exact = true;
  impl->digits = kWorkingDigits;
  return Irrational(impl);
}

Irrational Irrational::from_decimal(const std::string& text, int digits) {
  if (digits < 1 || digits > kWorkingDigits) throw SpecError("decimal digits must be in [1, 390]");
  auto impl = std::make_shared<Impl>();
  try {
    std::string normalized = text;
    for (auto& c : normalized) {
      if (c == ',') c = '.';
    }
    impl->value = Big(normalized);
  } catch (const std::exception&) {
    throw SpecError("malformed decimal alpha '" + text + "'");
  }
  impl->label = "decimal";
  impl->digits = digits;
  impl->quotients = reliable_quotients(impl->value, digits);
  return Irrational(impl);
}

const std::string& Irrational::label() const { return impl_->label; }

TorusPoint Irrational::fraction() const {
  const Big frac = impl_->value - mp::floor(impl_->value);
  const BigInt bits = BigInt(mp::floor(mp::ldexp(frac, 128)));
  const auto hi = static_cast<std::uint64_t>(BigInt(bits >> 64));
  const auto lo = static_cast<std::uint64_t>(BigInt(bits & BigInt(std::numeric_limits<std::uint64_t>::max())));
  return TorusPoint{(static_cast<uint128>(hi) << 64) | lo};
}

double Irrational::value() const { return impl_->value.convert_to<double>(); }

bool Irrational::exact_expansion() const { return impl_->exact; }

std::vector<std::uint64_t> Irrational::partial_quotients(std::size_t count) const {
  if (impl_->rule) {
    std::vector<std::uint64_t> out(count);
    for (std::size_t m = 0; m < count; ++m) out[m] = impl_->rule(m);
    return out;
  }
  if (count > impl_->quotients.size()) {
    throw ComputationError("alpha '" + impl_->label + "' determines only " +
                           std::to_string(impl_->quotients.size()) + " partial quotients; " +
                           std::to_string(count) + " requested");
  }
  return {impl_->quotients.begin(), impl_->quotients.begin() + static_cast<std::ptrdiff_t>(count)};
}

struct DiophantineAccess {
  static const Big& value(const Irrational& a) { return a.impl_->value; }
  static int digits(const Irrational& a) { return a.impl_->digits; }
};

DiophantineReport diophantine_type(const Irrational& alpha, std::size_t depth) {
  if (depth < 5) throw SpecError("diophantine_type needs depth >= 5");
  const auto a = alpha.partial_quotients(depth + 1);
  DiophantineReport report;
  report.window = std::max<std::size_t>(3, depth / 10);
  report.convention =
      "d = 1 + limsup_m log(a_{m+1})/log(q_m), equivalently limsup log(1/||q_m alpha||)/log(q_m); "
      "estimated as the max over the last " + std::to_string(report.window) + " convergents";

  const Big& value = DiophantineAccess::value(alpha);
  const Big resolution = mp::pow(Big(10), -DiophantineAccess::digits(alpha));

  BigInt p_prev = 1, p = a[0];
  BigInt q_prev = 0, q = 1;
  std::vector<double> log_q(depth);
  for (std::size_t m = 0; m < depth; ++m) {
    if (m > 0) {
      BigInt p_next = BigInt(a[m]) * p + p_prev;
      BigInt q_next = BigInt(a[m]) * q + q_prev;
      p_prev = p;
      p = p_next;
      q_prev = q;
      q = q_next;
    }
    ConvergentRow row;
    row.m = m;
    row.a = a[m];
    row.p = p.str();
    row.q = q.str();
    row.log_q = mp::log(Big(q)).convert_to<double>();
    log_q[m] = row.log_q;
    const Big distance = mp::abs(Big(q) * value - Big(p));
    row.log_inv_distance = distance > resolution * Big(q) ? (-mp::log(distance)).convert_to<double>()
                                                          : std::numeric_limits<double>::quiet_NaN();
    report.rows.push_back(std::move(row));
  }
  report.d_hat = 1.0;
  const std::size_t first = depth > report.window ? depth - report.window : 0;
  for (std::size_t m = first; m < depth; ++m) {
    if (log_q[m] <= 0.0) continue;
    report.d_hat = std::max(report.d_hat, 1.0 + std::log(static_cast<double>(a[m + 1])) / log_q[m]);
  }
  return report;
}

}  // namespace detergo
