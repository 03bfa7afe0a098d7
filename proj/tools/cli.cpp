#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>

#include "detergo/errors.hpp"
#include "detergo/expsum.hpp"
#include "detergo/parallel.hpp"
#include "detergo/structure.hpp"
#include "detergo/version.hpp"
#include "lemmas.hpp"

namespace detergo::cli {

// ---------------------------------------------------------------- argument parsers

std::uint64_t parse_count(const std::string& raw) {
  std::string text;
  for (char c : raw) {
    if (!std::isspace(static_cast<unsigned char>(c))) text.push_back(c);
  }
  const auto digits = [&](const std::string& s) -> std::uint64_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
      throw SpecError("malformed count '" + raw + "'");
    }
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw SpecError("count '" + raw + "' out of range");
    }
  };
  const auto power = [&](std::uint64_t base, std::uint64_t exp) {
    std::uint64_t v = 1;
    for (std::uint64_t i = 0; i < exp; ++i) {
      if (v > std::numeric_limits<std::uint64_t>::max() / base) throw SpecError("count '" + raw + "' overflows");
      v *= base;
    }
    return v;
  };
  if (auto caret = text.find('^'); caret != std::string::npos) {
    return power(digits(text.substr(0, caret)), digits(text.substr(caret + 1)));
  }
  if (auto e = text.find_first_of("eE"); e != std::string::npos) {
    return digits(text.substr(0, e)) * power(10, digits(text.substr(e + 1)));
  }
  return digits(text);
}

std::vector<std::uint64_t> parse_n_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  if (auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = parse_count(text.substr(0, dots));
    const auto hi = parse_count(text.substr(dots + 2));
    if (lo == 0 || (lo & (lo - 1)) != 0 || (hi & (hi - 1)) != 0 || hi < lo) {
      throw SpecError("dyadic range '" + text + "' needs powers of two 2^a..2^b with a <= b");
    }
    for (std::uint64_t n = lo; n <= hi && n != 0; n <<= 1) out.push_back(n);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_count(item));
  if (out.empty()) throw SpecError("empty N list");
  return out;
}

namespace {

std::vector<std::uint64_t> parse_index_list(const std::string& text) {
  if (auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = parse_count(text.substr(0, dots));
    const auto hi = parse_count(text.substr(dots + 2));
    if (hi < lo) throw SpecError("index range '" + text + "' is empty");
    if (hi - lo > 1000000) throw SpecError("index range '" + text + "' is too long; use seq gen");
    std::vector<std::uint64_t> out;
    for (auto k = lo; k <= hi; ++k) out.push_back(k);
    return out;
  }
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_count(item));
  if (out.empty()) throw SpecError("empty index list");
  return out;
}

double parse_real(const std::string& raw) {
  std::string text = raw;
  for (auto& c : text) {
    if (c == ',') c = '.';
  }
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw SpecError("malformed number '" + raw + "'");
  }
  if (pos != text.size() || !std::isfinite(v)) throw SpecError("malformed number '" + raw + "'");
  return v;
}

std::string canonical_rational(const std::string& text) {
  const auto r = Rational::parse(text);
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

TorusPoint point_from_rational(const std::string& text) {
  const auto r = Rational::parse(text);
  return TorusPoint::from_ratio(r.num, r.den);
}

json parse_windows(const std::string& text) {
  json out = json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw SpecError("window '" + item + "' must be m:n");
    out.push_back({parse_count(item.substr(0, colon)), parse_count(item.substr(colon + 1))});
  }
  if (out.empty()) throw SpecError("no windows given");
  return out;
}

json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(what + ": " + e.what());
  }
}

}  // namespace

json resolve_alpha_argument(const std::string& text) {
  if (text == "golden" || text == "sqrt2" || text == "pi_frac" || text == "e_frac") {
    return json{{"named", text}};
  }
  if (!text.empty() && text.front() == '{') {
    json doc = parse_json_text(text, "alpha");
    (void)parse_alpha(doc);
    if (doc.contains("rational")) doc["rational"] = canonical_rational(doc["rational"].get<std::string>());
    return doc;
  }
  return json{{"rational", canonical_rational(text)}};
}

Irrational parse_alpha(const json& doc) {
  if (!doc.is_object() || doc.size() == 0) throw SpecError("alpha: expected an object");
  if (doc.contains("named")) {
    if (doc.size() != 1) throw SpecError("alpha: 'named' takes no other fields");
    return Irrational::named(doc["named"].get<std::string>());
  }
  if (doc.contains("cf")) {
    if (doc.size() != 1 || !doc["cf"].is_array()) throw SpecError("alpha.cf: expected an array");
    std::vector<std::uint64_t> a;
    for (const auto& v : doc["cf"]) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw SpecError("alpha.cf: partial quotients must be nonnegative integers");
      }
      a.push_back(v.get<std::uint64_t>());
    }
    return Irrational::from_cf(std::move(a));
  }
  if (doc.contains("decimal")) {
    for (const auto& [k, v] : doc.items()) {
      if (k != "decimal" && k != "digits") throw SpecError("alpha: unknown field '" + k + "'");
    }
    if (!doc["decimal"].is_string()) throw SpecError("alpha.decimal: expected a string");
    const auto text = doc["decimal"].get<std::string>();
    int digits = 0;
    if (doc.contains("digits")) {
      digits = doc["digits"].get<int>();
    } else {
      const auto dot = text.find_first_of(".,");
      digits = dot == std::string::npos ? 0 : static_cast<int>(text.size() - dot - 1);
    }
    return Irrational::from_decimal(text, digits);
  }
  if (doc.contains("rational")) {
    if (doc.size() != 1) throw SpecError("alpha: 'rational' takes no other fields");
    const auto r = Rational::parse(doc["rational"].get<std::string>());
    // Continued fraction of frac(r) by Euclid's algorithm; exact.
    std::int64_t num = ((r.num % r.den) + r.den) % r.den;
    std::int64_t den = r.den;
    std::vector<std::uint64_t> a{0};
    while (num != 0) {
      a.push_back(static_cast<std::uint64_t>(den / num));
      const auto rem = den % num;
      den = num;
      num = rem;
    }
    return Irrational::from_cf(std::move(a));
  }
  throw SpecError("alpha: expected one of named, cf, decimal, rational");
}

FourierFunction parse_fourier(const json& doc, const Irrational& alpha, double beta) {
  if (doc.is_string()) {
    const auto name = doc.get<std::string>();
    if (name == "cos") return FourierFunction::cosine();
    if (name == "e1") return FourierFunction({{1, 1.0}}, "e(x)");
    if (name == "one") return FourierFunction::constant(1.0);
    if (name == "surrogate") return FourierFunction::surrogate(alpha, beta);
    throw SpecError("f: unknown name '" + name + "' (cos, e1, one, surrogate)");
  }
  if (!doc.is_object() || !doc.contains("terms") || doc.size() != 1 || !doc["terms"].is_array()) {
    throw SpecError("f: expected {\"terms\": [[j, re, im], ...]}");
  }
  std::vector<FourierTerm> terms;
  for (const auto& t : doc["terms"]) {
    if (!t.is_array() || t.size() < 2 || t.size() > 3 || !t[0].is_number_integer()) {
      throw SpecError("f.terms: each term is [frequency, re] or [frequency, re, im]");
    }
    const double im = t.size() == 3 ? t[2].get<double>() : 0.0;
    terms.push_back({t[0].get<std::int64_t>(), {t[1].get<double>(), im}});
  }
  return FourierFunction(std::move(terms));
}

// ---------------------------------------------------------------- commands

namespace {

enum class Kind { seq, index, alpha, fourier, count, counts, indices, real, text, windows, rational };

struct OptionDef {
  std::string name;
  Kind kind;
  std::optional<std::string> fallback;  ///< nullopt: required
  std::string help;
  std::vector<std::string> choices = {};
  bool nullable = false;                ///< absent means null in the echo
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  std::vector<std::pair<std::string, json>> footer;
};

struct Report {
  json result = json::object();
  std::optional<Table> table;
  int code = kOk;
};

using Handler = std::function<Report(const json&)>;

struct Command {
  std::string path;
  std::string help;
  std::vector<OptionDef> options;
  Handler handler;
};

json canonical_value(const OptionDef& def, const std::string& text) {
  const std::string where = "--" + def.name;
  try {
    switch (def.kind) {
      case Kind::seq: {
        auto doc = resolve_spec_argument(text);
        (void)parse_weight_spec(doc);
        return doc;
      }
      case Kind::index: {
        auto doc = resolve_spec_argument(text);
        (void)parse_index_spec(doc);
        return doc;
      }
      case Kind::alpha:
        return resolve_alpha_argument(text);
      case Kind::fourier:
        if (!text.empty() && text.front() == '{') return parse_json_text(text, where);
        return text;
      case Kind::count:
        return parse_count(text);
      case Kind::counts:
        return parse_n_list(text);
      case Kind::indices:
        return parse_index_list(text);
      case Kind::real:
        return parse_real(text);
      case Kind::text:
        if (!def.choices.empty() && std::find(def.choices.begin(), def.choices.end(), text) == def.choices.end()) {
          std::string all;
          for (const auto& c : def.choices) all += (all.empty() ? "" : ", ") + c;
          throw SpecError("expected one of " + all);
        }
        return text;
      case Kind::windows:
        return parse_windows(text);
      case Kind::rational:
        return canonical_rational(text);
    }
  } catch (const SpecError& e) {
    throw SpecError(where + ": " + e.what());
  }
  return text;
}

/// Inverse of canonical_value, used to replay an echoed config.
std::string argument_text(const OptionDef& def, const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_object()) return v.dump();
  if (def.kind == Kind::windows) {
    std::string s;
    for (const auto& w : v) s += (s.empty() ? "" : ",") + w[0].dump() + ":" + w[1].dump();
    return s;
  }
  if (v.is_array()) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x.dump();
    return s;
  }
  return v.dump();
}

WeightSequence weights_of(const json& cfg) { return parse_weight_spec(cfg.at("seq")); }

IndexSequence index_of(const json& cfg) { return parse_index_spec(cfg.at("u")); }

QMultSeq qmult_of(const json& cfg) {
  auto seq = qmult_from_spec(cfg.at("seq"));
  if (!seq) throw SpecError("--seq: this command needs a q-multiplicative sequence (qmult, thue_morse or gtm)");
  return *seq;
}

json complex_json(complex z) { return json{{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}}; }

json sup_json(const SupReport& r) {
  return json{{"N", r.n},          {"lower", r.lower},         {"upper", r.upper},
              {"slack", r.slack},  {"argmax", r.argmax},       {"grid_size", r.grid_size},
              {"mode", to_string(r.mode)}, {"certified", r.certified}, {"note", r.note}};
}

SupOptions sup_options(const json& cfg) {
  SupOptions o;
  o.mode = cfg.at("mode") == "certified" ? SupMode::certified : SupMode::fast;
  o.tolerance = cfg.at("tol").get<double>();
  if (cfg.contains("max-grid")) o.max_grid = cfg.at("max-grid").get<std::uint64_t>();
  return o;
}

RotationSystem rotation_of(const json& cfg) {
  RotationSystem sys{parse_alpha(cfg.at("alpha")), TorusPoint{}};
  if (cfg.contains("x0")) sys.x0 = point_from_rational(cfg.at("x0").get<std::string>());
  return sys;
}

std::vector<json> value_row(const WeightSequence& theta, std::uint64_t k) {
  const auto z = theta.at(k);
  const auto e = theta.exact_at(k);
  return {k, z.real(), z.imag(),
          e ? json(std::to_string(e->num()) + "/" + std::to_string(e->order())) : json(nullptr)};
}

Report values_report(const WeightSequence& theta, const std::vector<std::uint64_t>& ks) {
  Report rep;
  Table t{{"n", "re", "im", "exact"}, {}, {}};
  json values = json::array();
  for (auto k : ks) {
    auto row = value_row(theta, k);
    values.push_back({{"n", row[0]}, {"re", row[1]}, {"im", row[2]}, {"exact", row[3]}});
    t.rows.push_back(std::move(row));
  }
  rep.result["sequence"] = theta.describe();
  rep.result["values"] = values;
  rep.table = std::move(t);
  return rep;
}

Report seq_eval(const json& cfg) {
  return values_report(weights_of(cfg), cfg.at("n").get<std::vector<std::uint64_t>>());
}

Report seq_gen(const json& cfg) {
  const auto n = cfg.at("N").get<std::uint64_t>();
  const auto start = cfg.at("start").get<std::uint64_t>();
  if (n > 10000000) throw SpecError("--N: at most 10^7 terms");
  std::vector<std::uint64_t> ks(n);
  std::iota(ks.begin(), ks.end(), start);
  return values_report(weights_of(cfg), ks);
}

Report expsum_sum(const json& cfg) {
  const auto theta = weights_of(cfg);
  const auto u = index_of(cfg);
  const auto n = cfg.at("N").get<std::uint64_t>();
  const auto z = weighted_exp_sum(theta, u, n, point_from_rational(cfg.at("x").get<std::string>()));
  Report rep;
  rep.result = complex_json(z);
  return rep;
}

Report expsum_sup(const json& cfg) {
  const auto r = sup_norm(weights_of(cfg), index_of(cfg), cfg.at("N").get<std::uint64_t>(), sup_options(cfg));
  Report rep;
  rep.result = sup_json(r);
  rep.table = Table{{"N", "sup_lower", "sup_upper", "slack", "argmax", "grid_size", "mode", "certified"},
                    {{r.n, r.lower, r.upper, r.slack, r.argmax, r.grid_size, to_string(r.mode), r.certified}},
                    {}};
  return rep;
}

Report expsum_delta(const json& cfg) {
  const auto ns = cfg.at("N").get<std::vector<std::uint64_t>>();
  const auto fit = delta_fit(weights_of(cfg), index_of(cfg), ns, sup_options(cfg));
  Report rep;
  Table t{{"N", "sup_lower", "sup_upper", "grid_size", "mode"}, {}, {}};
  json points = json::array();
  for (const auto& p : fit.points) {
    points.push_back(sup_json(p));
    t.rows.push_back({p.n, p.lower, p.upper, p.grid_size, to_string(p.mode)});
  }
  t.footer = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}};
  rep.result = json{{"points", points}, {"slope", fit.slope}, {"intercept", fit.intercept},
                    {"residual", fit.residual}};
  rep.table = std::move(t);
  return rep;
}

Report expsum_window(const json& cfg) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> windows;
  for (const auto& w : cfg.at("windows")) windows.emplace_back(w[0].get<std::uint64_t>(), w[1].get<std::uint64_t>());
  const auto r = window_exponent(weights_of(cfg), index_of(cfg), windows, cfg.at("epsilon").get<double>());
  Report rep;
  Table t{{"m", "n", "sup", "raw_exponent", "exponent"}, {}, {}};
  json rows = json::array();
  for (const auto& w : r.rows) {
    rows.push_back({{"m", w.m}, {"n", w.n}, {"sup", w.sup}, {"raw_exponent", w.raw_exponent},
                    {"exponent", w.exponent}});
    t.rows.push_back({w.m, w.n, w.sup, w.raw_exponent, w.exponent});
  }
  t.footer = {{"max_exponent", r.max_exponent}, {"max_raw_exponent", r.max_raw_exponent}};
  rep.result = json{{"windows", rows}, {"max_exponent", r.max_exponent},
                    {"max_raw_exponent", r.max_raw_exponent}, {"epsilon", r.epsilon}};
  rep.table = std::move(t);
  return rep;
}

Report expsum_shifted(const json& cfg) {
  const auto t = cfg.at("t").get<std::uint64_t>();
  if (t > 40) throw SpecError("--t: at most 40");
  const auto r = shifted_sum_check(qmult_of(cfg), cfg.at("N").get<std::uint64_t>(), cfg.at("p").get<std::uint64_t>(),
                                   static_cast<int>(t), cfg.at("samples").get<std::size_t>(),
                                   cfg.at("seed").get<std::uint64_t>());
  Report rep;
  rep.result = json{{"pass", r.pass}, {"worst_margin", r.worst_margin}, {"witness_x", r.witness_x},
                    {"lhs", r.lhs}, {"rhs", r.rhs}};
  rep.code = r.pass ? kOk : kAssertion;
  return rep;
}

json density_curve(const ResonanceReport& rr) {
  json curve = json::array();
  for (std::size_t i = 0; i < rr.density.size(); ++i) curve.push_back({{"N", i + 1}, {"density", rr.density[i]}});
  return curve;
}

Table density_table(const ResonanceReport& rr) {
  // density at level n is card(I intersect [0, n]) / (n + 1)
  Table t{{"n", "in_M", "in_I", "density"}, {}, {}};
  std::size_t next = 0;
  for (std::size_t n = 0; n < rr.density.size(); ++n) {
    const bool coherent = next < rr.coherent.size() && rr.coherent[next] == n;
    if (coherent) ++next;
    t.rows.push_back({n, static_cast<bool>(rr.resonant[n]), coherent, rr.density[n]});
  }
  t.footer = {{"alpha_hat", rr.alpha_hat}};
  return t;
}

Report cond_report(const json& cfg) {
  const auto seq = qmult_of(cfg);
  const auto rr = resonance_sets(seq, cfg.at("horizon").get<std::size_t>());
  json m = json::array();
  json peaks = json::array();
  for (std::size_t n = 0; n < rr.resonant.size(); ++n) {
    if (!rr.resonant[n]) continue;
    m.push_back(n);
    peaks.push_back({{"n", n}, {"x", std::to_string(*rr.peak_points[n]) + "/" + std::to_string(seq.r())}});
  }
  Report rep;
  rep.result = json{{"alpha_hat", rr.alpha_hat},   {"I", rr.coherent},
                    {"M", m},                      {"peak_points", peaks},
                    {"peak_route_agrees", rr.peak_route_agrees},
                    {"I_density_curve", density_curve(rr)}};
  rep.table = density_table(rr);
  return rep;
}

Report cond_taux(const json& cfg) {
  const auto seq = qmult_of(cfg);
  const auto rr = resonance_sets(seq, cfg.at("horizon").get<std::size_t>());
  const auto tb = taux_bound(seq, rr, cfg.at("tol").get<double>());
  json pairs = json::array();
  for (const auto& p : tb.pair_types) {
    pairs.push_back({{"level", p.level}, {"row_n", p.first}, {"row_n_plus_1", p.second},
                     {"sup", p.sup}, {"slack", p.slack}, {"grid", p.grid}});
  }
  Report rep;
  rep.result = json{{"alpha_hat", rr.alpha_hat},         {"I_density_curve", density_curve(rr)},
                    {"s", tb.s},                         {"s_slack", tb.s_upper_slack},
                    {"delta_bound", tb.delta_bound},     {"pair_types", pairs},
                    {"q2r2_linear_bound", tb.q2r2_linear_bound ? json(*tb.q2r2_linear_bound) : json(nullptr)}};
  if (tb.q2r2_linear_bound) {
    rep.result["note"] =
        "q2r2_linear_bound is the displayed specialization 0.82 - 0.18 alpha; it decreases in alpha while "
        "delta_bound = alpha + (1 - alpha) log_q(s) increases; both are reported";
  }
  const auto& measure = cfg.at("measure");
  if (!measure.is_null()) {
    const auto fit = delta_fit(WeightSequence::qmult(seq), IndexSequence::identity(),
                               measure.get<std::vector<std::uint64_t>>());
    rep.result["measured_slope"] = fit.slope;
  }
  rep.table = density_table(rr);
  rep.table->footer.push_back({"s", tb.s});
  rep.table->footer.push_back({"s_slack", tb.s_upper_slack});
  rep.table->footer.push_back({"delta_bound", tb.delta_bound});
  if (rep.result.contains("measured_slope")) rep.table->footer.push_back({"measured_slope", rep.result["measured_slope"]});
  return rep;
}

Report dyn_birkhoff(const json& cfg) {
  const auto sys = rotation_of(cfg);
  const double beta = cfg.at("beta").get<double>();
  const auto f = parse_fourier(cfg.at("f"), sys.alpha, beta);
  const auto r = weighted_birkhoff(weights_of(cfg), index_of(cfg), f, sys, cfg.at("N").get<std::uint64_t>(), beta);
  Report rep;
  Table t{{"frequency", "coef_re", "coef_im", "kernel_re", "kernel_im", "contribution_re", "contribution_im"}, {}, {}};
  json terms = json::array();
  for (const auto& x : r.terms) {
    terms.push_back({{"frequency", x.frequency}, {"coefficient", complex_json(x.coefficient)},
                     {"kernel", complex_json(x.kernel)}, {"contribution", complex_json(x.contribution)}});
    t.rows.push_back({x.frequency, x.coefficient.real(), x.coefficient.imag(), x.kernel.real(), x.kernel.imag(),
                      x.contribution.real(), x.contribution.imag()});
  }
  t.footer = {{"value_re", r.value.real()}, {"value_im", r.value.imag()}, {"value_abs", std::abs(r.value)}};
  rep.result = json{{"value", complex_json(r.value)}, {"decomposed", complex_json(r.decomposed)},
                    {"terms", terms}, {"f", f.label()}, {"f_a_norm", f.a_norm()}};
  const auto& delta = cfg.at("delta");
  rep.result["beta0"] = delta.is_null() ? json(nullptr) : json(beta_threshold(delta.get<double>()));
  rep.table = std::move(t);
  return rep;
}

Report dyn_uniform(const json& cfg) {
  const auto sys = rotation_of(cfg);
  const double beta = cfg.at("beta").get<double>();
  const double exponent = cfg.at("exponent").get<double>();
  const auto f = parse_fourier(cfg.at("f"), sys.alpha, beta);
  const auto theta = weights_of(cfg);
  const auto u = index_of(cfg);
  const auto grid = cfg.at("grid").get<std::uint64_t>();
  Report rep;
  Table t{{"N", "max_raw", "max_normalized", "argmax", "ratio"}, {}, {}};
  json rows = json::array();
  double c_fit = 0.0;
  for (auto n : cfg.at("N").get<std::vector<std::uint64_t>>()) {
    const auto r = uniform_sup_birkhoff(theta, u, f, sys, n, grid, beta);
    const double ratio = r.max_raw / (std::pow(static_cast<double>(n), exponent) * f.a_norm());
    c_fit = std::max(c_fit, ratio);
    rows.push_back({{"N", n}, {"max_raw", r.max_raw}, {"max_normalized", r.max_normalized},
                    {"argmax", r.argmax}, {"ratio", ratio}});
    t.rows.push_back({n, r.max_raw, r.max_normalized, r.argmax, ratio});
  }
  t.footer = {{"C_fit", c_fit}, {"f_a_norm", f.a_norm()}};
  rep.result = json{{"rows", rows}, {"C_fit", c_fit}, {"f_a_norm", f.a_norm()}, {"exponent", exponent}};
  rep.table = std::move(t);
  return rep;
}

Table curve_table(const std::vector<CurvePoint>& curve) {
  Table t{{"N", "abs"}, {}, {}};
  for (const auto& p : curve) t.rows.push_back({p.n, p.magnitude});
  return t;
}

json curve_json(const std::vector<CurvePoint>& curve) {
  json out = json::array();
  for (const auto& p : curve) out.push_back({{"N", p.n}, {"abs", p.magnitude}});
  return out;
}

Report dyn_squares(const json& cfg) {
  const auto alpha = parse_alpha(cfg.at("alpha"));
  const auto r = squares_average(weights_of(cfg), alpha.fraction(), cfg.at("N").get<std::uint64_t>());
  Report rep;
  rep.result = json{{"value", complex_json(r.value)}, {"curve", curve_json(r.curve)}};
  rep.table = curve_table(r.curve);
  rep.table->footer = {{"value_abs", std::abs(r.value)}};
  return rep;
}

Report dyn_clt(const json& cfg) {
  const auto sys = rotation_of(cfg);
  CltConfig c;
  c.beta = cfg.at("beta").get<double>();
  c.trials = cfg.at("trials").get<std::size_t>();
  c.n = cfg.at("N").get<std::uint64_t>();
  c.kind = parse_theta_kind(cfg.at("kind").get<std::string>());
  c.seed = cfg.at("seed").get<std::uint64_t>();
  c.base = weights_of(cfg);
  if (c.kind != ThetaKind::iid) c.f = parse_fourier(cfg.at("f"), sys.alpha, c.beta);
  const auto u = index_of(cfg);
  std::optional<H4Report> h4;
  if (!u.is_identity()) {
    std::vector<std::uint64_t> ns;
    for (std::uint64_t n = 256; n <= std::max<std::uint64_t>(c.n, 4096) && n <= (1ULL << 20); n *= 2) ns.push_back(n);
    h4 = h4_report(u, cfg.at("zeta").get<double>(), ns);
  }
  const auto r = clt_experiment(c, sys, u, h4);
  Report rep;
  Table t{{"trial", "Z"}, {}, {}};
  for (std::size_t i = 0; i < r.samples.size(); ++i) t.rows.push_back({i, r.samples[i]});
  t.footer = {{"mean", r.mean}, {"var", r.variance}, {"ks", r.ks}, {"trials", r.samples.size()}, {"seed", c.seed}};
  rep.result = json{{"mean", r.mean},
                    {"var", r.variance},
                    {"ks", r.ks},
                    {"trials", r.samples.size()},
                    {"seed", c.seed},
                    {"f", r.f_label},
                    {"sigma", r.sigma ? json(*r.sigma) : json(nullptr)},
                    {"exploratory", c.kind != ThetaKind::iid},
                    {"samples", r.samples}};
  rep.table = std::move(t);
  return rep;
}

Report dyn_dtype(const json& cfg) {
  const auto r = diophantine_type(parse_alpha(cfg.at("alpha")), cfg.at("depth").get<std::size_t>());
  Report rep;
  Table t{{"m", "a", "p", "q", "log_q", "log_inv_distance"}, {}, {}};
  json rows = json::array();
  for (const auto& row : r.rows) {
    const json lid = std::isfinite(row.log_inv_distance) ? json(row.log_inv_distance) : json(nullptr);
    rows.push_back({{"m", row.m}, {"a", row.a}, {"p", row.p}, {"q", row.q}, {"log_q", row.log_q},
                    {"log_inv_distance", lid}});
    t.rows.push_back({row.m, row.a, row.p, row.q, row.log_q, lid});
  }
  t.footer = {{"d_hat", r.d_hat}, {"window", r.window}};
  rep.result = json{{"d_hat", r.d_hat}, {"window", r.window}, {"convention", r.convention}, {"convergents", rows}};
  rep.table = std::move(t);
  return rep;
}

Report check_lemmas(const json& cfg) {
  const auto seed = cfg.at("seed").get<std::uint64_t>();
  const auto count = cfg.at("instances").get<std::size_t>();
  const std::vector<SuiteResult> suites{vdc_suite(seed, count), shifted_sum_suite(seed, count),
                                        product_formula_suite(seed, count)};
  Report rep;
  Table t{{"suite", "instances", "failures", "worst"}, {}, {}};
  bool pass = true;
  for (const auto& s : suites) {
    rep.result[s.name] = to_json(s);
    t.rows.push_back({s.name, s.instances, s.failures, s.worst});
    pass = pass && s.failures == 0;
  }
  rep.result["pass"] = pass;
  t.footer = {{"pass", pass}};
  rep.table = std::move(t);
  rep.code = pass ? kOk : kAssertion;
  return rep;
}

const OptionDef kSeq{"seq", Kind::seq, std::nullopt, "weight sequence: name, inline JSON or file"};
const OptionDef kIndex{"u", Kind::index, "identity", "index sequence: name, inline JSON or file"};
const OptionDef kMode{"mode", Kind::text, "fast", "sup-norm mode", {"fast", "certified"}};
const OptionDef kTol{"tol", Kind::real, "0.001", "certified mode: max upper - lower"};

std::vector<Command> commands() {
  const OptionDef seq_tm{"seq", Kind::seq, "thue_morse", "weight sequence"};
  const OptionDef alpha{"alpha", Kind::alpha, "golden", "rotation number"};
  const OptionDef f{"f", Kind::fourier, "cos", "test function: cos, e1, one, surrogate or {\"terms\":...}"};
  const std::vector<OptionDef> delta_opts{kSeq, kIndex, {"N", Kind::counts, "2^8..2^20", "dyadic N list"}, kMode, kTol};
  return {
      {"seq eval", "evaluate theta at the given indices",
       {kSeq, {"n", Kind::indices, "0..15", "indices: a..b or a comma list"}}, seq_eval},
      {"seq gen", "generate a prefix",
       {kSeq, {"N", Kind::count, "64", "number of terms"}, {"start", Kind::count, "0", "first index"}}, seq_gen},
      {"expsum sum", "V_N(x) = sum_{k<N} theta(k) e(x u_k)",
       {kSeq, kIndex, {"N", Kind::count, std::nullopt, "number of terms"},
        {"x", Kind::rational, "0", "frequency, rational"}},
       expsum_sum},
      {"expsum sup", "sup over x of |V_N(x)|",
       {kSeq, kIndex, {"N", Kind::count, std::nullopt, "number of terms"}, kMode, kTol,
        {"max-grid", Kind::count, "2^26", "grid cap"}},
       expsum_sup},
      {"expsum delta", "fitted growth exponent of the sup norm", delta_opts, expsum_delta},
      {"delta", "alias of expsum delta", delta_opts, expsum_delta},
      {"expsum window", "exponents of windowed sums",
       {kSeq, kIndex, {"windows", Kind::windows, std::nullopt, "m:n,m:n,... (inclusive)"},
        {"epsilon", Kind::real, "0.01", "slowly varying allowance"}},
       expsum_window},
      {"expsum shifted-check", "shifted-sum inequality at random x",
       {kSeq, {"N", Kind::count, std::nullopt, "number of terms"}, {"p", Kind::count, "0", "shift"},
        {"t", Kind::count, "2", "block level"}, {"samples", Kind::count, "64", "x samples"},
        {"seed", Kind::count, "0", "random seed"}},
       expsum_shifted},
      {"cond report", "resonance sets M, I and the density of I",
       {kSeq, {"horizon", Kind::count, "64", "number of levels"}}, cond_report},
      {"cond taux", "pair constant s and the exponent bound",
       {kSeq, {"horizon", Kind::count, "64", "number of levels"},
        {"tol", Kind::real, "1e-6", "certified slack on s"},
        {"measure", Kind::counts, std::nullopt, "also fit the exponent over this N list", {}, true}},
       cond_taux},
      {"dyn birkhoff", "weighted Birkhoff average with per-frequency decomposition",
       {seq_tm, kIndex, alpha, {"x0", Kind::rational, "0", "initial point"}, f,
        {"N", Kind::count, std::nullopt, "number of terms"}, {"beta", Kind::real, "1", "normalization exponent"},
        {"delta", Kind::real, std::nullopt, "exponent delta; reports beta0 = (delta + 2) / 3", {}, true}},
       dyn_birkhoff},
      {"dyn uniform", "x-grid max of the weighted Birkhoff sum",
       {seq_tm, kIndex, alpha, f, {"N", Kind::counts, std::nullopt, "N list"},
        {"grid", Kind::count, "1024", "x-grid size"}, {"beta", Kind::real, "1", "normalization exponent"},
        {"exponent", Kind::real, "0.8", "envelope exponent for the fitted constant"}},
       dyn_uniform},
      {"dyn squares", "(1/N) sum theta(k) e(k^2 alpha)",
       {seq_tm, {"alpha", Kind::alpha, std::nullopt, "alpha: named, JSON or rational"},
        {"N", Kind::count, std::nullopt, "number of terms"}},
       dyn_squares},
      {"dyn clt", "distribution of normalized weighted sums over random x",
       {seq_tm, {"kind", Kind::text, "plus", "theta kind", {"plus", "minus", "iid"}}, kIndex,
        {"zeta", Kind::real, "1", "H4 limit of u_N / N"}, alpha, {"f", Kind::fourier, "surrogate", "test function"},
        {"beta", Kind::real, "0.5", "normalization exponent"}, {"trials", Kind::count, "1000", "trials"},
        {"N", Kind::count, "2^16", "number of terms"}, {"seed", Kind::count, "0", "random seed"}},
       dyn_clt},
      {"dyn dtype", "continued-fraction convergents and Diophantine type",
       {{"alpha", Kind::alpha, std::nullopt, "alpha"}, {"depth", Kind::count, "30", "number of convergents"}},
       dyn_dtype},
      {"check lemmas", "randomized van der Corput, shifted-sum and product-formula suites",
       {{"seed", Kind::count, "0", "random seed"}, {"instances", Kind::count, "1000", "instances per suite"}},
       check_lemmas},
  };
}

// ---------------------------------------------------------------- emission

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  }
  if (v.is_structured()) return csv_cell(json(v.dump()));
  return v.dump();
}

std::string render(const json& config, const Report& rep, const std::string& format) {
  std::ostringstream os;
  if (format == "json") {
    const json doc{{"detergo_version", kVersion}, {"config", config}, {"result", rep.result}};
    os << doc.dump(2) << '\n';
    return os.str();
  }
  os << "# detergo " << kVersion << '\n';
  os << "# config " << config.dump() << '\n';
  Table table;
  if (rep.table) {
    table = *rep.table;
  } else {
    table.columns = {"key", "value"};
    for (const auto& [k, v] : rep.result.items()) table.rows.push_back({k, v});
  }
  const auto line = [&](const std::vector<json>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << csv_cell(cells[i]);
    os << '\n';
  };
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i];
  os << '\n';
  for (const auto& row : table.rows) line(row);
  for (const auto& [k, v] : table.footer) line({k, v});
  return os.str();
}

struct Invocation {
  const Command* command = nullptr;
  json config;
};

int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
  const Report rep = inv.command->handler(inv.config);
  const auto text = render(inv.config, rep, inv.config.at("format").get<std::string>());
  const auto path = inv.config.at("out").get<std::string>();
  if (path == "-") {
    out << text;
  } else {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw SpecError("--out: cannot write '" + path + "'");
    file << text;
  }
  if (rep.code == kAssertion) {
    err << "assertion failure: " << rep.result.dump() << '\n';
  }
  return rep.code;
}

json build_config(const Command& cmd, const std::map<std::string, std::optional<std::string>>& raw,
                  const std::string& out, const std::string& format) {
  json cfg = json::object();
  cfg["command"] = cmd.path;
  for (const auto& def : cmd.options) {
    const auto& given = raw.at(def.name);
    if (given) {
      cfg[def.name] = canonical_value(def, *given);
    } else if (def.nullable) {
      cfg[def.name] = nullptr;
    } else if (def.fallback) {
      cfg[def.name] = canonical_value(def, *def.fallback);
    } else {
      throw SpecError("--" + def.name + " is required");
    }
  }
  std::string fmt = format;
  std::string path = out;
  if (out == "csv" || out == "json") {
    fmt = out;
    path = "-";
  }
  cfg["format"] = fmt;
  cfg["out"] = path;
  return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto table = commands();
  CLI::App app{"detergo: weighted exponential sums, q-multiplicative sequences and rotation averages", "detergo"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: DETERGO_THREADS or all cores)");

  std::string out_path = "-";
  std::string format = "json";
  std::vector<std::map<std::string, std::optional<std::string>>> raw(table.size());
  std::vector<CLI::App*> leaves(table.size(), nullptr);
  std::map<std::string, CLI::App*> groups;
  std::string rerun_config;

  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& cmd = table[i];
    CLI::App* parent = &app;
    std::string leaf = cmd.path;
    if (auto space = cmd.path.find(' '); space != std::string::npos) {
      const auto group = cmd.path.substr(0, space);
      leaf = cmd.path.substr(space + 1);
      if (!groups.contains(group)) {
        groups[group] = app.add_subcommand(group, group + " commands");
        groups[group]->require_subcommand(1);
      }
      parent = groups[group];
    }
    auto* sub = parent->add_subcommand(leaf, cmd.help);
    leaves[i] = sub;
    for (const auto& def : cmd.options) {
      auto& slot = raw[i][def.name];
      std::string flags = "--" + def.name;
      if (def.name == "seq") flags += ",--spec";
      std::string help = def.help;
      if (def.fallback) help += " [default: " + *def.fallback + "]";
      sub->add_option_function<std::string>(flags, [&slot](const std::string& v) { slot = v; }, help);
    }
    sub->add_option("--out", out_path, "output path, '-' for stdout, or csv|json as a format shorthand");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  }
  auto* rerun = app.add_subcommand("rerun", "replay the config block of an earlier report");
  rerun->add_option("--config", rerun_config, "report file, config JSON file, or inline JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kValidation;
  }
  if (threads < 0) {
    err << "error: --threads must be nonnegative\n";
    return kValidation;
  }
  const int previous_threads = thread_count();
  if (threads > 0) set_thread_count(threads);
  struct Restore {
    int n;
    ~Restore() { set_thread_count(n); }
  } restore{previous_threads};

  try {
    Invocation inv;
    if (rerun->parsed()) {
      json doc = !rerun_config.empty() && rerun_config.front() == '{' ? parse_json_text(rerun_config, "--config")
                                                                    : resolve_spec_argument(rerun_config);
      if (doc.contains("config")) doc = doc["config"];
      const auto name = doc.value("command", std::string{});
      const auto it = std::find_if(table.begin(), table.end(), [&](const Command& c) { return c.path == name; });
      if (it == table.end()) throw SpecError("--config: unknown command '" + name + "'");
      std::map<std::string, std::optional<std::string>> values;
      for (const auto& def : it->options) {
        if (doc.contains(def.name) && !doc[def.name].is_null()) {
          values[def.name] = argument_text(def, doc[def.name]);
        } else {
          values[def.name] = std::nullopt;
        }
      }
      inv.command = &*it;
      inv.config = build_config(*it, values, doc.value("out", std::string("-")), doc.value("format", std::string("json")));
    } else {
      for (std::size_t i = 0; i < table.size(); ++i) {
        if (leaves[i]->parsed()) {
          inv.command = &table[i];
          inv.config = build_config(table[i], raw[i], out_path, format);
        }
      }
    }
    if (!inv.command) throw SpecError("unknown command");
    return execute(inv, out, err);
  } catch (const InequalityViolation& e) {
    err << "assertion failure: " << e.what() << '\n';
    return kAssertion;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
}

}  // namespace detergo::cli
