#include "detergo/spec_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "detergo/errors.hpp"

namespace detergo {
namespace {

void require_keys(const json& doc, const std::set<std::string>& allowed, const std::string& where) {
  if (!doc.is_object()) throw SpecError(where + ": expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.contains(key)) throw SpecError(where + ": unknown field '" + key + "'");
  }
}

const json& field(const json& doc, const std::string& key, const std::string& where) {
  auto it = doc.find(key);
  if (it == doc.end()) throw SpecError(where + ": missing field '" + key + "'");
  return *it;
}

std::int64_t as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw SpecError(where + ": expected an integer");
  return v.get<std::int64_t>();
}

double as_real(const json& v, const std::string& where) {
  if (!v.is_number()) throw SpecError(where + ": expected a number");
  return v.get<double>();
}

std::vector<std::int64_t> as_int_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw SpecError(where + ": expected an array of integers");
  std::vector<std::int64_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_int(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<SkeletonRow> as_rows(const json& v, const std::string& where) {
  if (!v.is_array()) throw SpecError(where + ": expected an array of rows");
  std::vector<SkeletonRow> rows;
  for (std::size_t i = 0; i < v.size(); ++i) {
    rows.push_back(as_int_list(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return rows;
}

QMultSeq parse_qmult(const json& doc) {
  SkeletonSpec spec;
  spec.q = static_cast<int>(as_int(field(doc, "q", "qmult"), "qmult.q"));
  spec.r = as_int(field(doc, "r", "qmult"), "qmult.r");
  const auto& sk = field(doc, "skeleton", "qmult");
  require_keys(sk, {"preperiod", "period"}, "qmult.skeleton");
  if (sk.contains("preperiod")) spec.preperiod = as_rows(sk["preperiod"], "qmult.skeleton.preperiod");
  spec.period = as_rows(field(sk, "period", "qmult.skeleton"), "qmult.skeleton.period");
  try {
    return QMultSeq(std::move(spec));
  } catch (const SpecError& e) {
    throw SpecError(std::string("qmult.skeleton: ") + e.what());
  }
}

std::vector<Word> parse_blocks(const json& doc, std::int64_t r) {
  const auto& blocks = field(doc, "blocks", "gtm");
  if (!blocks.is_array() || blocks.empty()) throw SpecError("gtm.blocks: expected a nonempty array");
  std::vector<Word> out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto nums = as_int_list(blocks[i], "gtm.blocks[" + std::to_string(i) + "]");
    out.push_back(make_word(nums, r));
  }
  return out;
}

WeightSequence parse_base(const json& doc) {
  const auto type = field(doc, "type", "sequence").get<std::string>();
  if (type == "qmult") {
    require_keys(doc, {"type", "q", "r", "skeleton", "power", "shift", "split"}, "qmult");
    return WeightSequence::qmult(parse_qmult(doc));
  }
  if (type == "thue_morse") {
    require_keys(doc, {"type", "power", "shift", "split"}, "thue_morse");
    return WeightSequence::thue_morse();
  }
  if (type == "rudin_shapiro") {
    require_keys(doc, {"type", "t", "power", "shift", "split"}, "rudin_shapiro");
    if (!doc.contains("t")) return WeightSequence::rudin_shapiro(Rational{1, 2});
    const auto& t = doc["t"];
    if (t.is_string()) return WeightSequence::rudin_shapiro(Rational::parse(t.get<std::string>()));
    return WeightSequence::rudin_shapiro_real(as_real(t, "rudin_shapiro.t"));
  }
  if (type == "gtm") {
    require_keys(doc, {"type", "r", "blocks", "power", "shift", "split"}, "gtm");
    const auto r = as_int(field(doc, "r", "gtm"), "gtm.r");
    return WeightSequence::gtm(r, parse_blocks(doc, r));
  }
  if (type == "substitution") {
    require_keys(doc, {"type", "r", "images", "seed", "power", "shift", "split"}, "substitution");
    const auto r = as_int(field(doc, "r", "substitution"), "substitution.r");
    const auto& images = field(doc, "images", "substitution");
    if (!images.is_object()) throw SpecError("substitution.images: expected an object");
    std::map<std::int64_t, Word> map;
    for (const auto& [key, value] : images.items()) {
      std::int64_t letter = 0;
      try {
        letter = std::stoll(key);
      } catch (const std::exception&) {
        throw SpecError("substitution.images: letter key '" + key + "' is not an integer");
      }
      map.emplace(letter, make_word(as_int_list(value, "substitution.images." + key), r));
    }
    const auto seed = doc.contains("seed") ? as_int(doc["seed"], "substitution.seed") : 0;
    return WeightSequence::substitution(Substitution(r, std::move(map)), UnitRoot(seed, r));
  }
  if (type == "constant") {
    require_keys(doc, {"type", "c", "power", "shift", "split"}, "constant");
    const auto& c = field(doc, "c", "constant");
    if (c.is_array() && c.size() == 2) {
      return WeightSequence::constant({as_real(c[0], "constant.c[0]"), as_real(c[1], "constant.c[1]")});
    }
    return WeightSequence::constant({as_real(c, "constant.c"), 0.0});
  }
  if (type == "iid_rademacher") {
    require_keys(doc, {"type", "seed", "power", "shift", "split"}, "iid_rademacher");
    const auto seed = doc.contains("seed") ? as_int(doc["seed"], "iid_rademacher.seed") : 0;
    return WeightSequence::iid_rademacher(static_cast<std::uint64_t>(seed));
  }
  throw SpecError("sequence.type: unknown type '" + type + "'");
}

}  // namespace

Beta parse_beta_spec(const json& doc) {
  require_keys(doc, {"beta", "gamma", "values", "base", "type"}, "shift");
  const auto kind = field(doc, "beta", "shift").get<std::string>();
  if (kind == "log") return Beta::log();
  if (kind == "pow") return Beta::power(as_real(field(doc, "gamma", "shift"), "shift.gamma"));
  if (kind == "table") {
    std::vector<std::uint64_t> values;
    for (auto v : as_int_list(field(doc, "values", "shift"), "shift.values")) {
      if (v < 0) throw SpecError("shift.values: entries must be nonnegative");
      values.push_back(static_cast<std::uint64_t>(v));
    }
    return Beta::table(std::move(values));
  }
  if (kind == "zero") return Beta::zero();
  throw SpecError("shift.beta: unknown kind '" + kind + "'");
}

WeightSequence parse_weight_spec(const json& doc) {
  if (!doc.is_object()) throw SpecError("sequence: expected a JSON object");
  WeightSequence seq = parse_base(doc);
  if (doc.contains("power")) seq = seq.power(as_int(doc["power"], "power"));
  if (doc.contains("shift")) seq = seq.shifted(parse_beta_spec(doc["shift"]));
  if (doc.contains("split")) {
    const auto split = doc["split"].get<std::string>();
    if (split == "plus") {
      seq = seq.plus_split();
    } else if (split == "minus") {
      seq = seq.minus_split();
    } else {
      throw SpecError("split: expected \"plus\" or \"minus\"");
    }
  }
  return seq;
}

IndexSequence parse_index_spec(const json& doc) {
  if (!doc.is_object()) throw SpecError("index: expected a JSON object");
  const auto type = field(doc, "type", "index").get<std::string>();
  if (type == "identity") {
    require_keys(doc, {"type"}, "index");
    return IndexSequence::identity();
  }
  if (type == "squares") {
    require_keys(doc, {"type"}, "index");
    return IndexSequence::squares();
  }
  if (type == "log_shift") {
    require_keys(doc, {"type"}, "index");
    return IndexSequence::log_shift();
  }
  if (type == "polynomial") {
    require_keys(doc, {"type", "coeffs"}, "index");
    return IndexSequence::polynomial(as_int_list(field(doc, "coeffs", "index"), "index.coeffs"));
  }
  if (type == "beta_shift") {
    const auto base = doc.contains("base") ? parse_index_spec(doc["base"]) : IndexSequence::identity();
    return IndexSequence::beta_shift(base, parse_beta_spec(doc));
  }
  throw SpecError("index.type: unknown type '" + type + "'");
}

SkeletonSpec thue_morse_skeleton() {
  SkeletonSpec spec;
  spec.q = 2;
  spec.r = 2;
  spec.period = {{0, 1}};
  return spec;
}

std::optional<QMultSeq> qmult_from_spec(const json& doc) {
  if (!doc.is_object() || doc.contains("power") || doc.contains("shift") || doc.contains("split")) {
    return std::nullopt;
  }
  const auto type = doc.value("type", std::string{});
  if (type == "qmult") return parse_qmult(doc);
  if (type == "thue_morse") return QMultSeq(thue_morse_skeleton());
  if (type == "gtm") {
    const auto r = as_int(field(doc, "r", "gtm"), "gtm.r");
    const auto blocks = parse_blocks(doc, r);
    SkeletonSpec spec;
    spec.q = static_cast<int>(blocks.front().size());
    spec.r = r;
    for (const auto& b : blocks) {
      if (b.size() != blocks.front().size()) return std::nullopt;
      SkeletonRow row;
      for (const auto& letter : b) row.push_back(letter.num());
      spec.period.push_back(row);
    }
    return QMultSeq(std::move(spec));
  }
  return std::nullopt;
}

json skeleton_to_json(const SkeletonSpec& spec) {
  return json{{"type", "qmult"},
              {"q", spec.q},
              {"r", spec.r},
              {"skeleton", {{"preperiod", spec.preperiod}, {"period", spec.period}}}};
}

json resolve_spec_argument(const std::string& arg) {
  if (arg == "thue_morse") return json{{"type", "thue_morse"}};
  if (arg == "rudin_shapiro") return json{{"type", "rudin_shapiro"}, {"t", "1/2"}};
  if (arg == "ones") return json{{"type", "constant"}, {"c", 1}};
  if (arg == "identity" || arg == "squares" || arg == "log_shift") return json{{"type", arg}};
  if (!arg.empty() && arg.front() == '{') {
    try {
      return json::parse(arg);
    } catch (const json::parse_error& e) {
      throw SpecError(std::string("inline JSON: ") + e.what());
    }
  }
  std::ifstream in(arg);
  if (!in) throw SpecError("cannot read spec file '" + arg + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError(arg + ": " + e.what());
  }
}

}  // namespace detergo
