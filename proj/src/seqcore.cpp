#include "detergo/seqcore.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <variant>

#include "detergo/errors.hpp"
#include "detergo/fit.hpp"
#include "detergo/parallel.hpp"
#include "detergo/random.hpp"

namespace detergo {

// ---------------------------------------------------------------- UnitRoot

UnitRoot::UnitRoot(std::int64_t num, std::int64_t order) : order_(order) {
  if (order < 1) throw SpecError("root order must be positive");
  num_ = num % order;
  if (num_ < 0) num_ += order;
}

UnitRoot UnitRoot::pow(std::int64_t a) const {
  const auto prod = static_cast<__int128>(num_) * a;
  auto m = static_cast<std::int64_t>(prod % order_);
  return UnitRoot(m, order_);
}

UnitRoot operator*(UnitRoot a, UnitRoot b) {
  if (a.order_ != b.order_) {
    throw SpecError("mixed root orders " + std::to_string(a.order_) + " and " +
                    std::to_string(b.order_));
  }
  return UnitRoot(a.num_ + b.num_, a.order_);
}

Word make_word(std::span<const std::int64_t> nums, std::int64_t order) {
  Word w;
  w.reserve(nums.size());
  for (auto n : nums) w.emplace_back(n, order);
  return w;
}

std::string format_word(const Word& w) {
  std::ostringstream os;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) os << ' ';
    os << w[i].num();
  }
  return os.str();
}

// ---------------------------------------------------------------- Rational

Rational Rational::parse(const std::string& raw) {
  std::string text;
  for (char c : raw) {
    if (!std::isspace(static_cast<unsigned char>(c))) text.push_back(c == ',' ? '.' : c);
  }
  if (text.empty()) throw SpecError("empty rational");
  auto parse_int = [&](const std::string& s) -> std::int64_t {
    std::size_t pos = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw SpecError("malformed rational '" + raw + "'");
    }
    if (pos != s.size()) throw SpecError("malformed rational '" + raw + "'");
    return v;
  };
  Rational r;
  if (auto slash = text.find('/'); slash != std::string::npos) {
    r.num = parse_int(text.substr(0, slash));
    r.den = parse_int(text.substr(slash + 1));
    if (r.den == 0) throw SpecError("zero denominator in '" + raw + "'");
  } else if (auto dot = text.find('.'); dot != std::string::npos) {
    const std::string frac = text.substr(dot + 1);
    if (frac.size() > 17) throw SpecError("too many decimal digits in '" + raw + "'");
    const bool negative = !text.empty() && text[0] == '-';
    std::string whole = text.substr(0, dot);
    if (whole.empty() || whole == "-" || whole == "+") whole += "0";
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const std::int64_t w = parse_int(whole);
    const std::int64_t f = frac.empty() ? 0 : parse_int(frac);
    r.num = std::abs(w) * den + f;
    if (negative) r.num = -r.num;
    r.den = den;
  } else {
    r.num = parse_int(text);
  }
  if (r.den < 0) {
    r.num = -r.num;
    r.den = -r.den;
  }
  const auto g = std::gcd(r.num, r.den);
  if (g > 1) {
    r.num /= g;
    r.den /= g;
  }
  return r;
}

// ---------------------------------------------------------------- QMultSeq

namespace {

void validate_rows(const std::vector<SkeletonRow>& rows, const SkeletonSpec& spec,
                   const char* part) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string where = std::string(part) + " row " + std::to_string(i);
    if (row.size() != static_cast<std::size_t>(spec.q)) {
      throw SpecError(where + ": length " + std::to_string(row.size()) + " != q = " +
                      std::to_string(spec.q));
    }
    if (row[0] != 0) throw SpecError(where + ": first entry must be 0");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j] < 0 || row[j] >= spec.r) {
        throw SpecError(where + ": numerator " + std::to_string(row[j]) + " at column " +
                        std::to_string(j) + " outside [0, " + std::to_string(spec.r) + ")");
      }
    }
  }
}

}  // namespace

QMultSeq::QMultSeq(SkeletonSpec spec) : spec_(std::move(spec)) {
  if (spec_.q < 2) throw SpecError("q must be at least 2");
  if (spec_.r < 1) throw SpecError("r must be at least 1");
  if (spec_.preperiod.empty() && spec_.period.empty()) {
    throw SpecError("skeleton has no rows");
  }
  validate_rows(spec_.preperiod, spec_, "preperiod");
  validate_rows(spec_.period, spec_, "period");
}

const SkeletonRow& QMultSeq::row(std::size_t level) const {
  if (level < spec_.preperiod.size()) return spec_.preperiod[level];
  if (spec_.period.empty()) {
    throw std::out_of_range("skeleton level " + std::to_string(level) +
                            " beyond finite skeleton prefix");
  }
  return spec_.period[(level - spec_.preperiod.size()) % spec_.period.size()];
}

UnitRoot QMultSeq::at(std::uint64_t n) const {
  const auto q = static_cast<std::uint64_t>(spec_.q);
  std::int64_t sum = 0;
  for (std::size_t level = 0; n > 0; ++level, n /= q) {
    const auto digit = n % q;
    if (digit != 0) sum = (sum + row(level)[digit]) % spec_.r;
  }
  return UnitRoot(sum, spec_.r);
}

QMultSeq make_qmult(SkeletonSpec spec) { return QMultSeq(std::move(spec)); }

UnitRoot eval_qmult(const QMultSeq& seq, std::uint64_t n) { return seq.at(n); }

// ---------------------------------------------------------------- words

Word star_product(const Word& u, const Word& v) {
  Word out;
  out.reserve(u.size() * v.size());
  for (const auto& b : v) {
    for (const auto& a : u) out.push_back(a * b);
  }
  return out;
}

namespace {

void validate_blocks(const std::vector<Word>& blocks) {
  if (blocks.empty()) throw SpecError("generalized Thue-Morse needs at least one block");
  const auto order = blocks.front().empty() ? 1 : blocks.front().front().order();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    if (b.size() < 2) throw SpecError("block " + std::to_string(i) + " shorter than 2");
    if (b.front().num() != 0) {
      throw SpecError("block " + std::to_string(i) + " does not start with letter 1");
    }
    for (const auto& letter : b) {
      if (letter.order() != order) throw SpecError("mixed root orders in blocks");
    }
  }
}

}  // namespace

Word gtm_prefix(const std::vector<Word>& blocks, std::size_t length) {
  validate_blocks(blocks);
  if (length == 0) return {};
  Word w = blocks.front();
  for (std::size_t i = 1; w.size() < length; ++i) {
    w = star_product(w, blocks[i % blocks.size()]);
  }
  w.resize(length);
  return w;
}

// ---------------------------------------------------------------- Substitution

Substitution::Substitution(std::int64_t order, std::map<std::int64_t, Word> images)
    : order_(order), images_(std::move(images)) {
  if (order_ < 1) throw SpecError("substitution root order must be positive");
  if (images_.empty()) throw SpecError("substitution has no images");
  length_ = images_.begin()->second.size();
  for (const auto& [letter, img] : images_) {
    if (letter < 0 || letter >= order_) {
      throw SpecError("substitution letter " + std::to_string(letter) + " outside R_" +
                      std::to_string(order_));
    }
    if (img.size() != length_) {
      throw SpecError("substitution is not of constant length: image of " +
                      std::to_string(letter) + " has length " + std::to_string(img.size()));
    }
    if (length_ == 0) throw SpecError("substitution image is empty");
    for (const auto& b : img) {
      if (b.order() != order_) throw SpecError("substitution image mixes root orders");
      if (!images_.contains(b.num())) {
        throw SpecError("letter " + std::to_string(b.num()) + " has no image");
      }
    }
  }
}

const Word& Substitution::image(UnitRoot letter) const {
  auto it = images_.find(letter.num());
  if (letter.order() != order_ || it == images_.end()) {
    throw SpecError("letter " + std::to_string(letter.num()) + " not in the alphabet");
  }
  return it->second;
}

Word Substitution::apply(const Word& w) const {
  Word out;
  out.reserve(w.size() * length_);
  for (const auto& a : w) {
    const auto& img = image(a);
    out.insert(out.end(), img.begin(), img.end());
  }
  return out;
}

Substitution to_substitution(const QMultSeq& seq) {
  const auto& spec = seq.spec();
  if (!spec.preperiod.empty()) {
    throw SpecError("substitution requires a purely periodic skeleton (preperiod is nonempty)");
  }
  if (spec.period.empty()) throw SpecError("substitution requires a periodic skeleton");
  Word w = make_word(spec.period.front(), spec.r);
  for (std::size_t i = 1; i < spec.period.size(); ++i) {
    w = star_product(w, make_word(spec.period[i], spec.r));
  }
  std::map<std::int64_t, Word> images;
  for (std::int64_t a = 0; a < spec.r; ++a) {
    const UnitRoot letter(a, spec.r);
    Word img;
    img.reserve(w.size());
    for (const auto& x : w) img.push_back(letter * x);
    images.emplace(a, std::move(img));
  }
  return Substitution(spec.r, std::move(images));
}

namespace {

void require_fixed_point_seed(const Substitution& sigma, UnitRoot seed) {
  if (sigma.image(seed).front() != seed) {
    throw SpecError("sigma(" + std::to_string(seed.num()) + ") does not begin with " +
                    std::to_string(seed.num()));
  }
}

}  // namespace

Word fixed_point_prefix(const Substitution& sigma, UnitRoot seed, std::size_t length) {
  require_fixed_point_seed(sigma, seed);
  if (length == 0) return {};
  if (sigma.length() < 2 && length > 1) {
    throw SpecError("substitution of length 1 has no infinite fixed point");
  }
  Word w{seed};
  while (w.size() < length) {
    const std::size_t needed = (length + sigma.length() - 1) / sigma.length();
    Word head(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(std::min(needed, w.size())));
    w = sigma.apply(head);
  }
  w.resize(length);
  return w;
}

UnitRoot fixed_point_at(const Substitution& sigma, UnitRoot seed, std::uint64_t n) {
  require_fixed_point_seed(sigma, seed);
  const auto base = static_cast<std::uint64_t>(sigma.length());
  if (base < 2) {
    if (n == 0) return seed;
    throw SpecError("substitution of length 1 has no infinite fixed point");
  }
  std::vector<std::uint64_t> digits;
  for (; n > 0; n /= base) digits.push_back(n % base);
  UnitRoot letter = seed;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) letter = sigma.image(letter)[*it];
  return letter;
}

// ---------------------------------------------------------------- Rudin-Shapiro

int count_11_blocks(std::uint64_t n) { return std::popcount(n & (n >> 1)); }

complex rudin_shapiro(double t, std::uint64_t n) {
  return unit(TorusPoint::from_double(t) * static_cast<std::uint64_t>(count_11_blocks(n)));
}

UnitRoot rudin_shapiro_exact(Rational t, std::uint64_t n) {
  return UnitRoot(t.num * count_11_blocks(n), t.den);
}

// ---------------------------------------------------------------- Beta

Beta Beta::zero() { return custom("zero", [](std::uint64_t) { return std::uint64_t{0}; }); }

Beta Beta::log() {
  return custom("log", [](std::uint64_t k) {
    return static_cast<std::uint64_t>(std::floor(std::log(static_cast<double>(k) + 1.0)));
  });
}

Beta Beta::power(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw SpecError("beta exponent gamma must lie in (0, 1)");
  std::ostringstream name;
  name << "pow(" << gamma << ")";
  return custom(name.str(), [gamma](std::uint64_t k) {
    auto m = static_cast<std::uint64_t>(
        std::floor(std::pow(static_cast<long double>(k), static_cast<long double>(gamma))));
    // Correct the floor when k^gamma is an integer hit from below.
    if (std::pow(static_cast<long double>(m + 1), 1.0L / gamma) <= static_cast<long double>(k)) {
      ++m;
    }
    return m;
  });
}

Beta Beta::table(std::vector<std::uint64_t> values) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[i - 1]) {
      throw SpecError("beta table decreases at index " + std::to_string(i));
    }
  }
  const auto size = values.size();
  Beta b = custom("table", [v = std::move(values)](std::uint64_t k) {
    if (k >= v.size()) throw std::out_of_range("beta table index " + std::to_string(k));
    return v[k];
  });
  b.domain_ = size;
  return b;
}

Beta Beta::custom(std::string name, std::function<std::uint64_t(std::uint64_t)> fn) {
  Beta b;
  b.name_ = std::move(name);
  b.fn_ = std::move(fn);
  return b;
}

std::uint64_t Beta::at(std::uint64_t k) const { return fn_(k); }

std::optional<std::size_t> Beta::domain() const { return domain_; }

// ---------------------------------------------------------------- WeightSequence

namespace {

struct QMultNode {
  QMultSeq seq;
};
struct ThueMorseNode {};
struct RudinShapiroNode {
  std::optional<Rational> exact;
  double t;
};
struct ConstantNode {
  complex c;
};
struct PowerNode {
  WeightSequence base;
  std::int64_t a;
};
struct SplitNode {
  WeightSequence base;
  bool plus;
};
struct ShiftedNode {
  WeightSequence base;
  Beta beta;
};
struct GtmNode {
  std::int64_t order;
  std::vector<Word> blocks;
};
struct SubstitutionNode {
  Substitution sigma;
  UnitRoot seed;
};
struct IidNode {
  std::uint64_t seed;
};
struct CustomNode {
  std::string name;
  std::function<complex(std::uint64_t)> fn;
  bool unimodular;
};

}  // namespace

struct WeightSequence::Node {
  std::variant<QMultNode, ThueMorseNode, RudinShapiroNode, ConstantNode, PowerNode, SplitNode,
               ShiftedNode, GtmNode, SubstitutionNode, IidNode, CustomNode>
      kind;
};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

WeightSequence WeightSequence::qmult(QMultSeq seq) {
  return WeightSequence(std::make_shared<Node>(Node{QMultNode{std::move(seq)}}));
}

WeightSequence WeightSequence::thue_morse() {
  return WeightSequence(std::make_shared<Node>(Node{ThueMorseNode{}}));
}

WeightSequence WeightSequence::rudin_shapiro(Rational t) {
  return WeightSequence(std::make_shared<Node>(Node{RudinShapiroNode{t, t.value()}}));
}

WeightSequence WeightSequence::rudin_shapiro_real(double t) {
  return WeightSequence(std::make_shared<Node>(Node{RudinShapiroNode{std::nullopt, t}}));
}

WeightSequence WeightSequence::constant(complex c) {
  if (std::abs(c) > 1.0 + 1e-12) throw SpecError("constant weight must have modulus <= 1");
  return WeightSequence(std::make_shared<Node>(Node{ConstantNode{c}}));
}

WeightSequence WeightSequence::gtm(std::int64_t order, std::vector<Word> blocks) {
  validate_blocks(blocks);
  if (blocks.front().front().order() != order) throw SpecError("block order mismatch");
  return WeightSequence(std::make_shared<Node>(Node{GtmNode{order, std::move(blocks)}}));
}

WeightSequence WeightSequence::substitution(Substitution sigma, UnitRoot seed) {
  require_fixed_point_seed(sigma, seed);
  if (sigma.length() < 2) throw SpecError("substitution of length 1 has no infinite fixed point");
  return WeightSequence(
      std::make_shared<Node>(Node{SubstitutionNode{std::move(sigma), seed}}));
}

WeightSequence WeightSequence::iid_rademacher(std::uint64_t seed) {
  return WeightSequence(std::make_shared<Node>(Node{IidNode{seed}}));
}

WeightSequence WeightSequence::custom(std::string name, std::function<complex(std::uint64_t)> fn,
                                      bool unimodular) {
  return WeightSequence(
      std::make_shared<Node>(Node{CustomNode{std::move(name), std::move(fn), unimodular}}));
}

WeightSequence WeightSequence::power(std::int64_t a) const {
  return WeightSequence(std::make_shared<Node>(Node{PowerNode{*this, a}}));
}

WeightSequence WeightSequence::plus_split() const {
  return WeightSequence(std::make_shared<Node>(Node{SplitNode{*this, true}}));
}

WeightSequence WeightSequence::minus_split() const {
  return WeightSequence(std::make_shared<Node>(Node{SplitNode{*this, false}}));
}

WeightSequence WeightSequence::shifted(Beta beta) const {
  return WeightSequence(std::make_shared<Node>(Node{ShiftedNode{*this, std::move(beta)}}));
}

std::optional<UnitRoot> WeightSequence::exact_at(std::uint64_t n) const {
  return std::visit(
      overloaded{
          [&](const QMultNode& k) -> std::optional<UnitRoot> { return k.seq.at(n); },
          [&](const ThueMorseNode&) -> std::optional<UnitRoot> {
            return UnitRoot(std::popcount(n) & 1, 2);
          },
          [&](const RudinShapiroNode& k) -> std::optional<UnitRoot> {
            if (!k.exact) return std::nullopt;
            return rudin_shapiro_exact(*k.exact, n);
          },
          [&](const ConstantNode&) -> std::optional<UnitRoot> { return std::nullopt; },
          [&](const PowerNode& k) -> std::optional<UnitRoot> {
            auto b = k.base.exact_at(n);
            if (!b) return std::nullopt;
            return b->pow(k.a);
          },
          [&](const SplitNode&) -> std::optional<UnitRoot> { return std::nullopt; },
          [&](const ShiftedNode& k) -> std::optional<UnitRoot> {
            return k.base.exact_at(n + k.beta.at(n));
          },
          [&](const GtmNode& k) -> std::optional<UnitRoot> {
            UnitRoot v(0, k.order);
            for (std::size_t i = 0; n > 0; ++i) {
              const auto& block = k.blocks[i % k.blocks.size()];
              v = v * block[n % block.size()];
              n /= block.size();
            }
            return v;
          },
          [&](const SubstitutionNode& k) -> std::optional<UnitRoot> {
            return fixed_point_at(k.sigma, k.seed, n);
          },
          [&](const IidNode& k) -> std::optional<UnitRoot> {
            return UnitRoot(static_cast<std::int64_t>(counter_hash(k.seed, 0, n) >> 63), 2);
          },
          [&](const CustomNode&) -> std::optional<UnitRoot> { return std::nullopt; },
      },
      node_->kind);
}

std::optional<std::int64_t> WeightSequence::root_order() const {
  return std::visit(
      overloaded{
          [](const QMultNode& k) -> std::optional<std::int64_t> { return k.seq.r(); },
          [](const ThueMorseNode&) -> std::optional<std::int64_t> { return 2; },
          [](const RudinShapiroNode& k) -> std::optional<std::int64_t> {
            if (!k.exact) return std::nullopt;
            return k.exact->den;
          },
          [](const ConstantNode&) -> std::optional<std::int64_t> { return std::nullopt; },
          [](const PowerNode& k) { return k.base.root_order(); },
          [](const SplitNode&) -> std::optional<std::int64_t> { return std::nullopt; },
          [](const ShiftedNode& k) { return k.base.root_order(); },
          [](const GtmNode& k) -> std::optional<std::int64_t> { return k.order; },
          [](const SubstitutionNode& k) -> std::optional<std::int64_t> {
            return k.sigma.order();
          },
          [](const IidNode&) -> std::optional<std::int64_t> { return 2; },
          [](const CustomNode&) -> std::optional<std::int64_t> { return std::nullopt; },
      },
      node_->kind);
}

complex WeightSequence::at(std::uint64_t n) const {
  if (auto e = exact_at(n)) return e->value();
  return std::visit(
      overloaded{
          [&](const RudinShapiroNode& k) { return detergo::rudin_shapiro(k.t, n); },
          [&](const ConstantNode& k) { return k.c; },
          [&](const PowerNode& k) {
            complex z = k.base.at(n);
            complex acc{1.0, 0.0};
            auto a = k.a;
            if (a < 0) {
              z = std::conj(z) / std::norm(z);
              a = -a;
            }
            for (; a > 0; a >>= 1, z *= z) {
              if (a & 1) acc *= z;
            }
            return acc;
          },
          [&](const SplitNode& k) {
            const complex b = k.base.at(n);
            return k.plus ? (b + 1.0) / 2.0 : (1.0 - b) / 2.0;
          },
          [&](const ShiftedNode& k) { return k.base.at(n + k.beta.at(n)); },
          [&](const CustomNode& k) { return k.fn(n); },
          [&](const auto&) -> complex { throw std::logic_error("exact kind without exact value"); },
      },
      node_->kind);
}

bool WeightSequence::unimodular() const {
  return std::visit(overloaded{
                        [](const ConstantNode& k) { return std::abs(std::abs(k.c) - 1.0) < 1e-15; },
                        [](const PowerNode& k) { return k.base.unimodular(); },
                        [](const SplitNode&) { return false; },
                        [](const ShiftedNode& k) { return k.base.unimodular(); },
                        [](const CustomNode& k) { return k.unimodular; },
                        [](const auto&) { return true; },
                    },
                    node_->kind);
}

const QMultSeq* WeightSequence::as_qmult() const {
  if (const auto* k = std::get_if<QMultNode>(&node_->kind)) return &k->seq;
  return nullptr;
}

std::string WeightSequence::describe() const {
  return std::visit(
      overloaded{
          [](const QMultNode& k) {
            return "qmult(q=" + std::to_string(k.seq.q()) + ",r=" + std::to_string(k.seq.r()) + ")";
          },
          [](const ThueMorseNode&) { return std::string("thue_morse"); },
          [](const RudinShapiroNode& k) {
            if (k.exact) {
              return "rudin_shapiro(" + std::to_string(k.exact->num) + "/" +
                     std::to_string(k.exact->den) + ")";
            }
            std::ostringstream os;
            os.precision(17);
            os << "rudin_shapiro(" << k.t << ")";
            return os.str();
          },
          [](const ConstantNode& k) {
            std::ostringstream os;
            os << "constant(" << k.c.real() << "," << k.c.imag() << ")";
            return os.str();
          },
          [](const PowerNode& k) {
            return "power(" + k.base.describe() + "," + std::to_string(k.a) + ")";
          },
          [](const SplitNode& k) {
            return std::string(k.plus ? "plus_split(" : "minus_split(") + k.base.describe() + ")";
          },
          [](const ShiftedNode& k) {
            return "shifted(" + k.base.describe() + "," + k.beta.name() + ")";
          },
          [](const GtmNode& k) { return "gtm(r=" + std::to_string(k.order) + ")"; },
          [](const SubstitutionNode& k) {
            return "substitution(r=" + std::to_string(k.sigma.order()) +
                   ",L=" + std::to_string(k.sigma.length()) + ")";
          },
          [](const IidNode& k) { return "iid_rademacher(" + std::to_string(k.seed) + ")"; },
          [](const CustomNode& k) { return k.name; },
      },
      node_->kind);
}

std::vector<complex> WeightSequence::slice(std::uint64_t begin, std::uint64_t end) const {
  std::vector<complex> out(end > begin ? end - begin : 0);
  const std::size_t chunks = std::max<std::size_t>(1, out.size() / 65536);
  parallel_chunks(out.size(), chunks, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = at(begin + i);
  });
  return out;
}

std::vector<complex> WeightSequence::prefix(std::size_t n) const { return slice(0, n); }

// ---------------------------------------------------------------- IndexSequence

namespace {

struct IdentityNode {};
struct SquaresNode {};
struct LogShiftNode {};
struct BetaShiftNode {
  IndexSequence base;
  Beta beta;
};
struct PolynomialNode {
  std::vector<std::int64_t> coeffs;
};

__int128 eval_poly(const std::vector<std::int64_t>& c, std::uint64_t k) {
  __int128 acc = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * static_cast<__int128>(k) + *it;
  return acc;
}

}  // namespace

struct IndexSequence::Node {
  std::variant<IdentityNode, SquaresNode, LogShiftNode, BetaShiftNode, PolynomialNode> kind;
};

IndexSequence IndexSequence::identity() {
  return IndexSequence(std::make_shared<Node>(Node{IdentityNode{}}));
}
IndexSequence IndexSequence::squares() {
  return IndexSequence(std::make_shared<Node>(Node{SquaresNode{}}));
}
IndexSequence IndexSequence::log_shift() {
  return IndexSequence(std::make_shared<Node>(Node{LogShiftNode{}}));
}
IndexSequence IndexSequence::beta_shift(IndexSequence base, Beta beta) {
  return IndexSequence(std::make_shared<Node>(Node{BetaShiftNode{std::move(base), std::move(beta)}}));
}

IndexSequence IndexSequence::polynomial(std::vector<std::int64_t> coeffs) {
  while (!coeffs.empty() && coeffs.back() == 0) coeffs.pop_back();
  if (coeffs.size() < 2 || coeffs.back() < 0) {
    throw SpecError("polynomial index must have positive degree and positive leading coefficient");
  }
  if (eval_poly(coeffs, 0) < 0) throw SpecError("polynomial index must be nonnegative at 0");
  for (std::uint64_t k = 0; k < 1024; ++k) {
    if (eval_poly(coeffs, k + 1) <= eval_poly(coeffs, k)) {
      throw SpecError("polynomial index is not strictly increasing at k = " + std::to_string(k));
    }
  }
  return IndexSequence(std::make_shared<Node>(Node{PolynomialNode{std::move(coeffs)}}));
}

std::uint64_t IndexSequence::at(std::uint64_t k) const {
  return std::visit(
      overloaded{
          [&](const IdentityNode&) { return k; },
          [&](const SquaresNode&) { return k * k; },
          [&](const LogShiftNode&) {
            return k + static_cast<std::uint64_t>(std::floor(std::log(static_cast<double>(k) + 1.0)));
          },
          [&](const BetaShiftNode& n) { return n.base.at(k + n.beta.at(k)); },
          [&](const PolynomialNode& n) { return static_cast<std::uint64_t>(eval_poly(n.coeffs, k)); },
      },
      node_->kind);
}

bool IndexSequence::is_identity() const {
  if (std::holds_alternative<IdentityNode>(node_->kind)) return true;
  if (const auto* p = std::get_if<PolynomialNode>(&node_->kind)) {
    return p->coeffs == std::vector<std::int64_t>{0, 1};
  }
  return false;
}

std::string IndexSequence::describe() const {
  return std::visit(overloaded{
                        [](const IdentityNode&) { return std::string("identity"); },
                        [](const SquaresNode&) { return std::string("squares"); },
                        [](const LogShiftNode&) { return std::string("log_shift"); },
                        [](const BetaShiftNode& n) {
                          return "beta_shift(" + n.base.describe() + "," + n.beta.name() + ")";
                        },
                        [](const PolynomialNode& n) {
                          std::string s = "polynomial(";
                          for (std::size_t i = 0; i < n.coeffs.size(); ++i) {
                            if (i) s += ",";
                            s += std::to_string(n.coeffs[i]);
                          }
                          return s + ")";
                        },
                    },
                    node_->kind);
}

std::vector<std::uint64_t> IndexSequence::slice(std::uint64_t begin, std::uint64_t end) const {
  std::vector<std::uint64_t> out(end > begin ? end - begin : 0);
  const std::size_t chunks = std::max<std::size_t>(1, out.size() / 65536);
  parallel_chunks(out.size(), chunks, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = at(begin + i);
  });
  return out;
}

// ---------------------------------------------------------------- shift_compose

ShiftedPair shift_compose(const WeightSequence& theta, const IndexSequence& u, const Beta& beta,
                          std::size_t check_prefix) {
  std::size_t limit = check_prefix;
  if (auto d = beta.domain()) limit = std::min(limit, *d);
  std::uint64_t prev = 0;
  for (std::uint64_t k = 0; k < limit; ++k) {
    const std::uint64_t pos = k + beta.at(k);
    if (k > 0 && pos <= prev) {
      throw SpecError("k + beta_k is not strictly increasing at k = " + std::to_string(k));
    }
    prev = pos;
  }
  return {theta.shifted(beta), IndexSequence::beta_shift(u, beta)};
}

// ---------------------------------------------------------------- Per(theta)

std::size_t smallest_period(std::span<const std::int64_t> s) {
  if (s.empty()) return 0;
  std::vector<std::size_t> fail(s.size(), 0);
  for (std::size_t i = 1, k = 0; i < s.size(); ++i) {
    while (k > 0 && s[i] != s[k]) k = fail[k - 1];
    if (s[i] == s[k]) ++k;
    fail[i] = k;
  }
  return s.size() - fail.back();
}

PerResult per_set(const QMultSeq& seq, std::size_t period_bound, std::size_t prefix_length) {
  if (period_bound < 1) throw SpecError("period bound must be at least 1");
  if (prefix_length < 2 * period_bound) throw SpecError("prefix length must be at least 2P");
  PerResult result;
  result.period_bound = period_bound;
  result.prefix_length = prefix_length;
  std::vector<std::int64_t> base(prefix_length);
  for (std::size_t k = 0; k < prefix_length; ++k) base[k] = seq.at(k).num();
  std::vector<std::int64_t> powered(prefix_length);
  for (std::int64_t a = 1; a < seq.r(); ++a) {
    for (std::size_t k = 0; k < prefix_length; ++k) powered[k] = (base[k] * a) % seq.r();
    if (smallest_period(powered) <= period_bound) result.periodic_powers.insert(a);
  }
  result.irreducible = result.periodic_powers.empty();
  return result;
}

// ---------------------------------------------------------------- H4

H4Report h4_report(const IndexSequence& u, double zeta, std::span<const std::uint64_t> ns) {
  if (!(zeta > 0.0 && zeta <= 1.0)) throw SpecError("zeta must lie in (0, 1]");
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (ns[i] <= ns[i - 1]) throw SpecError("N list must be increasing");
  }
  H4Report report;
  report.zeta = zeta;
  std::vector<double> xs, ys;
  for (auto n : ns) {
    if (n == 0) throw SpecError("N must be positive");
    const double dev =
        std::abs(static_cast<double>(u.at(n)) / static_cast<double>(n) - zeta);
    report.rows.push_back({n, dev});
    if (dev > 0) {
      xs.push_back(std::log(static_cast<double>(n)));
      ys.push_back(std::log(dev));
    }
  }
  report.exact = xs.empty();
  if (report.exact) {
    report.sigma = std::numeric_limits<double>::infinity();
  } else if (xs.size() >= 2) {
    report.sigma = -fit_line(xs, ys).slope;
    report.violated = report.sigma < 1e-6;  // flat within rounding counts as no decay
  } else {
    report.sigma = 0.0;
    report.violated = true;
  }
  return report;
}

}  // namespace detergo
