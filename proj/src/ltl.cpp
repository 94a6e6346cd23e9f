#include "ltlinfer/ltl.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace ltlinfer {

int arity(Op op) {
  switch (op) {
    case Op::True:
    case Op::False:
    case Op::Prop:
      return 0;
    case Op::Not:
    case Op::Next:
    case Op::Always:
    case Op::Eventually:
      return 1;
    case Op::And:
    case Op::Or:
    case Op::Implies:
    case Op::Until:
      return 2;
  }
  return 0;
}

Formula Formula::make(Op op, std::string name, std::vector<Formula> children) {
  std::size_t size = 1;
  std::size_t depth = 0;
  for (const auto& c : children) {
    size += c.size();
    depth = std::max(depth, c.depth());
  }
  return Formula(std::make_shared<const Node>(
      Node{op, std::move(name), std::move(children), size, depth + 1}));
}

Formula Formula::truth() { return make(Op::True, {}, {}); }
Formula Formula::falsity() { return make(Op::False, {}, {}); }

Formula Formula::prop(std::string name) {
  if (name.empty()) throw std::invalid_argument("empty proposition name");
  return make(Op::Prop, std::move(name), {});
}

Formula Formula::unary(Op op, Formula child) {
  if (ltlinfer::arity(op) != 1) throw std::invalid_argument("operator is not unary");
  return make(op, {}, {std::move(child)});
}

Formula Formula::binary(Op op, Formula lhs, Formula rhs) {
  if (ltlinfer::arity(op) != 2) throw std::invalid_argument("operator is not binary");
  return make(op, {}, {std::move(lhs), std::move(rhs)});
}

Formula Formula::negation(Formula c) { return unary(Op::Not, std::move(c)); }
Formula Formula::next(Formula c) { return unary(Op::Next, std::move(c)); }
Formula Formula::always(Formula c) { return unary(Op::Always, std::move(c)); }
Formula Formula::eventually(Formula c) { return unary(Op::Eventually, std::move(c)); }
Formula Formula::conj(Formula l, Formula r) { return binary(Op::And, std::move(l), std::move(r)); }
Formula Formula::disj(Formula l, Formula r) { return binary(Op::Or, std::move(l), std::move(r)); }
Formula Formula::implies(Formula l, Formula r) {
  return binary(Op::Implies, std::move(l), std::move(r));
}
Formula Formula::until(Formula l, Formula r) { return binary(Op::Until, std::move(l), std::move(r)); }

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op() || a.size() != b.size() || a.name() != b.name()) return false;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (a.child(i) != b.child(i)) return false;
  }
  return true;
}

Alphabet::Alphabet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() > 31) throw std::invalid_argument("alphabet is limited to 31 propositions");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw std::invalid_argument("empty proposition name");
    for (std::size_t j = 0; j < i; ++j) {
      if (names_[i] == names_[j]) throw std::invalid_argument("duplicate proposition: " + names_[i]);
    }
  }
}

bool Alphabet::contains(const std::string& name) const { return index_of(name) >= 0; }

int Alphabet::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

Valuation valuation_of(const Alphabet& alphabet, const std::vector<std::string>& names) {
  Valuation v = 0;
  for (const auto& n : names) {
    int i = alphabet.index_of(n);
    if (i < 0) throw std::invalid_argument("unknown proposition: " + n);
    v |= Valuation{1} << i;
  }
  return v;
}

std::vector<std::string> names_of(const Alphabet& alphabet, Valuation v) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    if (v & (Valuation{1} << i)) out.push_back(alphabet.name(i));
  }
  return out;
}

ParseError::ParseError(const std::string& message, std::size_t position)
    : std::runtime_error("at position " + std::to_string(position) + ": " + message),
      position_(position) {}

namespace {

enum class Tok { Ident, LParen, RParen, Bang, Amp, Bar, Arrow, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
    } else if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Tok::Ident, s.substr(i, j - i), i});
      i = j;
    } else if (c == '(') {
      out.push_back({Tok::LParen, "(", i++});
    } else if (c == ')') {
      out.push_back({Tok::RParen, ")", i++});
    } else if (c == '!') {
      out.push_back({Tok::Bang, "!", i++});
    } else if (c == '&') {
      out.push_back({Tok::Amp, "&", i++});
    } else if (c == '|') {
      out.push_back({Tok::Bar, "|", i++});
    } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      out.push_back({Tok::Arrow, "->", i});
      i += 2;
    } else {
      throw ParseError(std::string("unexpected character '") + s[i] + "'", i);
    }
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

bool is_keyword(const std::string& w) {
  return w == "G" || w == "F" || w == "X" || w == "U" || w == "true" || w == "false";
}

class Parser {
public:
  Parser(const std::string& text, const Alphabet* alphabet)
      : tokens_(tokenize(text)), alphabet_(alphabet) {}

  Formula run() {
    Formula f = implication();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

private:
  const Token& peek() const { return tokens_[pos_]; }
  bool at_word(const char* w) const { return peek().kind == Tok::Ident && peek().text == w; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().pos); }

  Formula implication() {
    Formula lhs = disjunction();
    if (peek().kind == Tok::Arrow) {
      ++pos_;
      return Formula::implies(lhs, implication());
    }
    return lhs;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (peek().kind == Tok::Bar) {
      ++pos_;
      f = Formula::disj(f, conjunction());
    }
    return f;
  }

  Formula conjunction() {
    Formula f = prefix();
    while (peek().kind == Tok::Amp) {
      ++pos_;
      f = Formula::conj(f, prefix());
    }
    return f;
  }

  Formula prefix() {
    if (peek().kind == Tok::Bang) {
      ++pos_;
      return Formula::negation(prefix());
    }
    if (at_word("X")) {
      ++pos_;
      return Formula::next(prefix());
    }
    if (at_word("G")) {
      ++pos_;
      return Formula::always(prefix());
    }
    if (at_word("F")) {
      ++pos_;
      return Formula::eventually(prefix());
    }
    return until();
  }

  Formula until() {
    Formula lhs = atom();
    if (at_word("U")) {
      ++pos_;
      return Formula::until(lhs, until_rhs());
    }
    return lhs;
  }

  // The right operand of U may itself start with a prefix operator.
  Formula until_rhs() {
    if (peek().kind == Tok::Bang || at_word("X") || at_word("G") || at_word("F")) return prefix();
    return until();
  }

  Formula atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::LParen: {
        ++pos_;
        Formula f = implication();
        if (peek().kind != Tok::RParen) fail("expected ')'");
        ++pos_;
        return f;
      }
      case Tok::Ident: {
        if (t.text == "true") {
          ++pos_;
          return Formula::truth();
        }
        if (t.text == "false") {
          ++pos_;
          return Formula::falsity();
        }
        if (is_keyword(t.text)) fail("operator '" + t.text + "' is missing an operand");
        if (alphabet_ && !alphabet_->contains(t.text)) fail("unknown proposition '" + t.text + "'");
        ++pos_;
        return Formula::prop(t.text);
      }
      case Tok::End:
        fail("unexpected end of formula");
      default:
        fail("unexpected '" + t.text + "'");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const Alphabet* alphabet_;
};

const char* symbol(Op op) {
  switch (op) {
    case Op::Not: return "!";
    case Op::Next: return "X";
    case Op::Always: return "G";
    case Op::Eventually: return "F";
    case Op::And: return "&";
    case Op::Or: return "|";
    case Op::Implies: return "->";
    case Op::Until: return "U";
    default: return "";
  }
}

void render_into(const Formula& f, std::string& out) {
  switch (f.op()) {
    case Op::True: out += "true"; return;
    case Op::False: out += "false"; return;
    case Op::Prop: out += f.name(); return;
    default: break;
  }
  if (f.arity() == 1) {
    out += symbol(f.op());
    out += " (";
    render_into(f.child(0), out);
    out += ')';
  } else {
    out += '(';
    render_into(f.lhs(), out);
    out += ") ";
    out += symbol(f.op());
    out += " (";
    render_into(f.rhs(), out);
    out += ')';
  }
}

}  // namespace

Formula parse(const std::string& text, const Alphabet& alphabet) {
  return Parser(text, &alphabet).run();
}

Formula parse(const std::string& text) { return Parser(text, nullptr).run(); }

std::string render(const Formula& f) {
  std::string out;
  render_into(f, out);
  return out;
}

std::size_t complexity(const Formula& f) { return f.size(); }

std::set<std::string> propositions(const Formula& f) {
  std::set<std::string> out;
  std::function<void(const Formula&)> walk = [&](const Formula& g) {
    if (g.op() == Op::Prop) out.insert(g.name());
    for (std::size_t i = 0; i < g.arity(); ++i) walk(g.child(i));
  };
  walk(f);
  return out;
}

namespace {

using Truth = std::vector<char>;

Truth eval_positions(const Formula& f, const LassoWord& w, const Alphabet& alphabet) {
  const std::size_t n = w.positions();
  Truth out(n, 0);
  switch (f.op()) {
    case Op::True:
      std::fill(out.begin(), out.end(), 1);
      return out;
    case Op::False:
      return out;
    case Op::Prop: {
      int bit = alphabet.index_of(f.name());
      if (bit < 0) throw std::invalid_argument("unknown proposition: " + f.name());
      for (std::size_t i = 0; i < n; ++i) out[i] = (w.at(i) >> bit) & 1u;
      return out;
    }
    default:
      break;
  }
  Truth a = eval_positions(f.child(0), w, alphabet);
  Truth b = f.arity() == 2 ? eval_positions(f.child(1), w, alphabet) : Truth{};
  // Fixpoints over the finite position space; n sweeps always suffice.
  auto iterate = [&](auto&& update, char init) {
    std::fill(out.begin(), out.end(), init);
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t k = n; k-- > 0;) {
        char v = update(k);
        if (v != out[k]) {
          out[k] = v;
          changed = true;
        }
      }
    }
  };
  switch (f.op()) {
    case Op::Not:
      for (std::size_t i = 0; i < n; ++i) out[i] = !a[i];
      break;
    case Op::And:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] && b[i];
      break;
    case Op::Or:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[i] || b[i];
      break;
    case Op::Implies:
      for (std::size_t i = 0; i < n; ++i) out[i] = !a[i] || b[i];
      break;
    case Op::Next:
      for (std::size_t i = 0; i < n; ++i) out[i] = a[w.successor(i)];
      break;
    case Op::Always:
      iterate([&](std::size_t i) -> char { return a[i] && out[w.successor(i)]; }, 1);
      break;
    case Op::Eventually:
      iterate([&](std::size_t i) -> char { return a[i] || out[w.successor(i)]; }, 0);
      break;
    case Op::Until:
      iterate([&](std::size_t i) -> char { return b[i] || (a[i] && out[w.successor(i)]); }, 0);
      break;
    default:
      break;
  }
  return out;
}

}  // namespace

bool eval_lasso(const Formula& f, const LassoWord& word, const Alphabet& alphabet) {
  if (word.loop.empty()) throw std::invalid_argument("lasso loop must be nonempty");
  return eval_positions(f, word, alphabet)[0] != 0;
}

}  // namespace ltlinfer
