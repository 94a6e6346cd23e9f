#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltlinfer {

enum class Op : std::uint8_t {
  True,
  False,
  Prop,
  Not,
  And,
  Or,
  Implies,
  Next,
  Always,
  Eventually,
  Until,
};

int arity(Op op);

/// Immutable LTL syntax tree. Copies share structure, so a Formula is cheap
/// to pass by value and safe to hand to other threads.
class Formula {
public:
  static Formula truth();
  static Formula falsity();
  static Formula prop(std::string name);
  static Formula negation(Formula child);
  static Formula conj(Formula lhs, Formula rhs);
  static Formula disj(Formula lhs, Formula rhs);
  static Formula implies(Formula lhs, Formula rhs);
  static Formula next(Formula child);
  static Formula always(Formula child);
  static Formula eventually(Formula child);
  static Formula until(Formula lhs, Formula rhs);
  static Formula unary(Op op, Formula child);
  static Formula binary(Op op, Formula lhs, Formula rhs);

  Op op() const { return node_->op; }
  const std::string& name() const { return node_->name; }
  std::size_t arity() const { return node_->children.size(); }
  const Formula& child(std::size_t i) const { return node_->children.at(i); }
  const Formula& lhs() const { return child(0); }
  const Formula& rhs() const { return child(1); }
  bool is_leaf() const { return node_->children.empty(); }

  /// Number of parse-tree nodes.
  std::size_t size() const { return node_->size; }
  /// Height of the tree; a leaf has depth 1.
  std::size_t depth() const { return node_->depth; }

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

private:
  struct Node {
    Op op;
    std::string name;
    std::vector<Formula> children;
    std::size_t size;
    std::size_t depth;
  };

  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Formula make(Op op, std::string name, std::vector<Formula> children);

  std::shared_ptr<const Node> node_;
};

/// Set of proposition names. Valuations and MDP labels are bitmasks over the
/// positions of an Alphabet, so it is capped at 31 names.
class Alphabet {
public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  bool contains(const std::string& name) const;
  /// Position of `name`, or -1.
  int index_of(const std::string& name) const;

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

private:
  std::vector<std::string> names_;
};

using Valuation = std::uint32_t;

Valuation valuation_of(const Alphabet& alphabet, const std::vector<std::string>& names);
std::vector<std::string> names_of(const Alphabet& alphabet, Valuation v);

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& message, std::size_t position);
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

/// Grammar, loosest to tightest: `->` (right assoc), `|`, `&`, prefix `!` `X`
/// `G` `F`, `U` (right assoc), atoms (`true`, `false`, identifiers,
/// parenthesised formulas). So `G a U b` is `G (a U b)`.
Formula parse(const std::string& text, const Alphabet& alphabet);
/// Same as above but accepts any identifier as a proposition.
Formula parse(const std::string& text);

/// Fully parenthesised canonical text; parse(render(f)) == f.
std::string render(const Formula& f);

/// Number of nodes in the parse tree.
std::size_t complexity(const Formula& f);

std::set<std::string> propositions(const Formula& f);

/// Ultimately periodic word prefix . loop^omega.
struct LassoWord {
  std::vector<Valuation> prefix;
  std::vector<Valuation> loop;

  std::size_t positions() const { return prefix.size() + loop.size(); }
  /// Index of the position that follows `i` in the finite position space.
  std::size_t successor(std::size_t i) const {
    return i + 1 < positions() ? i + 1 : prefix.size();
  }
  Valuation at(std::size_t i) const {
    return i < prefix.size() ? prefix[i] : loop[i - prefix.size()];
  }
};

/// Reference semantics: does prefix . loop^omega satisfy f (at position 0)?
bool eval_lasso(const Formula& f, const LassoWord& word, const Alphabet& alphabet);

}  // namespace ltlinfer
