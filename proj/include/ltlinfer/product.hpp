#pragma once

#include <memory>
#include <vector>

#include "ltlinfer/automata.hpp"
#include "ltlinfer/mdp.hpp"

namespace ltlinfer {

/// Successor of one MDP outcome under the two DRA actions.
struct ProductEdge {
  int keep;  // DRA advanced by the successor's label
  int susp;  // DRA frozen
  double prob;
};

/// An underlying action at a product state. `action` is -1 for the
/// pre-initial action a_-1.
struct ProductChoice {
  int action;
  std::vector<ProductEdge> edges;
};

/// Product action (underlying choice index, DRA action).
struct ProductAction {
  int choice;
  bool susp;

  friend bool operator==(const ProductAction&, const ProductAction&) = default;
  friend auto operator<=>(const ProductAction&, const ProductAction&) = default;
};

class ProductTooLarge : public StateBudgetExceeded {
public:
  using StateBudgetExceeded::StateBudgetExceeded;
};

/// Skip-augmented product of an MDP and a DRA, materialized over the states
/// reachable from the pre-initial state (id 0). Every other state is a pair
/// (MDP state, DRA state).
class ProductMdp {
public:
  static constexpr int kPreInitial = 0;

  ProductMdp(std::shared_ptr<const Mdp> mdp, DraPtr dra, double gamma,
             std::size_t max_states = 2'000'000);

  const Mdp& mdp() const { return *mdp_; }
  const std::shared_ptr<const Mdp>& mdp_ptr() const { return mdp_; }
  const Dra& dra() const { return *dra_; }
  double gamma() const { return gamma_; }

  int num_states() const { return static_cast<int>(mdp_state_.size()); }
  /// -1 for the pre-initial state.
  int mdp_state(int x) const { return mdp_state_[x]; }
  DraState dra_state(int x) const { return dra_state_[x]; }
  /// Product id of (s, q), or -1 if that pair is unreachable.
  int find(int s, DraState q) const;

  const std::vector<ProductChoice>& choices(int x) const { return choices_[x]; }
  /// Distinct successors of product action `a` at `x`.
  std::vector<int> successors(int x, ProductAction a) const;

private:
  std::shared_ptr<const Mdp> mdp_;
  DraPtr dra_;
  double gamma_;
  std::vector<int> mdp_state_;
  std::vector<DraState> dra_state_;
  std::vector<int> index_;  // (s + 1) * |Q| + q -> id
  std::vector<std::vector<ProductChoice>> choices_;
};

ProductMdp build_product(std::shared_ptr<const Mdp> mdp, DraPtr dra, double gamma);

struct EndComponent {
  std::vector<int> states;                        // sorted
  std::vector<std::vector<ProductAction>> actions;  // aligned with states, sorted

  friend bool operator==(const EndComponent&, const EndComponent&) = default;
};

/// Maximal end components of the sub-MDP induced by `allowed` states
/// (iterated SCC refinement).
std::vector<EndComponent> maximal_end_components(const ProductMdp& p, const std::vector<char>& allowed);

/// Accepting MECs: for each Rabin pair the MECs avoiding its Fin states that
/// contain one of its Inf states, with components nested inside another
/// returned component dropped. Sorted by smallest member id.
std::vector<EndComponent> compute_amecs(const ProductMdp& p);

struct StateClassification {
  std::vector<char> good;  // member of some AMEC
  std::vector<char> bad;   // no path to a good state

  std::size_t num_good() const;
  std::size_t num_bad() const;
};

StateClassification classify_states(const ProductMdp& p, const std::vector<EndComponent>& amecs);

}  // namespace ltlinfer
