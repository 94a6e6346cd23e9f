#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltlinfer/ltl.hpp"

namespace ltlinfer {

using DraState = int;

struct RabinPair {
  std::vector<DraState> fin;  // must be visited finitely often
  std::vector<DraState> inf;  // must be visited infinitely often
};

/// Deterministic Rabin automaton over the valuations of a host alphabet.
///
/// Transitions are stored only over the propositions the source formula
/// mentions; step() projects a host valuation down to that sub-alphabet, so
/// the observable transition function is total over 2^alphabet.
class Dra {
public:
  Dra(Alphabet alphabet, std::vector<int> reads, int num_states, std::vector<DraState> table,
      std::vector<RabinPair> pairs);

  const Alphabet& alphabet() const { return alphabet_; }
  int num_states() const { return num_states_; }
  DraState initial() const { return 0; }
  const std::vector<RabinPair>& pairs() const { return pairs_; }

  /// Host-alphabet positions this automaton reads, in letter-bit order.
  const std::vector<int>& reads() const { return reads_; }
  std::size_t num_letters() const { return std::size_t{1} << reads_.size(); }
  std::size_t letter_of(Valuation v) const;

  DraState step(DraState q, Valuation v) const { return table_[q * num_letters() + letter_of(v)]; }
  DraState step_letter(DraState q, std::size_t letter) const { return table_[q * num_letters() + letter]; }

  bool in_fin(std::size_t pair, DraState q) const { return fin_mask_[pair][q] != 0; }
  bool in_inf(std::size_t pair, DraState q) const { return inf_mask_[pair][q] != 0; }

private:
  Alphabet alphabet_;
  std::vector<int> reads_;
  int num_states_;
  std::vector<DraState> table_;
  std::vector<RabinPair> pairs_;
  std::vector<std::vector<char>> fin_mask_;
  std::vector<std::vector<char>> inf_mask_;
};

using DraPtr = std::shared_ptr<const Dra>;

class StateBudgetExceeded : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct CompileOptions {
  std::size_t state_budget = 10000;
};

/// LTL -> negation normal form -> generalized Buchi tableau -> degeneralized
/// Buchi -> Safra trees -> Rabin pairs. States are numbered breadth-first
/// from the initial state, exploring letters in increasing bitmask order.
/// States with an empty residual language are merged into one sink.
///
/// Throws std::invalid_argument on propositions outside the alphabet and
/// StateBudgetExceeded when the tableau or the DRA grows past the budget.
DraPtr compile(const Formula& f, const Alphabet& alphabet, const CompileOptions& options = {});

/// Rabin acceptance of the unique run on prefix . loop^omega.
bool accepts_lasso(const Dra& dra, const LassoWord& word);

/// Graphviz rendering; acceptance pairs are listed in a comment header.
std::string to_dot(const Dra& dra);

/// Thread-safe memo of compile() keyed by alphabet and canonical rendering.
class DraCache {
public:
  explicit DraCache(CompileOptions options = {}) : options_(options) {}

  DraPtr get(const Formula& f, const Alphabet& alphabet);
  std::size_t size() const;

private:
  CompileOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, DraPtr> entries_;
};

}  // namespace ltlinfer
