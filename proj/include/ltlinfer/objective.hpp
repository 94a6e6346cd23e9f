#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltlinfer/automata.hpp"
#include "ltlinfer/mdp.hpp"
#include "ltlinfer/product.hpp"

namespace ltlinfer {

/// probs[x][c]: probability of underlying choice c at product state x.
/// The DRA action is not part of the policy; it is optimized inside the
/// Bellman operator.
struct ProductPolicy {
  std::vector<std::vector<double>> probs;
};

/// Product lift of the uniformly random MDP policy.
ProductPolicy uniform_product_policy(const ProductMdp& p);

/// Violation cost per product state, within [0, 1/(1-gamma)].
using ViolationTable = std::vector<double>;

class NonConvergence : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct EvalSettings {
  double tol = 1e-9;
  std::size_t max_iters = 100000;
};

/// Iterates
///   V(s,q) = sum_a pi(a) sum_s' P(s,a,s') min{1 + g V(s',q), g V(s',delta(q,L(s')))}
/// to its fixed point, with bad states pinned at 1/(1-g).
ViolationTable evaluate_policy_violation(const ProductMdp& p, const ProductPolicy& pi,
                                         const StateClassification& cls, const EvalSettings& settings = {});

/// Best product-space interpretation of an observed state sequence.
struct Interpretation {
  std::vector<DraState> dra_states;  // q_0 .. q_{T+1}
  double cost = 0.0;                 // Viol^S
  int terminal = -1;                 // product id of (s_T, q_{T+1}); -1 when degenerate
};

/// Dynamic program over skip/keep decisions. Costs accumulate gamma^t per
/// skipped step; the terminal state is chosen among non-bad states reached
/// at T by adding gamma^(T+1) times the random-policy cost. Ties go to the
/// lowest product id. With no non-bad terminal candidate the cost is
/// 1/(1-gamma) and the all-skip sequence is returned.
Interpretation rabin_state_sequence(const ViolationTable& viol_rand, const ProductMdp& p,
                                    const StateClassification& cls, const std::vector<int>& states);

double obj_state_based(const ProductMdp& p, const StateClassification& cls, const ViolationTable& viol_rand,
                       const std::vector<Trajectory>& demos);

/// Product policy that is uniform over the demonstrated actions at each
/// inferred product state and uniform over all actions elsewhere.
ProductPolicy demonstrated_policy(const ProductMdp& p, const StateClassification& cls,
                                  const ViolationTable& viol_rand, const std::vector<Trajectory>& demos);

double obj_action_based(const ProductMdp& p, const StateClassification& cls, const ViolationTable& viol_rand,
                        const std::vector<Trajectory>& demos, const EvalSettings& settings = {});

enum class ObjectiveKind { State, Action };

ObjectiveKind objective_kind_from_string(const std::string& s);
std::string to_string(ObjectiveKind kind);

/// Everything computed for one formula: automaton, product, classification
/// and the random-policy baseline.
struct FormulaAnalysis {
  DraPtr dra;
  std::shared_ptr<const ProductMdp> product;
  std::vector<EndComponent> amecs;
  StateClassification cls;
  ViolationTable viol_rand;
};

FormulaAnalysis analyze_formula(const Formula& f, std::shared_ptr<const Mdp> mdp, double gamma,
                                DraCache& cache, const EvalSettings& settings = {});

/// compile -> product -> AMECs -> classification -> baseline -> objective.
double evaluate_objective(const Formula& f, std::shared_ptr<const Mdp> mdp,
                          const std::vector<Trajectory>& demos, ObjectiveKind kind, double gamma,
                          DraCache& cache, const EvalSettings& settings = {});

}  // namespace ltlinfer
