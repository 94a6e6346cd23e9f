#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ltlinfer/objective.hpp"

namespace ltlinfer {

/// Two states s_GOOD / s_BAD, actions try / notry. `try` reaches s_GOOD with
/// probability epsilon; `notry` always reaches s_BAD. Starts in s_BAD.
Mdp slimchance(double epsilon = 0.01);

struct CleaningWorldParams {
  int dirt = 5;
  int battery = 3;
  int capacity = 3;
};

/// Deterministic vacuum robot. A state is (dirt, battery, docked, last
/// action); only states reachable from the start are built. Waiting while
/// docked recharges to full capacity in one step. An undocked robot with an
/// empty battery can only beDead, which moves it to an absorbing "dead" state
/// labelled {batteryDead, beDead}.
Mdp cleaningworld(const CleaningWorldParams& params = {});

/// Greedy policy of the cost-minimizing demonstrator on the skip product.
struct DemonstratorPolicy {
  FormulaAnalysis analysis;
  ViolationTable values;     // optimal violation cost per product state
  std::vector<int> choice;   // choice index per product state

  const ProductMdp& product() const { return *analysis.product; }
  /// Product successor of edge `e` after the cheaper of keep / susp
  /// (keep on ties).
  int advance(const ProductEdge& e) const;
};

/// Value iteration of
///   V(s,q) = min_a sum_s' P(s,a,s') min{1 + g V(s',q), g V(s',delta(q,L(s')))}
/// with bad states pinned at 1/(1-g); ties go to the lowest action id.
DemonstratorPolicy plan_demonstrator(std::shared_ptr<const Mdp> mdp, const Formula& spec, double gamma,
                                     DraCache& cache, const EvalSettings& settings = {});

/// `count` rollouts of `horizon` steps under the planned policy, drawn from
/// one RNG stream seeded with `seed`.
std::vector<Trajectory> generate_demos(const DemonstratorPolicy& policy, std::size_t count,
                                       std::size_t horizon, std::uint64_t seed);

std::vector<Trajectory> generate_demos(std::shared_ptr<const Mdp> mdp, const Formula& spec, double gamma,
                                       std::size_t count, std::size_t horizon, std::uint64_t seed);

/// "slimchance" or "cleaningworld"; throws std::invalid_argument otherwise.
Mdp make_domain(const std::string& name, double epsilon = 0.01, const CleaningWorldParams& params = {});

}  // namespace ltlinfer
