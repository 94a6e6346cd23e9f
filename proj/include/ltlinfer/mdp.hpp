#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ltlinfer/ltl.hpp"

namespace ltlinfer {

struct Transition {
  int target;
  double prob;
};

/// One available action at a state and its successor distribution.
struct Choice {
  int action;
  std::vector<Transition> outcomes;
};

/// Labeled MDP with dense integer state/action ids. Immutable once built.
class Mdp {
public:
  struct StateSpec {
    std::string name;
    std::vector<std::string> labels;
    /// (action name, [(successor name, probability)])
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, double>>>> actions;
  };

  /// Validates the model: every state has at least one action, every
  /// distribution is over known states and sums to one within `tolerance`
  /// (it is then renormalized exactly), and labels come from the alphabet.
  /// Action ids follow first appearance across states in order.
  static Mdp build(Alphabet propositions, const std::vector<StateSpec>& states,
                   const std::string& initial, double tolerance = 1e-9,
                   std::vector<std::string>* warnings = nullptr);

  int num_states() const { return static_cast<int>(state_names_.size()); }
  int num_actions() const { return static_cast<int>(action_names_.size()); }
  int initial() const { return initial_; }
  const Alphabet& propositions() const { return props_; }

  const std::string& state_name(int s) const { return state_names_.at(s); }
  const std::string& action_name(int a) const { return action_names_.at(a); }
  int state_id(const std::string& name) const;
  int action_id(const std::string& name) const;

  Valuation label(int s) const { return labels_[s]; }
  const std::vector<Choice>& choices(int s) const { return choices_[s]; }
  /// Index into choices(s) of action `a`, or -1 if unavailable.
  int choice_index(int s, int a) const;
  bool available(int s, int a) const { return choice_index(s, a) >= 0; }
  double prob(int s, int a, int next) const;

private:
  Alphabet props_;
  std::vector<std::string> state_names_;
  std::vector<std::string> action_names_;
  std::vector<Valuation> labels_;
  std::vector<std::vector<Choice>> choices_;
  int initial_ = 0;
};

struct Step {
  int state;
  int action;
};

struct Trajectory {
  std::vector<Step> steps;
  int final_state = 0;

  std::size_t length() const { return steps.size(); }
  /// s_0 .. s_T
  std::vector<int> states() const;
};

struct TrajectoryViolation {
  std::size_t index;
  std::string reason;
};

/// Empty when the trajectory is consistent with the model.
std::optional<TrajectoryViolation> validate_trajectory(const Mdp& m, const Trajectory& t);

/// probs[s][c] is the probability of choices(s)[c].
struct StationaryPolicy {
  std::vector<std::vector<double>> probs;
};

StationaryPolicy uniform_random_policy(const Mdp& m);

/// Draws `horizon` steps from the initial state. Deterministic per seed.
Trajectory sample_trajectory(const Mdp& m, const StationaryPolicy& policy, std::size_t horizon,
                             std::uint64_t seed);

// JSON file formats -------------------------------------------------------

class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Distributions must sum to one within 1e-6; they are renormalized and a
/// warning is recorded when they are off by more than 1e-12.
Mdp mdp_from_json(const std::string& text, std::vector<std::string>* warnings = nullptr);
std::string mdp_to_json(const Mdp& m);
Mdp load_mdp(const std::string& path, std::vector<std::string>* warnings = nullptr);

std::vector<Trajectory> trajectories_from_json(const Mdp& m, const std::string& text);
std::string trajectories_to_json(const Mdp& m, const std::vector<Trajectory>& demos);
std::vector<Trajectory> load_trajectories(const Mdp& m, const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace ltlinfer
