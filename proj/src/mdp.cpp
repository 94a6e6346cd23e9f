#include "ltlinfer/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ltlinfer {

using ordered_json = nlohmann::ordered_json;

Mdp Mdp::build(Alphabet propositions, const std::vector<StateSpec>& states,
               const std::string& initial, double tolerance, std::vector<std::string>* warnings) {
  Mdp m;
  m.props_ = std::move(propositions);
  std::map<std::string, int> state_ids, action_ids;
  for (const auto& spec : states) {
    if (spec.name.empty()) throw std::invalid_argument("state with empty name");
    if (!state_ids.emplace(spec.name, static_cast<int>(m.state_names_.size())).second) {
      throw std::invalid_argument("duplicate state: " + spec.name);
    }
    m.state_names_.push_back(spec.name);
  }
  auto it = state_ids.find(initial);
  if (it == state_ids.end()) throw std::invalid_argument("unknown initial state: " + initial);
  m.initial_ = it->second;

  for (const auto& spec : states) {
    m.labels_.push_back(valuation_of(m.props_, spec.labels));
    if (spec.actions.empty()) throw std::invalid_argument("state " + spec.name + " has no actions");
    std::vector<Choice> choices;
    for (const auto& [action, dist] : spec.actions) {
      auto [ait, fresh] = action_ids.emplace(action, static_cast<int>(m.action_names_.size()));
      if (fresh) m.action_names_.push_back(action);
      Choice c{ait->second, {}};
      for (const auto& ch : choices) {
        if (ch.action == c.action) throw std::invalid_argument("duplicate action " + action + " in " + spec.name);
      }
      std::map<int, double> merged;
      double total = 0.0;
      for (const auto& [succ, p] : dist) {
        auto sit = state_ids.find(succ);
        if (sit == state_ids.end()) throw std::invalid_argument("unknown successor state: " + succ);
        if (!(p >= 0.0 && p <= 1.0)) {
          throw std::invalid_argument("probability out of range in " + spec.name + "/" + action);
        }
        merged[sit->second] += p;
        total += p;
      }
      if (std::abs(total - 1.0) > tolerance) {
        throw std::invalid_argument("distribution of " + spec.name + "/" + action + " sums to " +
                                    std::to_string(total));
      }
      if (std::abs(total - 1.0) > 1e-12 && warnings) {
        warnings->push_back("renormalized " + spec.name + "/" + action + " (sum " + std::to_string(total) + ")");
      }
      for (const auto& [target, p] : merged) {
        if (p > 0.0) c.outcomes.push_back({target, p / total});
      }
      choices.push_back(std::move(c));
    }
    std::sort(choices.begin(), choices.end(), [](const Choice& a, const Choice& b) { return a.action < b.action; });
    m.choices_.push_back(std::move(choices));
  }
  return m;
}

int Mdp::state_id(const std::string& name) const {
  for (int s = 0; s < num_states(); ++s) {
    if (state_names_[s] == name) return s;
  }
  return -1;
}

int Mdp::action_id(const std::string& name) const {
  for (int a = 0; a < num_actions(); ++a) {
    if (action_names_[a] == name) return a;
  }
  return -1;
}

int Mdp::choice_index(int s, int a) const {
  const auto& cs = choices_.at(s);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (cs[i].action == a) return static_cast<int>(i);
  }
  return -1;
}

double Mdp::prob(int s, int a, int next) const {
  int c = choice_index(s, a);
  if (c < 0) return 0.0;
  for (const auto& t : choices_[s][c].outcomes) {
    if (t.target == next) return t.prob;
  }
  return 0.0;
}

std::vector<int> Trajectory::states() const {
  std::vector<int> out;
  out.reserve(steps.size() + 1);
  for (const auto& st : steps) out.push_back(st.state);
  out.push_back(final_state);
  return out;
}

std::optional<TrajectoryViolation> validate_trajectory(const Mdp& m, const Trajectory& t) {
  auto in_range = [&](int s) { return s >= 0 && s < m.num_states(); };
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const Step& st = t.steps[i];
    if (!in_range(st.state)) return TrajectoryViolation{i, "unknown state"};
    if (st.action < 0 || st.action >= m.num_actions() || !m.available(st.state, st.action)) {
      return TrajectoryViolation{i, "action not available in state " + m.state_name(st.state)};
    }
    int next = i + 1 < t.steps.size() ? t.steps[i + 1].state : t.final_state;
    if (!in_range(next)) return TrajectoryViolation{i + 1, "unknown state"};
    if (m.prob(st.state, st.action, next) <= 0.0) {
      return TrajectoryViolation{i, "zero-probability transition " + m.state_name(st.state) + " --" +
                                        m.action_name(st.action) + "--> " + m.state_name(next)};
    }
  }
  if (t.steps.empty() && !in_range(t.final_state)) return TrajectoryViolation{0, "unknown state"};
  return std::nullopt;
}

StationaryPolicy uniform_random_policy(const Mdp& m) {
  StationaryPolicy pi;
  for (int s = 0; s < m.num_states(); ++s) {
    const std::size_t n = m.choices(s).size();
    pi.probs.emplace_back(n, 1.0 / static_cast<double>(n));
  }
  return pi;
}

namespace {

template <typename Rng>
std::size_t draw(Rng& rng, const std::vector<double>& weights) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last = i;
    acc += weights[i];
    if (x < acc) return i;
  }
  return last;
}

}  // namespace

Trajectory sample_trajectory(const Mdp& m, const StationaryPolicy& policy, std::size_t horizon,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Trajectory t;
  int s = m.initial();
  for (std::size_t k = 0; k < horizon; ++k) {
    const Choice& c = m.choices(s)[draw(rng, policy.probs.at(s))];
    std::vector<double> w;
    for (const auto& o : c.outcomes) w.push_back(o.prob);
    t.steps.push_back({s, c.action});
    s = c.outcomes[draw(rng, w)].target;
  }
  t.final_state = s;
  return t;
}

Mdp mdp_from_json(const std::string& text, std::vector<std::string>* warnings) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  try {
    std::vector<std::string> props = j.at("propositions").get<std::vector<std::string>>();
    std::vector<Mdp::StateSpec> specs;
    for (const auto& st : j.at("states")) {
      Mdp::StateSpec spec;
      spec.name = st.at("name").get<std::string>();
      spec.labels = st.value("labels", std::vector<std::string>{});
      for (const auto& [action, dist] : st.at("actions").items()) {
        std::vector<std::pair<std::string, double>> d;
        for (const auto& [succ, p] : dist.items()) d.emplace_back(succ, p.get<double>());
        spec.actions.emplace_back(action, std::move(d));
      }
      specs.push_back(std::move(spec));
    }
    return Mdp::build(Alphabet(std::move(props)), specs, j.at("initial").get<std::string>(), 1e-6, warnings);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed MDP file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid MDP: ") + e.what());
  }
}

std::string mdp_to_json(const Mdp& m) {
  ordered_json j;
  j["propositions"] = m.propositions().names();
  ordered_json states = ordered_json::array();
  for (int s = 0; s < m.num_states(); ++s) {
    ordered_json st;
    st["name"] = m.state_name(s);
    st["labels"] = names_of(m.propositions(), m.label(s));
    ordered_json actions = ordered_json::object();
    for (const auto& c : m.choices(s)) {
      ordered_json dist = ordered_json::object();
      for (const auto& o : c.outcomes) dist[m.state_name(o.target)] = o.prob;
      actions[m.action_name(c.action)] = std::move(dist);
    }
    st["actions"] = std::move(actions);
    states.push_back(std::move(st));
  }
  j["states"] = std::move(states);
  j["initial"] = m.state_name(m.initial());
  return j.dump(2) + "\n";
}

std::vector<Trajectory> trajectories_from_json(const Mdp& m, const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  auto state = [&](const std::string& name) {
    int s = m.state_id(name);
    if (s < 0) throw FormatError("unknown state in trajectory: " + name);
    return s;
  };
  std::vector<Trajectory> out;
  try {
    for (const auto& tj : j.at("trajectories")) {
      Trajectory t;
      for (const auto& sj : tj.at("steps")) {
        std::string action = sj.at("action").get<std::string>();
        int a = m.action_id(action);
        if (a < 0) throw FormatError("unknown action in trajectory: " + action);
        t.steps.push_back({state(sj.at("state").get<std::string>()), a});
      }
      t.final_state = state(tj.at("final").get<std::string>());
      if (auto bad = validate_trajectory(m, t)) {
        throw FormatError("trajectory " + std::to_string(out.size()) + " invalid at step " +
                          std::to_string(bad->index) + ": " + bad->reason);
      }
      out.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed trajectory file: ") + e.what());
  }
  return out;
}

std::string trajectories_to_json(const Mdp& m, const std::vector<Trajectory>& demos) {
  ordered_json arr = ordered_json::array();
  for (const auto& t : demos) {
    ordered_json steps = ordered_json::array();
    for (const auto& st : t.steps) {
      steps.push_back({{"state", m.state_name(st.state)}, {"action", m.action_name(st.action)}});
    }
    arr.push_back({{"steps", std::move(steps)}, {"final", m.state_name(t.final_state)}});
  }
  ordered_json j;
  j["trajectories"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

Mdp load_mdp(const std::string& path, std::vector<std::string>* warnings) {
  return mdp_from_json(read_file(path), warnings);
}

std::vector<Trajectory> load_trajectories(const Mdp& m, const std::string& path) {
  return trajectories_from_json(m, read_file(path));
}

}  // namespace ltlinfer
