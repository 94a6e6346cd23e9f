#include "ltlinfer/domains.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <tuple>

namespace ltlinfer {

Mdp slimchance(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  std::vector<Mdp::StateSpec> states;
  for (const char* name : {"s_GOOD", "s_BAD"}) {
    Mdp::StateSpec st;
    st.name = name;
    if (st.name == "s_GOOD") st.labels = {"good"};
    st.actions = {{"try", {{"s_GOOD", epsilon}, {"s_BAD", 1.0 - epsilon}}},
                  {"notry", {{"s_BAD", 1.0}}}};
    states.push_back(std::move(st));
  }
  return Mdp::build(Alphabet({"good"}), states, "s_BAD");
}

namespace {

struct Robot {
  int dirt;
  int battery;
  bool docked;
  std::string last;

  auto key() const { return std::tie(dirt, battery, docked, last); }
  bool operator<(const Robot& o) const { return key() < o.key(); }

  bool dead() const { return dirt < 0; }

  std::string name() const {
    if (dead()) return "dead";
    return "d" + std::to_string(dirt) + "_b" + std::to_string(battery) + (docked ? "_docked_" : "_free_") + last;
  }
};

std::vector<std::pair<std::string, Robot>> robot_moves(const Robot& r, int capacity) {
  std::vector<std::pair<std::string, Robot>> out;
  auto with = [&](const char* action, int dirt, int battery, bool docked) {
    out.emplace_back(action, Robot{dirt, battery, docked, action});
  };
  if (r.dead()) {
    out.emplace_back("beDead", r);
  } else if (r.docked) {
    with("wait", r.dirt, capacity, true);
    with("undock", r.dirt, r.battery, false);
  } else if (r.battery == 0) {
    out.emplace_back("beDead", Robot{-1, 0, false, "beDead"});
  } else {
    with("vacuum", std::max(0, r.dirt - 1), r.battery - 1, false);
    with("dock", r.dirt, r.battery, true);
    with("wait", r.dirt, r.battery - 1, false);
  }
  return out;
}

}  // namespace

Mdp cleaningworld(const CleaningWorldParams& params) {
  if (params.dirt < 0 || params.battery < 0 || params.capacity < 0 || params.battery > params.capacity) {
    throw std::invalid_argument("cleaningworld needs 0 <= battery <= capacity and dirt >= 0");
  }
  const std::vector<std::string> props = {"batteryDead", "roomClean", "vacuum", "dock", "undock", "wait", "beDead"};
  Robot start{params.dirt, params.battery, false, "none"};
  std::map<Robot, int> seen{{start, 0}};
  std::vector<Robot> order{start};
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const auto& [action, next] : robot_moves(order[i], params.capacity)) {
      if (seen.emplace(next, static_cast<int>(order.size())).second) order.push_back(next);
    }
  }
  std::vector<Mdp::StateSpec> states;
  for (const Robot& r : order) {
    Mdp::StateSpec st;
    st.name = r.name();
    if (r.battery == 0) st.labels.push_back("batteryDead");
    if (r.dirt == 0) st.labels.push_back("roomClean");  // the dead state has no dirt reading
    if (r.last != "none") st.labels.push_back(r.last);
    for (const auto& [action, next] : robot_moves(r, params.capacity)) {
      st.actions.push_back({action, {{next.name(), 1.0}}});
    }
    states.push_back(std::move(st));
  }
  return Mdp::build(Alphabet(props), states, start.name());
}

int DemonstratorPolicy::advance(const ProductEdge& e) const {
  const double g = product().gamma();
  return g * values[e.keep] <= 1.0 + g * values[e.susp] ? e.keep : e.susp;
}

DemonstratorPolicy plan_demonstrator(std::shared_ptr<const Mdp> mdp, const Formula& spec, double gamma,
                                     DraCache& cache, const EvalSettings& settings) {
  DemonstratorPolicy out;
  out.analysis = analyze_formula(spec, std::move(mdp), gamma, cache, settings);
  const ProductMdp& p = *out.analysis.product;
  const StateClassification& cls = out.analysis.cls;
  const int n = p.num_states();
  const double vmax = 1.0 / (1.0 - gamma);

  auto q_value = [&](const ViolationTable& v, const ProductChoice& c) {
    double acc = 0.0;
    for (const auto& e : c.edges) acc += e.prob * std::min(1.0 + gamma * v[e.susp], gamma * v[e.keep]);
    return acc;
  };

  ViolationTable v(n, 0.0), next(n, 0.0);
  for (int x = 0; x < n; ++x) {
    if (cls.bad[x]) v[x] = next[x] = vmax;
  }
  bool converged = false;
  for (std::size_t iter = 0; iter < settings.max_iters && !converged; ++iter) {
    double delta = 0.0;
    for (int x = 0; x < n; ++x) {
      if (cls.bad[x]) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : p.choices(x)) best = std::min(best, q_value(v, c));
      next[x] = best;
      delta = std::max(delta, std::abs(best - v[x]));
    }
    v.swap(next);
    converged = delta < settings.tol;
  }
  if (!converged) throw NonConvergence("demonstrator planning did not converge");

  out.choice.assign(n, 0);
  for (int x = 0; x < n; ++x) {
    const auto& cs = p.choices(x);
    double best = q_value(v, cs[0]);
    for (std::size_t c = 1; c < cs.size(); ++c) {
      double q = q_value(v, cs[c]);
      if (q < best - 1e-12) {
        best = q;
        out.choice[x] = static_cast<int>(c);
      }
    }
  }
  out.values = std::move(v);
  return out;
}

std::vector<Trajectory> generate_demos(const DemonstratorPolicy& policy, std::size_t count,
                                       std::size_t horizon, std::uint64_t seed) {
  if (count < 1 || horizon < 1) throw std::invalid_argument("count and horizon must be at least 1");
  const ProductMdp& p = policy.product();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Trajectory> out;
  for (std::size_t i = 0; i < count; ++i) {
    Trajectory t;
    int x = policy.advance(p.choices(ProductMdp::kPreInitial)[0].edges[0]);
    for (std::size_t k = 0; k < horizon; ++k) {
      const ProductChoice& c = p.choices(x)[policy.choice[x]];
      double u = unit(rng), acc = 0.0;
      const ProductEdge* edge = &c.edges.back();
      for (const auto& e : c.edges) {
        acc += e.prob;
        if (u < acc) {
          edge = &e;
          break;
        }
      }
      t.steps.push_back({p.mdp_state(x), c.action});
      x = policy.advance(*edge);
    }
    t.final_state = p.mdp_state(x);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Trajectory> generate_demos(std::shared_ptr<const Mdp> mdp, const Formula& spec, double gamma,
                                       std::size_t count, std::size_t horizon, std::uint64_t seed) {
  DraCache cache;
  return generate_demos(plan_demonstrator(std::move(mdp), spec, gamma, cache), count, horizon, seed);
}

Mdp make_domain(const std::string& name, double epsilon, const CleaningWorldParams& params) {
  if (name == "slimchance") return slimchance(epsilon);
  if (name == "cleaningworld") return cleaningworld(params);
  throw std::invalid_argument("unknown domain '" + name + "'");
}

}  // namespace ltlinfer
