// Random instance generators and brute-force oracles shared by the tests.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ltlinfer/domains.hpp"
#include "ltlinfer/objective.hpp"
#include "ltlinfer/product.hpp"

namespace testing {

using namespace ltlinfer;
using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline Formula random_formula(Rng& rng, int depth, const std::vector<std::string>& props) {
  if (depth <= 1 || uniform(rng, 0, 3) == 0) {
    int k = uniform(rng, 0, static_cast<int>(props.size()) + 1);
    if (k == static_cast<int>(props.size())) return Formula::truth();
    if (k == static_cast<int>(props.size()) + 1) return Formula::falsity();
    return Formula::prop(props[k]);
  }
  static constexpr Op ops[] = {Op::Not, Op::And, Op::Or, Op::Implies, Op::Next, Op::Always, Op::Eventually, Op::Until};
  Op op = ops[uniform(rng, 0, 7)];
  if (arity(op) == 1) return Formula::unary(op, random_formula(rng, depth - 1, props));
  Formula lhs = random_formula(rng, depth - 1, props);
  return Formula::binary(op, lhs, random_formula(rng, depth - 1, props));
}

inline Formula random_small_formula(Rng& rng, std::size_t max_complexity, const std::vector<std::string>& props) {
  while (true) {
    Formula f = random_formula(rng, 4, props);
    if (complexity(f) <= max_complexity) return f;
  }
}

inline LassoWord random_lasso(Rng& rng, std::size_t num_props, int max_prefix = 6, int max_loop = 4) {
  LassoWord w;
  const int top = (1 << num_props) - 1;
  for (int i = uniform(rng, 0, max_prefix); i > 0; --i) w.prefix.push_back(static_cast<Valuation>(uniform(rng, 0, top)));
  for (int i = uniform(rng, 1, max_loop); i > 0; --i) w.loop.push_back(static_cast<Valuation>(uniform(rng, 0, top)));
  return w;
}

// Random labelled MDP over propositions {p, q} with up to `max_states` states
// and actions a0..a2.
inline Mdp random_mdp(Rng& rng, int max_states, const std::vector<std::string>& props = {"p", "q"}) {
  const int n = uniform(rng, 1, max_states);
  std::vector<Mdp::StateSpec> states(n);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  for (int s = 0; s < n; ++s) {
    states[s].name = "s" + std::to_string(s);
    for (const auto& p : props) {
      if (uniform(rng, 0, 1)) states[s].labels.push_back(p);
    }
    int mask = uniform(rng, 1, 7);
    for (int a = 0; a < 3; ++a) {
      if (!(mask >> a & 1)) continue;
      std::vector<std::pair<std::string, double>> out;
      double total = 0.0;
      std::vector<double> w(n, 0.0);
      for (int t = 0; t < n; ++t) {
        if (t == 0 || uniform(rng, 0, 1)) w[t] = weight(rng);
      }
      std::shuffle(w.begin(), w.end(), rng);
      for (double x : w) total += x;
      for (int t = 0; t < n; ++t) {
        if (w[t] > 0.0) out.emplace_back("s" + std::to_string(t), w[t] / total);
      }
      states[s].actions.emplace_back("a" + std::to_string(a), std::move(out));
    }
  }
  return Mdp::build(Alphabet(props), states, "s0");
}

inline std::vector<int> random_walk(Rng& rng, const Mdp& m, int length) {
  Trajectory t = sample_trajectory(m, uniform_random_policy(m), static_cast<std::size_t>(length), rng());
  return t.states();
}

// Exhaustive Viol^S: every skip set N over positions 0..T.
inline double brute_force_viol_s(const ProductMdp& p, const StateClassification& cls, const ViolationTable& viol_rand,
                                 const std::vector<int>& states) {
  const Dra& dra = p.dra();
  const double g = p.gamma();
  const std::size_t T = states.size() - 1;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t skip = 0; skip < (1u << (T + 1)); ++skip) {
    DraState q = dra.initial();
    double cost = 0.0, discount = 1.0;
    for (std::size_t t = 0; t <= T; ++t) {
      if (skip >> t & 1) {
        cost += discount;
      } else {
        q = dra.step(q, p.mdp().label(states[t]));
      }
      discount *= g;
    }
    int x = p.find(states[T], q);
    if (x < 0 || cls.bad[x]) continue;
    best = std::min(best, cost + discount * viol_rand[x]);
  }
  return std::isinf(best) ? 1.0 / (1.0 - g) : best;
}

// Solves the policy-evaluation system with every min resolved as at
// `fixed`. Returns false when some min is too close to a tie to resolve.
inline bool linear_solve_violation(const ProductMdp& p, const ProductPolicy& pi, const StateClassification& cls,
                                   const ViolationTable& fixed, ViolationTable& out, double margin = 1e-6) {
  const int n = p.num_states();
  const double g = p.gamma();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int x = 0; x < n; ++x) {
    if (cls.bad[x]) {
      b[x] = 1.0 / (1.0 - g);
      continue;
    }
    const auto& cs = p.choices(x);
    for (std::size_t c = 0; c < cs.size(); ++c) {
      const double pc = pi.probs[x][c];
      if (pc <= 0.0) continue;
      for (const auto& e : cs[c].edges) {
        const double skip = 1.0 + g * fixed[e.susp];
        const double keep = g * fixed[e.keep];
        if (std::abs(skip - keep) < margin) return false;
        const double w = pc * e.prob;
        if (skip < keep) {
          b[x] += w;
          A(x, e.susp) -= w * g;
        } else {
          A(x, e.keep) -= w * g;
        }
      }
    }
  }
  Eigen::VectorXd v = A.partialPivLu().solve(b);
  out.assign(v.data(), v.data() + n);
  return true;
}

// Exhaustive accepting maximal end components: for each Rabin pair, every
// subset of Fin-free states with its largest closed action set, kept when
// strongly connected, accepting and not contained in a larger such set.
inline std::vector<EndComponent> brute_force_amecs(const ProductMdp& p) {
  const int n = p.num_states();
  const Dra& dra = p.dra();
  std::set<std::pair<std::vector<int>, std::vector<std::vector<ProductAction>>>> found;
  for (std::size_t k = 0; k < dra.pairs().size(); ++k) {
    std::vector<std::pair<std::uint32_t, EndComponent>> accepting;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
      bool ok = true;
      bool has_inf = false;
      for (int x = 0; x < n && ok; ++x) {
        if (!(mask >> x & 1)) continue;
        if (dra.in_fin(k, p.dra_state(x))) ok = false;
        if (dra.in_inf(k, p.dra_state(x))) has_inf = true;
      }
      if (!ok || !has_inf) continue;
      EndComponent ec;
      std::vector<std::vector<int>> adj(n);
      for (int x = 0; x < n && ok; ++x) {
        if (!(mask >> x & 1)) continue;
        std::vector<ProductAction> acts;
        for (std::size_t c = 0; c < p.choices(x).size(); ++c) {
          for (bool susp : {false, true}) {
            ProductAction a{static_cast<int>(c), susp};
            auto succ = p.successors(x, a);
            bool closed = std::all_of(succ.begin(), succ.end(), [&](int y) { return mask >> y & 1; });
            if (!closed) continue;
            acts.push_back(a);
            adj[x].insert(adj[x].end(), succ.begin(), succ.end());
          }
        }
        if (acts.empty()) ok = false;
        std::sort(acts.begin(), acts.end());
        ec.states.push_back(x);
        ec.actions.push_back(std::move(acts));
      }
      if (!ok) continue;
      // Strong connectivity: every member reaches every other.
      for (int src : ec.states) {
        std::uint32_t seen = 1u << src;
        std::vector<int> stack{src};
        while (!stack.empty()) {
          int x = stack.back();
          stack.pop_back();
          for (int y : adj[x]) {
            if (!(seen >> y & 1)) {
              seen |= 1u << y;
              stack.push_back(y);
            }
          }
        }
        if (seen != mask) {
          ok = false;
          break;
        }
      }
      if (ok) accepting.emplace_back(mask, std::move(ec));
    }
    for (const auto& [mask, ec] : accepting) {
      bool maximal = std::none_of(accepting.begin(), accepting.end(), [&](const auto& other) {
        return other.first != mask && (other.first & mask) == mask;
      });
      if (maximal) found.emplace(ec.states, ec.actions);
    }
  }
  std::vector<EndComponent> out;
  for (const auto& [states, actions] : found) {
    bool nested = std::any_of(found.begin(), found.end(), [&](const auto& other) {
      return other.first != states && std::includes(other.first.begin(), other.first.end(), states.begin(), states.end());
    });
    if (!nested) out.push_back({states, actions});
  }
  return out;
}

inline std::vector<EndComponent> sorted(std::vector<EndComponent> ecs) {
  std::sort(ecs.begin(), ecs.end(), [](const EndComponent& a, const EndComponent& b) { return a.states < b.states; });
  return ecs;
}

// The three reference SlimChance demonstrations (all try; the
// second visits s_GOOD at t = 1).
inline std::vector<Trajectory> slimchance_reference_demos(const Mdp& m) {
  const int bad = m.state_id("s_BAD"), good = m.state_id("s_GOOD"), attempt = m.action_id("try");
  std::vector<Trajectory> demos(3);
  for (int i = 0; i < 3; ++i) {
    for (int t = 0; t < 10; ++t) demos[i].steps.push_back({i == 1 && t == 1 ? good : bad, attempt});
    demos[i].final_state = bad;
  }
  return demos;
}

// Closed-form SlimChance values for G good under a policy that tries with
// probability p everywhere. Both live states share
//   V = p eps g V + (1 - p eps) min(1 + g V, g vmax)
// and the pre-initial value is min(1 + g V, g vmax).
struct SlimChanceValues {
  double live;
  double pre_initial;
};

inline SlimChanceValues slimchance_closed_form(double p_try, double eps, double g) {
  const double vmax = 1.0 / (1.0 - g);
  const double a = p_try * eps;
  const double v_skip = (1.0 - a) / (1.0 - g);                 // min resolved to 1 + gV
  const double v_sink = (1.0 - a) * g * vmax / (1.0 - a * g);  // min resolved to g vmax
  const double v = (1.0 + g * v_skip <= g * vmax) ? v_skip : v_sink;
  return {v, std::min(1.0 + g * v, g * vmax)};
}

}  // namespace testing
