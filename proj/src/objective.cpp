#include "ltlinfer/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace ltlinfer {

ProductPolicy uniform_product_policy(const ProductMdp& p) {
  ProductPolicy pi;
  pi.probs.reserve(p.num_states());
  for (int x = 0; x < p.num_states(); ++x) {
    const std::size_t n = p.choices(x).size();
    pi.probs.emplace_back(n, 1.0 / static_cast<double>(n));
  }
  return pi;
}

ViolationTable evaluate_policy_violation(const ProductMdp& p, const ProductPolicy& pi,
                                         const StateClassification& cls, const EvalSettings& settings) {
  const int n = p.num_states();
  const double g = p.gamma();
  const double vmax = 1.0 / (1.0 - g);
  if (!(settings.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  ViolationTable v(n, 0.0);
  for (int x = 0; x < n; ++x) {
    if (cls.bad[x]) v[x] = vmax;
  }

  // Flatten the operator into (weight, keep, susp) terms per state.
  struct Term {
    double w;
    int keep;
    int susp;
  };
  std::vector<std::size_t> start(n + 1, 0);
  std::vector<Term> terms;
  for (int x = 0; x < n; ++x) {
    start[x] = terms.size();
    if (cls.bad[x]) continue;
    const auto& cs = p.choices(x);
    const auto& probs = pi.probs.at(x);
    if (probs.size() != cs.size()) throw std::invalid_argument("policy does not match product choices");
    for (std::size_t c = 0; c < cs.size(); ++c) {
      if (probs[c] <= 0.0) continue;
      for (const auto& e : cs[c].edges) terms.push_back({probs[c] * e.prob, e.keep, e.susp});
    }
  }
  start[n] = terms.size();

  ViolationTable next = v;
  for (std::size_t iter = 0; iter < settings.max_iters; ++iter) {
    double delta = 0.0;
    for (int x = 0; x < n; ++x) {
      if (cls.bad[x]) continue;
      double acc = 0.0;
      for (std::size_t k = start[x]; k < start[x + 1]; ++k) {
        const Term& t = terms[k];
        acc += t.w * std::min(1.0 + g * v[t.susp], g * v[t.keep]);
      }
      next[x] = acc;
      delta = std::max(delta, std::abs(acc - v[x]));
    }
    v.swap(next);
    if (delta < settings.tol) return v;
  }
  throw NonConvergence("policy evaluation did not converge");
}

Interpretation rabin_state_sequence(const ViolationTable& viol_rand, const ProductMdp& p,
                                    const StateClassification& cls, const std::vector<int>& states) {
  if (states.empty()) throw std::invalid_argument("empty state sequence");
  const Dra& dra = p.dra();
  const Mdp& mdp = p.mdp();
  const int nq = dra.num_states();
  const double g = p.gamma();
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t T = states.size() - 1;

  // cost[t][q] for the cell (s_t, q); parent[t][q] is the DRA state at t-1.
  std::vector<std::vector<double>> cost(T + 1, std::vector<double>(nq, inf));
  std::vector<std::vector<int>> parent(T + 1, std::vector<int>(nq, -1));

  auto order_key = [&](int s, DraState q) {
    int id = p.find(s, q);
    return id < 0 ? std::numeric_limits<long long>::max() / 2 + q : static_cast<long long>(id);
  };

  std::vector<double> prev_cost(nq, inf);
  std::vector<DraState> prev_cells;
  int prev_s = -1;
  prev_cost[dra.initial()] = 0.0;
  prev_cells.push_back(dra.initial());
  double discount = 1.0;  // gamma^t
  for (std::size_t t = 0; t <= T; ++t) {
    const int s = states[t];
    const Valuation label = mdp.label(s);
    std::sort(prev_cells.begin(), prev_cells.end(),
              [&](DraState a, DraState b) { return order_key(prev_s, a) < order_key(prev_s, b); });
    std::vector<double>& cur = cost[t];
    for (DraState q : prev_cells) {
      const double c = prev_cost[q];
      if (c + discount < cur[q]) {
        cur[q] = c + discount;
        parent[t][q] = q;
      }
      const DraState q2 = dra.step(q, label);
      if (c < cur[q2]) {
        cur[q2] = c;
        parent[t][q2] = q;
      }
    }
    prev_cells.clear();
    for (DraState q = 0; q < nq; ++q) {
      if (cur[q] < inf) prev_cells.push_back(q);
    }
    prev_cost = cur;
    prev_s = s;
    discount *= g;
  }

  // discount == gamma^(T+1) here.
  Interpretation out;
  double best = inf;
  long long best_key = 0;
  DraState best_q = -1;
  for (DraState q = 0; q < nq; ++q) {
    if (cost[T][q] == inf) continue;
    const int x = p.find(states[T], q);
    if (x < 0 || cls.bad[x]) continue;
    const double value = cost[T][q] + discount * viol_rand[x];
    if (value < best || (value == best && x < best_key)) {
      best = value;
      best_key = x;
      best_q = q;
    }
  }
  if (best_q < 0) {
    out.dra_states.assign(T + 2, dra.initial());
    out.cost = 1.0 / (1.0 - g);
    out.terminal = -1;
    return out;
  }
  out.cost = best;
  out.terminal = static_cast<int>(best_key);
  out.dra_states.assign(T + 2, dra.initial());
  DraState q = best_q;
  for (std::size_t t = T + 1; t-- > 0;) {
    out.dra_states[t + 1] = q;
    q = parent[t][q];
  }
  out.dra_states[0] = q;
  return out;
}

double obj_state_based(const ProductMdp& p, const StateClassification& cls, const ViolationTable& viol_rand,
                       const std::vector<Trajectory>& demos) {
  if (demos.empty()) throw std::invalid_argument("no demonstrations");
  double total = 0.0;
  for (const auto& tau : demos) total += rabin_state_sequence(viol_rand, p, cls, tau.states()).cost;
  return total - static_cast<double>(demos.size()) * viol_rand[ProductMdp::kPreInitial];
}

ProductPolicy demonstrated_policy(const ProductMdp& p, const StateClassification& cls,
                                  const ViolationTable& viol_rand, const std::vector<Trajectory>& demos) {
  std::vector<std::set<int>> chosen(p.num_states());
  for (const auto& tau : demos) {
    Interpretation interp = rabin_state_sequence(viol_rand, p, cls, tau.states());
    chosen[ProductMdp::kPreInitial].insert(0);  // a_-1
    for (std::size_t t = 0; t < tau.steps.size(); ++t) {
      const Step& st = tau.steps[t];
      const int x = p.find(st.state, interp.dra_states[t + 1]);
      if (x < 0) continue;
      const auto& cs = p.choices(x);
      for (std::size_t c = 0; c < cs.size(); ++c) {
        if (cs[c].action == st.action) chosen[x].insert(static_cast<int>(c));
      }
    }
  }
  ProductPolicy pi = uniform_product_policy(p);
  for (int x = 0; x < p.num_states(); ++x) {
    if (chosen[x].empty()) continue;
    std::fill(pi.probs[x].begin(), pi.probs[x].end(), 0.0);
    for (int c : chosen[x]) pi.probs[x][c] = 1.0 / static_cast<double>(chosen[x].size());
  }
  return pi;
}

double obj_action_based(const ProductMdp& p, const StateClassification& cls, const ViolationTable& viol_rand,
                        const std::vector<Trajectory>& demos, const EvalSettings& settings) {
  if (demos.empty()) throw std::invalid_argument("no demonstrations");
  ProductPolicy pi = demonstrated_policy(p, cls, viol_rand, demos);
  ViolationTable v = evaluate_policy_violation(p, pi, cls, settings);
  return v[ProductMdp::kPreInitial] - viol_rand[ProductMdp::kPreInitial];
}

ObjectiveKind objective_kind_from_string(const std::string& s) {
  if (s == "state") return ObjectiveKind::State;
  if (s == "action") return ObjectiveKind::Action;
  throw std::invalid_argument("objective must be 'state' or 'action', got '" + s + "'");
}

std::string to_string(ObjectiveKind kind) { return kind == ObjectiveKind::State ? "state" : "action"; }

FormulaAnalysis analyze_formula(const Formula& f, std::shared_ptr<const Mdp> mdp, double gamma,
                                DraCache& cache, const EvalSettings& settings) {
  FormulaAnalysis a;
  a.dra = cache.get(f, mdp->propositions());
  a.product = std::make_shared<const ProductMdp>(std::move(mdp), a.dra, gamma);
  a.amecs = compute_amecs(*a.product);
  a.cls = classify_states(*a.product, a.amecs);
  a.viol_rand = evaluate_policy_violation(*a.product, uniform_product_policy(*a.product), a.cls, settings);
  return a;
}

double evaluate_objective(const Formula& f, std::shared_ptr<const Mdp> mdp,
                          const std::vector<Trajectory>& demos, ObjectiveKind kind, double gamma,
                          DraCache& cache, const EvalSettings& settings) {
  FormulaAnalysis a = analyze_formula(f, std::move(mdp), gamma, cache, settings);
  if (kind == ObjectiveKind::State) return obj_state_based(*a.product, a.cls, a.viol_rand, demos);
  return obj_action_based(*a.product, a.cls, a.viol_rand, demos, settings);
}

}  // namespace ltlinfer
