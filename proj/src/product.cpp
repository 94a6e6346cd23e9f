#include "ltlinfer/product.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>

#include "graph.hpp"

namespace ltlinfer {

ProductMdp::ProductMdp(std::shared_ptr<const Mdp> mdp, DraPtr dra, double gamma, std::size_t max_states)
    : mdp_(std::move(mdp)), dra_(std::move(dra)), gamma_(gamma) {
  if (!(gamma_ > 0.0 && gamma_ < 1.0)) throw std::invalid_argument("discount must lie in (0, 1)");
  if (!(dra_->alphabet() == mdp_->propositions())) {
    throw std::invalid_argument("automaton alphabet differs from the MDP propositions");
  }
  const int nq = dra_->num_states();
  index_.assign(static_cast<std::size_t>(mdp_->num_states() + 1) * nq, -1);

  auto intern = [&](int s, DraState q) {
    int& slot = index_[static_cast<std::size_t>(s + 1) * nq + q];
    if (slot < 0) {
      if (mdp_state_.size() >= max_states) throw ProductTooLarge("product exceeds state budget");
      slot = static_cast<int>(mdp_state_.size());
      mdp_state_.push_back(s);
      dra_state_.push_back(q);
    }
    return slot;
  };

  intern(-1, dra_->initial());
  const int s0 = mdp_->initial();
  const DraState q0 = dra_->initial();
  for (std::size_t x = 0; x < mdp_state_.size(); ++x) {
    const int s = mdp_state_[x];
    const DraState q = dra_state_[x];
    std::vector<ProductChoice> out;
    if (s < 0) {
      int keep = intern(s0, dra_->step(q0, mdp_->label(s0)));
      int susp = intern(s0, q0);
      out.push_back({-1, {{keep, susp, 1.0}}});
    } else {
      for (const auto& c : mdp_->choices(s)) {
        ProductChoice pc{c.action, {}};
        for (const auto& o : c.outcomes) {
          int keep = intern(o.target, dra_->step(q, mdp_->label(o.target)));
          int susp = intern(o.target, q);
          pc.edges.push_back({keep, susp, o.prob});
        }
        out.push_back(std::move(pc));
      }
    }
    choices_.push_back(std::move(out));
  }
}

int ProductMdp::find(int s, DraState q) const {
  if (s < -1 || s >= mdp_->num_states() || q < 0 || q >= dra_->num_states()) return -1;
  return index_[static_cast<std::size_t>(s + 1) * dra_->num_states() + q];
}

std::vector<int> ProductMdp::successors(int x, ProductAction a) const {
  std::vector<int> out;
  for (const auto& e : choices_[x].at(a.choice).edges) out.push_back(a.susp ? e.susp : e.keep);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ProductMdp build_product(std::shared_ptr<const Mdp> mdp, DraPtr dra, double gamma) {
  return ProductMdp(std::move(mdp), std::move(dra), gamma);
}

std::vector<EndComponent> maximal_end_components(const ProductMdp& p, const std::vector<char>& allowed) {
  const int n = p.num_states();
  // enabled[x][2 * choice + susp]
  std::vector<std::vector<char>> enabled(n);
  std::vector<char> active(n, 0);
  for (int x = 0; x < n; ++x) {
    if (!allowed[x]) continue;
    enabled[x].assign(2 * p.choices(x).size(), 1);
    active[x] = 1;
  }
  std::vector<int> comp;
  std::vector<int> adj_buf;
  for (bool changed = true; changed;) {
    changed = false;
    auto successors_of = [&](int x) {
      adj_buf.clear();
      for (std::size_t k = 0; k < enabled[x].size(); ++k) {
        if (!enabled[x][k]) continue;
        for (const auto& e : p.choices(x)[k / 2].edges) adj_buf.push_back(k % 2 ? e.susp : e.keep);
      }
      return adj_buf;
    };
    comp = detail::scc(n, successors_of, [&](int x) { return active[x] != 0; }).first;
    for (int x = 0; x < n; ++x) {
      if (!active[x]) continue;
      bool any = false;
      for (std::size_t k = 0; k < enabled[x].size(); ++k) {
        if (!enabled[x][k]) continue;
        for (const auto& e : p.choices(x)[k / 2].edges) {
          int y = k % 2 ? e.susp : e.keep;
          if (!active[y] || comp[y] != comp[x]) {
            enabled[x][k] = 0;
            changed = true;
            break;
          }
        }
        any = any || enabled[x][k];
      }
      if (!any) {
        active[x] = 0;
        changed = true;
      }
    }
  }
  std::map<int, EndComponent> groups;
  for (int x = 0; x < n; ++x) {
    if (!active[x]) continue;
    EndComponent& ec = groups[comp[x]];
    ec.states.push_back(x);
    std::vector<ProductAction> acts;
    for (std::size_t k = 0; k < enabled[x].size(); ++k) {
      if (enabled[x][k]) acts.push_back({static_cast<int>(k / 2), k % 2 == 1});
    }
    ec.actions.push_back(std::move(acts));
  }
  std::vector<EndComponent> out;
  for (auto& [id, ec] : groups) out.push_back(std::move(ec));
  std::sort(out.begin(), out.end(),
            [](const EndComponent& a, const EndComponent& b) { return a.states.front() < b.states.front(); });
  return out;
}

std::vector<EndComponent> compute_amecs(const ProductMdp& p) {
  const int n = p.num_states();
  const Dra& dra = p.dra();
  std::vector<EndComponent> found;
  for (std::size_t k = 0; k < dra.pairs().size(); ++k) {
    std::vector<char> allowed(n, 0);
    for (int x = 0; x < n; ++x) allowed[x] = !dra.in_fin(k, p.dra_state(x));
    for (auto& ec : maximal_end_components(p, allowed)) {
      bool hits = std::any_of(ec.states.begin(), ec.states.end(),
                              [&](int x) { return dra.in_inf(k, p.dra_state(x)); });
      if (hits && std::find(found.begin(), found.end(), ec) == found.end()) found.push_back(std::move(ec));
    }
  }
  auto strictly_inside = [](const EndComponent& a, const EndComponent& b) {
    return a.states.size() < b.states.size() &&
           std::includes(b.states.begin(), b.states.end(), a.states.begin(), a.states.end());
  };
  std::vector<EndComponent> out;
  for (std::size_t i = 0; i < found.size(); ++i) {
    bool nested = false;
    for (std::size_t j = 0; j < found.size() && !nested; ++j) {
      nested = j != i && strictly_inside(found[i], found[j]);
    }
    if (!nested) out.push_back(found[i]);
  }
  std::sort(out.begin(), out.end(),
            [](const EndComponent& a, const EndComponent& b) { return a.states.front() < b.states.front(); });
  return out;
}

std::size_t StateClassification::num_good() const {
  return static_cast<std::size_t>(std::count(good.begin(), good.end(), 1));
}

std::size_t StateClassification::num_bad() const {
  return static_cast<std::size_t>(std::count(bad.begin(), bad.end(), 1));
}

StateClassification classify_states(const ProductMdp& p, const std::vector<EndComponent>& amecs) {
  const int n = p.num_states();
  StateClassification cls;
  cls.good.assign(n, 0);
  for (const auto& ec : amecs) {
    for (int x : ec.states) cls.good[x] = 1;
  }
  std::vector<std::vector<int>> rev(n);
  for (int x = 0; x < n; ++x) {
    for (const auto& c : p.choices(x)) {
      for (const auto& e : c.edges) {
        rev[e.keep].push_back(x);
        rev[e.susp].push_back(x);
      }
    }
  }
  std::vector<char> reaches = cls.good;
  std::deque<int> queue;
  for (int x = 0; x < n; ++x) {
    if (reaches[x]) queue.push_back(x);
  }
  while (!queue.empty()) {
    int y = queue.front();
    queue.pop_front();
    for (int x : rev[y]) {
      if (!reaches[x]) {
        reaches[x] = 1;
        queue.push_back(x);
      }
    }
  }
  cls.bad.resize(n);
  for (int x = 0; x < n; ++x) cls.bad[x] = !reaches[x];
  return cls;
}

}  // namespace ltlinfer
