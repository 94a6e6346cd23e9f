#include "ltlinfer/automata.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "graph.hpp"

namespace ltlinfer {

Dra::Dra(Alphabet alphabet, std::vector<int> reads, int num_states, std::vector<DraState> table,
         std::vector<RabinPair> pairs)
    : alphabet_(std::move(alphabet)),
      reads_(std::move(reads)),
      num_states_(num_states),
      table_(std::move(table)),
      pairs_(std::move(pairs)) {
  if (table_.size() != static_cast<std::size_t>(num_states_) * num_letters()) {
    throw std::invalid_argument("transition table size mismatch");
  }
  for (DraState q : table_) {
    if (q < 0 || q >= num_states_) throw std::invalid_argument("transition to undeclared state");
  }
  for (const auto& p : pairs_) {
    std::vector<char> fin(num_states_, 0), inf(num_states_, 0);
    for (DraState q : p.fin) {
      if (q < 0 || q >= num_states_) throw std::invalid_argument("Fin state undeclared");
      fin[q] = 1;
    }
    for (DraState q : p.inf) {
      if (q < 0 || q >= num_states_) throw std::invalid_argument("Inf state undeclared");
      inf[q] = 1;
    }
    fin_mask_.push_back(std::move(fin));
    inf_mask_.push_back(std::move(inf));
  }
}

std::size_t Dra::letter_of(Valuation v) const {
  std::size_t letter = 0;
  for (std::size_t j = 0; j < reads_.size(); ++j) {
    if ((v >> reads_[j]) & 1u) letter |= std::size_t{1} << j;
  }
  return letter;
}

namespace {

// ---------------------------------------------------------------------------
// Negation normal form over {true, false, literal, and, or, X, U, R}.

enum class NOp { True, False, Lit, And, Or, Next, Until, Release };

struct NNode {
  NOp op;
  int a = -1;
  int b = -1;
  int prop = -1;  // letter bit for literals
  bool negated = false;
};

class NnfStore {
public:
  int make(NOp op, int a = -1, int b = -1, int prop = -1, bool neg = false) {
    if (op == NOp::And) {
      if (is(a, NOp::False) || is(b, NOp::False)) return make(NOp::False);
      if (is(a, NOp::True)) return b;
      if (is(b, NOp::True) || a == b) return a;
    } else if (op == NOp::Or) {
      if (is(a, NOp::True) || is(b, NOp::True)) return make(NOp::True);
      if (is(a, NOp::False)) return b;
      if (is(b, NOp::False) || a == b) return a;
    } else if (op == NOp::Next) {
      if (is(a, NOp::True) || is(a, NOp::False)) return a;
    } else if (op == NOp::Until || op == NOp::Release) {
      if (is(b, NOp::True) || is(b, NOp::False)) return b;
    }
    auto key = std::make_tuple(static_cast<int>(op), a, b, prop, neg);
    auto it = ids_.find(key);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back({op, a, b, prop, neg});
    ids_.emplace(key, id);
    return id;
  }

  const NNode& operator[](int id) const { return nodes_[id]; }
  int size() const { return static_cast<int>(nodes_.size()); }

private:
  bool is(int id, NOp op) const { return nodes_[id].op == op; }

  std::vector<NNode> nodes_;
  std::map<std::tuple<int, int, int, int, bool>, int> ids_;
};

int to_nnf(const Formula& f, bool neg, NnfStore& store, const std::map<std::string, int>& bits) {
  auto rec = [&](const Formula& g, bool n) { return to_nnf(g, n, store, bits); };
  switch (f.op()) {
    case Op::True:
      return store.make(neg ? NOp::False : NOp::True);
    case Op::False:
      return store.make(neg ? NOp::True : NOp::False);
    case Op::Prop:
      return store.make(NOp::Lit, -1, -1, bits.at(f.name()), neg);
    case Op::Not:
      return rec(f.child(0), !neg);
    case Op::And:
      return store.make(neg ? NOp::Or : NOp::And, rec(f.lhs(), neg), rec(f.rhs(), neg));
    case Op::Or:
      return store.make(neg ? NOp::And : NOp::Or, rec(f.lhs(), neg), rec(f.rhs(), neg));
    case Op::Implies:
      return store.make(neg ? NOp::And : NOp::Or, rec(f.lhs(), !neg), rec(f.rhs(), neg));
    case Op::Next:
      return store.make(NOp::Next, rec(f.child(0), neg));
    case Op::Always:
      return neg ? store.make(NOp::Until, store.make(NOp::True), rec(f.child(0), true))
                 : store.make(NOp::Release, store.make(NOp::False), rec(f.child(0), false));
    case Op::Eventually:
      return neg ? store.make(NOp::Release, store.make(NOp::False), rec(f.child(0), true))
                 : store.make(NOp::Until, store.make(NOp::True), rec(f.child(0), false));
    case Op::Until:
      return store.make(neg ? NOp::Release : NOp::Until, rec(f.lhs(), neg), rec(f.rhs(), neg));
  }
  throw std::logic_error("unhandled operator");
}

// ---------------------------------------------------------------------------
// Tableau construction of a generalized Buchi automaton. Node 0 is the
// pseudo-initial node; a run entering node v reads a letter that must agree
// with the literals v has committed to.

struct TabNode {
  std::set<int> incoming;
  std::set<int> pending;
  std::set<int> old;
  std::set<int> next;
};

class Tableau {
public:
  Tableau(const NnfStore& store, std::size_t budget) : store_(store), budget_(budget) {}

  void build(int root) {
    TabNode start;
    start.incoming.insert(0);
    start.pending.insert(root);
    expand(std::move(start));
  }

  // Nodes are 1-based; index 0 of these vectors is the pseudo-initial node.
  std::vector<std::set<int>> olds{{}};
  std::vector<std::set<int>> nexts{{}};
  std::vector<std::set<int>> incomings{{}};

private:
  void add_pending(TabNode& n, int f) {
    if (!n.old.count(f)) n.pending.insert(f);
  }

  void expand(TabNode node) {
    while (!node.pending.empty()) {
      int eta = *node.pending.begin();
      node.pending.erase(node.pending.begin());
      if (node.old.count(eta)) continue;
      const NNode& e = store_[eta];
      switch (e.op) {
        case NOp::False:
          return;
        case NOp::True:
          node.old.insert(eta);
          break;
        case NOp::Lit:
          for (int o : node.old) {
            const NNode& x = store_[o];
            if (x.op == NOp::Lit && x.prop == e.prop && x.negated != e.negated) return;
          }
          node.old.insert(eta);
          break;
        case NOp::And:
          node.old.insert(eta);
          add_pending(node, e.a);
          add_pending(node, e.b);
          break;
        case NOp::Next:
          node.old.insert(eta);
          node.next.insert(e.a);
          break;
        case NOp::Or:
        case NOp::Until:
        case NOp::Release: {
          node.old.insert(eta);
          TabNode other = node;
          if (e.op == NOp::Or) {
            add_pending(node, e.a);
            add_pending(other, e.b);
          } else if (e.op == NOp::Until) {
            add_pending(node, e.a);
            node.next.insert(eta);
            add_pending(other, e.b);
          } else {
            add_pending(node, e.b);
            node.next.insert(eta);
            add_pending(other, e.a);
            add_pending(other, e.b);
          }
          expand(std::move(other));
          break;
        }
      }
    }
    for (std::size_t i = 1; i < olds.size(); ++i) {
      if (olds[i] == node.old && nexts[i] == node.next) {
        incomings[i].insert(node.incoming.begin(), node.incoming.end());
        return;
      }
    }
    if (olds.size() > budget_) throw StateBudgetExceeded("tableau exceeds state budget");
    int id = static_cast<int>(olds.size());
    olds.push_back(node.old);
    nexts.push_back(node.next);
    incomings.push_back(node.incoming);
    TabNode succ;
    succ.incoming.insert(id);
    succ.pending = node.next;
    expand(std::move(succ));
  }

  const NnfStore& store_;
  std::size_t budget_;
};

// ---------------------------------------------------------------------------
// Nondeterministic Buchi automaton over letters 0..2^k-1.

struct Nba {
  int num_states = 0;
  std::size_t num_letters = 1;
  std::vector<std::vector<std::vector<int>>> succ;  // [state][letter] sorted
  std::vector<char> accepting;
};

Nba degeneralize(const NnfStore& store, const Tableau& tab, std::size_t num_props,
                 std::size_t budget) {
  const int ntab = static_cast<int>(tab.olds.size());
  std::vector<int> untils;
  // Only untils that occur in some node constrain acceptance.
  for (int i = 0; i < store.size(); ++i) {
    if (store[i].op != NOp::Until) continue;
    for (int v = 1; v < ntab; ++v) {
      if (tab.olds[v].count(i)) {
        untils.push_back(i);
        break;
      }
    }
  }
  const int k = static_cast<int>(untils.size());
  std::vector<std::vector<char>> in_set(std::max(k, 1), std::vector<char>(ntab, 0));
  for (int j = 0; j < k; ++j) {
    for (int v = 1; v < ntab; ++v) {
      const auto& old = tab.olds[v];
      in_set[j][v] = !old.count(untils[j]) || old.count(store[untils[j]].b);
    }
  }
  std::vector<Valuation> pos(ntab, 0), negm(ntab, 0);
  for (int v = 1; v < ntab; ++v) {
    for (int o : tab.olds[v]) {
      if (store[o].op == NOp::Lit) (store[o].negated ? negm[v] : pos[v]) |= Valuation{1} << store[o].prop;
    }
  }
  std::vector<std::vector<int>> out(ntab);
  for (int v = 1; v < ntab; ++v) {
    for (int p : tab.incomings[v]) out[p].push_back(v);
  }

  Nba nba;
  nba.num_letters = std::size_t{1} << num_props;
  std::map<std::pair<int, int>, int> ids;
  std::vector<std::pair<int, int>> states;
  auto intern = [&](int v, int j) {
    auto [it, fresh] = ids.emplace(std::make_pair(v, j), static_cast<int>(states.size()));
    if (fresh) {
      if (states.size() > budget) throw StateBudgetExceeded("Buchi automaton exceeds state budget");
      states.emplace_back(v, j);
    }
    return it->second;
  };
  // Level j in [0, k]: the first j acceptance sets have been visited since the
  // last accepting state; level k is accepting.
  auto level_after = [&](int j, int w) {
    int nj = j == k ? 0 : j;
    while (nj < k && in_set[nj][w]) ++nj;
    return nj;
  };
  intern(0, 0);
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto [v, j] = states[i];
    std::vector<std::vector<int>> row(nba.num_letters);
    for (int w : out[v]) {
      int target = intern(w, level_after(j, w));
      for (std::size_t letter = 0; letter < nba.num_letters; ++letter) {
        if ((letter & pos[w]) == pos[w] && (letter & negm[w]) == 0) row[letter].push_back(target);
      }
    }
    for (auto& r : row) {
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
    }
    nba.succ.push_back(std::move(row));
  }
  nba.num_states = static_cast<int>(states.size());
  nba.accepting.resize(nba.num_states);
  for (int i = 0; i < nba.num_states; ++i) {
    auto [v, j] = states[i];
    nba.accepting[i] = v != 0 && j == k;
  }
  return nba;
}

// States that can reach an accepting cycle.
std::vector<char> productive_states(const Nba& nba) {
  const int n = nba.num_states;
  std::vector<std::vector<int>> adj(n);
  for (int q = 0; q < n; ++q) {
    for (const auto& row : nba.succ[q]) adj[q].insert(adj[q].end(), row.begin(), row.end());
    std::sort(adj[q].begin(), adj[q].end());
    adj[q].erase(std::unique(adj[q].begin(), adj[q].end()), adj[q].end());
  }
  auto [comp, ncomp] = detail::scc(
      n, [&](int v) -> const std::vector<int>& { return adj[v]; }, [](int) { return true; });
  std::vector<char> good_comp(ncomp, 0);
  for (int q = 0; q < n; ++q) {
    if (!nba.accepting[q]) continue;
    for (int w : adj[q]) {
      if (comp[w] == comp[q]) good_comp[comp[q]] = 1;
    }
  }
  std::vector<std::vector<int>> rev(n);
  for (int q = 0; q < n; ++q) {
    for (int w : adj[q]) rev[w].push_back(q);
  }
  std::vector<char> live(n, 0);
  std::deque<int> queue;
  for (int q = 0; q < n; ++q) {
    if (good_comp[comp[q]]) {
      live[q] = 1;
      queue.push_back(q);
    }
  }
  while (!queue.empty()) {
    int q = queue.front();
    queue.pop_front();
    for (int p : rev[q]) {
      if (!live[p]) {
        live[p] = 1;
        queue.push_back(p);
      }
    }
  }
  return live;
}

// Drops unproductive states and merges bisimilar ones (same acceptance, same
// successor classes per letter). State 0 stays initial.
Nba reduce(const Nba& nba) {
  const int n = nba.num_states;
  std::vector<char> live = productive_states(nba);
  if (!live[0]) {
    Nba empty;
    empty.num_states = 1;
    empty.num_letters = nba.num_letters;
    empty.succ.assign(1, std::vector<std::vector<int>>(nba.num_letters));
    empty.accepting.assign(1, 0);
    return empty;
  }
  std::vector<int> cls(n, -1);
  auto relabel = [&](const std::vector<std::vector<int>>& keys) {
    std::map<std::vector<int>, int> ids;
    for (int q = 0; q < n; ++q) {
      if (!live[q]) continue;
      cls[q] = ids.emplace(keys[q], static_cast<int>(ids.size())).first->second;
    }
    return static_cast<int>(ids.size());
  };
  std::vector<std::vector<int>> keys(n);
  for (int q = 0; q < n; ++q) keys[q] = {nba.accepting[q] ? 1 : 0};
  int classes = relabel(keys);
  while (true) {
    for (int q = 0; q < n; ++q) {
      if (!live[q]) continue;
      keys[q] = {cls[q]};
      for (const auto& row : nba.succ[q]) {
        std::vector<int> targets;
        for (int r : row) {
          if (live[r]) targets.push_back(cls[r]);
        }
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
        keys[q].push_back(-1);
        keys[q].insert(keys[q].end(), targets.begin(), targets.end());
      }
    }
    int refined = relabel(keys);
    if (refined == classes) break;
    classes = refined;
  }
  // Renumber so the initial state's class is 0.
  std::vector<int> remap(classes, -1);
  std::vector<int> rep;
  remap[cls[0]] = 0;
  rep.push_back(0);
  for (int q = 0; q < n; ++q) {
    if (live[q] && remap[cls[q]] < 0) {
      remap[cls[q]] = static_cast<int>(rep.size());
      rep.push_back(q);
    }
  }
  Nba out;
  out.num_states = classes;
  out.num_letters = nba.num_letters;
  for (int c = 0; c < classes; ++c) {
    const int q = rep[c];
    std::vector<std::vector<int>> row(nba.num_letters);
    for (std::size_t a = 0; a < nba.num_letters; ++a) {
      for (int r : nba.succ[q][a]) {
        if (live[r]) row[a].push_back(remap[cls[r]]);
      }
      std::sort(row[a].begin(), row[a].end());
      row[a].erase(std::unique(row[a].begin(), row[a].end()), row[a].end());
    }
    out.succ.push_back(std::move(row));
    out.accepting.push_back(nba.accepting[q]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Compact Safra trees: node names are always 1..k, so two trees that differ
// only in naming history coincide. Acceptance is min-parity on transitions:
// 2e when the lowest-named green node has name e and no node at or below e
// died, 2f-1 when node f died (which also renames every node above it).

struct SafraNode {
  int name;
  std::vector<int> label;  // sorted NBA states
  std::vector<SafraNode> kids;
};

using Labels = std::vector<int>;
using Tree = std::vector<SafraNode>;  // empty or a single root

Labels set_union(const Labels& a, const Labels& b) {
  Labels out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Labels set_minus(const Labels& a, const Labels& b) {
  Labels out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

class Safra {
public:
  Safra(const Nba& nba, const std::vector<char>& live)
      : nba_(nba), live_(live), neutral_(2 * (nba.num_states + 1) + 1) {}

  Tree initial() const { return {SafraNode{1, {0}, {}}}; }
  int neutral() const { return neutral_; }

  std::pair<Tree, int> step(Tree tree, std::size_t letter) const {
    if (tree.empty()) return {std::move(tree), neutral_};
    SafraNode& root = tree.front();
    advance(root, letter);
    int fresh = kNewNames;
    spawn(root, fresh);
    merge_horizontal(root);
    int red = std::numeric_limits<int>::max();
    int green = std::numeric_limits<int>::max();
    if (root.label.empty()) return {Tree{}, 2 * root.name - 1};
    prune_empty(root, red);
    merge_vertical(root, red, green);
    compact(root);
    int priority = neutral_;
    if (green < red) {
      priority = 2 * green;
    } else if (red != std::numeric_limits<int>::max()) {
      priority = 2 * red - 1;
    }
    return {std::move(tree), priority};
  }

  static void encode(const Tree& tree, std::vector<int>& key) {
    if (!tree.empty()) encode_node(tree.front(), key);
  }

private:
  static constexpr int kNewNames = 1 << 24;

  static void encode_node(const SafraNode& n, std::vector<int>& key) {
    key.push_back(n.name);
    key.push_back(static_cast<int>(n.label.size()));
    key.insert(key.end(), n.label.begin(), n.label.end());
    key.push_back(static_cast<int>(n.kids.size()));
    for (const auto& k : n.kids) encode_node(k, key);
  }

  void advance(SafraNode& n, std::size_t letter) const {
    Labels next;
    for (int q : n.label) {
      for (int r : nba_.succ[q][letter]) {
        if (live_[r]) next.push_back(r);
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    n.label = std::move(next);
    for (auto& k : n.kids) advance(k, letter);
  }

  void spawn(SafraNode& n, int& fresh) const {
    const std::size_t old_kids = n.kids.size();
    for (std::size_t i = 0; i < old_kids; ++i) spawn(n.kids[i], fresh);
    Labels acc;
    for (int q : n.label) {
      if (nba_.accepting[q]) acc.push_back(q);
    }
    if (!acc.empty()) n.kids.push_back(SafraNode{fresh++, std::move(acc), {}});
  }

  static void remove_states(SafraNode& n, const Labels& gone) {
    n.label = set_minus(n.label, gone);
    for (auto& k : n.kids) remove_states(k, gone);
  }

  static void merge_horizontal(SafraNode& n) {
    Labels seen;
    for (auto& k : n.kids) {
      if (!seen.empty()) remove_states(k, seen);
      seen = set_union(seen, k.label);
      merge_horizontal(k);
    }
  }

  static void note_removed(const SafraNode& n, int& red) {
    if (n.name < kNewNames) red = std::min(red, n.name);
    for (const auto& k : n.kids) note_removed(k, red);
  }

  static void prune_empty(SafraNode& n, int& red) {
    std::erase_if(n.kids, [&](const SafraNode& k) {
      if (!k.label.empty()) return false;
      note_removed(k, red);
      return true;
    });
    for (auto& k : n.kids) prune_empty(k, red);
  }

  static void merge_vertical(SafraNode& n, int& red, int& green) {
    if (!n.kids.empty()) {
      Labels all;
      for (const auto& k : n.kids) all = set_union(all, k.label);
      if (all == n.label) {
        for (const auto& k : n.kids) note_removed(k, red);
        n.kids.clear();
        if (n.name < kNewNames) green = std::min(green, n.name);
        return;
      }
    }
    for (auto& k : n.kids) merge_vertical(k, red, green);
  }

  static void collect(const SafraNode& n, std::vector<int>& names) {
    names.push_back(n.name);
    for (const auto& k : n.kids) collect(k, names);
  }

  static void rename(SafraNode& n, const std::vector<int>& sorted) {
    n.name = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), n.name) - sorted.begin()) + 1;
    for (auto& k : n.kids) rename(k, sorted);
  }

  static void compact(SafraNode& root) {
    std::vector<int> names;
    collect(root, names);
    std::sort(names.begin(), names.end());
    rename(root, names);
  }

  const Nba& nba_;
  const std::vector<char>& live_;
  int neutral_;
};

// ---------------------------------------------------------------------------

struct RawDra {
  int num_states = 0;
  std::size_t num_letters = 1;
  std::vector<DraState> table;
  std::vector<RabinPair> pairs;
};

// States are (tree, priority of the entering transition); the parity
// condition becomes one Rabin pair per even priority e with
// Fin = {priority < e} and Inf = {priority == e}.
RawDra determinize(const Nba& nba, std::size_t budget) {
  std::vector<char> live = productive_states(nba);
  RawDra raw;
  raw.num_letters = nba.num_letters;
  if (!live[0]) {
    raw.num_states = 1;
    raw.table.assign(raw.num_letters, 0);
    return raw;
  }
  Safra safra(nba, live);
  std::map<std::vector<int>, int> ids;
  std::vector<Tree> trees;
  std::vector<int> priority;
  auto intern = [&](Tree tree, int prio) {
    std::vector<int> key{prio};
    Safra::encode(tree, key);
    auto [it, fresh] = ids.emplace(std::move(key), static_cast<int>(trees.size()));
    if (fresh) {
      if (trees.size() >= budget) throw StateBudgetExceeded("DRA exceeds state budget");
      trees.push_back(std::move(tree));
      priority.push_back(prio);
    }
    return it->second;
  };
  intern(safra.initial(), safra.neutral());
  // Successors depend only on the tree, so cache them per tree.
  std::map<std::vector<int>, std::vector<int>> succ_cache;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    std::vector<int> key;
    Safra::encode(trees[i], key);
    auto it = succ_cache.find(key);
    if (it == succ_cache.end()) {
      std::vector<int> row;
      for (std::size_t letter = 0; letter < raw.num_letters; ++letter) {
        auto [next, prio] = safra.step(trees[i], letter);
        row.push_back(intern(std::move(next), prio));
      }
      it = succ_cache.emplace(std::move(key), std::move(row)).first;
    }
    raw.table.insert(raw.table.end(), it->second.begin(), it->second.end());
  }
  raw.num_states = static_cast<int>(trees.size());

  std::set<int> evens;
  for (int p : priority) {
    if (p % 2 == 0) evens.insert(p);
  }
  for (int e : evens) {
    RabinPair pair;
    for (int q = 0; q < raw.num_states; ++q) {
      if (priority[q] < e) pair.fin.push_back(q);
      if (priority[q] == e) pair.inf.push_back(q);
    }
    raw.pairs.push_back(std::move(pair));
  }
  return raw;
}

// Quotient by the coarsest bisimulation that respects membership in every
// Fin and Inf set; this preserves the language.
RawDra quotient(const RawDra& raw) {
  const int n = raw.num_states;
  const std::size_t L = raw.num_letters;
  std::vector<std::vector<int>> sig(n);
  for (const auto& pair : raw.pairs) {
    std::vector<int> mark(n, 0);
    for (int q : pair.fin) mark[q] |= 1;
    for (int q : pair.inf) mark[q] |= 2;
    for (int q = 0; q < n; ++q) sig[q].push_back(mark[q]);
  }
  std::vector<int> cls(n);
  auto relabel = [&](const std::vector<std::vector<int>>& keys) {
    std::map<std::vector<int>, int> ids;
    int count = 0;
    for (int q = 0; q < n; ++q) {
      auto [it, fresh] = ids.emplace(keys[q], count);
      if (fresh) ++count;
      cls[q] = it->second;
    }
    return count;
  };
  int classes = relabel(sig);
  while (true) {
    std::vector<std::vector<int>> keys(n);
    for (int q = 0; q < n; ++q) {
      keys[q].push_back(cls[q]);
      for (std::size_t a = 0; a < L; ++a) keys[q].push_back(cls[raw.table[q * L + a]]);
    }
    int refined = relabel(keys);
    if (refined == classes) break;
    classes = refined;
  }
  RawDra out;
  out.num_letters = L;
  out.num_states = classes;
  out.table.assign(static_cast<std::size_t>(classes) * L, 0);
  // Keep the initial state's class at id 0.
  std::vector<int> remap(classes, -1);
  int next_id = 0;
  remap[cls[0]] = next_id++;
  for (int q = 0; q < n; ++q) {
    if (remap[cls[q]] < 0) remap[cls[q]] = next_id++;
  }
  for (int q = 0; q < n; ++q) {
    for (std::size_t a = 0; a < L; ++a) {
      out.table[remap[cls[q]] * L + a] = remap[cls[raw.table[q * L + a]]];
    }
  }
  for (const auto& pair : raw.pairs) {
    std::set<int> fin, inf;
    for (int q : pair.fin) fin.insert(remap[cls[q]]);
    for (int q : pair.inf) inf.insert(remap[cls[q]]);
    out.pairs.push_back({std::vector<int>(fin.begin(), fin.end()), std::vector<int>(inf.begin(), inf.end())});
  }
  return out;
}

// Collapse states with an empty residual language into a single sink, drop
// pairs that no reachable cycle can satisfy, and renumber breadth-first.
RawDra finalize(const RawDra& raw) {
  const int n = raw.num_states;
  const std::size_t L = raw.num_letters;
  std::vector<std::vector<int>> adj(n);
  for (int q = 0; q < n; ++q) {
    for (std::size_t a = 0; a < L; ++a) adj[q].push_back(raw.table[q * L + a]);
    std::sort(adj[q].begin(), adj[q].end());
    adj[q].erase(std::unique(adj[q].begin(), adj[q].end()), adj[q].end());
  }
  std::vector<char> target(n, 0);
  std::vector<RabinPair> kept;
  for (const auto& pair : raw.pairs) {
    std::vector<char> fin(n, 0), inf(n, 0);
    for (int q : pair.fin) fin[q] = 1;
    for (int q : pair.inf) inf[q] = 1;
    auto [comp, ncomp] = detail::scc(
        n, [&](int v) -> const std::vector<int>& { return adj[v]; },
        [&](int v) { return !fin[v]; });
    std::vector<char> good(ncomp, 0);
    for (int q = 0; q < n; ++q) {
      if (fin[q] || !inf[q]) continue;
      for (int w : adj[q]) {
        if (!fin[w] && comp[w] == comp[q]) good[comp[q]] = 1;
      }
    }
    bool useful = false;
    for (int q = 0; q < n; ++q) {
      if (comp[q] >= 0 && good[comp[q]]) {
        target[q] = 1;
        useful = true;
      }
    }
    if (useful) kept.push_back(pair);
  }
  std::vector<std::vector<int>> rev(n);
  for (int q = 0; q < n; ++q) {
    for (int w : adj[q]) rev[w].push_back(q);
  }
  std::vector<char> live = target;
  std::deque<int> queue;
  for (int q = 0; q < n; ++q) {
    if (live[q]) queue.push_back(q);
  }
  while (!queue.empty()) {
    int q = queue.front();
    queue.pop_front();
    for (int p : rev[q]) {
      if (!live[p]) {
        live[p] = 1;
        queue.push_back(p);
      }
    }
  }

  RawDra out;
  out.num_letters = L;
  if (!live[0]) {
    out.num_states = 1;
    out.table.assign(L, 0);
    return out;
  }
  // Old state id -> new id; all dead states share one id (`sink`).
  std::vector<int> renum(n, -1);
  int sink = -1;
  std::vector<int> order;
  auto visit = [&](int q) {
    if (!live[q]) {
      if (sink < 0) {
        sink = static_cast<int>(order.size());
        order.push_back(-1);
      }
      return sink;
    }
    if (renum[q] < 0) {
      renum[q] = static_cast<int>(order.size());
      order.push_back(q);
    }
    return renum[q];
  };
  visit(0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    int q = order[i];
    for (std::size_t a = 0; a < L; ++a) {
      out.table.push_back(q < 0 ? static_cast<int>(i) : visit(raw.table[q * L + a]));
    }
  }
  out.num_states = static_cast<int>(order.size());
  for (const auto& pair : kept) {
    RabinPair p;
    for (int q : pair.fin) {
      if (live[q] && renum[q] >= 0) p.fin.push_back(renum[q]);
    }
    if (sink >= 0) p.fin.push_back(sink);
    for (int q : pair.inf) {
      if (live[q] && renum[q] >= 0) p.inf.push_back(renum[q]);
    }
    std::sort(p.fin.begin(), p.fin.end());
    std::sort(p.inf.begin(), p.inf.end());
    out.pairs.push_back(std::move(p));
  }
  return out;
}

// A state on no cycle is visited at most once by any run, so its Fin/Inf
// membership is irrelevant. Such a state is merged into a state with the
// same successors (preferring one on a cycle, whose membership it takes).
// Returns false when nothing merged.
bool merge_transient(RawDra& raw) {
  const int n = raw.num_states;
  const std::size_t L = raw.num_letters;
  std::vector<std::vector<int>> adj(n);
  for (int q = 0; q < n; ++q) {
    adj[q].assign(raw.table.begin() + q * L, raw.table.begin() + (q + 1) * L);
  }
  auto [comp, ncomp] = detail::scc(
      n, [&](int v) -> const std::vector<int>& { return adj[v]; }, [](int) { return true; });
  std::vector<int> comp_size(ncomp, 0);
  for (int q = 0; q < n; ++q) ++comp_size[comp[q]];
  std::vector<char> transient(n, 0);
  for (int q = 0; q < n; ++q) {
    transient[q] = comp_size[comp[q]] == 1 && std::find(adj[q].begin(), adj[q].end(), q) == adj[q].end();
  }
  std::map<std::vector<int>, int> rep;
  for (int q = 0; q < n; ++q) {
    auto [it, fresh] = rep.emplace(adj[q], q);
    if (!fresh && transient[it->second] && !transient[q]) it->second = q;
  }
  std::vector<int> target(n);
  bool changed = false;
  for (int q = 0; q < n; ++q) {
    int r = rep.at(adj[q]);
    target[q] = transient[q] ? r : q;
    changed |= target[q] != q;
  }
  if (!changed) return false;
  std::vector<std::vector<char>> fin(raw.pairs.size(), std::vector<char>(n, 0));
  std::vector<std::vector<char>> inf = fin;
  for (std::size_t k = 0; k < raw.pairs.size(); ++k) {
    for (int q : raw.pairs[k].fin) fin[k][q] = 1;
    for (int q : raw.pairs[k].inf) inf[k][q] = 1;
  }
  // The initial state keeps id 0: it takes over its representative's role.
  const int r0 = target[0];
  if (r0 != 0) {
    for (std::size_t k = 0; k < raw.pairs.size(); ++k) {
      fin[k][0] = fin[k][r0];
      inf[k][0] = inf[k][r0];
    }
    for (int q = 0; q < n; ++q) {
      if (target[q] == r0) target[q] = 0;
    }
  }
  for (auto& t : raw.table) t = target[t];
  for (std::size_t k = 0; k < raw.pairs.size(); ++k) {
    raw.pairs[k].fin.clear();
    raw.pairs[k].inf.clear();
    for (int q = 0; q < n; ++q) {
      if (target[q] != q) continue;
      if (fin[k][q]) raw.pairs[k].fin.push_back(q);
      if (inf[k][q]) raw.pairs[k].inf.push_back(q);
    }
  }
  return true;
}

}  // namespace

DraPtr compile(const Formula& f, const Alphabet& alphabet, const CompileOptions& options) {
  std::vector<int> reads;
  for (const auto& name : propositions(f)) {
    int idx = alphabet.index_of(name);
    if (idx < 0) throw std::invalid_argument("proposition '" + name + "' is not in the alphabet");
    reads.push_back(idx);
  }
  std::sort(reads.begin(), reads.end());
  std::map<std::string, int> bits;
  for (std::size_t j = 0; j < reads.size(); ++j) bits[alphabet.name(reads[j])] = static_cast<int>(j);

  NnfStore store;
  int root = to_nnf(f, false, store, bits);
  Tableau tab(store, options.state_budget);
  tab.build(root);
  Nba nba = reduce(degeneralize(store, tab, reads.size(), options.state_budget));
  RawDra raw = finalize(quotient(finalize(quotient(determinize(nba, options.state_budget)))));
  while (merge_transient(raw)) raw = finalize(quotient(finalize(raw)));
  return std::make_shared<const Dra>(alphabet, std::move(reads), raw.num_states,
                                     std::move(raw.table), std::move(raw.pairs));
}

bool accepts_lasso(const Dra& dra, const LassoWord& word) {
  if (word.loop.empty()) throw std::invalid_argument("lasso loop must be nonempty");
  DraState q = dra.initial();
  for (Valuation v : word.prefix) q = dra.step(q, v);
  // Iterate whole loops until the state at the loop start repeats.
  std::map<DraState, std::size_t> seen;
  std::vector<std::vector<DraState>> visits;
  while (!seen.count(q)) {
    seen.emplace(q, visits.size());
    std::vector<DraState> states;
    for (Valuation v : word.loop) {
      states.push_back(q);
      q = dra.step(q, v);
    }
    visits.push_back(std::move(states));
  }
  std::vector<char> periodic(dra.num_states(), 0);
  for (std::size_t i = seen.at(q); i < visits.size(); ++i) {
    for (DraState s : visits[i]) periodic[s] = 1;
  }
  for (std::size_t p = 0; p < dra.pairs().size(); ++p) {
    bool fin_hit = false, inf_hit = false;
    for (int s = 0; s < dra.num_states(); ++s) {
      if (!periodic[s]) continue;
      fin_hit = fin_hit || dra.in_fin(p, s);
      inf_hit = inf_hit || dra.in_inf(p, s);
    }
    if (!fin_hit && inf_hit) return true;
  }
  return false;
}

std::string to_dot(const Dra& dra) {
  auto set_text = [](const std::vector<DraState>& states) {
    std::string s = "{";
    for (std::size_t i = 0; i < states.size(); ++i) s += (i ? "," : "") + std::to_string(states[i]);
    return s + "}";
  };
  auto letter_text = [&](std::size_t letter) {
    std::string s = "{";
    bool first = true;
    for (std::size_t j = 0; j < dra.reads().size(); ++j) {
      if (letter & (std::size_t{1} << j)) {
        s += (first ? "" : ",") + dra.alphabet().name(dra.reads()[j]);
        first = false;
      }
    }
    return s + "}";
  };
  std::ostringstream out;
  out << "// states: " << dra.num_states() << "\n";
  out << "// acceptance pairs: " << dra.pairs().size() << "\n";
  for (std::size_t p = 0; p < dra.pairs().size(); ++p) {
    out << "// pair " << p << ": Fin=" << set_text(dra.pairs()[p].fin)
        << " Inf=" << set_text(dra.pairs()[p].inf) << "\n";
  }
  out << "digraph dra {\n  rankdir=LR;\n  init [shape=point];\n  init -> 0;\n";
  for (int q = 0; q < dra.num_states(); ++q) out << "  " << q << " [label=\"" << q << "\"];\n";
  for (int q = 0; q < dra.num_states(); ++q) {
    std::map<DraState, std::vector<std::size_t>> by_target;
    for (std::size_t a = 0; a < dra.num_letters(); ++a) by_target[dra.step_letter(q, a)].push_back(a);
    for (const auto& [target, letters] : by_target) {
      out << "  " << q << " -> " << target << " [label=\"";
      for (std::size_t i = 0; i < letters.size(); ++i) out << (i ? " " : "") << letter_text(letters[i]);
      out << "\"];\n";
    }
  }
  out << "}\n";
  return out.str();
}

DraPtr DraCache::get(const Formula& f, const Alphabet& alphabet) {
  std::string key;
  for (const auto& n : alphabet.names()) key += n + ",";
  key += "|" + render(f);
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
  }
  DraPtr dra = compile(f, alphabet, options_);
  std::lock_guard lock(mutex_);
  return entries_.emplace(key, std::move(dra)).first->second;
}

std::size_t DraCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace ltlinfer
