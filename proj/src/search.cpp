#include "ltlinfer/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ltlinfer {

void SearchConfig::validate() const {
  if (population < 4 || population % 2 != 0) throw std::invalid_argument("population must be even and at least 4");
  if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0)) throw std::invalid_argument("crossover probability outside [0, 1]");
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) throw std::invalid_argument("mutation probability outside [0, 1]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (max_depth < 2) throw std::invalid_argument("max depth must be at least 2");
  if (runs < 1) throw std::invalid_argument("runs must be at least 1");
}

// ---------------------------------------------------------------------------
// Tree surgery

std::vector<std::vector<int>> node_paths(const Formula& f) {
  std::vector<std::vector<int>> out;
  std::vector<int> path;
  auto walk = [&](auto&& self, const Formula& g) -> void {
    out.push_back(path);
    for (std::size_t i = 0; i < g.arity(); ++i) {
      path.push_back(static_cast<int>(i));
      self(self, g.child(i));
      path.pop_back();
    }
  };
  walk(walk, f);
  return out;
}

const Formula& subtree_at(const Formula& f, const std::vector<int>& path) {
  const Formula* cur = &f;
  for (int i : path) cur = &cur->child(i);
  return *cur;
}

namespace {

Formula rebuild(const Formula& f, const std::vector<int>& path, std::size_t at, const Formula& replacement) {
  if (at == path.size()) return replacement;
  const int i = path[at];
  Formula changed = rebuild(f.child(i), path, at + 1, replacement);
  if (f.arity() == 1) return Formula::unary(f.op(), changed);
  return i == 0 ? Formula::binary(f.op(), changed, f.rhs()) : Formula::binary(f.op(), f.lhs(), changed);
}

constexpr Op kOperators[] = {Op::Not, Op::And, Op::Or, Op::Implies, Op::Next, Op::Always, Op::Eventually, Op::Until};
constexpr std::size_t kNumOperators = std::size(kOperators);

template <typename T>
T pick(Rng& rng, T lo, T hi) {
  return std::uniform_int_distribution<T>(lo, hi)(rng);
}

bool coin(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

}  // namespace

Formula replace_at(const Formula& f, const std::vector<int>& path, const Formula& replacement) {
  return rebuild(f, path, 0, replacement);
}

// ---------------------------------------------------------------------------

GpOperators::GpOperators(std::vector<std::string> propositions, const SearchConfig& cfg)
    : props_(std::move(propositions)), cfg_(cfg) {
  if (props_.empty()) throw std::invalid_argument("alphabet must be nonempty");
}

Formula GpOperators::random_terminal(Rng& rng) const {
  std::size_t i = pick<std::size_t>(rng, 0, props_.size() + 1);
  if (i == props_.size()) return Formula::truth();
  if (i == props_.size() + 1) return Formula::falsity();
  return Formula::prop(props_[i]);
}

Formula GpOperators::full(std::size_t depth, Rng& rng) const {
  if (depth <= 1) return random_terminal(rng);
  Op op = kOperators[pick<std::size_t>(rng, 0, kNumOperators - 1)];
  if (arity(op) == 1) return Formula::unary(op, full(depth - 1, rng));
  Formula lhs = full(depth - 1, rng);
  return Formula::binary(op, lhs, full(depth - 1, rng));
}

Formula GpOperators::grow(std::size_t depth, Rng& rng) const {
  if (depth <= 1) return random_terminal(rng);
  const std::size_t terminals = props_.size() + 2;
  std::size_t i = pick<std::size_t>(rng, 0, terminals + kNumOperators - 1);
  if (i < terminals) {
    if (i == props_.size()) return Formula::truth();
    if (i == props_.size() + 1) return Formula::falsity();
    return Formula::prop(props_[i]);
  }
  Op op = kOperators[i - terminals];
  if (arity(op) == 1) return Formula::unary(op, grow(depth - 1, rng));
  Formula lhs = grow(depth - 1, rng);
  return Formula::binary(op, lhs, grow(depth - 1, rng));
}

std::vector<Formula> GpOperators::init_population(std::size_t count, Rng& rng) const {
  std::vector<Formula> out;
  const std::size_t ramps = cfg_.max_depth - 1;  // depths 2..max_depth
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t depth = 2 + i % ramps;
    const bool use_full = (i / ramps) % 2 == 0;
    if (cfg_.require_always_root) {
      Formula body = use_full ? full(depth - 1, rng) : grow(depth - 1, rng);
      out.push_back(Formula::always(body));
    } else {
      out.push_back(use_full ? full(depth, rng) : grow(depth, rng));
    }
  }
  return out;
}

namespace {

std::vector<std::vector<int>> eligible_paths(const Formula& f, bool protect_root) {
  auto paths = node_paths(f);
  if (protect_root && f.op() == Op::Always) paths.erase(paths.begin());
  return paths;
}

}  // namespace

std::pair<Formula, Formula> GpOperators::crossover(const Formula& a, const Formula& b, Rng& rng) const {
  auto pa = eligible_paths(a, cfg_.require_always_root);
  auto pb = eligible_paths(b, cfg_.require_always_root);
  if (pa.empty() || pb.empty()) return {a, b};
  const auto& xa = pa[pick<std::size_t>(rng, 0, pa.size() - 1)];
  const auto& xb = pb[pick<std::size_t>(rng, 0, pb.size() - 1)];
  Formula c1 = replace_at(a, xa, subtree_at(b, xb));
  Formula c2 = replace_at(b, xb, subtree_at(a, xa));
  if (c1.depth() > cfg_.max_depth) c1 = a;
  if (c2.depth() > cfg_.max_depth) c2 = b;
  return {c1, c2};
}

Formula GpOperators::mutate(const Formula& f, Rng& rng) const {
  if (!coin(rng, cfg_.mutation_prob)) return f;
  auto paths = eligible_paths(f, cfg_.require_always_root);
  if (paths.empty()) return f;
  const auto& at = paths[pick<std::size_t>(rng, 0, paths.size() - 1)];
  if (at.size() >= cfg_.max_depth) return f;
  const std::size_t room = cfg_.max_depth - at.size();
  return replace_at(f, at, grow(pick<std::size_t>(rng, 1, room), rng));
}

// ---------------------------------------------------------------------------

bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) {
  return a.obj <= b.obj && a.fc <= b.fc && (a.obj < b.obj || a.fc < b.fc);
}

std::vector<std::vector<std::size_t>> nondominated_sort(const std::vector<ObjectivePoint>& points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts(1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (dominates(points[i], points[j])) {
        dominated[i].push_back(j);
      } else if (dominates(points[j], points[i])) {
        ++count[i];
      }
    }
    if (count[i] == 0) fronts[0].push_back(i);
  }
  while (!fronts.back().empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : fronts.back()) {
      for (std::size_t j : dominated[i]) {
        if (--count[j] == 0) next.push_back(j);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<ObjectivePoint>& points,
                                      const std::vector<std::size_t>& front) {
  const std::size_t m = front.size();
  std::vector<double> dist(m, 0.0);
  if (m == 0) return dist;
  const double inf = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2; ++k) {
    auto value = [&](std::size_t i) { return k == 0 ? points[front[i]].obj : points[front[i]].fc; };
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    dist[order.front()] = inf;
    dist[order.back()] = inf;
    const double span = value(order.back()) - value(order.front());
    if (span <= 0.0) continue;
    for (std::size_t r = 1; r + 1 < m; ++r) {
      dist[order[r]] += (value(order[r + 1]) - value(order[r - 1])) / span;
    }
  }
  return dist;
}

// ---------------------------------------------------------------------------

Evaluator::Evaluator(std::shared_ptr<const Mdp> mdp, std::vector<Trajectory> demos, ObjectiveKind kind,
                     double gamma, std::size_t state_budget)
    : mdp_(std::move(mdp)),
      demos_(std::move(demos)),
      kind_(kind),
      gamma_(gamma),
      dra_cache_(CompileOptions{state_budget}) {
  if (demos_.empty()) throw std::invalid_argument("no demonstrations");
  for (std::size_t i = 0; i < demos_.size(); ++i) {
    if (auto bad = validate_trajectory(*mdp_, demos_[i])) {
      throw std::invalid_argument("demonstration " + std::to_string(i) + " invalid: " + bad->reason);
    }
  }
}

double Evaluator::worst_objective() const {
  return static_cast<double>(demos_.size() + 1) / (1.0 - gamma_);
}

Score Evaluator::compute(const Formula& f) {
  try {
    return {evaluate_objective(f, mdp_, demos_, kind_, gamma_, dra_cache_), false};
  } catch (const StateBudgetExceeded&) {
    return {worst_objective(), true};
  } catch (const NonConvergence&) {
    return {worst_objective(), true};
  }
}

Score Evaluator::score(const Formula& f) {
  const std::string key = render(f);
  {
    std::lock_guard lock(mutex_);
    auto it = scores_.find(key);
    if (it != scores_.end()) return it->second;
  }
  Score s = compute(f);
  std::lock_guard lock(mutex_);
  return scores_.emplace(key, s).first->second;
}

std::vector<Score> Evaluator::score_all(const std::vector<Formula>& formulas, std::size_t threads) {
  if (threads > 1) {
    std::vector<const Formula*> todo;
    std::set<std::string> queued;
    {
      std::lock_guard lock(mutex_);
      for (const auto& f : formulas) {
        std::string key = render(f);
        if (!scores_.count(key) && queued.insert(key).second) todo.push_back(&f);
      }
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < todo.size();) score(*todo[i]);
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, todo.size()); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::vector<Score> out;
  out.reserve(formulas.size());
  for (const auto& f : formulas) out.push_back(score(f));
  return out;
}

std::size_t Evaluator::cache_size() const {
  std::lock_guard lock(mutex_);
  return scores_.size();
}

// ---------------------------------------------------------------------------

namespace {

std::vector<ObjectivePoint> points_of(const std::vector<ScoredFormula>& pop) {
  std::vector<ObjectivePoint> pts;
  pts.reserve(pop.size());
  for (const auto& s : pop) pts.push_back({s.objective, static_cast<double>(s.complexity)});
  return pts;
}

void assign_rank_and_crowding(std::vector<ScoredFormula>& pop) {
  auto pts = points_of(pop);
  auto fronts = nondominated_sort(pts);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    auto d = crowding_distance(pts, fronts[r]);
    for (std::size_t i = 0; i < fronts[r].size(); ++i) {
      pop[fronts[r][i]].rank = r;
      pop[fronts[r][i]].crowding = d[i];
    }
  }
}

std::vector<ScoredFormula> score_batch(const std::vector<Formula>& formulas, Evaluator& eval, std::size_t threads) {
  auto scores = eval.score_all(formulas, threads);
  std::vector<ScoredFormula> out;
  out.reserve(formulas.size());
  for (std::size_t i = 0; i < formulas.size(); ++i) {
    ScoredFormula s;
    s.formula = formulas[i];
    s.key = render(formulas[i]);
    s.objective = scores[i].objective;
    s.complexity = complexity(formulas[i]);
    s.failed = scores[i].failed;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ScoredFormula> environmental_selection(std::vector<ScoredFormula> pool, std::size_t size) {
  auto pts = points_of(pool);
  auto fronts = nondominated_sort(pts);
  std::vector<ScoredFormula> out;
  out.reserve(size);
  for (const auto& front : fronts) {
    if (out.size() + front.size() <= size) {
      for (std::size_t i : front) out.push_back(pool[i]);
      continue;
    }
    auto d = crowding_distance(pts, front);
    std::vector<std::size_t> order(front.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
    for (std::size_t k = 0; out.size() < size; ++k) out.push_back(pool[front[order[k]]]);
    break;
  }
  return out;
}

std::uint64_t run_seed(std::uint64_t base, std::size_t run) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(run)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

RunResult run_nsga2_once(const SearchConfig& cfg, const GpOperators& ops, Evaluator& eval, std::uint64_t seed) {
  cfg.validate();
  auto t0 = std::chrono::steady_clock::now();
  Rng rng(seed);
  const std::size_t n = cfg.population;
  std::vector<ScoredFormula> pop = score_batch(ops.init_population(n, rng), eval, cfg.threads);
  assign_rank_and_crowding(pop);

  auto tournament = [&]() -> const ScoredFormula& {
    const ScoredFormula& a = pop[pick<std::size_t>(rng, 0, n - 1)];
    const ScoredFormula& b = pop[pick<std::size_t>(rng, 0, n - 1)];
    if (b.rank < a.rank || (b.rank == a.rank && b.crowding > a.crowding)) return b;
    return a;
  };

  for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
    std::vector<Formula> children;
    children.reserve(n);
    while (children.size() < n) {
      const Formula p1 = tournament().formula;
      const Formula p2 = tournament().formula;
      auto [c1, c2] = coin(rng, cfg.crossover_prob) ? ops.crossover(p1, p2, rng) : std::make_pair(p1, p2);
      children.push_back(ops.mutate(c1, rng));
      children.push_back(ops.mutate(c2, rng));
    }
    auto offspring = score_batch(children, eval, cfg.threads);
    pop.insert(pop.end(), offspring.begin(), offspring.end());
    pop = environmental_selection(std::move(pop), n);
    assign_rank_and_crowding(pop);
  }

  RunResult result;
  std::set<std::string> seen;
  for (const auto& s : pop) {
    if (s.rank == 0 && seen.insert(s.key).second) result.front.push_back(s);
  }
  std::sort(result.front.begin(), result.front.end(), [](const ScoredFormula& a, const ScoredFormula& b) {
    return std::tie(a.complexity, a.objective, a.key) < std::tie(b.complexity, b.objective, b.key);
  });
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

SearchReport run_nsga2(const SearchConfig& cfg, std::shared_ptr<const Mdp> mdp, const std::vector<Trajectory>& demos) {
  cfg.validate();
  Evaluator eval(mdp, demos, cfg.objective, cfg.gamma, cfg.state_budget);
  GpOperators ops(mdp->propositions().names(), cfg);
  SearchReport report;
  std::map<std::string, ReportRow> rows;
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    RunResult run = run_nsga2_once(cfg, ops, eval, run_seed(cfg.seed, r));
    for (const auto& s : run.front) {
      auto [it, fresh] = rows.emplace(s.key, ReportRow{s.key, s.objective, s.complexity, 0});
      ++it->second.runs;
    }
    report.runs.push_back(std::move(run));
  }
  for (auto& [key, row] : rows) report.rows.push_back(row);
  std::sort(report.rows.begin(), report.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.runs != b.runs) return a.runs > b.runs;
    if (a.objective != b.objective) return a.objective < b.objective;
    return a.formula < b.formula;
  });
  return report;
}

std::vector<ReportRow> aggregate_front(const std::vector<ReportRow>& rows) {
  std::vector<ReportRow> out;
  for (const auto& r : rows) {
    ObjectivePoint p{r.objective, static_cast<double>(r.complexity)};
    bool dominated = std::any_of(rows.begin(), rows.end(), [&](const ReportRow& o) {
      return dominates({o.objective, static_cast<double>(o.complexity)}, p);
    });
    if (!dominated) out.push_back(r);
  }
  return out;
}

std::string format_objective(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string report_to_csv(const std::vector<ReportRow>& rows) {
  std::string out = "formula,objective,complexity,runs_pareto_efficient\n";
  for (const auto& r : rows) {
    out += r.formula + "," + format_objective(r.objective) + "," + std::to_string(r.complexity) + "," +
           std::to_string(r.runs) + "\n";
  }
  return out;
}

std::vector<ReportRow> report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "formula,objective,complexity,runs_pareto_efficient") {
    throw std::invalid_argument("unexpected CSV header");
  }
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (cells.size() != 4) throw std::invalid_argument("malformed CSV row: " + line);
    rows.push_back({cells[0], std::stod(cells[1]), static_cast<std::size_t>(std::stoul(cells[2])),
                    static_cast<std::size_t>(std::stoul(cells[3]))});
  }
  return rows;
}

}  // namespace ltlinfer
