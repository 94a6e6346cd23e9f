#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "ltlinfer/objective.hpp"

namespace ltlinfer {

struct SearchConfig {
  std::size_t population = 100;
  std::size_t generations = 50;
  std::size_t runs = 20;
  ObjectiveKind objective = ObjectiveKind::Action;
  double gamma = 0.99;
  std::uint64_t seed = 1;
  std::size_t max_depth = 6;
  double crossover_prob = 0.9;
  double mutation_prob = 0.1;
  bool require_always_root = true;
  std::size_t threads = 1;
  std::size_t state_budget = 10000;

  /// Throws std::invalid_argument unless population is even and >= 4, the
  /// probabilities lie in [0, 1], gamma in (0, 1) and max_depth >= 2.
  void validate() const;
};

using Rng = std::mt19937_64;

// Variation operators ------------------------------------------------------

/// Primitive set: alphabet propositions plus true/false as terminals and
/// ! & | -> X G F U as operators.
class GpOperators {
public:
  GpOperators(std::vector<std::string> propositions, const SearchConfig& cfg);

  Formula random_terminal(Rng& rng) const;
  /// "full" grows every branch to exactly `depth`; "grow" stops early at random.
  Formula full(std::size_t depth, Rng& rng) const;
  Formula grow(std::size_t depth, Rng& rng) const;

  /// Ramped half-and-half over whole-tree depths 2..max_depth, each wrapped
  /// in G when the root restriction is on.
  std::vector<Formula> init_population(std::size_t count, Rng& rng) const;

  /// Swaps uniformly chosen subtrees. The G root is never selected when the
  /// restriction is on, and an offspring deeper than the bound is replaced by
  /// its parent.
  std::pair<Formula, Formula> crossover(const Formula& a, const Formula& b, Rng& rng) const;

  /// With probability mutation_prob, replaces a uniformly chosen subtree
  /// (never the protected root) by a fresh grown tree within the bound.
  Formula mutate(const Formula& f, Rng& rng) const;

  const SearchConfig& config() const { return cfg_; }

private:
  std::vector<std::string> props_;
  SearchConfig cfg_;
};

/// Preorder paths to every node; a path lists child indices from the root.
std::vector<std::vector<int>> node_paths(const Formula& f);
const Formula& subtree_at(const Formula& f, const std::vector<int>& path);
Formula replace_at(const Formula& f, const std::vector<int>& path, const Formula& replacement);

// NSGA-II pieces -----------------------------------------------------------

struct ObjectivePoint {
  double obj;
  double fc;
};

bool dominates(const ObjectivePoint& a, const ObjectivePoint& b);

/// Fronts of indices in rank order (front 0 is nondominated).
std::vector<std::vector<std::size_t>> nondominated_sort(const std::vector<ObjectivePoint>& points);

/// Crowding distance of each member of `front`, aligned with it. Boundary
/// points get +inf.
std::vector<double> crowding_distance(const std::vector<ObjectivePoint>& points,
                                      const std::vector<std::size_t>& front);

// Evaluation ---------------------------------------------------------------

struct ScoredFormula {
  Formula formula = Formula::truth();
  std::string key;  // canonical rendering
  double objective = 0.0;
  std::size_t complexity = 0;
  std::size_t rank = 0;
  double crowding = 0.0;
  bool failed = false;  // scored worst-case
};

struct Score {
  double objective;
  bool failed;
};

/// Scores formulas against fixed demonstrations. Results are cached by
/// canonical rendering and the cache is safe for concurrent use.
class Evaluator {
public:
  Evaluator(std::shared_ptr<const Mdp> mdp, std::vector<Trajectory> demos, ObjectiveKind kind, double gamma,
            std::size_t state_budget = 10000);

  Score score(const Formula& f);
  /// Scores every formula, spreading uncached work over `threads` workers.
  std::vector<Score> score_all(const std::vector<Formula>& formulas, std::size_t threads);

  double worst_objective() const;
  std::size_t cache_size() const;
  std::size_t demo_count() const { return demos_.size(); }

private:
  Score compute(const Formula& f);

  std::shared_ptr<const Mdp> mdp_;
  std::vector<Trajectory> demos_;
  ObjectiveKind kind_;
  double gamma_;
  DraCache dra_cache_;
  mutable std::mutex mutex_;
  std::map<std::string, Score> scores_;
};

struct RunResult {
  std::vector<ScoredFormula> front;  // unique by key, sorted by (complexity, objective, key)
  double seconds = 0.0;
};

struct ReportRow {
  std::string formula;
  double objective;
  std::size_t complexity;
  std::size_t runs;
};

struct SearchReport {
  std::vector<RunResult> runs;
  std::vector<ReportRow> rows;  // sorted by runs desc, objective asc, formula asc
};

/// One NSGA-II run: binary tournament on (rank, crowding), subtree crossover
/// and mutation, elitist (mu + lambda) survival. Returns the first front of
/// the final population.
RunResult run_nsga2_once(const SearchConfig& cfg, const GpOperators& ops, Evaluator& eval, std::uint64_t seed);

/// cfg.runs independent runs sharing one evaluation cache; run r is seeded
/// with a value derived from (cfg.seed, r).
SearchReport run_nsga2(const SearchConfig& cfg, std::shared_ptr<const Mdp> mdp, const std::vector<Trajectory>& demos);

/// Nondominated subset of the report rows.
std::vector<ReportRow> aggregate_front(const std::vector<ReportRow>& rows);

std::string report_to_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> report_from_csv(const std::string& text);

std::string format_objective(double v);

}  // namespace ltlinfer
