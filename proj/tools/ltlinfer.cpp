// ltlinfer command-line tool.
//
// Exit codes: 0 success, 1 usage, 2 input error, 3 runtime failure
// (non-convergence or state budget).

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ltlinfer/domains.hpp"
#include "ltlinfer/search.hpp"

using namespace ltlinfer;
using ordered_json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kRuntime = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    out += buf;
  }
  return out;
}

ordered_json file_entry(const std::string& path) {
  return {{"path", path}, {"sha256", sha256_hex(read_file(path))}};
}

void write_manifest(const std::string& path, const ordered_json& j) { write_file(path, j.dump(2) + "\n"); }

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct DomainOptions {
  std::string domain;
  std::string mdp_path;
  double epsilon = 0.01;
  CleaningWorldParams cw;

  void add(CLI::App* app) {
    app->add_option("--domain", domain, "slimchance or cleaningworld");
    app->add_option("--mdp", mdp_path, "MDP JSON file (instead of --domain)");
    app->add_option("--epsilon", epsilon, "SlimChance success probability");
    app->add_option("--dirt", cw.dirt, "CleaningWorld initial dirt");
    app->add_option("--battery", cw.battery, "CleaningWorld initial battery");
    app->add_option("--capacity", cw.capacity, "CleaningWorld battery capacity");
  }

  std::shared_ptr<const Mdp> build() const {
    if (domain.empty() == mdp_path.empty()) throw UsageError("give exactly one of --domain and --mdp");
    if (!mdp_path.empty()) return std::make_shared<const Mdp>(load_mdp(mdp_path));
    try {
      return std::make_shared<const Mdp>(make_domain(domain, epsilon, cw));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  ordered_json echo() const {
    if (!mdp_path.empty()) return file_entry(mdp_path);
    return {{"domain", domain},
            {"epsilon", epsilon},
            {"dirt", cw.dirt},
            {"battery", cw.battery},
            {"capacity", cw.capacity}};
  }
};

Formula parse_for(const std::string& text, const Mdp& m) { return parse(text, m.propositions()); }

int cmd_compile(const std::string& text, const std::string& alphabet_csv, const std::string& out_dot,
                std::size_t budget) {
  Formula f = parse(text);
  std::vector<std::string> names = split_commas(alphabet_csv);
  if (names.empty()) {
    for (const auto& p : propositions(f)) names.push_back(p);
  }
  Alphabet ab(names);
  DraPtr d = compile(parse(text, ab), ab, {budget});
  std::cout << "formula=" << render(f) << " states=" << d->num_states() << " pairs=" << d->pairs().size();
  if (d->pairs().empty()) std::cout << " language=empty";
  std::cout << "\n";
  if (!out_dot.empty()) write_file(out_dot, to_dot(*d));
  return kOk;
}

int cmd_export(const DomainOptions& dom, const std::string& out) {
  auto m = dom.build();
  std::string text = mdp_to_json(*m);
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  std::cerr << "states=" << m->num_states() << " actions=" << m->num_actions() << "\n";
  return kOk;
}

int cmd_demos(const DomainOptions& dom, const std::string& text, std::size_t count, std::size_t horizon, double gamma,
              std::uint64_t seed, const std::string& out) {
  if (count == 0) throw UsageError("--count must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("--gamma must lie in (0, 1)");
  auto m = dom.build();
  Formula spec = parse_for(text, *m);
  std::vector<Trajectory> demos = generate_demos(m, spec, gamma, count, horizon, seed);
  std::string json = trajectories_to_json(*m, demos);
  write_file(out, json);
  ordered_json manifest;
  manifest["command"] = "demos";
  manifest["model"] = dom.echo();
  manifest["formula"] = render(spec);
  manifest["gamma"] = gamma;
  manifest["count"] = count;
  manifest["horizon"] = horizon;
  manifest["seed"] = seed;
  manifest["outputs"] = {file_entry(out)};
  write_manifest(out + ".manifest.json", manifest);
  for (const auto& t : demos) {
    std::string line;
    for (const auto& st : t.steps) line += m->state_name(st.state) + ":" + m->action_name(st.action) + " ";
    std::cout << line << "-> " << m->state_name(t.final_state) << "\n";
  }
  return kOk;
}

int cmd_infer(const std::string& mdp_path, const std::string& demos_path, SearchConfig cfg, const std::string& out_csv) {
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  auto m = std::make_shared<const Mdp>(load_mdp(mdp_path));
  std::vector<Trajectory> demos = load_trajectories(*m, demos_path);
  SearchReport report = run_nsga2(cfg, m, demos);
  std::string csv = report_to_csv(report.rows);
  write_file(out_csv, csv);

  ordered_json manifest;
  manifest["command"] = "infer";
  manifest["config"] = {{"objective", to_string(cfg.objective)},
                        {"gamma", cfg.gamma},
                        {"population", cfg.population},
                        {"generations", cfg.generations},
                        {"runs", cfg.runs},
                        {"seed", cfg.seed},
                        {"max_depth", cfg.max_depth},
                        {"crossover_prob", cfg.crossover_prob},
                        {"mutation_prob", cfg.mutation_prob},
                        {"require_always_root", cfg.require_always_root},
                        {"threads", cfg.threads},
                        {"state_budget", cfg.state_budget}};
  manifest["inputs"] = {{"mdp", file_entry(mdp_path)}, {"demos", file_entry(demos_path)}};
  ordered_json seconds = ordered_json::array();
  for (const auto& run : report.runs) seconds.push_back(run.seconds);
  manifest["run_seconds"] = seconds;
  manifest["outputs"] = {file_entry(out_csv)};
  write_manifest(out_csv + ".manifest.json", manifest);

  std::size_t shown = 0;
  for (const auto& row : aggregate_front(report.rows)) {
    if (shown++ == 10) break;
    std::cout << row.runs << "  " << format_objective(row.objective) << "  " << row.complexity << "  " << row.formula
              << "\n";
  }
  return kOk;
}

int cmd_eval(const std::string& mdp_path, const std::string& demos_path, const std::string& text, ObjectiveKind kind,
             double gamma, std::size_t budget, bool dump) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("--gamma must lie in (0, 1)");
  auto m = std::make_shared<const Mdp>(load_mdp(mdp_path));
  std::vector<Trajectory> demos = load_trajectories(*m, demos_path);
  Formula f = parse_for(text, *m);
  DraCache cache({budget});
  FormulaAnalysis a = analyze_formula(f, m, gamma, cache);
  const double obj = kind == ObjectiveKind::State ? obj_state_based(*a.product, a.cls, a.viol_rand, demos)
                                                  : obj_action_based(*a.product, a.cls, a.viol_rand, demos);
  std::cout << "obj=" << format_objective(obj) << " fc=" << complexity(f) << "\n";
  if (dump) {
    const ProductMdp& p = *a.product;
    for (int x = 0; x < p.num_states(); ++x) {
      std::cout << x << " " << (x == ProductMdp::kPreInitial ? "pre" : m->state_name(p.mdp_state(x))) << " q"
                << p.dra_state(x) << (a.cls.good[x] ? " good" : "") << (a.cls.bad[x] ? " bad" : "")
                << " viol_rand=" << format_objective(a.viol_rand[x]) << "\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infer LTL specifications from demonstrations in labeled MDPs"};
  app.require_subcommand(1);

  std::size_t budget = 10000;
  app.add_option("--state-budget", budget, "Automaton state budget")->check(CLI::PositiveNumber);

  auto* compile_cmd = app.add_subcommand("compile", "Compile a formula to a Rabin automaton");
  std::string formula, alphabet, out_dot;
  compile_cmd->add_option("--formula", formula)->required();
  compile_cmd->add_option("--alphabet", alphabet, "Comma-separated propositions (default: those in the formula)");
  compile_cmd->add_option("--out-dot", out_dot);

  auto* export_cmd = app.add_subcommand("export-domain", "Write a domain as MDP JSON");
  DomainOptions export_dom;
  export_dom.add(export_cmd);
  std::string export_out;
  export_cmd->add_option("--out", export_out, "Output path (default stdout)");

  auto* demos_cmd = app.add_subcommand("demos", "Generate demonstrations from a cost-minimizing planner");
  DomainOptions demos_dom;
  demos_dom.add(demos_cmd);
  std::size_t count = 3, horizon = 10;
  double demos_gamma = 0.99;
  std::uint64_t demos_seed = 1;
  std::string demos_out;
  demos_cmd->add_option("--formula", formula, "Specification the demonstrator follows")->required();
  demos_cmd->add_option("--count", count);
  demos_cmd->add_option("--horizon", horizon);
  demos_cmd->add_option("--gamma", demos_gamma);
  demos_cmd->add_option("--seed", demos_seed);
  demos_cmd->add_option("--out", demos_out)->required();

  auto* infer_cmd = app.add_subcommand("infer", "Search for specifications explaining demonstrations");
  SearchConfig cfg;
  std::string mdp_path, demos_path, out_csv, objective = "action";
  bool no_root = false;
  infer_cmd->add_option("--mdp", mdp_path)->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--demos", demos_path)->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--objective", objective)->check(CLI::IsMember({"state", "action"}));
  infer_cmd->add_option("--gamma", cfg.gamma);
  infer_cmd->add_option("--pop", cfg.population);
  infer_cmd->add_option("--gens", cfg.generations);
  infer_cmd->add_option("--runs", cfg.runs);
  infer_cmd->add_option("--seed", cfg.seed);
  infer_cmd->add_option("--threads", cfg.threads)->check(CLI::PositiveNumber);
  infer_cmd->add_option("--max-depth", cfg.max_depth);
  infer_cmd->add_option("--crossover", cfg.crossover_prob);
  infer_cmd->add_option("--mutation", cfg.mutation_prob);
  infer_cmd->add_flag("--no-always-root", no_root, "Do not restrict candidates to G (...)");
  infer_cmd->add_option("--out-csv", out_csv)->required();

  auto* eval_cmd = app.add_subcommand("eval", "Score one formula");
  double eval_gamma = 0.99;
  bool dump = false;
  eval_cmd->add_option("--mdp", mdp_path)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--demos", demos_path)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--formula", formula)->required();
  eval_cmd->add_option("--objective", objective)->check(CLI::IsMember({"state", "action"}));
  eval_cmd->add_option("--gamma", eval_gamma);
  eval_cmd->add_flag("--dump-classification", dump, "Print every product state with its classification");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*compile_cmd) return cmd_compile(formula, alphabet, out_dot, budget);
    if (*export_cmd) return cmd_export(export_dom, export_out);
    if (*demos_cmd) return cmd_demos(demos_dom, formula, count, horizon, demos_gamma, demos_seed, demos_out);
    if (*infer_cmd) {
      cfg.objective = objective_kind_from_string(objective);
      cfg.require_always_root = !no_root;
      cfg.state_budget = budget;
      return cmd_infer(mdp_path, demos_path, cfg, out_csv);
    }
    if (*eval_cmd) {
      return cmd_eval(mdp_path, demos_path, formula, objective_kind_from_string(objective), eval_gamma, budget, dump);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const StateBudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
