#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ltlinfer/domains.hpp"
#include "ltlinfer/search.hpp"

namespace py = pybind11;
using namespace ltlinfer;

namespace {

std::shared_ptr<const Mdp> share(const Mdp& m) { return std::make_shared<const Mdp>(m); }

std::vector<Trajectory> demos_from_json(const Mdp& m, const std::string& text) { return trajectories_from_json(m, text); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "LTL specification inference from demonstrations";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<StateBudgetExceeded>(m, "StateBudgetExceeded", PyExc_RuntimeError);
  py::register_exception<NonConvergence>(m, "NonConvergence", PyExc_RuntimeError);

  py::class_<Formula>(m, "Formula")
      .def("__str__", [](const Formula& f) { return render(f); })
      .def("__repr__", [](const Formula& f) { return "Formula('" + render(f) + "')"; })
      .def("__eq__", [](const Formula& a, const Formula& b) { return a == b; })
      .def("__hash__", [](const Formula& f) { return py::hash(py::str(render(f))); })
      .def_property_readonly("complexity", [](const Formula& f) { return complexity(f); })
      .def_property_readonly("depth", &Formula::depth);

  m.def("parse", py::overload_cast<const std::string&>(&parse), py::arg("text"));
  m.def("render", &render);
  m.def("complexity", &complexity);
  m.def(
      "eval_lasso",
      [](const Formula& f, std::vector<std::vector<std::string>> prefix, std::vector<std::vector<std::string>> loop,
         std::vector<std::string> alphabet) {
        Alphabet ab(std::move(alphabet));
        LassoWord w;
        for (const auto& s : prefix) w.prefix.push_back(valuation_of(ab, s));
        for (const auto& s : loop) w.loop.push_back(valuation_of(ab, s));
        return eval_lasso(f, w, ab);
      },
      py::arg("formula"), py::arg("prefix"), py::arg("loop"), py::arg("alphabet"));

  py::class_<Dra, std::shared_ptr<Dra>>(m, "Dra")
      .def_property_readonly("num_states", &Dra::num_states)
      .def_property_readonly("num_pairs", [](const Dra& d) { return d.pairs().size(); })
      .def("to_dot", [](const Dra& d) { return to_dot(d); });
  m.def(
      "compile",
      [](const Formula& f, std::vector<std::string> alphabet, std::size_t budget) {
        return std::const_pointer_cast<Dra>(compile(f, Alphabet(std::move(alphabet)), {budget}));
      },
      py::arg("formula"), py::arg("alphabet"), py::arg("state_budget") = 10000);

  py::class_<Mdp, std::shared_ptr<Mdp>>(m, "Mdp")
      .def_property_readonly("num_states", &Mdp::num_states)
      .def_property_readonly("num_actions", &Mdp::num_actions)
      .def_property_readonly("propositions", [](const Mdp& x) { return x.propositions().names(); })
      .def("state_name", &Mdp::state_name)
      .def("action_name", &Mdp::action_name)
      .def("to_json", [](const Mdp& x) { return mdp_to_json(x); })
      .def_static("from_json", [](const std::string& text) { return std::make_shared<Mdp>(mdp_from_json(text)); });
  m.def("slimchance", [](double eps) { return std::make_shared<Mdp>(slimchance(eps)); }, py::arg("epsilon") = 0.01);
  m.def(
      "cleaningworld",
      [](int dirt, int battery, int capacity) {
        return std::make_shared<Mdp>(cleaningworld({dirt, battery, capacity}));
      },
      py::arg("dirt") = 5, py::arg("battery") = 3, py::arg("capacity") = 3);

  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly("states", &Trajectory::states)
      .def_property_readonly("actions", [](const Trajectory& t) {
        std::vector<int> out;
        for (const auto& s : t.steps) out.push_back(s.action);
        return out;
      });
  m.def("trajectories_to_json", [](const Mdp& x, const std::vector<Trajectory>& d) { return trajectories_to_json(x, d); });
  m.def("trajectories_from_json", &demos_from_json);
  m.def(
      "generate_demos",
      [](const Mdp& x, const Formula& spec, double gamma, std::size_t count, std::size_t horizon, std::uint64_t seed) {
        return generate_demos(share(x), spec, gamma, count, horizon, seed);
      },
      py::arg("mdp"), py::arg("spec"), py::arg("gamma") = 0.99, py::arg("count") = 3, py::arg("horizon") = 10,
      py::arg("seed") = 1);

  m.def(
      "evaluate",
      [](const Formula& f, const Mdp& x, const std::vector<Trajectory>& demos, const std::string& kind, double gamma) {
        DraCache cache;
        return evaluate_objective(f, share(x), demos, objective_kind_from_string(kind), gamma, cache);
      },
      py::arg("formula"), py::arg("mdp"), py::arg("demos"), py::arg("objective") = "action", py::arg("gamma") = 0.99);

  m.def(
      "infer",
      [](const Mdp& x, const std::vector<Trajectory>& demos, const std::string& kind, double gamma,
         std::size_t population, std::size_t generations, std::size_t runs, std::uint64_t seed, std::size_t threads) {
        SearchConfig cfg;
        cfg.objective = objective_kind_from_string(kind);
        cfg.gamma = gamma;
        cfg.population = population;
        cfg.generations = generations;
        cfg.runs = runs;
        cfg.seed = seed;
        cfg.threads = threads;
        cfg.validate();
        SearchReport report;
        {
          py::gil_scoped_release release;
          report = run_nsga2(cfg, share(x), demos);
        }
        py::list rows;
        for (const auto& r : report.rows) rows.append(py::make_tuple(r.formula, r.objective, r.complexity, r.runs));
        return rows;
      },
      py::arg("mdp"), py::arg("demos"), py::arg("objective") = "action", py::arg("gamma") = 0.99,
      py::arg("population") = 100, py::arg("generations") = 50, py::arg("runs") = 20, py::arg("seed") = 1,
      py::arg("threads") = 1);
}
