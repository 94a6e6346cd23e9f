#include <doctest.h>

#include "support.hpp"

using namespace ltlinfer;

namespace {


FormulaAnalysis analyze(const std::string& text, std::shared_ptr<const Mdp> m, double gamma) {
  static DraCache cache;
  return analyze_formula(parse(text), std::move(m), gamma, cache);
}

}  // namespace

TEST_CASE("false pins every state at the maximum") {
  auto m = std::make_shared<const Mdp>(slimchance());
  const double g = 0.99;
  FormulaAnalysis a = analyze("false", m, g);
  for (double v : a.viol_rand) CHECK(v == doctest::Approx(1.0 / (1.0 - g)).epsilon(1e-12));
  auto demos = testing::slimchance_reference_demos(*m);
  CHECK(obj_state_based(*a.product, a.cls, a.viol_rand, demos) == doctest::Approx(0.0));
  CHECK(obj_action_based(*a.product, a.cls, a.viol_rand, demos) == doctest::Approx(0.0));
  Interpretation in = rabin_state_sequence(a.viol_rand, *a.product, a.cls, demos[0].states());
  CHECK(in.cost == doctest::Approx(1.0 / (1.0 - g)));
  CHECK(in.terminal == -1);
  REQUIRE(in.dra_states.size() == demos[0].states().size() + 1);
  for (DraState q : in.dra_states) CHECK(q == a.dra->initial());
}

TEST_CASE("a satisfied G p costs nothing") {
  auto m = std::make_shared<const Mdp>(Mdp::build(Alphabet({"p"}), {{"s", {"p"}, {{"a", {{"s", 1.0}}}}}}, "s"));
  FormulaAnalysis a = analyze("G p", m, 0.9);
  int live = a.product->find(0, a.dra->initial());
  CHECK(a.viol_rand[live] == 0.0);
  Interpretation in = rabin_state_sequence(a.viol_rand, *a.product, a.cls, {0, 0, 0});
  CHECK(in.cost == 0.0);
  for (DraState q : in.dra_states) CHECK(q == a.dra->initial());
}

TEST_CASE("SlimChance random-policy values match the closed form") {
  auto m = std::make_shared<const Mdp>(slimchance());
  for (double g : {0.9, 0.99, 0.995}) {
    FormulaAnalysis a = analyze("G good", m, g);
    auto cf = testing::slimchance_closed_form(0.5, 0.01, g);
    const DraState live = a.dra->initial();
    CHECK(a.viol_rand[ProductMdp::kPreInitial] == doctest::Approx(cf.pre_initial).epsilon(1e-8));
    CHECK(a.viol_rand[a.product->find(m->state_id("s_BAD"), live)] == doctest::Approx(cf.live).epsilon(1e-8));
    CHECK(a.viol_rand[a.product->find(m->state_id("s_GOOD"), live)] == doctest::Approx(cf.live).epsilon(1e-8));
  }
}

TEST_CASE("SlimChance second demonstration keeps only at the good step") {
  auto m = std::make_shared<const Mdp>(slimchance());
  const double g = 0.99;
  FormulaAnalysis a = analyze("G good", m, g);
  std::vector<int> states = testing::slimchance_reference_demos(*m)[1].states();
  Interpretation in = rabin_state_sequence(a.viol_rand, *a.product, a.cls, states);
  double skipped = 0.0;
  for (std::size_t t = 0; t < states.size(); ++t) skipped += t == 1 ? 0.0 : std::pow(g, static_cast<double>(t));
  const int terminal = a.product->find(m->state_id("s_BAD"), a.dra->initial());
  CHECK(in.terminal == terminal);
  CHECK(in.cost == doctest::Approx(skipped + std::pow(g, 11.0) * a.viol_rand[terminal]).epsilon(1e-12));
  CHECK(in.cost == doctest::Approx(testing::brute_force_viol_s(*a.product, a.cls, a.viol_rand, states)).epsilon(1e-12));
  for (DraState q : in.dra_states) CHECK(q == a.dra->initial());
}

TEST_CASE("Algorithm matches brute force on random instances") {
  testing::Rng rng(41);
  for (int i = 0; i < 60; ++i) {
    auto m = std::make_shared<const Mdp>(testing::random_mdp(rng, 4));
    Formula f = testing::random_small_formula(rng, 5, {"p", "q"});
    DraCache cache;
    FormulaAnalysis a = analyze_formula(f, m, 0.9, cache);
    std::vector<int> states = testing::random_walk(rng, *m, testing::uniform(rng, 0, 8));
    CAPTURE(render(f));
    Interpretation in = rabin_state_sequence(a.viol_rand, *a.product, a.cls, states);
    CHECK(std::abs(in.cost - testing::brute_force_viol_s(*a.product, a.cls, a.viol_rand, states)) <= 1e-9);
    // The returned sequence realizes the cost.
    double cost = 0.0, disc = 1.0;
    REQUIRE(in.dra_states.size() == states.size() + 1);
    for (std::size_t t = 0; t < states.size(); ++t, disc *= 0.9) {
      DraState q = in.dra_states[t], next = in.dra_states[t + 1];
      if (next == q && a.dra->step(q, m->label(states[t])) != q) cost += disc;
      else CHECK(next == a.dra->step(q, m->label(states[t])));
    }
    if (in.terminal >= 0) CHECK(in.cost == doctest::Approx(cost + disc * a.viol_rand[in.terminal]).epsilon(1e-12));
  }
}

TEST_CASE("policy evaluation matches a direct linear solve") {
  testing::Rng rng(42);
  int solved = 0;
  for (int i = 0; i < 200 && solved < 25; ++i) {
    auto m = std::make_shared<const Mdp>(testing::random_mdp(rng, 4));
    Formula f = testing::random_small_formula(rng, 5, {"p", "q"});
    DraCache cache;
    FormulaAnalysis a = analyze_formula(f, m, 0.9, cache);
    ViolationTable direct;
    if (!testing::linear_solve_violation(*a.product, uniform_product_policy(*a.product), a.cls, a.viol_rand, direct)) continue;
    ++solved;
    for (std::size_t x = 0; x < direct.size(); ++x) CHECK(std::abs(direct[x] - a.viol_rand[x]) <= 1e-6);
  }
  CHECK(solved == 25);
}

TEST_CASE("violation costs stay within bounds") {
  testing::Rng rng(43);
  for (int i = 0; i < 40; ++i) {
    auto m = std::make_shared<const Mdp>(testing::random_mdp(rng, 4));
    DraCache cache;
    FormulaAnalysis a = analyze_formula(testing::random_small_formula(rng, 5, {"p", "q"}), m, 0.95, cache);
    for (int x = 0; x < a.product->num_states(); ++x) {
      CHECK(a.viol_rand[x] >= -1e-12);
      CHECK(a.viol_rand[x] <= 1.0 / 0.05 + 1e-9);
      if (a.cls.bad[x]) CHECK(a.viol_rand[x] == doctest::Approx(20.0));
    }
  }
}

TEST_CASE("SlimChance action objective against the closed form") {
  auto m = std::make_shared<const Mdp>(slimchance());
  auto demos = testing::slimchance_reference_demos(*m);
  for (double g : {0.99, 0.995, 0.999}) {
    FormulaAnalysis a = analyze("G good", m, g);
    const double expected = testing::slimchance_closed_form(1.0, 0.01, g).pre_initial -
                            testing::slimchance_closed_form(0.5, 0.01, g).pre_initial;
    CAPTURE(g);
    CHECK(obj_action_based(*a.product, a.cls, a.viol_rand, demos) == doctest::Approx(expected).epsilon(1e-7));
  }
  // With g = 0.99 keeping into the sink from the pre-initial state already
  // costs no more than skipping, so both policies score 99 there.
  CHECK(testing::slimchance_closed_form(1.0, 0.01, 0.99).pre_initial == doctest::Approx(99.0));
  CHECK(testing::slimchance_closed_form(1.0, 0.01, 0.995).pre_initial <
        testing::slimchance_closed_form(0.5, 0.01, 0.995).pre_initial);
}

TEST_CASE("demonstrated policy follows the observed actions") {
  auto m = std::make_shared<const Mdp>(slimchance());
  FormulaAnalysis a = analyze("G good", m, 0.99);
  ProductPolicy pi = demonstrated_policy(*a.product, a.cls, a.viol_rand, testing::slimchance_reference_demos(*m));
  const int attempt = m->action_id("try");
  for (int x = 1; x < a.product->num_states(); ++x) {
    const auto& cs = a.product->choices(x);
    double total = 0.0;
    for (double p : pi.probs[x]) total += p;
    CHECK(total == doctest::Approx(1.0));
    if (a.product->dra_state(x) == a.dra->initial()) {
      for (std::size_t c = 0; c < cs.size(); ++c) CHECK(pi.probs[x][c] == (cs[c].action == attempt ? 1.0 : 0.0));
    } else {
      for (double p : pi.probs[x]) CHECK(p == 0.5);
    }
  }
}

TEST_CASE("single-action models give a zero action objective") {
  testing::Rng rng(44);
  for (int i = 0; i < 20; ++i) {
    Mdp base = testing::random_mdp(rng, 4);
    std::vector<Mdp::StateSpec> specs;
    for (int s = 0; s < base.num_states(); ++s) {
      Mdp::StateSpec st{base.state_name(s), names_of(base.propositions(), base.label(s)), {}};
      std::vector<std::pair<std::string, double>> out;
      for (const auto& o : base.choices(s)[0].outcomes) out.emplace_back(base.state_name(o.target), o.prob);
      st.actions.emplace_back("only", out);
      specs.push_back(st);
    }
    auto m = std::make_shared<const Mdp>(Mdp::build(base.propositions(), specs, base.state_name(0)));
    std::vector<Trajectory> demos;
    for (std::uint64_t seed = 0; seed < 3; ++seed) demos.push_back(sample_trajectory(*m, uniform_random_policy(*m), 5, seed));
    DraCache cache;
    Formula f = testing::random_small_formula(rng, 5, {"p", "q"});
    CHECK(evaluate_objective(f, m, demos, ObjectiveKind::Action, 0.9, cache) == 0.0);
  }
}

TEST_CASE("objective kinds parse") {
  CHECK(objective_kind_from_string("state") == ObjectiveKind::State);
  CHECK(objective_kind_from_string("action") == ObjectiveKind::Action);
  CHECK(to_string(ObjectiveKind::Action) == "action");
  CHECK_THROWS_AS(objective_kind_from_string("both"), std::invalid_argument);
}

TEST_CASE("evaluation gives up when it cannot converge") {
  auto m = std::make_shared<const Mdp>(slimchance());
  DraCache cache;
  EvalSettings tight{1e-12, 5};
  CHECK_THROWS_AS(analyze_formula(parse("G good"), m, 0.99, cache, tight), NonConvergence);
}
