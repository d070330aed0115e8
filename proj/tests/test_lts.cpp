#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "picalc/errors.hpp"
#include "picalc/lts.hpp"
#include "support/gen.hpp"

using namespace picalc;

namespace {

bool has_action(const std::vector<Transition>& ts, ActKind kind, const std::string& pretty) {
  for (const Transition& t : ts) {
    if (t.action.kind == kind && t.action.pretty() == pretty) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("co_action") {
  Term c = Term::atom(name_sym("c"));
  Term e = Term::atom(const_sym("0"));
  Action in{ActKind::Input, c, e};
  Action out{ActKind::Output, c, e};

  CHECK(co_action(in).kind == ActKind::Output);
  CHECK(co_action(out).kind == ActKind::Input);
  CHECK(co_action(co_action(in)).key() == in.key());
  CHECK_THROWS_AS(co_action(Action{ActKind::EqTest, c, e}), InternalAction);
}

TEST_CASE("explicit transitions") {
  testgen::Fixture fx;

  SUBCASE("input with an explicit recipe set") {
    ExplorationConfig cfg = fx.cfg;
    cfg.explicit_recipes = std::vector<Term>{Term::atom(name_sym("d"))};
    std::vector<Transition> ts = enumerate_transitions(fx.parse("in(c, b).0"), fx.theory, cfg);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].action.kind == ActKind::Input);
    CHECK(ts[0].action.pretty() == "c(d)");
    CHECK(struct_equiv(ts[0].target, ExtendedProcess::plain(PlainProcess::nil()), fx.theory));
  }
  SUBCASE("output extrudes a fresh frame variable") {
    std::vector<Transition> ts = enumerate_transitions(fx.parse("out(c, 0).0"), fx.theory, fx.cfg);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].action.kind == ActKind::Output);
    CHECK(ts[0].action.pretty() == "c<0>");
    SymbolSet d = domain(ts[0].target);
    REQUIRE(d.size() == 1);
    CHECK(frame_of(ts[0].target, fx.theory).bindings()[0].term == Term::atom(const_sym("0")));
  }
  SUBCASE("conditional offers both test branches") {
    std::vector<Transition> ts =
        enumerate_transitions(fx.parse("if 0 = 0 then out(c, 0).0 else out(d, 1).0"), fx.theory,
                              fx.cfg);
    REQUIRE(ts.size() == 2);
    CHECK(has_action(ts, ActKind::EqTest, "[0 = 0]"));
    CHECK(has_action(ts, ActKind::NeqTest, "[0 != 0]"));
  }
  SUBCASE("communication leaves an equality test") {
    std::vector<Transition> ts = enumerate_transitions(
        fx.parse("out(c, 0).0 | in(c, b).out(d, b).0"), fx.theory, fx.cfg);
    bool found = false;
    for (const Transition& t : ts) {
      if (t.action.kind != ActKind::EqTest) continue;
      if (!t.action.lhs.is_app() || t.action.lhs.fn() != "pair") continue;
      found = true;
      CHECK(t.action.rhs.is_app());
      CHECK(t.action.lhs.args()[1] == t.action.rhs.args()[1]);  // same payload both sides
      // the target carries the frame entry and the instantiated continuation
      SymbolSet d = domain(t.target);
      CHECK(d.size() == 1);
    }
    CHECK(found);
  }
  SUBCASE("open or incorrect processes are rejected") {
    CHECK_THROWS_AS(enumerate_transitions(fx.parse("out(c, x).0"), fx.theory, fx.cfg),
                    PreconditionViolated);
  }
  SUBCASE("restriction blocks labels that mention the name") {
    CHECK(enumerate_transitions(fx.parse("new m.out(m, 0).0"), fx.theory, fx.cfg).empty());
    // a restricted payload blocks the literal output label too
    CHECK(enumerate_transitions(fx.parse("new m.out(c, m).0"), fx.theory, fx.cfg).empty());
  }
  SUBCASE("alias labels let restricted payloads flow") {
    ExplorationConfig cfg = fx.cfg;
    cfg.label_mode = OutputLabelMode::Alias;
    std::vector<Transition> ts =
        enumerate_transitions(fx.parse("new m.out(c, m).0"), fx.theory, cfg);
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].action.kind == ActKind::Output);
    CHECK(variables_of(ts[0].action.rhs).size() == 1);  // the alias variable
    SymbolSet names = free_names(ts[0].target);
    CHECK(names.count(name_sym("m")) == 0);  // still bound inside
    // but the restricted channel stays silent
    CHECK(enumerate_transitions(fx.parse("new m.out(m, 0).0"), fx.theory, cfg).empty());
  }
}

TEST_CASE("internal steps evaluate tests under the frame") {
  testgen::Fixture fx;

  SUBCASE("reflexive test succeeds") {
    auto succ = internal_step(fx.parse("if c = c then out(d, 0).0 else 0"), fx.theory, fx.cfg);
    REQUIRE(succ.size() == 1);
    CHECK(struct_equiv(succ[0], fx.parse("out(d, 0).0"), fx.theory));
  }
  SUBCASE("distinct atoms fail the test") {
    auto succ = internal_step(fx.parse("if 0 = 1 then out(c, 0).0 else out(d, 1).0"), fx.theory,
                              fx.cfg);
    REQUIRE(succ.size() == 1);
    CHECK(struct_equiv(succ[0], fx.parse("out(d, 1).0"), fx.theory));
  }
  SUBCASE("the frame feeds the test") {
    auto succ = internal_step(fx.parse("{(0, 1)/x} | if fst(x) = 0 then out(c, 0).0"), fx.theory,
                              fx.cfg);
    bool reaches_then = false;
    for (const ExtendedProcess& s : succ) {
      if (!barbs(s, fx.theory, fx.cfg).empty()) reaches_then = true;
    }
    CHECK(reaches_then);
  }
}

TEST_CASE("tau closure and weak transitions") {
  testgen::Fixture fx;

  SUBCASE("nil closes to itself") {
    auto reach = tau_closure(ExtendedProcess::plain(PlainProcess::nil()), fx.theory, fx.cfg);
    CHECK(reach.size() == 1);
  }
  SUBCASE("chained tests") {
    auto reach =
        tau_closure(fx.parse("if 0 = 0 then if 1 = 1 then out(c, 0).0"), fx.theory, fx.cfg);
    bool has_out = false;
    for (const ExtendedProcess& s : reach) {
      if (struct_equiv(s, fx.parse("out(c, 0).0"), fx.theory)) has_out = true;
    }
    CHECK(has_out);
  }
  SUBCASE("outputs are not internal") {
    auto reach = tau_closure(fx.parse("out(c, 0).0"), fx.theory, fx.cfg);
    CHECK(reach.size() == 1);
  }
  SUBCASE("weak transition absorbs internal padding") {
    Action alpha{ActKind::Output, Term::atom(name_sym("c")), Term::atom(const_sym("0"))};
    auto direct = weak_transition(fx.parse("out(c, 0).0"), alpha, fx.theory, fx.cfg);
    CHECK_FALSE(direct.empty());
    auto padded = weak_transition(fx.parse("if c = c then out(c, 0).0"), alpha, fx.theory, fx.cfg);
    CHECK_FALSE(padded.empty());
    auto none = weak_transition(ExtendedProcess::plain(PlainProcess::nil()), alpha, fx.theory,
                                fx.cfg);
    CHECK(none.empty());
  }
  SUBCASE("state budget surfaces loudly") {
    ExplorationConfig tiny = fx.cfg;
    tiny.max_states = 1;
    CHECK_THROWS_AS(tau_closure(fx.parse("if 0 = 0 then if 1 = 1 then out(c, 0).0"), fx.theory,
                                tiny),
                    StateBudgetExceeded);
  }
}

TEST_CASE("barbs") {
  testgen::Fixture fx;

  SymbolSet b1 = barbs(fx.parse("out(c, 0).0"), fx.theory, fx.cfg);
  CHECK(b1 == SymbolSet{name_sym("c")});

  SymbolSet b2 = barbs(fx.parse("if 0 = 0 then out(c, 0).0"), fx.theory, fx.cfg);
  CHECK(b2 == SymbolSet{name_sym("c")});

  SymbolSet b3 = barbs(fx.parse("new m.out(m, 0).0"), fx.theory, fx.cfg);
  CHECK(b3.empty());

  // barbs through a channel that the theory rewrites to a name
  SymbolSet b4 = barbs(fx.parse("out(fst((c, 0)), 1).0"), fx.theory, fx.cfg);
  CHECK(b4 == SymbolSet{name_sym("c")});
}

TEST_CASE("transition properties over random processes") {
  testgen::Fixture fx;
  testgen::Gen gen(fx, 20260807);

  for (int i = 0; i < 80; ++i) {
    ExtendedProcess a = gen.correct_cep(10);
    SymbolSet dom = domain(a);
    std::vector<Transition> ts = enumerate_transitions(a, fx.theory, fx.cfg);
    for (const Transition& t : ts) {
      // considered transitions: label variables within the source domain
      for (const Symbol& v : action_vars(t.action)) CHECK(dom.count(v) == 1);
      CHECK(check_correct(t.target).ok());

      SymbolSet tdom = domain(t.target);
      for (const Symbol& v : dom) CHECK(tdom.count(v) == 1);  // frames only grow
      if (t.action.kind == ActKind::Output) {
        CHECK(tdom.size() == dom.size() + 1);
      } else if (t.action.kind == ActKind::Input) {
        CHECK(tdom == dom);
      } else {
        // a conditional test preserves the domain; a communication embeds
        // an output and grows it by exactly the extruded variable
        CHECK(tdom.size() - dom.size() <= 1);
      }
    }
  }
}

TEST_CASE("structurally equivalent processes have matching transitions") {
  testgen::Fixture fx;
  testgen::Gen gen(fx, 20260808);

  // canonical frame variables so the fresh output variables of the two
  // processes line up
  ExplorationConfig ccfg = fx.cfg;
  ccfg.canonical_frame_vars = true;
  auto signature_of = [&](const ExtendedProcess& p) {
    std::set<std::string> keys;
    for (const Transition& t : enumerate_transitions(p, fx.theory, ccfg)) {
      Action norm{t.action.kind, fx.theory.normalize(t.action.lhs),
                  fx.theory.normalize(t.action.rhs)};
      keys.insert(norm.key() + "=>" + normalize_process(t.target, fx.theory).key());
    }
    return keys;
  };

  int compared = 0;
  for (int i = 0; i < 40; ++i) {
    ExtendedProcess a = gen.correct_cep(8);
    auto b = testgen::rules::apply_2a(gen, a);
    if (!b || !check_correct(*b).ok()) continue;
    REQUIRE(struct_equiv(a, *b, fx.theory));
    CHECK(signature_of(a) == signature_of(*b));
    ++compared;
  }
  CHECK(compared > 10);
}

TEST_CASE("barbs are monotone along internal steps") {
  testgen::Fixture fx;
  testgen::Gen gen(fx, 20260809);

  for (int i = 0; i < 40; ++i) {
    ExtendedProcess a = gen.correct_cep(10);
    SymbolSet base = barbs(a, fx.theory, fx.cfg);
    for (const ExtendedProcess& s : tau_closure(a, fx.theory, fx.cfg)) {
      for (const Symbol& n : barbs(s, fx.theory, fx.cfg)) CHECK(base.count(n) == 1);
    }
  }
}

TEST_CASE("graph exploration and exports") {
  testgen::Fixture fx;

  LtsGraph g = explore(fx.parse("out(c, 0).out(d, 1).0"), fx.theory, fx.cfg);
  CHECK(g.states.size() == 3);
  CHECK(g.edges.size() == 2);
  CHECK_FALSE(g.truncated);

  std::string dot = to_dot(g);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("c<0>") != std::string::npos);

  std::string lines = to_lines(g);
  CHECK(lines.find("state\t0") != std::string::npos);
  CHECK(lines.find("trans\t0") != std::string::npos);

  // replication contributes bounded unfoldings
  LtsGraph rg = explore(fx.parse("!out(c, 0).0"), fx.theory, fx.cfg);
  CHECK(rg.states.size() > 1);
}
