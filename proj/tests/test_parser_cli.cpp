#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "picalc/errors.hpp"
#include "picalc/parser.hpp"
#include "support/gen.hpp"

using namespace picalc;

namespace {

std::string fixture_path(const std::string& name) {
  return std::string(PICALC_FIXTURE_DIR) + "/" + name;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(PICALC_BIN) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("minimal specification") {
  SpecFile f = parse_spec_file("process P = 0. query barbs P.");
  CHECK(f.processes.size() == 1);
  REQUIRE(f.queries.size() == 1);
  CHECK(f.queries[0].kind == SpecQuery::Kind::Barbs);
}

TEST_CASE("load-time correctness check names the violated condition") {
  const char* bad = "var x. public name c. process Q = {0/x} | {1/x}.";
  try {
    parse_spec_file(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
  }
}

TEST_CASE("parse errors carry positions") {
  try {
    parse_spec_file("process P = out(c, 0).0.");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("undeclared") != std::string::npos);
    CHECK(e.line == 1);
  }

  CHECK_THROWS_AS(parse_spec_file("fun f/2. public name c. process P = out(c, f(0)).0."),
                  ParseError);
  CHECK_THROWS_AS(parse_spec_file("process P = 0. query frob P."), ParseError);
  CHECK_THROWS_AS(parse_spec_file("process P = 0. query bisim P Q."), ParseError);
  CHECK_THROWS_AS(parse_spec_file("name n. name n."), ParseError);
}

TEST_CASE("term syntax") {
  testgen::Fixture fx;
  CHECK(fx.term("(0, 1)") == Term::pair(Term::atom(const_sym("0")), Term::atom(const_sym("1"))));
  CHECK(fx.term("fst((c, d))") ==
        Term::app("fst", {Term::pair(Term::atom(name_sym("c")), Term::atom(name_sym("d")))}));
  CHECK(fx.term("((0))") == Term::atom(const_sym("0")));
  CHECK(fx.term("enc(x, h(y))").print() == "enc(x, h(y))");
}

TEST_CASE("process syntax and precedence") {
  testgen::Fixture fx;

  // prefixes bind tighter than parallel
  ExtendedProcess a = fx.parse("new m.out(c, 0).0 | in(c, b).0");
  REQUIRE(std::holds_alternative<ep::Par>(a.node()));

  // parallel is right associative
  ExtendedProcess b = fx.parse("0 | out(c, 0).0 | 0");
  const auto& par = std::get<ep::Par>(b.node());
  CHECK(std::holds_alternative<ep::Par>(par.right.node()));

  // dangling else binds to the nearest conditional
  ExtendedProcess cnd = fx.parse("if 0 = 0 then if 1 = 1 then out(c, 0).0 else out(d, 1).0");
  const auto& outer = std::get<pp::Cond>(std::get<ep::Plain>(cnd.node()).p.node());
  CHECK(std::holds_alternative<pp::Nil>(outer.else_branch.node()));

  // nu binds a variable unless the identifier is a declared name
  ExtendedProcess nu_var = fx.parse("nu v.({0/v} | 0)");
  CHECK(std::get<ep::Res>(nu_var.node()).binder.kind == SymbolKind::Variable);
  ExtendedProcess nu_name = fx.parse("nu m.0");
  CHECK(std::get<ep::Res>(nu_name.node()).binder.kind == SymbolKind::Name);

  // replication of a parallel needs parentheses and keeps them
  ExtendedProcess bang = fx.parse("!(out(c, 0).0 | 0)");
  CHECK(std::holds_alternative<pp::Repl>(std::get<ep::Plain>(bang.node()).p.node()));

  CHECK_THROWS_AS(fx.parse("in(x', b).{0/b}"), ParseError);
}

TEST_CASE("printing round trips to an alpha-equal process") {
  testgen::Fixture fx;
  testgen::Gen gen(fx, 20260811);

  for (int i = 0; i < 150; ++i) {
    ExtendedProcess a = gen.correct_cep(12);
    std::string printed = print_process(a);
    ExtendedProcess back = parse_process_string(printed, fx.spec.decls);
    CHECK(alpha_equal(a, back));
  }

  // tricky shapes
  for (const char* text : {
           "if 0 = 0 then (if 1 = 1 then out(c, 0).0 else out(d, 1).0)",
           "new m.(out(m, 0).0 | in(c, b).out(b, 1).0)",
           "!(out(c, 0).0 | 0) | {enc(0, 1)/x}",
           "nu v.({(0, 1)/v} | out(c, fst(v)).0)",
       }) {
    ExtendedProcess a = fx.parse(text);
    CHECK(alpha_equal(a, parse_process_string(print_process(a), fx.spec.decls)));
  }
}

TEST_CASE("integration fixture loads and resolves") {
  SpecFile f = parse_spec_file(slurp(fixture_path("projection.pical")), "projection.pical");
  CHECK(f.processes.size() == 6);
  CHECK(f.queries.size() == 5);
  CHECK(f.decls.sig.contains("enc"));
  CHECK(f.rules.size() == 3);
}

TEST_CASE("cli exit codes are the machine contract") {
  CHECK(run_cli("run --depth 1 " + fixture_path("equivalent.pical")) == 0);
  CHECK(run_cli("run " + fixture_path("distinguished.pical")) == 1);
  CHECK(run_cli("run " + fixture_path("bad_duplicate.pical")) == 3);
  CHECK(run_cli("run /nonexistent.pical") == 3);
  CHECK(run_cli("selftest --seed 7") == 0);
}

TEST_CASE("cli formats") {
  CHECK(run_cli("run --format json " + fixture_path("projection.pical")) == 1);
  CHECK(run_cli("run --depth 1 --format dot " + fixture_path("equivalent.pical")) == 0);
  CHECK(run_cli("run --depth 1 --output-label-mode alias " + fixture_path("equivalent.pical")) ==
        0);
}
