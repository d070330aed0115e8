#include "picalc/selfcheck.hpp"

#include <random>
#include <sstream>
#include <vector>

#include "picalc/equivalence.hpp"
#include "picalc/parser.hpp"

namespace picalc {

namespace {

const char* kFixture = R"(
var x. var y. var z.
fun fst/1.
fun snd/1.
fun h/1.
fun enc/2.
fun dec/2.
rewrite fst((x, y)) -> x.
rewrite snd((x, y)) -> y.
rewrite dec(enc(x, y), y) -> x.
public name c.
public name d.
name m.
process FrameZero = {0/z}.
process FrameOne = {1/z}.
process OutZero = out(c, 0).0.
process OutOne = out(c, 1).0.
process Guarded = if 0 = 0 then out(c, 0).0.
process Listener = in(c, y).0.
)";

struct Check {
  std::ostream& os;
  int failures = 0;

  void report(const std::string& what, bool ok, const std::string& detail = "") {
    os << (ok ? "[ok]   " : "[FAIL] ") << what;
    if (!ok && !detail.empty()) os << " : " << detail;
    os << "\n";
    if (!ok) ++failures;
  }
};

ExplorationConfig fixture_cfg(const Declarations& decls) {
  ExplorationConfig cfg;
  cfg.recipe_depth = 1;
  cfg.replication_bound = 1;
  cfg.max_states = 2000;
  for (const Symbol& s : decls.public_atoms) cfg.public_atoms.push_back(s);
  return cfg;
}

// A few parameterized shapes instantiated with random terms; every produced
// process is correct and closed by construction.
ExtendedProcess random_cep(std::mt19937& rng) {
  const Symbol c = name_sym("c");
  const Symbol d = name_sym("d");
  const Symbol m = name_sym("m");
  const Symbol x = var_sym("x");
  const Symbol y = var_sym("y");
  const Symbol z = var_sym("z");
  const Term zero = Term::atom(const_sym("0"));
  const Term one = Term::atom(const_sym("1"));

  std::uniform_int_distribution<int> coin(0, 1);
  auto rand_closed = [&](auto&& self, int depth) -> Term {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 5 : 2);
    switch (pick(rng)) {
      case 0: return zero;
      case 1: return one;
      case 2: return Term::atom(coin(rng) ? c : m);
      case 3: return Term::app("h", {self(self, depth - 1)});
      case 4: return Term::pair(self(self, depth - 1), self(self, depth - 1));
      default: return Term::app("fst", {Term::pair(self(self, depth - 1), zero)});
    }
  };
  auto t = [&](int depth) { return rand_closed(rand_closed, depth); };

  auto out_on = [&](Symbol chan, Term msg) {
    return PlainProcess::output(Term::atom(chan), std::move(msg), PlainProcess::nil());
  };

  std::uniform_int_distribution<int> shape(0, 6);
  switch (shape(rng)) {
    case 0:  // frame only
      return ExtendedProcess::subst(t(2), z);
    case 1:  // frame plus a user of the frame variable
      return ExtendedProcess::par(ExtendedProcess::subst(t(1), x),
                                  ExtendedProcess::plain(out_on(c, Term::atom(x))));
    case 2:  // variable restriction applied away
      return ExtendedProcess::res(
          y, ExtendedProcess::par(ExtendedProcess::subst(t(1), y),
                                  ExtendedProcess::plain(out_on(d, Term::atom(y)))));
    case 3:  // restricted name exposed through the frame
      return ExtendedProcess::res(
          m, ExtendedProcess::subst(Term::app("h", {Term::atom(m)}), x));
    case 4:  // restricted name pushed onto the body
      return ExtendedProcess::res(
          m, ExtendedProcess::par(ExtendedProcess::subst(t(1), x),
                                  ExtendedProcess::plain(out_on(m, t(1)))));
    case 5:  // conditional body
      return ExtendedProcess::par(
          ExtendedProcess::subst(t(1), x),
          ExtendedProcess::plain(PlainProcess::cond(Term::atom(x), t(1), out_on(c, zero),
                                                    out_on(d, one))));
    default:  // listener plus frame
      return ExtendedProcess::par(
          ExtendedProcess::subst(t(1), x),
          ExtendedProcess::plain(PlainProcess::input(
              Term::atom(c), y, PlainProcess::output(Term::atom(d), Term::atom(y),
                                                     PlainProcess::nil()))));
  }
}

}  // namespace

int run_selftest(unsigned seed, std::ostream& os) {
  Check ck{os};
  SpecFile spec = parse_spec_file(kFixture, "<selftest>");
  EquationalTheory theory = spec.theory();
  ExplorationConfig cfg = fixture_cfg(spec.decls);

  const ExtendedProcess frame0 = spec.processes.at("FrameZero");
  const ExtendedProcess frame1 = spec.processes.at("FrameOne");
  const Symbol z = var_sym("z");
  const Term zero = Term::atom(const_sym("0"));

  // Probe demonstration: the test probe turns the frame difference into a
  // barb on the fresh signal name, on exactly one side.
  {
    Symbol a = fresh_symbol(SymbolKind::Name, "a", all_symbols(frame0));
    ProbeSpec probe = ProbeSpec::test(Term::atom(z), zero, a);
    SymbolSet b0 = barbs(build_probe(probe, frame0), theory, cfg);
    SymbolSet b1 = barbs(build_probe(probe, frame1), theory, cfg);
    ck.report("test probe signals on {0/z} and stays silent on {1/z}",
              b0.count(a) == 1 && b1.count(a) == 0);
  }

  // Static equivalence on the same pair, with replayable evidence.
  {
    EquivVerdict v = static_equivalent(frame0, frame1, theory, cfg);
    bool ok = v.distinguished() && v.evidence.has_value();
    std::string why;
    if (ok) ok = replay_evidence(frame0, frame1, *v.evidence, theory, cfg, &why);
    ck.report("static equivalence separates {0/z} from {1/z} with replayable evidence", ok, why);
  }

  // Input probe demonstration: the signal barb is present before and gone
  // after the communications complete.
  {
    const ExtendedProcess listener = spec.processes.at("Listener");
    Symbol a = fresh_symbol(SymbolKind::Name, "a", all_symbols(listener));
    ExtendedProcess composite =
        build_probe(ProbeSpec::input(Term::atom(name_sym("c")), zero, a), listener);
    bool initially = barbs(composite, theory, cfg).count(a) == 1;
    bool eventually_gone = false;
    for (const ExtendedProcess& s : tau_closure(composite, theory, cfg)) {
      if (barbs(s, theory, cfg).count(a) == 0) {
        eventually_gone = true;
        break;
      }
    }
    ck.report("input probe signal cancels after the communications", initially && eventually_gone);
  }

  // Weak bisimilarity demonstrations.
  {
    EquivVerdict v = weak_labeled_bisim(spec.processes.at("OutZero"),
                                        spec.processes.at("Guarded"), theory, cfg);
    bool ok = v.equivalent();
    std::string why;
    if (ok) ok = validate_witness(v.witness, theory, cfg, &why);
    ck.report("internal test step is absorbed by weak matching", ok, why);
  }
  {
    EquivVerdict v = weak_labeled_bisim(spec.processes.at("OutZero"),
                                        spec.processes.at("OutOne"), theory, cfg);
    bool ok = v.distinguished() && v.evidence.has_value();
    std::string why;
    if (ok) {
      ok = replay_evidence(spec.processes.at("OutZero"), spec.processes.at("OutOne"),
                           *v.evidence, theory, cfg, &why);
    }
    ck.report("distinct outputs are distinguished with replayable evidence", ok, why);
  }

  // Normal-form invariant suite over random correct processes.
  {
    std::mt19937 rng(seed);
    int bad = 0;
    std::string detail;
    for (int i = 0; i < 64; ++i) {
      ExtendedProcess a = random_cep(rng);
      if (!check_correct(a).ok() || !is_closed_ep(a)) {
        ++bad;
        detail = "generator produced an invalid process";
        continue;
      }
      NormalForm nf = normalize_process(a, theory);
      bool ok = free_vars(nf.body).empty();
      SymbolSet frame_names;
      for (const Binding& b : nf.frame.bindings()) {
        ok = ok && variables_of(b.term).empty();
        for (const Symbol& s : names_of(b.term)) frame_names.insert(s);
      }
      for (const Symbol& n : nf.names) ok = ok && frame_names.count(n) == 1;
      ok = ok && nf.frame.domain() == domain(a);
      ok = ok && struct_equiv(a, nf.reassemble(), theory);
      if (!ok) {
        ++bad;
        detail = "invariant failed for " + print_process(a);
      }
    }
    ck.report("normal-form invariants hold on 64 random correct processes", bad == 0, detail);
  }

  os << (ck.failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
  return ck.failures;
}

}  // namespace picalc
