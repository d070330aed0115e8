#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "picalc/equivalence.hpp"
#include "picalc/errors.hpp"
#include "picalc/parser.hpp"
#include "picalc/selfcheck.hpp"

using namespace picalc;
using nlohmann::json;

namespace {

struct Options {
  int depth = 2;
  int repl_bound = 2;
  int max_states = 10'000;
  int max_recipes = 200'000;
  std::string label_mode = "literal";
  std::string format = "text";
  unsigned seed = 0;
};

void load_env_defaults(Options& opt) {
  const char* path = std::getenv("PICALC_CONFIG");
  if (!path) return;
  std::ifstream in(path);
  if (!in) {
    std::cerr << "warning: cannot read PICALC_CONFIG file " << path << "\n";
    return;
  }
  try {
    json j = json::parse(in);
    opt.depth = j.value("depth", opt.depth);
    opt.repl_bound = j.value("repl_bound", opt.repl_bound);
    opt.max_states = j.value("max_states", opt.max_states);
    opt.max_recipes = j.value("max_recipes", opt.max_recipes);
    opt.label_mode = j.value("output_label_mode", opt.label_mode);
    opt.format = j.value("format", opt.format);
    opt.seed = j.value("seed", opt.seed);
  } catch (const std::exception& e) {
    std::cerr << "warning: ignoring malformed PICALC_CONFIG: " << e.what() << "\n";
  }
}

ExplorationConfig make_cfg(const Options& opt, const Declarations& decls) {
  ExplorationConfig cfg;
  cfg.recipe_depth = opt.depth;
  cfg.replication_bound = opt.repl_bound;
  cfg.max_states = opt.max_states;
  cfg.max_recipes = static_cast<std::size_t>(opt.max_recipes);
  cfg.label_mode = opt.label_mode == "alias" ? OutputLabelMode::Alias : OutputLabelMode::Literal;
  for (const Symbol& s : decls.public_atoms) cfg.public_atoms.push_back(s);
  cfg.validate();
  return cfg;
}

json bounds_json(const Options& opt) {
  return json{{"depth", opt.depth},
              {"repl_bound", opt.repl_bound},
              {"max_states", opt.max_states},
              {"max_recipes", opt.max_recipes},
              {"output_label_mode", opt.label_mode}};
}

std::string bounds_text(const Options& opt) {
  std::ostringstream os;
  os << "depth=" << opt.depth << " repl-bound=" << opt.repl_bound
     << " max-states=" << opt.max_states << " label-mode=" << opt.label_mode;
  return os.str();
}

json evidence_json(const Evidence& ev) {
  json steps = json::array();
  for (const EvidenceStep& s : ev.steps) {
    steps.push_back(json{{"internal", s.internal}, {"action", s.action.pretty()}});
  }
  return json{{"steps", steps}, {"fact", ev.describe()}};
}

int verdict_exit(const EquivVerdict& v) {
  switch (v.kind) {
    case EquivVerdict::Kind::Equivalent: return 0;
    case EquivVerdict::Kind::Distinguished: return 1;
    case EquivVerdict::Kind::Inconclusive: return 2;
  }
  return 3;
}

void print_verdict(const SpecQuery& q, const EquivVerdict& v, const Options& opt, double ms) {
  if (opt.format == "json") {
    json j{{"query", q.kind_name()},
           {"args", q.args},
           {"verdict", v.kind_name()},
           {"bounds", bounds_json(opt)},
           {"wall_ms", ms}};
    if (v.equivalent()) j["witness_size"] = v.witness.size();
    if (v.evidence) j["evidence"] = evidence_json(*v.evidence);
    if (!v.note.empty()) j["note"] = v.note;
    std::cout << j.dump() << "\n";
    return;
  }
  std::cout << "verdict: " << v.kind_name() << "\n";
  if (v.equivalent()) std::cout << "witness: " << v.witness.size() << " pairs\n";
  if (v.evidence) std::cout << "evidence: " << v.evidence->describe() << "\n";
  if (!v.note.empty()) std::cout << "note: " << v.note << "\n";
  std::cout << "bounds: " << bounds_text(opt) << "\n";
  std::cout << "time: " << ms << " ms\n";
}

// Small random closing contexts for the closure query: plain listeners,
// forwarders and frame users over the public channels and the frame domain.
std::vector<ContextInstance> random_contexts(const ExtendedProcess& a,
                                             const EquationalTheory& theory,
                                             const ExplorationConfig& cfg, std::mt19937& rng,
                                             std::size_t count) {
  std::vector<ContextInstance> out;
  std::vector<Symbol> chans;
  for (const Symbol& s : cfg.public_atoms) {
    if (s.kind == SymbolKind::Name) chans.push_back(s);
  }
  if (chans.empty()) return out;
  ExplorationConfig shallow = cfg;
  shallow.recipe_depth = 1;
  std::vector<Term> recipes = recipe_terms(domain(a), shallow, theory.signature());
  if (recipes.empty()) return out;
  auto chan = [&] { return Term::atom(chans[rng() % chans.size()]); };
  auto recipe = [&] { return recipes[rng() % recipes.size()]; };
  for (std::size_t i = 0; i < count; ++i) {
    PlainProcess c = PlainProcess::nil();
    switch (rng() % 4) {
      case 0: c = PlainProcess::output(chan(), recipe(), PlainProcess::nil()); break;
      case 1: {
        Symbol y = fresh_symbol(SymbolKind::Variable, "y", all_symbols(a));
        c = PlainProcess::input(chan(), y,
                                PlainProcess::output(chan(), Term::atom(y), PlainProcess::nil()));
        break;
      }
      case 2:
        c = PlainProcess::cond(recipe(), recipe(),
                               PlainProcess::output(chan(), recipe(), PlainProcess::nil()),
                               PlainProcess::nil());
        break;
      default: {
        Symbol y = fresh_symbol(SymbolKind::Variable, "y", all_symbols(a));
        c = PlainProcess::input(chan(), y, PlainProcess::nil());
        break;
      }
    }
    out.push_back(ContextInstance{{}, ExtendedProcess::plain(c),
                                  "random context " + std::to_string(i)});
  }
  return out;
}

int run_queries(const SpecFile& spec, const Options& opt) {
  EquationalTheory theory = spec.theory();
  ExplorationConfig cfg = make_cfg(opt, spec.decls);
  int worst = 0;
  for (const SpecQuery& q : spec.queries) {
    if (opt.format != "json") {
      std::cout << "== query " << q.kind_name();
      for (const auto& a : q.args) std::cout << " " << a;
      std::cout << "\n";
    }
    const auto t0 = std::chrono::steady_clock::now();
    auto ms_since = [&t0] {
      return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
    };
    try {
      const ExtendedProcess& p0 = spec.processes.at(q.args[0]);
      switch (q.kind) {
        case SpecQuery::Kind::Normalize: {
          NormalForm nf = normalize_process(p0, theory);
          if (opt.format == "json") {
            json frame = json::array();
            for (const Binding& b : nf.frame.bindings()) {
              frame.push_back(json{{"var", b.var.display()}, {"term", b.term.print()}});
            }
            json names = json::array();
            for (const Symbol& n : nf.names) names.push_back(n.display());
            std::cout << json{{"query", "normalize"},
                              {"args", q.args},
                              {"names", names},
                              {"frame", frame},
                              {"body", print_process(nf.body)},
                              {"pretty", nf.pretty()}}
                             .dump()
                      << "\n";
          } else {
            std::cout << nf.pretty() << "\n";
          }
          break;
        }
        case SpecQuery::Kind::Lts: {
          LtsGraph g = explore(p0, theory, cfg);
          if (opt.format == "dot") {
            std::cout << to_dot(g);
          } else if (opt.format == "json") {
            json states = json::array();
            for (const auto& s : g.states) states.push_back(print_process(s.proc));
            json edges = json::array();
            for (const auto& e : g.edges) {
              edges.push_back(json{{"src", e.src},
                                   {"action", e.action.pretty()},
                                   {"dst", e.dst},
                                   {"internal_ok", e.internal_ok}});
            }
            std::cout << json{{"query", "lts"},
                              {"args", q.args},
                              {"states", states},
                              {"edges", edges},
                              {"truncated", g.truncated}}
                             .dump()
                      << "\n";
          } else {
            std::cout << to_lines(g);
          }
          if (g.truncated) worst = std::max(worst, 2);
          break;
        }
        case SpecQuery::Kind::Barbs: {
          SymbolSet bs = barbs(p0, theory, cfg);
          if (opt.format == "json") {
            json arr = json::array();
            for (const Symbol& s : bs) arr.push_back(s.display());
            std::cout << json{{"query", "barbs"}, {"args", q.args}, {"barbs", arr}}.dump()
                      << "\n";
          } else {
            std::cout << "barbs:";
            for (const Symbol& s : bs) std::cout << " " << s.display();
            std::cout << "\n";
          }
          break;
        }
        case SpecQuery::Kind::Bisim: {
          EquivVerdict v = weak_labeled_bisim(p0, spec.processes.at(q.args[1]), theory, cfg);
          print_verdict(q, v, opt, ms_since());
          worst = std::max(worst, verdict_exit(v));
          break;
        }
        case SpecQuery::Kind::Static: {
          EquivVerdict v = static_equivalent(p0, spec.processes.at(q.args[1]), theory, cfg);
          print_verdict(q, v, opt, ms_since());
          worst = std::max(worst, verdict_exit(v));
          break;
        }
        case SpecQuery::Kind::BarbEq: {
          EquivVerdict v = barb_equivalent(p0, spec.processes.at(q.args[1]), theory, cfg);
          print_verdict(q, v, opt, ms_since());
          worst = std::max(worst, verdict_exit(v));
          break;
        }
        case SpecQuery::Kind::Probe: {
          const ExtendedProcess& p1 = spec.processes.at(q.args[1]);
          EquivVerdict v = static_equivalent(p0, p1, theory, cfg);
          if (!v.distinguished()) {
            print_verdict(q, v, opt, ms_since());
            worst = std::max(worst, verdict_exit(v));
            break;
          }
          const auto& fact = std::get<StaticFact>(v.evidence->fact);
          SymbolSet avoid = all_symbols(p0);
          for (const Symbol& s : all_symbols(p1)) avoid.insert(s);
          Symbol a = fresh_symbol(SymbolKind::Name, "a", avoid);
          ProbeSpec probe = ProbeSpec::test(fact.left, fact.right, a);
          bool left_barb = barbs(build_probe(probe, p0), theory, cfg).count(a) != 0;
          bool right_barb = barbs(build_probe(probe, p1), theory, cfg).count(a) != 0;
          if (opt.format == "json") {
            std::cout << json{{"query", "probe"},
                              {"args", q.args},
                              {"witness",
                               {{"left", fact.left.print()}, {"right", fact.right.print()}}},
                              {"signal", a.display()},
                              {"left_barb", left_barb},
                              {"right_barb", right_barb},
                              {"wall_ms", ms_since()}}
                             .dump()
                      << "\n";
          } else {
            std::cout << "witness: " << fact.left.print() << " = " << fact.right.print() << "\n";
            std::cout << "probe: if " << fact.left.print() << " = " << fact.right.print()
                      << " then out(" << a.display() << ", 0).0\n";
            std::cout << "barb " << a.display() << ": left=" << (left_barb ? "yes" : "no")
                      << " right=" << (right_barb ? "yes" : "no") << "\n";
            std::cout << "time: " << ms_since() << " ms\n";
          }
          worst = std::max(worst, left_barb == right_barb ? 3 : 1);
          break;
        }
        case SpecQuery::Kind::Closure: {
          const ExtendedProcess& p1 = spec.processes.at(q.args[1]);
          std::vector<ContextInstance> contexts = probe_context_family(p0, p1, theory, cfg, 4);
          std::mt19937 rng(opt.seed);
          for (ContextInstance& c : random_contexts(p0, theory, cfg, rng, 8)) {
            contexts.push_back(std::move(c));
          }
          EquivVerdict v = context_closure_check(p0, p1, contexts, theory, cfg);
          if (opt.format != "json") {
            std::cout << "contexts: " << contexts.size() << "\n";
          }
          print_verdict(q, v, opt, ms_since());
          worst = std::max(worst, verdict_exit(v));
          break;
        }
        case SpecQuery::Kind::Oracle: {
          const ExtendedProcess& p1 = spec.processes.at(q.args[1]);
          ExplorationConfig ecfg = equivalence_config(cfg);
          EquivVerdict oracle =
              naive_bisim_oracle(explore(p0, theory, ecfg), explore(p1, theory, ecfg), theory,
                                 ecfg);
          EquivVerdict direct = weak_labeled_bisim(p0, p1, theory, cfg);
          const bool agree = oracle.kind == direct.kind;
          if (opt.format == "json") {
            std::cout << json{{"query", "oracle"},
                              {"args", q.args},
                              {"oracle", oracle.kind_name()},
                              {"checker", direct.kind_name()},
                              {"agree", agree},
                              {"wall_ms", ms_since()}}
                             .dump()
                      << "\n";
          } else {
            std::cout << "oracle: " << oracle.kind_name() << "\n";
            std::cout << "checker: " << direct.kind_name() << "\n";
            std::cout << "agree: " << (agree ? "yes" : "NO") << "\n";
            std::cout << "time: " << ms_since() << " ms\n";
          }
          worst = std::max(worst, agree ? verdict_exit(oracle) : 3);
          break;
        }
      }
    } catch (const std::exception& e) {
      if (opt.format == "json") {
        std::cout << json{{"query", q.kind_name()}, {"args", q.args}, {"error", e.what()}}.dump()
                  << "\n";
      } else {
        std::cout << "error: " << e.what() << "\n";
      }
      worst = 3;
    }
  }
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"applied pi-calculus workbench"};
  app.require_subcommand(1);

  Options opt;
  load_env_defaults(opt);

  std::string spec_path;
  CLI::App* run = app.add_subcommand("run", "load a specification file and run its queries");
  run->add_option("file", spec_path, "specification file")->required();
  run->add_option("--depth", opt.depth, "recipe depth for inputs and static equivalence");
  run->add_option("--repl-bound", opt.repl_bound, "replication unfolding bound");
  run->add_option("--max-states", opt.max_states, "state budget per exploration");
  run->add_option("--max-recipes", opt.max_recipes, "recipe enumeration cap");
  run->add_option("--output-label-mode", opt.label_mode, "literal|alias")
      ->check(CLI::IsMember({"literal", "alias"}));
  run->add_option("--format", opt.format, "text|json|dot")
      ->check(CLI::IsMember({"text", "json", "dot"}));
  run->add_option("--seed", opt.seed, "seed for randomized constructions");

  CLI::App* selftest = app.add_subcommand("selftest", "run the built-in demonstrations");
  selftest->add_option("--seed", opt.seed, "seed for the random suites");

  CLI11_PARSE(app, argc, argv);

  if (selftest->parsed()) {
    return run_selftest(opt.seed, std::cout) == 0 ? 0 : 1;
  }

  std::ifstream in(spec_path);
  if (!in) {
    std::cerr << "error: cannot open " << spec_path << "\n";
    return 3;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    SpecFile spec = parse_spec_file(buf.str(), spec_path);
    return run_queries(spec, opt);
  } catch (const picalc::ParseError& e) {
    std::cerr << spec_path << ":" << e.line << ":" << e.col << ": error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
