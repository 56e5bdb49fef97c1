#include "fmc/selftest.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fmc/check.hpp"
#include "fmc/equiv.hpp"
#include "fmc/gen.hpp"
#include "fmc/lambda.hpp"
#include "fmc/machine.hpp"
#include "fmc/measure.hpp"
#include "fmc/rewrite.hpp"
#include "fmc/surface.hpp"
#include "fmc/term.hpp"
#include "fmc/translate.hpp"
#include "fmc/types.hpp"

namespace fmc {
namespace {

struct Outcome {
  bool pass = true;
  long long checked = 0;
  std::vector<std::string> failures;  // first few reasons

  void ok() { ++checked; }
  void fail(const std::string& why) {
    ++checked;
    pass = false;
    if (failures.size() < 3) failures.push_back(why);
  }
};

// ---- corpus shared by the termination, counting, reduction and confluence
// checks: closed annotated terms with one generated input memory each ----

struct CorpusEntry {
  GenTerm gen;
  std::map<std::string, std::vector<Val>> inputs;
};

std::vector<CorpusEntry> build_corpus(std::size_t n) {
  Signature sig;
  GenConfig cfg;  // size <= 25, <= 3 locations
  std::mt19937_64 rng(2024);
  std::vector<CorpusEntry> corpus;
  corpus.reserve(n);
  while (corpus.size() < n) {
    CorpusEntry e;
    e.gen = generate_term(sig, rng, cfg);
    e.inputs = generate_inputs(sig, e.gen.type.dom, rng);
    corpus.push_back(std::move(e));
  }
  return corpus;
}

// ---- criterion 1: typing goldens ----

Outcome typing_goldens() {
  Outcome out;
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"<x>", "t >"},
      {"<x>.[x].[x]", "t > t t"},
      {"<x>.<y>.[y].[x]", "s t > t s"},
      {"<f>.?f.?f", "(?t > !t) ?t > !t"},
      {"set c", "Z c(Z) > c(Z)"},
      {"get c", "c(Z) > c(Z) Z"},
      {"print", "Z > out(Z)"},
  };
  Signature sig;
  for (const auto& [term, type] : cases) {
    try {
      CompType want = parse_comp_type(type);
      check(sig, Context{}, parse_computation(term), want);
      // Exact equality after canonicalization: reparse the printed form.
      if (parse_comp_type(show(want)) != want) {
        out.fail(term + " : type does not reprint canonically");
        continue;
      }
      out.ok();
    } catch (const std::exception& ex) {
      out.fail(term + " : " + ex.what());
    }
  }
  return out;
}

// ---- criterion 2: the state example's normal forms ----

Outcome state_normal_forms() {
  Outcome out;
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"[3].set c;[5].set c", "c<_>.[5]c"},
      {"[4].set c;get c", "c<_>.[4]c.[4]"},
  };
  for (const auto& [input, expect] : cases) {
    try {
      NormalizeResult n =
          normalize(parse_computation(input), Strategy::LeftmostOutermost, 10000);
      if (!n.completed) {
        out.fail(input + " : normalization ran out of fuel");
      } else if (!alpha_equal(n.term, parse_computation(expect))) {
        out.fail(input + " : got " + show(n.term) + ", want " + expect);
      } else {
        out.ok();
      }
    } catch (const std::exception& ex) {
      out.fail(input + " : " + ex.what());
    }
  }
  return out;
}

// ---- criterion 3: machine termination within the strong budget ----

Outcome machine_termination(const std::vector<CorpusEntry>& corpus) {
  Outcome out;
  Signature sig;
  for (const CorpusEntry& e : corpus) {
    try {
      SemMem sin =
          interpret_memory(sig, e.inputs, e.gen.type.dom, MeasureKind::Strong);
      long long fuel = interpret(sig, Context{}, e.gen.term, e.gen.type,
                                 Valuation{}, MeasureKind::Strong)
                           .apply(sin)
                           .count;
      Memory mem;
      mem.stacks = e.inputs;
      RunResult r = run(mem, e.gen.term, static_cast<std::uint64_t>(fuel));
      if (!r.success())
        out.fail(show(e.gen.term) + " : no success within strong budget " +
                 std::to_string(fuel));
      else
        out.ok();
    } catch (const std::exception& ex) {
      out.fail(show(e.gen.term) + " : " + ex.what());
    }
  }
  return out;
}

// ---- criterion 4: the weak measure counts transitions exactly ----

Outcome exact_step_counts(const std::vector<CorpusEntry>& corpus) {
  Outcome out;
  Signature sig;
  for (const CorpusEntry& e : corpus) {
    try {
      SemMem win =
          interpret_memory(sig, e.inputs, e.gen.type.dom, MeasureKind::Weak);
      long long predicted = interpret(sig, Context{}, e.gen.term, e.gen.type,
                                      Valuation{}, MeasureKind::Weak)
                                .apply(win)
                                .count;
      Memory mem;
      mem.stacks = e.inputs;
      RunResult r = run(mem, e.gen.term, 1u << 22);
      if (!r.success())
        out.fail(show(e.gen.term) + " : run did not succeed");
      else if (static_cast<long long>(r.steps) != predicted)
        out.fail(show(e.gen.term) + " : predicted " + std::to_string(predicted) +
                 ", machine took " + std::to_string(r.steps));
      else
        out.ok();
    } catch (const std::exception& ex) {
      out.fail(show(e.gen.term) + " : " + ex.what());
    }
  }
  return out;
}

// ---- criterion 5: beta strictly decreases the strong collapse, pi keeps it ----

Outcome measured_reduction(const std::vector<CorpusEntry>& corpus) {
  Outcome out;
  Signature sig;
  auto floor_of = [&](const Comp& m, const CompType& ty) {
    return collapse_measure(
        interpret(sig, Context{}, m, ty, Valuation{}, MeasureKind::Strong));
  };
  for (const CorpusEntry& e : corpus) {
    try {
      NormalizeResult n =
          normalize(e.gen.term, Strategy::LeftmostOutermost, 10000, true);
      if (!n.completed) {
        out.fail(show(e.gen.term) + " : normalization ran out of fuel");
        continue;
      }
      // The trail is sequential, so each floor is computed once.
      long long before = floor_of(e.gen.term, e.gen.type);
      bool bad = false;
      for (const ReductionStep& st : n.trail) {
        long long after = floor_of(st.after, e.gen.type);
        if (st.rule == Rule::Beta && !(before > after)) {
          out.fail(show(st.before) + " : beta kept the collapse at " +
                   std::to_string(before) + " -> " + std::to_string(after));
          bad = true;
          break;
        }
        if (st.rule == Rule::Pi && before != after) {
          out.fail(show(st.before) + " : pi moved the collapse " +
                   std::to_string(before) + " -> " + std::to_string(after));
          bad = true;
          break;
        }
        before = after;
      }
      if (!bad) out.ok();
    } catch (const std::exception& ex) {
      out.fail(show(e.gen.term) + " : " + ex.what());
    }
  }
  return out;
}

// ---- criterion 6: one normal form per small term across all paths ----

Outcome single_normal_form(const std::vector<CorpusEntry>& corpus) {
  Outcome out;
  for (const CorpusEntry& e : corpus) {
    if (term_size(e.gen.term) > 15) continue;
    try {
      AllPathsResult all = all_normal_forms(e.gen.term, 50000);
      if (all.exhausted)
        out.fail(show(e.gen.term) + " : state bound hit");
      else if (all.normal_forms.size() != 1)
        out.fail(show(e.gen.term) + " : " +
                 std::to_string(all.normal_forms.size()) + " normal forms");
      else
        out.ok();
    } catch (const std::exception& ex) {
      out.fail(show(e.gen.term) + " : " + ex.what());
    }
  }
  return out;
}

// ---- criterion 7: the ten laws hold, and the oracle still separates ----

Outcome theory_validation() {
  Outcome out;
  Signature sig;
  std::mt19937_64 rng(7);
  try {
    std::vector<AxiomInstance> instances = generate_axiom_instances(sig, rng, 200);
    TheoryReport report = validate_theory(sig, instances, 2);
    out.checked += report.total;
    if (!report.ok()) {
      out.pass = false;
      for (const auto& [idx, res] : report.distinguished)
        if (out.failures.size() < 3)
          out.failures.push_back(std::string(axiom_name(instances[idx].tag)) +
                                 " instance " + std::to_string(idx) +
                                 " distinguished");
    }
  } catch (const std::exception& ex) {
    out.fail(std::string("instance generation: ") + ex.what());
  }

  // Coarseness witness: with two constants at the same base, discarding the
  // input is observably different from passing it through.
  try {
    Signature two;
    two.declare_base("a");
    two.declare_val("c", base_type("a"));
    two.declare_val("c'", base_type("a"));
    VarName x{"x", 0};
    Comp discard = pop(kMainLoc, x, base_type("a"),
                       push(vconst("c"), kMainLoc, star()));
    Comp keep = pop(kMainLoc, x, base_type("a"), push(var(x), kMainLoc, star()));
    CompType ty{MemoryType{{kMainLoc, {base_type("a")}}},
                MemoryType{{kMainLoc, {base_type("a")}}}};
    EquivResult res = machine_equiv(two, discard, keep, ty, 2);
    if (res.verdict == Verdict::Distinguished)
      out.ok();
    else
      out.fail(std::string("witness verdict ") + verdict_name(res.verdict));
  } catch (const std::exception& ex) {
    out.fail(std::string("witness: ") + ex.what());
  }
  return out;
}

// ---- criterion 8: translation round trips ----

// Arrow nesting of a memory type; the equivalence oracle must probe at
// least this deep to compare thunk outputs conclusively.
int vt_depth(const ValueType& t) {
  if (t.is_base()) return 0;
  int d = 0;
  for (const auto& [loc, st] : t.comp().dom)
    for (const auto& e : st) d = std::max(d, vt_depth(e));
  for (const auto& [loc, st] : t.comp().cod)
    for (const auto& e : st) d = std::max(d, vt_depth(e));
  return 1 + d;
}
int mem_depth(const MemoryType& m) {
  int d = 0;
  for (const auto& [loc, st] : m)
    for (const auto& e : st) d = std::max(d, vt_depth(e));
  return d;
}

Outcome translation_round_trips() {
  Outcome out;

  // (a) the interpretation retracts the functor on typed λ-terms.
  lam::LambdaSig lsig;
  lsig.bases = {"a", "b"};
  lsig.consts["k"] = lam::lbase("a");
  lsig.consts["l"] = lam::lbase("b");
  Signature fsig = functor_signature(lsig);
  std::mt19937_64 rng(8);
  lam::LamGenConfig lcfg;  // size <= 12
  for (int i = 0; i < 120; ++i) {
    lam::LamGenTerm g = lam::generate_lambda(lsig, rng, lcfg);
    try {
      lam::Lam back = interpret_slc_closed(fsig, free_functor(lsig, {}, g.term));
      if (!lam::beta_eta_equal(back, g.term))
        out.fail(lam::show(g.term) + " : came back as " + lam::show(back));
      else
        out.ok();
    } catch (const std::exception& ex) {
      out.fail(lam::show(g.term) + " : " + ex.what());
    }
  }

  // (b) collapsing the embedding reproduces staged terms up to normalization.
  Signature sig;
  sig.declare_base("t");
  sig.declare_base("s");
  LocationOrder order({kMainLoc, "c"});
  StagedGenConfig scfg;
  for (int i = 0; i < 100; ++i) {
    Comp m = generate_staged_slc(rng, scfg);
    try {
      NormalizeResult want = normalize(m, Strategy::LeftmostOutermost, 100000);
      bool good = want.completed;
      for (const std::string& at : {std::string(kMainLoc), std::string("c")}) {
        if (!good) break;
        Comp round = collapse(sig, embed(sig, order, m, at), order);
        NormalizeResult got = normalize(round, Strategy::LeftmostOutermost, 100000);
        good = got.completed && alpha_equal(got.term, want.term);
      }
      if (good)
        out.ok();
      else
        out.fail(show(m) + " : round trip changed the normal form");
    } catch (const std::exception& ex) {
      out.fail(show(m) + " : " + ex.what());
    }
  }

  // (c) the shuffles compose to the identity on generated memory types.
  GenConfig gcfg;
  EquivBudget budget;
  budget.value_budget = 3;
  budget.max_inputs = 400;
  LocationOrder full({kMainLoc, "c", "d"});
  Signature empty;
  int done = 0;
  for (int i = 0; done < 12 && i < 400; ++i) {
    MemoryType mem = generate_memory_type(rng, gcfg);
    if (mt_size(mem) == 0) continue;
    ++done;
    try {
      Comp both = sequence(kappa(mem, full), kappa_inv(mem, full));
      EquivResult res = machine_equiv(empty, both, star(), CompType{mem, mem},
                                      mem_depth(mem) + 1, budget);
      if (res.verdict != Verdict::Equivalent)
        out.fail(show_memory(mem, false) + " : verdict " +
                 verdict_name(res.verdict));
      else
        out.ok();
    } catch (const std::exception& ex) {
      out.fail(show_memory(mem, false) + " : " + ex.what());
    }
  }
  return out;
}

// ---- criterion 9: effect semantics of the strategy translations ----

Memory cell_memory() {
  Memory mem;
  mem.policies["c"] = Policy{PolicyKind::Cell, nullptr};
  mem.stacks["c"] = {vconst("0")};
  return mem;
}

bool cell_and_result(const RunResult& r, const std::string& want) {
  if (!r.success()) return false;
  auto cell = r.memory.stacks.find("c");
  if (cell == r.memory.stacks.end() || cell->second.size() != 1) return false;
  auto* stored = as<ValConst>(cell->second[0]);
  if (stored == nullptr || stored->sym != want) return false;
  auto main = r.memory.stacks.find(kMainLoc);
  if (main == r.memory.stacks.end() || main->second.size() != 1) return false;
  auto* res = as<ValConst>(main->second[0]);
  return res != nullptr && res->sym == want;
}

const std::vector<Val>& result_stack(const RunResult& r) {
  static const std::vector<Val> none;
  auto it = r.memory.stacks.find(kMainLoc);
  return it == r.memory.stacks.end() ? none : it->second;
}

std::string const_on_stack(const RunResult& r, std::size_t i) {
  const auto& st = result_stack(r);
  if (i >= st.size()) return "?";
  auto* c = as<ValConst>(st[i]);
  return c == nullptr ? "?" : c->sym;
}

RunResult force_top(Memory mem) {
  VarName d{"d", 0};
  return run(std::move(mem),
             pop(kMainLoc, d, std::nullopt, force(var(d), star())), 100000);
}

RunResult force_under_top(Memory mem) {
  VarName a{"a", 0}, b{"b", 0};
  return run(std::move(mem),
             pop(kMainLoc, a, std::nullopt,
                 pop(kMainLoc, b, std::nullopt, force(var(b), star()))),
             100000);
}

Outcome effect_semantics(double* exact_seconds) {
  Outcome out;
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();

  // Exact part: c := 3; (\x. !c) (c := 5; k).
  lam::Lam stateful = lam::lassign(
      "c", lam::lconst("3"),
      lam::lapp(lam::labs("x", lam::lderef("c")),
                lam::lassign("c", lam::lconst("5"), lam::lconst("k"))));
  RunResult rv = run(cell_memory(), cbv(stateful), 100000);
  if (cell_and_result(rv, "5"))
    out.ok();
  else
    out.fail("cbv cell run: want c=[5] and result 5");
  RunResult rn = run(cell_memory(), cbn(stateful), 100000);
  if (cell_and_result(rn, "3"))
    out.ok();
  else
    out.fail("cbn cell run: want c=[3] and result 3");
  *exact_seconds = std::chrono::duration<double>(clock::now() - t0).count();

  // Probabilistic part: (\f. \x. f (f x)) (M (+) N) applied to k.
  lam::Lam m = lam::labs("y", lam::ltuple({lam::lconst("m"), lam::lvar("y")}));
  lam::Lam n = lam::labs("y", lam::ltuple({lam::lconst("n"), lam::lvar("y")}));
  lam::Lam twice =
      lam::labs("f", lam::labs("x", lam::lapp(lam::lvar("f"),
                                              lam::lapp(lam::lvar("f"), lam::lvar("x")))));
  lam::Lam experiment =
      lam::lapp(lam::lapp(twice, lam::lchoice(m, n)), lam::lconst("k"));
  const int runs = 1000;

  std::map<std::pair<std::string, std::string>, int> vcounts;
  Comp vprog = cbv(experiment);
  bool vshape = true;
  for (int i = 0; i < runs; ++i) {
    RunResult r1 = run(default_memory(static_cast<std::uint64_t>(i)), vprog, 100000);
    RunResult r2 = force_top(r1.memory);
    RunResult r3 = force_top(r2.memory);
    if (!r3.success() || result_stack(r3).size() != 3) {
      vshape = false;
      break;
    }
    vcounts[{const_on_stack(r3, 0), const_on_stack(r3, 1)}]++;
  }
  int vmm = vcounts[{"m", "m"}], vnn = vcounts[{"n", "n"}];
  if (vshape && vmm + vnn == runs && vmm >= 450 && vmm <= 550)
    out.ok();
  else
    out.fail("cbv distribution: mm=" + std::to_string(vmm) +
             " nn=" + std::to_string(vnn) + " of " + std::to_string(runs));

  std::map<std::pair<std::string, std::string>, int> ncounts;
  Comp nprog = cbn(experiment);
  bool nshape = true;
  for (int i = 0; i < runs; ++i) {
    RunResult r1 = run(default_memory(static_cast<std::uint64_t>(i)), nprog, 100000);
    RunResult r2 = force_under_top(r1.memory);  // first coordinate
    RunResult r3 = force_top(r1.memory);        // second coordinate: a pair
    RunResult r4 = force_under_top(r3.memory);
    if (!r2.success() || !r4.success() || result_stack(r2).size() != 1 ||
        result_stack(r4).size() != 2) {
      nshape = false;
      break;
    }
    ncounts[{const_on_stack(r2, 0), const_on_stack(r4, 1)}]++;
  }
  bool joint_ok = nshape;
  for (const char* o : {"m", "n"})
    for (const char* i : {"m", "n"}) {
      int c = ncounts[{o, i}];
      if (c < 200 || c > 300) joint_ok = false;
    }
  double pm_outer = (ncounts[{"m", "m"}] + ncounts[{"m", "n"}]) / double(runs);
  double pm_inner = (ncounts[{"m", "m"}] + ncounts[{"n", "m"}]) / double(runs);
  double indep_gap =
      std::abs(ncounts[{"m", "m"}] / double(runs) - pm_outer * pm_inner);
  if (joint_ok && indep_gap <= 0.05)
    out.ok();
  else
    out.fail("cbn distribution: mm=" + std::to_string(ncounts[{"m", "m"}]) +
             " mn=" + std::to_string(ncounts[{"m", "n"}]) +
             " nm=" + std::to_string(ncounts[{"n", "m"}]) +
             " nn=" + std::to_string(ncounts[{"n", "n"}]));
  return out;
}

}  // namespace

int run_selftest(std::ostream& out) {
  using clock = std::chrono::steady_clock;
  bool all_pass = true;

  auto report = [&](int idx, const char* name, const Outcome& o, double secs,
                    double budget) {
    bool within = secs < budget;
    bool pass = o.pass && within;
    all_pass = all_pass && pass;
    char line[160];
    std::snprintf(line, sizeof line, "criterion %d  %-34s %s  (%lld checks, %.2fs / %.0fs)",
                  idx, name, pass ? "PASS" : "FAIL", o.checked, secs, budget);
    out << line << "\n";
    if (!within) out << "    over time budget\n";
    for (const std::string& f : o.failures) out << "    " << f << "\n";
  };

  auto timed = [&](auto&& fn) {
    auto t0 = clock::now();
    Outcome o = fn();
    double secs = std::chrono::duration<double>(clock::now() - t0).count();
    return std::pair<Outcome, double>(std::move(o), secs);
  };

  {
    auto [o, s] = timed(typing_goldens);
    report(1, "typing goldens", o, s, 1);
  }
  {
    auto [o, s] = timed(state_normal_forms);
    report(2, "state example normal forms", o, s, 1);
  }

  auto tc = clock::now();
  std::vector<CorpusEntry> corpus = build_corpus(500);
  double corpus_secs = std::chrono::duration<double>(clock::now() - tc).count();

  {
    auto [o, s] = timed([&] { return machine_termination(corpus); });
    report(3, "termination within strong budget", o, s + corpus_secs, 60);
  }
  {
    auto [o, s] = timed([&] { return exact_step_counts(corpus); });
    report(4, "weak measure counts steps exactly", o, s, 60);
  }
  {
    auto [o, s] = timed([&] { return measured_reduction(corpus); });
    report(5, "beta decreases, pi preserves", o, s, 120);
  }
  {
    auto [o, s] = timed([&] { return single_normal_form(corpus); });
    report(6, "one normal form across all paths", o, s, 120);
  }
  {
    auto [o, s] = timed(theory_validation);
    report(7, "equational theory via the oracle", o, s, 120);
  }
  {
    auto [o, s] = timed(translation_round_trips);
    report(8, "translation round trips", o, s, 120);
  }
  {
    double exact_secs = 0;
    auto t0 = clock::now();
    Outcome o = effect_semantics(&exact_secs);
    double secs = std::chrono::duration<double>(clock::now() - t0).count();
    o.pass = o.pass && exact_secs < 1;
    report(9, "strategy effect semantics", o, secs, 120);
  }

  out << (all_pass ? "selftest: all criteria passed"
                   : "selftest: FAILURES above")
      << "\n";
  return all_pass ? 0 : 1;
}

}  // namespace fmc
