#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fmc/machine.hpp"
#include "fmc/measure.hpp"
#include "fmc/rewrite.hpp"
#include "fmc/surface.hpp"

using namespace fmc;

namespace {

// the empty arrow ( > )
ValueType unit_arrow() { return arrow_type(MemoryType{}, MemoryType{}); }

MemoryType main_stack(std::vector<ValueType> ts) {
  return MemoryType{{kMainLoc, StackType{ts.begin(), ts.end()}}};
}

CompType ct(MemoryType d, MemoryType c) { return CompType{std::move(d), std::move(c)}; }

SemFun interp(const std::string& text, const CompType& ty, MeasureKind k,
              const Signature& sig = Signature{}, const Context& ctx = Context{},
              const Valuation& v = Valuation{}) {
  return interpret(sig, ctx, parse_computation(text), ty, v, k);
}

long long coll(const std::string& text, const CompType& ty, MeasureKind k) {
  return collapse_measure(interp(text, ty, k));
}

// a probe that behaves like the zero element but reports extra cost
SemFun probe(const ValueType& t, long long cost) {
  SemFun z = zero_element(t);
  SemFun p = z;
  p.apply = [z, cost](const SemMem& s) {
    SemCount r = z.apply(s);
    r.count += cost;
    return r;
  };
  return p;
}

}  // namespace

TEST_CASE("zero elements collapse to zero and reject base types") {
  ValueType sigma = unit_arrow();
  CHECK(collapse_measure(zero_element(sigma)) == 0);

  ValueType nested = arrow_type(main_stack({sigma}), main_stack({sigma, sigma}));
  SemFun z = zero_element(nested);
  SemCount r = z.apply(zero_memory(nested.comp().dom));
  CHECK(r.count == 0);
  REQUIRE(r.mem.count(kMainLoc) == 1);
  CHECK(r.mem.at(kMainLoc).size() == 2);
  CHECK(collapse_measure(r.mem.at(kMainLoc)[0]) == 0);

  CHECK_THROWS_AS(zero_element(base_type("t")), MeasureError);
  try {
    zero_element(base_type("t"));
  } catch (const MeasureError& e) {
    CHECK(e.kind == MeasureErr::OutOfFragment);
  }
}

TEST_CASE("the trailing star costs nothing and returns its input") {
  ValueType sigma = unit_arrow();
  SemFun f = interp("*", ct(main_stack({sigma}), main_stack({sigma})),
                    MeasureKind::Strong);
  SemCount r = f.apply(SemMem{{kMainLoc, {probe(sigma, 7)}}});
  CHECK(r.count == 0);
  REQUIRE(r.mem.at(kMainLoc).size() == 1);
  CHECK(collapse_measure(r.mem.at(kMainLoc)[0]) == 7);
}

TEST_CASE("push then pop costs two on the empty memory, weak and strong") {
  CompType ty = ct({}, {});
  CHECK(coll("[!{*}].<x>", ty, MeasureKind::Weak) == 2);
  CHECK(coll("[!{*}].<x>", ty, MeasureKind::Strong) == 2);
}

TEST_CASE("collapse of the strong identity abstraction is two") {
  ValueType sigma = unit_arrow();
  CompType ty = ct(main_stack({sigma}), main_stack({sigma}));
  CHECK(coll("<x>.[x]", ty, MeasureKind::Strong) == 2);
  CHECK(coll("<x>.[x]", ty, MeasureKind::Weak) == 2);
}

TEST_CASE("weak interpretation counts machine steps exactly") {
  ValueType sigma = unit_arrow();
  Signature sig;

  SUBCASE("force of a popped thunk") {
    Comp m = parse_computation("<x>.?x.[x]");
    CompType ty = ct(main_stack({sigma}), main_stack({sigma}));

    Memory mem;
    mem.stacks[kMainLoc] = {thunk(star())};
    RunResult run_res = run(mem, m, 1000);
    REQUIRE(run_res.success());
    CHECK(run_res.steps == 3);

    SemMem in = interpret_memory(sig, {{kMainLoc, {thunk(star())}}}, ty.dom,
                                 MeasureKind::Weak);
    SemFun f = interpret(sig, Context{}, m, ty, Valuation{}, MeasureKind::Weak);
    SemCount r = f.apply(in);
    CHECK(r.count == run_res.steps);
    CHECK(r.mem.at(kMainLoc).size() == 1);
  }

  SUBCASE("forced value that produces output") {
    Comp m = parse_computation("<f>.?f");
    ValueType tau = arrow_type({}, main_stack({sigma}));
    CompType ty = ct(main_stack({tau}), main_stack({sigma}));

    Val v = thunk(parse_computation("[!{*}]"));
    Memory mem;
    mem.stacks[kMainLoc] = {v};
    RunResult run_res = run(mem, m, 1000);
    REQUIRE(run_res.success());
    CHECK(run_res.steps == 3);

    SemMem in = interpret_memory(sig, {{kMainLoc, {v}}}, ty.dom, MeasureKind::Weak);
    SemCount r = interpret(sig, Context{}, m, ty, Valuation{}, MeasureKind::Weak)
                     .apply(in);
    CHECK(r.count == 3);
    CHECK(r.mem.at(kMainLoc).size() == 1);
  }

  SUBCASE("nested thunk application") {
    Comp m = parse_computation("[!{<x:(>)>.?x}].<f>.?f");
    CompType ty = ct(main_stack({sigma}), MemoryType{});

    Memory mem;
    mem.stacks[kMainLoc] = {thunk(star())};
    RunResult run_res = run(mem, m, 1000);
    REQUIRE(run_res.success());
    CHECK(run_res.steps == 5);

    SemMem in = interpret_memory(sig, {{kMainLoc, {thunk(star())}}}, ty.dom,
                                 MeasureKind::Weak);
    long long weak = interpret(sig, Context{}, m, ty, Valuation{}, MeasureKind::Weak)
                         .apply(in)
                         .count;
    CHECK(weak == run_res.steps);

    SemMem sin = interpret_memory(sig, {{kMainLoc, {thunk(star())}}}, ty.dom,
                                  MeasureKind::Strong);
    long long strong =
        interpret(sig, Context{}, m, ty, Valuation{}, MeasureKind::Strong)
            .apply(sin)
            .count;
    CHECK(strong == 7);
    CHECK(strong >= run_res.steps);
  }
}

TEST_CASE("substituting a value matches extending the valuation") {
  ValueType sigma = unit_arrow();
  Comp m = parse_computation("?x.?x");
  Val n = thunk(star());
  Signature sig;

  Comp substituted = substitute(n, VarName{"x", 0}, m);
  long long lhs = collapse_measure(
      interpret(sig, Context{}, substituted, ct({}, {}), Valuation{}, MeasureKind::Strong));

  Context ctx;
  ctx.bind(VarName{"x", 0}, sigma);
  Valuation v;
  v.insert_or_assign(VarName{"x", 0}, interpret_value(sig, n, sigma, MeasureKind::Strong));
  long long rhs = collapse_measure(
      interpret(sig, ctx, m, ct({}, {}), v, MeasureKind::Strong));

  CHECK(lhs == 2);
  CHECK(lhs == rhs);
}

TEST_CASE("a beta step strictly decreases the strong collapse") {
  Comp t = parse_computation("[!{*}].<x>.?x.?x");
  CompType ty = ct({}, {});
  long long before = collapse_measure(
      interpret(Signature{}, Context{}, t, ty, Valuation{}, MeasureKind::Strong));
  CHECK(before == 4);

  auto rs = find_redexes(t);
  REQUIRE(!rs.empty());
  REQUIRE(rs[0].rule == Rule::Beta);
  Comp reduced = apply_redex(t, rs[0]);
  long long after = collapse_measure(
      interpret(Signature{}, Context{}, reduced, ty, Valuation{}, MeasureKind::Strong));
  CHECK(after == 2);
  CHECK(before > after);
}

TEST_CASE("a phi step costs exactly one") {
  Comp t = parse_computation("?!{[!{*}]}.<x>");
  CompType ty = ct({}, {});
  long long before = collapse_measure(
      interpret(Signature{}, Context{}, t, ty, Valuation{}, MeasureKind::Strong));

  auto rs = find_redexes(t);
  REQUIRE(!rs.empty());
  REQUIRE(rs[0].rule == Rule::Phi);
  Comp reduced = apply_redex(t, rs[0]);
  long long after = collapse_measure(
      interpret(Signature{}, Context{}, reduced, ty, Valuation{}, MeasureKind::Strong));
  CHECK(before == 3);
  CHECK(after == 2);
  CHECK(before == after + 1);
}

TEST_CASE("a pi step preserves the strong interpretation") {
  ValueType sigma = unit_arrow();
  Comp t = parse_computation("[!{*}].c<y>.?y");
  CompType ty = ct(MemoryType{{"c", {sigma}}}, main_stack({sigma}));

  auto rs = find_redexes(t);
  REQUIRE(!rs.empty());
  REQUIRE(rs[0].rule == Rule::Pi);
  Comp swapped = apply_redex(t, rs[0]);

  SemFun f = interpret(Signature{}, Context{}, t, ty, Valuation{}, MeasureKind::Strong);
  SemFun g = interpret(Signature{}, Context{}, swapped, ty, Valuation{}, MeasureKind::Strong);
  CHECK(collapse_measure(f) == collapse_measure(g));

  SemMem in{{"c", {probe(sigma, 5)}}};
  CHECK(f.apply(in).count == 8);
  CHECK(g.apply(in).count == 8);
}

TEST_CASE("a tau step never increases the strong collapse") {
  CompType ty = ct({}, main_stack({unit_arrow()}));
  long long before = coll("[!{?!{*}}]", ty, MeasureKind::Strong);
  long long after = coll("[!{*}]", ty, MeasureKind::Strong);
  CHECK(before == 2);
  CHECK(after == 1);
  CHECK(before >= after);
}

TEST_CASE("interpretations are monotone in their input") {
  ValueType sigma = unit_arrow();
  SemFun f = interp("<x>.?x", ct(main_stack({sigma}), {}), MeasureKind::Strong);
  long long at_zero = f.apply(SemMem{{kMainLoc, {zero_element(sigma)}}}).count;
  long long at_probe = f.apply(SemMem{{kMainLoc, {probe(sigma, 1)}}}).count;
  CHECK(at_zero == 2);
  CHECK(at_probe == 3);
  CHECK(at_probe >= at_zero);
}

TEST_CASE("interpreting a memory checks shape and fragment") {
  ValueType sigma = unit_arrow();
  ValueType tau = arrow_type({}, main_stack({sigma}));
  Signature sig;

  SemMem in = interpret_memory(
      sig, {{kMainLoc, {thunk(star())}}, {"c", {thunk(parse_computation("[!{*}]"))}}},
      MemoryType{{kMainLoc, {sigma}}, {"c", {tau}}}, MeasureKind::Strong);
  CHECK(collapse_measure(in.at(kMainLoc)[0]) == 0);
  CHECK(collapse_measure(in.at("c")[0]) == 1);

  CHECK_THROWS_AS(interpret_memory(sig, {}, MemoryType{{kMainLoc, {sigma}}},
                                   MeasureKind::Strong),
                  MeasureError);
  CHECK_THROWS_AS(interpret_memory(sig, {{"d", {thunk(star())}}}, MemoryType{},
                                   MeasureKind::Strong),
                  MeasureError);

  Signature nums;
  nums.declare_base("Z");
  nums.declare_val("3", base_type("Z"));
  CHECK_THROWS_AS(interpret_memory(nums, {{kMainLoc, {vconst("3")}}},
                                   MemoryType{{kMainLoc, {base_type("Z")}}},
                                   MeasureKind::Strong),
                  MeasureError);
}

TEST_CASE("constants fall outside the interpreted fragment") {
  Signature sig;
  sig.declare_comp("noop", CompType{{}, {}});
  SemFun f = interp("noop", ct({}, {}), MeasureKind::Strong, sig);
  CHECK_THROWS_AS(collapse_measure(f), MeasureError);

  Signature withval;
  withval.declare_val("k", unit_arrow());
  Comp pushes_const = push(vconst("k"), kMainLoc, star());
  SemFun g = interpret(withval, Context{}, pushes_const,
                       ct({}, main_stack({unit_arrow()})), Valuation{},
                       MeasureKind::Strong);
  try {
    collapse_measure(g);
    FAIL("expected an out-of-fragment error");
  } catch (const MeasureError& e) {
    CHECK(e.kind == MeasureErr::OutOfFragment);
  }
}

TEST_CASE("an uncovered free variable is reported at application time") {
  ValueType sigma = unit_arrow();
  Context ctx;
  ctx.bind(VarName{"x", 0}, sigma);
  SemFun f = interpret(Signature{}, ctx, parse_computation("?x"), ct({}, {}),
                       Valuation{}, MeasureKind::Strong);
  try {
    f.apply(SemMem{});
    FAIL("expected a mismatch error");
  } catch (const MeasureError& e) {
    CHECK(e.kind == MeasureErr::DerivationMismatch);
  }

  Valuation v = least_valuation(ctx);
  CHECK(v.count(VarName{"x", 0}) == 1);
  SemFun ok = interpret(Signature{}, ctx, parse_computation("?x"), ct({}, {}), v,
                        MeasureKind::Strong);
  CHECK(collapse_measure(ok) == 1);
}

TEST_CASE("the strong collapse bounds machine runs along reduction") {
  // normalized and original terms measure consistently with their runs
  Comp t = parse_computation("[!{<x:(>)>.[x].[x]}].<f>.?f");
  ValueType sigma = unit_arrow();
  CompType ty = ct(main_stack({sigma}), main_stack({sigma, sigma}));

  SemMem in = interpret_memory(Signature{}, {{kMainLoc, {thunk(star())}}}, ty.dom,
                               MeasureKind::Strong);
  long long fuel =
      interpret(Signature{}, Context{}, t, ty, Valuation{}, MeasureKind::Strong)
          .apply(in)
          .count;

  Memory mem;
  mem.stacks[kMainLoc] = {thunk(star())};
  RunResult r = run(mem, t, fuel);
  REQUIRE(r.success());
  CHECK(r.steps <= fuel);

  NormalizeResult n = normalize(t, Strategy::LeftmostOutermost, 1000);
  REQUIRE(n.completed);
  Memory mem2;
  mem2.stacks[kMainLoc] = {thunk(star())};
  RunResult r2 = run(mem2, n.term, fuel);
  REQUIRE(r2.success());
  CHECK(r2.steps <= fuel);
}
