#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fmc/check.hpp"
#include "fmc/machine.hpp"
#include "fmc/rewrite.hpp"
#include "fmc/surface.hpp"

using namespace fmc;

namespace {

VarName vn(const char* b, int i = 0) { return VarName{b, i}; }

Comp nf(const std::string& s, Strategy st = Strategy::LeftmostOutermost) {
  NormalizeResult r = normalize(parse_computation(s), st, 10000);
  REQUIRE(r.completed);
  return r.term;
}

}  // namespace

TEST_CASE("redex enumeration finds the four shapes") {
  CHECK(find_redexes(star()).empty());

  auto rs = find_redexes(parse_computation("[v]a.a<x>.?x"));
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].rule == Rule::Beta);
  CHECK(rs[0].path.empty());

  rs = find_redexes(parse_computation("[x]c.d<y>.[y]d"));
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].rule == Rule::Pi);

  rs = find_redexes(parse_computation("?!{[1]}.[2]"));
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].rule == Rule::Phi);

  rs = find_redexes(parse_computation("[!{?v}]"));
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].rule == Rule::Tau);
}

TEST_CASE("redexes are found inside thunks and pushed values") {
  // the beta sits inside a pushed thunk
  auto rs = find_redexes(parse_computation("[!{[v]a.a<x>.?x}]b"));
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].rule == Rule::Beta);
  CHECK(rs[0].path == std::vector<int>{1});

  // and below a pop along the spine
  rs = find_redexes(parse_computation("<w>.[v]a.a<x>.?x"));
  REQUIRE(rs.size() == 1);
  CHECK(rs[0].path == std::vector<int>{0});
}

TEST_CASE("beta substitutes capture-avoidingly") {
  Comp t = parse_computation("[y].<x>.<y>.[x]");
  auto rs = find_redexes(t);
  REQUIRE(rs.size() == 1);
  Comp r = apply_redex(t, rs[0]);
  CHECK(alpha_equal(r, pop(kMainLoc, vn("z"), std::nullopt,
                           push(var("y"), kMainLoc, star()))));
}

TEST_CASE("phi splices the thunk body") {
  Comp t = parse_computation("[!{[7]}]a.a<x>.?x.[2]");
  NormalizeResult r = normalize(t, Strategy::LeftmostOutermost, 100, true);
  REQUIRE(r.completed);
  CHECK(r.steps == 2);
  CHECK(r.trail[0].rule == Rule::Beta);
  CHECK(r.trail[1].rule == Rule::Phi);
  CHECK(alpha_equal(r.term, parse_computation("[7].[2]")));
}

TEST_CASE("tau collapses a forwarding thunk in value position") {
  Comp t = parse_computation("[!{?v}]");
  Comp r = apply_redex(t, find_redexes(t)[0]);
  CHECK(alpha_equal(r, parse_computation("[v]")));
}

TEST_CASE("pi swaps a push past a pop of another location") {
  Comp t = parse_computation("[3].c<x>.[x]");
  auto rs = find_redexes(t);
  REQUIRE(rs.size() == 1);
  REQUIRE(rs[0].rule == Rule::Pi);
  Comp r = apply_redex(t, rs[0]);
  CHECK(alpha_equal(r, parse_computation("c<x>.[3].[x]")));
}

TEST_CASE("pi freshens a binder that shadows the pushed value") {
  // [x]c.<x>.[x] steps to <y>.[x]c.[y] as an alpha-class
  Comp t = push(var("x"), "c",
                pop(kMainLoc, vn("x"), std::nullopt, push(var("x"), kMainLoc, star())));
  auto rs = find_redexes(t);
  REQUIRE(rs.size() == 1);
  REQUIRE(rs[0].rule == Rule::Pi);
  Comp r = apply_redex(t, rs[0]);
  Comp expect = pop(kMainLoc, vn("y"), std::nullopt,
                    push(var("x"), "c", push(var("y"), kMainLoc, star())));
  CHECK(alpha_equal(r, expect));
  CHECK(free_vars(r) == std::set<VarName>{vn("x")});
}

TEST_CASE("stale redexes are rejected") {
  Comp t = parse_computation("[v]a.a<x>.?x");
  Redex bogus{Rule::Phi, {}};
  CHECK_THROWS_AS(apply_redex(t, bogus), RewriteError);
  Redex deep{Rule::Beta, {0, 0, 0, 0}};
  CHECK_THROWS_AS(apply_redex(t, deep), RewriteError);
}

TEST_CASE("the state examples normalize to their reduced forms") {
  CHECK(alpha_equal(nf("[3].set c;[5].set c"), parse_computation("c<_>.[5]c")));
  CHECK(alpha_equal(nf("[4].set c;get c"), parse_computation("c<_>.[4]c.[4]")));
  CHECK(alpha_equal(nf("*"), star()));
  CHECK(normalize(star(), Strategy::LeftmostOutermost, 10).steps == 0);
}

TEST_CASE("strategies pick different redexes but meet at the normal form") {
  Comp t = parse_computation("[1].<x>.[x].[2].<y>.[y]");
  NormalizeResult lo = normalize(t, Strategy::LeftmostOutermost, 100, true);
  NormalizeResult ri = normalize(t, Strategy::RightmostInnermost, 100, true);
  REQUIRE(lo.completed);
  REQUIRE(ri.completed);
  CHECK_FALSE(alpha_equal(lo.trail[0].after, ri.trail[0].after));
  CHECK(alpha_equal(lo.term, ri.term));
  CHECK(alpha_equal(lo.term, parse_computation("[1].[2]")));
}

TEST_CASE("fuel exhaustion reports an incomplete normalization") {
  NormalizeResult r = normalize(parse_computation("[1].<x>.[2].<y>.[3].<z>"),
                                Strategy::LeftmostOutermost, 1);
  CHECK_FALSE(r.completed);
  CHECK(r.steps == 1);
}

TEST_CASE("all-paths exploration returns one normal form class here") {
  AllPathsResult r =
      all_normal_forms(parse_computation("[3].set c;[5].set c"), 10000);
  CHECK_FALSE(r.exhausted);
  REQUIRE(r.normal_forms.size() == 1);
  CHECK(alpha_equal(r.normal_forms[0], parse_computation("c<_>.[5]c")));

  AllPathsResult s = all_normal_forms(star(), 10);
  REQUIRE(s.normal_forms.size() == 1);
  CHECK(alpha_equal(s.normal_forms[0], star()));
}

TEST_CASE("permutation unlocks the state chain and preserves meaning") {
  Comp t = parse_computation("set c;set d;get c");
  NormalizeResult r = normalize(t, Strategy::LeftmostOutermost, 1000, true);
  REQUIRE(r.completed);
  bool used_pi = false;
  for (const auto& step : r.trail) used_pi |= step.rule == Rule::Pi;
  CHECK(used_pi);

  Memory mem;
  mem.stacks[kMainLoc] = {vconst("1"), vconst("2")};
  mem.stacks["c"] = {vconst("0")};
  mem.stacks["d"] = {vconst("0")};
  RunResult orig = run(mem, t, 1000);
  RunResult redu = run(mem, r.term, 1000);
  REQUIRE(orig.success());
  REQUIRE(redu.success());
  CHECK(memory_strings(orig.memory) == memory_strings(redu.memory));
  CHECK(redu.steps <= orig.steps);
}

TEST_CASE("the permutation measure decreases by one per pi step") {
  Comp t = parse_computation("[a].[b]c.<y>.d<z>.[z]");
  CHECK(pi_measure(t) == 3);

  Comp chain = parse_computation("set c;set d;get c");
  NormalizeResult r = normalize(chain, Strategy::LeftmostOutermost, 1000, true);
  for (const auto& step : r.trail)
    if (step.rule == Rule::Pi)
      CHECK(pi_measure(step.after) + 1 == pi_measure(step.before));
}

TEST_CASE("reduction preserves the inferred type") {
  Signature sig;
  Comp t = parse_computation("[!{<x:t>.[x]}].<f>.?f");
  std::string ty = show(infer(sig, Context{}, t).type);
  NormalizeResult r = normalize(t, Strategy::LeftmostOutermost, 100, true);
  REQUIRE(r.completed);
  for (const auto& step : r.trail)
    CHECK(show(infer(sig, Context{}, step.after).type) == ty);
  CHECK(alpha_equal(r.term, parse_computation("<x>.[x]")));
}
