#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fmc/check.hpp"
#include "fmc/equiv.hpp"
#include "fmc/gen.hpp"
#include "fmc/lambda.hpp"
#include "fmc/machine.hpp"
#include "fmc/rewrite.hpp"
#include "fmc/surface.hpp"
#include "fmc/term.hpp"
#include "fmc/translate.hpp"
#include "fmc/types.hpp"

using namespace fmc;
namespace lm = fmc::lam;
using lm::Lam;

namespace {

constexpr std::uint64_t kFuel = 100000;

lm::LambdaSig base_lsig() {
  lm::LambdaSig sig;
  sig.bases = {"a", "b"};
  sig.consts["k"] = lm::lbase("a");
  sig.consts["l"] = lm::lbase("b");
  sig.seqs["succ"] = {lm::lbase("a"), lm::lbase("a")};
  return sig;
}

RunResult run_closed(const Comp& m, std::uint64_t seed = 0) {
  return run(default_memory(seed), m, kFuel);
}

const std::vector<Val>& main_stack(const RunResult& r) {
  static const std::vector<Val> empty;
  auto it = r.memory.stacks.find(kMainLoc);
  return it == r.memory.stacks.end() ? empty : it->second;
}

std::string const_at(const RunResult& r, std::size_t i) {
  const auto& st = main_stack(r);
  REQUIRE(i < st.size());
  auto* c = as<ValConst>(st[i]);
  REQUIRE(c != nullptr);
  return c->sym;
}

// Pops the top of the main stack and forces it, keeping the rest in place.
RunResult force_top(Memory mem) {
  VarName d{"d", 0};
  return run(std::move(mem), pop(kMainLoc, d, std::nullopt, force(var(d), star())), kFuel);
}

// Pops two and forces the lower one (the upper is discarded).
RunResult force_under_top(Memory mem) {
  VarName a{"a", 0}, b{"b", 0};
  return run(std::move(mem),
             pop(kMainLoc, a, std::nullopt,
                 pop(kMainLoc, b, std::nullopt, force(var(b), star()))),
             kFuel);
}

}  // namespace

// ---- call-by-name and call-by-value clause shapes ----

TEST_CASE("cbn and cbv basic clause shapes") {
  Lam x = lm::lvar("x");
  CHECK(show(cbn(x)) == "?x");
  CHECK(show(cbv(x)) == "[x]");
  CHECK(show(cbn(lm::lconst("k"))) == "[k]");
  CHECK(show(cbv(lm::lconst("k"))) == "[k]");

  Lam id = lm::labs("x", x);
  CHECK(show(cbn(id)) == "<x>.?x");
  CHECK(show(cbv(id)) == "[!{<x>.[x]}]");

  // Application: name pushes the thunked argument and continues with the
  // function; value runs argument, then function, then forces.
  Lam app = lm::lapp(id, lm::lconst("k"));
  Comp cbn_expect = push(thunk(push(vconst("k"), kMainLoc, star())), kMainLoc,
                         pop(kMainLoc, VarName{"x", 0}, std::nullopt,
                             force(var(VarName{"x", 0}), star())));
  CHECK(alpha_equal(cbn(app), cbn_expect));

  VarName f{"f", 0};
  Comp cbv_expect = push(vconst("k"), kMainLoc,
                         push(thunk(pop(kMainLoc, VarName{"x", 0}, std::nullopt,
                                        push(var(VarName{"x", 0}), kMainLoc, star()))),
                              kMainLoc,
                              pop(kMainLoc, f, std::nullopt, force(var(f), star()))));
  CHECK(alpha_equal(cbv(app), cbv_expect));

  // Both evaluate the application to k.
  RunResult rn = run_closed(cbn(app));
  REQUIRE(rn.success());
  CHECK(const_at(rn, 0) == "k");
  RunResult rv = run_closed(cbv(app));
  REQUIRE(rv.success());
  CHECK(const_at(rv, 0) == "k");
}

TEST_CASE("cbn tuples push component thunks; cbv tuples push one thunk") {
  Lam pair = lm::ltuple({lm::lconst("k"), lm::lconst("l")});

  Comp cbn_expect = push(thunk(push(vconst("k"), kMainLoc, star())), kMainLoc,
                         push(thunk(push(vconst("l"), kMainLoc, star())), kMainLoc, star()));
  CHECK(alpha_equal(cbn(pair), cbn_expect));

  Comp cbv_expect = push(thunk(push(vconst("k"), kMainLoc,
                                    push(vconst("l"), kMainLoc, star()))),
                         kMainLoc, star());
  CHECK(alpha_equal(cbv(pair), cbv_expect));
}

TEST_CASE("pattern abstractions project tuples under both strategies") {
  Lam pair = lm::ltuple({lm::lconst("k"), lm::lconst("l")});
  Lam fst = lm::labs(lm::ptuple({lm::pvar("u"), lm::pvar("w")}), std::nullopt, lm::lvar("u"));
  Lam snd = lm::labs(lm::ptuple({lm::pvar("u"), lm::pvar("w")}), std::nullopt, lm::lvar("w"));

  for (bool value : {false, true}) {
    auto tr = [&](const Lam& m) { return value ? cbv(m) : cbn(m); };
    RunResult r1 = run_closed(tr(lm::lapp(fst, pair)));
    REQUIRE(r1.success());
    CHECK(const_at(r1, 0) == "k");
    RunResult r2 = run_closed(tr(lm::lapp(snd, pair)));
    REQUIRE(r2.success());
    CHECK(const_at(r2, 0) == "l");
  }

  // Nested patterns recurse into nested forcing.
  Lam nested = lm::ltuple({lm::lconst("k"), lm::ltuple({lm::lconst("l"), lm::lconst("k")})});
  Lam mid = lm::labs(lm::ptuple({lm::pvar("u"),
                                 lm::ptuple({lm::pvar("v"), lm::pvar("w")})}),
                     std::nullopt, lm::lvar("v"));
  for (bool value : {false, true}) {
    auto tr = [&](const Lam& m) { return value ? cbv(m) : cbn(m); };
    RunResult r = run_closed(tr(lm::lapp(mid, nested)));
    REQUIRE(r.success());
    CHECK(const_at(r, 0) == "l");
  }
}

TEST_CASE("choice draws from the rnd stream; true picks the right branch") {
  Lam choice = lm::lchoice(lm::lconst("l"), lm::lconst("r"));
  for (bool value : {false, true}) {
    Comp m = value ? cbv(choice) : cbn(choice);

    Memory mt;
    script_stream(mt, kRandLoc, {church_true()});
    RunResult rt = run(mt, m, kFuel);
    REQUIRE(rt.success());
    CHECK(const_at(rt, 0) == "r");

    Memory mf;
    script_stream(mf, kRandLoc, {church_false()});
    RunResult rf = run(mf, m, kFuel);
    REQUIRE(rf.success());
    CHECK(const_at(rf, 0) == "l");
  }
}

TEST_CASE("set_cell replaces cell content; get_cell copies it out") {
  Memory mem;
  mem.policies["c"] = Policy{PolicyKind::Cell, nullptr};
  mem.stacks["c"] = {vconst("0")};
  mem.stacks[kMainLoc] = {vconst("5")};

  RunResult rs = run(mem, set_cell("c", star()), kFuel);
  REQUIRE(rs.success());
  CHECK(main_stack(rs).empty());
  REQUIRE(rs.memory.stacks.at("c").size() == 1);
  CHECK(as<ValConst>(rs.memory.stacks.at("c")[0])->sym == "5");

  RunResult rg = run(rs.memory, get_cell("c", star()), kFuel);
  REQUIRE(rg.success());
  CHECK(const_at(rg, 0) == "5");
  REQUIRE(rg.memory.stacks.at("c").size() == 1);
  CHECK(as<ValConst>(rg.memory.stacks.at("c")[0])->sym == "5");
}

TEST_CASE("store discipline separates the strategies") {
  // c := 3; (\x. !c) (c := 5; k)
  Lam term = lm::lassign(
      "c", lm::lconst("3"),
      lm::lapp(lm::labs("x", lm::lderef("c")),
               lm::lassign("c", lm::lconst("5"), lm::lconst("k"))));

  auto fresh_mem = [] {
    Memory mem;
    mem.policies["c"] = Policy{PolicyKind::Cell, nullptr};
    mem.stacks["c"] = {vconst("0")};
    return mem;
  };

  // Value: the argument runs first, so the inner write lands and the body
  // reads 5.  Name: the unused argument never runs, the cell keeps 3.
  RunResult rv = run(fresh_mem(), cbv(term), kFuel);
  REQUIRE(rv.success());
  CHECK(const_at(rv, 0) == "5");
  CHECK(as<ValConst>(rv.memory.stacks.at("c")[0])->sym == "5");

  RunResult rn = run(fresh_mem(), cbn(term), kFuel);
  REQUIRE(rn.success());
  CHECK(const_at(rn, 0) == "3");
  CHECK(as<ValConst>(rn.memory.stacks.at("c")[0])->sym == "3");
}

// ---- the duplicated-choice experiment ----

namespace {

Lam experiment_term() {
  // ((\f. \x. f (f x)) (M (+) N)) k  with M = \y.(m, y), N = \y.(n, y)
  Lam m = lm::labs("y", lm::ltuple({lm::lconst("m"), lm::lvar("y")}));
  Lam n = lm::labs("y", lm::ltuple({lm::lconst("n"), lm::lvar("y")}));
  Lam twice = lm::labs("f", lm::labs("x", lm::lapp(lm::lvar("f"),
                                                   lm::lapp(lm::lvar("f"), lm::lvar("x")))));
  return lm::lapp(lm::lapp(twice, lm::lchoice(m, n)), lm::lconst("k"));
}

}  // namespace

TEST_CASE("value strategy samples the choice once") {
  std::map<std::pair<std::string, std::string>, int> counts;
  const int runs = 1000;
  Comp prog = cbv(experiment_term());
  for (int i = 0; i < runs; ++i) {
    RunResult r1 = run_closed(prog, static_cast<std::uint64_t>(i));
    REQUIRE(r1.success());
    REQUIRE(main_stack(r1).size() == 1);
    RunResult r2 = force_top(r1.memory);  // outer pair components
    REQUIRE(r2.success());
    REQUIRE(main_stack(r2).size() == 2);
    std::string outer = const_at(r2, 0);
    RunResult r3 = force_top(r2.memory);  // inner pair components
    REQUIRE(r3.success());
    REQUIRE(main_stack(r3).size() == 3);
    std::string inner = const_at(r3, 1);
    CHECK(const_at(r3, 2) == "k");
    counts[{outer, inner}]++;
  }
  // One draw decides both coordinates: only matched pairs, half and half.
  CHECK(counts[{"m", "n"}] == 0);
  CHECK(counts[{"n", "m"}] == 0);
  CHECK(counts[{"m", "m"}] >= 450);
  CHECK(counts[{"m", "m"}] <= 550);
  CHECK(counts[{"n", "n"}] >= 450);
  CHECK(counts[{"n", "n"}] <= 550);
}

TEST_CASE("name strategy resamples the choice at each use") {
  std::map<std::pair<std::string, std::string>, int> counts;
  const int runs = 1000;
  Comp prog = cbn(experiment_term());
  for (int i = 0; i < runs; ++i) {
    RunResult r1 = run_closed(prog, static_cast<std::uint64_t>(i));
    REQUIRE(r1.success());
    REQUIRE(main_stack(r1).size() == 2);
    RunResult r2 = force_under_top(r1.memory);  // first coordinate thunk
    REQUIRE(r2.success());
    REQUIRE(main_stack(r2).size() == 1);
    std::string outer = const_at(r2, 0);
    RunResult r3 = force_top(r1.memory);  // second coordinate: another pair
    REQUIRE(r3.success());
    REQUIRE(main_stack(r3).size() == 3);
    RunResult r4 = force_under_top(r3.memory);
    REQUIRE(r4.success());
    REQUIRE(main_stack(r4).size() == 2);
    std::string inner = const_at(r4, 1);
    counts[{outer, inner}]++;
  }
  // Two independent draws: all four outcomes at a quarter each.
  for (const auto& o : {"m", "n"})
    for (const auto& i : {"m", "n"}) {
      CHECK(counts[{o, i}] >= 200);
      CHECK(counts[{o, i}] <= 300);
    }
}

TEST_CASE("value translation agrees with direct call-by-value evaluation") {
  lm::LambdaSig lsig = base_lsig();
  lm::LamGenConfig cfg;
  cfg.products = false;
  cfg.max_size = 10;
  std::mt19937_64 rng(77);
  for (int i = 0; i < 60; ++i) {
    lm::LamGenTerm g = lm::generate_lambda(lsig, rng, cfg);
    Lam value = lm::eval_cbv(g.term);
    RunResult r = run(Memory{}, cbv(g.term), kFuel);
    REQUIRE(r.success());
    REQUIRE(main_stack(r).size() == 1);
    Comp expect = cbv(value);
    auto* p = as<Push>(expect);
    REQUIRE(p != nullptr);
    CHECK(alpha_equal(main_stack(r)[0], p->value));
  }
}

// ---- free functor into the single-location fragment ----

TEST_CASE("functor types: bases, arrows, products, unit") {
  CHECK(functor_stack(lm::lbase("a")).size() == 1);
  CHECK(functor_stack(lm::lbase("a"))[0] == base_type("a"));
  CHECK(functor_stack(lm::lprod({})).empty());

  // a -> b lands in one arrow entry over the main location.
  StackType arr = functor_stack(lm::larrow(lm::lbase("a"), lm::lbase("b")));
  REQUIRE(arr.size() == 1);
  REQUIRE(!arr[0].is_base());
  CHECK(arr[0].comp().dom == MemoryType{{kMainLoc, {base_type("a")}}});
  CHECK(arr[0].comp().cod == MemoryType{{kMainLoc, {base_type("b")}}});

  // Products concatenate in order.
  StackType pr = functor_stack(lm::lprod({lm::lbase("a"), lm::lbase("b")}));
  REQUIRE(pr.size() == 2);
  CHECK(pr[0] == base_type("a"));
  CHECK(pr[1] == base_type("b"));

  Signature fsig = functor_signature(base_lsig());
  CHECK(fsig.has_base("a"));
  REQUIRE(fsig.val_type("k") != nullptr);
  CHECK(*fsig.val_type("k") == base_type("a"));
  REQUIRE(fsig.comp_type("succ") != nullptr);
  CHECK(show(*fsig.comp_type("succ")) == "a > a");
}

TEST_CASE("functor clause shapes on small terms") {
  lm::LambdaSig lsig = base_lsig();

  // A variable pops the context and pushes it back.
  lm::LamContext one = {{"x", lm::lbase("a")}};
  Comp var_img = free_functor(lsig, one, lm::lvar("x"));
  VarName x{"x", 0};
  CHECK(alpha_equal(var_img, pop(kMainLoc, x, base_type("a"),
                                 push(var(x), kMainLoc, star()))));

  // A closed abstraction is one pushed thunk around the image of its body.
  Comp id_img = free_functor(lsig, {}, lm::labs("x", lm::lbase("a"), lm::lvar("x")));
  CHECK(alpha_equal(id_img, push(thunk(pop(kMainLoc, x, base_type("a"),
                                           push(var(x), kMainLoc, star()))),
                               kMainLoc, star())));

  // Unit is the empty computation, constants push themselves.
  CHECK(alpha_equal(free_functor(lsig, {}, lm::ltuple({})), star()));
  CHECK(alpha_equal(free_functor(lsig, {}, lm::lconst("k")),
                    push(vconst("k"), kMainLoc, star())));

  // Sequential constants postcompose their image.
  Comp seq_img = free_functor(lsig, {}, lm::lseq("succ", lm::lconst("k")));
  CHECK(alpha_equal(seq_img, push(vconst("k"), kMainLoc, seqconst("succ", star()))));
}

TEST_CASE("functor images are closed and typed at the image type") {
  lm::LambdaSig lsig = base_lsig();
  Signature fsig = functor_signature(lsig);
  std::mt19937_64 rng(5);
  lm::LamGenConfig cfg;
  for (int i = 0; i < 40; ++i) {
    lm::LamGenTerm g = lm::generate_lambda(lsig, rng, cfg);
    Comp img = free_functor(lsig, {}, g.term);
    CHECK(free_vars(img).empty());
    Checked got = infer(fsig, Context{}, img);
    CHECK(mt_empty(got.type.dom));
    StackType want = functor_stack(g.type);
    MemoryType cod;
    for (const auto& vt : want) mt_push(cod, kMainLoc, vt);
    CHECK(got.type.cod == cod);
  }
}

TEST_CASE("functor images under context expect the context stack") {
  lm::LambdaSig lsig = base_lsig();
  Signature fsig = functor_signature(lsig);
  lm::LamContext ctx = {{"x", lm::lbase("a")},
                        {"g", lm::larrow(lm::lbase("a"), lm::lbase("b"))}};
  Lam body = lm::lapp(lm::lvar("g"), lm::lvar("x"));
  Comp img = free_functor(lsig, ctx, body);
  Checked got = infer(fsig, Context{}, img);
  // Context lies bottom to top: x of type a below the arrow for g.
  MemoryType dom;
  mt_push(dom, kMainLoc, base_type("a"));
  mt_push(dom, kMainLoc, arrow_type(MemoryType{{kMainLoc, {base_type("a")}}},
                                    MemoryType{{kMainLoc, {base_type("b")}}}));
  CHECK(got.type.dom == dom);
  CHECK(got.type.cod == MemoryType{{kMainLoc, {base_type("b")}}});
}

// ---- interpretation back into the λ-calculus ----

TEST_CASE("interpretation reads stacks, thunks, and forces back") {
  Signature fsig = functor_signature(base_lsig());

  // Borrowed input becomes a free stack variable.
  VarName x{"x", 0};
  SlcInterp si = interpret_slc(fsig, pop(kMainLoc, x, base_type("a"),
                                         push(var(x), kMainLoc, star())));
  REQUIRE(si.stack_vars.size() == 1);
  CHECK(lm::show(si.stack_vars[0].second) == "a");
  CHECK(lm::alpha_equal(si.term, lm::lvar(si.stack_vars[0].first)));

  // A pushed thunk reads as an abstraction.
  Lam id_back = interpret_slc_closed(
      fsig, push(thunk(pop(kMainLoc, x, base_type("a"), push(var(x), kMainLoc, star()))),
                 kMainLoc, star()));
  CHECK(lm::beta_eta_equal(id_back, lm::labs("u", lm::lvar("u"))));

  // Unary sequential constants read as operator application.
  Lam seq_back = interpret_slc_closed(fsig, push(vconst("k"), kMainLoc,
                                                 seqconst("succ", star())));
  CHECK(lm::alpha_equal(seq_back, lm::lseq("succ", lm::lconst("k"))));

  // An empty output stack reads as unit, a wide one as a tuple.
  Lam unit_back = interpret_slc_closed(fsig, star());
  CHECK(lm::alpha_equal(unit_back, lm::ltuple({})));
  Lam pair_back = interpret_slc_closed(
      fsig, push(vconst("k"), kMainLoc, push(vconst("l"), kMainLoc, star())));
  CHECK(lm::alpha_equal(pair_back, lm::ltuple({lm::lconst("k"), lm::lconst("l")})));
}

TEST_CASE("interpretation retracts the functor up to the rewriter") {
  lm::LambdaSig lsig = base_lsig();
  Signature fsig = functor_signature(lsig);
  std::mt19937_64 rng(11);
  lm::LamGenConfig cfg;
  for (int i = 0; i < 120; ++i) {
    lm::LamGenTerm g = lm::generate_lambda(lsig, rng, cfg);
    Comp img = free_functor(lsig, {}, g.term);
    Lam back = interpret_slc_closed(fsig, img);
    CHECK(lm::beta_eta_equal(back, g.term));
  }
}

// ---- collapse, embedding, and the mediating shuffles ----

TEST_CASE("collapsed types concatenate stacks in location order") {
  LocationOrder order({kMainLoc, "c", "d"});
  CHECK(order.contains("c"));
  CHECK(!order.contains("e"));
  CHECK(order.position(kMainLoc) == 0);
  CHECK(order.position("d") == 2);
  CHECK_THROWS_AS(order.position("e"), TranslateError);
  CHECK_THROWS_AS(LocationOrder({"c", kMainLoc}), TranslateError);
  CHECK_THROWS_AS(LocationOrder({kMainLoc, "c", "c"}), TranslateError);

  MemoryType m{{"c", {base_type("t")}}, {"d", {base_type("s")}}};
  StackType flat = collapse_stack(m, order);
  REQUIRE(flat.size() == 2);
  CHECK(flat[0] == base_type("t"));
  CHECK(flat[1] == base_type("s"));

  // Entries collapse recursively: an arrow touching c becomes main-only.
  ValueType arr = arrow_type(MemoryType{{"c", {base_type("t")}}},
                             MemoryType{{kMainLoc, {base_type("s")}}});
  ValueType carr = collapse_value_type(arr, order);
  REQUIRE(!carr.is_base());
  CHECK(carr.comp().dom == MemoryType{{kMainLoc, {base_type("t")}}});
  CHECK(carr.comp().cod == MemoryType{{kMainLoc, {base_type("s")}}});
}

TEST_CASE("collapse serializes a two-location term onto the main stack") {
  Signature sig;
  sig.declare_base("t");
  sig.declare_val("v", base_type("t"));
  LocationOrder order({kMainLoc, "c", "d"});

  // [v]c.c<x>.[x] moves v through c and leaves it on the main stack.
  VarName x{"x", 0};
  Comp m = push(vconst("v"), "c",
                pop("c", x, base_type("t"), push(var(x), kMainLoc, star())));
  Checked orig = infer(sig, Context{}, m);
  Comp flat = collapse(sig, m, order);

  // The result is single-location and typed at the collapsed type.
  CHECK(free_vars(flat).empty());
  Signature csig = collapse_signature(sig, order);
  CHECK_NOTHROW(check(csig, Context{}, flat,
                      collapse_comp_type(orig.type, order)));

  RunResult r = run(Memory{}, flat, kFuel);
  REQUIRE(r.success());
  REQUIRE(main_stack(r).size() == 1);
  CHECK(as<ValConst>(main_stack(r)[0])->sym == "v");
  CHECK(r.memory.stacks.count("c") == 0);
}

TEST_CASE("collapse preserves typing on generated terms") {
  Signature sig;  // constant-free fragment
  GenConfig gcfg;
  gcfg.max_size = 18;
  LocationOrder order({kMainLoc, "c", "d"});
  Signature csig = collapse_signature(sig, order);
  std::mt19937_64 rng(21);
  int done = 0;
  for (int i = 0; done < 50 && i < 200; ++i) {
    GenTerm g = generate_term(sig, rng, gcfg);
    Comp flat = collapse(sig, g.term, order);
    CHECK_NOTHROW(check(csig, Context{}, flat, collapse_comp_type(g.type, order)));
    ++done;
  }
  CHECK(done == 50);
}

TEST_CASE("embedding relocates the single-location fragment") {
  Signature sig;
  sig.declare_base("t");
  LocationOrder order({kMainLoc, "c"});

  VarName x{"x", 0};
  Comp slc = pop(kMainLoc, x, base_type("t"), push(var(x), kMainLoc, star()));
  Comp at_c = embed(sig, order, slc, "c");
  CHECK(alpha_equal(at_c, pop("c", x, base_type("t"), push(var(x), "c", star()))));

  // Per-entry types follow: arrows over main become arrows over c.
  ValueType arr = arrow_type(MemoryType{{kMainLoc, {base_type("t")}}}, MemoryType{});
  ValueType moved = embed_value_type(arr, "c");
  REQUIRE(!moved.is_base());
  CHECK(moved.comp().dom == MemoryType{{"c", {base_type("t")}}});
}

TEST_CASE("kappa pops a memory and pushes its collapsed row") {
  LocationOrder order({kMainLoc, "c"});
  CHECK(alpha_equal(kappa(MemoryType{}, order), star()));
  CHECK(alpha_equal(kappa_inv(MemoryType{}, order), star()));

  MemoryType one{{"c", {base_type("t")}}};
  VarName x{"x", 0};
  CHECK(alpha_equal(kappa(one, order),
                    pop("c", x, base_type("t"), push(var(x), kMainLoc, star()))));
  CHECK(alpha_equal(kappa_inv(one, order),
                    pop(kMainLoc, x, base_type("t"), push(var(x), "c", star()))));

  // Off the main hub the same shuffle can stage through another location.
  CHECK(alpha_equal(kappa(one, order, "z"),
                    pop("c", x, base_type("t"), push(var(x), "z", star()))));
}

namespace {

// Arrow nesting of a memory type; the oracle probes thunk outputs this deep.
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

}  // namespace

TEST_CASE("kappa then kappa_inv is the identity behaviorally") {
  Signature sig;
  GenConfig gcfg;
  std::mt19937_64 rng(31);
  EquivBudget budget;
  budget.value_budget = 3;
  budget.max_inputs = 400;
  int done = 0;
  for (int i = 0; done < 12 && i < 400; ++i) {
    MemoryType mem = generate_memory_type(rng, gcfg);
    if (mt_size(mem) == 0) continue;
    Comp there_back = sequence(kappa(mem, LocationOrder({kMainLoc, "c", "d"})),
                               kappa_inv(mem, LocationOrder({kMainLoc, "c", "d"})));
    EquivResult res = machine_equiv(sig, there_back, star(), CompType{mem, mem},
                                    mem_depth(mem) + 1, budget);
    CHECK(res.verdict == Verdict::Equivalent);
    ++done;
  }
  CHECK(done == 12);
}

TEST_CASE("staged terms collapse back to themselves after embedding") {
  Signature sig;
  sig.declare_base("t");
  sig.declare_base("s");
  LocationOrder order({kMainLoc, "c"});
  StagedGenConfig cfg;
  std::mt19937_64 rng(41);
  for (int i = 0; i < 40; ++i) {
    Comp m = generate_staged_slc(rng, cfg);
    NormalizeResult want = normalize(m, Strategy::LeftmostOutermost, kFuel);
    REQUIRE(want.completed);
    for (const std::string& at : {std::string(kMainLoc), std::string("c")}) {
      Comp round = collapse(sig, embed(sig, order, m, at), order);
      NormalizeResult got = normalize(round, Strategy::LeftmostOutermost, kFuel);
      REQUIRE(got.completed);
      CHECK(alpha_equal(got.term, want.term));
    }
  }
}
