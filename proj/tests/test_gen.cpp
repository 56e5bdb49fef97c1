#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fmc/check.hpp"
#include "fmc/gen.hpp"
#include "fmc/machine.hpp"
#include "fmc/surface.hpp"

using namespace fmc;

namespace {

bool comp_in_fragment(const Comp& c);

bool val_in_fragment(const Val& v) {
  if (as<ValConst>(v)) return false;
  if (auto* th = as<Thunk>(v)) return comp_in_fragment(th->body);
  return true;
}

bool comp_in_fragment(const Comp& c) {
  if (as<Star>(c)) return true;
  if (as<SeqConst>(c)) return false;
  if (auto* p = as<Pop>(c)) return comp_in_fragment(p->next);
  if (auto* pu = as<Push>(c))
    return val_in_fragment(pu->value) && comp_in_fragment(pu->next);
  auto* f = as<Force>(c);
  return val_in_fragment(f->value) && comp_in_fragment(f->next);
}

}  // namespace

TEST_CASE("generated terms are closed, bounded, typed and constant-free") {
  Signature sig;
  std::mt19937_64 rng(42);
  for (int i = 0; i < 200; ++i) {
    GenTerm g = generate_term(sig, rng);
    CHECK(free_vars(g.term).empty());
    CHECK(term_size(g.term) <= 25);
    CHECK(comp_in_fragment(g.term));
    CHECK_NOTHROW(check(sig, Context{}, g.term, g.type));
  }
}

TEST_CASE("generation is deterministic per seed") {
  Signature sig;
  std::mt19937_64 a(7), b(7), c(8);
  GenTerm ga = generate_term(sig, a);
  GenTerm gb = generate_term(sig, b);
  CHECK(show(ga.term) == show(gb.term));
  bool all_same = true;
  std::mt19937_64 a2(7);
  for (int i = 0; i < 10; ++i) {
    GenTerm x = generate_term(sig, a2);
    GenTerm y = generate_term(sig, c);
    if (show(x.term) != show(y.term)) all_same = false;
  }
  CHECK(!all_same);
}

TEST_CASE("the size budget is honored for small configurations") {
  Signature sig;
  GenConfig cfg;
  cfg.max_size = 15;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    GenTerm g = generate_term(sig, rng, cfg);
    CHECK(term_size(g.term) <= 15);
  }
}

TEST_CASE("canonical inhabitants follow the pop-then-push construction") {
  Signature sig;
  sig.declare_base("a");
  sig.declare_val("k", base_type("a"));

  CHECK(alpha_equal(canonical_inhabitant(sig, arrow_type({}, {})), thunk(star())));
  CHECK(alpha_equal(canonical_inhabitant(sig, base_type("a")), vconst("k")));

  // ?a > !a: pop the input, push the canonical constant
  ValueType t = arrow_type(MemoryType{{kMainLoc, {base_type("a")}}},
                           MemoryType{{kMainLoc, {base_type("a")}}});
  Val v = canonical_inhabitant(sig, t);
  Program env;
  env.sig = sig;
  CHECK(alpha_equal(v, thunk(parse_computation("<x:a>.[k]", env))));

  Signature empty;
  CHECK_THROWS_AS(canonical_inhabitant(empty, base_type("a")), GenError);
}

TEST_CASE("value bases enumerate identity and constant functions") {
  Signature sig;
  sig.declare_base("a");
  sig.declare_val("k", base_type("a"));

  ValueType t = arrow_type(MemoryType{{kMainLoc, {base_type("a")}}},
                           MemoryType{{kMainLoc, {base_type("a")}}});
  std::vector<Val> basis = values_of(sig, t, 5);
  REQUIRE(basis.size() == 2);
  Program env;
  env.sig = sig;
  bool has_id = false, has_const = false;
  for (const Val& v : basis) {
    if (alpha_equal(v, thunk(parse_computation("<x:a>.[x]", env)))) has_id = true;
    if (alpha_equal(v, thunk(parse_computation("<x:a>.[k]", env)))) has_const = true;
  }
  CHECK(has_id);
  CHECK(has_const);

  CHECK(values_of(sig, base_type("a"), 5).size() == 1);
  sig.declare_val("k2", base_type("a"));
  CHECK(values_of(sig, base_type("a"), 5).size() == 2);
  CHECK(values_of(sig, base_type("b"), 5).empty());
}

TEST_CASE("memory enumeration is the capped product of the bases") {
  Signature sig;
  sig.declare_base("a");
  sig.declare_val("c1", base_type("a"));
  sig.declare_val("c2", base_type("a"));

  MemoryType two{{kMainLoc, {base_type("a"), base_type("a")}}};
  MemoryEnum full = enumerate_memories(sig, two, 5, 64);
  CHECK(full.inputs.size() == 4);
  CHECK(!full.truncated);

  MemoryEnum capped = enumerate_memories(sig, two, 5, 3);
  CHECK(capped.inputs.size() == 3);
  CHECK(capped.truncated);

  MemoryEnum empty = enumerate_memories(sig, MemoryType{}, 5, 64);
  CHECK(empty.inputs.size() == 1);
  CHECK(empty.inputs[0].empty());

  MemoryType dead{{kMainLoc, {base_type("b")}}};
  CHECK(enumerate_memories(sig, dead, 5, 64).inputs.empty());
}

TEST_CASE("generated inputs fit the domain and runs succeed") {
  Signature sig;
  std::mt19937_64 rng(3);
  int successes = 0;
  for (int i = 0; i < 60; ++i) {
    GenTerm g = generate_term(sig, rng);
    auto inputs = generate_inputs(sig, g.type.dom, rng);
    for (auto& [loc, st] : g.type.dom) {
      REQUIRE(inputs.at(loc).size() == st.size());
      for (std::size_t j = 0; j < st.size(); ++j)
        CHECK_NOTHROW(check_value(sig, Context{}, inputs.at(loc)[j], st[j]));
    }
    Memory mem;
    mem.stacks = inputs;
    RunResult r = run(mem, g.term, 100000);
    if (r.success()) ++successes;
  }
  CHECK(successes == 60);
}

TEST_CASE("runs compose with step counts adding") {
  Signature sig;
  std::mt19937_64 rng(9);
  int composed_pairs = 0;
  for (int i = 0; i < 120 && composed_pairs < 30; ++i) {
    GenConfig cfg;
    cfg.max_size = 12;
    GenTerm m = generate_term(sig, rng, cfg);
    GenTerm n = generate_term(sig, rng, cfg);
    Comp composed = sequence(m.term, n.term);
    CompType joint;
    try {
      // annotated pops in n can clash with outputs of m; skip such pairs
      joint = infer(sig, Context{}, composed).type;
    } catch (const CheckError&) {
      continue;
    }
    ++composed_pairs;

    auto inputs = generate_inputs(sig, joint.dom, rng);
    Memory all;
    all.stacks = inputs;
    RunResult whole = run(all, composed, 100000);
    REQUIRE(whole.success());

    Memory first;
    first.stacks = inputs;
    RunResult left = run(first, m.term, 100000);
    REQUIRE(left.success());
    Memory second = left.memory;
    RunResult right = run(second, n.term, 100000);
    REQUIRE(right.success());

    CHECK(whole.steps == left.steps + right.steps);
    CHECK(memory_strings(whole.memory) == memory_strings(right.memory));
  }
  CHECK(composed_pairs == 30);
}

TEST_CASE("checking is stable under expansion") {
  Signature sig;
  std::mt19937_64 rng(21);
  for (int i = 0; i < 40; ++i) {
    GenTerm g = generate_term(sig, rng);
    MemoryType extra = generate_memory_type(rng);
    CompType expanded{mt_under(extra, g.type.dom), mt_under(extra, g.type.cod)};
    CHECK_NOTHROW(check(sig, Context{}, g.term, expanded));
  }
}
