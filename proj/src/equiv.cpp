#include "fmc/equiv.hpp"

#include <algorithm>
#include <set>

#include "fmc/check.hpp"
#include "fmc/machine.hpp"
#include "fmc/surface.hpp"

namespace fmc {

const char* axiom_name(Axiom tag) {
  switch (tag) {
    case Axiom::Id: return "id";
    case Axiom::LocalBeta: return "local-beta";
    case Axiom::Force: return "force";
    case Axiom::Thunk: return "thunk";
    case Axiom::Eta: return "eta";
    case Axiom::Diagonal: return "diagonal";
    case Axiom::Terminal: return "terminal";
    case Axiom::Interchange: return "interchange";
    case Axiom::Relocation: return "relocation";
    case Axiom::Permutation: return "permutation";
  }
  return "?";
}

const std::vector<Axiom>& all_axioms() {
  static const std::vector<Axiom> axioms{
      Axiom::Id,       Axiom::LocalBeta, Axiom::Force,       Axiom::Thunk,
      Axiom::Eta,      Axiom::Diagonal,  Axiom::Terminal,    Axiom::Interchange,
      Axiom::Relocation, Axiom::Permutation,
  };
  return axioms;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Equivalent: return "equivalent";
    case Verdict::Distinguished: return "distinguished";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

std::set<std::string> keys_of(const MemoryType& m) {
  std::set<std::string> ks;
  for (auto& [loc, st] : m) ks.insert(loc);
  return ks;
}

std::map<std::string, std::vector<VarName>> fresh_binders(const MemoryType& m,
                                                          const char* base) {
  std::map<std::string, std::vector<VarName>> b;
  int counter = 0;
  for (const std::string& loc : ordered_locs(keys_of(m)))
    for (std::size_t i = 0; i < mt_stack(m, loc).size(); ++i)
      b[loc].push_back(VarName{base, counter++});
  return b;
}

Comp pops_of(const MemoryType& m,
             const std::map<std::string, std::vector<VarName>>& binders, Comp next) {
  std::vector<std::string> locs = ordered_locs(keys_of(m));
  for (auto lit = locs.rbegin(); lit != locs.rend(); ++lit) {
    const StackType& st = mt_stack(m, *lit);
    for (std::size_t i = 0; i < st.size(); ++i)
      next = pop(*lit, binders.at(*lit)[i], st[i], std::move(next));
  }
  return next;
}

std::map<std::string, std::vector<Val>> vars_of(
    const std::map<std::string, std::vector<VarName>>& binders) {
  std::map<std::string, std::vector<Val>> out;
  for (auto& [loc, names] : binders)
    for (const VarName& x : names) out[loc].push_back(var(x));
  return out;
}

CompType typed_instance(const Signature& sig, const Comp& lhs, const Comp& rhs) {
  try {
    Checked left = infer(sig, Context{}, lhs);
    check(sig, Context{}, rhs, left.type);
    return left.type;
  } catch (const CheckError& e) {
    throw EquivError(EquivErr::IllTyped,
                     std::string("instance sides do not share a type: ") + e.what());
  }
}

// A closed producer : > s, with its output type.
MemoryType producer_output(const Signature& sig, const Comp& s_term) {
  Checked chk = infer(sig, Context{}, s_term);
  if (!mt_empty(chk.type.dom))
    throw EquivError(EquivErr::IllTyped, "producer consumes input");
  return chk.type.cod;
}

}  // namespace

AxiomInstance instantiate_axiom(const Signature& sig, Axiom tag,
                                const AxiomParams& params) {
  Comp lhs, rhs;
  switch (tag) {
    case Axiom::Id: {
      auto binders = fresh_binders(params.s, "q");
      lhs = pops_of(params.s, binders, vector_push(vars_of(binders), star()));
      rhs = star();
      break;
    }
    case Axiom::LocalBeta: {
      VarName f{"q", 0};
      lhs = push(params.value, params.loc_a,
                 pop(params.loc_a, f, std::nullopt, force(var(f), star())));
      rhs = force(params.value, star());
      break;
    }
    case Axiom::Force: {
      lhs = force(thunk(params.m), star());
      rhs = params.m;
      break;
    }
    case Axiom::Thunk: {
      lhs = push(thunk(force(params.value, star())), params.loc_a, star());
      rhs = push(params.value, params.loc_a, star());
      break;
    }
    case Axiom::Eta: {
      MemoryType s = producer_output(sig, params.producer);
      Checked n = infer(sig, Context{}, params.n);
      if (!mt_has_top(n.type.dom, s))
        throw EquivError(EquivErr::IllTyped,
                         "continuation does not consume the producer output");
      auto binders = fresh_binders(s, "q");
      Comp body = vector_push(vars_of(binders), params.n);
      lhs = sequence(params.producer,
                     pops_of(s, binders, push(thunk(body), params.loc_a, star())));
      rhs = push(thunk(sequence(params.producer, params.n)), params.loc_a, star());
      break;
    }
    case Axiom::Diagonal: {
      MemoryType s = producer_output(sig, params.producer);
      auto binders = fresh_binders(s, "q");
      lhs = sequence(params.producer,
                     pops_of(s, binders,
                             vector_push(vars_of(binders),
                                         vector_push(vars_of(binders), star()))));
      rhs = sequence(params.producer, params.producer);
      break;
    }
    case Axiom::Terminal: {
      MemoryType s = producer_output(sig, params.producer);
      auto binders = fresh_binders(s, "q");
      lhs = sequence(params.producer, pops_of(s, binders, star()));
      rhs = star();
      break;
    }
    case Axiom::Interchange: {
      MemoryType s = producer_output(sig, params.producer);
      auto binders = fresh_binders(s, "q");
      lhs = sequence(params.producer,
                     pops_of(s, binders,
                             sequence(params.p, vector_push(vars_of(binders), star()))));
      rhs = sequence(params.p, params.producer);
      break;
    }
    case Axiom::Relocation: {
      if (params.loc_a == params.loc_b)
        throw EquivError(EquivErr::SideConditionViolated, "locations must differ");
      VarName y{"q", 0};
      lhs = push(params.value, params.loc_a,
                 pop(params.loc_a, y, std::nullopt,
                     push(var(y), params.loc_b, star())));
      rhs = push(params.value, params.loc_b, star());
      break;
    }
    case Axiom::Permutation: {
      if (params.loc_a == params.loc_b)
        throw EquivError(EquivErr::SideConditionViolated, "locations must differ");
      if (free_vars(params.value).count(params.binder))
        throw EquivError(EquivErr::SideConditionViolated,
                         "binder occurs free in the pushed value");
      lhs = push(params.value, params.loc_b,
                 pop(params.loc_a, params.binder, params.pop_type, params.m));
      rhs = pop(params.loc_a, params.binder, params.pop_type,
                push(params.value, params.loc_b, params.m));
      break;
    }
  }
  return AxiomInstance{tag, lhs, rhs, typed_instance(sig, lhs, rhs)};
}

EquationInstance derived_global_beta(const Signature& sig, const Val& v,
                                     const std::string& loc, const VarName& x,
                                     const Comp& m) {
  Comp lhs = push(v, loc, pop(loc, x, std::nullopt, m));
  Comp rhs = substitute(v, x, m);
  return EquationInstance{"global-beta", lhs, rhs, typed_instance(sig, lhs, rhs)};
}

EquationInstance derived_push_permutation(const Signature& sig, const Val& v,
                                          const std::string& a, const Val& w,
                                          const std::string& b) {
  if (a == b)
    throw EquivError(EquivErr::SideConditionViolated, "locations must differ");
  Comp lhs = push(v, a, push(w, b, star()));
  Comp rhs = push(w, b, push(v, a, star()));
  return EquationInstance{"push-permutation", lhs, rhs, typed_instance(sig, lhs, rhs)};
}

EquationInstance derived_pop_permutation(const Signature& sig, const std::string& a,
                                         const VarName& x, const ValueType& tx,
                                         const std::string& b, const VarName& y,
                                         const ValueType& ty, const Comp& m) {
  if (a == b)
    throw EquivError(EquivErr::SideConditionViolated, "locations must differ");
  Comp lhs = pop(a, x, tx, pop(b, y, ty, m));
  Comp rhs = pop(b, y, ty, pop(a, x, tx, m));
  return EquationInstance{"pop-permutation", lhs, rhs, typed_instance(sig, lhs, rhs)};
}

namespace {

enum class Cmp { Eq, Neq, Unknown };

Cmp compare_values(const Signature& sig, const Val& a, const Val& b,
                   const ValueType& t, int depth, const EquivBudget& budget);

Cmp compare_memories(const Signature& sig,
                     const std::map<std::string, std::vector<Val>>& ma,
                     const std::map<std::string, std::vector<Val>>& mb,
                     const MemoryType& t, int depth, const EquivBudget& budget) {
  static const std::vector<Val> kEmpty;
  auto stack_of = [](const std::map<std::string, std::vector<Val>>& m,
                     const std::string& loc) -> const std::vector<Val>& {
    auto it = m.find(loc);
    return it == m.end() ? kEmpty : it->second;
  };

  bool unknown = false;
  for (auto& [loc, want] : t) {
    const std::vector<Val>& sa = stack_of(ma, loc);
    const std::vector<Val>& sb = stack_of(mb, loc);
    if (sa.size() != want.size() || sb.size() != want.size()) return Cmp::Unknown;
    for (std::size_t i = 0; i < want.size(); ++i) {
      Cmp c = compare_values(sig, sa[i], sb[i], want[i], depth, budget);
      if (c == Cmp::Neq) return Cmp::Neq;
      if (c == Cmp::Unknown) unknown = true;
    }
  }
  for (auto* m : {&ma, &mb})
    for (auto& [loc, st] : *m)
      if (!st.empty() && !t.count(loc)) return Cmp::Unknown;
  return unknown ? Cmp::Unknown : Cmp::Eq;
}

Cmp compare_values(const Signature& sig, const Val& a, const Val& b,
                   const ValueType& t, int depth, const EquivBudget& budget) {
  if (t.is_base()) {
    auto* ca = as<ValConst>(a);
    auto* cb = as<ValConst>(b);
    if (ca && cb) return ca->sym == cb->sym ? Cmp::Eq : Cmp::Neq;
    return Cmp::Unknown;
  }
  if (alpha_equal(a, b)) return Cmp::Eq;
  if (depth <= 0) return Cmp::Unknown;
  EquivResult r = machine_equiv(sig, force(a, star()), force(b, star()), t.comp(),
                                depth - 1, budget);
  switch (r.verdict) {
    case Verdict::Equivalent: return Cmp::Eq;
    case Verdict::Distinguished: return Cmp::Neq;
    case Verdict::Inconclusive: return Cmp::Unknown;
  }
  return Cmp::Unknown;
}

}  // namespace

EquivResult machine_equiv(const Signature& sig, const Comp& m, const Comp& n,
                          const CompType& type, int depth,
                          const EquivBudget& budget) {
  try {
    check(sig, Context{}, m, type);
    check(sig, Context{}, n, type);
  } catch (const CheckError& e) {
    throw EquivError(EquivErr::IllTyped,
                     std::string("compared terms do not check: ") + e.what());
  }

  MemoryEnum inputs = enumerate_memories(sig, type.dom, budget.value_budget,
                                         budget.max_inputs);
  bool unknown = inputs.truncated;
  EquivResult result;
  for (const auto& input : inputs.inputs) {
    Memory ma, mb;
    ma.stacks = input;
    mb.stacks = input;
    RunResult ra = run(ma, m, budget.fuel);
    RunResult rb = run(mb, n, budget.fuel);
    ++result.inputs_tested;
    if (!ra.success() || !rb.success()) {
      unknown = true;
      continue;
    }
    Cmp c = compare_memories(sig, ra.memory.stacks, rb.memory.stacks, type.cod,
                             depth, budget);
    if (c == Cmp::Neq) {
      result.verdict = Verdict::Distinguished;
      result.witness = input;
      return result;
    }
    if (c == Cmp::Unknown) unknown = true;
  }
  result.verdict = unknown ? Verdict::Inconclusive : Verdict::Equivalent;
  return result;
}

TheoryReport validate_theory(const Signature& sig,
                             const std::vector<AxiomInstance>& instances, int depth,
                             const EquivBudget& budget) {
  TheoryReport report;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const AxiomInstance& inst = instances[i];
    EquivResult r = machine_equiv(sig, inst.lhs, inst.rhs, inst.type, depth, budget);
    ++report.total;
    switch (r.verdict) {
      case Verdict::Equivalent: ++report.equivalent; break;
      case Verdict::Inconclusive: ++report.inconclusive; break;
      case Verdict::Distinguished:
        report.distinguished.emplace_back(i, std::move(r));
        break;
    }
  }
  return report;
}

std::vector<AxiomInstance> generate_axiom_instances(const Signature& sig,
                                                    std::mt19937_64& rng,
                                                    std::size_t count,
                                                    const GenConfig& cfg) {
  GenConfig small = cfg;
  small.max_size = std::min(cfg.max_size, 12);
  small.type_depth = std::min(cfg.type_depth, 2);

  auto rand_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  auto random_loc = [&]() -> std::string {
    static const std::vector<std::string> pool{kMainLoc, "c", "d"};
    return pool[static_cast<std::size_t>(rand_int(0, 2))];
  };
  auto two_locs = [&](std::string& a, std::string& b) {
    a = random_loc();
    do { b = random_loc(); } while (b == a);
  };
  auto random_value = [&]() -> Val {
    ValueType t = generate_arrow_type(rng, rand_int(0, small.type_depth), small);
    std::vector<Val> basis = values_of(sig, t, 4);
    if (basis.empty()) return canonical_inhabitant(sig, arrow_type({}, {}));
    return basis[static_cast<std::size_t>(
        rand_int(0, static_cast<int>(basis.size()) - 1))];
  };
  auto producer = [&]() -> Comp {
    MemoryType s = generate_memory_type(rng, small);
    return vector_push(generate_inputs(sig, s, rng), star());
  };

  std::vector<AxiomInstance> out;
  const std::vector<Axiom>& axioms = all_axioms();
  std::size_t next_tag = 0;
  int attempts = 0;
  while (out.size() < count && attempts < static_cast<int>(count) * 40) {
    ++attempts;
    Axiom tag = axioms[next_tag % axioms.size()];
    AxiomParams params;
    try {
      switch (tag) {
        case Axiom::Id:
          params.s = generate_memory_type(rng, small);
          break;
        case Axiom::LocalBeta:
          params.value = random_value();
          params.loc_a = random_loc();
          break;
        case Axiom::Force:
          params.m = generate_term(sig, rng, small).term;
          break;
        case Axiom::Thunk:
          params.value = random_value();
          params.loc_a = random_loc();
          break;
        case Axiom::Eta: {
          params.producer = producer();
          MemoryType s = producer_output(sig, params.producer);
          auto binders = fresh_binders(s, "r");
          params.n = pops_of(s, binders, generate_term(sig, rng, small).term);
          params.loc_a = random_loc();
          break;
        }
        case Axiom::Diagonal:
        case Axiom::Terminal:
          params.producer = producer();
          break;
        case Axiom::Interchange:
          params.producer = producer();
          params.p = generate_term(sig, rng, small).term;
          break;
        case Axiom::Relocation:
          params.value = random_value();
          two_locs(params.loc_a, params.loc_b);
          break;
        case Axiom::Permutation: {
          params.value = random_value();
          two_locs(params.loc_a, params.loc_b);
          params.pop_type = generate_arrow_type(rng, rand_int(0, small.type_depth), small);
          params.binder = VarName{"z", 0};
          Comp base = generate_term(sig, rng, small).term;
          if (rand_int(0, 1) == 0)
            base = push(var(params.binder), random_loc(), std::move(base));
          params.m = std::move(base);
          break;
        }
      }
      out.push_back(instantiate_axiom(sig, tag, params));
      ++next_tag;
    } catch (const EquivError&) {
      continue;
    } catch (const GenError&) {
      continue;
    } catch (const CheckError&) {
      continue;
    }
  }
  if (out.size() < count) throw GenError("could not build enough axiom instances");
  return out;
}

}  // namespace fmc
