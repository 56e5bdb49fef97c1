#include "fmc/gen.hpp"

#include <algorithm>
#include <set>

#include "fmc/check.hpp"
#include "fmc/surface.hpp"

namespace fmc {

namespace {

int rand_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::vector<std::string> location_pool(const GenConfig& cfg) {
  std::vector<std::string> locs{kMainLoc, "c", "d"};
  std::size_t n = static_cast<std::size_t>(std::max(1, cfg.max_locations));
  if (locs.size() > n) locs.resize(n);
  return locs;
}

std::set<std::string> keys_of(const MemoryType& m) {
  std::set<std::string> ks;
  for (auto& [loc, st] : m) ks.insert(loc);
  return ks;
}

// Fresh binder names for every entry of a memory type, bottom-first per
// location.
std::map<std::string, std::vector<VarName>> make_binders(const MemoryType& m,
                                                         int& counter) {
  std::map<std::string, std::vector<VarName>> b;
  for (const std::string& loc : ordered_locs(keys_of(m)))
    for (std::size_t i = 0; i < mt_stack(m, loc).size(); ++i)
      b[loc].push_back(VarName{"p", counter++});
  return b;
}

// Annotated pop of a whole memory type: top of each stack first, first
// location outermost.
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

}  // namespace

ValueType generate_arrow_type(std::mt19937_64& rng, int depth, const GenConfig& cfg) {
  if (depth <= 0) return arrow_type(MemoryType{}, MemoryType{});
  std::vector<std::string> locs = location_pool(cfg);
  auto side = [&]() {
    MemoryType m;
    int n = rand_int(rng, 0, 2);
    for (int i = 0; i < n; ++i) {
      const std::string& loc = locs[static_cast<std::size_t>(
          rand_int(rng, 0, static_cast<int>(locs.size()) - 1))];
      mt_push(m, loc, generate_arrow_type(rng, rand_int(rng, 0, depth - 1), cfg));
    }
    return m;
  };
  MemoryType dom = side();
  MemoryType cod = side();
  return arrow_type(std::move(dom), std::move(cod));
}

MemoryType generate_memory_type(std::mt19937_64& rng, const GenConfig& cfg) {
  std::vector<std::string> locs = location_pool(cfg);
  MemoryType m;
  int n = rand_int(rng, 0, 3);
  for (int i = 0; i < n; ++i) {
    const std::string& loc = locs[static_cast<std::size_t>(
        rand_int(rng, 0, static_cast<int>(locs.size()) - 1))];
    mt_push(m, loc, generate_arrow_type(rng, rand_int(rng, 0, cfg.type_depth), cfg));
  }
  return m;
}

namespace {

struct TermGen {
  const Signature& sig;
  std::mt19937_64& rng;
  const GenConfig& cfg;
  std::vector<std::string> locs;
  int counter = 0;

  using Env = std::vector<std::pair<VarName, ValueType>>;

  const std::string& random_loc() {
    return locs[static_cast<std::size_t>(
        rand_int(rng, 0, static_cast<int>(locs.size()) - 1))];
  }

  VarName fresh() { return VarName{"g", counter++}; }

  // Moves keep the walked memory type honest, so the result typechecks by
  // construction; budget is an exact bound on the final term size.
  Comp go(MemoryType cur, Env env, int budget) {
    if (budget <= 1) return star();

    enum Move { Star_, Pop_, Borrow, PushVar, PushThunk, ForceVar };
    struct Choice {
      Move move;
      std::string loc;
      std::size_t var = 0;
    };
    std::vector<Choice> pool;
    pool.push_back({Star_, "", 0});
    for (auto& [loc, st] : cur)
      if (!st.empty())
        for (int w = 0; w < 3; ++w) pool.push_back({Pop_, loc, 0});
    for (const std::string& loc : locs)
      if (mt_stack(cur, loc).empty()) pool.push_back({Borrow, loc, 0});
    if (!env.empty() && budget >= 3)
      for (int w = 0; w < 3; ++w)
        pool.push_back({PushVar, random_loc(),
                        static_cast<std::size_t>(
                            rand_int(rng, 0, static_cast<int>(env.size()) - 1))});
    if (budget >= 4)
      for (int w = 0; w < 2; ++w) pool.push_back({PushThunk, random_loc(), 0});
    for (std::size_t i = 0; i < env.size(); ++i) {
      const ValueType& t = env[i].second;
      if (!t.is_base() && budget >= 3 && mt_has_top(cur, t.comp().dom))
        for (int w = 0; w < 4; ++w) pool.push_back({ForceVar, "", i});
    }

    Choice c = pool[static_cast<std::size_t>(
        rand_int(rng, 0, static_cast<int>(pool.size()) - 1))];
    switch (c.move) {
      case Star_:
        return star();
      case Pop_: {
        MemoryType next = cur;
        ValueType t = *mt_pop(next, c.loc);
        VarName x = fresh();
        env.emplace_back(x, t);
        return pop(c.loc, x, t, go(std::move(next), std::move(env), budget - 1));
      }
      case Borrow: {
        ValueType t = generate_arrow_type(rng, rand_int(rng, 0, cfg.type_depth), cfg);
        VarName x = fresh();
        env.emplace_back(x, t);
        return pop(c.loc, x, t, go(std::move(cur), std::move(env), budget - 1));
      }
      case PushVar: {
        auto [x, t] = env[c.var];
        MemoryType next = cur;
        mt_push(next, c.loc, t);
        return push(var(x), c.loc, go(std::move(next), std::move(env), budget - 2));
      }
      case PushThunk: {
        int body_budget = rand_int(rng, 1, std::min(budget - 3, 9));
        Comp body = go(MemoryType{}, env, body_budget);
        Context ctx;
        for (auto& [x, t] : env) ctx.bind(x, t);
        ValueType t = arrow_type(infer(sig, ctx, body).type);
        int cost = 2 + static_cast<int>(term_size(body));
        MemoryType next = cur;
        mt_push(next, c.loc, t);
        return push(thunk(std::move(body)), c.loc,
                    go(std::move(next), std::move(env), budget - cost));
      }
      case ForceVar: {
        auto [x, t] = env[c.var];
        CompType arrow = t.comp();
        MemoryType next = mt_over(mt_strip_top(cur, arrow.dom), arrow.cod);
        return force(var(x), go(std::move(next), std::move(env), budget - 2));
      }
    }
    return star();
  }
};

}  // namespace

GenTerm generate_term(const Signature& sig, std::mt19937_64& rng, const GenConfig& cfg) {
  TermGen g{sig, rng, cfg, location_pool(cfg), 0};
  Comp term = g.go(MemoryType{}, {}, cfg.max_size);
  if (!free_vars(term).empty()) throw GenError("generated term is not closed");
  if (term_size(term) > static_cast<std::size_t>(cfg.max_size))
    throw GenError("generated term exceeds the size budget");
  Checked chk = infer(sig, Context{}, term);
  check(sig, Context{}, term, chk.type);
  return GenTerm{std::move(term), std::move(chk.type)};
}

Val canonical_inhabitant(const Signature& sig, const ValueType& t) {
  if (t.is_base()) {
    std::vector<std::string> syms = sig.vals_of_base(t.base);
    if (syms.empty()) throw GenError("no constant inhabits base type " + t.base);
    return vconst(syms[0]);
  }
  CompType arrow = t.comp();
  std::map<std::string, std::vector<Val>> pushes;
  for (auto& [loc, st] : arrow.cod)
    for (const ValueType& vt : st) pushes[loc].push_back(canonical_inhabitant(sig, vt));
  int counter = 0;
  std::map<std::string, std::vector<VarName>> binders = make_binders(arrow.dom, counter);
  return thunk(pops_of(arrow.dom, binders, vector_push(pushes, star())));
}

std::vector<Val> values_of(const Signature& sig, const ValueType& t, int budget) {
  if (budget <= 0) budget = 1;
  std::vector<Val> out;
  std::set<std::string> seen;
  auto add = [&](const Val& v) {
    std::string key = show(v);
    if (seen.insert(key).second) out.push_back(v);
  };

  if (t.is_base()) {
    for (const std::string& sym : sig.vals_of_base(t.base)) add(vconst(sym));
  } else {
    CompType arrow = t.comp();
    int counter = 0;
    std::map<std::string, std::vector<VarName>> binders = make_binders(arrow.dom, counter);

    // slots to fill: one per codomain entry, in push order
    struct Slot {
      std::string loc;
      ValueType type;
    };
    std::vector<Slot> slots;
    for (const std::string& loc : ordered_locs(keys_of(arrow.cod)))
      for (const ValueType& vt : mt_stack(arrow.cod, loc)) slots.push_back({loc, vt});

    // options per slot: popped variables of fitting type, then smaller values
    std::vector<std::vector<Val>> options(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
      for (const std::string& loc : ordered_locs(keys_of(arrow.dom))) {
        const StackType& st = mt_stack(arrow.dom, loc);
        for (std::size_t j = 0; j < st.size(); ++j)
          if (st[j] == slots[i].type) options[i].push_back(var(binders[loc][j]));
      }
      int sub = budget > 2 ? 2 : 1;
      for (const Val& v : values_of(sig, slots[i].type, sub)) options[i].push_back(v);
      if (options[i].empty()) return {};  // slot uninhabited: no closed values
    }

    // bounded cartesian product over the slots
    std::size_t cap = static_cast<std::size_t>(budget) * 4 + 4;
    std::vector<std::size_t> idx(slots.size(), 0);
    for (std::size_t produced = 0; produced < cap; ++produced) {
      std::map<std::string, std::vector<Val>> pushes;
      for (std::size_t i = 0; i < slots.size(); ++i)
        pushes[slots[i].loc].push_back(options[i][idx[i]]);
      add(thunk(pops_of(arrow.dom, binders, vector_push(pushes, star()))));

      if (slots.empty()) break;
      std::size_t k = slots.size();
      while (k > 0 && ++idx[k - 1] == options[k - 1].size()) idx[--k] = 0;
      if (k == 0) break;
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const Val& a, const Val& b) {
    std::size_t sa = term_size(a), sb = term_size(b);
    if (sa != sb) return sa < sb;
    return show(a) < show(b);
  });
  if (out.size() > static_cast<std::size_t>(budget))
    out.resize(static_cast<std::size_t>(budget));
  return out;
}

MemoryEnum enumerate_memories(const Signature& sig, const MemoryType& m,
                              int value_budget, std::size_t max_inputs) {
  struct Slot {
    std::string loc;
    std::vector<Val> basis;
  };
  std::vector<Slot> slots;
  for (const std::string& loc : ordered_locs(keys_of(m)))
    for (const ValueType& vt : mt_stack(m, loc)) {
      Slot s{loc, values_of(sig, vt, value_budget)};
      if (s.basis.empty()) return MemoryEnum{{}, false};  // uninhabited input type
      slots.push_back(std::move(s));
    }

  MemoryEnum result;
  std::vector<std::size_t> idx(slots.size(), 0);
  while (true) {
    if (result.inputs.size() >= max_inputs) {
      result.truncated = true;
      break;
    }
    std::map<std::string, std::vector<Val>> mem;
    for (std::size_t i = 0; i < slots.size(); ++i)
      mem[slots[i].loc].push_back(slots[i].basis[idx[i]]);
    result.inputs.push_back(std::move(mem));
    if (slots.empty()) break;
    std::size_t k = slots.size();
    while (k > 0 && ++idx[k - 1] == slots[k - 1].basis.size()) idx[--k] = 0;
    if (k == 0) break;
  }
  return result;
}

std::map<std::string, std::vector<Val>> generate_inputs(const Signature& sig,
                                                        const MemoryType& dom,
                                                        std::mt19937_64& rng,
                                                        int value_budget) {
  std::map<std::string, std::vector<Val>> mem;
  for (auto& [loc, st] : dom)
    for (const ValueType& vt : st) {
      std::vector<Val> basis = values_of(sig, vt, value_budget);
      if (basis.empty()) throw GenError("no closed value inhabits an input slot");
      mem[loc].push_back(basis[static_cast<std::size_t>(
          rand_int(rng, 0, static_cast<int>(basis.size()) - 1))]);
    }
  return mem;
}

}  // namespace fmc
