#include "fmc/check.hpp"

#include <algorithm>

namespace fmc {
namespace {

[[noreturn]] void fail(CheckErr k, const std::string& msg) { throw CheckError(k, msg); }

// Forward walk shared by checking (borrowing=false, fixed input) and
// inference (borrowing=true, input assembled from borrows).
struct Walk {
  const Signature& sig;
  bool borrowing = false;
  // Borrowed input entries per location, in pop order (first popped first).
  std::map<std::string, std::vector<ValueType>> borrows;
  MemoryType final_out;

  Deriv go(Context& ctx, const Comp& c, MemoryType cur);
  ValDeriv synth_value(Context& ctx, const Val& v);
  void splice(MemoryType& cur, const CompType& arrow, const std::string& what);

  MemoryType borrowed_input() const {
    MemoryType in;
    for (const auto& [loc, vec] : borrows) {
      if (vec.empty()) continue;
      in[loc] = StackType(vec.rbegin(), vec.rend());  // pop order -> bottom first
    }
    return in;
  }
};

void Walk::splice(MemoryType& cur, const CompType& arrow, const std::string& what) {
  for (const auto& [loc, need] : arrow.dom) {
    StackType have = mt_stack(cur, loc);
    std::size_t k = std::min(have.size(), need.size());
    for (std::size_t i = 0; i < k; ++i) {
      const ValueType& h = have[have.size() - 1 - i];
      const ValueType& n = need[need.size() - 1 - i];
      if (h != n)
        fail(CheckErr::AnnotationMismatch,
             what + " needs " + show(n) + " at " + loc + " but the stack holds " + show(h));
    }
    std::size_t missing = need.size() - k;
    if (missing > 0) {
      if (!borrowing)
        fail(CheckErr::LocationArityMismatch,
             what + " needs " + std::to_string(need.size()) + " values at " + loc +
                 " but only " + std::to_string(have.size()) + " are available");
      // The part below the current stack is consumed top first.
      for (std::size_t i = missing; i-- > 0;) borrows[loc].push_back(need[i]);
    }
    have.resize(have.size() - k);
    if (have.empty())
      cur.erase(loc);
    else
      cur[loc] = std::move(have);
  }
  cur = mt_over(cur, arrow.cod);
}

ValDeriv Walk::synth_value(Context& ctx, const Val& v) {
  if (auto* x = as<Var>(v)) {
    if (const ValueType* t = ctx.lookup(x->name)) return ValDeriv{*t, nullptr};
    fail(CheckErr::UnboundVariable, "unbound variable " + x->name.str());
  }
  if (auto* k = as<ValConst>(v)) {
    if (const ValueType* t = sig.val_type(k->sym)) return ValDeriv{*t, nullptr};
    fail(CheckErr::ConstantUnknown, "unknown value constant " + k->sym);
  }
  const auto* th = as<Thunk>(v);
  Walk inner{sig, /*borrowing=*/true, {}, {}};
  Deriv body = inner.go(ctx, th->body, MemoryType{});
  CompType ty{inner.borrowed_input(), inner.final_out};
  return ValDeriv{arrow_type(std::move(ty)), body};
}

Deriv Walk::go(Context& ctx, const Comp& c, MemoryType cur) {
  auto node = std::make_shared<CompDeriv>();
  MemoryType snapshot = cur;
  if (as<Star>(c)) {
    final_out = std::move(cur);
    node->type = CompType{std::move(snapshot), final_out};
    return node;
  }
  if (auto* p = as<Pop>(c)) {
    ValueType r;
    if (auto t = mt_pop(cur, p->loc)) {
      r = std::move(*t);
      if (p->ann && *p->ann != r)
        fail(CheckErr::AnnotationMismatch, "binder " + p->binder.str() + " annotated " +
                                               show(*p->ann) + " but the stack holds " + show(r));
    } else if (borrowing) {
      if (!p->ann)
        fail(CheckErr::AnnotationNeeded,
             "cannot infer the type popped into " + p->binder.str() + " at " + p->loc);
      r = *p->ann;
      borrows[p->loc].push_back(r);
    } else {
      fail(CheckErr::LocationArityMismatch, "pop at " + p->loc + " from an empty stack");
    }
    ctx.bind(p->binder, r);
    node->binder = std::move(r);
    node->next = go(ctx, p->next, std::move(cur));
    ctx.entries.pop_back();
  } else if (auto* q = as<Push>(c)) {
    ValDeriv vd = synth_value(ctx, q->value);
    mt_push(cur, q->loc, vd.type);
    node->value = std::move(vd);
    node->next = go(ctx, q->next, std::move(cur));
  } else if (auto* f = as<Force>(c)) {
    ValDeriv vd = synth_value(ctx, f->value);
    if (vd.type.is_base())
      fail(CheckErr::NotAnArrow, "forced value has base type " + show(vd.type));
    splice(cur, vd.type.comp(), "forced value");
    node->value = std::move(vd);
    node->next = go(ctx, f->next, std::move(cur));
  } else {
    auto* s = as<SeqConst>(c);
    const CompType* ct = sig.comp_type(s->sym);
    if (!ct) fail(CheckErr::ConstantUnknown, "unknown computation constant " + s->sym);
    splice(cur, *ct, "constant " + s->sym);
    node->next = go(ctx, s->next, std::move(cur));
  }
  node->type = CompType{std::move(snapshot), final_out};
  return node;
}

}  // namespace

Checked check(const Signature& sig, const Context& ctx, const Comp& term,
              const CompType& against) {
  Walk w{sig, /*borrowing=*/false, {}, {}};
  Context mut = ctx;
  Deriv d = w.go(mut, term, against.dom);
  if (w.final_out != against.cod)
    fail(CheckErr::OutputMismatch, "term produces " + show_memory(w.final_out, false) +
                                       " but the output side requires " +
                                       show_memory(against.cod, false));
  return Checked{against, std::move(d)};
}

Checked infer(const Signature& sig, const Context& ctx, const Comp& term) {
  Walk w{sig, /*borrowing=*/true, {}, {}};
  Context mut = ctx;
  Deriv d = w.go(mut, term, MemoryType{});
  return Checked{CompType{w.borrowed_input(), w.final_out}, std::move(d)};
}

ValDeriv infer_value(const Signature& sig, const Context& ctx, const Val& v) {
  Walk w{sig, /*borrowing=*/true, {}, {}};
  Context mut = ctx;
  return w.synth_value(mut, v);
}

void check_value(const Signature& sig, const Context& ctx, const Val& v,
                 const ValueType& against) {
  if (auto* th = as<Thunk>(v)) {
    if (against.is_base())
      fail(CheckErr::AnnotationMismatch, "a thunk cannot have base type " + show(against));
    Walk w{sig, /*borrowing=*/false, {}, {}};
    Context mut = ctx;
    w.go(mut, th->body, against.comp().dom);
    if (w.final_out != against.comp().cod)
      fail(CheckErr::OutputMismatch,
           "thunk body produces " + show_memory(w.final_out, false) +
               " but the type requires " + show_memory(against.comp().cod, false));
    return;
  }
  ValDeriv vd = infer_value(sig, ctx, v);
  if (vd.type != against)
    fail(CheckErr::AnnotationMismatch,
         "value has type " + show(vd.type) + " but " + show(against) + " is required");
}

// ---- lenient inference ----
//
// Unannotated pops introduce metavariables standing for whole value types,
// resolved by first-order unification against the concrete types that later
// uses demand.  Thunk bodies are inferred strictly (their borrowed pops need
// annotations); a thunk body that mentions an as-yet unresolved outer binder
// reports Unresolved rather than guessing.

namespace {

struct LVT {
  int meta = -1;  // >= 0: metavariable id; otherwise ty is valid
  ValueType ty;
};

struct LWalk {
  const Signature& sig;
  std::map<int, ValueType> bound;
  int next_meta = 0;
  std::map<std::string, std::vector<LVT>> cur;
  std::map<std::string, std::vector<LVT>> borrows;  // pop order
  std::vector<std::pair<VarName, LVT>> ctx;

  LVT meta() { return LVT{next_meta++, ValueType{}}; }

  std::optional<ValueType> resolve(const LVT& t) const {
    if (t.meta < 0) return t.ty;
    auto it = bound.find(t.meta);
    if (it == bound.end()) return std::nullopt;
    return it->second;
  }

  void unify(const LVT& have, const ValueType& want, const std::string& what) {
    if (auto got = resolve(have)) {
      if (*got != want)
        fail(CheckErr::AnnotationMismatch,
             what + ": has type " + show(*got) + " but " + show(want) + " is required");
      return;
    }
    bound[have.meta] = want;
  }

  const LVT* lookup(const VarName& x) const {
    for (auto it = ctx.rbegin(); it != ctx.rend(); ++it)
      if (it->first == x) return &it->second;
    return nullptr;
  }

  LVT synth(const Val& v) {
    if (auto* x = as<Var>(v)) {
      if (const LVT* t = lookup(x->name)) return *t;
      fail(CheckErr::UnboundVariable, "unbound variable " + x->name.str());
    }
    if (auto* k = as<ValConst>(v)) {
      if (const ValueType* t = sig.val_type(k->sym)) return LVT{-1, *t};
      fail(CheckErr::ConstantUnknown, "unknown value constant " + k->sym);
    }
    // Thunk: infer the body strictly under the resolved part of the context.
    const auto* th = as<Thunk>(v);
    Context strict;
    std::vector<VarName> unresolved;
    for (const auto& [name, lt] : ctx) {
      if (auto t = resolve(lt))
        strict.bind(name, *t);
      else
        unresolved.push_back(name);
    }
    std::set<VarName> fv = free_vars(th->body);
    for (const VarName& name : unresolved)
      if (fv.count(name))
        fail(CheckErr::Unresolved,
             "thunk uses " + name.str() + " whose type is not yet determined; annotate it");
    Checked c = infer(sig, strict, th->body);
    return LVT{-1, arrow_type(c.type)};
  }

  void splice(const CompType& arrow, const std::string& what) {
    for (const auto& [loc, need] : arrow.dom) {
      auto& have = cur[loc];
      std::size_t k = std::min(have.size(), need.size());
      for (std::size_t i = 0; i < k; ++i)
        unify(have[have.size() - 1 - i], need[need.size() - 1 - i], what);
      std::size_t missing = need.size() - k;
      for (std::size_t i = missing; i-- > 0;) borrows[loc].push_back(LVT{-1, need[i]});
      have.resize(have.size() - k);
    }
    for (const auto& [loc, add] : arrow.cod)
      for (const ValueType& t : add) cur[loc].push_back(LVT{-1, t});
  }

  void go(const Comp& c) {
    if (as<Star>(c)) return;
    if (auto* p = as<Pop>(c)) {
      LVT r;
      auto& have = cur[p->loc];
      if (!have.empty()) {
        r = have.back();
        have.pop_back();
        if (p->ann) unify(r, *p->ann, "binder " + p->binder.str());
      } else {
        r = p->ann ? LVT{-1, *p->ann} : meta();
        borrows[p->loc].push_back(r);
      }
      ctx.emplace_back(p->binder, r);
      go(p->next);
      ctx.pop_back();
      return;
    }
    if (auto* q = as<Push>(c)) {
      cur[q->loc].push_back(synth(q->value));
      go(q->next);
      return;
    }
    if (auto* f = as<Force>(c)) {
      LVT t = synth(f->value);
      auto got = resolve(t);
      if (!got)
        fail(CheckErr::Unresolved, "forced value has no determined type yet; annotate it");
      if (got->is_base()) fail(CheckErr::NotAnArrow, "forced value has base type " + show(*got));
      splice(got->comp(), "forced value");
      go(f->next);
      return;
    }
    auto* s = as<SeqConst>(c);
    const CompType* ct = sig.comp_type(s->sym);
    if (!ct) fail(CheckErr::ConstantUnknown, "unknown computation constant " + s->sym);
    splice(*ct, "constant " + s->sym);
    go(s->next);
  }

  ValueType force_resolve(const LVT& t) const {
    auto got = resolve(t);
    if (!got)
      fail(CheckErr::Unresolved, "type not determined by any use; the term is polymorphic");
    return *got;
  }
};

}  // namespace

CompType infer_lenient(const Signature& sig, const Context& ctx, const Comp& term) {
  LWalk w{sig, {}, 0, {}, {}, {}};
  for (const auto& [name, t] : ctx.entries) w.ctx.emplace_back(name, LVT{-1, t});
  w.go(term);
  CompType out;
  for (const auto& [loc, vec] : w.borrows) {
    if (vec.empty()) continue;
    StackType st;
    for (auto it = vec.rbegin(); it != vec.rend(); ++it) st.push_back(w.force_resolve(*it));
    out.dom[loc] = std::move(st);
  }
  for (const auto& [loc, vec] : w.cur) {
    if (vec.empty()) continue;
    StackType st;
    for (const LVT& t : vec) st.push_back(w.force_resolve(t));
    out.cod[loc] = std::move(st);
  }
  return out;
}

}  // namespace fmc
