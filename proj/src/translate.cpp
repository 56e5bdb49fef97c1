#include "fmc/translate.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace fmc {

namespace {

VarName take_fresh(const std::string& hint, std::set<VarName>& used) {
  VarName v = fresh_name(VarName{hint, 0}, used);
  used.insert(v);
  return v;
}

void lam_names(const lam::Lam& m, std::set<VarName>& out) {
  if (auto* v = lam::as<lam::LVar>(m)) {
    out.insert(VarName{v->name, 0});
    return;
  }
  if (lam::as<lam::LConst>(m) || lam::as<lam::LDeref>(m)) return;
  if (auto* s = lam::as<lam::LSeq>(m)) return lam_names(s->arg, out);
  if (auto* a = lam::as<lam::LApp>(m)) {
    lam_names(a->fn, out);
    lam_names(a->arg, out);
    return;
  }
  if (auto* f = lam::as<lam::LAbs>(m)) {
    for (const std::string& x : lam::pattern_vars(f->pat))
      out.insert(VarName{x, 0});
    lam_names(f->body, out);
    return;
  }
  if (auto* t = lam::as<lam::LTuple>(m)) {
    for (const lam::Lam& q : t->parts) lam_names(q, out);
    return;
  }
  if (auto* c = lam::as<lam::LChoice>(m)) {
    lam_names(c->left, out);
    lam_names(c->right, out);
    return;
  }
  auto* g = lam::as<lam::LAssign>(m);
  lam_names(g->value, out);
  lam_names(g->body, out);
}

}  // namespace

// ---- cell access ----

Comp set_cell(const std::string& cell, Comp next) {
  std::set<VarName> avoid = all_names(next);
  VarName x = fresh_name(VarName{"x", 0}, avoid);
  avoid.insert(x);
  VarName old = fresh_name(VarName{"_", 0}, avoid);
  return pop(kMainLoc, x, std::nullopt,
             pop(cell, old, std::nullopt, push(var(x), cell, std::move(next))));
}

Comp get_cell(const std::string& cell, Comp next) {
  std::set<VarName> avoid = all_names(next);
  VarName x = fresh_name(VarName{"x", 0}, avoid);
  return pop(cell, x, std::nullopt,
             push(var(x), cell, push(var(x), kMainLoc, std::move(next))));
}

// ---- call-by-name ----

namespace {

struct Cbn {
  std::set<VarName> used;

  // Pops the components of a forced tuple, last component first.
  Comp bind_parts(const std::vector<lam::Pattern>& parts, std::size_t i, Comp next) {
    if (i == 0) return next;
    return bind_one(parts[i - 1], bind_parts(parts, i - 1, std::move(next)));
  }

  Comp bind_one(const lam::Pattern& p, Comp next) {
    if (auto* v = lam::as<lam::PVar>(p))
      return pop(kMainLoc, VarName{v->name, 0}, std::nullopt, std::move(next));
    auto* ps = lam::as<lam::PTuple>(p);
    VarName q = take_fresh("p", used);
    return pop(kMainLoc, q, std::nullopt,
               force(var(q), bind_parts(ps->parts, ps->parts.size(), std::move(next))));
  }

  Comp go(const lam::Lam& m) {
    if (auto* v = lam::as<lam::LVar>(m)) return force(var(VarName{v->name, 0}), star());
    if (auto* k = lam::as<lam::LConst>(m)) return push(vconst(k->sym), kMainLoc, star());
    if (auto* s = lam::as<lam::LSeq>(m))
      return sequence(go(s->arg), seqconst(s->sym, star()));
    if (auto* a = lam::as<lam::LApp>(m))
      return push(thunk(go(a->arg)), kMainLoc, go(a->fn));
    if (auto* f = lam::as<lam::LAbs>(m)) return bind_one(f->pat, go(f->body));
    if (auto* t = lam::as<lam::LTuple>(m)) {
      Comp out = star();
      for (auto it = t->parts.rbegin(); it != t->parts.rend(); ++it)
        out = push(thunk(go(*it)), kMainLoc, std::move(out));
      return out;
    }
    if (auto* c = lam::as<lam::LChoice>(m)) {
      VarName b = take_fresh("b", used);
      return pop(kRandLoc, b, std::nullopt,
                 push(thunk(go(c->left)), kMainLoc,
                      push(thunk(go(c->right)), kMainLoc, force(var(b), star()))));
    }
    if (auto* g = lam::as<lam::LAssign>(m))
      return sequence(go(g->value), set_cell(g->cell, go(g->body)));
    auto* d = lam::as<lam::LDeref>(m);
    return get_cell(d->cell, star());
  }
};

}  // namespace

Comp cbn(const lam::Lam& m) {
  Cbn t;
  lam_names(m, t.used);
  return t.go(m);
}

// ---- call-by-value ----

namespace {

struct Cbv {
  std::set<VarName> used;

  Comp bind_parts(const std::vector<lam::Pattern>& parts, std::size_t i, Comp next) {
    if (i == 0) return next;
    return bind_one(parts[i - 1], bind_parts(parts, i - 1, std::move(next)));
  }

  Comp bind_one(const lam::Pattern& p, Comp next) {
    if (auto* v = lam::as<lam::PVar>(p))
      return pop(kMainLoc, VarName{v->name, 0}, std::nullopt, std::move(next));
    auto* ps = lam::as<lam::PTuple>(p);
    VarName q = take_fresh("p", used);
    return pop(kMainLoc, q, std::nullopt,
               force(var(q), bind_parts(ps->parts, ps->parts.size(), std::move(next))));
  }

  Comp go(const lam::Lam& m) {
    if (auto* v = lam::as<lam::LVar>(m))
      return push(var(VarName{v->name, 0}), kMainLoc, star());
    if (auto* k = lam::as<lam::LConst>(m)) return push(vconst(k->sym), kMainLoc, star());
    if (auto* s = lam::as<lam::LSeq>(m))
      return sequence(go(s->arg), seqconst(s->sym, star()));
    if (auto* a = lam::as<lam::LApp>(m)) {
      VarName f = take_fresh("f", used);
      return sequence(
          go(a->arg),
          sequence(go(a->fn),
                   pop(kMainLoc, f, std::nullopt, force(var(f), star()))));
    }
    if (auto* f = lam::as<lam::LAbs>(m))
      return push(thunk(bind_one(f->pat, go(f->body))), kMainLoc, star());
    if (auto* t = lam::as<lam::LTuple>(m)) {
      Comp body = star();
      for (auto it = t->parts.rbegin(); it != t->parts.rend(); ++it)
        body = sequence(go(*it), std::move(body));
      return push(thunk(std::move(body)), kMainLoc, star());
    }
    if (auto* c = lam::as<lam::LChoice>(m)) {
      VarName b = take_fresh("b", used);
      return pop(kRandLoc, b, std::nullopt,
                 push(thunk(go(c->left)), kMainLoc,
                      push(thunk(go(c->right)), kMainLoc, force(var(b), star()))));
    }
    if (auto* g = lam::as<lam::LAssign>(m))
      return sequence(go(g->value), set_cell(g->cell, go(g->body)));
    auto* d = lam::as<lam::LDeref>(m);
    return get_cell(d->cell, star());
  }
};

}  // namespace

Comp cbv(const lam::Lam& m) {
  Cbv t;
  lam_names(m, t.used);
  return t.go(m);
}

// ---- location order ----

LocationOrder::LocationOrder() : locs{kMainLoc} {}

LocationOrder::LocationOrder(std::vector<std::string> ls) : locs(std::move(ls)) {
  auto it = std::find(locs.begin(), locs.end(), kMainLoc);
  if (it == locs.end())
    locs.insert(locs.begin(), kMainLoc);
  else if (it != locs.begin())
    throw TranslateError(TranslateErr::UnknownLocation,
                         "the main location must come first in the order");
  std::set<std::string> seen;
  for (const std::string& l : locs)
    if (!seen.insert(l).second)
      throw TranslateError(TranslateErr::UnknownLocation,
                           "duplicate location " + l + " in order");
}

bool LocationOrder::contains(const std::string& loc) const {
  return std::find(locs.begin(), locs.end(), loc) != locs.end();
}

std::size_t LocationOrder::position(const std::string& loc) const {
  auto it = std::find(locs.begin(), locs.end(), loc);
  if (it == locs.end())
    throw TranslateError(TranslateErr::UnknownLocation,
                         "location " + loc + " is not in the order");
  return static_cast<std::size_t>(it - locs.begin());
}

// ---- λ-terms into the single-location fragment ----

namespace {

MemoryType main_mem(StackType s) {
  MemoryType m;
  if (!s.empty()) m[kMainLoc] = std::move(s);
  return m;
}

}  // namespace

StackType functor_stack(const lam::LType& t) {
  if (auto* b = std::get_if<lam::LBase>(&t->node)) return {base_type(b->name)};
  if (std::get_if<lam::LArrow>(&t->node)) return {functor_value_type(t)};
  StackType out;
  for (const lam::LType& q : std::get_if<lam::LProd>(&t->node)->parts)
    for (ValueType& v : functor_stack(q)) out.push_back(std::move(v));
  return out;
}

ValueType functor_value_type(const lam::LType& t) {
  if (auto* b = std::get_if<lam::LBase>(&t->node)) return base_type(b->name);
  if (auto* f = std::get_if<lam::LArrow>(&t->node))
    return arrow_type(main_mem(functor_stack(f->dom)),
                      main_mem(functor_stack(f->cod)));
  throw TranslateError(TranslateErr::IllTyped,
                       "a product type spans several stack entries: " +
                           lam::show(t));
}

Signature functor_signature(const lam::LambdaSig& lsig) {
  Signature sig;
  for (const std::string& b : lsig.bases) sig.declare_base(b);
  for (const auto& [sym, ty] : lsig.consts) {
    auto* b = std::get_if<lam::LBase>(&ty->node);
    if (!b)
      throw TranslateError(TranslateErr::UnsupportedConstruct,
                           "value constant " + sym + " must have base type");
    sig.declare_val(sym, base_type(b->name));
  }
  for (const auto& [sym, dc] : lsig.seqs)
    sig.declare_comp(sym, CompType{main_mem(functor_stack(dc.first)),
                                   main_mem(functor_stack(dc.second))});
  return sig;
}

namespace {

struct FunctorCtx {
  // One vector of stack variables per context entry, bottom first.
  struct Entry {
    std::string lname;
    std::vector<std::pair<VarName, ValueType>> slots;
  };
  std::vector<Entry> entries;
  std::set<VarName> used;
};

FunctorCtx ctx_vectors(const lam::LamContext& ctx) {
  FunctorCtx out;
  for (const auto& [x, ty] : ctx) {
    FunctorCtx::Entry e{x, {}};
    StackType st = functor_stack(ty);
    for (std::size_t j = 0; j < st.size(); ++j)
      e.slots.emplace_back(take_fresh(x, out.used), st[j]);
    out.entries.push_back(std::move(e));
  }
  return out;
}

// <?x>.next: pops every context slot, the topmost slot first, annotated.
Comp pop_ctx(const FunctorCtx& vecs, Comp next) {
  for (const auto& e : vecs.entries)
    for (const auto& [name, ty] : e.slots)
      next = pop(kMainLoc, name, ty, std::move(next));
  return next;
}

// [!x].next: pushes every context slot back, bottom first.
Comp push_ctx(const FunctorCtx& vecs, Comp next) {
  for (auto e = vecs.entries.rbegin(); e != vecs.entries.rend(); ++e)
    for (auto s = e->slots.rbegin(); s != e->slots.rend(); ++s)
      next = push(var(s->first), kMainLoc, std::move(next));
  return next;
}

Comp push_entry(const FunctorCtx::Entry& e, Comp next) {
  for (auto s = e.slots.rbegin(); s != e.slots.rend(); ++s)
    next = push(var(s->first), kMainLoc, std::move(next));
  return next;
}

// A pattern against its type as flat context entries, bottom first; unit
// components vanish.
void flatten_pattern(const lam::Pattern& p, const lam::LType& ty,
                     lam::LamContext& out) {
  if (auto* v = lam::as<lam::PVar>(p)) {
    out.emplace_back(v->name, ty);
    return;
  }
  auto* ps = lam::as<lam::PTuple>(p);
  auto* prod = std::get_if<lam::LProd>(&ty->node);
  if (!prod || prod->parts.size() != ps->parts.size())
    throw TranslateError(TranslateErr::IllTyped,
                         "pattern " + lam::show(p) + " does not fit type " +
                             lam::show(ty));
  for (std::size_t i = 0; i < ps->parts.size(); ++i)
    flatten_pattern(ps->parts[i], prod->parts[i], out);
}

struct Functor {
  const lam::LambdaSig& lsig;

  lam::LType type_of(const lam::LamContext& ctx, const lam::Lam& m) {
    try {
      return lam::check(lsig, ctx, m);
    } catch (const lam::LamError& e) {
      throw TranslateError(TranslateErr::IllTyped, e.what());
    }
  }

  Comp go(const lam::LamContext& ctx, const lam::Lam& m) {
    FunctorCtx vecs = ctx_vectors(ctx);
    if (auto* v = lam::as<lam::LVar>(m)) {
      for (auto it = vecs.entries.rbegin(); it != vecs.entries.rend(); ++it)
        if (it->lname == v->name)
          return pop_ctx(vecs, push_entry(*it, star()));
      throw TranslateError(TranslateErr::IllTyped, "unbound variable " + v->name);
    }
    if (auto* k = lam::as<lam::LConst>(m)) {
      auto it = lsig.consts.find(k->sym);
      if (it == lsig.consts.end() || !std::get_if<lam::LBase>(&it->second->node))
        throw TranslateError(TranslateErr::UnsupportedConstruct,
                             "value constant " + k->sym + " must have base type");
      return pop_ctx(vecs, push(vconst(k->sym), kMainLoc, star()));
    }
    if (auto* s = lam::as<lam::LSeq>(m)) {
      if (!lsig.seqs.count(s->sym))
        throw TranslateError(TranslateErr::IllTyped, "unknown constant " + s->sym);
      return sequence(go(ctx, s->arg), seqconst(s->sym, star()));
    }
    if (auto* a = lam::as<lam::LApp>(m)) {
      lam::LType fty = type_of(ctx, a->fn);
      ValueType fv = functor_value_type(fty);
      if (fv.is_base())
        throw TranslateError(TranslateErr::IllTyped,
                             "applied term has base type " + lam::show(fty));
      VarName f = take_fresh("f", vecs.used);
      Comp tail = pop(kMainLoc, f, fv, force(var(f), star()));
      Comp body = sequence(go(ctx, a->arg),
                           push_ctx(vecs, sequence(go(ctx, a->fn), std::move(tail))));
      return pop_ctx(vecs, push_ctx(vecs, std::move(body)));
    }
    if (auto* f = lam::as<lam::LAbs>(m)) {
      if (!f->ann)
        throw TranslateError(TranslateErr::IllTyped,
                             "abstraction over " + lam::show(f->pat) +
                                 " needs a domain type");
      lam::LamContext inner;
      flatten_pattern(f->pat, *f->ann, inner);
      inner.insert(inner.end(), ctx.begin(), ctx.end());
      Comp body = push_ctx(vecs, go(inner, f->body));
      return pop_ctx(vecs, push(thunk(std::move(body)), kMainLoc, star()));
    }
    if (auto* t = lam::as<lam::LTuple>(m)) {
      Comp acc = star();
      for (auto it = t->parts.rbegin(); it != t->parts.rend(); ++it)
        acc = push_ctx(vecs, sequence(go(ctx, *it), std::move(acc)));
      return pop_ctx(vecs, std::move(acc));
    }
    throw TranslateError(TranslateErr::UnsupportedConstruct,
                         "effect primitive has no image: " + lam::show(m));
  }
};

}  // namespace

Comp free_functor(const lam::LambdaSig& lsig, const lam::LamContext& ctx,
                  const lam::Lam& m) {
  Functor f{lsig};
  f.type_of(ctx, m);  // reject ill-typed input up front
  return f.go(ctx, m);
}

// ---- single-location terms back to λ-terms ----

namespace {

const StackType& main_only(const MemoryType& m, const char* what) {
  static const StackType empty;
  if (m.empty()) return empty;
  if (m.size() == 1 && m.begin()->first == kMainLoc) return m.begin()->second;
  throw TranslateError(TranslateErr::UnsupportedConstruct,
                       std::string(what) + " uses locations other than the main one");
}

}  // namespace

lam::LType interp_value_type(const ValueType& t) {
  if (t.is_base()) return lam::lbase(t.base);
  return lam::larrow(interp_stack(main_only(t.comp().dom, "arrow type")),
                     interp_stack(main_only(t.comp().cod, "arrow type")));
}

lam::LType interp_stack(const StackType& s) {
  if (s.empty()) return lam::lunit();
  if (s.size() == 1) return interp_value_type(s[0]);
  std::vector<lam::LType> parts;
  for (const ValueType& t : s) parts.push_back(interp_value_type(t));
  return lam::lprod(std::move(parts));
}

namespace {

struct Interp {
  const Signature& sig;
  lam::LamContext svars;  // borrowed input, bottom first
  int next_stack = 0;
  int next_bind = 0;

  struct Frame {
    std::vector<lam::Lam> stack;  // bottom first
    std::map<VarName, lam::Lam> env;
  };

  lam::Lam pop_or_borrow(Frame& fr, const ValueType& t, bool root) {
    if (!fr.stack.empty()) {
      lam::Lam top = fr.stack.back();
      fr.stack.pop_back();
      return top;
    }
    if (!root)
      throw TranslateError(TranslateErr::IllTyped,
                           "thunk body consumed more than its domain");
    std::string name = "s" + std::to_string(next_stack++);
    svars.insert(svars.begin(), {name, interp_value_type(t)});
    return lam::lvar(name);
  }

  lam::Lam tuple_of(std::vector<lam::Lam> parts) {
    if (parts.size() == 1) return parts[0];
    return lam::ltuple(std::move(parts));
  }

  lam::Lam value(const Val& v, const ValDeriv& vd, const Frame& fr) {
    if (auto* x = as<Var>(v)) {
      auto it = fr.env.find(x->name);
      if (it == fr.env.end())
        throw TranslateError(TranslateErr::IllTyped,
                             "free variable " + x->name.str());
      return it->second;
    }
    if (auto* k = as<ValConst>(v)) return lam::lconst(k->sym);
    auto* th = as<Thunk>(v);
    if (vd.type.is_base() || !vd.body)
      throw TranslateError(TranslateErr::IllTyped, "thunk without an arrow type");
    const StackType& dom = main_only(vd.type.comp().dom, "thunk type");
    Frame inner;
    inner.env = fr.env;
    std::vector<lam::Pattern> pats;
    std::vector<lam::LType> anns;
    for (const ValueType& t : dom) {
      std::string u = "u" + std::to_string(next_bind++);
      inner.stack.push_back(lam::lvar(u));
      pats.push_back(lam::pvar(u));
      anns.push_back(interp_value_type(t));
    }
    lam::Lam body = walk(th->body, vd.body, inner, false);
    lam::Pattern pat = pats.size() == 1 ? pats[0] : lam::ptuple(pats);
    lam::LType ann = anns.size() == 1 ? anns[0] : lam::lprod(anns);
    return lam::labs(pat, ann, body);
  }

  lam::Lam projection(std::size_t width, std::size_t index,
                      const std::vector<lam::LType>& types, const lam::Lam& of) {
    std::vector<lam::Pattern> pats;
    for (std::size_t i = 0; i < width; ++i)
      pats.push_back(lam::pvar("u" + std::to_string(next_bind + i)));
    lam::Lam sel = lam::lvar("u" + std::to_string(next_bind + index));
    next_bind += static_cast<int>(width);
    return lam::lapp(lam::labs(lam::ptuple(pats), lam::lprod(types), sel), of);
  }

  lam::Lam walk(Comp term, Deriv deriv, Frame& fr, bool root) {
    while (!as<Star>(term)) {
      if (auto* c = as<SeqConst>(term)) {
        const CompType* ct = sig.comp_type(c->sym);
        if (!ct)
          throw TranslateError(TranslateErr::IllTyped, "unknown constant " + c->sym);
        const StackType& dom = main_only(ct->dom, "constant type");
        const StackType& cod = main_only(ct->cod, "constant type");
        if (dom.size() != 1 || cod.size() != 1)
          throw TranslateError(TranslateErr::UnsupportedConstruct,
                               "constant " + c->sym + " is not unary");
        lam::Lam arg = pop_or_borrow(fr, dom[0], root);
        fr.stack.push_back(lam::lseq(c->sym, arg));
        term = c->next;
        deriv = deriv->next;
        continue;
      }
      if (auto* p = as<Push>(term)) {
        if (p->loc != kMainLoc)
          throw TranslateError(TranslateErr::UnsupportedConstruct,
                               "push at location " + p->loc);
        fr.stack.push_back(value(p->value, *deriv->value, fr));
        term = p->next;
        deriv = deriv->next;
        continue;
      }
      if (auto* p = as<Pop>(term)) {
        if (p->loc != kMainLoc)
          throw TranslateError(TranslateErr::UnsupportedConstruct,
                               "pop at location " + p->loc);
        fr.env[p->binder] = pop_or_borrow(fr, *deriv->binder, root);
        term = p->next;
        deriv = deriv->next;
        continue;
      }
      auto* fc = as<Force>(term);
      const ValDeriv& vd = *deriv->value;
      if (vd.type.is_base())
        throw TranslateError(TranslateErr::IllTyped, "forced value has base type");
      const StackType& dom = main_only(vd.type.comp().dom, "forced type");
      const StackType& cod = main_only(vd.type.comp().cod, "forced type");
      lam::Lam fn = value(fc->value, vd, fr);
      std::vector<lam::Lam> args(dom.size());
      for (std::size_t i = dom.size(); i-- > 0;)
        args[i] = pop_or_borrow(fr, dom[i], root);
      lam::Lam app =
          lam::lapp(fn, args.empty() ? lam::ltuple({}) : tuple_of(std::move(args)));
      if (cod.size() == 1) {
        fr.stack.push_back(app);
      } else if (cod.size() >= 2) {
        std::vector<lam::LType> types;
        for (const ValueType& t : cod) types.push_back(interp_value_type(t));
        for (std::size_t i = 0; i < cod.size(); ++i)
          fr.stack.push_back(projection(cod.size(), i, types, app));
      }
      term = fc->next;
      deriv = deriv->next;
    }
    return tuple_of(fr.stack.empty() ? std::vector<lam::Lam>{lam::ltuple({})}
                                     : fr.stack);
  }
};

}  // namespace

SlcInterp interpret_slc(const Signature& sig, const Comp& m) {
  Checked inf = [&] {
    try {
      return infer(sig, Context{}, m);
    } catch (const CheckError& e) {
      throw TranslateError(TranslateErr::IllTyped, e.what());
    }
  }();
  Interp in{sig, {}, 0, 0};
  Interp::Frame fr;
  lam::Lam term = in.walk(m, inf.deriv, fr, true);
  return SlcInterp{term, in.svars};
}

lam::Lam interpret_slc_closed(const Signature& sig, const Comp& m) {
  SlcInterp r = interpret_slc(sig, m);
  if (!r.stack_vars.empty())
    throw TranslateError(TranslateErr::IllTyped,
                         "computation consumes input from the stack");
  return r.term;
}

// ---- collapsed types ----

StackType collapse_stack(const MemoryType& m, const LocationOrder& order) {
  for (const auto& [loc, st] : m)
    if (!order.contains(loc))
      throw TranslateError(TranslateErr::UnknownLocation,
                           "location " + loc + " is not in the order");
  StackType out;
  for (const std::string& loc : order.locs)
    for (const ValueType& t : mt_stack(m, loc))
      out.push_back(collapse_value_type(t, order));
  return out;
}

ValueType collapse_value_type(const ValueType& t, const LocationOrder& order) {
  if (t.is_base()) return t;
  return arrow_type(main_mem(collapse_stack(t.comp().dom, order)),
                    main_mem(collapse_stack(t.comp().cod, order)));
}

CompType collapse_comp_type(const CompType& t, const LocationOrder& order) {
  return CompType{main_mem(collapse_stack(t.dom, order)),
                  main_mem(collapse_stack(t.cod, order))};
}

Signature collapse_signature(const Signature& sig, const LocationOrder& order) {
  Signature out;
  for (const std::string& b : sig.bases) out.declare_base(b);
  for (const auto& [sym, t] : sig.vals)
    out.declare_val(sym, collapse_value_type(t, order));
  for (const auto& [sym, t] : sig.comps)
    out.declare_comp(sym, collapse_comp_type(t, order));
  return out;
}

// ---- collapse ----

namespace {

struct RowSlot {
  std::string loc;
  ValueType type;  // original entry type
};

std::vector<RowSlot> memory_row(const MemoryType& m, const LocationOrder& order) {
  for (const auto& [loc, st] : m)
    if (!order.contains(loc))
      throw TranslateError(TranslateErr::UnknownLocation,
                           "location " + loc + " is not in the order");
  std::vector<RowSlot> out;
  for (const std::string& loc : order.locs)
    for (const ValueType& t : mt_stack(m, loc)) out.push_back(RowSlot{loc, t});
  return out;
}

struct Collapser {
  const Signature& sig;
  const LocationOrder& order;
  std::set<VarName> used;

  VarName fresh(const std::string& hint) { return take_fresh(hint, used); }

  // Pops one binder per slot, the topmost slot first, annotated with the
  // collapsed entry type.
  Comp pop_row(const std::vector<std::pair<VarName, ValueType>>& slots, Comp next) {
    for (const auto& [name, ty] : slots)
      next = pop(kMainLoc, name, collapse_value_type(ty, order), std::move(next));
    return next;
  }

  Comp push_vals(const std::vector<Val>& vals, Comp next) {
    for (auto it = vals.rbegin(); it != vals.rend(); ++it)
      next = push(*it, kMainLoc, std::move(next));
    return next;
  }

  Val value(const Val& v, const ValDeriv& vd, const Context& ctx,
            const std::map<VarName, VarName>& ren) {
    if (auto* x = as<Var>(v)) {
      auto it = ren.find(x->name);
      return var(it == ren.end() ? x->name : it->second);
    }
    if (auto* k = as<ValConst>(v)) return vconst(k->sym);
    auto* th = as<Thunk>(v);
    if (vd.type.is_base())
      throw TranslateError(TranslateErr::IllTyped, "thunk without an arrow type");
    Checked chk = check(sig, ctx, th->body, vd.type.comp());
    return thunk(go(th->body, chk.deriv, ctx, ren));
  }

  Comp go(const Comp& term, const Deriv& deriv, Context ctx,
          std::map<VarName, VarName> ren) {
    if (as<Star>(term)) return star();
    const MemoryType& before = deriv->type.dom;

    if (auto* p = as<Pop>(term)) {
      std::vector<RowSlot> row = memory_row(before, order);
      std::size_t idx = row.size();
      for (std::size_t i = row.size(); i-- > 0;)
        if (row[i].loc == p->loc) {
          idx = i;
          break;
        }
      if (idx == row.size())
        throw TranslateError(TranslateErr::IllTyped,
                             "pop from empty location " + p->loc);
      std::vector<std::pair<VarName, ValueType>> binders;
      for (std::size_t i = 0; i < row.size(); ++i)
        binders.emplace_back(fresh(i == idx ? p->binder.base : "y"), row[i].type);
      std::vector<Val> rest;
      for (std::size_t i = 0; i < row.size(); ++i)
        if (i != idx) rest.push_back(var(binders[i].first));
      ren[p->binder] = binders[idx].first;
      ctx.bind(p->binder, *deriv->binder);
      Comp cont = go(p->next, deriv->next, std::move(ctx), std::move(ren));
      return pop_row(binders, push_vals(rest, std::move(cont)));
    }

    if (auto* ps = as<Push>(term)) {
      std::vector<RowSlot> row = memory_row(before, order);
      Val cv = value(ps->value, *deriv->value, ctx, ren);
      std::size_t at = order.position(ps->loc);
      std::size_t ipos = 0;
      while (ipos < row.size() && order.position(row[ipos].loc) <= at) ++ipos;
      std::vector<std::pair<VarName, ValueType>> binders;
      for (const RowSlot& s : row) binders.emplace_back(fresh("y"), s.type);
      std::vector<Val> vals;
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i == ipos) vals.push_back(cv);
        vals.push_back(var(binders[i].first));
      }
      if (ipos == row.size()) vals.push_back(cv);
      Comp cont = go(ps->next, deriv->next, std::move(ctx), std::move(ren));
      return pop_row(binders, push_vals(vals, std::move(cont)));
    }

    // Force and constants share one shape: pop the whole row, present the
    // consumed part, act, pop the produced row, restore the interleaving.
    MemoryType r, u;
    std::function<Comp(Comp)> action;
    Comp next;
    Deriv dnext;
    if (auto* c = as<SeqConst>(term)) {
      const CompType* ct = sig.comp_type(c->sym);
      if (!ct)
        throw TranslateError(TranslateErr::IllTyped, "unknown constant " + c->sym);
      r = ct->dom;
      u = ct->cod;
      std::string sym = c->sym;
      action = [sym](Comp inner) { return seqconst(sym, std::move(inner)); };
      next = c->next;
      dnext = deriv->next;
    } else {
      auto* fc = as<Force>(term);
      const ValDeriv& vd = *deriv->value;
      if (vd.type.is_base())
        throw TranslateError(TranslateErr::IllTyped, "forced value has base type");
      r = vd.type.comp().dom;
      u = vd.type.comp().cod;
      Val cv = value(fc->value, vd, ctx, ren);
      action = [cv](Comp inner) { return force(cv, std::move(inner)); };
      next = fc->next;
      dnext = deriv->next;
    }
    if (!mt_has_top(before, r))
      throw TranslateError(TranslateErr::IllTyped, "input row is not on top");
    MemoryType s = mt_strip_top(before, r);

    struct Tagged {
      RowSlot slot;
      bool consumed;
      VarName name;
    };
    std::vector<Tagged> full;
    for (const std::string& loc : order.locs) {
      for (const ValueType& t : mt_stack(s, loc))
        full.push_back(Tagged{RowSlot{loc, t}, false, {}});
      for (const ValueType& t : mt_stack(r, loc))
        full.push_back(Tagged{RowSlot{loc, t}, true, {}});
    }
    for (Tagged& tg : full) tg.name = fresh(tg.consumed ? "x" : "y");

    std::vector<std::pair<VarName, ValueType>> zrow;
    for (const RowSlot& s2 : memory_row(u, order))
      zrow.emplace_back(fresh("z"), s2.type);

    // Restore: per location the untouched part below the produced part.
    std::vector<Val> restore;
    {
      std::size_t zi = 0;
      for (const std::string& loc : order.locs) {
        for (const Tagged& tg : full)
          if (!tg.consumed && tg.slot.loc == loc) restore.push_back(var(tg.name));
        for (const ValueType& t : mt_stack(u, loc)) {
          (void)t;
          restore.push_back(var(zrow[zi++].first));
        }
      }
    }

    Comp cont = go(next, dnext, std::move(ctx), std::move(ren));
    Comp after = pop_row(zrow, push_vals(restore, std::move(cont)));
    Comp act = action(std::move(after));
    std::vector<Val> present;
    for (const Tagged& tg : full)
      if (tg.consumed) present.push_back(var(tg.name));
    std::vector<std::pair<VarName, ValueType>> pops;
    for (const Tagged& tg : full) pops.emplace_back(tg.name, tg.slot.type);
    return pop_row(pops, push_vals(present, std::move(act)));
  }
};

}  // namespace

Comp collapse(const Signature& sig, const Comp& m, const LocationOrder& order) {
  Checked chk = [&] {
    try {
      Checked inf = infer(sig, Context{}, m);
      return check(sig, Context{}, m, inf.type);
    } catch (const CheckError& e) {
      throw TranslateError(TranslateErr::IllTyped, e.what());
    }
  }();
  Collapser c{sig, order, all_names(m)};
  return c.go(m, chk.deriv, Context{}, {});
}

// ---- embedding ----

ValueType embed_value_type(const ValueType& t, const std::string& at) {
  if (t.is_base()) return t;
  const StackType& dom = main_only(t.comp().dom, "arrow type");
  const StackType& cod = main_only(t.comp().cod, "arrow type");
  auto shift = [&](const StackType& s) {
    MemoryType m;
    for (const ValueType& q : s) mt_push(m, at, embed_value_type(q, at));
    return m;
  };
  return arrow_type(shift(dom), shift(cod));
}

namespace {

struct Embedder {
  const Signature& sig;
  const LocationOrder& order;
  std::string at;

  Val value(const Val& v) {
    if (as<Var>(v) || as<ValConst>(v)) return v;
    return thunk(go(as<Thunk>(v)->body));
  }

  Comp go(const Comp& term) {
    if (as<Star>(term)) return star();
    if (auto* p = as<Push>(term)) {
      if (p->loc != kMainLoc)
        throw TranslateError(TranslateErr::UnsupportedConstruct,
                             "push at location " + p->loc);
      return push(value(p->value), at, go(p->next));
    }
    if (auto* p = as<Pop>(term)) {
      if (p->loc != kMainLoc)
        throw TranslateError(TranslateErr::UnsupportedConstruct,
                             "pop at location " + p->loc);
      std::optional<ValueType> ann;
      if (p->ann) ann = embed_value_type(*p->ann, at);
      return pop(at, p->binder, std::move(ann), go(p->next));
    }
    if (auto* f = as<Force>(term)) return force(value(f->value), go(f->next));
    auto* c = as<SeqConst>(term);
    const CompType* ct = sig.comp_type(c->sym);
    if (!ct)
      throw TranslateError(TranslateErr::IllTyped, "unknown constant " + c->sym);
    Comp tail = sequence(kappa(ct->cod, order, at), go(c->next));
    return sequence(kappa_inv(ct->dom, order, at),
                    seqconst(c->sym, std::move(tail)));
  }
};

}  // namespace

Comp embed(const Signature& sig, const LocationOrder& order, const Comp& slc,
           const std::string& at) {
  Embedder e{sig, order, at};
  return e.go(slc);
}

// ---- stack shuffles ----

namespace {

Comp kappa_go(const MemoryType& mem, const LocationOrder& order,
              const std::string& hub, std::set<VarName>& used);
Comp kappa_inv_go(const MemoryType& mem, const LocationOrder& order,
                  const std::string& hub, std::set<VarName>& used);

// Value presenting an entry of the original memory on the hub stack.
Val wrap_down(const VarName& x, const ValueType& t, const LocationOrder& order,
              const std::string& hub, std::set<VarName>& used) {
  if (t.is_base()) return var(x);
  Comp body = sequence(kappa_inv_go(t.comp().dom, order, hub, used),
                       force(var(x), kappa_go(t.comp().cod, order, hub, used)));
  return thunk(std::move(body));
}

// Value presenting a collapsed hub entry back at its original interface.
Val wrap_up(const VarName& y, const ValueType& t, const LocationOrder& order,
            const std::string& hub, std::set<VarName>& used) {
  if (t.is_base()) return var(y);
  Comp body = sequence(kappa_go(t.comp().dom, order, hub, used),
                       force(var(y), kappa_inv_go(t.comp().cod, order, hub, used)));
  return thunk(std::move(body));
}

Comp kappa_go(const MemoryType& mem, const LocationOrder& order,
              const std::string& hub, std::set<VarName>& used) {
  std::vector<RowSlot> row = memory_row(mem, order);
  std::vector<VarName> names;
  for (std::size_t i = 0; i < row.size(); ++i) names.push_back(take_fresh("x", used));
  Comp out = star();
  for (std::size_t i = row.size(); i-- > 0;)
    out = push(wrap_down(names[i], row[i].type, order, hub, used), hub,
               std::move(out));
  for (std::size_t i = 0; i < row.size(); ++i)
    out = pop(row[i].loc, names[i], row[i].type, std::move(out));
  return out;
}

Comp kappa_inv_go(const MemoryType& mem, const LocationOrder& order,
                  const std::string& hub, std::set<VarName>& used) {
  std::vector<RowSlot> row = memory_row(mem, order);
  std::vector<VarName> names;
  for (std::size_t i = 0; i < row.size(); ++i) names.push_back(take_fresh("y", used));
  Comp out = star();
  for (std::size_t i = row.size(); i-- > 0;)
    out = push(wrap_up(names[i], row[i].type, order, hub, used), row[i].loc,
               std::move(out));
  for (std::size_t i = 0; i < row.size(); ++i)
    out = pop(hub, names[i], collapse_value_type(row[i].type, order),
              std::move(out));
  return out;
}

}  // namespace

Comp kappa(const MemoryType& mem, const LocationOrder& order,
           const std::string& hub) {
  std::set<VarName> used;
  return kappa_go(mem, order, hub, used);
}

Comp kappa_inv(const MemoryType& mem, const LocationOrder& order,
               const std::string& hub) {
  std::set<VarName> used;
  return kappa_inv_go(mem, order, hub, used);
}

// ---- staged corpus ----

namespace {

struct StagedGen {
  std::mt19937_64& rng;
  const StagedGenConfig& cfg;
  std::set<VarName> used;

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
  bool coin(double p) {
    return std::uniform_real_distribution<double>(0, 1)(rng) < p;
  }

  using Env = std::vector<std::pair<VarName, ValueType>>;

  std::set<std::string> all_bases() const {
    return std::set<std::string>(cfg.bases.begin(), cfg.bases.end());
  }
  std::set<std::string> bases_of(const StackType& s) const {
    std::set<std::string> out;
    for (const ValueType& t : s)
      if (t.is_base()) out.insert(t.base);
    return out;
  }
  std::set<std::string> env_bases(const Env& env) const {
    std::set<std::string> out;
    for (const auto& [x, t] : env)
      if (t.is_base()) out.insert(t.base);
    return out;
  }

  std::string pick_base(const std::set<std::string>& from) {
    std::vector<std::string> v(from.begin(), from.end());
    return v[static_cast<std::size_t>(pick(static_cast<int>(v.size())))];
  }

  // Arrow whose domain's base entries come from pushable (the forcing site
  // must be able to supply them) and whose codomain's base entries come
  // from the domain (a closed body must be able to produce them).
  ValueType gen_arrow(const std::set<std::string>& pushable, int depth) {
    StackType dom;
    int w1 = pick(cfg.max_arity + 1);
    for (int i = 0; i < w1; ++i) {
      if (depth > 0 && (pushable.empty() || coin(0.3)))
        dom.push_back(gen_arrow(all_bases(), depth - 1));
      else if (!pushable.empty())
        dom.push_back(base_type(pick_base(pushable)));
    }
    std::set<std::string> avail = bases_of(dom);
    StackType cod;
    int w2 = pick(cfg.max_arity + 1);
    for (int i = 0; i < w2; ++i) {
      if (depth > 0 && (avail.empty() || coin(0.3)))
        cod.push_back(gen_arrow(avail, depth - 1));
      else if (!avail.empty())
        cod.push_back(base_type(pick_base(avail)));
    }
    return arrow_type(main_mem(std::move(dom)), main_mem(std::move(cod)));
  }

  // A value of type t buildable from env: a variable when one fits, else a
  // closed staged thunk (t must then be an arrow).
  Val make_value(const ValueType& t, const Env& env) {
    std::vector<VarName> fits;
    for (const auto& [x, ty] : env)
      if (ty == t) fits.push_back(x);
    if (!fits.empty() && (t.is_base() || coin(0.6)))
      return var(fits[static_cast<std::size_t>(pick(static_cast<int>(fits.size())))]);
    if (t.is_base())
      throw TranslateError(TranslateErr::UnsupportedConstruct,
                           "no variable of base " + t.base);
    return thunk(body(main_only(t.comp().dom, "arrow"),
                      main_only(t.comp().cod, "arrow")));
  }

  // Environment arrows whose whole domain is suppliable from env.
  std::vector<std::pair<VarName, ValueType>> forceable(const Env& env) {
    std::vector<std::pair<VarName, ValueType>> out;
    std::set<std::string> have = env_bases(env);
    for (const auto& [x, t] : env) {
      if (t.is_base()) continue;
      bool ok = true;
      for (const ValueType& d : main_only(t.comp().dom, "arrow"))
        if (d.is_base() && !have.count(d.base)) ok = false;
      if (ok) out.emplace_back(x, t);
    }
    return out;
  }

  // A run of force stages followed by a fixed push row.  Each stage pushes
  // the chosen arrow's arguments, forces the variable, and pops every
  // output into a fresh binder the rest can use.
  Comp run(Env env, int stages, const StackType& outputs) {
    if (stages > 0) {
      auto cands = forceable(env);
      if (!cands.empty()) {
        auto chosen =
            cands[static_cast<std::size_t>(pick(static_cast<int>(cands.size())))];
        const StackType& dom = main_only(chosen.second.comp().dom, "arrow");
        const StackType& cod = main_only(chosen.second.comp().cod, "arrow");
        std::vector<std::pair<VarName, ValueType>> outs;
        for (const ValueType& t : cod) outs.emplace_back(take_fresh("w", used), t);
        Env env2 = env;
        for (const auto& [name, ty] : outs) env2.emplace_back(name, ty);
        Comp next = run(std::move(env2), stages - 1, outputs);
        // Wrapped last to first: the topmost output is popped first.
        for (const auto& [name, ty] : outs)
          next = pop(kMainLoc, name, ty, std::move(next));
        next = force(var(chosen.first), std::move(next));
        for (std::size_t i = dom.size(); i-- > 0;)
          next = push(make_value(dom[i], env), kMainLoc, std::move(next));
        return next;
      }
    }
    Comp out = star();
    for (std::size_t i = outputs.size(); i-- > 0;)
      out = push(make_value(outputs[i], env), kMainLoc, std::move(out));
    return out;
  }

  // Closed staged body of the given interface: pop the domain, stage, push
  // exactly the codomain.
  Comp body(const StackType& dom, const StackType& cod) {
    Env env;
    std::vector<std::pair<VarName, ValueType>> ins;
    for (const ValueType& t : dom) ins.emplace_back(take_fresh("a", used), t);
    for (const auto& [name, ty] : ins) env.emplace_back(name, ty);
    Comp out = run(std::move(env), pick(2), cod);
    // The domain is given bottom first, so its last entry is popped first.
    for (const auto& [name, ty] : ins)
      out = pop(kMainLoc, name, ty, std::move(out));
    return out;
  }

  Comp top() {
    Env env;
    std::vector<std::pair<VarName, ValueType>> ins;
    int n0 = 1 + pick(cfg.max_arity + 1);
    std::set<std::string> all = all_bases();
    for (int i = 0; i < n0; ++i) {
      ValueType t = coin(0.5) ? base_type(pick_base(all)) : gen_arrow(all, 1);
      ins.emplace_back(take_fresh(t.is_base() ? "v" : "g", used), t);
    }
    for (const auto& [name, ty] : ins) env.emplace_back(name, ty);
    StackType outputs;
    int pushes = pick(cfg.max_pushes + 1);
    std::set<std::string> have = env_bases(env);
    for (int i = 0; i < pushes; ++i) {
      if (!have.empty() && coin(0.5))
        outputs.push_back(base_type(pick_base(have)));
      else
        outputs.push_back(gen_arrow(have, 1));
    }
    Comp out = run(std::move(env), pick(cfg.max_stages + 1), outputs);
    for (auto it = ins.rbegin(); it != ins.rend(); ++it)
      out = pop(kMainLoc, it->first, it->second, std::move(out));
    return out;
  }
};

}  // namespace

Comp generate_staged_slc(std::mt19937_64& rng, const StagedGenConfig& cfg) {
  StagedGen g{rng, cfg, {}};
  return g.top();
}

}  // namespace fmc
