#include "fmc/lambda.hpp"

#include <algorithm>
#include <sstream>

namespace fmc::lam {

// ---- types ----

LType lbase(std::string name) {
  return std::make_shared<const LTy>(LTy{LBase{std::move(name)}});
}
LType larrow(LType dom, LType cod) {
  return std::make_shared<const LTy>(LTy{LArrow{std::move(dom), std::move(cod)}});
}
LType lprod(std::vector<LType> parts) {
  return std::make_shared<const LTy>(LTy{LProd{std::move(parts)}});
}
LType lunit() { return lprod({}); }

template <class T>
static const T* as_ty(const LType& t) {
  return std::get_if<T>(&t->node);
}

bool type_equal(const LType& a, const LType& b) {
  if (a == b) return true;
  if (auto* x = as_ty<LBase>(a)) {
    auto* y = as_ty<LBase>(b);
    return y && x->name == y->name;
  }
  if (auto* x = as_ty<LArrow>(a)) {
    auto* y = as_ty<LArrow>(b);
    return y && type_equal(x->dom, y->dom) && type_equal(x->cod, y->cod);
  }
  auto* x = as_ty<LProd>(a);
  auto* y = as_ty<LProd>(b);
  if (!y || x->parts.size() != y->parts.size()) return false;
  for (std::size_t i = 0; i < x->parts.size(); ++i)
    if (!type_equal(x->parts[i], y->parts[i])) return false;
  return true;
}

std::string show(const LType& t) {
  if (auto* b = as_ty<LBase>(t)) return b->name;
  if (auto* f = as_ty<LArrow>(t)) {
    std::string d = show(f->dom);
    if (as_ty<LArrow>(f->dom)) d = "(" + d + ")";
    return d + " -> " + show(f->cod);
  }
  auto* p = as_ty<LProd>(t);
  if (p->parts.empty()) return "unit";
  std::string s = "(";
  for (std::size_t i = 0; i < p->parts.size(); ++i) {
    if (i) s += " * ";
    s += show(p->parts[i]);
  }
  return s + ")";
}

// ---- patterns ----

Pattern pvar(std::string name) {
  return std::make_shared<const Pat>(Pat{PVar{std::move(name)}});
}
Pattern ptuple(std::vector<Pattern> parts) {
  return std::make_shared<const Pat>(Pat{PTuple{std::move(parts)}});
}

static void pattern_vars_into(const Pattern& p, std::vector<std::string>& out) {
  if (auto* v = as<PVar>(p)) {
    out.push_back(v->name);
    return;
  }
  for (const Pattern& q : as<PTuple>(p)->parts) pattern_vars_into(q, out);
}

std::vector<std::string> pattern_vars(const Pattern& p) {
  std::vector<std::string> out;
  pattern_vars_into(p, out);
  return out;
}

bool pattern_linear(const Pattern& p) {
  std::vector<std::string> vs = pattern_vars(p);
  std::set<std::string> seen(vs.begin(), vs.end());
  return seen.size() == vs.size();
}

std::string show(const Pattern& p) {
  if (auto* v = as<PVar>(p)) return v->name;
  const auto& parts = as<PTuple>(p)->parts;
  if (parts.empty()) return "()";
  std::string s = "(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += ", ";
    s += show(parts[i]);
  }
  return s + ")";
}

// ---- terms ----

static Lam mk(LTerm&& t) { return std::make_shared<const LTerm>(std::move(t)); }

Lam lvar(std::string name) { return mk(LTerm{LVar{std::move(name)}}); }
Lam lconst(std::string sym) { return mk(LTerm{LConst{std::move(sym)}}); }
Lam lseq(std::string sym, Lam arg) {
  return mk(LTerm{LSeq{std::move(sym), std::move(arg)}});
}
Lam lapp(Lam fn, Lam arg) { return mk(LTerm{LApp{std::move(fn), std::move(arg)}}); }
Lam labs(Pattern p, std::optional<LType> ann, Lam body) {
  return mk(LTerm{LAbs{std::move(p), std::move(ann), std::move(body)}});
}
Lam labs(std::string x, Lam body) {
  return labs(pvar(std::move(x)), std::nullopt, std::move(body));
}
Lam labs(std::string x, LType ann, Lam body) {
  return labs(pvar(std::move(x)), std::optional<LType>(std::move(ann)),
              std::move(body));
}
Lam ltuple(std::vector<Lam> parts) { return mk(LTerm{LTuple{std::move(parts)}}); }
Lam lchoice(Lam l, Lam r) { return mk(LTerm{LChoice{std::move(l), std::move(r)}}); }
Lam lassign(std::string cell, Lam value, Lam body) {
  return mk(LTerm{LAssign{std::move(cell), std::move(value), std::move(body)}});
}
Lam lderef(std::string cell) { return mk(LTerm{LDeref{std::move(cell)}}); }

std::size_t term_size(const Lam& m) {
  if (as<LVar>(m) || as<LConst>(m) || as<LDeref>(m)) return 1;
  if (auto* s = as<LSeq>(m)) return 1 + term_size(s->arg);
  if (auto* a = as<LApp>(m)) return 1 + term_size(a->fn) + term_size(a->arg);
  if (auto* f = as<LAbs>(m)) return 1 + term_size(f->body);
  if (auto* t = as<LTuple>(m)) {
    std::size_t n = 1;
    for (const Lam& q : t->parts) n += term_size(q);
    return n;
  }
  if (auto* c = as<LChoice>(m)) return 1 + term_size(c->left) + term_size(c->right);
  auto* g = as<LAssign>(m);
  return 1 + term_size(g->value) + term_size(g->body);
}

static void free_vars_into(const Lam& m, std::set<std::string>& bound,
                           std::set<std::string>& out) {
  if (auto* v = as<LVar>(m)) {
    if (!bound.count(v->name)) out.insert(v->name);
    return;
  }
  if (as<LConst>(m) || as<LDeref>(m)) return;
  if (auto* s = as<LSeq>(m)) return free_vars_into(s->arg, bound, out);
  if (auto* a = as<LApp>(m)) {
    free_vars_into(a->fn, bound, out);
    free_vars_into(a->arg, bound, out);
    return;
  }
  if (auto* f = as<LAbs>(m)) {
    std::vector<std::string> vs = pattern_vars(f->pat);
    std::vector<std::string> added;
    for (const std::string& x : vs)
      if (bound.insert(x).second) added.push_back(x);
    free_vars_into(f->body, bound, out);
    for (const std::string& x : added) bound.erase(x);
    return;
  }
  if (auto* t = as<LTuple>(m)) {
    for (const Lam& q : t->parts) free_vars_into(q, bound, out);
    return;
  }
  if (auto* c = as<LChoice>(m)) {
    free_vars_into(c->left, bound, out);
    free_vars_into(c->right, bound, out);
    return;
  }
  auto* g = as<LAssign>(m);
  free_vars_into(g->value, bound, out);
  free_vars_into(g->body, bound, out);
}

std::set<std::string> free_vars(const Lam& m) {
  std::set<std::string> bound, out;
  free_vars_into(m, bound, out);
  return out;
}

// ---- alpha equivalence ----

namespace {

bool pattern_bind_alpha(const Pattern& p, const Pattern& q, int& next,
                        std::map<std::string, int>& la,
                        std::map<std::string, int>& lb) {
  if (auto* x = as<PVar>(p)) {
    auto* y = as<PVar>(q);
    if (!y) return false;
    la[x->name] = next;
    lb[y->name] = next;
    ++next;
    return true;
  }
  auto* xs = as<PTuple>(p);
  auto* ys = as<PTuple>(q);
  if (!ys || xs->parts.size() != ys->parts.size()) return false;
  for (std::size_t i = 0; i < xs->parts.size(); ++i)
    if (!pattern_bind_alpha(xs->parts[i], ys->parts[i], next, la, lb))
      return false;
  return true;
}

bool alpha_eq(const Lam& a, const Lam& b, int next, std::map<std::string, int> la,
              std::map<std::string, int> lb) {
  if (auto* x = as<LVar>(a)) {
    auto* y = as<LVar>(b);
    if (!y) return false;
    auto ia = la.find(x->name), ib = lb.find(y->name);
    if (ia != la.end() || ib != lb.end())
      return ia != la.end() && ib != lb.end() && ia->second == ib->second;
    return x->name == y->name;
  }
  if (auto* x = as<LConst>(a)) {
    auto* y = as<LConst>(b);
    return y && x->sym == y->sym;
  }
  if (auto* x = as<LDeref>(a)) {
    auto* y = as<LDeref>(b);
    return y && x->cell == y->cell;
  }
  if (auto* x = as<LSeq>(a)) {
    auto* y = as<LSeq>(b);
    return y && x->sym == y->sym && alpha_eq(x->arg, y->arg, next, la, lb);
  }
  if (auto* x = as<LApp>(a)) {
    auto* y = as<LApp>(b);
    return y && alpha_eq(x->fn, y->fn, next, la, lb) &&
           alpha_eq(x->arg, y->arg, next, la, lb);
  }
  if (auto* x = as<LAbs>(a)) {
    auto* y = as<LAbs>(b);
    if (!y) return false;
    if (!pattern_bind_alpha(x->pat, y->pat, next, la, lb)) return false;
    return alpha_eq(x->body, y->body, next, std::move(la), std::move(lb));
  }
  if (auto* x = as<LTuple>(a)) {
    auto* y = as<LTuple>(b);
    if (!y || x->parts.size() != y->parts.size()) return false;
    for (std::size_t i = 0; i < x->parts.size(); ++i)
      if (!alpha_eq(x->parts[i], y->parts[i], next, la, lb)) return false;
    return true;
  }
  if (auto* x = as<LChoice>(a)) {
    auto* y = as<LChoice>(b);
    return y && alpha_eq(x->left, y->left, next, la, lb) &&
           alpha_eq(x->right, y->right, next, la, lb);
  }
  auto* x = as<LAssign>(a);
  auto* y = as<LAssign>(b);
  return y && x->cell == y->cell && alpha_eq(x->value, y->value, next, la, lb) &&
         alpha_eq(x->body, y->body, next, la, lb);
}

}  // namespace

bool alpha_equal(const Lam& a, const Lam& b) { return alpha_eq(a, b, 0, {}, {}); }

// ---- printing ----

namespace {

// levels: 0 term, 1 choice, 2 application, 3 atom
void show_prec(const Lam& m, int level, std::string& out) {
  if (auto* v = as<LVar>(m)) {
    out += v->name;
    return;
  }
  if (auto* k = as<LConst>(m)) {
    out += k->sym;
    return;
  }
  if (auto* d = as<LDeref>(m)) {
    out += "!" + d->cell;
    return;
  }
  if (auto* t = as<LTuple>(m)) {
    out += "(";
    for (std::size_t i = 0; i < t->parts.size(); ++i) {
      if (i) out += ", ";
      show_prec(t->parts[i], 0, out);
    }
    out += ")";
    return;
  }
  bool wrap = false;
  std::string inner;
  if (auto* f = as<LAbs>(m)) {
    wrap = level > 0;
    inner += "\\" + show(f->pat);
    if (f->ann) inner += ":" + show(*f->ann);
    inner += ". ";
    show_prec(f->body, 0, inner);
  } else if (auto* g = as<LAssign>(m)) {
    wrap = level > 0;
    inner += g->cell + " := ";
    show_prec(g->value, 1, inner);
    inner += "; ";
    show_prec(g->body, 0, inner);
  } else if (auto* c = as<LChoice>(m)) {
    wrap = level > 1;
    show_prec(c->left, 2, inner);
    inner += " (+) ";
    show_prec(c->right, 2, inner);
  } else if (auto* s = as<LSeq>(m)) {
    wrap = level > 2;
    inner += s->sym + "@";
    show_prec(s->arg, 3, inner);
  } else {
    auto* a = as<LApp>(m);
    wrap = level > 2;
    show_prec(a->fn, 2, inner);
    inner += " ";
    show_prec(a->arg, 3, inner);
  }
  out += wrap ? "(" + inner + ")" : inner;
}

}  // namespace

std::string show(const Lam& m) {
  std::string out;
  show_prec(m, 0, out);
  return out;
}

// ---- substitution ----

namespace {

std::string fresh_lname(const std::string& base, const std::set<std::string>& avoid) {
  if (!avoid.count(base)) return base;
  for (int i = 1;; ++i) {
    std::string cand = base + "_" + std::to_string(i);
    if (!avoid.count(cand)) return cand;
  }
}

Pattern rename_pattern(const Pattern& p, const std::map<std::string, std::string>& ren) {
  if (auto* v = as<PVar>(p)) {
    auto it = ren.find(v->name);
    return pvar(it == ren.end() ? v->name : it->second);
  }
  std::vector<Pattern> parts;
  for (const Pattern& q : as<PTuple>(p)->parts) parts.push_back(rename_pattern(q, ren));
  return ptuple(std::move(parts));
}

Lam subst(const Lam& v, const std::string& x, const Lam& m) {
  if (auto* y = as<LVar>(m)) return y->name == x ? v : m;
  if (as<LConst>(m) || as<LDeref>(m)) return m;
  if (auto* s = as<LSeq>(m)) return lseq(s->sym, subst(v, x, s->arg));
  if (auto* a = as<LApp>(m)) return lapp(subst(v, x, a->fn), subst(v, x, a->arg));
  if (auto* t = as<LTuple>(m)) {
    std::vector<Lam> parts;
    for (const Lam& q : t->parts) parts.push_back(subst(v, x, q));
    return ltuple(std::move(parts));
  }
  if (auto* c = as<LChoice>(m))
    return lchoice(subst(v, x, c->left), subst(v, x, c->right));
  if (auto* g = as<LAssign>(m))
    return lassign(g->cell, subst(v, x, g->value), subst(v, x, g->body));
  auto* f = as<LAbs>(m);
  std::vector<std::string> vs = pattern_vars(f->pat);
  if (std::find(vs.begin(), vs.end(), x) != vs.end()) return m;
  std::set<std::string> body_free = free_vars(f->body);
  if (!body_free.count(x)) return m;
  std::set<std::string> vfree = free_vars(v);
  std::map<std::string, std::string> ren;
  Lam body = f->body;
  std::set<std::string> avoid = vfree;
  avoid.insert(body_free.begin(), body_free.end());
  avoid.insert(x);
  for (const std::string& b : vs)
    if (vfree.count(b)) {
      std::string nb = fresh_lname(b, avoid);
      avoid.insert(nb);
      ren[b] = nb;
    }
  if (!ren.empty()) {
    for (const auto& [from, to] : ren) body = subst(lvar(to), from, body);
    return labs(rename_pattern(f->pat, ren), f->ann, subst(v, x, body));
  }
  return labs(f->pat, f->ann, subst(v, x, body));
}

}  // namespace

Lam substitute(const Lam& v, const std::string& x, const Lam& m) {
  return subst(v, x, m);
}

// ---- checking ----

namespace {

void bind_pattern(const LambdaSig& sig, LamContext& ctx, const Pattern& p,
                  const LType& t) {
  if (auto* v = as<PVar>(p)) {
    ctx.emplace_back(v->name, t);
    return;
  }
  auto* ps = as<PTuple>(p);
  auto* prod = std::get_if<LProd>(&t->node);
  if (!prod)
    throw LamError(LamErr::NotATuple,
                   "pattern " + show(p) + " against non-product " + show(t));
  if (prod->parts.size() != ps->parts.size())
    throw LamError(LamErr::PatternShape, "pattern " + show(p) + " has width " +
                                             std::to_string(ps->parts.size()) +
                                             " but type " + show(t) + " has " +
                                             std::to_string(prod->parts.size()));
  for (std::size_t i = 0; i < ps->parts.size(); ++i)
    bind_pattern(sig, ctx, ps->parts[i], prod->parts[i]);
}

}  // namespace

LType check(const LambdaSig& sig, const LamContext& ctx, const Lam& m) {
  if (auto* v = as<LVar>(m)) {
    for (auto it = ctx.rbegin(); it != ctx.rend(); ++it)
      if (it->first == v->name) return it->second;
    throw LamError(LamErr::UnboundVariable, "unbound variable " + v->name);
  }
  if (auto* k = as<LConst>(m)) {
    auto it = sig.consts.find(k->sym);
    if (it == sig.consts.end())
      throw LamError(LamErr::UnknownConstant, "unknown constant " + k->sym);
    return it->second;
  }
  if (auto* s = as<LSeq>(m)) {
    auto it = sig.seqs.find(s->sym);
    if (it == sig.seqs.end())
      throw LamError(LamErr::UnknownConstant, "unknown constant " + s->sym);
    LType at = check(sig, ctx, s->arg);
    if (!type_equal(at, it->second.first))
      throw LamError(LamErr::TypeMismatch, s->sym + " applied to " + show(at) +
                                               ", needs " + show(it->second.first));
    return it->second.second;
  }
  if (auto* a = as<LApp>(m)) {
    LType ft = check(sig, ctx, a->fn);
    auto* arr = std::get_if<LArrow>(&ft->node);
    if (!arr)
      throw LamError(LamErr::NotAFunction, "applied term has type " + show(ft));
    LType at = check(sig, ctx, a->arg);
    if (!type_equal(at, arr->dom))
      throw LamError(LamErr::TypeMismatch, "argument has type " + show(at) +
                                               ", function needs " + show(arr->dom));
    return arr->cod;
  }
  if (auto* f = as<LAbs>(m)) {
    if (!f->ann)
      throw LamError(LamErr::AnnotationNeeded,
                     "abstraction over " + show(f->pat) + " needs a domain type");
    if (!pattern_linear(f->pat))
      throw LamError(LamErr::NonLinearPattern, "pattern " + show(f->pat) +
                                                   " binds a variable twice");
    LamContext inner = ctx;
    bind_pattern(sig, inner, f->pat, *f->ann);
    return larrow(*f->ann, check(sig, inner, f->body));
  }
  if (auto* t = as<LTuple>(m)) {
    std::vector<LType> parts;
    for (const Lam& q : t->parts) parts.push_back(check(sig, ctx, q));
    return lprod(std::move(parts));
  }
  throw LamError(LamErr::UnsupportedConstruct,
                 "effect primitives have no simple type: " + show(m));
}

// ---- rewriting ----

namespace {

// The pattern written back as a term, for recognizing η-redexes.
Lam pattern_term(const Pattern& p) {
  if (auto* v = as<PVar>(p)) return lvar(v->name);
  std::vector<Lam> parts;
  for (const Pattern& q : as<PTuple>(p)->parts) parts.push_back(pattern_term(q));
  return ltuple(std::move(parts));
}

// Collect {pi -> Ni}; fails (returns false) when the argument's shape does
// not expose enough structure for the pattern.
bool match_pattern(const Pattern& p, const Lam& arg,
                   std::vector<std::pair<std::string, Lam>>& out) {
  if (auto* v = as<PVar>(p)) {
    out.emplace_back(v->name, arg);
    return true;
  }
  auto* ps = as<PTuple>(p);
  auto* tup = as<LTuple>(arg);
  if (!tup || tup->parts.size() != ps->parts.size()) return false;
  for (std::size_t i = 0; i < ps->parts.size(); ++i)
    if (!match_pattern(ps->parts[i], tup->parts[i], out)) return false;
  return true;
}

// Simultaneous substitution: rename the pattern's variables to fresh names
// first so the sequential passes cannot capture each other's replacements.
Lam beta_contract(const LAbs& f, const Lam& arg) {
  std::vector<std::pair<std::string, Lam>> binds;
  if (!match_pattern(f.pat, arg, binds)) return nullptr;
  std::set<std::string> avoid = free_vars(f.body);
  for (const auto& [x, n] : binds) {
    std::set<std::string> nf = free_vars(n);
    avoid.insert(nf.begin(), nf.end());
  }
  Lam body = f.body;
  std::vector<std::pair<std::string, Lam>> final_binds;
  for (const auto& [x, n] : binds) {
    std::string fx = fresh_lname(x + "_", avoid);
    avoid.insert(fx);
    body = subst(lvar(fx), x, body);
    final_binds.emplace_back(fx, n);
  }
  for (const auto& [x, n] : final_binds) body = subst(n, x, body);
  return body;
}

// Is m a projection (\(x1,...,xn). xi) applied to e?  Returns the width and
// index via out parameters.
bool projection_of(const Lam& m, Lam& e, std::size_t& width, std::size_t& index) {
  auto* a = as<LApp>(m);
  if (!a) return false;
  auto* f = as<LAbs>(a->fn);
  if (!f) return false;
  auto* ps = as<PTuple>(f->pat);
  if (!ps) return false;
  auto* body = as<LVar>(f->body);
  if (!body) return false;
  for (std::size_t i = 0; i < ps->parts.size(); ++i) {
    auto* v = as<PVar>(ps->parts[i]);
    if (!v) return false;
    if (v->name == body->name) {
      e = a->arg;
      width = ps->parts.size();
      index = i;
      return true;
    }
  }
  return false;
}

Lam step(const Lam& m) {
  if (auto* a = as<LApp>(m)) {
    if (auto* f = as<LAbs>(a->fn))
      if (Lam r = beta_contract(*f, a->arg)) return r;
    if (Lam fn = step(a->fn)) return lapp(fn, a->arg);
    if (Lam arg = step(a->arg)) return lapp(a->fn, arg);
    return nullptr;
  }
  if (auto* f = as<LAbs>(m)) {
    if (auto* a = as<LApp>(f->body)) {
      if (alpha_equal(a->arg, pattern_term(f->pat))) {
        std::set<std::string> fv = free_vars(a->fn);
        bool clash = false;
        for (const std::string& x : pattern_vars(f->pat))
          if (fv.count(x)) clash = true;
        if (!clash) return a->fn;
      }
    }
    if (Lam body = step(f->body)) return labs(f->pat, f->ann, body);
    return nullptr;
  }
  if (auto* t = as<LTuple>(m)) {
    if (!t->parts.empty()) {
      Lam e0;
      std::size_t w0 = 0, i0 = 0;
      if (projection_of(t->parts[0], e0, w0, i0) && w0 == t->parts.size() &&
          i0 == 0) {
        bool all = true;
        for (std::size_t i = 1; i < t->parts.size() && all; ++i) {
          Lam e;
          std::size_t w = 0, ix = 0;
          all = projection_of(t->parts[i], e, w, ix) && w == w0 && ix == i &&
                alpha_equal(e, e0);
        }
        if (all) return e0;
      }
    }
    for (std::size_t i = 0; i < t->parts.size(); ++i)
      if (Lam q = step(t->parts[i])) {
        std::vector<Lam> parts = t->parts;
        parts[i] = q;
        return ltuple(std::move(parts));
      }
    return nullptr;
  }
  if (auto* s = as<LSeq>(m)) {
    if (Lam arg = step(s->arg)) return lseq(s->sym, arg);
    return nullptr;
  }
  if (auto* c = as<LChoice>(m)) {
    if (Lam l = step(c->left)) return lchoice(l, c->right);
    if (Lam r = step(c->right)) return lchoice(c->left, r);
    return nullptr;
  }
  if (auto* g = as<LAssign>(m)) {
    if (Lam v = step(g->value)) return lassign(g->cell, v, g->body);
    if (Lam b = step(g->body)) return lassign(g->cell, g->value, b);
    return nullptr;
  }
  return nullptr;
}

}  // namespace

LamNormResult normalize(const Lam& m, int fuel) {
  LamNormResult r{m, 0, true};
  while (r.steps < fuel) {
    Lam next = step(r.term);
    if (!next) return r;
    r.term = next;
    ++r.steps;
  }
  r.completed = step(r.term) == nullptr;
  return r;
}

bool beta_eta_equal(const Lam& a, const Lam& b, int fuel) {
  LamNormResult na = normalize(a, fuel);
  LamNormResult nb = normalize(b, fuel);
  if (!na.completed || !nb.completed)
    throw LamError(LamErr::FuelExhausted, "normalization ran out of fuel");
  return alpha_equal(na.term, nb.term);
}

// ---- call-by-value evaluation ----

namespace {

Lam eval_cbv_go(const Lam& m, int& fuel) {
  if (--fuel < 0) throw LamError(LamErr::FuelExhausted, "evaluation ran out of fuel");
  if (as<LAbs>(m) || as<LConst>(m)) return m;
  if (as<LVar>(m))
    throw LamError(LamErr::UnboundVariable, "free variable in evaluation: " + show(m));
  if (auto* t = as<LTuple>(m)) {
    std::vector<Lam> parts;
    for (const Lam& q : t->parts) parts.push_back(eval_cbv_go(q, fuel));
    return ltuple(std::move(parts));
  }
  if (auto* s = as<LSeq>(m)) return lseq(s->sym, eval_cbv_go(s->arg, fuel));
  if (auto* a = as<LApp>(m)) {
    Lam va = eval_cbv_go(a->arg, fuel);
    Lam vf = eval_cbv_go(a->fn, fuel);
    auto* f = as<LAbs>(vf);
    if (!f)
      throw LamError(LamErr::NotAFunction, "applied value " + show(vf));
    Lam body = beta_contract(*f, va);
    if (!body)
      throw LamError(LamErr::PatternShape,
                     "value " + show(va) + " does not match " + show(f->pat));
    return eval_cbv_go(body, fuel);
  }
  throw LamError(LamErr::UnsupportedConstruct,
                 "effect primitive in pure evaluation: " + show(m));
}

}  // namespace

Lam eval_cbv(const Lam& m, int fuel) { return eval_cbv_go(m, fuel); }

// ---- generation ----

namespace {

struct LamGen {
  const LambdaSig& sig;
  std::mt19937_64& rng;
  const LamGenConfig& cfg;
  int budget;
  int fresh = 0;

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }
  bool coin(double p) {
    return std::uniform_real_distribution<double>(0, 1)(rng) < p;
  }

  LType base_at(int i) const {
    auto it = sig.bases.begin();
    std::advance(it, i);
    return lbase(*it);
  }

  // Arrow codomains stay base or arrow so applications never return tuples.
  LType gen_type(int depth, bool allow_prod) {
    int nb = static_cast<int>(sig.bases.size());
    if (depth <= 0) return base_at(pick(nb));
    int r = pick(allow_prod && cfg.products ? 3 : 2);
    if (r == 0) return base_at(pick(nb));
    if (r == 1) return larrow(gen_type(depth - 1, true), gen_type(depth - 1, false));
    int width = 2 + pick(2);
    std::vector<LType> parts;
    for (int i = 0; i < width; ++i) parts.push_back(gen_type(depth - 1, false));
    return lprod(std::move(parts));
  }

  // Mirrors pattern_for: binding a product domain exposes its components.
  void split_dom(const LType& t, LamContext& ctx) {
    if (auto* p = std::get_if<LProd>(&t->node)) {
      for (const LType& q : p->parts) split_dom(q, ctx);
      return;
    }
    ctx.emplace_back("_", t);
  }

  // Whether gen can build a closed-over-ctx term of this type: abstraction
  // always applies to arrows, so the question recurses into codomains.
  bool inhabited(const LType& t, const LamContext& ctx) {
    if (auto* f = std::get_if<LArrow>(&t->node)) {
      LamContext inner = ctx;
      split_dom(f->dom, inner);
      return inhabited(f->cod, inner);
    }
    if (auto* p = std::get_if<LProd>(&t->node)) {
      for (const LType& q : p->parts)
        if (!inhabited(q, ctx)) return false;
      return true;
    }
    for (const auto& [x, xt] : ctx)
      if (type_equal(xt, t)) return true;
    for (const auto& [k, kt] : sig.consts)
      if (type_equal(kt, t)) return true;
    return false;
  }

  std::string fresh_var() { return "v" + std::to_string(fresh++); }

  // A pattern binding t: tuple patterns exactly mirror product types.
  Pattern pattern_for(const LType& t, LamContext& ctx) {
    if (auto* p = std::get_if<LProd>(&t->node)) {
      std::vector<Pattern> parts;
      for (const LType& q : p->parts) parts.push_back(pattern_for(q, ctx));
      return ptuple(std::move(parts));
    }
    std::string x = fresh_var();
    ctx.emplace_back(x, t);
    return pvar(x);
  }

  Lam smallest(const LType& t, const LamContext& ctx) {
    if (auto* f = std::get_if<LArrow>(&t->node)) {
      LamContext inner = ctx;
      Pattern p = pattern_for(f->dom, inner);
      return labs(p, std::optional<LType>(f->dom), smallest(f->cod, inner));
    }
    if (auto* pr = std::get_if<LProd>(&t->node)) {
      std::vector<Lam> parts;
      for (const LType& q : pr->parts) parts.push_back(smallest(q, ctx));
      return ltuple(std::move(parts));
    }
    for (const auto& [x, xt] : ctx)
      if (type_equal(xt, t)) return lvar(x);
    for (const auto& [k, kt] : sig.consts)
      if (type_equal(kt, t)) return lconst(k);
    throw LamError(LamErr::TypeMismatch, "uninhabited target " + show(t));
  }

  Lam gen(const LType& t, const LamContext& ctx) {
    --budget;
    std::vector<Lam> vars;
    for (const auto& [x, xt] : ctx)
      if (type_equal(xt, t)) vars.push_back(lvar(x));
    if (budget <= 0) {
      if (!vars.empty()) return vars[pick(static_cast<int>(vars.size()))];
      return smallest(t, ctx);
    }
    // Applications keep the round trip interesting; try one first sometimes.
    if (coin(0.35)) {
      for (int attempt = 0; attempt < 3; ++attempt) {
        LType d = gen_type(cfg.type_depth - 1, true);
        if (!inhabited(d, ctx)) continue;
        budget -= 1;
        Lam fn = gen(larrow(d, t), ctx);
        Lam arg = gen(d, ctx);
        return lapp(fn, arg);
      }
    }
    if (!vars.empty() && coin(0.4))
      return vars[pick(static_cast<int>(vars.size()))];
    if (auto* f = std::get_if<LArrow>(&t->node)) {
      LamContext inner = ctx;
      Pattern p = pattern_for(f->dom, inner);
      return labs(p, std::optional<LType>(f->dom), gen(f->cod, inner));
    }
    if (auto* pr = std::get_if<LProd>(&t->node)) {
      std::vector<Lam> parts;
      for (const LType& q : pr->parts) parts.push_back(gen(q, ctx));
      return ltuple(std::move(parts));
    }
    if (!vars.empty()) return vars[pick(static_cast<int>(vars.size()))];
    return smallest(t, ctx);
  }
};

}  // namespace

LamGenTerm generate_lambda(const LambdaSig& sig, std::mt19937_64& rng,
                           const LamGenConfig& cfg) {
  if (sig.bases.empty())
    throw LamError(LamErr::UnknownConstant, "signature declares no base types");
  LamGen g{sig, rng, cfg, cfg.max_size, 0};
  // Closed terms need an inhabited top-level type.
  LType t;
  for (int attempt = 0;; ++attempt) {
    LType dom = g.gen_type(cfg.type_depth - 1, true);
    LType cod = g.gen_type(cfg.type_depth - 1, false);
    t = larrow(dom, cod);
    if (g.inhabited(t, {})) break;
    if (attempt > 200)
      throw LamError(LamErr::TypeMismatch, "no inhabited type found");
  }
  Lam m = g.gen(t, {});
  return LamGenTerm{m, t};
}

// ---- parsing ----

namespace {

struct LamParser {
  const std::string& src;
  std::size_t pos = 0;
  std::set<std::string> bound;

  [[noreturn]] void fail(const std::string& msg) {
    throw LamError(LamErr::UnsupportedConstruct,
                   msg + " at offset " + std::to_string(pos));
  }

  void skip() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
      ++pos;
  }
  bool lit(const std::string& s) {
    skip();
    if (src.compare(pos, s.size(), s) == 0) {
      pos += s.size();
      return true;
    }
    return false;
  }
  bool peek(const std::string& s) {
    skip();
    return src.compare(pos, s.size(), s) == 0;
  }
  std::string ident() {
    skip();
    std::size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_' ||
            src[pos] == '\''))
      ++pos;
    if (start == pos) fail("expected identifier");
    return src.substr(start, pos - start);
  }

  Pattern pattern() {
    if (lit("(")) {
      if (lit(")")) return ptuple({});
      std::vector<Pattern> parts{pattern()};
      while (lit(",")) parts.push_back(pattern());
      if (!lit(")")) fail("expected ')'");
      return parts.size() == 1 ? parts[0] : ptuple(std::move(parts));
    }
    return pvar(ident());
  }

  Lam term() {
    if (lit("\\")) {
      std::vector<Pattern> pats{pattern()};
      while (!peek(".")) pats.push_back(pattern());
      if (!lit(".")) fail("expected '.'");
      std::vector<std::string> added;
      for (const Pattern& p : pats)
        for (const std::string& x : pattern_vars(p))
          if (bound.insert(x).second) added.push_back(x);
      Lam body = term();
      for (const std::string& x : added) bound.erase(x);
      for (auto it = pats.rbegin(); it != pats.rend(); ++it)
        body = labs(*it, std::nullopt, body);
      return body;
    }
    // assignment: IDENT ':=' term ';' term
    skip();
    std::size_t save = pos;
    if (pos < src.size() && std::isalnum(static_cast<unsigned char>(src[pos]))) {
      std::string name = ident();
      if (lit(":=")) {
        Lam value = choice();
        if (!lit(";")) fail("expected ';'");
        return lassign(name, value, term());
      }
      pos = save;
    }
    return choice();
  }

  Lam choice() {
    Lam l = app();
    while (lit("(+)")) l = lchoice(l, app());
    return l;
  }

  bool atom_ahead() {
    skip();
    if (pos >= src.size()) return false;
    char c = src[pos];
    if (c == '(' && !peek("(+)")) return true;
    if (c == '!') return true;
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  Lam app() {
    Lam m = atom();
    while (atom_ahead()) m = lapp(m, atom());
    return m;
  }

  Lam atom() {
    if (lit("!")) return lderef(ident());
    if (lit("(")) {
      if (lit(")")) return ltuple({});
      std::vector<Lam> parts{term()};
      while (lit(",")) parts.push_back(term());
      if (!lit(")")) fail("expected ')'");
      return parts.size() == 1 ? parts[0] : ltuple(std::move(parts));
    }
    std::string name = ident();
    return bound.count(name) ? lvar(name) : lconst(name);
  }
};

}  // namespace

Lam parse_lambda(const std::string& text) {
  LamParser p{text, 0, {}};
  Lam m = p.term();
  p.skip();
  if (p.pos != text.size()) p.fail("trailing input");
  return m;
}

}  // namespace fmc::lam
