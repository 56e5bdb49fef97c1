#include "fmc/term.hpp"

#include <algorithm>
#include <sstream>

namespace fmc {

Comp star() {
  static const Comp s = std::make_shared<Computation>(Computation{Star{}});
  return s;
}
Comp seqconst(std::string sym, Comp next) {
  return std::make_shared<Computation>(Computation{SeqConst{std::move(sym), std::move(next)}});
}
Comp push(Val v, std::string loc, Comp next) {
  return std::make_shared<Computation>(Computation{Push{std::move(v), std::move(loc), std::move(next)}});
}
Comp pop(std::string loc, VarName binder, std::optional<ValueType> ann, Comp next) {
  return std::make_shared<Computation>(
      Computation{Pop{std::move(loc), std::move(binder), std::move(ann), std::move(next)}});
}
Comp force(Val v, Comp next) {
  return std::make_shared<Computation>(Computation{Force{std::move(v), std::move(next)}});
}

Val var(VarName name) { return std::make_shared<Value>(Value{Var{std::move(name)}}); }
Val var(std::string base) { return var(VarName{std::move(base), 0}); }
Val vconst(std::string sym) { return std::make_shared<Value>(Value{ValConst{std::move(sym)}}); }
Val thunk(Comp body) { return std::make_shared<Value>(Value{Thunk{std::move(body)}}); }

std::size_t term_size(const Comp& c) {
  return std::visit(
      [](auto&& n) -> std::size_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Star>) return 1;
        else if constexpr (std::is_same_v<T, SeqConst>) return 1 + term_size(n.next);
        else if constexpr (std::is_same_v<T, Push>) return 1 + term_size(n.value) + term_size(n.next);
        else if constexpr (std::is_same_v<T, Pop>) return 1 + term_size(n.next);
        else return 1 + term_size(n.value) + term_size(n.next);
      },
      c->node);
}

std::size_t term_size(const Val& v) {
  return std::visit(
      [](auto&& n) -> std::size_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Thunk>) return 1 + term_size(n.body);
        else return 1;
      },
      v->node);
}

namespace {

void collect_free(const Comp& c, std::set<VarName>& bound, std::set<VarName>& out);

void collect_free(const Val& v, std::set<VarName>& bound, std::set<VarName>& out) {
  if (auto* x = as<Var>(v)) {
    if (!bound.count(x->name)) out.insert(x->name);
  } else if (auto* t = as<Thunk>(v)) {
    collect_free(t->body, bound, out);
  }
}

void collect_free(const Comp& c, std::set<VarName>& bound, std::set<VarName>& out) {
  std::visit(
      [&](auto&& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Star>) {
        } else if constexpr (std::is_same_v<T, SeqConst>) {
          collect_free(n.next, bound, out);
        } else if constexpr (std::is_same_v<T, Push>) {
          collect_free(n.value, bound, out);
          collect_free(n.next, bound, out);
        } else if constexpr (std::is_same_v<T, Pop>) {
          bool fresh = bound.insert(n.binder).second;
          collect_free(n.next, bound, out);
          if (fresh) bound.erase(n.binder);
        } else {
          collect_free(n.value, bound, out);
          collect_free(n.next, bound, out);
        }
      },
      c->node);
}

void collect_all(const Comp& c, std::set<VarName>& out);

void collect_all(const Val& v, std::set<VarName>& out) {
  if (auto* x = as<Var>(v)) out.insert(x->name);
  else if (auto* t = as<Thunk>(v)) collect_all(t->body, out);
}

void collect_all(const Comp& c, std::set<VarName>& out) {
  std::visit(
      [&](auto&& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Star>) {
        } else if constexpr (std::is_same_v<T, SeqConst>) {
          collect_all(n.next, out);
        } else if constexpr (std::is_same_v<T, Push>) {
          collect_all(n.value, out);
          collect_all(n.next, out);
        } else if constexpr (std::is_same_v<T, Pop>) {
          out.insert(n.binder);
          collect_all(n.next, out);
        } else {
          collect_all(n.value, out);
          collect_all(n.next, out);
        }
      },
      c->node);
}

}  // namespace

std::set<VarName> free_vars(const Comp& c) {
  std::set<VarName> bound, out;
  collect_free(c, bound, out);
  return out;
}

std::set<VarName> free_vars(const Val& v) {
  std::set<VarName> bound, out;
  collect_free(v, bound, out);
  return out;
}

std::set<VarName> all_names(const Comp& c) {
  std::set<VarName> out;
  collect_all(c, out);
  return out;
}

std::set<VarName> all_names(const Val& v) {
  std::set<VarName> out;
  collect_all(v, out);
  return out;
}

VarName fresh_name(const VarName& hint, const std::set<VarName>& avoid) {
  VarName cand = hint;
  while (avoid.count(cand)) cand.index++;
  return cand;
}

// ---- alpha equivalence ----

namespace {

struct AlphaEnv {
  // Binder names mapped to de-Bruijn-style levels on each side.
  std::map<VarName, int> left, right;
  int depth = 0;

  bool var_equal(const VarName& a, const VarName& b) const {
    auto la = left.find(a);
    auto lb = right.find(b);
    if (la != left.end() || lb != right.end())
      return la != left.end() && lb != right.end() && la->second == lb->second;
    return a == b;  // both free
  }
};

bool alpha_comp(const Comp& a, const Comp& b, AlphaEnv& env);

bool alpha_val(const Val& a, const Val& b, AlphaEnv& env) {
  if (a->node.index() != b->node.index()) return false;
  if (auto* x = as<Var>(a)) return env.var_equal(x->name, as<Var>(b)->name);
  if (auto* k = as<ValConst>(a)) return k->sym == as<ValConst>(b)->sym;
  return alpha_comp(as<Thunk>(a)->body, as<Thunk>(b)->body, env);
}

bool alpha_comp(const Comp& a, const Comp& b, AlphaEnv& env) {
  if (a->node.index() != b->node.index()) return false;
  if (as<Star>(a)) return true;
  if (auto* c = as<SeqConst>(a)) {
    auto* d = as<SeqConst>(b);
    return c->sym == d->sym && alpha_comp(c->next, d->next, env);
  }
  if (auto* p = as<Push>(a)) {
    auto* q = as<Push>(b);
    return p->loc == q->loc && alpha_val(p->value, q->value, env) &&
           alpha_comp(p->next, q->next, env);
  }
  if (auto* p = as<Pop>(a)) {
    auto* q = as<Pop>(b);
    if (p->loc != q->loc) return false;
    AlphaEnv inner = env;
    inner.depth++;
    inner.left[p->binder] = inner.depth;
    inner.right[q->binder] = inner.depth;
    return alpha_comp(p->next, q->next, inner);
  }
  auto* f = as<Force>(a);
  auto* g = as<Force>(b);
  return alpha_val(f->value, g->value, env) && alpha_comp(f->next, g->next, env);
}

void key_comp(const Comp& c, std::map<VarName, int>& env, int& depth, std::ostringstream& os);

void key_val(const Val& v, std::map<VarName, int>& env, int& depth, std::ostringstream& os) {
  if (auto* x = as<Var>(v)) {
    auto it = env.find(x->name);
    if (it != env.end()) os << "%" << it->second;
    else os << "$" << x->name.str();
  } else if (auto* k = as<ValConst>(v)) {
    os << "#" << k->sym;
  } else {
    os << "!{";
    key_comp(as<Thunk>(v)->body, env, depth, os);
    os << "}";
  }
}

void key_comp(const Comp& c, std::map<VarName, int>& env, int& depth, std::ostringstream& os) {
  std::visit(
      [&](auto&& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Star>) {
          os << "*";
        } else if constexpr (std::is_same_v<T, SeqConst>) {
          os << n.sym << ".";
          key_comp(n.next, env, depth, os);
        } else if constexpr (std::is_same_v<T, Push>) {
          os << "[";
          key_val(n.value, env, depth, os);
          os << "]" << n.loc << ".";
          key_comp(n.next, env, depth, os);
        } else if constexpr (std::is_same_v<T, Pop>) {
          int level = ++depth;
          os << n.loc << "<%" << level << ">.";
          auto saved = env.find(n.binder) == env.end()
                           ? std::optional<int>{}
                           : std::optional<int>{env[n.binder]};
          env[n.binder] = level;
          key_comp(n.next, env, depth, os);
          if (saved) env[n.binder] = *saved;
          else env.erase(n.binder);
        } else {
          os << "?";
          key_val(n.value, env, depth, os);
          os << ".";
          key_comp(n.next, env, depth, os);
        }
      },
      c->node);
}

}  // namespace

bool alpha_equal(const Comp& a, const Comp& b) {
  AlphaEnv env;
  return alpha_comp(a, b, env);
}

bool alpha_equal(const Val& a, const Val& b) {
  AlphaEnv env;
  return alpha_val(a, b, env);
}

std::string canon_key(const Comp& c) {
  std::ostringstream os;
  std::map<VarName, int> env;
  int depth = 0;
  key_comp(c, env, depth, os);
  return os.str();
}

// ---- substitution ----

namespace {

// Renames binder occurrences: {x'/x} where x' is fresh by construction.
Comp rename(const VarName& from, const VarName& to, const Comp& c) {
  return substitute(var(to), from, c);
}

}  // namespace

Val substitute(const Val& v, const VarName& x, const Val& target) {
  if (auto* y = as<Var>(target)) return y->name == x ? v : target;
  if (as<ValConst>(target)) return target;
  return thunk(substitute(v, x, as<Thunk>(target)->body));
}

Comp substitute(const Val& v, const VarName& x, const Comp& target) {
  return std::visit(
      [&](auto&& n) -> Comp {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Star>) {
          return target;
        } else if constexpr (std::is_same_v<T, SeqConst>) {
          return seqconst(n.sym, substitute(v, x, n.next));
        } else if constexpr (std::is_same_v<T, Push>) {
          return push(substitute(v, x, n.value), n.loc, substitute(v, x, n.next));
        } else if constexpr (std::is_same_v<T, Pop>) {
          if (n.binder == x) return target;  // shadowed
          if (free_vars(v).count(n.binder)) {
            std::set<VarName> avoid = all_names(n.next);
            auto fv = free_vars(v);
            avoid.insert(fv.begin(), fv.end());
            avoid.insert(x);
            VarName nb = fresh_name(n.binder, avoid);
            Comp renamed = rename(n.binder, nb, n.next);
            return pop(n.loc, nb, n.ann, substitute(v, x, renamed));
          }
          return pop(n.loc, n.binder, n.ann, substitute(v, x, n.next));
        } else {
          return force(substitute(v, x, n.value), substitute(v, x, n.next));
        }
      },
      target->node);
}

// ---- sequencing ----

Comp sequence(const Comp& first, const Comp& second) {
  if (as<Star>(second)) return first;
  return std::visit(
      [&](auto&& n) -> Comp {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Star>) {
          return second;
        } else if constexpr (std::is_same_v<T, SeqConst>) {
          return seqconst(n.sym, sequence(n.next, second));
        } else if constexpr (std::is_same_v<T, Push>) {
          return push(n.value, n.loc, sequence(n.next, second));
        } else if constexpr (std::is_same_v<T, Pop>) {
          if (free_vars(second).count(n.binder)) {
            std::set<VarName> avoid = all_names(n.next);
            auto fv = free_vars(second);
            avoid.insert(fv.begin(), fv.end());
            VarName nb = fresh_name(n.binder, avoid);
            return pop(n.loc, nb, n.ann, sequence(rename(n.binder, nb, n.next), second));
          }
          return pop(n.loc, n.binder, n.ann, sequence(n.next, second));
        } else {
          return force(n.value, sequence(n.next, second));
        }
      },
      first->node);
}

// ---- vector notation ----

std::vector<std::string> ordered_locs(const std::set<std::string>& locs) {
  std::vector<std::string> out;
  if (locs.count(kMainLoc)) out.push_back(kMainLoc);
  for (auto& l : locs)
    if (l != kMainLoc) out.push_back(l);
  return out;
}

Comp vector_push(const std::map<std::string, std::vector<Val>>& mem, Comp next) {
  std::set<std::string> locs;
  for (auto& [l, vs] : mem) locs.insert(l);
  auto order = ordered_locs(locs);
  // Build from the last action backwards so pushes run bottom-first.
  Comp acc = std::move(next);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto& vs = mem.at(*it);
    for (auto vit = vs.rbegin(); vit != vs.rend(); ++vit) acc = push(*vit, *it, acc);
  }
  return acc;
}

Comp vector_pop(const std::map<std::string, std::vector<VarName>>& binders, Comp next) {
  std::set<std::string> locs;
  for (auto& [l, xs] : binders) locs.insert(l);
  auto order = ordered_locs(locs);
  Comp acc = std::move(next);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto& xs = binders.at(*it);
    // Binders are listed bottom-first; pops run top-first, so the bottom
    // binder's pop is innermost.
    for (auto xit = xs.begin(); xit != xs.end(); ++xit)
      acc = pop(*it, *xit, std::nullopt, acc);
  }
  return acc;
}

}  // namespace fmc
