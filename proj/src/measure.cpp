#include "fmc/measure.hpp"

#include <utility>

namespace fmc {

namespace {

[[noreturn]] void out_of_fragment(const std::string& what) {
  throw MeasureError(MeasureErr::OutOfFragment, what);
}

[[noreturn]] void mismatch(const std::string& what) {
  throw MeasureError(MeasureErr::DerivationMismatch, what);
}

SemCount walk(const Comp& c, const Deriv& d, const Valuation& v,
              MeasureKind kind, const SemMem& s);

SemFun value_fun(const Val& val, const ValDeriv& vd, const Valuation& v,
                 MeasureKind kind) {
  if (auto* x = as<Var>(val)) {
    auto it = v.find(x->name);
    if (it == v.end()) mismatch("valuation does not cover " + x->name.str());
    return it->second;
  }
  if (auto* th = as<Thunk>(val)) {
    if (vd.type.is_base() || !vd.body)
      mismatch("thunk derivation lacks an arrow type");
    CompType arrow = vd.type.comp();
    Comp body = th->body;
    Deriv bd = vd.body;
    return SemFun{arrow, [body, bd, v, kind](const SemMem& r) {
                    return walk(body, bd, v, kind, r);
                  }};
  }
  out_of_fragment("value constant has no functional meaning");
}

SemCount walk(const Comp& c, const Deriv& d, const Valuation& v,
              MeasureKind kind, const SemMem& s) {
  if (!d) mismatch("derivation shorter than the term");
  if (as<Star>(c)) return SemCount{0, s};

  if (auto* p = as<Pop>(c)) {
    auto it = s.find(p->loc);
    if (it == s.end() || it->second.empty())
      mismatch("no input on " + p->loc + " for a pop");
    SemFun f = it->second.back();
    SemMem rest = s;
    rest[p->loc].pop_back();
    if (rest[p->loc].empty()) rest.erase(p->loc);
    Valuation v2 = v;
    v2.insert_or_assign(p->binder, std::move(f));
    SemCount r = walk(p->next, d->next, v2, kind, rest);
    return SemCount{1 + r.count, std::move(r.mem)};
  }

  if (auto* pu = as<Push>(c)) {
    if (!d->value) mismatch("push derivation lacks a value type");
    SemFun g = value_fun(pu->value, *d->value, v, kind);
    long long charge = kind == MeasureKind::Strong ? collapse_measure(g) : 0;
    SemMem grown = s;
    grown[pu->loc].push_back(std::move(g));
    SemCount r = walk(pu->next, d->next, v, kind, grown);
    return SemCount{1 + charge + r.count, std::move(r.mem)};
  }

  if (auto* fo = as<Force>(c)) {
    if (!d->value) mismatch("force derivation lacks a value type");
    SemFun g = value_fun(fo->value, *d->value, v, kind);
    if (d->value->type.is_base()) out_of_fragment("forcing a base-typed value");
    const CompType use = d->value->type.comp();

    // Split off the top segment the value consumes, feed it through, and lay
    // the produced memory back on top of the remainder.
    SemMem rest = s;
    SemMem arg;
    for (const auto& [loc, need] : use.dom) {
      auto it = rest.find(loc);
      if (it == rest.end() || it->second.size() < need.size())
        mismatch("input on " + loc + " too shallow for a force");
      SemStack& stack = it->second;
      arg[loc].assign(stack.end() - static_cast<long>(need.size()), stack.end());
      stack.erase(stack.end() - static_cast<long>(need.size()), stack.end());
      if (stack.empty()) rest.erase(loc);
    }
    SemCount produced = g.apply(arg);
    for (auto& [loc, stack] : produced.mem) {
      SemStack& dst = rest[loc];
      dst.insert(dst.end(), stack.begin(), stack.end());
    }
    SemCount r = walk(fo->next, d->next, v, kind, rest);
    return SemCount{1 + produced.count + r.count, std::move(r.mem)};
  }

  out_of_fragment("computation constant has no functional meaning");
}

}  // namespace

SemFun zero_element(const ValueType& t) {
  if (t.is_base()) out_of_fragment("base type " + t.base + " has no least functional");
  CompType arrow = t.comp();
  MemoryType cod = arrow.cod;
  return SemFun{std::move(arrow), [cod](const SemMem&) {
                  return SemCount{0, zero_memory(cod)};
                }};
}

SemMem zero_memory(const MemoryType& m) {
  SemMem out;
  for (const auto& [loc, stack] : m) {
    SemStack& dst = out[loc];
    dst.reserve(stack.size());
    for (const ValueType& t : stack) dst.push_back(zero_element(t));
  }
  return out;
}

Valuation least_valuation(const Context& ctx) {
  Valuation v;
  for (const auto& [name, type] : ctx.entries)
    v.insert_or_assign(name, zero_element(type));
  return v;
}

SemFun interpret(const Signature& sig, const Context& ctx, const Comp& term,
                 const CompType& type, const Valuation& v, MeasureKind kind) {
  Checked chk = check(sig, ctx, term, type);
  Deriv d = chk.deriv;
  return SemFun{type, [term, d, v, kind](const SemMem& s) {
                  return walk(term, d, v, kind, s);
                }};
}

SemFun interpret_value(const Signature& sig, const Val& value,
                       const ValueType& type, MeasureKind kind) {
  if (type.is_base()) out_of_fragment("base type " + type.base + " is not interpreted");
  if (auto* th = as<Thunk>(value)) {
    Checked chk = check(sig, Context{}, th->body, type.comp());
    ValDeriv vd{type, chk.deriv};
    return value_fun(value, vd, Valuation{}, kind);
  }
  if (as<ValConst>(value)) out_of_fragment("value constant is not interpreted");
  mismatch("open value cannot be interpreted without a valuation");
}

SemMem interpret_memory(const Signature& sig,
                        const std::map<std::string, std::vector<Val>>& stacks,
                        const MemoryType& type, MeasureKind kind) {
  SemMem out;
  for (const auto& [loc, want] : type) {
    auto it = stacks.find(loc);
    size_t have = it == stacks.end() ? 0 : it->second.size();
    if (have != want.size())
      mismatch("stack at " + loc + " does not fit the memory type");
    SemStack& dst = out[loc];
    for (size_t i = 0; i < want.size(); ++i)
      dst.push_back(interpret_value(sig, it->second[i], want[i], kind));
  }
  for (const auto& [loc, stack] : stacks)
    if (!stack.empty() && !type.count(loc))
      mismatch("stack at " + loc + " absent from the memory type");
  return out;
}

long long collapse_measure(const SemFun& f) {
  return f.apply(zero_memory(f.type.dom)).count;
}

}  // namespace fmc
