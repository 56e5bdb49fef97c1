#include "fmc/rewrite.hpp"

#include <map>
#include <set>
#include <string>

namespace fmc {

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Beta: return "beta";
    case Rule::Pi: return "pi";
    case Rule::Phi: return "phi";
    case Rule::Tau: return "tau";
  }
  return "?";
}

namespace {

// !{?V.*}, the collapsible thunk form.
const Val* tau_inner(const Val& v) {
  auto* th = as<Thunk>(v);
  if (!th) return nullptr;
  auto* f = as<Force>(th->body);
  if (!f || !as<Star>(f->next)) return nullptr;
  return &f->value;
}

void scan(const Comp& c, std::vector<int>& path, std::vector<Redex>& out);

void scan_value(const Val& v, std::vector<int>& path, std::vector<Redex>& out) {
  if (auto* th = as<Thunk>(v)) {
    path.push_back(1);
    scan(th->body, path, out);
    path.pop_back();
  }
}

void scan(const Comp& c, std::vector<int>& path, std::vector<Redex>& out) {
  if (as<Star>(c)) return;
  if (auto* q = as<Push>(c)) {
    if (auto* p = as<Pop>(q->next))
      out.push_back({p->loc == q->loc ? Rule::Beta : Rule::Pi, path});
    if (tau_inner(q->value)) out.push_back({Rule::Tau, path});
    scan_value(q->value, path, out);
    path.push_back(0);
    scan(q->next, path, out);
    path.pop_back();
    return;
  }
  if (auto* f = as<Force>(c)) {
    if (as<Thunk>(f->value)) out.push_back({Rule::Phi, path});
    if (tau_inner(f->value)) out.push_back({Rule::Tau, path});
    scan_value(f->value, path, out);
    path.push_back(0);
    scan(f->next, path, out);
    path.pop_back();
    return;
  }
  const Comp& next = as<Pop>(c) ? as<Pop>(c)->next : as<SeqConst>(c)->next;
  path.push_back(0);
  scan(next, path, out);
  path.pop_back();
}

Comp apply_here(const Comp& c, Rule rule) {
  switch (rule) {
    case Rule::Beta: {
      auto* q = as<Push>(c);
      auto* p = q ? as<Pop>(q->next) : nullptr;
      if (!p || p->loc != q->loc) throw RewriteError("beta: pattern does not match");
      return substitute(q->value, p->binder, p->next);
    }
    case Rule::Pi: {
      auto* q = as<Push>(c);
      auto* p = q ? as<Pop>(q->next) : nullptr;
      if (!p || p->loc == q->loc) throw RewriteError("pi: pattern does not match");
      VarName b = p->binder;
      Comp body = p->next;
      if (free_vars(q->value).count(b)) {
        std::set<VarName> avoid = all_names(body);
        auto fv = free_vars(q->value);
        avoid.insert(fv.begin(), fv.end());
        VarName nb = fresh_name(b, avoid);
        body = substitute(var(nb), b, body);
        b = nb;
      }
      return pop(p->loc, b, p->ann, push(q->value, q->loc, body));
    }
    case Rule::Phi: {
      auto* f = as<Force>(c);
      auto* th = f ? as<Thunk>(f->value) : nullptr;
      if (!th) throw RewriteError("phi: pattern does not match");
      return sequence(th->body, f->next);
    }
    case Rule::Tau: {
      if (auto* q = as<Push>(c)) {
        const Val* inner = tau_inner(q->value);
        if (!inner) throw RewriteError("tau: pattern does not match");
        return push(*inner, q->loc, q->next);
      }
      if (auto* f = as<Force>(c)) {
        const Val* inner = tau_inner(f->value);
        if (!inner) throw RewriteError("tau: pattern does not match");
        return force(*inner, f->next);
      }
      throw RewriteError("tau: pattern does not match");
    }
  }
  throw RewriteError("unknown rule");
}

Comp apply_at(const Comp& c, const Redex& r, std::size_t i) {
  if (i == r.path.size()) return apply_here(c, r.rule);
  if (r.path[i] == 0) {
    if (auto* q = as<Push>(c)) return push(q->value, q->loc, apply_at(q->next, r, i + 1));
    if (auto* p = as<Pop>(c))
      return pop(p->loc, p->binder, p->ann, apply_at(p->next, r, i + 1));
    if (auto* f = as<Force>(c)) return force(f->value, apply_at(f->next, r, i + 1));
    if (auto* s = as<SeqConst>(c)) return seqconst(s->sym, apply_at(s->next, r, i + 1));
    throw RewriteError("path walks past the end of the term");
  }
  const Val* v = nullptr;
  if (auto* q = as<Push>(c)) v = &q->value;
  if (auto* f = as<Force>(c)) v = &f->value;
  auto* th = v ? as<Thunk>(*v) : nullptr;
  if (!th) throw RewriteError("path descends into a non-thunk value");
  Val nv = thunk(apply_at(th->body, r, i + 1));
  if (auto* q = as<Push>(c)) return push(nv, q->loc, q->next);
  return force(nv, as<Force>(c)->next);
}

}  // namespace

std::vector<Redex> find_redexes(const Comp& term) {
  std::vector<Redex> out;
  std::vector<int> path;
  scan(term, path, out);
  return out;
}

Comp apply_redex(const Comp& term, const Redex& r) { return apply_at(term, r, 0); }

NormalizeResult normalize(const Comp& term, Strategy strategy, std::size_t fuel,
                          bool record) {
  NormalizeResult res;
  res.term = term;
  while (res.steps < fuel) {
    std::vector<Redex> rs = find_redexes(res.term);
    if (rs.empty()) {
      res.completed = true;
      return res;
    }
    const Redex& pick =
        strategy == Strategy::LeftmostOutermost ? rs.front() : rs.back();
    Comp after = apply_redex(res.term, pick);
    if (record) res.trail.push_back({pick.rule, res.term, after});
    res.term = std::move(after);
    res.steps++;
  }
  res.completed = find_redexes(res.term).empty();
  return res;
}

AllPathsResult all_normal_forms(const Comp& term, std::size_t max_states) {
  AllPathsResult res;
  std::set<std::string> seen{canon_key(term)};
  std::map<std::string, Comp> normals;
  std::vector<Comp> work{term};
  while (!work.empty()) {
    if (res.visited >= max_states) {
      res.exhausted = true;
      break;
    }
    Comp t = work.back();
    work.pop_back();
    res.visited++;
    std::vector<Redex> rs = find_redexes(t);
    if (rs.empty()) {
      normals.emplace(canon_key(t), t);
      continue;
    }
    for (const Redex& r : rs) {
      Comp u = apply_redex(t, r);
      if (seen.insert(canon_key(u)).second) work.push_back(u);
    }
  }
  for (auto& [key, t] : normals) res.normal_forms.push_back(t);
  return res;
}

namespace {

std::size_t pi_walk(const Comp& c, std::map<std::string, std::size_t> counts);

std::size_t pi_val(const Val& v) {
  if (auto* th = as<Thunk>(v)) return pi_walk(th->body, {});
  return 0;
}

std::size_t pi_walk(const Comp& c, std::map<std::string, std::size_t> counts) {
  if (as<Star>(c)) return 0;
  if (auto* q = as<Push>(c)) {
    std::size_t inner = pi_val(q->value);
    counts[q->loc]++;
    return inner + pi_walk(q->next, std::move(counts));
  }
  if (auto* p = as<Pop>(c)) {
    std::size_t before = 0;
    for (const auto& [loc, n] : counts)
      if (loc != p->loc) before += n;
    return before + pi_walk(p->next, std::move(counts));
  }
  if (auto* f = as<Force>(c)) return pi_val(f->value) + pi_walk(f->next, std::move(counts));
  return pi_walk(as<SeqConst>(c)->next, std::move(counts));
}

}  // namespace

std::size_t pi_measure(const Comp& term) { return pi_walk(term, {}); }

}  // namespace fmc
