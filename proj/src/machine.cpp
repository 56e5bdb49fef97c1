#include "fmc/machine.hpp"

#include <ostream>
#include <random>

#include "fmc/surface.hpp"
#include "json.hpp"

namespace fmc {

std::string StuckInfo::describe() const {
  switch (reason) {
    case Reason::EmptyPop:
      return "pop from empty stack at " + loc;
    case Reason::UnhandledConst:
      return "no rule for constant " + detail;
    case Reason::PolicyViolation:
      return "policy violation at " + loc + ": " + detail;
  }
  return "stuck";
}

namespace {

StepOutcome stuck(StuckInfo::Reason r, std::string loc, std::string detail) {
  return StepOutcome{StepStatus::Stuck, "", "",
                     StuckInfo{r, std::move(loc), std::move(detail)}};
}

}  // namespace

StepOutcome step(MachineState& st, const DeltaTable* delta) {
  const Comp c = st.focus;
  if (as<Star>(c)) return StepOutcome{StepStatus::Success, "", "", std::nullopt};

  if (auto* q = as<Push>(c)) {
    PolicyKind kind = st.memory.policy(q->loc);
    if (kind == PolicyKind::ReadStream)
      return stuck(StuckInfo::Reason::PolicyViolation, q->loc, "push to a read stream");
    auto& vec = st.memory.stacks[q->loc];
    if (kind == PolicyKind::Cell && !vec.empty())
      return stuck(StuckInfo::Reason::PolicyViolation, q->loc, "cell already holds a value");
    vec.push_back(q->value);
    st.focus = q->next;
    ++st.steps;
    return StepOutcome{StepStatus::Stepped, "push", q->loc, std::nullopt};
  }

  if (auto* p = as<Pop>(c)) {
    PolicyKind kind = st.memory.policy(p->loc);
    if (kind == PolicyKind::WriteStream)
      return stuck(StuckInfo::Reason::PolicyViolation, p->loc, "pop from a write stream");
    Val v;
    if (kind == PolicyKind::ReadStream && st.memory.policies[p->loc].generate) {
      v = st.memory.policies[p->loc].generate();
    } else {
      auto& vec = st.memory.stacks[p->loc];
      if (vec.empty()) return stuck(StuckInfo::Reason::EmptyPop, p->loc, "");
      v = vec.back();
      vec.pop_back();
    }
    st.focus = substitute(v, p->binder, p->next);
    ++st.steps;
    return StepOutcome{StepStatus::Stepped, "pop", p->loc, std::nullopt};
  }

  if (auto* f = as<Force>(c)) {
    if (auto* th = as<Thunk>(f->value)) {
      st.focus = sequence(th->body, f->next);
      ++st.steps;
      return StepOutcome{StepStatus::Stepped, "force", "", std::nullopt};
    }
    if (auto* k = as<ValConst>(f->value))
      return stuck(StuckInfo::Reason::UnhandledConst, "", k->sym);
    return stuck(StuckInfo::Reason::UnhandledConst, "", as<Var>(f->value)->name.str());
  }

  auto* s = as<SeqConst>(c);
  if (delta) {
    auto it = delta->find(s->sym);
    if (it != delta->end()) {
      const DeltaRule& rule = it->second;
      auto& vec = st.memory.stacks[rule.loc];
      if (vec.size() < rule.arity)
        return stuck(StuckInfo::Reason::EmptyPop, rule.loc, "");
      std::vector<Val> args(vec.end() - static_cast<std::ptrdiff_t>(rule.arity), vec.end());
      vec.resize(vec.size() - rule.arity);
      for (Val& r : rule.apply(args)) vec.push_back(std::move(r));
      st.focus = s->next;
      ++st.steps;
      return StepOutcome{StepStatus::Stepped, "delta", rule.loc, std::nullopt};
    }
  }
  return stuck(StuckInfo::Reason::UnhandledConst, "", s->sym);
}

RunResult run(Memory memory, Comp term, std::uint64_t fuel, std::ostream* trace,
              const DeltaTable* delta) {
  MachineState st{std::move(memory), std::move(term), 0};
  while (true) {
    if (as<Star>(st.focus))
      return RunResult{RunResult::Status::Success, std::move(st.memory), st.steps,
                       std::nullopt, st.focus};
    if (st.steps >= fuel)
      return RunResult{RunResult::Status::FuelExhausted, std::move(st.memory), st.steps,
                       std::nullopt, st.focus};
    StepOutcome out = step(st, delta);
    if (out.status == StepStatus::Stuck)
      return RunResult{RunResult::Status::Stuck, std::move(st.memory), st.steps,
                       std::move(out.stuck), st.focus};
    if (trace) {
      nlohmann::json line;
      line["step"] = st.steps;
      line["rule"] = out.rule;
      if (!out.loc.empty()) line["loc"] = out.loc;
      line["focus"] = show_plain(st.focus);
      nlohmann::json mem = nlohmann::json::object();
      for (const auto& [loc, vec] : st.memory.stacks) {
        if (vec.empty()) continue;
        nlohmann::json arr = nlohmann::json::array();
        for (const Val& v : vec) arr.push_back(show(v));
        mem[loc] = std::move(arr);
      }
      line["memory"] = std::move(mem);
      *trace << line.dump() << "\n";
    }
  }
}

// ---- standard values and memories ----

Val church_true() {
  static const Val v = thunk(pop(kMainLoc, VarName{"x"}, std::nullopt,
                                 pop(kMainLoc, VarName{"y"}, std::nullopt,
                                     force(var(VarName{"x"}), star()))));
  return v;
}

Val church_false() {
  static const Val v = thunk(pop(kMainLoc, VarName{"x"}, std::nullopt,
                                 pop(kMainLoc, VarName{"y"}, std::nullopt,
                                     force(var(VarName{"y"}), star()))));
  return v;
}

std::function<Val()> boolean_stream(std::uint64_t seed) {
  auto engine = std::make_shared<std::mt19937_64>(seed);
  return [engine]() -> Val {
    return ((*engine)() & 1u) ? church_true() : church_false();
  };
}

Memory default_memory(std::uint64_t seed) {
  Memory mem;
  mem.policies["rnd"] = Policy{PolicyKind::ReadStream, boolean_stream(seed)};
  mem.policies["in"] = Policy{PolicyKind::ReadStream, nullptr};
  mem.policies["out"] = Policy{PolicyKind::WriteStream, nullptr};
  return mem;
}

void script_stream(Memory& mem, const std::string& loc, std::vector<Val> items) {
  mem.policies[loc] = Policy{PolicyKind::ReadStream, nullptr};
  auto& vec = mem.stacks[loc];
  vec.assign(items.rbegin(), items.rend());
}

std::map<std::string, std::vector<std::string>> memory_strings(const Memory& mem) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [loc, vec] : mem.stacks) {
    if (vec.empty()) continue;
    auto& dst = out[loc];
    dst.reserve(vec.size());
    for (const Val& v : vec) dst.push_back(show(v));
  }
  return out;
}

}  // namespace fmc
