// Command-line front end.  Exit codes: 0 success, 1 domain error (stuck
// run, ill-typed term, distinguished equivalence), 2 usage error.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fmc/check.hpp"
#include "fmc/equiv.hpp"
#include "fmc/lambda.hpp"
#include "fmc/machine.hpp"
#include "fmc/measure.hpp"
#include "fmc/rewrite.hpp"
#include "fmc/selftest.hpp"
#include "fmc/surface.hpp"
#include "fmc/term.hpp"
#include "fmc/translate.hpp"
#include "fmc/types.hpp"

namespace {

using nlohmann::ordered_json;
using namespace fmc;

// ---- configuration: TOML-style file, FMC_CONFIG default, flags override ----

struct Config {
  std::string signature;  // program file supplying declarations for --expr
  std::string format = "text";
  std::string strategy = "lo";
  std::string seed = "0";  // number or "random"
  std::uint64_t fuel = 100000;
  int depth = 2;
  std::map<std::string, std::string> policies;  // loc -> plain|read|write|cell
  std::map<std::string, std::string> cells;     // loc -> initial value
  std::map<std::string, std::string> streams;   // loc -> items or file
};

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  std::size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

void load_config_file(Config& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = unquote(trim(line.substr(eq + 1)));
    if (section.empty()) {
      if (key == "signature") cfg.signature = value;
      else if (key == "format") cfg.format = value;
      else if (key == "strategy") cfg.strategy = value;
      else if (key == "seed") cfg.seed = value;
      else if (key == "fuel") cfg.fuel = std::stoull(value);
      else if (key == "depth") cfg.depth = std::stoi(value);
      else
        throw std::runtime_error(path + ": unknown key " + key);
    } else if (section == "policies") {
      cfg.policies[key] = value;
    } else if (section == "cells") {
      cfg.cells[key] = value;
    } else if (section == "streams") {
      cfg.streams[key] = value;
    } else {
      throw std::runtime_error(path + ": unknown section " + section);
    }
  }
}

// ---- shared helpers ----

struct Input {
  Program env;       // signature, defs; main may be null
  Comp term;         // the subject term (null when only declarations)
};

// Positional file or --expr (with the configured signature file as context).
Input load_input(const Config& cfg, const std::string& file,
                 const std::string& expr) {
  Input in;
  if (!file.empty() && !expr.empty())
    throw CLI::ValidationError("give either a file or --expr, not both");
  if (!file.empty()) {
    in.env = parse_program_file(file);
    in.term = in.env.main;
    return in;
  }
  if (!cfg.signature.empty()) in.env = parse_program_file(cfg.signature);
  if (!expr.empty()) in.term = parse_computation(expr, in.env);
  return in;
}

Comp require_term(const Input& in) {
  if (!in.term) throw std::runtime_error("no term: file declares no main term");
  return in.term;
}

Val parse_value_text(const std::string& text, const Program& env) {
  Comp c = parse_computation("[" + text + "]", env);
  return as<Push>(c)->value;
}

std::pair<std::string, std::string> split_kv(const std::string& s,
                                             const char* what) {
  std::size_t eq = s.find('=');
  if (eq == std::string::npos)
    throw CLI::ValidationError(std::string(what) + " expects LOC=VALUE, got " + s);
  return {s.substr(0, eq), s.substr(eq + 1)};
}

std::uint64_t resolve_seed(const std::string& seed) {
  if (seed == "random") {
    std::uint64_t s = std::random_device{}();
    std::cerr << "seed = " << s << "\n";
    return s;
  }
  return std::stoull(seed);
}

PolicyKind policy_kind(const std::string& name) {
  if (name == "plain") return PolicyKind::Plain;
  if (name == "read") return PolicyKind::ReadStream;
  if (name == "write") return PolicyKind::WriteStream;
  if (name == "cell") return PolicyKind::Cell;
  throw CLI::ValidationError("unknown policy " + name +
                             " (plain|read|write|cell)");
}

std::vector<Val> parse_stream_items(const std::string& spec, const Program& env) {
  std::vector<Val> items;
  std::ifstream f(spec);
  if (f) {  // a file: whitespace-separated values
    std::string tok;
    while (f >> tok) items.push_back(parse_value_text(tok, env));
    return items;
  }
  std::stringstream ss(spec);  // inline: comma-separated values
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) items.push_back(parse_value_text(tok, env));
  }
  return items;
}

struct MemoryFlags {
  std::vector<std::string> cells, streams, policies;
};

Memory build_memory(const Config& cfg, const MemoryFlags& mf, const Program& env,
                    std::uint64_t seed) {
  Memory mem = default_memory(seed);
  auto apply_policy = [&](const std::string& loc, const std::string& kind) {
    mem.policies[loc] = Policy{policy_kind(kind), nullptr};
    if (policy_kind(kind) == PolicyKind::ReadStream && loc == kRandLoc)
      mem.policies[loc].generate = boolean_stream(seed);
  };
  for (const auto& [loc, kind] : cfg.policies) apply_policy(loc, kind);
  for (const std::string& s : mf.policies) {
    auto [loc, kind] = split_kv(s, "--policy");
    apply_policy(loc, kind);
  }
  auto apply_cell = [&](const std::string& loc, const std::string& val) {
    mem.policies[loc] = Policy{PolicyKind::Cell, nullptr};
    mem.stacks[loc] = {parse_value_text(val, env)};
  };
  for (const auto& [loc, val] : cfg.cells) apply_cell(loc, val);
  for (const std::string& s : mf.cells) {
    auto [loc, val] = split_kv(s, "--cell");
    apply_cell(loc, val);
  }
  auto apply_stream = [&](const std::string& loc, const std::string& spec) {
    script_stream(mem, loc, parse_stream_items(spec, env));
  };
  for (const auto& [loc, spec] : cfg.streams) apply_stream(loc, spec);
  for (const std::string& s : mf.streams) {
    auto [loc, spec] = split_kv(s, "--stream");
    apply_stream(loc, spec);
  }
  return mem;
}

// ---- output ----

bool json_mode(const Config& cfg) { return cfg.format == "json"; }

void print_memory_text(std::ostream& out, const Memory& mem) {
  auto strings = memory_strings(mem);
  bool any = false;
  for (const auto& [loc, vals] : strings) {
    if (vals.empty()) continue;
    any = true;
    out << loc << " = [";
    for (std::size_t i = 0; i < vals.size(); ++i)
      out << (i ? ", " : "") << vals[i];
    out << "]\n";
  }
  if (!any) out << "(empty memory)\n";
}

ordered_json memory_json(const Memory& mem) {
  ordered_json j = ordered_json::object();
  for (const auto& [loc, vals] : memory_strings(mem))
    if (!vals.empty()) j[loc] = vals;
  return j;
}

const char* status_name(RunResult::Status s) {
  switch (s) {
    case RunResult::Status::Success: return "success";
    case RunResult::Status::Stuck: return "stuck";
    default: return "fuel-exhausted";
  }
}

// ---- subcommand bodies (each returns the process exit code) ----

int cmd_parse(const Config& cfg, const Input& in) {
  if (in.term) {
    if (json_mode(cfg)) {
      std::cout << ordered_json{{"term", show(in.term)}}.dump() << "\n";
    } else {
      std::cout << show(in.term) << "\n";
    }
    return 0;
  }
  for (const auto& [name, body] : in.env.defs)
    std::cout << name << " = " << show(body) << "\n";
  return 0;
}

int cmd_check(const Config& cfg, const Input& in, const std::string& against) {
  ordered_json results = ordered_json::array();
  auto emit = [&](const std::string& name, const CompType& t) {
    if (json_mode(cfg))
      results.push_back({{"name", name}, {"type", show(t)}});
    else
      std::cout << (name.empty() ? "" : name + " : ") << show(t) << "\n";
  };
  // Declared definition types are verified even when a main term exists.
  for (const auto& [name, ty] : in.env.def_types)
    check(in.env.sig, Context{}, *in.env.def_body(name), ty);
  if (in.term) {
    if (against.empty()) {
      emit("", infer(in.env.sig, Context{}, in.term).type);
    } else {
      CompType want = parse_comp_type(against);
      check(in.env.sig, Context{}, in.term, want);
      emit("", want);
    }
  } else {
    for (const auto& [name, body] : in.env.defs) {
      const CompType* ann = nullptr;
      for (const auto& [n, t] : in.env.def_types)
        if (n == name) ann = &t;
      emit(name, ann ? *ann : infer(in.env.sig, Context{}, body).type);
    }
  }
  if (json_mode(cfg) && !results.empty())
    std::cout << results.dump() << "\n";
  return 0;
}

int cmd_run(const Config& cfg, const Input& in, const MemoryFlags& mf,
            bool count_steps, bool trace) {
  Comp term = require_term(in);
  std::uint64_t seed = resolve_seed(cfg.seed);
  Memory mem = build_memory(cfg, mf, in.env, seed);
  RunResult r = run(std::move(mem), term, cfg.fuel,
                    trace ? &std::cerr : nullptr);
  if (json_mode(cfg)) {
    ordered_json j{{"status", status_name(r.status)},
                   {"steps", r.steps},
                   {"memory", memory_json(r.memory)}};
    if (r.stuck) j["stuck"] = r.stuck->describe();
    if (!r.success()) j["focus"] = show(r.focus);
    std::cout << j.dump() << "\n";
  } else if (count_steps && r.success()) {
    std::cout << r.steps << "\n";
  } else {
    if (!r.success()) {
      std::cout << status_name(r.status);
      if (r.stuck) std::cout << ": " << r.stuck->describe();
      std::cout << "\nfocus: " << show(r.focus) << "\n";
    }
    print_memory_text(std::cout, r.memory);
    if (count_steps) std::cout << "steps = " << r.steps << "\n";
  }
  return r.success() ? 0 : 1;
}

int cmd_step(const Config& cfg, const Input& in, const MemoryFlags& mf,
             std::uint64_t limit, bool limit_requested) {
  Comp term = require_term(in);
  std::uint64_t seed = resolve_seed(cfg.seed);
  MachineState st{build_memory(cfg, mf, in.env, seed), term, 0};
  bool json = json_mode(cfg);
  while (st.steps < limit) {
    StepOutcome o = step(st);
    if (o.status == StepStatus::Success) {
      if (json)
        std::cout << ordered_json{{"status", "success"}, {"steps", st.steps}}.dump()
                  << "\n";
      else
        std::cout << "success in " << st.steps << " steps\n";
      return 0;
    }
    if (o.status == StepStatus::Stuck) {
      if (json)
        std::cout << ordered_json{{"status", "stuck"},
                                  {"steps", st.steps},
                                  {"reason", o.stuck->describe()}}
                         .dump()
                  << "\n";
      else
        std::cout << "stuck after " << st.steps
                  << " steps: " << o.stuck->describe() << "\n";
      return 1;
    }
    if (json) {
      std::cout << ordered_json{{"step", st.steps},
                                {"rule", o.rule},
                                {"loc", o.loc},
                                {"focus", show(st.focus)},
                                {"memory", memory_json(st.memory)}}
                       .dump()
                << "\n";
    } else {
      std::cout << st.steps << ". " << o.rule;
      if (!o.loc.empty()) std::cout << " @ " << o.loc;
      std::cout << "   " << show(st.focus) << "\n";
    }
  }
  const char* why = limit_requested ? "limit-reached" : "fuel-exhausted";
  if (json)
    std::cout << ordered_json{{"status", why}, {"steps", st.steps}}.dump() << "\n";
  else
    std::cout << (limit_requested ? "stopped at the step limit"
                                  : "fuel exhausted")
              << "\n";
  return limit_requested ? 0 : 1;
}

int cmd_normalize(const Config& cfg, const Input& in, bool show_steps) {
  Comp term = require_term(in);
  Strategy strat = cfg.strategy == "ri" ? Strategy::RightmostInnermost
                                        : Strategy::LeftmostOutermost;
  if (cfg.strategy != "lo" && cfg.strategy != "ri")
    throw CLI::ValidationError("--strategy expects lo or ri");
  NormalizeResult n = normalize(term, strat, cfg.fuel, show_steps);
  if (json_mode(cfg)) {
    ordered_json j{{"term", show(n.term)},
                   {"steps", n.steps},
                   {"completed", n.completed}};
    if (show_steps) {
      ordered_json trail = ordered_json::array();
      for (const ReductionStep& st : n.trail)
        trail.push_back({{"rule", rule_name(st.rule)}, {"after", show(st.after)}});
      j["trail"] = trail;
    }
    std::cout << j.dump() << "\n";
  } else {
    if (show_steps)
      for (const ReductionStep& st : n.trail)
        std::cout << rule_name(st.rule) << "  " << show(st.after) << "\n";
    std::cout << show(n.term) << "\n";
    if (!n.completed) std::cout << "(incomplete: out of fuel)\n";
  }
  return n.completed ? 0 : 1;
}

int cmd_translate(const Config& cfg, const std::string& by,
                  const std::string& expr, const std::string& file) {
  std::string text = expr;
  if (!file.empty()) {
    std::ifstream f(file);
    if (!f) throw std::runtime_error("cannot open " + file);
    std::stringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  if (text.empty()) throw CLI::ValidationError("translate needs a term or --file");
  lam::Lam m = lam::parse_lambda(text);
  Comp image;
  if (by == "name") image = cbn(m);
  else if (by == "value") image = cbv(m);
  else throw CLI::ValidationError("--by expects name or value");
  if (json_mode(cfg))
    std::cout << ordered_json{{"by", by}, {"term", show(image)}}.dump() << "\n";
  else
    std::cout << show(image) << "\n";
  return 0;
}

// Every location the term can touch: actions, annotations, thunk bodies,
// and the declared effects of its sequential constants.
void mem_locs(const MemoryType& m, std::set<std::string>& out);
void type_locs(const ValueType& t, std::set<std::string>& out) {
  if (t.is_base()) return;
  mem_locs(t.comp().dom, out);
  mem_locs(t.comp().cod, out);
}
void mem_locs(const MemoryType& m, std::set<std::string>& out) {
  for (const auto& [loc, st] : m) {
    out.insert(loc);
    for (const ValueType& e : st) type_locs(e, out);
  }
}
void term_locs(const Signature& sig, const Comp& c, std::set<std::string>& out) {
  auto val_locs = [&](const Val& v) {
    if (auto* t = as<Thunk>(v)) term_locs(sig, t->body, out);
  };
  Comp cur = c;
  while (cur) {
    if (as<Star>(cur)) break;
    if (auto* s = as<SeqConst>(cur)) {
      if (const CompType* ty = sig.comp_type(s->sym)) {
        mem_locs(ty->dom, out);
        mem_locs(ty->cod, out);
      }
      cur = s->next;
    } else if (auto* p = as<Push>(cur)) {
      out.insert(p->loc);
      val_locs(p->value);
      cur = p->next;
    } else if (auto* p = as<Pop>(cur)) {
      out.insert(p->loc);
      if (p->ann) type_locs(*p->ann, out);
      cur = p->next;
    } else {
      auto* f = as<Force>(cur);
      val_locs(f->value);
      cur = f->next;
    }
  }
}

LocationOrder order_for(const std::string& flag, const Signature& sig,
                        const Comp& term, const CompType& ty) {
  if (!flag.empty()) {
    std::vector<std::string> locs;
    std::stringstream ss(flag);
    std::string tok;
    while (std::getline(ss, tok, ',')) locs.push_back(trim(tok));
    return LocationOrder(locs);
  }
  // Default: the main location first, then every other location the term
  // or its type mentions, alphabetically.
  std::set<std::string> others;
  term_locs(sig, term, others);
  mem_locs(ty.dom, others);
  mem_locs(ty.cod, others);
  others.erase(kMainLoc);
  std::vector<std::string> locs{kMainLoc};
  locs.insert(locs.end(), others.begin(), others.end());
  return LocationOrder(locs);
}

int cmd_collapse(const Config& cfg, const Input& in, const std::string& order_flag) {
  Comp term = require_term(in);
  Checked c = infer(in.env.sig, Context{}, term);
  LocationOrder order = order_for(order_flag, in.env.sig, term, c.type);
  Comp flat = collapse(in.env.sig, term, order);
  CompType cty = collapse_comp_type(c.type, order);
  if (json_mode(cfg))
    std::cout << ordered_json{{"term", show(flat)}, {"type", show(cty)}}.dump()
              << "\n";
  else
    std::cout << show(flat) << "\n" << show(cty) << "\n";
  return 0;
}

int cmd_embed(const Config& cfg, const Input& in, const std::string& at,
              const std::string& order_flag) {
  Comp term = require_term(in);
  infer(in.env.sig, Context{}, term);
  std::vector<std::string> locs{kMainLoc};
  if (!order_flag.empty()) {
    std::stringstream ss(order_flag);
    std::string tok;
    locs.clear();
    while (std::getline(ss, tok, ',')) locs.push_back(trim(tok));
  } else if (at != kMainLoc) {
    locs.push_back(at);
  }
  Comp moved = embed(in.env.sig, LocationOrder(locs), term, at);
  if (json_mode(cfg))
    std::cout << ordered_json{{"term", show(moved)}}.dump() << "\n";
  else
    std::cout << show(moved) << "\n";
  return 0;
}

int cmd_equiv(const Config& cfg, const Input& in, const std::string& left,
              const std::string& right, const std::string& type_flag) {
  Comp l = parse_computation(left, in.env);
  Comp r = parse_computation(right, in.env);
  CompType ty = type_flag.empty() ? infer(in.env.sig, Context{}, l).type
                                  : parse_comp_type(type_flag);
  EquivResult res = machine_equiv(in.env.sig, l, r, ty, cfg.depth);
  if (json_mode(cfg)) {
    ordered_json j{{"verdict", verdict_name(res.verdict)},
                   {"inputs_tested", res.inputs_tested}};
    if (res.verdict == Verdict::Distinguished) {
      ordered_json w = ordered_json::object();
      for (const auto& [loc, vals] : res.witness) {
        ordered_json stack = ordered_json::array();
        for (const Val& v : vals) stack.push_back(show(v));
        w[loc] = stack;
      }
      j["witness"] = w;
    }
    std::cout << j.dump() << "\n";
  } else {
    std::cout << verdict_name(res.verdict) << " (" << res.inputs_tested
              << " inputs tested)\n";
    if (res.verdict == Verdict::Distinguished)
      for (const auto& [loc, vals] : res.witness) {
        std::cout << "witness " << loc << " = [";
        for (std::size_t i = 0; i < vals.size(); ++i)
          std::cout << (i ? ", " : "") << show(vals[i]);
        std::cout << "]\n";
      }
  }
  return res.verdict == Verdict::Distinguished ? 1 : 0;
}

int cmd_measure(const Config& cfg, const Input& in, const std::string& kind_flag) {
  Comp term = require_term(in);
  MeasureKind kind;
  if (kind_flag == "strong") kind = MeasureKind::Strong;
  else if (kind_flag == "weak") kind = MeasureKind::Weak;
  else throw CLI::ValidationError("--kind expects strong or weak");
  Checked c = infer(in.env.sig, Context{}, term);
  SemFun f = interpret(in.env.sig, Context{}, term, c.type, Valuation{}, kind);
  long long count = collapse_measure(f);
  if (json_mode(cfg))
    std::cout << ordered_json{{"kind", kind_flag}, {"count", count}}.dump() << "\n";
  else
    std::cout << count << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stack-machine calculus toolkit: parser, type checker, "
               "abstract machine, rewriter, translations, and measures"};
  app.require_subcommand(1);

  Config cfg;
  std::string config_path;
  if (const char* env = std::getenv("FMC_CONFIG")) config_path = env;
  // The config file must be read before flag parsing so flags override it;
  // scan for --config by hand.
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) config_path = argv[i + 1];
    else if (a.rfind("--config=", 0) == 0) config_path = a.substr(9);
  }
  try {
    if (!config_path.empty()) load_config_file(cfg, config_path);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }

  std::string config_flag;  // consumed by the prescan above
  app.add_option("--config", config_flag, "TOML-style config file");
  app.add_option("--format", cfg.format, "output format: text|json")
      ->check(CLI::IsMember({"text", "json"}));
  app.add_option("--fuel", cfg.fuel, "step budget for runs and normalization");
  app.add_option("--seed", cfg.seed, "PRNG seed (number or 'random')");
  app.add_option("--sig", cfg.signature, "program file with declarations");

  std::string file, expr;
  auto add_input = [&](CLI::App* sub) {
    sub->add_option("file", file, "program file (.fmc)");
    sub->add_option("--expr", expr, "inline term");
  };

  MemoryFlags mf;
  auto add_memory = [&](CLI::App* sub) {
    sub->add_option("--cell", mf.cells, "cell location LOC=VALUE (repeatable)");
    sub->add_option("--stream", mf.streams,
                    "scripted read stream LOC=ITEMS or LOC=FILE (repeatable)");
    sub->add_option("--policy", mf.policies,
                    "location policy LOC=plain|read|write|cell (repeatable)");
  };

  CLI::App* parse_cmd = app.add_subcommand("parse", "parse and reprint a term");
  add_input(parse_cmd);

  std::string against;
  CLI::App* check_cmd = app.add_subcommand("check", "infer or check a type");
  add_input(check_cmd);
  check_cmd->add_option("--type", against, "check against this type");

  bool count_steps = false, trace = false;
  CLI::App* run_cmd = app.add_subcommand("run", "run a term on the machine");
  add_input(run_cmd);
  add_memory(run_cmd);
  run_cmd->add_flag("--count-steps", count_steps, "print the transition count");
  run_cmd->add_flag("--trace", trace, "JSON line per transition on stderr");

  std::uint64_t step_limit = 0;
  CLI::App* step_cmd = app.add_subcommand("step", "print every transition");
  add_input(step_cmd);
  add_memory(step_cmd);
  step_cmd->add_option("--limit", step_limit, "stop after this many steps");

  bool show_steps = false;
  CLI::App* norm_cmd = app.add_subcommand("normalize", "reduce to normal form");
  add_input(norm_cmd);
  norm_cmd->add_option("--strategy", cfg.strategy, "redex choice: lo|ri");
  norm_cmd->add_flag("--show-steps", show_steps, "print the reduction trail");

  std::string by = "value", lam_file;
  CLI::App* trans_cmd =
      app.add_subcommand("translate", "translate a λ-term into the calculus");
  trans_cmd->add_option("term", expr, "λ-term, e.g. '\\x. x'");
  trans_cmd->add_option("--file", lam_file, "read the λ-term from a file");
  trans_cmd->add_option("--by", by, "strategy: name|value");

  std::string order_flag;
  CLI::App* coll_cmd =
      app.add_subcommand("collapse", "serialize every location onto the main stack");
  add_input(coll_cmd);
  coll_cmd->add_option("--order", order_flag, "location order, e.g. lam,c,d");

  std::string at = kMainLoc;
  CLI::App* embed_cmd =
      app.add_subcommand("embed", "relocate a single-location term");
  add_input(embed_cmd);
  embed_cmd->add_option("--at", at, "target location");
  embed_cmd->add_option("--order", order_flag, "location order, e.g. lam,c,d");

  std::string left, right, type_flag;
  CLI::App* equiv_cmd =
      app.add_subcommand("equiv", "bounded machine equivalence of two terms");
  equiv_cmd->add_option("left", left, "first term")->required();
  equiv_cmd->add_option("right", right, "second term")->required();
  equiv_cmd->add_option("--type", type_flag, "type to compare at");
  equiv_cmd->add_option("--depth", cfg.depth, "thunk probing depth");

  std::string kind_flag = "weak";
  CLI::App* measure_cmd =
      app.add_subcommand("measure", "quantitative interpretation of a term");
  add_input(measure_cmd);
  measure_cmd->add_option("--kind", kind_flag, "strong|weak");

  app.add_subcommand("selftest", "run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (parse_cmd->parsed()) return cmd_parse(cfg, load_input(cfg, file, expr));
    if (check_cmd->parsed())
      return cmd_check(cfg, load_input(cfg, file, expr), against);
    if (run_cmd->parsed())
      return cmd_run(cfg, load_input(cfg, file, expr), mf, count_steps, trace);
    if (step_cmd->parsed())
      return cmd_step(cfg, load_input(cfg, file, expr), mf,
                      step_limit ? step_limit : cfg.fuel, step_limit != 0);
    if (norm_cmd->parsed())
      return cmd_normalize(cfg, load_input(cfg, file, expr), show_steps);
    if (trans_cmd->parsed()) return cmd_translate(cfg, by, expr, lam_file);
    if (coll_cmd->parsed())
      return cmd_collapse(cfg, load_input(cfg, file, expr), order_flag);
    if (embed_cmd->parsed())
      return cmd_embed(cfg, load_input(cfg, file, expr), at, order_flag);
    if (equiv_cmd->parsed())
      return cmd_equiv(cfg, load_input(cfg, "", ""), left, right, type_flag);
    if (measure_cmd->parsed())
      return cmd_measure(cfg, load_input(cfg, file, expr), kind_flag);
    return run_selftest(std::cout);
  } catch (const CLI::ValidationError& ex) {
    std::cerr << "usage error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
