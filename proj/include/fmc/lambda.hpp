#pragma once

// The simply typed λ-calculus with pattern matching, plus the probabilistic
// choice and first-order state primitives of the effectful source language.
// This module is self-contained on the λ side: types, terms, a checker, a
// small rewriter (β with pattern matching, η, tuple-η) used to normalize
// round-trip results, a call-by-value evaluator for the pure fragment, and
// a generator of random well-typed closed terms.

#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fmc::lam {

// ---- types ----

struct LTy;
using LType = std::shared_ptr<const LTy>;

struct LBase {
  std::string name;
};
struct LArrow {
  LType dom, cod;
};
struct LProd {
  std::vector<LType> parts;  // nullary product is the unit type
};
struct LTy {
  std::variant<LBase, LArrow, LProd> node;
};

LType lbase(std::string name);
LType larrow(LType dom, LType cod);
LType lprod(std::vector<LType> parts);
LType lunit();

bool type_equal(const LType& a, const LType& b);
std::string show(const LType& t);

// ---- patterns ----

struct Pat;
using Pattern = std::shared_ptr<const Pat>;

struct PVar {
  std::string name;
};
struct PTuple {
  std::vector<Pattern> parts;
};
struct Pat {
  std::variant<PVar, PTuple> node;
};

Pattern pvar(std::string name);
Pattern ptuple(std::vector<Pattern> parts);

std::vector<std::string> pattern_vars(const Pattern& p);  // left to right
bool pattern_linear(const Pattern& p);

// ---- terms ----

struct LTerm;
using Lam = std::shared_ptr<const LTerm>;

struct LVar {
  std::string name;
};
struct LConst {
  std::string sym;  // value constant
};
struct LSeq {
  std::string sym;  // sequential constant applied to one argument
  Lam arg;
};
struct LApp {
  Lam fn, arg;
};
struct LAbs {
  Pattern pat;
  std::optional<LType> ann;  // domain type; required for checking
  Lam body;
};
struct LTuple {
  std::vector<Lam> parts;  // nullary tuple is the unit term
};
struct LChoice {
  Lam left, right;  // coin toss between the two branches
};
struct LAssign {
  std::string cell;
  Lam value, body;  // store value in cell, continue as body
};
struct LDeref {
  std::string cell;
};
struct LTerm {
  std::variant<LVar, LConst, LSeq, LApp, LAbs, LTuple, LChoice, LAssign,
               LDeref>
      node;
};

Lam lvar(std::string name);
Lam lconst(std::string sym);
Lam lseq(std::string sym, Lam arg);
Lam lapp(Lam fn, Lam arg);
Lam labs(Pattern p, std::optional<LType> ann, Lam body);
Lam labs(std::string x, Lam body);
Lam labs(std::string x, LType ann, Lam body);
Lam ltuple(std::vector<Lam> parts);
Lam lchoice(Lam l, Lam r);
Lam lassign(std::string cell, Lam value, Lam body);
Lam lderef(std::string cell);

template <class T>
const T* as(const Lam& m) {
  return std::get_if<T>(&m->node);
}
template <class T>
const T* as(const Pattern& p) {
  return std::get_if<T>(&p->node);
}

std::size_t term_size(const Lam& m);
std::set<std::string> free_vars(const Lam& m);
bool alpha_equal(const Lam& a, const Lam& b);
std::string show(const Lam& m);
std::string show(const Pattern& p);

// Capture-avoiding {v/x}m.
Lam substitute(const Lam& v, const std::string& x, const Lam& m);

// ---- signature and checking ----

struct LambdaSig {
  std::set<std::string> bases;
  std::map<std::string, LType> consts;                    // value constants
  std::map<std::string, std::pair<LType, LType>> seqs;    // dom -> cod
};

enum class LamErr {
  UnboundVariable,
  UnknownConstant,
  NotAFunction,
  NotATuple,
  TypeMismatch,
  AnnotationNeeded,
  NonLinearPattern,
  PatternShape,
  UnsupportedConstruct,
  FuelExhausted,
};

struct LamError : std::runtime_error {
  LamErr kind;
  LamError(LamErr k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

using LamContext = std::vector<std::pair<std::string, LType>>;

// Type of m in ctx; Abs nodes must carry domain annotations.  The effect
// primitives are outside the simple type system and are rejected here.
LType check(const LambdaSig& sig, const LamContext& ctx, const Lam& m);

// ---- rewriting ----

// β contracts an application of an abstraction whenever the argument's shape
// matches the pattern (a variable matches anything, a tuple pattern needs a
// tuple literal of equal width); η removes λp.(m p̂) when p's variables are
// not free in m, where p̂ writes the pattern as a term; tuple-η rewrites a
// tuple of projections (π1 m, ..., πn m) back to m.  Leftmost-outermost.
struct LamNormResult {
  Lam term;
  int steps = 0;
  bool completed = true;
};
LamNormResult normalize(const Lam& m, int fuel = 20000);

// Normalize both sides and compare up to alpha.
bool beta_eta_equal(const Lam& a, const Lam& b, int fuel = 20000);

// ---- call-by-value evaluation (pure fragment) ----

// Big-step CBV on variables, abstractions, applications, and constants:
// the argument is evaluated before the function is applied.  Throws on
// fuel exhaustion, on head values that are not abstractions, and on the
// effect primitives.
Lam eval_cbv(const Lam& m, int fuel = 10000);

// ---- generation ----

struct LamGenConfig {
  int max_size = 12;
  int type_depth = 2;
  // Keep products flat (no product inside a product), bind them only by
  // exactly matching tuple patterns, and keep arrow codomains base or
  // arrow.  On this fragment the translation round trip closes up to the
  // rewriter above; nested products would need the coherence isomorphisms.
  bool products = true;
};

struct LamGenTerm {
  Lam term;
  LType type;
};

// Random closed well-typed term (with Abs annotations filled in).
LamGenTerm generate_lambda(const LambdaSig& sig, std::mt19937_64& rng,
                           const LamGenConfig& cfg = {});

// ---- parsing ----

// Minimal concrete syntax for CLI input:
//   term   ::= '\' pat+ '.' term | assign
//   assign ::= IDENT ':=' term ';' term | choice
//   choice ::= app { '(+)' app }
//   app    ::= atom+
//   atom   ::= IDENT | '!' IDENT | '(' term { ',' term } ')' | '()'
//   pat    ::= IDENT | '(' pat { ',' pat } ')'
// Identifiers bound by an enclosing '\' parse as variables; all others
// parse as value constants.  Sequential constants and type annotations
// are not part of this syntax.
Lam parse_lambda(const std::string& text);

}  // namespace fmc::lam
