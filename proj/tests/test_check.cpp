#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fmc/check.hpp"
#include "fmc/surface.hpp"

using namespace fmc;

namespace {

// Kind of the type error raised by f, if any.
template <class F>
std::optional<CheckErr> kind_of(F&& f) {
  try {
    f();
  } catch (const CheckError& e) {
    return e.kind;
  }
  return std::nullopt;
}

bool accepts(const std::string& term, const std::string& type,
             const Signature& sig = Signature{}) {
  check(sig, Context{}, parse_computation(term), parse_comp_type(type));
  return true;
}

std::string inferred(const std::string& term, const Signature& sig = Signature{}) {
  return show(infer(sig, Context{}, parse_computation(term)).type);
}

}  // namespace

TEST_CASE("type strings round trip through the canonical printer") {
  auto canon = [](const std::string& s) { return show(parse_comp_type(s)); };
  CHECK(canon("s t > t s") == "s t > t s");
  CHECK(canon("Z c(Z) > c(Z)") == "Z c(Z) > c(Z)");
  CHECK(canon("c(Z) > c(Z) Z") == "c(Z) > c(Z) Z");
  CHECK(canon("Z > out(Z)") == "Z > out(Z)");
  CHECK(canon("rnd(Z) > Z") == "rnd(Z) > Z");
  CHECK(canon("(?t > !t) ?t > !t") == "(t > t) t > t");
  CHECK(canon("t >") == "t >");
  CHECK(canon(">") == ">");
}

TEST_CASE("the worked examples check at their stated types") {
  CHECK(accepts("<x>", "t >"));
  CHECK(accepts("<x>.[x].[x]", "t > t t"));
  CHECK(accepts("<x>.<y>.[y].[x]", "s t > t s"));
  CHECK(accepts("<x>.<y>.[x].[y]", "s t > s t"));
  CHECK(accepts("<f>.?f", "(?s > !t) ?s > !t"));
  CHECK(accepts("<f>.?f.?f", "(?t > !t) ?t > !t"));
  CHECK(accepts("set c", "Z c(Z) > c(Z)"));
  CHECK(accepts("get c", "c(Z) > c(Z) Z"));
  CHECK(accepts("print", "Z > out(Z)"));
  CHECK(accepts("read", "in(Z) > Z"));
  CHECK(accepts("rnd<x>.[x]", "rnd(Z) > Z"));
}

TEST_CASE("inference produces the minimal type from annotations") {
  CHECK(inferred("<x:t>") == "t >");
  CHECK(inferred("<x:s>.<y:t>.[y].[x]") == "s t > t s");
  CHECK(inferred("<x:t>.<y:s>.[y].[x]") == "t s > s t");
  CHECK(inferred("<x:t>.[x].[x]") == "t > t t");
  CHECK(inferred("<f:(?t > !t)>.?f.?f") == "(t > t) t > t");
  CHECK(inferred("[!{<x:t>.[x]}].<f>.?f") == "t > t");
  CHECK(inferred("<x:t>.[x]c.[x]d") == "t > c(t) d(t)");
  CHECK(inferred("*") == ">");
}

TEST_CASE("expansion is accepted directly") {
  // Every expansion of a derivable type also checks.  The input side prints
  // in pop order, so sides that denote the same memory mirror each other.
  CHECK(accepts("<x>.[x]", "t > t"));
  CHECK(accepts("<x>.[x]", "t s > s t"));
  CHECK(accepts("<x>.[x]", "s t c(u) > c(u) t s"));
  CHECK(accepts("*", "s c(t) > s c(t)"));
}

TEST_CASE("thunks check against expanded types") {
  Signature sig;
  Comp t = parse_computation("[!{<x:t>.[x]}]");
  Val v = as<Push>(t)->value;
  CHECK_NOTHROW(check_value(sig, Context{}, v, parse_value_type("(t > t)")));
  CHECK_NOTHROW(check_value(sig, Context{}, v, parse_value_type("(t s > s t)")));
  CHECK_THROWS_AS(check_value(sig, Context{}, v, parse_value_type("(s > s)")),
                  CheckError);
}

TEST_CASE("sequential constants splice their declared effect") {
  Signature sig;
  sig.declare_base("Z");
  sig.declare_comp("add", parse_comp_type("Z Z > Z"));
  CHECK(accepts("add", "Z Z > Z", sig));
  CHECK(inferred("add.add", sig) == "Z Z Z > Z");
  CHECK(accepts("add", "Z Z t > t Z", sig));
}

TEST_CASE("errors carry their kinds") {
  Signature sig;
  sig.declare_base("Z");
  sig.declare_val("3", base_type("Z"));
  sig.declare_comp("add", parse_comp_type("Z Z > Z"));
  Context ctx;

  CHECK(kind_of([&] { infer(sig, ctx, parse_computation("[x]")); }) ==
        CheckErr::UnboundVariable);
  CHECK(kind_of([&] {
          check(sig, ctx, parse_computation("<x>"), parse_comp_type(">"));
        }) == CheckErr::LocationArityMismatch);
  CHECK(kind_of([&] { infer(sig, ctx, parse_computation("mul")); }) ==
        CheckErr::ConstantUnknown);
  CHECK(kind_of([&] {
          check(sig, ctx, parse_computation("<x:s>"), parse_comp_type("t >"));
        }) == CheckErr::AnnotationMismatch);
  CHECK(kind_of([&] { infer(sig, ctx, parse_computation("<x>")); }) ==
        CheckErr::AnnotationNeeded);
  CHECK(kind_of([&] {
          check(sig, ctx, parse_computation("<x>.[x]"), parse_comp_type("t > s"));
        }) == CheckErr::OutputMismatch);
  CHECK(kind_of([&] { infer(sig, ctx, parse_computation("?3")); }) ==
        CheckErr::NotAnArrow);
  CHECK(kind_of([&] {
          check(sig, ctx, parse_computation("add"), parse_comp_type("Z > Z"));
        }) == CheckErr::LocationArityMismatch);
}

TEST_CASE("checking validates annotations against the walked type") {
  CHECK(accepts("<x:t>.[x]", "t > t"));
  CHECK(kind_of([&] { accepts("<x:s>.[x]", "t > t"); }) == CheckErr::AnnotationMismatch);
}

TEST_CASE("lenient inference resolves shapes by unification") {
  Signature sig;
  sig.declare_base("Z");
  sig.declare_comp("add", parse_comp_type("Z Z > Z"));
  Context ctx;

  CHECK(show(infer_lenient(sig, ctx, parse_computation("<x>.[x].add"))) == "Z Z > Z");
  CHECK(show(infer_lenient(sig, ctx, parse_computation("<x:t>"))) == "t >");
  CHECK(show(infer_lenient(sig, ctx, parse_computation("[!{<x:t>.[x]}].<f>.?f"))) ==
        "t > t");
  // a genuinely polymorphic term is flagged, not guessed
  CHECK(kind_of([&] { infer_lenient(sig, ctx, parse_computation("<x>.[x]")); }) ==
        CheckErr::Unresolved);
  CHECK(kind_of([&] { infer_lenient(sig, ctx, parse_computation("<f>.?f")); }) ==
        CheckErr::Unresolved);
}

TEST_CASE("the context binds variables with shadowing") {
  Context ctx;
  ctx.bind(VarName{"x"}, base_type("s"));
  ctx.bind(VarName{"x"}, base_type("t"));
  REQUIRE(ctx.lookup(VarName{"x"}) != nullptr);
  CHECK(*ctx.lookup(VarName{"x"}) == base_type("t"));
  Signature sig;
  CHECK(show(infer(sig, ctx, parse_computation("[x]")).type) == "> t");
}
