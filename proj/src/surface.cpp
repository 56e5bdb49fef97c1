#include "fmc/surface.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace fmc {

namespace {

enum class Tok {
  Ident,
  Number,
  Star,
  LBrack,
  RBrack,
  Less,
  Greater,
  Dot,
  Question,
  Semi,
  Colon,
  LParen,
  RParen,
  ThunkOpen,  // !{
  Bang,       // bare !, only inside type annotation slices
  LBrace,
  RBrace,
  Oplus,  // (+) or the UTF-8 circled plus
  Equals,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line, col;
  std::size_t offset;  // into the source, for raw slicing
};

struct Lexer {
  std::string src;
  std::vector<Token> tokens;

  static bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }

  void lex() {
    int line = 1, col = 1;
    std::size_t i = 0;
    auto push_tok = [&](Tok k, std::string text, std::size_t off) {
      tokens.push_back({k, std::move(text), line, col, off});
    };
    auto advance = [&](std::size_t n) {
      for (std::size_t k = 0; k < n; k++) {
        if (src[i + k] == '\n') {
          line++;
          col = 1;
        } else {
          col++;
        }
      }
      i += n;
    };
    while (i < src.size()) {
      char c = src[i];
      if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
        while (i < src.size() && src[i] != '\n') advance(1);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
        continue;
      }
      if (ident_start(c)) {
        std::size_t start = i;
        while (i < src.size() && ident_char(src[i])) i++;
        std::string text = src.substr(start, i - start);
        col += static_cast<int>(i - start);
        tokens.push_back({Tok::Ident, text, line, col - static_cast<int>(text.size()),
                          start});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = i;
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) i++;
        std::string text = src.substr(start, i - start);
        col += static_cast<int>(i - start);
        tokens.push_back({Tok::Number, text, line, col - static_cast<int>(text.size()),
                          start});
        continue;
      }
      // UTF-8 circled plus: E2 8A 95.
      if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < src.size() &&
          static_cast<unsigned char>(src[i + 1]) == 0x8A &&
          static_cast<unsigned char>(src[i + 2]) == 0x95) {
        push_tok(Tok::Oplus, "(+)", i);
        advance(3);
        continue;
      }
      if (c == '(' && i + 2 < src.size() && src[i + 1] == '+' && src[i + 2] == ')') {
        push_tok(Tok::Oplus, "(+)", i);
        advance(3);
        continue;
      }
      if (c == '!' && i + 1 < src.size() && src[i + 1] == '{') {
        push_tok(Tok::ThunkOpen, "!{", i);
        advance(2);
        continue;
      }
      if (c == '!') {
        push_tok(Tok::Bang, "!", i);
        advance(1);
        continue;
      }
      if (c == '+') {  // standalone symbol constants
        push_tok(Tok::Ident, "+", i);
        advance(1);
        continue;
      }
      Tok k;
      switch (c) {
        case '*': k = Tok::Star; break;
        case '[': k = Tok::LBrack; break;
        case ']': k = Tok::RBrack; break;
        case '<': k = Tok::Less; break;
        case '>': k = Tok::Greater; break;
        case '.': k = Tok::Dot; break;
        case '?': k = Tok::Question; break;
        case ';': k = Tok::Semi; break;
        case ':': k = Tok::Colon; break;
        case '(': k = Tok::LParen; break;
        case ')': k = Tok::RParen; break;
        case '{': k = Tok::LBrace; break;
        case '}': k = Tok::RBrace; break;
        case '=': k = Tok::Equals; break;
        default:
          throw ParseError(std::string("unexpected character '") + c + "'", line, col);
      }
      push_tok(k, std::string(1, c), i);
      advance(1);
    }
    tokens.push_back({Tok::End, "", line, col, src.size()});
  }
};

struct Parser {
  std::string src;
  std::vector<Token> toks;
  std::size_t pos = 0;
  const Program* env;
  int wildcards = 0;
  std::vector<VarName> scope;  // pop binders currently in scope

  bool in_scope(const VarName& x) const {
    return std::find(scope.begin(), scope.end(), x) != scope.end();
  }

  const Token& peek(std::size_t k = 0) const {
    return toks[std::min(pos + k, toks.size() - 1)];
  }
  Token next() { return toks[pos < toks.size() - 1 ? pos++ : pos]; }
  bool at(Tok k) const { return peek().kind == k; }
  Token expect(Tok k, const char* what) {
    if (!at(k)) throw ParseError(std::string("expected ") + what, peek().line, peek().col);
    return next();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, peek().line, peek().col);
  }

  // ---- types (reusing the type-string parser on a raw slice) ----

  // Consume a balanced-parenthesis group and return its inner text.
  std::string paren_slice() {
    Token open = expect(Tok::LParen, "'('");
    int depth = 1;
    std::size_t inner_start = open.offset + 1;
    while (depth > 0) {
      if (at(Tok::End)) fail("unbalanced '(' in type annotation");
      Tok k = next().kind;
      if (k == Tok::LParen) depth++;
      if (k == Tok::RParen) depth--;
    }
    std::size_t inner_end = toks[pos - 1].offset;
    return src.substr(inner_start, inner_end - inner_start);
  }

  ValueType value_type_ann() {
    if (at(Tok::LParen)) return arrow_type(parse_comp_type(paren_slice()));
    Token t = expect(Tok::Ident, "type name");
    return base_type(t.text);
  }

  // ---- values ----

  Val value() {
    if (at(Tok::ThunkOpen)) {
      next();
      Comp body = seq();
      expect(Tok::RBrace, "'}'");
      return thunk(body);
    }
    if (at(Tok::Number)) return vconst(next().text);
    Token t = expect(Tok::Ident, "value");
    if (t.text == "_") fail("'_' only binds; it cannot be referenced");
    if (env && env->sig.val_type(t.text)) return vconst(t.text);
    return var(parse_var(t.text));
  }

  static VarName parse_var(const std::string& text) {
    auto q = text.rfind('\'');
    if (q != std::string::npos && q + 1 < text.size()) {
      bool digits = true;
      for (std::size_t i = q + 1; i < text.size(); i++)
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) digits = false;
      if (digits) return VarName{text.substr(0, q), std::stoi(text.substr(q + 1))};
    }
    return VarName{text, 0};
  }

  // ---- computations ----

  Comp seq() {
    Comp acc = choice();
    while (at(Tok::Semi)) {
      next();
      acc = sequence(acc, choice());
    }
    return acc;
  }

  Comp choice() {
    Comp acc = chain();
    while (at(Tok::Oplus)) {
      next();
      Comp rhs = chain();
      VarName b{"_", ++wildcards};
      // N (+) M becomes [!M].[!N].rnd<b>.?b: the generated boolean picks the
      // left branch when it is the pop-first projection.
      acc = push(thunk(rhs), kMainLoc,
                 push(thunk(acc), kMainLoc,
                      pop("rnd", b, std::nullopt, force(var(b), star()))));
    }
    return acc;
  }

  Comp tail() {
    if (at(Tok::Dot)) {
      next();
      return chain();
    }
    return star();
  }

  Comp pop_form(const std::string& loc) {
    expect(Tok::Less, "'<'");
    Token b = expect(Tok::Ident, "binder");
    VarName binder =
        (b.text == "_") ? VarName{"_", ++wildcards} : parse_var(b.text);
    std::optional<ValueType> ann;
    if (at(Tok::Colon)) {
      next();
      ann = value_type_ann();
    }
    expect(Tok::Greater, "'>'");
    scope.push_back(binder);
    Comp rest = tail();
    scope.pop_back();
    return pop(loc, binder, ann, rest);
  }

  Comp macro_set(const std::string& loc) {
    VarName x{"x", 0}, w{"_", ++wildcards};
    return pop(kMainLoc, x, std::nullopt,
               pop(loc, w, std::nullopt, push(var(x), loc, star())));
  }

  Comp macro_get(const std::string& loc) {
    VarName x{"x", 0};
    return pop(loc, x, std::nullopt,
               push(var(x), loc, push(var(x), kMainLoc, star())));
  }

  Comp chain() {
    if (at(Tok::Star)) {
      next();
      if (at(Tok::Dot)) fail("'*' ends a computation; use ';' to continue");
      return star();
    }
    if (at(Tok::LBrack)) {
      next();
      Val v = value();
      expect(Tok::RBrack, "']'");
      std::string loc = kMainLoc;
      if (at(Tok::Ident)) loc = next().text;
      return push(v, loc, tail());
    }
    if (at(Tok::Less)) return pop_form(kMainLoc);
    if (at(Tok::Question)) {
      next();
      Val v = value();
      return force(v, tail());
    }
    if (at(Tok::LParen)) {
      next();
      Comp inner = seq();
      expect(Tok::RParen, "')'");
      if (at(Tok::Dot)) {
        next();
        return sequence(inner, chain());
      }
      return inner;
    }
    if (at(Tok::Ident)) {
      Token t = next();
      if (at(Tok::Less)) return pop_form(t.text);
      if ((t.text == "set" || t.text == "get") && at(Tok::Ident)) {
        std::string loc = next().text;
        Comp m = (t.text == "set") ? macro_set(loc) : macro_get(loc);
        if (at(Tok::Dot)) {
          next();
          return sequence(m, chain());
        }
        return m;
      }
      if (t.text == "print" || t.text == "read") {
        VarName x{"x", 0};
        Comp m = t.text == "print"
                     ? pop(kMainLoc, x, std::nullopt, push(var(x), "out", star()))
                     : pop("in", x, std::nullopt, push(var(x), kMainLoc, star()));
        if (at(Tok::Dot)) {
          next();
          return sequence(m, chain());
        }
        return m;
      }
      // A bound variable in computation position means forcing it.
      VarName vn = parse_var(t.text);
      if (in_scope(vn)) return force(var(vn), tail());
      if (env) {
        if (const Comp* body = env->def_body(t.text)) {
          if (at(Tok::Dot)) {
            next();
            return sequence(*body, chain());
          }
          return *body;
        }
      }
      return seqconst(t.text, tail());
    }
    fail("expected a computation");
  }

  // ---- programs ----

  bool decl_ahead() const {
    if (!at(Tok::Ident)) return false;
    const std::string& t = peek().text;
    return t == "base" || t == "val" || t == "const" || t == "def";
  }

  void decl(Program& prog) {
    std::string kw = next().text;
    if (kw == "base") {
      while (at(Tok::Ident)) prog.sig.declare_base(next().text);
      expect(Tok::Semi, "';'");
      return;
    }
    if (kw == "val") {
      std::vector<std::string> syms;
      while (at(Tok::Ident) || at(Tok::Number)) syms.push_back(next().text);
      expect(Tok::Colon, "':'");
      ValueType t = value_type_ann();
      expect(Tok::Semi, "';'");
      for (auto& s : syms) prog.sig.declare_val(s, t);
      return;
    }
    if (kw == "const") {
      std::string sym = at(Tok::Number) ? next().text : expect(Tok::Ident, "name").text;
      Token colon = expect(Tok::Colon, "':'");
      // Slice the raw text up to the terminating semicolon.
      std::size_t start = colon.offset + 1;
      while (!at(Tok::Semi) && !at(Tok::End)) next();
      std::size_t end = peek().offset;
      expect(Tok::Semi, "';'");
      prog.sig.declare_comp(sym, parse_comp_type(src.substr(start, end - start)));
      return;
    }
    // def NAME [: comptype] = { seq }
    std::string name = expect(Tok::Ident, "name").text;
    if (at(Tok::Colon)) {
      Token colon = next();
      std::size_t start = colon.offset + 1;
      while (!at(Tok::Equals) && !at(Tok::End)) next();
      std::size_t end = peek().offset;
      prog.def_types.emplace_back(name, parse_comp_type(src.substr(start, end - start)));
    }
    expect(Tok::Equals, "'='");
    expect(Tok::LBrace, "'{'");
    Comp body = seq();
    expect(Tok::RBrace, "'}'");
    prog.defs.emplace_back(name, body);
  }

  Program program() {
    Program prog;
    env = &prog;
    while (decl_ahead()) decl(prog);
    if (!at(Tok::End)) prog.main = seq();
    expect(Tok::End, "end of input");
    return prog;
  }
};

}  // namespace

Comp parse_computation(const std::string& text, const Program& envp) {
  Lexer lx{text, {}};
  lx.lex();
  Parser p{text, std::move(lx.tokens), 0, &envp, 0, {}};
  Comp c = p.seq();
  p.expect(Tok::End, "end of input");
  return c;
}

Comp parse_computation(const std::string& text) {
  static const Program empty;
  return parse_computation(text, empty);
}

Program parse_program(const std::string& text) {
  Lexer lx{text, {}};
  lx.lex();
  Parser p{text, std::move(lx.tokens), 0, nullptr, 0, {}};
  return p.program();
}

Program parse_program_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

// ---- printing ----

namespace {

void print_val(std::ostringstream& os, const Val& v, bool anns);

void print_comp(std::ostringstream& os, const Comp& c, bool anns, bool at_head) {
  std::visit(
      [&](auto&& n) {
        using T = std::decay_t<decltype(n)>;
        auto tail = [&](const Comp& k) {
          if (!as<Star>(k)) {
            os << ".";
            print_comp(os, k, anns, false);
          }
        };
        if constexpr (std::is_same_v<T, Star>) {
          if (at_head) os << "*";
        } else if constexpr (std::is_same_v<T, SeqConst>) {
          os << n.sym;
          tail(n.next);
        } else if constexpr (std::is_same_v<T, Push>) {
          os << "[";
          print_val(os, n.value, anns);
          os << "]";
          if (n.loc != kMainLoc) os << n.loc;
          tail(n.next);
        } else if constexpr (std::is_same_v<T, Pop>) {
          if (n.loc != kMainLoc) os << n.loc;
          os << "<";
          if (n.binder.base == "_" && !free_vars(n.next).count(n.binder))
            os << "_";
          else
            os << n.binder.str();
          if (anns && n.ann) os << ":" << show(*n.ann);
          os << ">";
          tail(n.next);
        } else {
          os << "?";
          print_val(os, n.value, anns);
          tail(n.next);
        }
      },
      c->node);
}

void print_val(std::ostringstream& os, const Val& v, bool anns) {
  if (auto* x = as<Var>(v)) {
    os << x->name.str();
  } else if (auto* k = as<ValConst>(v)) {
    os << k->sym;
  } else {
    os << "!{";
    print_comp(os, as<Thunk>(v)->body, anns, true);
    os << "}";
  }
}

}  // namespace

std::string show(const Comp& c) {
  std::ostringstream os;
  print_comp(os, c, true, true);
  return os.str();
}

std::string show_plain(const Comp& c) {
  std::ostringstream os;
  print_comp(os, c, false, true);
  return os.str();
}

std::string show(const Val& v) {
  std::ostringstream os;
  print_val(os, v, true);
  return os.str();
}

}  // namespace fmc
