#include "fmc/types.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace fmc {

ValueType base_type(std::string name) {
  ValueType t;
  t.base = std::move(name);
  return t;
}

ValueType arrow_type(MemoryType dom, MemoryType cod) {
  mt_canon(dom);
  mt_canon(cod);
  ValueType t;
  t.arrow = std::make_shared<CompType>(CompType{std::move(dom), std::move(cod)});
  return t;
}

ValueType arrow_type(CompType t) { return arrow_type(std::move(t.dom), std::move(t.cod)); }

bool operator==(const ValueType& a, const ValueType& b) {
  if (a.is_base() != b.is_base()) return false;
  if (a.is_base()) return a.base == b.base;
  return *a.arrow == *b.arrow;
}

bool operator==(const CompType& a, const CompType& b) {
  return a.dom == b.dom && a.cod == b.cod;
}

void mt_canon(MemoryType& m) {
  for (auto it = m.begin(); it != m.end();) {
    if (it->second.empty())
      it = m.erase(it);
    else
      ++it;
  }
}

bool mt_empty(const MemoryType& m) {
  for (auto& [loc, st] : m)
    if (!st.empty()) return false;
  return true;
}

std::size_t mt_size(const MemoryType& m) {
  std::size_t n = 0;
  for (auto& [loc, st] : m) n += st.size();
  return n;
}

const StackType& mt_stack(const MemoryType& m, const std::string& loc) {
  static const StackType empty;
  auto it = m.find(loc);
  return it == m.end() ? empty : it->second;
}

void mt_push(MemoryType& m, const std::string& loc, const ValueType& vt) {
  m[loc].push_back(vt);
}

std::optional<ValueType> mt_pop(MemoryType& m, const std::string& loc) {
  auto it = m.find(loc);
  if (it == m.end() || it->second.empty()) return std::nullopt;
  ValueType top = it->second.back();
  it->second.pop_back();
  if (it->second.empty()) m.erase(it);
  return top;
}

MemoryType mt_under(const MemoryType& addition, const MemoryType& m) {
  MemoryType out = addition;
  for (auto& [loc, st] : m) {
    auto& v = out[loc];
    v.insert(v.end(), st.begin(), st.end());
  }
  mt_canon(out);
  return out;
}

MemoryType mt_over(const MemoryType& m, const MemoryType& addition) {
  return mt_under(m, addition);
}

bool mt_has_top(const MemoryType& m, const MemoryType& top) {
  for (auto& [loc, st] : top) {
    const StackType& have = mt_stack(m, loc);
    if (have.size() < st.size()) return false;
    if (!std::equal(st.begin(), st.end(), have.end() - st.size())) return false;
  }
  return true;
}

MemoryType mt_strip_top(const MemoryType& m, const MemoryType& top) {
  MemoryType out = m;
  for (auto& [loc, st] : top) {
    auto& have = out[loc];
    have.resize(have.size() - st.size());
  }
  mt_canon(out);
  return out;
}

// ---- printing ----

std::string show(const ValueType& t) {
  if (t.is_base()) return t.base;
  return "(" + show(*t.arrow) + ")";
}

namespace {

void append_items(std::ostringstream& os, const StackType& st, bool reversed,
                  bool& first) {
  auto emit = [&](const ValueType& vt) {
    if (!first) os << " ";
    first = false;
    os << show(vt);
  };
  if (reversed)
    for (auto it = st.rbegin(); it != st.rend(); ++it) emit(*it);
  else
    for (auto& vt : st) emit(vt);
}

void append_loc(std::ostringstream& os, const std::string& loc,
                const StackType& st, bool reversed, bool& first) {
  if (!first) os << " ";
  first = false;
  os << loc << "(";
  bool inner_first = true;
  append_items(os, st, reversed, inner_first);
  os << ")";
}

}  // namespace

std::string show_memory(const MemoryType& m, bool input_side) {
  std::ostringstream os;
  bool first = true;
  if (input_side) {
    // Full reversal: main location first (vector reversed = pop order), then
    // named locations in reverse order, each vector reversed.
    if (auto it = m.find(kMainLoc); it != m.end())
      append_items(os, it->second, true, first);
    for (auto it = m.rbegin(); it != m.rend(); ++it)
      if (it->first != kMainLoc) append_loc(os, it->first, it->second, true, first);
  } else {
    for (auto& [loc, st] : m)
      if (loc != kMainLoc) append_loc(os, loc, st, false, first);
    if (auto it = m.find(kMainLoc); it != m.end())
      append_items(os, it->second, false, first);
  }
  return os.str();
}

std::string show(const CompType& t) {
  std::string dom = show_memory(t.dom, true);
  std::string cod = show_memory(t.cod, false);
  std::string out;
  if (!dom.empty()) out = dom + " ";
  out += ">";
  if (!cod.empty()) out += " " + cod;
  return out;
}

// ---- parsing ----

namespace {

struct TypeLexer {
  std::string_view text;
  std::size_t pos = 0;

  // '?' and '!' are the paper's vector-direction marks; they carry no
  // information once a side is fixed, so the lexer skips them.
  void skip_ws() {
    while (pos < text.size() &&
           (std::isspace(static_cast<unsigned char>(text[pos])) ||
            text[pos] == '?' || text[pos] == '!'))
      pos++;
  }
  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      pos++;
      return true;
    }
    return false;
  }
  static bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && ident_char(text[pos])) pos++;
    if (start == pos) throw TypeError("type syntax: identifier expected at offset " +
                                      std::to_string(pos));
    return std::string(text.substr(start, pos - start));
  }
  // True when the character directly after the just-read identifier is '('
  // with no whitespace: that identifier is a location prefix.
  bool adjacent_lparen() { return pos < text.size() && text[pos] == '('; }
};

struct FlatEntry {
  std::string loc;
  ValueType vt;
};

CompType parse_comp(TypeLexer& lx);

ValueType parse_item(TypeLexer& lx) {
  if (lx.eat('(')) {
    CompType inner = parse_comp(lx);
    if (!lx.eat(')')) throw TypeError("type syntax: expected ')'");
    return arrow_type(std::move(inner));
  }
  return base_type(lx.ident());
}

// One side of a computation type, as a flat (location, item) sequence.
std::vector<FlatEntry> parse_side(TypeLexer& lx) {
  std::vector<FlatEntry> out;
  for (;;) {
    char c = lx.peek();
    if (c == '\0' || c == '>' || c == ')') break;
    if (c == '(') {
      out.push_back({kMainLoc, parse_item(lx)});
      continue;
    }
    std::string name = lx.ident();
    if (lx.adjacent_lparen()) {
      lx.eat('(');
      while (lx.peek() != ')') out.push_back({name, parse_item(lx)});
      lx.eat(')');
    } else {
      out.push_back({kMainLoc, base_type(name)});
    }
  }
  return out;
}

MemoryType assemble(std::vector<FlatEntry> entries, bool input_side) {
  if (input_side) std::reverse(entries.begin(), entries.end());
  MemoryType m;
  for (auto& e : entries) mt_push(m, e.loc, e.vt);
  return m;
}

CompType parse_comp(TypeLexer& lx) {
  auto dom = parse_side(lx);
  if (!lx.eat('>')) throw TypeError("type syntax: expected '>'");
  auto cod = parse_side(lx);
  return CompType{assemble(std::move(dom), true), assemble(std::move(cod), false)};
}

}  // namespace

CompType parse_comp_type(const std::string& text) {
  TypeLexer lx{text};
  CompType t = parse_comp(lx);
  if (!lx.at_end()) throw TypeError("type syntax: trailing input in '" + text + "'");
  return t;
}

ValueType parse_value_type(const std::string& text) {
  TypeLexer lx{text};
  // A bare identifier is a base type; anything with '>' at top level is an
  // arrow written without the outer parentheses.
  std::size_t save = lx.pos;
  if (lx.peek() != '(') {
    std::string name = lx.ident();
    if (lx.at_end()) return base_type(name);
    lx.pos = save;
  } else {
    // Could be "(t > t)" alone or an arrow starting with a parenthesized item.
    lx.eat('(');
    CompType inner = parse_comp(lx);
    if (!lx.eat(')')) throw TypeError("type syntax: expected ')'");
    if (lx.at_end()) return arrow_type(std::move(inner));
    lx.pos = save;
  }
  return arrow_type(parse_comp_type(text));
}

// ---- signatures ----

bool Signature::has_base(const std::string& name) const {
  return std::find(bases.begin(), bases.end(), name) != bases.end();
}

const ValueType* Signature::val_type(const std::string& sym) const {
  for (auto& [s, t] : vals)
    if (s == sym) return &t;
  return nullptr;
}

const CompType* Signature::comp_type(const std::string& sym) const {
  for (auto& [s, t] : comps)
    if (s == sym) return &t;
  return nullptr;
}

std::vector<std::string> Signature::vals_of_base(const std::string& base) const {
  std::vector<std::string> out;
  for (auto& [s, t] : vals)
    if (t.is_base() && t.base == base) out.push_back(s);
  return out;
}

void Signature::declare_base(const std::string& name) {
  if (!has_base(name)) bases.push_back(name);
}

void Signature::declare_val(const std::string& sym, ValueType t) {
  if (val_type(sym) || comp_type(sym))
    throw TypeError("signature: duplicate constant '" + sym + "'");
  vals.emplace_back(sym, std::move(t));
}

void Signature::declare_comp(const std::string& sym, CompType t) {
  if (val_type(sym) || comp_type(sym))
    throw TypeError("signature: duplicate constant '" + sym + "'");
  comps.emplace_back(sym, std::move(t));
}

}  // namespace fmc
