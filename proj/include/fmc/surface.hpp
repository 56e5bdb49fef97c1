#pragma once

// Concrete ASCII syntax: parser, printer, effect sugar, and program files.
//
// Grammar (computations):
//   seq      ::= choice { ';' choice }            sequencing, lowest precedence
//   choice   ::= chain { oplus chain }            oplus = '(+)' or UTF-8 circled plus
//   chain    ::= '*'
//              | '[' value ']' [loc] tail         push
//              | [loc] '<' binder [':' vtype] '>' tail
//              | '?' value tail                   force
//              | 'set' loc | 'get' loc | 'print' | 'read'
//              | ident tail                       constant prefix or definition
//              | '(' seq ')'
//   tail     ::= '.' chain | nothing              (elided trailing star)
//   value    ::= ident | number | '!{' seq '}'
//   binder   ::= ident | '_'                      '_' binds a fresh unused name
//   vtype    ::= ident | '(' computation-type ')'
//
// An identifier in value position is a variable unless declared as a value
// constant in the ambient signature; numbers are always constants.  The main
// location is written by omission.  Type syntax treats '?' and '!' as
// ignorable vector marks, so "(?t>!t)" and "(t > t)" parse alike.
//
// Program files (.fmc): '--' comments to end of line, then declarations and
// an optional main term:
//   base  NAME... ;
//   val   SYM... ':' vtype ;
//   const SYM ':' comptype ;
//   def   NAME [':' comptype] '=' '{' seq '}'
// A def name used in computation position splices its body.

#include <stdexcept>
#include <string>

#include "fmc/term.hpp"
#include "fmc/types.hpp"

namespace fmc {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " at " + std::to_string(line_) + ":" +
                           std::to_string(col_)),
        line(line_),
        col(col_) {}
};

struct Program {
  Signature sig;
  std::vector<std::pair<std::string, Comp>> defs;
  std::vector<std::pair<std::string, CompType>> def_types;  // optional annotations
  Comp main;  // null when the file declares without a main term

  const Comp* def_body(const std::string& name) const {
    for (auto& [n, c] : defs)
      if (n == name) return &c;
    return nullptr;
  }
};

// Parse a bare computation.  The signature classifies identifiers in value
// position and supplies definition bodies for splices.
Comp parse_computation(const std::string& text);
Comp parse_computation(const std::string& text, const Program& env);

// Parse a whole program file.
Program parse_program(const std::string& text);
Program parse_program_file(const std::string& path);

// Canonical printing: elides the main location, trailing stars, and unused
// '_' binders; prints annotations when present.
std::string show(const Comp& c);
std::string show(const Val& v);
// Like show but with annotations suppressed.
std::string show_plain(const Comp& c);

}  // namespace fmc
