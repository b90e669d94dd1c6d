#pragma once

#include <string>

#include "layoutc/ast.hpp"

namespace layoutc {

std::string print_expr(const Expr& e);
std::string print_stmt(const Stmt& s, int indent = 0);
std::string print_type_decl(const AdtDecl& d);
std::string print_func(const FuncDecl& f);
std::string print_layout(const LayoutSpec& l);
std::string print_build(const BuildSpec& b);
std::string print_program(const Program& p);

// Structural equality, ignoring spans and sema annotations.
bool program_equal(const Program& a, const Program& b);

}  // namespace layoutc
