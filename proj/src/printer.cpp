#include "layoutc/printer.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace layoutc {

namespace {

std::string ind(int n) { return std::string(static_cast<size_t>(n) * 2, ' '); }

std::string float_repr(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  std::string s = buf;
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
    s += ".0";
  }
  return s;
}

int binop_prec(BinOp op) {
  switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::BitOr: return 3;
    case BinOp::BitXor: return 4;
    case BinOp::BitAnd: return 5;
    case BinOp::Eq:
    case BinOp::Ne: return 6;
    case BinOp::Lt:
    case BinOp::Gt:
    case BinOp::Le:
    case BinOp::Ge: return 7;
    case BinOp::Shl:
    case BinOp::Shr: return 8;
    case BinOp::Add:
    case BinOp::Sub: return 9;
    case BinOp::Mul:
    case BinOp::Div:
    case BinOp::Mod: return 10;
  }
  return 0;
}

std::string expr_str(const Expr& e, int parent_prec);

std::string suffix_str(const SemTypePtr& t) {
  if (!t) return "";
  return type_to_string(*t);
}

std::string pattern_str(const MatchPattern& p) {
  if (p.wildcard) return "_";
  std::string s = p.variant;
  s += "(";
  for (size_t i = 0; i < p.binders.size(); i++) {
    if (i) s += ", ";
    s += p.binders[i];
  }
  s += ")";
  return s;
}

std::string expr_str(const Expr& e, int parent_prec) {
  std::ostringstream os;
  switch (e.kind) {
    case ExprKind::IntLit:
      os << e.int_val << suffix_str(e.suffix_type);
      break;
    case ExprKind::FloatLit:
      os << float_repr(e.float_val) << suffix_str(e.suffix_type);
      break;
    case ExprKind::BoolLit:
      os << (e.bool_val ? "true" : "false");
      break;
    case ExprKind::InfLit:
      os << "inf";
      break;
    case ExprKind::Ident:
      os << e.name;
      break;
    case ExprKind::ParentField:
      os << "parent." << e.name;
      break;
    case ExprKind::This:
      os << "this";
      break;
    case ExprKind::Field:
      os << expr_str(*e.base, 100) << '.' << e.name;
      break;
    case ExprKind::Index:
      os << expr_str(*e.base, 100) << '[' << expr_str(*e.index, 0) << ']';
      break;
    case ExprKind::Slice:
      os << expr_str(*e.base, 100) << '[' << expr_str(*e.index, 0) << " : "
         << expr_str(*e.index2, 0) << ']';
      break;
    case ExprKind::Call:
    case ExprKind::Construct: {
      os << e.name << '(';
      for (size_t i = 0; i < e.args.size(); i++) {
        if (i) os << ", ";
        os << expr_str(*e.args[i], 0);
      }
      os << ')';
      break;
    }
    case ExprKind::MethodCall: {
      os << expr_str(*e.base, 100) << '.' << e.name << '(';
      for (size_t i = 0; i < e.args.size(); i++) {
        if (i) os << ", ";
        os << expr_str(*e.args[i], 0);
      }
      os << ')';
      break;
    }
    case ExprKind::Aggregate: {
      os << '{';
      for (size_t i = 0; i < e.args.size(); i++) {
        if (i) os << ", ";
        os << expr_str(*e.args[i], 0);
      }
      os << '}';
      break;
    }
    case ExprKind::Tuple: {
      os << '(';
      for (size_t i = 0; i < e.args.size(); i++) {
        if (i) os << ", ";
        os << expr_str(*e.args[i], 0);
      }
      os << ')';
      break;
    }
    case ExprKind::Unary: {
      const char* op = e.un_op == UnOp::Neg ? "-" : e.un_op == UnOp::Not ? "!" : "~";
      os << op << expr_str(*e.base, 11);
      break;
    }
    case ExprKind::Binary: {
      int prec = binop_prec(e.bin_op);
      std::string s = expr_str(*e.index, prec) + " " + binop_name(e.bin_op) + " " +
                      expr_str(*e.index2, prec + 1);
      if (prec < parent_prec) return "(" + s + ")";
      return s;
    }
    case ExprKind::CastAs:
      os << expr_str(*e.base, 100) << " as " << type_to_string(*e.cast_type);
      if (parent_prec > 10) return "(" + os.str() + ")";
      break;
    case ExprKind::CastTo:
      os << expr_str(*e.base, 100) << " to " << type_to_string(*e.cast_type);
      if (parent_prec > 10) return "(" + os.str() + ")";
      break;
    case ExprKind::MatchExpr: {
      os << "match " << expr_str(*e.base, 0) << " {";
      for (const auto& arm : e.match_arms) {
        os << " | " << pattern_str(arm.pattern) << " -> " << expr_str(*arm.value, 0);
      }
      os << " }";
      break;
    }
    case ExprKind::Append:
      os << "append(" << e.name << ", " << expr_str(*e.args[0], 0) << ')';
      break;
    case ExprKind::BuildChild:
      os << "build " << e.name;
      break;
  }
  return os.str();
}

std::string stmt_str(const Stmt& s, int indent);

std::string block_body(const Stmt& s, int indent) {
  // Prints a statement as a braced block.
  std::ostringstream os;
  os << "{\n";
  if (s.kind == StmtKind::Block) {
    for (const auto& st : s.block) os << stmt_str(*st, indent + 1);
  } else {
    os << stmt_str(s, indent + 1);
  }
  os << ind(indent) << "}";
  return os.str();
}

std::string stmt_str(const Stmt& s, int indent) {
  std::ostringstream os;
  os << ind(indent);
  switch (s.kind) {
    case StmtKind::ExprStmt:
      os << expr_str(*s.expr, 0) << ";\n";
      break;
    case StmtKind::Let:
      os << "let " << s.name << ": " << (s.is_mut ? "mut " : "")
         << type_to_string(*s.decl_type);
      if (s.expr) os << " = " << expr_str(*s.expr, 0);
      os << ";\n";
      break;
    case StmtKind::Assign: {
      os << s.lv_name;
      if (s.lv_is_field) os << '.' << s.lv_field;
      if (s.lv_is_index) os << '[' << expr_str(*s.lv_index, 0) << ']';
      if (s.lv_is_bitrange)
        os << '[' << expr_str(*s.lv_index, 0) << " : " << expr_str(*s.lv_index2, 0) << ']';
      os << " = " << expr_str(*s.expr, 0) << ";\n";
      break;
    }
    case StmtKind::Return:
      os << "return";
      if (s.expr) os << ' ' << expr_str(*s.expr, 0);
      os << ";\n";
      break;
    case StmtKind::Match: {
      os << "match " << expr_str(*s.expr, 0) << " {\n";
      for (const auto& arm : s.match_arms) {
        os << ind(indent) << "| " << pattern_str(arm.pattern) << " ->\n";
        os << stmt_str(*arm.body, indent + 1);
      }
      os << ind(indent) << "}\n";
      break;
    }
    case StmtKind::If: {
      for (size_t i = 0; i < s.if_clauses.size(); i++) {
        if (i == 0) os << "if ";
        else os << ind(indent) << "elif ";
        os << expr_str(*s.if_clauses[i].cond, 0) << ' '
           << block_body(*s.if_clauses[i].body, indent) << '\n';
      }
      if (s.else_body) {
        os << ind(indent) << "else " << block_body(*s.else_body, indent) << '\n';
      }
      break;
    }
    case StmtKind::Foreach: {
      os << "foreach " << s.name << " in " << expr_str(*s.expr, 0);
      if (s.foreach_hi) os << " : " << expr_str(*s.foreach_hi, 0);
      os << ' ' << block_body(*s.block[0], indent) << '\n';
      break;
    }
    case StmtKind::Block: {
      os << "{\n";
      for (const auto& st : s.block) os << stmt_str(*st, indent + 1);
      os << ind(indent) << "}\n";
      break;
    }
    case StmtKind::BuildField:
      os << "build " << s.name;
      if (s.expr) os << " = " << expr_str(*s.expr, 0);
      os << ";\n";
      break;
  }
  return os.str();
}

std::string field_list_str(const std::vector<FieldDecl>& fields) {
  std::ostringstream os;
  os << '(';
  for (size_t i = 0; i < fields.size(); i++) {
    if (i) os << ", ";
    os << fields[i].name << ": " << type_to_string(*fields[i].type);
    if (fields[i].default_value) os << " = " << expr_str(*fields[i].default_value, 0);
  }
  os << ')';
  return os.str();
}

std::string param_list_str(const std::vector<ParamDecl>& params) {
  std::ostringstream os;
  os << '(';
  for (size_t i = 0; i < params.size(); i++) {
    if (i) os << ", ";
    os << params[i].name << ": " << (params[i].is_mut ? "mut " : "")
       << type_to_string(*params[i].type);
    if (params[i].default_value) os << " = " << expr_str(*params[i].default_value, 0);
  }
  os << ')';
  return os.str();
}

std::string member_str(const Member& m, int indent);

std::string members_str(const std::vector<MemberPtr>& members, int indent) {
  std::ostringstream os;
  for (const auto& m : members) os << member_str(*m, indent);
  return os.str();
}

std::string member_str(const Member& m, int indent) {
  std::ostringstream os;
  os << ind(indent);
  switch (m.kind) {
    case MemberKind::StoredField:
      os << m.name << ": " << type_to_string(*m.type) << ";\n";
      break;
    case MemberKind::Padding:
      os << m.padding_bits << ";\n";
      break;
    case MemberKind::Derive:
      os << m.name << " = " << expr_str(*m.value, 0) << ";\n";
      break;
    case MemberKind::Let:
      os << "let " << m.name << ": " << type_to_string(*m.type) << " = "
         << expr_str(*m.value, 0) << ";\n";
      break;
    case MemberKind::Separator:
      os << "---\n";
      break;
    case MemberKind::Group: {
      if (m.indirect) os << "indirect ";
      os << "group";
      if (!m.group_name.empty()) os << ' ' << m.group_name;
      bool attrs = m.size_expr || m.align_bytes || m.tile;
      if (attrs) {
        os << '[';
        bool first = true;
        if (m.tile) {
          os << m.tile;
          first = false;
        }
        if (m.size_expr) {
          if (!first) os << ", ";
          os << "size=" << expr_str(*m.size_expr, 0);
          first = false;
        }
        if (m.align_bytes) {
          if (!first) os << ", ";
          os << "align=" << m.align_bytes;
        }
        os << ']';
      }
      if (!m.index_binding.empty()) os << " by " << m.index_binding;
      os << " {\n" << members_str(m.members, indent + 1) << ind(indent) << "};\n";
      break;
    }
    case MemberKind::Split: {
      os << "split " << expr_str(*m.value, 0) << " {\n";
      for (const auto& arm : m.arms) {
        os << ind(indent + 1);
        switch (arm.pattern) {
          case PatternKind::Literal: os << expr_str(*arm.pattern_value, 0); break;
          case PatternKind::Gt: os << "> " << expr_str(*arm.pattern_value, 0); break;
          case PatternKind::Lt: os << "< " << expr_str(*arm.pattern_value, 0); break;
          case PatternKind::Ge: os << ">= " << expr_str(*arm.pattern_value, 0); break;
          case PatternKind::Le: os << "<= " << expr_str(*arm.pattern_value, 0); break;
          case PatternKind::Approx: os << "~ " << expr_str(*arm.pattern_value, 0); break;
          case PatternKind::Wildcard: os << "_"; break;
        }
        os << " -> " << arm.variant;
        if (arm.is_from) {
          os << " from " << arm.from_group << '[' << expr_str(*arm.from_key, 0) << "];\n";
        } else {
          os << " {\n" << members_str(arm.members, indent + 2) << ind(indent + 1) << "};\n";
        }
      }
      os << ind(indent) << "};\n";
      break;
    }
  }
  return os.str();
}

}  // namespace

std::string print_expr(const Expr& e) { return expr_str(e, 0); }
std::string print_stmt(const Stmt& s, int indent) { return stmt_str(s, indent); }

std::string print_type_decl(const AdtDecl& d) {
  std::ostringstream os;
  os << "type " << d.name;
  if (!d.common_fields.empty() || d.variants.empty()) os << field_list_str(d.common_fields);
  if (!d.variants.empty()) {
    os << " =\n";
    for (size_t i = 0; i < d.variants.size(); i++) {
      os << "  " << (i ? "| " : "  ") << d.variants[i].name
         << field_list_str(d.variants[i].fields) << '\n';
    }
    os.seekp(-1, std::ios_base::end);
  }
  os << ";\n";
  return os.str();
}

std::string print_func(const FuncDecl& f) {
  std::ostringstream os;
  os << "func " << f.name;
  if (!f.attrs.empty()) {
    os << '[';
    for (size_t i = 0; i < f.attrs.size(); i++) {
      if (i) os << ", ";
      os << f.attrs[i];
    }
    os << ']';
  }
  os << param_list_str(f.params);
  if (f.return_type && f.return_type->kind != TypeKind::Void)
    os << " -> " << type_to_string(*f.return_type);
  os << " =\n" << print_stmt(*f.body, 1);
  return os.str();
}

std::string print_layout(const LayoutSpec& l) {
  std::ostringstream os;
  os << "layout " << l.name << param_list_str(l.reference_params) << " {\n"
     << members_str(l.members, 1) << "};\n";
  return os.str();
}

std::string print_build(const BuildSpec& b) {
  std::ostringstream os;
  os << "build " << b.name << "[order=" << (b.order == BuildOrder::Pre ? "pre" : "post")
     << "] {\n";
  for (const auto& vb : b.builders) {
    os << "  build " << vb.variant << param_list_str(vb.params) << " {\n";
    if (vb.has_root) {
      os << "    build root {\n";
      for (const auto& s : vb.root_block) os << print_stmt(*s, 3);
      os << "    };\n";
    }
    for (const auto& s : vb.stmts) os << print_stmt(*s, 2);
    os << "  };\n";
  }
  os << "};\n";
  return os.str();
}

std::string print_program(const Program& p) {
  std::ostringstream os;
  for (const auto& t : p.types) os << print_type_decl(t);
  for (const auto& f : p.funcs) os << print_func(f) << '\n';
  for (const auto& l : p.layouts) os << print_layout(l) << '\n';
  for (const auto& b : p.builds) os << print_build(b) << '\n';
  return os.str();
}

// --------------------------------------------------------------------------
// Structural equality via canonical reprinting of both sides.
// --------------------------------------------------------------------------

bool program_equal(const Program& a, const Program& b) {
  return print_program(a) == print_program(b);
}

}  // namespace layoutc
