#include "layoutc/ast.hpp"

#include <sstream>

namespace layoutc {

SemTypePtr SemType::make_void() {
  auto t = std::make_shared<SemType>();
  t->kind = TypeKind::Void;
  return t;
}
SemTypePtr SemType::make_int(uint32_t width, bool is_signed) {
  auto t = std::make_shared<SemType>();
  t->kind = TypeKind::Int;
  t->width = width;
  t->is_signed = is_signed;
  return t;
}
SemTypePtr SemType::make_float(uint32_t width) {
  auto t = std::make_shared<SemType>();
  t->kind = TypeKind::Float;
  t->width = width;
  return t;
}
SemTypePtr SemType::make_bool() {
  auto t = std::make_shared<SemType>();
  t->kind = TypeKind::Bool;
  t->width = 1;
  return t;
}
SemTypePtr SemType::make_ptr() {
  auto t = std::make_shared<SemType>();
  t->kind = TypeKind::Ptr;
  t->width = 64;
  return t;
}
SemTypePtr SemType::make_vec(SemTypePtr elem, uint32_t lanes) {
  auto t = std::make_shared<SemType>();
  t->kind = TypeKind::Vec;
  t->elem = std::move(elem);
  t->lanes = lanes;
  return t;
}
SemTypePtr SemType::make_array(SemTypePtr elem, uint32_t count) {
  auto t = std::make_shared<SemType>();
  t->kind = TypeKind::Array;
  t->elem = std::move(elem);
  t->lanes = count;
  return t;
}
SemTypePtr SemType::make_dyn_array(SemTypePtr elem, std::string len_field) {
  auto t = std::make_shared<SemType>();
  t->kind = TypeKind::Array;
  t->elem = std::move(elem);
  t->lanes = 0;
  t->len_field = std::move(len_field);
  return t;
}
SemTypePtr SemType::make_tuple(std::vector<SemTypePtr> members) {
  auto t = std::make_shared<SemType>();
  t->kind = TypeKind::Tuple;
  t->members = std::move(members);
  return t;
}
SemTypePtr SemType::make_optional(SemTypePtr elem) {
  auto t = std::make_shared<SemType>();
  t->kind = TypeKind::Optional;
  t->elem = std::move(elem);
  return t;
}
SemTypePtr SemType::make_set(SemTypePtr elem) {
  auto t = std::make_shared<SemType>();
  t->kind = TypeKind::Set;
  t->elem = std::move(elem);
  return t;
}
SemTypePtr SemType::make_named(std::string name) {
  auto t = std::make_shared<SemType>();
  t->kind = TypeKind::Named;
  t->name = std::move(name);
  return t;
}

bool type_equal(const SemType& a, const SemType& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case TypeKind::Void:
    case TypeKind::Bool:
    case TypeKind::Ptr:
      return true;
    case TypeKind::Int:
      return a.width == b.width && a.is_signed == b.is_signed;
    case TypeKind::Float:
      return a.width == b.width;
    case TypeKind::Vec:
    case TypeKind::Range:
      return a.lanes == b.lanes && type_equal(*a.elem, *b.elem);
    case TypeKind::Array:
      return a.lanes == b.lanes && a.len_field == b.len_field && type_equal(*a.elem, *b.elem);
    case TypeKind::Tuple: {
      if (a.members.size() != b.members.size()) return false;
      for (size_t i = 0; i < a.members.size(); i++)
        if (!type_equal(*a.members[i], *b.members[i])) return false;
      return true;
    }
    case TypeKind::Optional:
    case TypeKind::Set:
      return type_equal(*a.elem, *b.elem);
    case TypeKind::Named:
      return a.name == b.name;
  }
  return false;
}

std::string type_to_string(const SemType& t) {
  std::ostringstream os;
  switch (t.kind) {
    case TypeKind::Void: os << "()"; break;
    case TypeKind::Int: os << (t.is_signed ? 'i' : 'u') << t.width; break;
    case TypeKind::Float: os << 'f' << t.width; break;
    case TypeKind::Bool: os << "bool"; break;
    case TypeKind::Ptr: os << "ptr"; break;
    case TypeKind::Vec: os << type_to_string(*t.elem) << 'x' << t.lanes; break;
    case TypeKind::Range: os << "range"; break;
    case TypeKind::Array:
      os << type_to_string(*t.elem) << '[';
      if (t.len_field.empty()) os << t.lanes;
      else os << t.len_field;
      os << ']';
      break;
    case TypeKind::Tuple: {
      os << '(';
      for (size_t i = 0; i < t.members.size(); i++) {
        if (i) os << ", ";
        os << type_to_string(*t.members[i]);
      }
      os << ')';
      break;
    }
    case TypeKind::Optional: os << "option[" << type_to_string(*t.elem) << ']'; break;
    case TypeKind::Set: os << "set[" << type_to_string(*t.elem) << ']'; break;
    case TypeKind::Named: os << t.name; break;
  }
  return os.str();
}

const char* binop_name(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Div: return "/";
    case BinOp::Mod: return "%";
    case BinOp::Shl: return "<<";
    case BinOp::Shr: return ">>";
    case BinOp::BitAnd: return "&";
    case BinOp::BitOr: return "|";
    case BinOp::BitXor: return "^";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Gt: return ">";
    case BinOp::Le: return "<=";
    case BinOp::Ge: return ">=";
  }
  return "?";
}

ExprPtr clone_expr(const Expr& e) {
  auto c = std::make_unique<Expr>();
  c->kind = e.kind;
  c->span = e.span;
  c->int_val = e.int_val;
  c->int_has_suffix = e.int_has_suffix;
  c->suffix_type = e.suffix_type;
  c->float_val = e.float_val;
  c->bool_val = e.bool_val;
  c->name = e.name;
  for (const auto& a : e.args) c->args.push_back(clone_expr(*a));
  if (e.base) c->base = clone_expr(*e.base);
  if (e.index) c->index = clone_expr(*e.index);
  if (e.index2) c->index2 = clone_expr(*e.index2);
  c->un_op = e.un_op;
  c->bin_op = e.bin_op;
  c->cast_type = e.cast_type;
  for (const auto& a : e.match_arms) {
    MatchExprArm arm;
    arm.pattern = a.pattern;
    arm.value = clone_expr(*a.value);
    c->match_arms.push_back(std::move(arm));
  }
  c->type = e.type;
  c->resolved_func = e.resolved_func;
  c->resolved_intrinsic = e.resolved_intrinsic;
  c->is_bit_extract = e.is_bit_extract;
  return c;
}

const VariantDecl* AdtDecl::find_variant(const std::string& n) const {
  for (const auto& v : variants)
    if (v.name == n) return &v;
  return nullptr;
}

std::vector<const FieldDecl*> AdtDecl::fields_of(const VariantDecl& v) const {
  std::vector<const FieldDecl*> out;
  for (const auto& f : common_fields) out.push_back(&f);
  for (const auto& f : v.fields) out.push_back(&f);
  return out;
}

bool FuncDecl::has_attr(const std::string& a) const {
  for (const auto& x : attrs)
    if (x == a) return true;
  return false;
}

const VariantBuilder* BuildSpec::find_builder(const std::string& variant) const {
  for (const auto& b : builders)
    if (b.variant == variant) return &b;
  return nullptr;
}

const AdtDecl* Program::find_type(const std::string& name) const {
  for (const auto& t : types)
    if (t.name == name) return &t;
  return nullptr;
}
const FuncDecl* Program::find_func(const std::string& name) const {
  for (const auto& f : funcs)
    if (f.name == name) return &f;
  return nullptr;
}
const LayoutSpec* Program::find_layout(const std::string& name) const {
  for (const auto& l : layouts)
    if (l.name == name) return &l;
  return nullptr;
}
const BuildSpec* Program::find_build(const std::string& name) const {
  for (const auto& b : builds)
    if (b.name == name) return &b;
  return nullptr;
}

}  // namespace layoutc
