#include "layoutc/sema.hpp"

#include <algorithm>
#include <cassert>

namespace layoutc {

const char* intrinsic_name(Intrinsic i) {
  switch (i) {
    case Intrinsic::Dot: return "dot";
    case Intrinsic::Cross: return "cross";
    case Intrinsic::Select: return "select";
    case Intrinsic::Min: return "min";
    case Intrinsic::Max: return "max";
    case Intrinsic::Floorf: return "floorf";
    case Intrinsic::Ceilf: return "ceilf";
    case Intrinsic::Abs: return "abs";
    case Intrinsic::Sum: return "sum";
    case Intrinsic::All: return "all";
    case Intrinsic::FmulRd: return "fmul_rd";
    case Intrinsic::FaddRd: return "fadd_rd";
    case Intrinsic::FsubRd: return "fsub_rd";
    case Intrinsic::FsubRu: return "fsub_ru";
    case Intrinsic::FdivRd: return "fdiv_rd";
    case Intrinsic::FrcpRd: return "frcp_rd";
    case Intrinsic::Insert: return "insert";
  }
  return "?";
}

int intrinsic_by_name(const std::string& name) {
  static const std::map<std::string, Intrinsic> table = {
      {"dot", Intrinsic::Dot},         {"cross", Intrinsic::Cross},
      {"cross_", Intrinsic::Cross},    {"select", Intrinsic::Select},
      {"min", Intrinsic::Min},         {"max", Intrinsic::Max},
      {"floorf", Intrinsic::Floorf},   {"ceilf", Intrinsic::Ceilf},
      {"abs", Intrinsic::Abs},         {"sum", Intrinsic::Sum},
      {"all", Intrinsic::All},         {"fmul_rd", Intrinsic::FmulRd},
      {"fadd_rd", Intrinsic::FaddRd},  {"fsub_rd", Intrinsic::FsubRd},
      {"fsub_ru", Intrinsic::FsubRu},  {"fdiv_rd", Intrinsic::FdivRd},
      {"frcp_rd", Intrinsic::FrcpRd},
  };
  auto it = table.find(name);
  return it == table.end() ? -1 : static_cast<int>(it->second);
}

uint64_t TypeTable::packed_width(const SemType& t, std::string* err) const {
  switch (t.kind) {
    case TypeKind::Int: return t.width;
    case TypeKind::Float: return t.width;
    case TypeKind::Bool: return 1;
    case TypeKind::Ptr: return 64;
    case TypeKind::Vec: {
      uint64_t e = packed_width(*t.elem, err);
      return e * t.lanes;
    }
    case TypeKind::Array: {
      if (t.lanes == 0) {
        if (err) *err = "dynamically sized array is not storable inline";
        return 0;
      }
      return packed_width(*t.elem, err) * t.lanes;
    }
    case TypeKind::Tuple: {
      uint64_t s = 0;
      for (const auto& m : t.members) s += packed_width(*m, err);
      return s;
    }
    case TypeKind::Named: {
      const AdtDecl* d = lookup(t.name);
      if (!d) {
        if (err) *err = "unknown type '" + t.name + "'";
        return 0;
      }
      if (!d->is_record()) {
        if (err) *err = "algebraic type '" + t.name + "' has no storable width";
        return 0;
      }
      uint64_t s = 0;
      for (const auto& f : d->common_fields) s += packed_width(*f.type, err);
      return s;
    }
    default:
      if (err) *err = "type " + type_to_string(t) + " is not storable";
      return 0;
  }
}

void Sema::error(Span span, DiagCode code, const std::string& msg) {
  Diagnostic d;
  d.code = code;
  d.span = span;
  d.message = msg;
  diags_->push_back(std::move(d));
}

bool Sema::assignable(const SemType& from, const SemType& to) {
  if (type_equal(from, to)) return true;
  if (from.kind == TypeKind::Int && to.kind == TypeKind::Int && from.width <= to.width)
    return true;
  if (to.kind == TypeKind::Optional && type_equal(from, *to.elem)) return true;
  return false;
}

bool Sema::adaptable(const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit:
    case ExprKind::FloatLit:
      return e.suffix_type == nullptr;
    case ExprKind::InfLit:
    case ExprKind::Aggregate:
      return true;
    case ExprKind::Unary:
      return e.un_op == UnOp::Neg && adaptable(*e.base);
    case ExprKind::Tuple: {
      for (const auto& a : e.args)
        if (!adaptable(*a)) return false;
      return true;
    }
    case ExprKind::Append:
      return true;
    default:
      return false;
  }
}

namespace {

bool is_numeric(const SemType& t) { return t.kind == TypeKind::Int || t.kind == TypeKind::Float; }

bool is_int_kind(const SemType& t) { return t.kind == TypeKind::Int; }

bool vec_of_numeric(const SemType& t) {
  return t.kind == TypeKind::Vec && (is_numeric(*t.elem) || vec_of_numeric(*t.elem));
}

const SemType& lane_scalar(const SemType& t) {
  return t.kind == TypeKind::Vec ? lane_scalar(*t.elem) : t;
}

}  // namespace

SemTypePtr Sema::resolve_named(const SemTypePtr& t, Span span) {
  if (!t) return SemType::make_void();
  if (t->kind == TypeKind::Named && !types_.lookup(t->name)) {
    error(span, DiagCode::TypeMismatch, "unknown type '" + t->name + "'");
  }
  return t;
}

SemTypePtr Sema::type_aggregate(Expr& e, Scope& scope, const SemTypePtr& expected,
                                const TypecheckOptions& opts) {
  if (!expected || expected->kind == TypeKind::Void) {
    error(e.span, DiagCode::TypeMismatch, "cannot infer the type of this aggregate literal");
    return SemType::make_void();
  }
  const SemType& want = *expected;
  if (want.kind == TypeKind::Optional) {
    if (e.args.empty()) {
      e.type = expected;
      return expected;  // none
    }
    if (e.args.size() == 1) {
      type_expr(*e.args[0], scope, want.elem, opts);
      e.type = expected;
      return expected;
    }
    error(e.span, DiagCode::TypeMismatch, "option literal takes zero or one value");
    return SemType::make_void();
  }
  if (want.kind == TypeKind::Vec) {
    if (e.args.size() != want.lanes) {
      error(e.span, DiagCode::TypeMismatch,
            "expected " + std::to_string(want.lanes) + " lanes for " + type_to_string(want) +
                ", got " + std::to_string(e.args.size()));
      return SemType::make_void();
    }
    for (auto& a : e.args) type_expr(*a, scope, want.elem, opts);
    e.type = expected;
    return expected;
  }
  if (want.kind == TypeKind::Tuple) {
    if (e.args.size() != want.members.size()) {
      error(e.span, DiagCode::TypeMismatch, "tuple arity mismatch");
      return SemType::make_void();
    }
    for (size_t i = 0; i < e.args.size(); i++) type_expr(*e.args[i], scope, want.members[i], opts);
    e.type = expected;
    return expected;
  }
  if (want.kind == TypeKind::Named) {
    const AdtDecl* d = types_.lookup(want.name);
    if (d && d->is_record()) {
      if (e.args.size() != d->common_fields.size()) {
        error(e.span, DiagCode::TypeMismatch,
              "record " + want.name + " expects " + std::to_string(d->common_fields.size()) +
                  " fields");
        return SemType::make_void();
      }
      for (size_t i = 0; i < e.args.size(); i++)
        type_expr(*e.args[i], scope, d->common_fields[i].type, opts);
      e.type = expected;
      return expected;
    }
  }
  error(e.span, DiagCode::TypeMismatch,
        "aggregate literal cannot have type " + type_to_string(want));
  return SemType::make_void();
}

SemTypePtr Sema::type_construct(Expr& e, Scope& scope, const TypecheckOptions& opts) {
  SemTypePtr t = e.cast_type;
  if (!t) t = SemType::make_named(e.name);
  if (t->kind == TypeKind::Vec) {
    if (e.args.size() == t->lanes) {
      for (auto& a : e.args) type_expr(*a, scope, t->elem, opts);
      e.type = t;
      return t;
    }
    error(e.span, DiagCode::TypeMismatch,
          "expected " + std::to_string(t->lanes) + " lane values for " + type_to_string(*t));
    return SemType::make_void();
  }
  if (t->kind == TypeKind::Named) {
    const AdtDecl* d = types_.lookup(t->name);
    if (!d) {
      error(e.span, DiagCode::TypeMismatch, "unknown type '" + t->name + "'");
      return SemType::make_void();
    }
    if (!d->is_record()) {
      error(e.span, DiagCode::TypeMismatch,
            "cannot construct algebraic type '" + t->name + "' in a traversal");
      return SemType::make_void();
    }
    size_t required = 0;
    for (const auto& f : d->common_fields)
      if (!f.default_value) required++;
    if (e.args.size() > d->common_fields.size() || e.args.size() < required) {
      error(e.span, DiagCode::TypeMismatch,
            "record " + t->name + " expects " + std::to_string(d->common_fields.size()) +
                " fields, got " + std::to_string(e.args.size()));
      return SemType::make_void();
    }
    for (size_t i = 0; i < e.args.size(); i++)
      type_expr(*e.args[i], scope, d->common_fields[i].type, opts);
    e.type = t;
    return t;
  }
  error(e.span, DiagCode::TypeMismatch, "cannot construct type " + type_to_string(*t));
  return SemType::make_void();
}

SemTypePtr Sema::type_intrinsic(Expr& e, Scope& scope, int intr, const TypecheckOptions& opts) {
  Intrinsic in = static_cast<Intrinsic>(intr);
  e.resolved_intrinsic = intr;
  auto arg = [&](size_t i) -> Expr& { return *e.args[i]; };
  auto fail = [&](const std::string& m) {
    error(e.span, DiagCode::TypeMismatch, m);
    return SemType::make_void();
  };

  switch (in) {
    case Intrinsic::Dot: {
      if (e.args.size() != 2) return fail("dot takes two vectors");
      SemTypePtr a = type_expr(arg(0), scope, nullptr, opts);
      SemTypePtr b = type_expr(arg(1), scope, a, opts);
      if (a->kind != TypeKind::Vec || !type_equal(*a, *b)) return fail("dot expects equal vectors");
      e.type = a->elem;
      return e.type;
    }
    case Intrinsic::Cross: {
      if (e.args.size() != 2) return fail("cross takes two f32x3");
      SemTypePtr a = type_expr(arg(0), scope, nullptr, opts);
      SemTypePtr b = type_expr(arg(1), scope, a, opts);
      if (a->kind != TypeKind::Vec || a->lanes != 3 || !type_equal(*a, *b))
        return fail("cross expects two f32x3");
      e.type = a;
      return a;
    }
    case Intrinsic::Select: {
      if (e.args.size() != 3) return fail("select takes mask and two values");
      SemTypePtr m = type_expr(arg(0), scope, nullptr, opts);
      SemTypePtr a = type_expr(arg(1), scope, nullptr, opts);
      SemTypePtr b = type_expr(arg(2), scope, adaptable(arg(2)) ? a : nullptr, opts);
      bool scalar_mask = m->kind == TypeKind::Bool;
      bool vec_mask = m->kind == TypeKind::Vec && m->elem->kind == TypeKind::Bool;
      if (!scalar_mask && !vec_mask) return fail("select mask must be bool or boolxN");
      SemTypePtr val;
      if (type_equal(*a, *b)) {
        val = a;
      } else if (a->kind == TypeKind::Vec && type_equal(*a->elem, *b)) {
        val = a;  // scalar broadcast on the false branch
      } else if (b->kind == TypeKind::Vec && type_equal(*b->elem, *a)) {
        val = b;
      } else {
        return fail("select branches have mismatched types");
      }
      if (vec_mask && val->kind != TypeKind::Vec) return fail("vector mask requires vector values");
      if (vec_mask && m->lanes != val->lanes) return fail("select mask lane count mismatch");
      e.type = val;
      return val;
    }
    case Intrinsic::Min:
    case Intrinsic::Max: {
      if (e.args.size() == 1) {
        SemTypePtr a = type_expr(
            arg(0), scope,
            adaptable(arg(0)) ? SemType::make_vec(SemType::make_float(32), 3) : nullptr, opts);
        if (a->kind != TypeKind::Vec) return fail("1-argument min/max reduces a vector");
        e.type = a->elem;
        return e.type;
      }
      if (e.args.size() != 2) return fail("min/max take one or two arguments");
      SemTypePtr a, b;
      if (adaptable(arg(0)) && !adaptable(arg(1))) {
        b = type_expr(arg(1), scope, nullptr, opts);
        a = type_expr(arg(0), scope, b->kind == TypeKind::Vec ? b->elem : b, opts);
      } else {
        a = type_expr(arg(0), scope, nullptr, opts);
        b = type_expr(arg(1), scope,
                      adaptable(arg(1)) ? (a->kind == TypeKind::Vec ? a->elem : a) : nullptr,
                      opts);
      }
      if (type_equal(*a, *b)) {
        e.type = a;
        return a;
      }
      if (a->kind == TypeKind::Vec && type_equal(*a->elem, *b)) {
        e.type = a;
        return a;
      }
      if (b->kind == TypeKind::Vec && type_equal(*b->elem, *a)) {
        e.type = b;
        return b;
      }
      return fail("min/max operand types mismatch");
    }
    case Intrinsic::Floorf:
    case Intrinsic::Ceilf:
    case Intrinsic::Abs: {
      if (e.args.size() != 1) return fail("unary math intrinsic takes one argument");
      SemTypePtr a = type_expr(arg(0), scope, nullptr, opts);
      if (!(a->kind == TypeKind::Float || vec_of_numeric(*a) ||
            (in == Intrinsic::Abs && a->kind == TypeKind::Int)))
        return fail("expects a float or float vector");
      e.type = a;
      return a;
    }
    case Intrinsic::Sum: {
      if (e.args.size() != 1) return fail("sum takes one vector");
      SemTypePtr a = type_expr(arg(0), scope, nullptr, opts);
      if (a->kind != TypeKind::Vec) return fail("sum expects a vector");
      e.type = a->elem;
      return e.type;
    }
    case Intrinsic::All: {
      if (e.args.size() != 1) return fail("all takes one bool vector");
      SemTypePtr a = type_expr(arg(0), scope, nullptr, opts);
      if (!(a->kind == TypeKind::Vec && a->elem->kind == TypeKind::Bool))
        return fail("all expects boolxN");
      e.type = SemType::make_bool();
      return e.type;
    }
    case Intrinsic::FmulRd:
    case Intrinsic::FaddRd:
    case Intrinsic::FsubRd:
    case Intrinsic::FsubRu:
    case Intrinsic::FdivRd: {
      if (e.args.size() != 2) return fail("directed rounding op takes two arguments");
      SemTypePtr a, b;
      if (adaptable(arg(0)) && !adaptable(arg(1))) {
        b = type_expr(arg(1), scope, nullptr, opts);
        a = type_expr(arg(0), scope, b->kind == TypeKind::Vec ? b->elem : b, opts);
      } else {
        a = type_expr(arg(0), scope, nullptr, opts);
        b = type_expr(arg(1), scope,
                      adaptable(arg(1)) ? (a->kind == TypeKind::Vec ? a->elem : a) : nullptr,
                      opts);
      }
      if (type_equal(*a, *b)) {
        e.type = a;
        return a;
      }
      if (a->kind == TypeKind::Vec && type_equal(*a->elem, *b)) {
        e.type = a;
        return a;
      }
      if (b->kind == TypeKind::Vec && type_equal(*b->elem, *a)) {
        e.type = b;
        return b;
      }
      return fail("directed rounding operand mismatch");
    }
    case Intrinsic::FrcpRd: {
      if (e.args.size() != 1) return fail("frcp_rd takes one argument");
      SemTypePtr a = type_expr(arg(0), scope, nullptr, opts);
      e.type = a;
      return a;
    }
    case Intrinsic::Insert:
      return fail("insert is a set method");
  }
  return SemType::make_void();
}

SemTypePtr Sema::type_call(Expr& e, Scope& scope, const TypecheckOptions& opts) {
  std::vector<int> candidates;
  const Program& p = types_.program();
  for (size_t i = 0; i < p.funcs.size(); i++) {
    if (p.funcs[i].name != e.name) continue;
    const auto& params = p.funcs[i].params;
    if (params.size() < e.args.size()) continue;
    bool defaults_ok = true;
    for (size_t j = e.args.size(); j < params.size(); j++)
      if (!params[j].default_value) defaults_ok = false;
    if (defaults_ok) candidates.push_back(static_cast<int>(i));
  }
  if (candidates.empty()) {
    int intr = intrinsic_by_name(e.name);
    if (intr >= 0) return type_intrinsic(e, scope, intr, opts);
    error(e.span, DiagCode::TypeMismatch,
          "unknown function '" + e.name + "' with " + std::to_string(e.args.size()) +
              " argument(s)");
    return SemType::make_void();
  }
  if (candidates.size() == 1) {
    const FuncDecl& f = p.funcs[static_cast<size_t>(candidates[0])];
    for (size_t i = 0; i < e.args.size(); i++) {
      SemTypePtr at = type_expr(*e.args[i], scope, f.params[i].type, opts);
      if (at->kind != TypeKind::Void && !type_equal(*at, *f.params[i].type)) {
        bool ok = assignable(*at, *f.params[i].type);
        if (!ok)
          error(e.args[i]->span, DiagCode::TypeMismatch,
                "argument " + std::to_string(i + 1) + " of '" + e.name + "': expected " +
                    type_to_string(*f.params[i].type) + ", got " + type_to_string(*at));
      }
    }
    e.resolved_func = candidates[0];
    e.type = f.return_type;
    return f.return_type;
  }
  std::vector<SemTypePtr> arg_types;
  for (auto& a : e.args) arg_types.push_back(type_expr(*a, scope, nullptr, opts));
  for (int ci : candidates) {
    const FuncDecl& f = p.funcs[static_cast<size_t>(ci)];
    bool match = true;
    for (size_t i = 0; i < e.args.size(); i++) {
      if (type_equal(*arg_types[i], *f.params[i].type)) continue;
      if (adaptable(*e.args[i]) &&
          (is_numeric(*f.params[i].type) || f.params[i].type->kind == TypeKind::Vec))
        continue;
      match = false;
      break;
    }
    if (!match) continue;
    for (size_t i = 0; i < e.args.size(); i++) {
      if (!type_equal(*arg_types[i], *f.params[i].type))
        type_expr(*e.args[i], scope, f.params[i].type, opts);
    }
    e.resolved_func = ci;
    e.type = f.return_type;
    return f.return_type;
  }
  error(e.span, DiagCode::TypeMismatch, "no matching overload for '" + e.name + "'");
  return SemType::make_void();
}

SemTypePtr Sema::type_binary(Expr& e, Scope& scope, const SemTypePtr& expected,
                             const TypecheckOptions& opts) {
  Expr& lhs = *e.index;
  Expr& rhs = *e.index2;
  auto fail = [&](const std::string& m) {
    error(e.span, DiagCode::TypeMismatch, m);
    return SemType::make_void();
  };

  if (e.bin_op == BinOp::And || e.bin_op == BinOp::Or) {
    SemTypePtr a = type_expr(lhs, scope, SemType::make_bool(), opts);
    SemTypePtr b = type_expr(rhs, scope, SemType::make_bool(), opts);
    if (a->kind == TypeKind::Void || b->kind == TypeKind::Void) return SemType::make_void();
    if (a->kind != TypeKind::Bool || b->kind != TypeKind::Bool)
      return fail("logical operator expects bool operands");
    e.type = SemType::make_bool();
    return e.type;
  }

  SemTypePtr a, b;
  if (adaptable(lhs) && !adaptable(rhs)) {
    b = type_expr(rhs, scope, nullptr, opts);
    SemTypePtr want = b;
    if (b->kind == TypeKind::Vec && lhs.kind != ExprKind::Aggregate) want = b->elem;
    a = type_expr(lhs, scope, want, opts);
  } else if (!adaptable(lhs) && adaptable(rhs)) {
    a = type_expr(lhs, scope, nullptr, opts);
    SemTypePtr want = a;
    if (a->kind == TypeKind::Vec && rhs.kind != ExprKind::Aggregate) want = a->elem;
    b = type_expr(rhs, scope, want, opts);
  } else if (adaptable(lhs) && adaptable(rhs)) {
    bool floaty = lhs.kind == ExprKind::FloatLit || rhs.kind == ExprKind::FloatLit ||
                  lhs.kind == ExprKind::InfLit || rhs.kind == ExprKind::InfLit;
    SemTypePtr def = floaty ? SemType::make_float(32) : SemType::make_int(32, true);
    if (expected && is_numeric(*expected)) def = expected;
    a = type_expr(lhs, scope, def, opts);
    b = type_expr(rhs, scope, def, opts);
  } else {
    a = type_expr(lhs, scope, nullptr, opts);
    b = type_expr(rhs, scope, nullptr, opts);
  }
  if (a->kind == TypeKind::Void || b->kind == TypeKind::Void) return SemType::make_void();

  bool compare = e.bin_op == BinOp::Eq || e.bin_op == BinOp::Ne || e.bin_op == BinOp::Lt ||
                 e.bin_op == BinOp::Gt || e.bin_op == BinOp::Le || e.bin_op == BinOp::Ge;

  if (e.bin_op == BinOp::Shl || e.bin_op == BinOp::Shr) {
    if (!is_int_kind(*a) && a->kind != TypeKind::Ptr) return fail("shift expects an integer");
    if (!is_int_kind(*b)) return fail("shift count must be an integer");
    e.type = a;
    return a;
  }

  const SemType* va = a->kind == TypeKind::Vec ? a.get() : nullptr;
  const SemType* vb = b->kind == TypeKind::Vec ? b.get() : nullptr;
  if (va && vb && !type_equal(*a, *b)) return fail("vector operand shapes differ");

  const SemType& sa = lane_scalar(*a);
  const SemType& sb = lane_scalar(*b);

  SemTypePtr scalar_result;
  if (sa.kind == TypeKind::Float || sb.kind == TypeKind::Float) {
    if (sa.kind != TypeKind::Float || sb.kind != TypeKind::Float)
      return fail("cannot mix integer and float operands without an explicit cast");
    if (sa.width != sb.width) return fail("float width mismatch");
    scalar_result = SemType::make_float(sa.width);
  } else if (sa.kind == TypeKind::Int && sb.kind == TypeKind::Int) {
    uint32_t w = std::max(sa.width, sb.width);
    bool sgn;
    if (sa.is_signed == sb.is_signed) {
      sgn = sa.is_signed;
    } else {
      const SemType& wide = sa.width >= sb.width ? sa : sb;
      sgn = sa.width == sb.width ? false : wide.is_signed;
    }
    scalar_result = SemType::make_int(w, sgn);
  } else if (sa.kind == TypeKind::Bool && sb.kind == TypeKind::Bool && compare) {
    scalar_result = SemType::make_bool();
  } else if (sa.kind == TypeKind::Ptr && sb.kind == TypeKind::Ptr && compare) {
    scalar_result = SemType::make_ptr();
  } else if (sa.kind == TypeKind::Ptr && sb.kind == TypeKind::Int) {
    scalar_result = SemType::make_ptr();
  } else if (sa.kind == TypeKind::Ptr && sb.kind == TypeKind::Ptr && e.bin_op == BinOp::Sub) {
    scalar_result = SemType::make_int(64, false);
  } else {
    return fail("invalid operand types " + type_to_string(*a) + " and " + type_to_string(*b));
  }

  const SemType* shape = va ? va : vb;
  if (compare) {
    e.type = shape ? SemType::make_vec(SemType::make_bool(), shape->lanes) : SemType::make_bool();
    return e.type;
  }
  if (shape) {
    SemTypePtr res = scalar_result;
    std::vector<uint32_t> lanes;
    const SemType* s = shape;
    while (s->kind == TypeKind::Vec) {
      lanes.push_back(s->lanes);
      s = s->elem.get();
    }
    for (auto it = lanes.rbegin(); it != lanes.rend(); ++it) res = SemType::make_vec(res, *it);
    e.type = res;
    return res;
  }
  e.type = scalar_result;
  return scalar_result;
}

SemTypePtr Sema::type_expr(Expr& e, Scope& scope, const SemTypePtr& expected,
                           const TypecheckOptions& opts) {
  auto fail = [&](const std::string& m) {
    error(e.span, DiagCode::TypeMismatch, m);
    e.type = SemType::make_void();
    return e.type;
  };

  switch (e.kind) {
    case ExprKind::IntLit: {
      if (e.suffix_type) {
        e.type = e.suffix_type;
      } else if (expected &&
                 (expected->kind == TypeKind::Int || expected->kind == TypeKind::Float ||
                  expected->kind == TypeKind::Ptr)) {
        e.type = expected;
      } else {
        e.type = SemType::make_int(32, true);
      }
      return e.type;
    }
    case ExprKind::FloatLit: {
      if (e.suffix_type) e.type = e.suffix_type;
      else if (expected && expected->kind == TypeKind::Float) e.type = expected;
      else e.type = SemType::make_float(32);
      if (e.type->kind != TypeKind::Float) return fail("float literal in non-float context");
      return e.type;
    }
    case ExprKind::BoolLit:
      e.type = SemType::make_bool();
      return e.type;
    case ExprKind::InfLit:
      e.type = expected && expected->kind == TypeKind::Float ? expected : SemType::make_float(32);
      return e.type;
    case ExprKind::Ident: {
      const Binding* b = scope.lookup(e.name);
      if (!b) return fail("unknown identifier '" + e.name + "'");
      e.type = b->type;
      return e.type;
    }
    case ExprKind::ParentField: {
      if (!opts.parent_components) return fail("parent.* is only valid inside a layout");
      auto it = opts.parent_components->find(e.name);
      if (it == opts.parent_components->end())
        return fail("'" + e.name + "' is not a reference component");
      e.type = it->second;
      return e.type;
    }
    case ExprKind::This: {
      if (!opts.this_type) return fail("'this' is only valid inside a build procedure");
      e.type = opts.this_type;
      return e.type;
    }
    case ExprKind::Field: {
      SemTypePtr bt = type_expr(*e.base, scope, nullptr, opts);
      if (bt->kind == TypeKind::Void) return bt;
      const SemType* t = bt.get();
      if (t->kind == TypeKind::Optional) t = t->elem.get();
      if (t->kind == TypeKind::Named) {
        const AdtDecl* d = types_.lookup(t->name);
        if (!d) return fail("unknown type '" + t->name + "'");
        for (const auto& f : d->common_fields) {
          if (f.name == e.name) {
            e.type = f.type;
            return e.type;
          }
        }
        if (!d->is_record()) return fail("match on '" + t->name + "' before reading its fields");
        return fail("record " + t->name + " has no field '" + e.name + "'");
      }
      if (t->kind == TypeKind::Vec && t->lanes <= 4 && e.name.size() == 1) {
        static const std::string lanes = "xyzw";
        size_t idx = lanes.find(e.name[0]);
        if (idx != std::string::npos && idx < t->lanes) {
          e.type = t->elem;
          return e.type;
        }
      }
      return fail("no field '" + e.name + "' on " + type_to_string(*bt));
    }
    case ExprKind::Index: {
      SemTypePtr bt = type_expr(*e.base, scope, nullptr, opts);
      if (bt->kind == TypeKind::Void) return bt;
      if (bt->kind == TypeKind::Tuple) {
        if (e.index->kind != ExprKind::IntLit) return fail("tuple index must be a literal");
        uint64_t i = e.index->int_val;
        if (i >= bt->members.size()) return fail("tuple index out of range");
        type_expr(*e.index, scope, SemType::make_int(32, false), opts);
        e.type = bt->members[i];
        return e.type;
      }
      SemTypePtr it = type_expr(*e.index, scope, SemType::make_int(32, false), opts);
      if (it->kind != TypeKind::Int) return fail("index must be an integer");
      if (bt->kind == TypeKind::Vec || bt->kind == TypeKind::Array) {
        e.type = bt->elem;
        return e.type;
      }
      return fail("cannot index " + type_to_string(*bt));
    }
    case ExprKind::Slice: {
      SemTypePtr bt = type_expr(*e.base, scope, nullptr, opts);
      if (bt->kind == TypeKind::Void) return bt;
      if (bt->kind == TypeKind::Int || bt->kind == TypeKind::Ptr) {
        if (e.index->kind != ExprKind::IntLit || e.index2->kind != ExprKind::IntLit)
          return fail("bit range bounds must be literals");
        type_expr(*e.index, scope, SemType::make_int(32, false), opts);
        type_expr(*e.index2, scope, SemType::make_int(32, false), opts);
        uint64_t lo = e.index->int_val, hi = e.index2->int_val;
        uint32_t w = bt->kind == TypeKind::Ptr ? 64 : bt->width;
        if (lo > hi || hi >= w) return fail("bit range out of bounds");
        e.is_bit_extract = true;
        e.type = bt->kind == TypeKind::Ptr ? SemType::make_int(64, false) : bt;
        return e.type;
      }
      SemTypePtr a = type_expr(*e.index, scope, SemType::make_int(32, false), opts);
      SemTypePtr b = type_expr(*e.index2, scope, SemType::make_int(32, false), opts);
      if (a->kind != TypeKind::Int || b->kind != TypeKind::Int)
        return fail("slice bounds must be integers");
      if (bt->kind == TypeKind::Array) {
        e.type = SemType::make_dyn_array(bt->elem, "");
        return e.type;
      }
      return fail("cannot slice " + type_to_string(*bt));
    }
    case ExprKind::Call:
      return type_call(e, scope, opts);
    case ExprKind::MethodCall: {
      SemTypePtr bt = type_expr(*e.base, scope, nullptr, opts);
      if (e.name == "insert" && bt->kind == TypeKind::Set) {
        if (e.args.size() != 1) return fail("insert takes one value");
        type_expr(*e.args[0], scope, bt->elem, opts);
        e.resolved_intrinsic = static_cast<int>(Intrinsic::Insert);
        e.type = SemType::make_void();
        return e.type;
      }
      return fail("unknown method '" + e.name + "' on " + type_to_string(*bt));
    }
    case ExprKind::Construct:
      return type_construct(e, scope, opts);
    case ExprKind::Aggregate:
      return type_aggregate(e, scope, expected, opts);
    case ExprKind::Tuple: {
      std::vector<SemTypePtr> members;
      if (expected && expected->kind == TypeKind::Tuple &&
          expected->members.size() == e.args.size()) {
        for (size_t i = 0; i < e.args.size(); i++)
          type_expr(*e.args[i], scope, expected->members[i], opts);
        e.type = expected;
        return e.type;
      }
      for (auto& a : e.args) members.push_back(type_expr(*a, scope, nullptr, opts));
      e.type = SemType::make_tuple(std::move(members));
      return e.type;
    }
    case ExprKind::Unary: {
      if (e.un_op == UnOp::Not) {
        SemTypePtr a = type_expr(*e.base, scope, SemType::make_bool(), opts);
        if (a->kind == TypeKind::Void) return a;
        if (a->kind != TypeKind::Bool) return fail("! expects bool");
        e.type = a;
        return a;
      }
      if (e.un_op == UnOp::BitNot) {
        SemTypePtr a = type_expr(*e.base, scope, expected, opts);
        if (a->kind != TypeKind::Int) return fail("~ expects an integer");
        e.type = a;
        return a;
      }
      SemTypePtr a = type_expr(*e.base, scope, expected, opts);
      if (a->kind == TypeKind::Void) return a;
      if (!is_numeric(lane_scalar(*a))) return fail("negation expects a numeric value");
      e.type = a;
      return a;
    }
    case ExprKind::Binary:
      return type_binary(e, scope, expected, opts);
    case ExprKind::CastAs: {
      SemTypePtr from = type_expr(*e.base, scope, nullptr, opts);
      if (from->kind == TypeKind::Void) return from;
      SemTypePtr to = resolve_named(e.cast_type, e.span);
      const SemType& sf = lane_scalar(*from);
      const SemType& st = lane_scalar(*to);
      bool lanes_ok = (from->kind == TypeKind::Vec) == (to->kind == TypeKind::Vec);
      if (from->kind == TypeKind::Vec && to->kind == TypeKind::Vec) {
        lanes_ok = from->lanes == to->lanes &&
                   (from->elem->kind == TypeKind::Vec) == (to->elem->kind == TypeKind::Vec);
        if (from->elem->kind == TypeKind::Vec && to->elem->kind == TypeKind::Vec)
          lanes_ok = lanes_ok && from->elem->lanes == to->elem->lanes;
      }
      bool scalar_ok = (is_numeric(sf) || sf.kind == TypeKind::Bool || sf.kind == TypeKind::Ptr) &&
                       (is_numeric(st) || st.kind == TypeKind::Ptr);
      if (!lanes_ok || !scalar_ok)
        return fail("cannot value-cast " + type_to_string(*from) + " as " + type_to_string(*to));
      e.type = to;
      return to;
    }
    case ExprKind::CastTo: {
      SemTypePtr from = type_expr(*e.base, scope, nullptr, opts);
      if (from->kind == TypeKind::Void) return from;
      SemTypePtr to = resolve_named(e.cast_type, e.span);
      std::string err;
      uint64_t wf = types_.packed_width(*from, &err);
      uint64_t wt = types_.packed_width(*to, &err);
      if (wf == 0 || wt == 0 || wf != wt)
        return fail("bit cast requires equal widths: " + type_to_string(*from) + " is " +
                    std::to_string(wf) + " bits, " + type_to_string(*to) + " is " +
                    std::to_string(wt) + " bits");
      e.type = to;
      return to;
    }
    case ExprKind::MatchExpr: {
      SemTypePtr st = type_expr(*e.base, scope, nullptr, opts);
      if (st->kind == TypeKind::Void) return st;
      if (!types_.is_adt(*st)) return fail("match scrutinee must have an algebraic type");
      const AdtDecl* adt = types_.lookup(st->name);
      SemTypePtr result;
      for (auto& arm : e.match_arms) {
        Scope arm_scope(&scope);
        if (!arm.pattern.wildcard) {
          const VariantDecl* v = adt->find_variant(arm.pattern.variant);
          if (!v) return fail("unknown variant '" + arm.pattern.variant + "'");
          auto fields = adt->fields_of(*v);
          if (arm.pattern.binders.size() != fields.size())
            return fail("pattern for " + v->name + " must bind " + std::to_string(fields.size()) +
                        " fields");
          for (size_t i = 0; i < fields.size(); i++) {
            if (arm.pattern.binders[i] == "_") continue;
            Binding b;
            b.type = fields[i]->type;
            arm_scope.bind(arm.pattern.binders[i], b);
          }
        }
        SemTypePtr at = type_expr(*arm.value, arm_scope, result ? result : expected, opts);
        if (!result) result = at;
        else if (!type_equal(*result, *at)) return fail("match arms have mismatched types");
      }
      e.type = result ? result : SemType::make_void();
      return e.type;
    }
    case ExprKind::Append: {
      if (!opts.allow_build_exprs) return fail("append is only valid inside a build procedure");
      type_expr(*e.args[0], scope, SemType::make_int(32, false), opts);
      e.type =
          expected && expected->kind == TypeKind::Int ? expected : SemType::make_int(32, false);
      return e.type;
    }
    case ExprKind::BuildChild: {
      if (!opts.allow_build_exprs)
        return fail("'build' expressions are only valid inside a build procedure");
      e.type = opts.this_type ? opts.this_type : SemType::make_void();
      return e.type;
    }
  }
  return SemType::make_void();
}

void Sema::check_stmt(Stmt& s, Scope& scope, const SemTypePtr& fn_return,
                      const TypecheckOptions& opts) {
  switch (s.kind) {
    case StmtKind::ExprStmt:
      type_expr(*s.expr, scope, nullptr, opts);
      break;
    case StmtKind::Let: {
      resolve_named(s.decl_type, s.span);
      if (s.expr) {
        SemTypePtr it = type_expr(*s.expr, scope, s.decl_type, opts);
        if (it->kind != TypeKind::Void && !type_equal(*it, *s.decl_type)) {
          bool ok = assignable(*it, *s.decl_type);
          if (!ok)
            error(s.span, DiagCode::TypeMismatch,
                  "cannot initialize " + type_to_string(*s.decl_type) + " from " +
                      type_to_string(*it));
        }
      }
      Binding b;
      b.type = s.decl_type;
      b.is_mut = s.is_mut;
      scope.bind(s.name, b);
      break;
    }
    case StmtKind::Assign: {
      const Binding* b = scope.lookup(s.lv_name);
      if (!b) {
        error(s.span, DiagCode::TypeMismatch, "unknown identifier '" + s.lv_name + "'");
        break;
      }
      if (!b->is_mut) {
        error(s.span, DiagCode::TypeMismatch,
              "assignment to immutable '" + s.lv_name + "' (declare it mut)");
        break;
      }
      SemTypePtr target = b->type;
      if (s.lv_is_field) {
        if (target->kind == TypeKind::Vec && target->lanes <= 4) {
          target = target->elem;
        } else if (types_.is_record(*target)) {
          const AdtDecl* d = types_.lookup(target->name);
          SemTypePtr found;
          for (const auto& f : d->common_fields)
            if (f.name == s.lv_field) found = f.type;
          if (!found) {
            error(s.span, DiagCode::TypeMismatch, "no field '" + s.lv_field + "'");
            break;
          }
          target = found;
        } else {
          error(s.span, DiagCode::TypeMismatch, "cannot assign to a field of this type");
          break;
        }
      } else if (s.lv_is_index) {
        if (target->kind != TypeKind::Vec && target->kind != TypeKind::Array) {
          error(s.span, DiagCode::TypeMismatch, "cannot index-assign this type");
          break;
        }
        type_expr(*s.lv_index, scope, SemType::make_int(32, false), opts);
        target = target->elem;
      } else if (s.lv_is_bitrange) {
        if (target->kind != TypeKind::Int && target->kind != TypeKind::Ptr) {
          error(s.span, DiagCode::TypeMismatch, "bit-range assignment expects an integer");
          break;
        }
        type_expr(*s.lv_index, scope, SemType::make_int(32, false), opts);
        type_expr(*s.lv_index2, scope, SemType::make_int(32, false), opts);
        if (target->kind == TypeKind::Ptr) target = SemType::make_int(64, false);
      }
      SemTypePtr vt = type_expr(*s.expr, scope, target, opts);
      if (vt->kind != TypeKind::Void && !type_equal(*vt, *target)) {
        bool ok = assignable(*vt, *target);
        if (!ok)
          error(s.span, DiagCode::TypeMismatch,
                "cannot assign " + type_to_string(*vt) + " to " + type_to_string(*target));
      }
      break;
    }
    case StmtKind::Return: {
      if (s.expr) {
        if (fn_return->kind == TypeKind::Void) {
          error(s.span, DiagCode::TypeMismatch, "returning a value from a unit function");
          break;
        }
        SemTypePtr t = type_expr(*s.expr, scope, fn_return, opts);
        if (t->kind != TypeKind::Void && !type_equal(*t, *fn_return)) {
          bool ok = assignable(*t, *fn_return);
          if (!ok)
            error(s.span, DiagCode::TypeMismatch,
                  "return type mismatch: expected " + type_to_string(*fn_return) + ", got " +
                      type_to_string(*t));
        }
      } else if (fn_return->kind != TypeKind::Void) {
        error(s.span, DiagCode::TypeMismatch, "missing return value");
      }
      break;
    }
    case StmtKind::Match: {
      SemTypePtr st = type_expr(*s.expr, scope, nullptr, opts);
      if (st->kind == TypeKind::Void) break;
      if (!types_.is_adt(*st)) {
        error(s.span, DiagCode::TypeMismatch, "match scrutinee must have an algebraic type");
        break;
      }
      const AdtDecl* adt = types_.lookup(st->name);
      for (auto& arm : s.match_arms) {
        Scope arm_scope(&scope);
        if (!arm.pattern.wildcard) {
          const VariantDecl* v = adt->find_variant(arm.pattern.variant);
          if (!v) {
            error(arm.pattern.span, DiagCode::TypeMismatch,
                  "unknown variant '" + arm.pattern.variant + "' of " + adt->name);
            continue;
          }
          auto fields = adt->fields_of(*v);
          if (arm.pattern.binders.size() != fields.size()) {
            error(arm.pattern.span, DiagCode::TypeMismatch,
                  "pattern for " + v->name + " must bind " + std::to_string(fields.size()) +
                      " fields, binds " + std::to_string(arm.pattern.binders.size()));
            continue;
          }
          for (size_t i = 0; i < fields.size(); i++) {
            if (arm.pattern.binders[i] == "_") continue;
            Binding b;
            b.type = fields[i]->type;
            arm_scope.bind(arm.pattern.binders[i], b);
          }
        }
        check_stmt(*arm.body, arm_scope, fn_return, opts);
      }
      break;
    }
    case StmtKind::If: {
      for (auto& c : s.if_clauses) {
        SemTypePtr ct = type_expr(*c.cond, scope, SemType::make_bool(), opts);
        if (ct->kind != TypeKind::Bool && ct->kind != TypeKind::Optional &&
            ct->kind != TypeKind::Void)
          error(c.cond->span, DiagCode::TypeMismatch,
                "condition must be bool or option, got " + type_to_string(*ct));
        Scope body_scope(&scope);
        check_stmt(*c.body, body_scope, fn_return, opts);
      }
      if (s.else_body) {
        Scope body_scope(&scope);
        check_stmt(*s.else_body, body_scope, fn_return, opts);
      }
      break;
    }
    case StmtKind::Foreach: {
      Scope body_scope(&scope);
      if (s.foreach_hi) {
        SemTypePtr lo = type_expr(*s.expr, scope, SemType::make_int(32, false), opts);
        SemTypePtr hi = type_expr(*s.foreach_hi, scope, lo, opts);
        if (lo->kind != TypeKind::Int || hi->kind != TypeKind::Int) {
          error(s.span, DiagCode::TypeMismatch, "range bounds must be integers");
          break;
        }
        Binding b;
        b.type = lo->width >= hi->width ? lo : hi;
        body_scope.bind(s.name, b);
      } else {
        SemTypePtr it = type_expr(*s.expr, scope, nullptr, opts);
        if (it->kind == TypeKind::Void) break;
        if (it->kind != TypeKind::Array && it->kind != TypeKind::Vec) {
          error(s.span, DiagCode::TypeMismatch,
                "foreach expects an array or vector, got " + type_to_string(*it));
          break;
        }
        Binding b;
        b.type = it->elem;
        body_scope.bind(s.name, b);
      }
      check_stmt(*s.block[0], body_scope, fn_return, opts);
      break;
    }
    case StmtKind::Block: {
      Scope inner(&scope);
      for (auto& st : s.block) check_stmt(*st, inner, fn_return, opts);
      break;
    }
    case StmtKind::BuildField:
      if (!opts.allow_build_exprs)
        error(s.span, DiagCode::TypeMismatch, "build statements are only valid in builds");
      break;
  }
}

std::vector<Diagnostic> typecheck_traversal(Program& module) {
  std::vector<Diagnostic> diags;
  Sema sema(module, &diags);
  TypecheckOptions opts;

  for (const auto& t : module.types) {
    auto check_fields = [&](const std::vector<FieldDecl>& fs) {
      for (const auto& f : fs) {
        if (f.type->kind == TypeKind::Named && !module.find_type(f.type->name))
          sema.error(f.span, DiagCode::TypeMismatch, "unknown type '" + f.type->name + "'");
      }
    };
    check_fields(t.common_fields);
    for (const auto& v : t.variants) check_fields(v.fields);
  }

  for (auto& f : module.funcs) {
    Scope scope;
    for (const auto& p : f.params) {
      Binding b;
      b.type = p.type;
      b.is_mut = p.is_mut;
      b.kind = BindKind::Param;
      scope.bind(p.name, b);
      if (p.type->kind == TypeKind::Named && !module.find_type(p.type->name))
        sema.error(p.span, DiagCode::TypeMismatch, "unknown type '" + p.type->name + "'");
    }
    sema.check_stmt(*f.body, scope, f.return_type, opts);
  }
  return diags;
}

}  // namespace layoutc
