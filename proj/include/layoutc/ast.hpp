#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "layoutc/diag.hpp"

namespace layoutc {

// ---------------------------------------------------------------------------
// Semantic types
// ---------------------------------------------------------------------------

struct SemType;
using SemTypePtr = std::shared_ptr<SemType>;

enum class TypeKind {
  Void,
  Int,      // arbitrary width 1..64, signed or unsigned
  Float,    // f16 (storage) or f32
  Bool,
  Ptr,      // 64-bit address
  Vec,      // elem x lanes (nestable)
  Array,    // elem[count] or elem[len_field]
  Tuple,
  Optional,
  Set,
  Named,    // record or ADT by name (resolved during sema)
  Range,    // internal: integer range used by foreach
};

struct SemType {
  TypeKind kind = TypeKind::Void;
  uint32_t width = 0;        // Int: bit width; Float: 16/32
  bool is_signed = false;    // Int only
  SemTypePtr elem;           // Vec/Array/Optional/Set/Range
  uint32_t lanes = 0;        // Vec lane count; Array static count (0 if dynamic)
  std::string len_field;     // Array dynamic length field name
  std::vector<SemTypePtr> members;  // Tuple
  std::string name;          // Named

  static SemTypePtr make_void();
  static SemTypePtr make_int(uint32_t width, bool is_signed);
  static SemTypePtr make_float(uint32_t width);
  static SemTypePtr make_bool();
  static SemTypePtr make_ptr();
  static SemTypePtr make_vec(SemTypePtr elem, uint32_t lanes);
  static SemTypePtr make_array(SemTypePtr elem, uint32_t count);
  static SemTypePtr make_dyn_array(SemTypePtr elem, std::string len_field);
  static SemTypePtr make_tuple(std::vector<SemTypePtr> members);
  static SemTypePtr make_optional(SemTypePtr elem);
  static SemTypePtr make_set(SemTypePtr elem);
  static SemTypePtr make_named(std::string name);
};

bool type_equal(const SemType& a, const SemType& b);
std::string type_to_string(const SemType& t);

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

enum class ExprKind {
  IntLit,
  FloatLit,
  BoolLit,
  InfLit,
  Ident,
  ParentField,   // parent.x (layout tree dependency)
  This,          // build `this`
  Field,         // e.f
  Index,         // e[i]
  Slice,         // e[a:b] -- array slice or integer bit extract (sema decides)
  Call,          // f(args)
  MethodCall,    // e.m(args)  (set insert)
  Construct,     // T(args) or T{args}
  Aggregate,     // {e1, ..., en} (type from context)
  Unary,
  Binary,
  CastAs,
  CastTo,
  Tuple,         // (e1, ..., en)
  MatchExpr,     // match e { | pat -> expr ... }
  Append,        // append(x, n)  (build language)
  BuildChild,    // build f  in expression position (build language)
};

enum class UnOp { Neg, Not, BitNot };
enum class BinOp {
  Add, Sub, Mul, Div, Mod,
  Shl, Shr,
  BitAnd, BitOr, BitXor,
  And, Or,
  Eq, Ne, Lt, Gt, Le, Ge,
};

const char* binop_name(BinOp op);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;
struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct MatchPattern {
  bool wildcard = false;
  std::string variant;
  std::vector<std::string> binders;  // "_" for ignored positions
  Span span;
};

struct MatchExprArm {
  MatchPattern pattern;
  ExprPtr value;
};

struct Expr {
  ExprKind kind;
  Span span;

  // literals
  uint64_t int_val = 0;
  bool int_has_suffix = false;
  SemTypePtr suffix_type;  // e.g. 1u, 1.0f32
  double float_val = 0.0;
  bool bool_val = false;

  std::string name;            // Ident/Field/MethodCall/Call/Construct/ParentField/Append/BuildChild
  std::vector<ExprPtr> args;   // Call/MethodCall/Construct/Aggregate/Tuple args
  ExprPtr base;                // Field/Index/Slice/MethodCall receiver; Unary/Cast operand
  ExprPtr index;               // Index; Slice lo; Binary lhs
  ExprPtr index2;              // Slice hi; Binary rhs
  UnOp un_op = UnOp::Neg;
  BinOp bin_op = BinOp::Add;
  SemTypePtr cast_type;        // CastAs/CastTo target; Construct type
  std::vector<MatchExprArm> match_arms;  // MatchExpr (base = scrutinee)

  // sema annotations
  SemTypePtr type;
  int resolved_func = -1;      // Call: index into module function list, or -1 for intrinsic
  int resolved_intrinsic = -1;
  bool is_bit_extract = false; // Slice on integer operand
};

ExprPtr clone_expr(const Expr& e);

// ---------------------------------------------------------------------------
// Statements (traversal + build languages)
// ---------------------------------------------------------------------------

enum class StmtKind {
  ExprStmt,
  Let,          // let x: [mut] T = e   (also `x : T = e` form)
  Assign,       // lvalue = e
  Return,       // return e?
  Match,
  If,
  Foreach,      // foreach x in e { }  or  foreach x in a : b { }
  Block,
  BuildField,   // build x (= e)?   -- build language
};

struct MatchStmtArm {
  MatchPattern pattern;
  StmtPtr body;
};

struct IfClause {
  ExprPtr cond;
  StmtPtr body;
};

struct Stmt {
  StmtKind kind;
  Span span;

  ExprPtr expr;        // ExprStmt/Let init/Assign rhs/Return value/Match scrutinee/Foreach iterable/BuildField value
  std::string name;    // Let/Foreach variable, BuildField target
  SemTypePtr decl_type;
  bool is_mut = false;

  // Assign lvalue: base name + optional projection
  std::string lv_name;
  ExprPtr lv_index;    // x[i] = e
  ExprPtr lv_index2;   // x[a:b] = e (bit assign)
  std::string lv_field;  // x.f = e
  bool lv_is_field = false;
  bool lv_is_index = false;
  bool lv_is_bitrange = false;

  std::vector<MatchStmtArm> match_arms;
  std::vector<IfClause> if_clauses;   // if/elif chain
  StmtPtr else_body;
  ExprPtr foreach_hi;  // range form upper bound
  std::vector<StmtPtr> block;
};

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

struct FieldDecl {
  std::string name;
  SemTypePtr type;
  ExprPtr default_value;  // optional
  Span span;
};

struct VariantDecl {
  std::string name;
  std::vector<FieldDecl> fields;
  Span span;
};

// `type Name(common fields);` is a record; with `= V(...) | ...` an ADT.
struct AdtDecl {
  std::string name;
  std::vector<FieldDecl> common_fields;
  std::vector<VariantDecl> variants;  // empty => plain record
  Span span;

  bool is_record() const { return variants.empty(); }
  const VariantDecl* find_variant(const std::string& n) const;
  // Logical fields of a variant: common fields then variant fields.
  std::vector<const FieldDecl*> fields_of(const VariantDecl& v) const;
};

struct ParamDecl {
  std::string name;
  SemTypePtr type;
  bool is_mut = false;
  ExprPtr default_value;
  Span span;
};

struct FuncDecl {
  std::string name;
  std::vector<std::string> attrs;  // e.g. [recursive]
  std::vector<ParamDecl> params;
  SemTypePtr return_type;  // void if absent
  StmtPtr body;
  Span span;

  bool has_attr(const std::string& a) const;
};

// ---------------------------------------------------------------------------
// Layout language
// ---------------------------------------------------------------------------

enum class MemberKind {
  StoredField,
  Padding,
  Derive,
  Let,
  Group,
  Split,
  Separator,  // ---
};

enum class PatternKind { Literal, Lt, Gt, Le, Ge, Approx, Wildcard };

struct Member;
using MemberPtr = std::unique_ptr<Member>;

struct SplitArm {
  PatternKind pattern = PatternKind::Wildcard;
  ExprPtr pattern_value;  // literal / comparison operand
  std::string variant;
  std::vector<MemberPtr> members;  // inline body
  bool is_from = false;
  std::string from_group;
  ExprPtr from_key;
  Span span;
};

struct Member {
  MemberKind kind;
  Span span;

  // StoredField / Derive / Let
  std::string name;
  SemTypePtr type;      // StoredField/Let
  ExprPtr value;        // Derive/Let expr; Split discriminant
  uint64_t padding_bits = 0;

  // Group
  bool indirect = false;
  std::string group_name;       // may be empty (anonymous)
  ExprPtr size_expr;            // size=e
  uint64_t align_bytes = 0;     // align=n (0 => default 1)
  uint64_t tile = 0;            // bare literal attr: AoSoA tile size
  std::string index_binding;    // by x
  std::vector<MemberPtr> members;

  // Split
  std::vector<SplitArm> arms;
};

struct LayoutSpec {
  std::string name;
  std::vector<ParamDecl> reference_params;  // first is the primary component
  std::vector<MemberPtr> members;
  Span span;
};

// ---------------------------------------------------------------------------
// Build language
// ---------------------------------------------------------------------------

enum class BuildOrder { Pre, Post };

struct VariantBuilder {
  std::string variant;
  std::vector<ParamDecl> params;
  std::vector<StmtPtr> root_block;  // optional "build root { ... }"
  bool has_root = false;
  std::vector<StmtPtr> stmts;
  Span span;
};

struct BuildSpec {
  std::string name;
  BuildOrder order = BuildOrder::Pre;
  std::vector<VariantBuilder> builders;
  Span span;

  const VariantBuilder* find_builder(const std::string& variant) const;
};

// ---------------------------------------------------------------------------
// A parsed module: one or more .scion sources merged
// ---------------------------------------------------------------------------

struct Program {
  std::vector<AdtDecl> types;
  std::vector<FuncDecl> funcs;
  std::vector<LayoutSpec> layouts;
  std::vector<BuildSpec> builds;

  const AdtDecl* find_type(const std::string& name) const;
  const FuncDecl* find_func(const std::string& name) const;  // first overload
  const LayoutSpec* find_layout(const std::string& name) const;
  const BuildSpec* find_build(const std::string& name) const;
};

// TraversalModule per the external vocabulary: types + functions.
using TraversalModule = Program;

}  // namespace layoutc
