#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "layoutc/ast.hpp"

namespace layoutc {

// ---------------------------------------------------------------------------
// Intrinsics callable from DSL code
// ---------------------------------------------------------------------------

enum class Intrinsic {
  Dot,
  Cross,
  Select,
  Min,
  Max,
  Floorf,
  Ceilf,
  Abs,
  Sum,
  All,
  FmulRd,
  FaddRd,
  FsubRd,
  FsubRu,
  FdivRd,
  FrcpRd,
  Insert,  // set method
};

const char* intrinsic_name(Intrinsic i);
// Returns -1 when the name is not an intrinsic.
int intrinsic_by_name(const std::string& name);

// ---------------------------------------------------------------------------
// Type environment
// ---------------------------------------------------------------------------

class TypeTable {
 public:
  explicit TypeTable(const Program& p) : program_(&p) {}

  const AdtDecl* lookup(const std::string& name) const { return program_->find_type(name); }
  bool is_adt(const SemType& t) const {
    if (t.kind != TypeKind::Named) return false;
    const AdtDecl* d = lookup(t.name);
    return d && !d->is_record();
  }
  bool is_record(const SemType& t) const {
    if (t.kind != TypeKind::Named) return false;
    const AdtDecl* d = lookup(t.name);
    return d && d->is_record();
  }
  const Program& program() const { return *program_; }

  // Packed storage width in bits; returns 0 and sets *err for unstorable types.
  uint64_t packed_width(const SemType& t, std::string* err) const;

 private:
  const Program* program_;
};

// ---------------------------------------------------------------------------
// Scopes for expression typing
// ---------------------------------------------------------------------------

enum class BindKind { Param, Local, LayoutField, LayoutDerive, LayoutLet, Global, RefComponent };

struct Binding {
  SemTypePtr type;
  bool is_mut = false;
  BindKind kind = BindKind::Local;
};

class Scope {
 public:
  explicit Scope(Scope* parent = nullptr) : parent_(parent) {}
  void bind(const std::string& name, Binding b) { vars_[name] = std::move(b); }
  const Binding* lookup(const std::string& name) const {
    auto it = vars_.find(name);
    if (it != vars_.end()) return &it->second;
    return parent_ ? parent_->lookup(name) : nullptr;
  }
  Scope* parent() const { return parent_; }

 private:
  Scope* parent_;
  std::map<std::string, Binding> vars_;
};

// ---------------------------------------------------------------------------
// Expression/function type checking
// ---------------------------------------------------------------------------

struct TypecheckOptions {
  // Expressions inside layouts may use parent.<component>; the map gives
  // component name -> type.
  const std::map<std::string, SemTypePtr>* parent_components = nullptr;
  // Type given to `this` / `build f` / `append` expressions (build language).
  SemTypePtr this_type;
  bool allow_build_exprs = false;
};

class Sema {
 public:
  Sema(const Program& program, std::vector<Diagnostic>* diags)
      : types_(program), diags_(diags) {}

  const TypeTable& types() const { return types_; }

  // Types an expression tree in place; returns its type (Void on error).
  SemTypePtr type_expr(Expr& e, Scope& scope, const SemTypePtr& expected,
                       const TypecheckOptions& opts);

  // Statement checking for traversal function bodies.
  void check_stmt(Stmt& s, Scope& scope, const SemTypePtr& fn_return,
                  const TypecheckOptions& opts);

  void error(Span span, DiagCode code, const std::string& msg);

  // True if the expression can adopt a different numeric type (bare literals,
  // aggregates, negations of those).
  static bool adaptable(const Expr& e);

  // Assignment compatibility: exact equality, implicit integer widening, or
  // wrapping T into option[T].
  static bool assignable(const SemType& from, const SemType& to);

 private:
  TypeTable types_;
  std::vector<Diagnostic>* diags_;

  SemTypePtr resolve_named(const SemTypePtr& t, Span span);
  SemTypePtr type_call(Expr& e, Scope& scope, const TypecheckOptions& opts);
  SemTypePtr type_intrinsic(Expr& e, Scope& scope, int intr, const TypecheckOptions& opts);
  SemTypePtr type_binary(Expr& e, Scope& scope, const SemTypePtr& expected,
                         const TypecheckOptions& opts);
  SemTypePtr type_construct(Expr& e, Scope& scope, const TypecheckOptions& opts);
  SemTypePtr type_aggregate(Expr& e, Scope& scope, const SemTypePtr& expected,
                            const TypecheckOptions& opts);
};

// [OP] typecheck_traversal: annotates the module in place.
std::vector<Diagnostic> typecheck_traversal(Program& module);

// ---------------------------------------------------------------------------
// Layout well-formedness
// ---------------------------------------------------------------------------

// [OP] count_paths per the path-uniqueness algorithm. `indirects` carries
// registration of indirect groups in declaration order. Sets *ambiguous when
// a running sum within a sequence exceeds one, and *unregistered_from when a
// `from` names an unknown indirect group.
struct PathCountCtx {
  std::map<std::string, const Member*> indirects;
  bool ambiguous = false;
  bool unregistered_from = false;
  std::string failed_name;
};

int count_paths(const Member& m, const std::string& field, const std::string& variant,
                PathCountCtx& ctx);

// Counts paths across an ordered member list (the layout top level).
int count_paths_seq(const std::vector<MemberPtr>& members, const std::string& field,
                    const std::string& variant, PathCountCtx& ctx);

// [OP] check_layout. The full program supplies record types and functions used
// in derivation expressions.
std::vector<Diagnostic> check_layout(const AdtDecl& adt, LayoutSpec& layout, Program& module);

// [OP] check_build; assumes check_layout passed.
std::vector<Diagnostic> check_build(const AdtDecl& adt, LayoutSpec& layout, BuildSpec& build,
                                    Program& module);

// Helpers shared with planning/specialization ---------------------------------

// Stored global scalar fields that the build phase infers (group size targets
// and global array length fields) rather than requiring explicit builds.
std::vector<std::string> inferred_global_names(const LayoutSpec& layout);

// Collects stored fields reachable for `variant` (group members plus the
// variant's split arms, following from-references).
struct ReachableField {
  std::string name;
  const Member* member;
};
std::vector<ReachableField> reachable_stored_fields(const LayoutSpec& layout,
                                                    const std::string& variant);

// Recursive logical fields (type mentions the ADT itself).
bool type_mentions(const SemType& t, const std::string& adt_name);

// The ADT an entry layout maps; diagnosed elsewhere. Returns nullptr if absent.
const AdtDecl* layout_adt(const Program& module, const LayoutSpec& layout);

}  // namespace layoutc
