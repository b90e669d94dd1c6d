#include <algorithm>
#include <functional>
#include <set>

#include "layoutc/sema.hpp"

namespace layoutc {

namespace {

void collect_exprs(const Expr& e, std::vector<const Expr*>& out) {
  out.push_back(&e);
  if (e.base) collect_exprs(*e.base, out);
  if (e.index) collect_exprs(*e.index, out);
  if (e.index2) collect_exprs(*e.index2, out);
  for (const auto& a : e.args) collect_exprs(*a, out);
  for (const auto& arm : e.match_arms) collect_exprs(*arm.value, out);
}

struct BuildCheck {
  const AdtDecl& adt;
  const LayoutSpec& layout;
  BuildSpec& build;
  Program& module;
  std::vector<Diagnostic>& diags;
  Sema sema;
  std::map<std::string, SemTypePtr> components;
  std::set<std::string> inferred;
  TypecheckOptions opts;

  BuildCheck(const AdtDecl& a, const LayoutSpec& l, BuildSpec& b, Program& m,
             std::vector<Diagnostic>& d)
      : adt(a), layout(l), build(b), module(m), diags(d), sema(m, &d) {
    for (const auto& p : l.reference_params) components[p.name] = p.type;
    for (const auto& n : inferred_global_names(l)) inferred.insert(n);
    opts.parent_components = &components;
    opts.allow_build_exprs = true;
    opts.this_type = l.reference_params.empty() ? SemType::make_void()
                                                : l.reference_params[0].type;
  }

  void error(Span sp, DiagCode code, const std::string& msg) {
    Diagnostic d;
    d.code = code;
    d.span = sp;
    d.message = msg;
    diags.push_back(d);
  }

  const Member* global_stored(const std::string& name) {
    for (const auto& m : layout.members)
      if (m->kind == MemberKind::StoredField && m->name == name) return m.get();
    return nullptr;
  }

  // Whether `name` is a tree-carried reference component (not the primary).
  const ParamDecl* carried_component(const std::string& name) {
    for (size_t i = 1; i < layout.reference_params.size(); i++)
      if (layout.reference_params[i].name == name) return &layout.reference_params[i];
    return nullptr;
  }

  void check_variant_coverage() {
    std::map<std::string, int> counts;
    for (const auto& vb : build.builders) counts[vb.variant]++;
    for (const auto& v : adt.variants) {
      auto it = counts.find(v.name);
      if (it == counts.end()) {
        error(build.span, DiagCode::MissingBuilder,
              "no build procedure for variant " + v.name);
      } else if (it->second > 1) {
        error(build.span, DiagCode::DoubleBuild,
              "variant " + v.name + " has " + std::to_string(it->second) + " build procedures");
      }
    }
    for (const auto& vb : build.builders) {
      if (!adt.find_variant(vb.variant))
        error(vb.span, DiagCode::MissingBuilder,
              "build procedure for unknown variant " + vb.variant);
    }
    int root_blocks = 0;
    for (const auto& vb : build.builders)
      if (vb.has_root) root_blocks++;
    if (root_blocks > 1)
      error(build.span, DiagCode::DoubleBuild, "more than one root block declared");
  }

  void check_builder(VariantBuilder& vb) {
    const VariantDecl* variant = adt.find_variant(vb.variant);
    if (!variant) return;
    auto fields = adt.fields_of(*variant);

    // Builder signature mirrors the variant's logical fields.
    if (vb.params.size() != fields.size()) {
      error(vb.span, DiagCode::TypeMismatch,
            "builder " + vb.variant + " must take the variant's " +
                std::to_string(fields.size()) + " logical fields");
    } else {
      for (size_t i = 0; i < fields.size(); i++) {
        if (vb.params[i].name != fields[i]->name ||
            !type_equal(*vb.params[i].type, *fields[i]->type)) {
          error(vb.params[i].span, DiagCode::TypeMismatch,
                "builder parameter '" + vb.params[i].name + "' does not match logical field '" +
                    fields[i]->name + ": " + type_to_string(*fields[i]->type) + "'");
        }
      }
    }

    // Scope: logical fields + globals.
    Scope scope;
    for (const auto& p : layout.reference_params) {
      Binding b;
      b.type = p.type;
      b.kind = BindKind::RefComponent;
      scope.bind(p.name, b);
    }
    for (const auto& m : layout.members) {
      if (m->kind == MemberKind::StoredField) {
        Binding b;
        b.type = m->type;
        b.kind = BindKind::Global;
        scope.bind(m->name, b);
      }
    }
    for (const auto& p : vb.params) {
      Binding b;
      b.type = p.type;
      b.kind = BindKind::Param;
      scope.bind(p.name, b);
    }

    // Reachable stored fields for this variant, in declaration order.
    std::vector<ReachableField> reach = reachable_stored_fields(layout, vb.variant);
    std::map<std::string, const Member*> reach_by_name;
    for (const auto& r : reach) reach_by_name[r.name] = r.member;
    std::map<std::string, int> covered;

    // Recursive logical fields must be built exactly once.
    std::map<std::string, int> recursed;
    std::vector<std::string> recursive_fields;
    for (const FieldDecl* f : fields)
      if (type_mentions(*f->type, adt.name)) recursive_fields.push_back(f->name);

    auto is_recursive_field = [&](const std::string& n) {
      return std::find(recursive_fields.begin(), recursive_fields.end(), n) !=
             recursive_fields.end();
    };

    // Root block.
    if (vb.has_root) {
      Scope root_scope(&scope);
      for (auto& s : vb.root_block) check_root_stmt(*s, root_scope);
    }

    bool saw_return = false;
    for (size_t si = 0; si < vb.stmts.size(); si++) {
      Stmt& s = *vb.stmts[si];
      if (saw_return)
        error(s.span, DiagCode::BadReturnType, "statement after return in builder " + vb.variant);
      switch (s.kind) {
        case StmtKind::BuildField: {
          if (is_recursive_field(s.name)) {
            if (s.expr) {
              error(s.span, DiagCode::TypeMismatch,
                    "recursive field '" + s.name + "' is built by recursion, not by expression");
            }
            recursed[s.name]++;
            // When the recursive field maps to a stored slot (a vector of
            // references), the recursion populates that slot too.
            if (reach_by_name.count(s.name)) covered[s.name]++;
            break;
          }
          auto it = reach_by_name.find(s.name);
          if (it == reach_by_name.end()) {
            error(s.span, DiagCode::MissingField,
                  "build target '" + s.name + "' is not a stored field reachable for variant " +
                      vb.variant);
            break;
          }
          covered[s.name]++;
          if (s.expr) {
            SemTypePtr slot = it->second->type;
            SemTypePtr t = sema.type_expr(*s.expr, scope, slot, opts);
            if (t->kind != TypeKind::Void && !type_equal(*t, *slot)) {
              // Field stores mask to the slot width, so any integer width is
              // accepted here (bit packing routinely narrows).
              bool ok = Sema::assignable(*t, *slot) ||
                        (t->kind == TypeKind::Int && slot->kind == TypeKind::Int);
              if (!ok)
                error(s.span, DiagCode::TypeMismatch,
                      "build " + s.name + ": expected " + type_to_string(*slot) + ", got " +
                          type_to_string(*t));
            }
            validate_appends(*s.expr, vb, fields);
          } else {
            // Copy form: the logical field of the same name must exist.
            bool is_logical = false;
            for (const FieldDecl* f : fields)
              if (f->name == s.name) is_logical = true;
            if (!is_logical)
              error(s.span, DiagCode::MissingField,
                    "'build " + s.name + "' copies a logical field, but variant " + vb.variant +
                        " has no field of that name");
          }
          break;
        }
        case StmtKind::Let: {
          if (s.expr && s.expr->kind == ExprKind::BuildChild) {
            const std::string& child = s.expr->name;
            if (!is_recursive_field(child)) {
              error(s.span, DiagCode::TypeMismatch,
                    "'build " + child + "' does not name a recursive field");
            } else {
              recursed[child]++;
              if (reach_by_name.count(child)) covered[child]++;
            }
            sema.type_expr(*s.expr, scope, s.decl_type, opts);
          } else if (s.expr) {
            SemTypePtr t = sema.type_expr(*s.expr, scope, s.decl_type, opts);
            if (t->kind != TypeKind::Void && !type_equal(*t, *s.decl_type)) {
              bool ok = Sema::assignable(*t, *s.decl_type);
              if (!ok)
                error(s.span, DiagCode::TypeMismatch,
                      "let '" + s.name + "': cannot initialize " +
                          type_to_string(*s.decl_type) + " from " + type_to_string(*t));
            }
            validate_appends(*s.expr, vb, fields);
          }
          Binding b;
          b.type = s.decl_type;
          b.is_mut = s.is_mut;
          scope.bind(s.name, b);
          break;
        }
        case StmtKind::Return: {
          saw_return = true;
          if (!s.expr) {
            error(s.span, DiagCode::BadReturnType,
                  "builder " + vb.variant + " must return a reference value");
            break;
          }
          SemTypePtr want = opts.this_type;
          SemTypePtr t = sema.type_expr(*s.expr, scope, want, opts);
          if (t->kind != TypeKind::Void && !type_equal(*t, *want)) {
            bool ok = Sema::assignable(*t, *want);
            if (!ok)
              error(s.span, DiagCode::BadReturnType,
                    "builder " + vb.variant + " returns " + type_to_string(*t) +
                        ", expected the reference type " + type_to_string(*want));
          }
          validate_appends(*s.expr, vb, fields);
          break;
        }
        case StmtKind::Assign: {
          // Bit-assignments on `this` or locals (reference tweaking).
          TypecheckOptions o = opts;
          Scope tmp(&scope);
          Binding b;
          b.type = opts.this_type;
          b.is_mut = true;
          tmp.bind("this", b);
          sema.check_stmt(s, tmp, SemType::make_void(), o);
          break;
        }
        default:
          error(s.span, DiagCode::TypeMismatch, "unsupported statement in a build procedure");
      }
    }
    if (!saw_return)
      error(vb.span, DiagCode::BadReturnType,
            "builder " + vb.variant + " does not end with a return");

    // Field coverage: every reachable stored field populated exactly once.
    for (const auto& r : reach) {
      int n = covered.count(r.name) ? covered[r.name] : 0;
      if (n == 0) {
        error(vb.span, DiagCode::UnbuiltField,
              "stored field '" + r.name + "' is never populated for variant " + vb.variant);
      } else if (n > 1) {
        error(vb.span, DiagCode::DoubleBuild,
              "stored field '" + r.name + "' is populated " + std::to_string(n) +
                  " times for variant " + vb.variant);
      }
    }
    for (const auto& f : recursive_fields) {
      int n = recursed.count(f) ? recursed[f] : 0;
      if (n == 0) {
        error(vb.span, DiagCode::UnbuiltField,
              "recursive field '" + f + "' is never built for variant " + vb.variant);
      } else if (n > 1) {
        error(vb.span, DiagCode::DoubleBuild,
              "recursive field '" + f + "' is built " + std::to_string(n) + " times");
      }
    }
  }

  std::map<std::string, int> root_covered;

  void check_root_stmt(Stmt& s, Scope& scope) {
    switch (s.kind) {
      case StmtKind::BuildField: {
        const Member* g = global_stored(s.name);
        const ParamDecl* carried = carried_component(s.name);
        if (!g && !carried) {
          error(s.span, DiagCode::MissingField,
                "root build target '" + s.name +
                    "' is neither a global stored field nor a tree-carried component");
          return;
        }
        if (g && inferred.count(s.name)) {
          error(s.span, DiagCode::DoubleBuild,
                "global '" + s.name + "' is populated by the count pass and cannot be built");
          return;
        }
        root_covered[s.name]++;
        if (!s.expr) {
          error(s.span, DiagCode::TypeMismatch,
                "root builds require an explicit value for '" + s.name + "'");
          return;
        }
        SemTypePtr slot = g ? g->type : carried->type;
        SemTypePtr t = sema.type_expr(*s.expr, scope, slot, opts);
        if (t->kind != TypeKind::Void && !type_equal(*t, *slot)) {
          bool ok = Sema::assignable(*t, *slot);
          if (!ok)
            error(s.span, DiagCode::TypeMismatch,
                  "build " + s.name + ": expected " + type_to_string(*slot) + ", got " +
                      type_to_string(*t));
        }
        break;
      }
      case StmtKind::Let: {
        if (s.expr) sema.type_expr(*s.expr, scope, s.decl_type, opts);
        Binding b;
        b.type = s.decl_type;
        b.is_mut = s.is_mut;
        scope.bind(s.name, b);
        break;
      }
      default:
        error(s.span, DiagCode::TypeMismatch, "unsupported statement in a root block");
    }
  }

  void validate_appends(const Expr& e, const VariantBuilder& vb,
                        const std::vector<const FieldDecl*>& fields) {
    std::vector<const Expr*> all;
    collect_exprs(e, all);
    for (const Expr* x : all) {
      if (x->kind != ExprKind::Append) continue;
      bool ok = false;
      for (const FieldDecl* f : fields) {
        if (f->name == x->name && f->type->kind == TypeKind::Array &&
            !f->type->len_field.empty())
          ok = true;
      }
      if (!ok)
        error(x->span, DiagCode::TypeMismatch,
              "append target '" + x->name + "' is not a dynamically sized logical field of " +
                  vb.variant);
    }
  }

  void check_globals_coverage() {
    // Non-inferred global stored scalars must be initialized in the root
    // block exactly once; tree-carried components without defaults likewise.
    for (const auto& m : layout.members) {
      if (m->kind != MemberKind::StoredField) continue;
      bool is_array = m->type->kind == TypeKind::Array && !m->type->len_field.empty();
      if (is_array) continue;  // global arrays fill via appends
      if (inferred.count(m->name)) continue;
      int n = root_covered.count(m->name) ? root_covered[m->name] : 0;
      if (n == 0) {
        error(m->span, DiagCode::UnbuiltField,
              "global '" + m->name + "' is never initialized (expected in the root block)");
      } else if (n > 1) {
        error(m->span, DiagCode::DoubleBuild, "global '" + m->name + "' initialized twice");
      }
    }
    for (size_t i = 1; i < layout.reference_params.size(); i++) {
      const ParamDecl& p = layout.reference_params[i];
      if (p.default_value) continue;
      int n = root_covered.count(p.name) ? root_covered[p.name] : 0;
      if (n == 0) {
        error(p.span, DiagCode::UninitializedTreeDep,
              "tree-carried dependency '" + p.name +
                  "' has no default and is not initialized in the root block");
      }
    }
  }

  void run() {
    check_variant_coverage();
    for (auto& vb : build.builders) check_builder(vb);
    check_globals_coverage();
  }
};

}  // namespace

std::vector<Diagnostic> check_build(const AdtDecl& adt, LayoutSpec& layout, BuildSpec& build,
                                    Program& module) {
  std::vector<Diagnostic> diags;
  BuildCheck chk(adt, layout, build, module, diags);
  chk.run();
  return diags;
}

}  // namespace layoutc
