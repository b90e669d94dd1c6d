#include <algorithm>
#include <functional>
#include <set>

#include "layoutc/sema.hpp"

namespace layoutc {

// ---------------------------------------------------------------------------
// Path counting (path-uniqueness semantics)
// ---------------------------------------------------------------------------

int count_paths(const Member& m, const std::string& field, const std::string& variant,
                PathCountCtx& ctx) {
  switch (m.kind) {
    case MemberKind::StoredField:
    case MemberKind::Derive:
      return m.name == field ? 1 : 0;
    case MemberKind::Let:
    case MemberKind::Padding:
    case MemberKind::Separator:
      return 0;
    case MemberKind::Group: {
      if (m.indirect) {
        ctx.indirects[m.group_name] = &m;
        return 0;
      }
      return count_paths_seq(m.members, field, variant, ctx);
    }
    case MemberKind::Split: {
      for (const auto& arm : m.arms) {
        if (arm.variant != variant) continue;
        if (arm.is_from) {
          auto it = ctx.indirects.find(arm.from_group);
          if (it == ctx.indirects.end()) {
            ctx.unregistered_from = true;
            ctx.failed_name = arm.from_group;
            return 0;
          }
          return count_paths_seq(it->second->members, field, variant, ctx);
        }
        return count_paths_seq(arm.members, field, variant, ctx);
      }
      return 0;
    }
  }
  return 0;
}

int count_paths_seq(const std::vector<MemberPtr>& members, const std::string& field,
                    const std::string& variant, PathCountCtx& ctx) {
  int c = 0;
  for (const auto& m : members) {
    c += count_paths(*m, field, variant, ctx);
    if (c > 1) {
      ctx.ambiguous = true;
      return c;
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Helpers shared with planning and the build checker
// ---------------------------------------------------------------------------

bool type_mentions(const SemType& t, const std::string& adt_name) {
  switch (t.kind) {
    case TypeKind::Named:
      return t.name == adt_name;
    case TypeKind::Vec:
    case TypeKind::Array:
    case TypeKind::Optional:
    case TypeKind::Set:
      return type_mentions(*t.elem, adt_name);
    case TypeKind::Tuple:
      for (const auto& m : t.members)
        if (type_mentions(*m, adt_name)) return true;
      return false;
    default:
      return false;
  }
}

const AdtDecl* layout_adt(const Program& module, const LayoutSpec& layout) {
  const AdtDecl* named = module.find_type(layout.name);
  if (named && !named->is_record()) return named;
  const AdtDecl* only = nullptr;
  for (const auto& t : module.types) {
    if (t.is_record()) continue;
    if (only) return nullptr;  // ambiguous
    only = &t;
  }
  return only;
}

std::vector<std::string> inferred_global_names(const LayoutSpec& layout) {
  std::vector<std::string> out;
  std::function<void(const std::vector<MemberPtr>&)> scan_groups =
      [&](const std::vector<MemberPtr>& members) {
        for (const auto& m : members) {
          if (m->kind == MemberKind::Group) {
            if (m->size_expr && m->size_expr->kind == ExprKind::Ident)
              out.push_back(m->size_expr->name);
            scan_groups(m->members);
          } else if (m->kind == MemberKind::Split) {
            for (const auto& arm : m->arms) scan_groups(arm.members);
          }
        }
      };
  scan_groups(layout.members);
  for (const auto& m : layout.members) {
    if (m->kind == MemberKind::StoredField && m->type->kind == TypeKind::Array &&
        !m->type->len_field.empty())
      out.push_back(m->type->len_field);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<ReachableField> reachable_stored_fields(const LayoutSpec& layout,
                                                    const std::string& variant) {
  std::vector<ReachableField> out;
  std::map<std::string, const Member*> indirects;
  std::function<void(const std::vector<MemberPtr>&)> walk;
  std::function<void(const Member&)> walk_member = [&](const Member& m) {
    switch (m.kind) {
      case MemberKind::StoredField:
        out.push_back({m.name, &m});
        break;
      case MemberKind::Group:
        if (m.indirect) indirects[m.group_name] = &m;
        else walk(m.members);
        break;
      case MemberKind::Split: {
        for (const auto& arm : m.arms) {
          if (arm.variant != variant) continue;
          if (arm.is_from) {
            auto it = indirects.find(arm.from_group);
            if (it != indirects.end()) walk(it->second->members);
          } else {
            walk(arm.members);
          }
          break;
        }
        break;
      }
      default:
        break;
    }
  };
  walk = [&](const std::vector<MemberPtr>& members) {
    for (const auto& m : members) walk_member(*m);
  };
  // Top-level stored fields are globals, not per-node storage; start the walk
  // at groups and splits only. Indirect groups register first.
  for (const auto& m : layout.members) {
    if (m->kind == MemberKind::Group || m->kind == MemberKind::Split) walk_member(*m);
  }
  return out;
}

// ---------------------------------------------------------------------------
// check_layout
// ---------------------------------------------------------------------------

namespace {

struct LayoutCheck {
  const AdtDecl& adt;
  LayoutSpec& layout;
  Program& module;
  std::vector<Diagnostic>& diags;
  Sema sema;
  std::map<std::string, SemTypePtr> components;
  TypecheckOptions opts;

  LayoutCheck(const AdtDecl& a, LayoutSpec& l, Program& m, std::vector<Diagnostic>& d)
      : adt(a), layout(l), module(m), diags(d), sema(m, &d) {
    for (const auto& p : l.reference_params) components[p.name] = p.type;
    opts.parent_components = &components;
  }

  void bind_components(Scope& s) {
    for (const auto& p : layout.reference_params) {
      Binding b;
      b.type = p.type;
      b.kind = BindKind::RefComponent;
      s.bind(p.name, b);
    }
  }

  void bind_region(const std::vector<MemberPtr>& members, Scope& s) {
    for (const auto& m : members) {
      switch (m->kind) {
        case MemberKind::StoredField: {
          Binding b;
          b.type = m->type;
          b.kind = BindKind::LayoutField;
          s.bind(m->name, b);
          break;
        }
        case MemberKind::Derive: {
          Binding b;
          b.type = m->value && m->value->type ? m->value->type : SemType::make_void();
          b.kind = BindKind::LayoutDerive;
          s.bind(m->name, b);
          break;
        }
        case MemberKind::Let: {
          Binding b;
          b.type = m->type;
          b.kind = BindKind::LayoutLet;
          s.bind(m->name, b);
          break;
        }
        case MemberKind::Group:
          // Nested direct (tile) groups share the element scope.
          if (!m->indirect) bind_region(m->members, s);
          break;
        default:
          break;
      }
    }
  }

  // Types every expression; two passes so forward references to derives
  // resolve once their types are known.
  void type_exprs() {
    for (int pass = 0; pass < 2; pass++) {
      size_t before = diags.size();
      Scope globals;
      bind_components(globals);
      bind_region(layout.members, globals);
      for (auto& m : layout.members) type_member(*m, globals);
      if (pass == 0) diags.resize(before);
    }
  }

  void type_member(Member& m, Scope& outer) {
    switch (m.kind) {
      case MemberKind::Derive:
      case MemberKind::Let: {
        SemTypePtr t = sema.type_expr(*m.value, outer, m.type, opts);
        if (m.kind == MemberKind::Let && m.type && t->kind != TypeKind::Void &&
            !type_equal(*t, *m.type)) {
          bool ok = Sema::assignable(*t, *m.type);
          if (!ok)
            sema.error(m.span, DiagCode::TypeMismatch,
                       "let '" + m.name + "': cannot initialize " + type_to_string(*m.type) +
                           " from " + type_to_string(*t));
        }
        Binding b;
        b.type = m.kind == MemberKind::Let ? m.type : m.value->type;
        b.kind = m.kind == MemberKind::Let ? BindKind::LayoutLet : BindKind::LayoutDerive;
        outer.bind(m.name, b);
        break;
      }
      case MemberKind::StoredField: {
        std::string err;
        uint64_t w = sema.types().packed_width(*m.type, &err);
        bool top_level_dyn_array =
            m.type->kind == TypeKind::Array && !m.type->len_field.empty();
        if (w == 0 && !top_level_dyn_array)
          sema.error(m.span, DiagCode::TypeMismatch,
                     "stored field '" + m.name + "': " + (err.empty() ? "unstorable type" : err));
        break;
      }
      case MemberKind::Group: {
        if (m.size_expr) sema.type_expr(*m.size_expr, outer, SemType::make_int(64, false), opts);
        if (m.indirect) {
          Scope iso;
          bind_components(iso);
          bind_region(layout.members, iso);
          Scope body(&iso);
          bind_region(m.members, body);
          for (auto& c : m.members) type_member(*c, body);
        } else {
          Scope inner(&outer);
          bind_region(m.members, inner);
          for (auto& c : m.members) type_member(*c, inner);
        }
        break;
      }
      case MemberKind::Split: {
        SemTypePtr dt = sema.type_expr(*m.value, outer, nullptr, opts);
        if (dt->kind != TypeKind::Void && dt->kind != TypeKind::Int && dt->kind != TypeKind::Bool)
          sema.error(m.value->span, DiagCode::TypeMismatch,
                     "split discriminant must be an integer, got " + type_to_string(*dt));
        for (auto& arm : m.arms) {
          if (arm.pattern_value)
            sema.type_expr(*arm.pattern_value, outer,
                           dt->kind == TypeKind::Void ? nullptr : dt, opts);
          if (arm.is_from) {
            if (arm.from_key)
              sema.type_expr(*arm.from_key, outer, SemType::make_int(64, false), opts);
          } else {
            Scope arm_scope(&outer);
            bind_region(arm.members, arm_scope);
            for (auto& c : arm.members) type_member(*c, arm_scope);
          }
        }
        break;
      }
      default:
        break;
    }
  }

  // ----- constraint 1: split exhaustiveness -------------------------------

  void check_exhaustive(const Member& split) {
    const Expr& disc = *split.value;
    SemTypePtr dt = disc.type;
    if (!dt || dt->kind == TypeKind::Void) return;
    uint32_t width = 0;
    bool is_signed = false;
    if (dt->kind == TypeKind::Int) {
      width = dt->width;
      is_signed = dt->is_signed;
    } else if (dt->kind == TypeKind::Bool) {
      width = 1;
    } else {
      return;
    }
    if (disc.kind == ExprKind::Slice && disc.is_bit_extract) {
      width = static_cast<uint32_t>(disc.index2->int_val - disc.index->int_val + 1);
      is_signed = false;
    }

    bool has_wildcard = false;
    for (const auto& arm : split.arms) {
      if (arm.pattern == PatternKind::Wildcard) has_wildcard = true;
      if (arm.pattern == PatternKind::Approx) {
        Diagnostic d;
        d.code = DiagCode::UnsupportedPattern;
        d.span = arm.span;
        d.message = "the '~' comparison pattern is unsupported";
        diags.push_back(d);
      }
    }
    if (has_wildcard) return;
    if (width >= 64) {
      Diagnostic d;
      d.code = DiagCode::NonExhaustiveSplit;
      d.span = split.span;
      d.message = "64-bit split discriminant requires a wildcard arm";
      diags.push_back(d);
      return;
    }
    int64_t lo, hi;
    if (is_signed) {
      lo = -(int64_t(1) << (width - 1));
      hi = (int64_t(1) << (width - 1)) - 1;
    } else {
      lo = 0;
      hi = static_cast<int64_t>((uint64_t(1) << width) - 1);
    }
    std::vector<std::pair<int64_t, int64_t>> covered;
    for (const auto& arm : split.arms) {
      if (arm.pattern == PatternKind::Approx || arm.pattern == PatternKind::Wildcard) continue;
      int64_t v = 0;
      if (arm.pattern_value) {
        uint64_t raw = arm.pattern_value->int_val;
        if (is_signed) {
          uint64_t mask = width < 64 ? (uint64_t(1) << width) - 1 : ~uint64_t(0);
          uint64_t x = raw & mask;
          if (width < 64 && ((x >> (width - 1)) & 1)) x |= ~mask;
          v = static_cast<int64_t>(x);
        } else {
          v = static_cast<int64_t>(raw);
        }
      }
      switch (arm.pattern) {
        case PatternKind::Literal: covered.push_back({v, v}); break;
        case PatternKind::Gt:
          if (v < hi) covered.push_back({v + 1, hi});
          break;
        case PatternKind::Ge: covered.push_back({v, hi}); break;
        case PatternKind::Lt:
          if (v > lo) covered.push_back({lo, v - 1});
          break;
        case PatternKind::Le: covered.push_back({lo, v}); break;
        default: break;
      }
    }
    std::sort(covered.begin(), covered.end());
    int64_t next = lo;
    bool complete = false;
    for (const auto& [a, b] : covered) {
      if (a > next) break;
      if (b >= next) {
        if (b >= hi) {
          complete = true;
          break;
        }
        next = b + 1;
      }
    }
    if (!complete) {
      Diagnostic d;
      d.code = DiagCode::NonExhaustiveSplit;
      d.span = split.span;
      d.message = "split is not exhaustive: value " + std::to_string(next) + " matches no arm";
      diags.push_back(d);
    }
  }

  void walk_splits(const std::vector<MemberPtr>& members) {
    for (const auto& m : members) {
      if (m->kind == MemberKind::Split) {
        check_exhaustive(*m);
        for (const auto& arm : m->arms)
          if (!arm.is_from) walk_splits(arm.members);
      } else if (m->kind == MemberKind::Group) {
        walk_splits(m->members);
      }
    }
  }

  // ----- constraint 2: acyclic derivations ---------------------------------

  void check_cycles() {
    std::vector<const Member*> nodes;
    std::map<const Member*, std::vector<std::string>> refs;
    std::function<void(const std::vector<MemberPtr>&)> collect =
        [&](const std::vector<MemberPtr>& members) {
          for (const auto& m : members) {
            if (m->kind == MemberKind::Derive || m->kind == MemberKind::Let) {
              nodes.push_back(m.get());
              std::vector<std::string> names;
              collect_idents(*m->value, names);
              refs[m.get()] = std::move(names);
            } else if (m->kind == MemberKind::Group) {
              collect(m->members);
            } else if (m->kind == MemberKind::Split) {
              for (const auto& arm : m->arms)
                if (!arm.is_from) collect(arm.members);
            }
          }
        };
    collect(layout.members);
    std::map<std::string, const Member*> by_name;
    for (const Member* n : nodes) by_name[n->name] = n;

    std::map<const Member*, int> state;
    std::set<std::string> reported;
    std::function<bool(const Member*)> dfs = [&](const Member* n) -> bool {
      int& st = state[n];
      if (st == 1) return true;
      if (st == 2) return false;
      st = 1;
      bool in_cycle = false;
      for (const auto& r : refs[n]) {
        auto it = by_name.find(r);
        if (it == by_name.end()) continue;
        if (it->second == n || dfs(it->second)) in_cycle = true;
      }
      if (in_cycle && reported.insert(n->name).second) {
        Diagnostic d;
        d.code = DiagCode::CyclicDerive;
        d.span = n->span;
        d.message = "cyclic derivation involving '" + n->name + "'";
        diags.push_back(d);
      }
      st = 2;
      return in_cycle;
    };
    for (const Member* n : nodes) dfs(n);
  }

  static void collect_idents(const Expr& e, std::vector<std::string>& out) {
    if (e.kind == ExprKind::Ident) out.push_back(e.name);
    if (e.base) collect_idents(*e.base, out);
    if (e.index) collect_idents(*e.index, out);
    if (e.index2) collect_idents(*e.index2, out);
    for (const auto& a : e.args) collect_idents(*a, out);
    for (const auto& arm : e.match_arms) collect_idents(*arm.value, out);
  }

  // ----- constraints 3 & 4: type preservation + unique access --------------

  struct Resolved {
    const Member* terminal = nullptr;
    bool found = false;
  };

  Resolved resolve_terminal(const std::vector<MemberPtr>& members, const std::string& field,
                            const std::string& variant,
                            std::map<std::string, const Member*>& indirects) {
    for (const auto& m : members) {
      switch (m->kind) {
        case MemberKind::StoredField:
        case MemberKind::Derive:
          if (m->name == field) return {m.get(), true};
          break;
        case MemberKind::Group:
          if (m->indirect) {
            indirects[m->group_name] = m.get();
          } else {
            Resolved r = resolve_terminal(m->members, field, variant, indirects);
            if (r.found) return r;
          }
          break;
        case MemberKind::Split: {
          for (const auto& arm : m->arms) {
            if (arm.variant != variant) continue;
            if (arm.is_from) {
              auto it = indirects.find(arm.from_group);
              if (it == indirects.end()) break;
              Resolved r = resolve_terminal(it->second->members, field, variant, indirects);
              if (r.found) return r;
            } else {
              Resolved r = resolve_terminal(arm.members, field, variant, indirects);
              if (r.found) return r;
            }
            break;
          }
          break;
        }
        default:
          break;
      }
    }
    return {};
  }

  SemTypePtr reference_type() {
    if (layout.reference_params.size() == 1) return layout.reference_params[0].type;
    std::vector<SemTypePtr> comps;
    for (const auto& p : layout.reference_params) comps.push_back(p.type);
    return SemType::make_tuple(std::move(comps));
  }

  bool physical_matches_logical(const SemType& phys, const SemType& logical) {
    if (type_mentions(logical, adt.name)) {
      SemTypePtr ref = reference_type();
      if (logical.kind == TypeKind::Named) return type_equal(phys, *ref);
      if (logical.kind == TypeKind::Array || logical.kind == TypeKind::Vec) {
        if (layout.reference_params.size() != 1) return false;
        bool lanes_ok = (phys.kind == TypeKind::Vec || phys.kind == TypeKind::Array) &&
                        phys.lanes == logical.lanes;
        return lanes_ok && phys.elem && type_equal(*phys.elem, *ref);
      }
      return false;
    }
    if (logical.kind == TypeKind::Array && !logical.len_field.empty()) {
      return phys.kind == TypeKind::Array && phys.elem && type_equal(*phys.elem, *logical.elem);
    }
    return type_equal(phys, logical);
  }

  void check_fields() {
    for (const auto& v : adt.variants) {
      for (const FieldDecl* f : adt.fields_of(v)) {
        PathCountCtx ctx;
        int c = count_paths_seq(layout.members, f->name, v.name, ctx);
        if (ctx.unregistered_from) {
          Diagnostic d;
          d.code = DiagCode::MissingField;
          d.span = layout.span;
          d.message = "'from' references unregistered indirect group '" + ctx.failed_name + "'";
          diags.push_back(d);
          continue;
        }
        if (ctx.ambiguous || c > 1) {
          Diagnostic d;
          d.code = DiagCode::AmbiguousField;
          d.span = layout.span;
          d.message = "multiple paths to field '" + f->name + "' for variant " + v.name;
          diags.push_back(d);
          continue;
        }
        if (c == 0) {
          Diagnostic d;
          d.code = DiagCode::MissingField;
          d.span = layout.span;
          d.message = "no path to field '" + f->name + "' for variant " + v.name;
          diags.push_back(d);
          continue;
        }
        std::map<std::string, const Member*> indirects;
        Resolved r = resolve_terminal(layout.members, f->name, v.name, indirects);
        if (!r.found) continue;
        SemTypePtr phys;
        if (r.terminal->kind == MemberKind::StoredField) phys = r.terminal->type;
        else phys = r.terminal->value->type;
        if (!phys || phys->kind == TypeKind::Void) continue;
        if (!physical_matches_logical(*phys, *f->type)) {
          Diagnostic d;
          d.code = DiagCode::TypeMismatch;
          d.span = r.terminal->span;
          d.message = "field '" + f->name + "' of variant " + v.name + ": logical type " +
                      type_to_string(*f->type) + " maps to physical type " + type_to_string(*phys);
          diags.push_back(d);
        }
      }
    }
  }

  void check_structure() {
    std::map<std::string, int> consumers;
    for (const auto& m : layout.members) {
      if (m->kind == MemberKind::Group && !m->indirect && !m->index_binding.empty()) {
        if (!components.count(m->index_binding)) {
          Diagnostic d;
          d.code = DiagCode::TypeMismatch;
          d.span = m->span;
          d.message = "group indexed by unknown reference component '" + m->index_binding + "'";
          diags.push_back(d);
        } else {
          consumers[m->index_binding]++;
        }
      }
    }
    for (const auto& [name, n] : consumers) {
      if (n > 1) {
        Diagnostic d;
        d.code = DiagCode::DuplicateName;
        d.span = layout.span;
        d.message = "reference component '" + name + "' is consumed by " + std::to_string(n) +
                    " direct groups";
        diags.push_back(d);
      }
    }
    std::function<void(const std::vector<MemberPtr>&)> walk =
        [&](const std::vector<MemberPtr>& members) {
          for (const auto& m : members) {
            if (m->kind == MemberKind::Split) {
              for (const auto& arm : m->arms) {
                if (!adt.find_variant(arm.variant)) {
                  Diagnostic d;
                  d.code = DiagCode::TypeMismatch;
                  d.span = arm.span;
                  d.message = "unknown variant '" + arm.variant + "' of " + adt.name;
                  diags.push_back(d);
                }
                if (!arm.is_from) walk(arm.members);
              }
            } else if (m->kind == MemberKind::Group) {
              walk(m->members);
            }
          }
        };
    walk(layout.members);
  }

  void run() {
    check_structure();
    type_exprs();
    walk_splits(layout.members);
    check_cycles();
    check_fields();
  }
};

}  // namespace

std::vector<Diagnostic> check_layout(const AdtDecl& adt, LayoutSpec& layout, Program& module) {
  std::vector<Diagnostic> diags;
  LayoutCheck chk(adt, layout, module, diags);
  chk.run();
  return diags;
}

}  // namespace layoutc
