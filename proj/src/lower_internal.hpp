#pragma once

// Internal lowering machinery shared by destructor and constructor
// specialization. Not part of the public headers.

#include <algorithm>
#include <cassert>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "layoutc/sema.hpp"
#include "layoutc/specialize.hpp"

namespace layoutc {
namespace lower_detail {


inline SemTypePtr handle_type() { return SemType::make_int(32, false); }

inline SemTypePtr ref_agg_type(const MemoryPlan& plan) {
  std::vector<SemTypePtr> comps;
  for (const auto& c : plan.components) comps.push_back(c.type);
  comps.push_back(handle_type());
  return SemType::make_tuple(std::move(comps));
}

struct VarScope {
  VarScope* parent = nullptr;
  std::map<std::string, int> vars;

  int lookup(const std::string& n) const {
    auto it = vars.find(n);
    if (it != vars.end()) return it->second;
    return parent ? parent->lookup(n) : -1;
  }
};

// Info about where a variant's fields live during one match arm.
struct ElemCtx {
  int scrut_local = -1;            // ref aggregate
  std::string variant;
  const Member* group = nullptr;   // direct group (or indirect group for from)
  const SplitArm* arm = nullptr;   // inline arm members, when any
  int index_local = -1;            // memoized element index (lazy)
  bool is_arena = false;
  int buffer = -1;
  ElemCtx* direct = nullptr;       // for from-elements: the direct element
  std::map<std::string, int> memo; // resolved names -> local
};

struct Lowerer {
  Program& module;
  const MemoryPlan& plan;
  LoweredProgram& out;
  TypeTable types;

  IrFunc* F = nullptr;
  std::vector<std::vector<int>*> blocks;
  VarScope* scope = nullptr;

  // Inline frame: return-flattening state.
  struct Frame {
    int result_local = -1;
    int done_local = -1;
    bool has_returns = false;
  };
  std::vector<Frame> frames;
  std::set<const FuncDecl*> inline_stack;
  std::string current_entry;  // DSL name of the entry being lowered
  int self_index = -1;        // IrFunc index of the entry (self-calls)

  Lowerer(Program& m, const MemoryPlan& p, LoweredProgram& o)
      : module(m), plan(p), out(o), types(m) {}

  // --- helpers -------------------------------------------------------------

  std::vector<int>& cur() { return *blocks.back(); }

  int emit(IrStmt s) {
    int id = F->add_stmt(std::move(s));
    cur().push_back(id);
    return id;
  }

  int expr(IrExpr e) { return F->add_expr(std::move(e)); }

  int const_u(uint64_t v, SemTypePtr t) {
    IrExpr e;
    e.op = IrOp::ConstI;
    e.u0 = v;
    e.type = std::move(t);
    return expr(std::move(e));
  }
  int const_f(double v) {
    IrExpr e;
    e.op = IrOp::ConstF;
    e.f0 = v;
    e.type = SemType::make_float(32);
    return expr(std::move(e));
  }
  int const_b(bool v) {
    IrExpr e;
    e.op = IrOp::ConstB;
    e.u0 = v ? 1 : 0;
    e.type = SemType::make_bool();
    return expr(std::move(e));
  }
  int read_var(int local) {
    IrExpr e;
    e.op = IrOp::ReadVar;
    e.i0 = local;
    e.type = F->local_types[static_cast<size_t>(local)];
    return expr(std::move(e));
  }
  int assign_new(const std::string& name, int value_expr, SemTypePtr t) {
    int local = F->add_local(name, t);
    IrStmt s;
    s.kind = IrStmtKind::Assign;
    s.var = local;
    s.e0 = value_expr;
    emit(std::move(s));
    return local;
  }
  int bin(BinOp op, int a, int b, SemTypePtr t) {
    IrExpr e;
    e.op = IrOp::Bin;
    e.i0 = static_cast<int>(op);
    e.args = {a, b};
    e.type = std::move(t);
    return expr(std::move(e));
  }
  int get_elem(int agg, uint64_t idx, SemTypePtr t) {
    IrExpr e;
    e.op = IrOp::GetElem;
    e.u0 = idx;
    e.args = {agg};
    e.type = std::move(t);
    return expr(std::move(e));
  }

  int handle_of(int scrut_local) {
    return get_elem(read_var(scrut_local), plan.components.size(), handle_type());
  }

  int component_of(int scrut_local, const std::string& name) {
    for (size_t i = 0; i < plan.components.size(); i++) {
      if (plan.components[i].name == name)
        return get_elem(read_var(scrut_local), i, plan.components[i].type);
    }
    return -1;
  }

  // --- element addressing ----------------------------------------------------

  // Index expression for the element holding `path.terminal`, lowered in the
  // given element context chain.
  int elem_index_expr(const AccessPath& path, ElemCtx& ctx) {
    if (ctx.index_local >= 0) return read_var(ctx.index_local);
    const AccessStep* last = nullptr;
    for (const auto& s : path.steps) {
      if (s.kind == AccessStep::Kind::IndexBuffer || s.kind == AccessStep::Kind::AddressLoad ||
          s.kind == AccessStep::Kind::ForeignKey)
        last = &s;
    }
    if (!last) throw SpecializeError("field path has no addressable step");
    int e;
    if (last->kind == AccessStep::Kind::ForeignKey) {
      // Key evaluated in the scope of the direct element.
      e = lower_elem_expr(*last->index, *ctx.direct);
    } else {
      e = component_of(ctx.scrut_local, last->component);
      if (e < 0) throw SpecializeError("unknown reference component " + last->component);
    }
    ctx.index_local = F->add_local("__idx", F->exprs[static_cast<size_t>(e)].type);
    IrStmt s;
    s.kind = IrStmtKind::Assign;
    s.var = ctx.index_local;
    s.e0 = e;
    emit(std::move(s));
    return read_var(ctx.index_local);
  }

  int load_slot(const FieldSlot& slot, int index_expr, int handle_expr) {
    IrExpr e;
    e.op = IrOp::LoadSlot;
    e.i0 = slot.buffer;
    e.i1 = slot.segment;
    e.u0 = slot.offset;
    e.u1 = slot.width;
    e.args = {index_expr, handle_expr};
    e.type = slot.type;
    return expr(std::move(e));
  }

  // Resolve a name inside an element context: stored fields / derives / lets
  // of the element, then reference components, then globals.
  int resolve_element_name(const std::string& name, ElemCtx& ctx) {
    auto it = ctx.memo.find(name);
    if (it != ctx.memo.end()) return read_var(it->second);

    const Member* found = find_member(ctx, name);
    if (found) {
      int local = -1;
      if (found->kind == MemberKind::StoredField) {
        const FieldSlot* slot = plan.slot_of(found);
        if (!slot) throw SpecializeError("unplanned slot " + name);
        AccessPath path = resolve_path_for(ctx, name);
        int idx = elem_index_expr(path, ctx);
        int h = handle_of(ctx.scrut_local);
        local = F->add_local(name, slot->type);
        IrStmt s;
        s.kind = IrStmtKind::Assign;
        s.var = local;
        s.e0 = load_slot(*slot, idx, h);
        emit(std::move(s));
      } else {
        // Derive or let: evaluated lazily, at most once per destruction.
        int value = lower_elem_expr(*found->value, ctx);
        SemTypePtr t = found->kind == MemberKind::Let ? found->type
                                                      : found->value->type;
        local = F->add_local(name, t);
        IrStmt s;
        s.kind = IrStmtKind::Assign;
        s.var = local;
        s.e0 = value;
        emit(std::move(s));
      }
      ctx.memo[name] = local;
      return read_var(local);
    }
    int comp = component_of(ctx.scrut_local, name);
    if (comp >= 0) return comp;
    if (const GlobalDesc* g = plan.global(name)) {
      IrExpr e;
      e.op = IrOp::LoadGlobal;
      e.u0 = static_cast<uint64_t>(out.intern(g->name));
      e.args = {handle_of(ctx.scrut_local)};
      e.type = g->type;
      return expr(std::move(e));
    }
    if (const BufferDesc* b = bufname(name)) {
      // Bare global-array name: a full-range slice.
      (void)b;
      throw SpecializeError("global array '" + name + "' must be sliced");
    }
    throw SpecializeError("cannot resolve layout name '" + name + "'");
  }

  const BufferDesc* bufname(const std::string& n) {
    auto it = plan.buffer_by_name.find(n);
    return it == plan.buffer_by_name.end() ? nullptr : &plan.buffers[static_cast<size_t>(it->second)];
  }

  // Searches the element's member lists (group body + active arm).
  const Member* find_member(const ElemCtx& ctx, const std::string& name) {
    const Member* found = nullptr;
    std::function<void(const std::vector<MemberPtr>&)> scan =
        [&](const std::vector<MemberPtr>& members) {
          for (const auto& m : members) {
            if (found) return;
            switch (m->kind) {
              case MemberKind::StoredField:
              case MemberKind::Derive:
              case MemberKind::Let:
                if (m->name == name) found = m.get();
                break;
              case MemberKind::Group:
                if (!m->indirect && m->tile != 0) scan(m->members);  // tile stripes
                break;
              case MemberKind::Split:
                for (const auto& arm : m->arms) {
                  if (arm.variant == ctx.variant && !arm.is_from) scan(arm.members);
                }
                break;
              default:
                break;
            }
          }
        };
    if (ctx.group) scan(ctx.group->members);
    return found;
  }

  // Path to a member within this element context (for index addressing).
  AccessPath resolve_path_for(const ElemCtx& ctx, const std::string& name) {
    AccessPath p = resolve_field(plan, name, ctx.variant);
    if (p.found) return p;
    throw SpecializeError("cannot resolve path for '" + name + "'");
  }

  // Lower a layout expression (derive/let/key) in an element context.
  int lower_elem_expr(const Expr& e, ElemCtx& ctx) {
    switch (e.kind) {
      case ExprKind::Ident:
        return resolve_element_name(e.name, ctx);
      case ExprKind::ParentField: {
        int comp = component_of(ctx.scrut_local, e.name);
        if (comp < 0) throw SpecializeError("parent." + e.name + " is not a component");
        return comp;
      }
      default:
        return lower_expr_generic(e, [&](const Expr& inner) -> int {
          if (inner.kind == ExprKind::Ident) return resolve_element_name(inner.name, ctx);
          if (inner.kind == ExprKind::ParentField) {
            int comp = component_of(ctx.scrut_local, inner.name);
            if (comp < 0) throw SpecializeError("parent." + inner.name + " is not a component");
            return comp;
          }
          return -1;
        });
    }
  }

  // --- generic expression lowering ------------------------------------------
  //
  // `leaf_hook` resolves identifiers (and parent.*) against the active
  // environment; -1 means "not handled here".
  using LeafHook = std::function<int(const Expr&)>;

  int lower_expr_generic(const Expr& e, const LeafHook& hook) {
    switch (e.kind) {
      case ExprKind::IntLit: {
        if (e.type->kind == TypeKind::Float) {
          IrExpr x;
          x.op = IrOp::ConstF;
          x.f0 = static_cast<double>(e.int_val);
          x.type = e.type;
          return expr(std::move(x));
        }
        return const_u(e.int_val, e.type);
      }
      case ExprKind::FloatLit: {
        IrExpr x;
        x.op = IrOp::ConstF;
        x.f0 = e.float_val;
        x.type = e.type;
        return expr(std::move(x));
      }
      case ExprKind::BoolLit:
        return const_b(e.bool_val);
      case ExprKind::InfLit: {
        IrExpr x;
        x.op = IrOp::ConstF;
        x.f0 = std::numeric_limits<double>::infinity();
        x.type = e.type;
        return expr(std::move(x));
      }
      case ExprKind::Ident:
      case ExprKind::ParentField: {
        int r = hook(e);
        if (r < 0) throw SpecializeError("unresolved identifier '" + e.name + "'");
        return r;
      }
      case ExprKind::Field: {
        const SemType& bt = *e.base->type;
        int base = lower_expr_generic(*e.base, hook);
        const SemType* t = &bt;
        if (t->kind == TypeKind::Optional) {
          IrExpr v;
          v.op = IrOp::OptVal;
          v.args = {base};
          v.type = t->elem;
          base = expr(std::move(v));
          t = bt.elem.get();
        }
        if (t->kind == TypeKind::Vec) {
          static const std::string lanes = "xyzw";
          uint64_t idx = static_cast<uint64_t>(lanes.find(e.name[0]));
          return get_elem(base, idx, e.type);
        }
        const AdtDecl* d = types.lookup(t->name);
        if (!d) throw SpecializeError("field access on unknown type");
        for (size_t i = 0; i < d->common_fields.size(); i++) {
          if (d->common_fields[i].name == e.name) return get_elem(base, i, e.type);
        }
        throw SpecializeError("no field " + e.name);
      }
      case ExprKind::Index: {
        int base = lower_expr_generic(*e.base, hook);
        const SemType& bt = *e.base->type;
        if (bt.kind == TypeKind::Tuple) {
          return get_elem(base, e.index->int_val, e.type);
        }
        int idx = lower_expr_generic(*e.index, hook);
        if (e.index->kind == ExprKind::IntLit) {
          return get_elem(base, e.index->int_val, e.type);
        }
        IrExpr x;
        x.op = IrOp::IndexDyn;
        x.args = {base, idx};
        x.type = e.type;
        return expr(std::move(x));
      }
      case ExprKind::Slice: {
        if (e.is_bit_extract) {
          int base = lower_expr_generic(*e.base, hook);
          IrExpr x;
          x.op = IrOp::BitExtract;
          x.u0 = e.index->int_val;
          x.u1 = e.index2->int_val;
          x.args = {base};
          x.type = e.type;
          return expr(std::move(x));
        }
        // Array slice: base must denote a global array buffer.
        const BufferDesc* buf = nullptr;
        int handle = -1;
        if (e.base->kind == ExprKind::Ident) {
          buf = bufname(e.base->name);
          handle = slice_handle_hint >= 0 ? read_var(slice_handle_hint) : -1;
        }
        if (!buf || handle < 0)
          throw SpecializeError("slices must apply to global arrays inside a layout");
        int lo = lower_expr_generic(*e.index, hook);
        int hi = lower_expr_generic(*e.index2, hook);
        int len = bin(BinOp::Sub, hi, lo, F->exprs[static_cast<size_t>(hi)].type);
        IrExpr x;
        x.op = IrOp::MakeSlice;
        x.i0 = buf->id;
        x.args = {lo, len, handle};
        x.type = e.type;
        return expr(std::move(x));
      }
      case ExprKind::Call: {
        if (e.resolved_func >= 0)
          return lower_call(module.funcs[static_cast<size_t>(e.resolved_func)], e, hook);
        IrExpr x;
        x.op = IrOp::Intrin;
        x.i0 = e.resolved_intrinsic;
        for (const auto& a : e.args) x.args.push_back(lower_expr_generic(*a, hook));
        x.type = e.type;
        return expr(std::move(x));
      }
      case ExprKind::MethodCall:
        throw SpecializeError("method call outside statement position");
      case ExprKind::Construct:
      case ExprKind::Aggregate:
      case ExprKind::Tuple: {
        if (e.type->kind == TypeKind::Optional) {
          if (e.args.empty()) {
            IrExpr x;
            x.op = IrOp::OptNone;
            x.type = e.type;
            return expr(std::move(x));
          }
          int v = lower_expr_generic(*e.args[0], hook);
          IrExpr x;
          x.op = IrOp::OptSome;
          x.args = {v};
          x.type = e.type;
          return expr(std::move(x));
        }
        IrExpr x;
        x.op = IrOp::MakeAgg;
        std::vector<const FieldDecl*> rec_fields;
        if (e.type->kind == TypeKind::Named) {
          const AdtDecl* d = types.lookup(e.type->name);
          for (const auto& f : d->common_fields) rec_fields.push_back(&f);
        }
        for (const auto& a : e.args) x.args.push_back(lower_expr_generic(*a, hook));
        // Record constructors may omit defaulted trailing fields.
        for (size_t i = e.args.size(); i < rec_fields.size(); i++) {
          if (!rec_fields[i]->default_value)
            throw SpecializeError("missing record field value");
          x.args.push_back(lower_expr_generic(*rec_fields[i]->default_value, hook));
        }
        x.type = e.type;
        return expr(std::move(x));
      }
      case ExprKind::Unary: {
        int a = lower_expr_generic(*e.base, hook);
        IrExpr x;
        x.op = IrOp::Un;
        x.i0 = static_cast<int>(e.un_op);
        x.args = {a};
        x.type = e.type;
        return expr(std::move(x));
      }
      case ExprKind::Binary: {
        if (e.bin_op == BinOp::And || e.bin_op == BinOp::Or) {
          // Short-circuit: r = lhs; if (r == continue-condition) r = rhs.
          int lhs = lower_expr_generic(*e.index, hook);
          int r = F->add_local("__sc", SemType::make_bool());
          {
            IrStmt s;
            s.kind = IrStmtKind::Assign;
            s.var = r;
            s.e0 = lhs;
            emit(std::move(s));
          }
          IrStmt iff;
          iff.kind = IrStmtKind::If;
          IrIfClause c;
          int cond = read_var(r);
          if (e.bin_op == BinOp::Or) {
            IrExpr n;
            n.op = IrOp::Un;
            n.i0 = static_cast<int>(UnOp::Not);
            n.args = {cond};
            n.type = SemType::make_bool();
            cond = expr(std::move(n));
          }
          c.cond = cond;
          blocks.push_back(&c.block);
          int rhs = lower_expr_generic(*e.index2, hook);
          IrStmt s;
          s.kind = IrStmtKind::Assign;
          s.var = r;
          s.e0 = rhs;
          emit(std::move(s));
          blocks.pop_back();
          iff.clauses.push_back(std::move(c));
          emit(std::move(iff));
          return read_var(r);
        }
        int a = lower_expr_generic(*e.index, hook);
        int b = lower_expr_generic(*e.index2, hook);
        return bin(e.bin_op, a, b, e.type);
      }
      case ExprKind::CastAs: {
        int a = lower_expr_generic(*e.base, hook);
        IrExpr x;
        x.op = IrOp::CastVal;
        x.args = {a};
        x.type = e.type;
        return expr(std::move(x));
      }
      case ExprKind::CastTo: {
        int a = lower_expr_generic(*e.base, hook);
        IrExpr x;
        x.op = IrOp::CastBits;
        x.args = {a};
        x.type = e.type;
        return expr(std::move(x));
      }
      case ExprKind::MatchExpr: {
        int result = F->add_local("__mr", e.type);
        lower_match_impl(
            *e.base, hook, e.match_arms.size(),
            [&](size_t i) -> const MatchPattern& { return e.match_arms[i].pattern; },
            [&](size_t i, const LeafHook& arm_hook) {
              int v = lower_expr_generic(*e.match_arms[i].value, arm_hook);
              IrStmt st;
              st.kind = IrStmtKind::Assign;
              st.var = result;
              st.e0 = v;
              emit(std::move(st));
            });
        return read_var(result);
      }
      case ExprKind::This:
      case ExprKind::Append:
      case ExprKind::BuildChild:
        throw SpecializeError("build-language expression in a traversal");
    }
    throw SpecializeError("unhandled expression kind");
  }

  // Hint used by slice lowering: local holding the scrutinee whose tree owns
  // the sliced global array.
  int slice_handle_hint = -1;

  // --- match lowering --------------------------------------------------------

  struct VariantArmInfo {
    const Member* split = nullptr;
    const SplitArm* arm = nullptr;
    const Member* group = nullptr;          // enclosing direct group
    const Member* indirect_group = nullptr; // from target
  };

  VariantArmInfo find_variant_arm(const std::string& variant) {
    VariantArmInfo info;
    std::map<std::string, const Member*> indirects;
    std::function<bool(const std::vector<MemberPtr>&, const Member*)> walk =
        [&](const std::vector<MemberPtr>& members, const Member* group) -> bool {
      for (const auto& m : members) {
        if (m->kind == MemberKind::Group) {
          if (m->indirect) indirects[m->group_name] = m.get();
          else if (walk(m->members, m->tile ? group : m.get())) return true;
        } else if (m->kind == MemberKind::Split) {
          for (const auto& arm : m->arms) {
            if (arm.variant != variant) continue;
            info.split = m.get();
            info.arm = &arm;
            info.group = group;
            if (arm.is_from) info.indirect_group = indirects[arm.from_group];
            return true;
          }
        }
      }
      return false;
    };
    walk(plan.layout->members, nullptr);
    if (!info.group) {
      // Single-variant layouts: the first direct group.
      for (const auto& m : plan.layout->members)
        if (m->kind == MemberKind::Group && !m->indirect) info.group = m.get();
    }
    return info;
  }

  // Synthesized discriminant test for one variant's split pattern.
  int arm_test(const VariantArmInfo& info, ElemCtx& direct_ctx) {
    const SplitArm& arm = *info.arm;
    // Memoize the discriminant per match.
    std::ostringstream key;
    key << "__disc@" << static_cast<const void*>(info.split);
    int disc;
    auto it = direct_ctx.memo.find(key.str());
    if (it != direct_ctx.memo.end()) {
      disc = read_var(it->second);
    } else {
      int value = lower_elem_expr(*info.split->value, direct_ctx);
      int local = F->add_local("__disc", info.split->value->type);
      IrStmt s;
      s.kind = IrStmtKind::Assign;
      s.var = local;
      s.e0 = value;
      emit(std::move(s));
      direct_ctx.memo[key.str()] = local;
      disc = read_var(local);
    }
    SemTypePtr dt = info.split->value->type;
    int lit = const_u(arm.pattern_value ? arm.pattern_value->int_val : 0, dt);
    BinOp op;
    switch (arm.pattern) {
      case PatternKind::Literal: op = BinOp::Eq; break;
      case PatternKind::Gt: op = BinOp::Gt; break;
      case PatternKind::Lt: op = BinOp::Lt; break;
      case PatternKind::Ge: op = BinOp::Ge; break;
      case PatternKind::Le: op = BinOp::Le; break;
      default:
        throw SpecializeError("wildcard arms have no forward test");
    }
    return bin(op, disc, lit, SemType::make_bool());
  }

  void lower_match_impl(const Expr& scrutinee, const LeafHook& hook, size_t arm_count,
                        const std::function<const MatchPattern&(size_t)>& pattern_of,
                        const std::function<void(size_t, const LeafHook&)>& lower_body) {
    const AdtDecl* adt = types.lookup(scrutinee.type->name);
    int scrut = F->add_local("__scrut", ref_agg_type(plan));
    {
      int v = lower_expr_generic(scrutinee, hook);
      IrStmt s;
      s.kind = IrStmtKind::Assign;
      s.var = scrut;
      s.e0 = v;
      emit(std::move(s));
    }

    // Which variants does this match cover?
    std::set<std::string> covered;
    bool has_wildcard = false;
    for (size_t i = 0; i < arm_count; i++) {
      if (pattern_of(i).wildcard) has_wildcard = true;
      else covered.insert(pattern_of(i).variant);
    }
    bool exhaustive = has_wildcard || covered.size() == adt->variants.size();

    // Single wildcard arm: no discrimination needed.
    if (arm_count == 1 && pattern_of(0).wildcard) {
      lower_body(0, hook);
      return;
    }

    ElemCtx shared_direct;  // discriminant memo shared across arms
    shared_direct.scrut_local = scrut;

    IrStmt iff;
    iff.kind = IrStmtKind::If;
    for (size_t i = 0; i < arm_count; i++) {
      const MatchPattern& pat = pattern_of(i);
      bool is_last = i + 1 == arm_count;
      bool as_else = is_last && exhaustive;

      VariantArmInfo info;
      ElemCtx direct_ctx;
      ElemCtx from_ctx;
      if (!pat.wildcard) {
        info = find_variant_arm(pat.variant);
        direct_ctx.scrut_local = scrut;
        direct_ctx.variant = pat.variant;
        direct_ctx.group = info.group;
        direct_ctx.is_arena = info.group && plan.group_buffers.count(info.group)
                                  ? plan.buffers[static_cast<size_t>(
                                                     plan.group_buffers.at(info.group))]
                                        .is_arena
                                  : false;
        shared_direct.variant = pat.variant;
        shared_direct.group = info.group;
      }

      int cond = -1;
      if (!as_else) {
        if (pat.wildcard) {
          // Wildcard before other arms: negation of all named tests is
          // implied by arm order; emit `true`.
          cond = const_b(true);
        } else if (!info.split) {
          cond = const_b(true);  // no split: single-variant layout
        } else {
          cond = arm_test(info, shared_direct);
        }
      }

      IrIfClause clause;
      clause.cond = cond;
      std::vector<int>* sink;
      if (as_else) {
        sink = &iff.block;
      } else {
        sink = &clause.block;
      }
      blocks.push_back(sink);

      // Arm context (fresh memo per arm; the discriminant cache lives in
      // shared_direct and is only valid before the branch, so tests are
      // emitted outside while bodies re-resolve).
      if (!pat.wildcard) {
        direct_ctx.memo.clear();
        from_ctx = ElemCtx{};
        if (info.arm && info.arm->is_from) {
          from_ctx.scrut_local = scrut;
          from_ctx.variant = pat.variant;
          from_ctx.group = info.indirect_group;
          from_ctx.direct = &direct_ctx;
        }
        LeafHook arm_hook = make_arm_hook(pat, *adt, direct_ctx, from_ctx, info, hook, scrut);
        int old_hint = slice_handle_hint;
        slice_handle_hint = scrut;
        lower_body(i, arm_hook);
        slice_handle_hint = old_hint;
      } else {
        lower_body(i, hook);
      }
      blocks.pop_back();
      if (!as_else) iff.clauses.push_back(std::move(clause));
    }
    if (!exhaustive) {
      // Unmatched variants trap at runtime.
      IrStmt trap;
      trap.kind = IrStmtKind::Trap;
      trap.u0 = static_cast<uint64_t>(out.intern("match fell through"));
      blocks.push_back(&iff.block);
      emit(std::move(trap));
      blocks.pop_back();
    }
    emit(std::move(iff));
  }

  // Hook resolving pattern binders to (variant, field) resolutions.
  LeafHook make_arm_hook(const MatchPattern& pat, const AdtDecl& adt, ElemCtx& direct_ctx,
                         ElemCtx& from_ctx, const VariantArmInfo& info, const LeafHook& outer,
                         int scrut) {
    const VariantDecl* v = adt.find_variant(pat.variant);
    auto fields = adt.fields_of(*v);
    // binder -> field name
    auto binders = std::make_shared<std::map<std::string, std::string>>();
    for (size_t i = 0; i < pat.binders.size() && i < fields.size(); i++) {
      if (pat.binders[i] != "_") (*binders)[pat.binders[i]] = fields[i]->name;
    }
    ElemCtx* dctx = &direct_ctx;
    ElemCtx* fctx = info.arm && info.arm->is_from ? &from_ctx : nullptr;
    std::string variant = pat.variant;
    return [this, binders, dctx, fctx, variant, outer, scrut, &adt](const Expr& e) -> int {
      if (e.kind == ExprKind::Ident) {
        auto it = binders->find(e.name);
        if (it != binders->end())
          return resolve_logical_field(it->second, variant, *dctx, fctx, scrut, adt);
      }
      return outer(e);
    };
  }

  // Resolves one logical field of a variant to IR, wrapping reference-typed
  // results with the scrutinee's tree handle.
  int resolve_logical_field(const std::string& field, const std::string& variant,
                            ElemCtx& direct_ctx, ElemCtx* from_ctx, int scrut,
                            const AdtDecl& adt) {
    AccessPath path = resolve_field(plan, field, variant);
    if (!path.found) throw SpecializeError("unresolved logical field " + field);
    bool via_from = false;
    for (const auto& s : path.steps)
      if (s.kind == AccessStep::Kind::ForeignKey) via_from = true;
    ElemCtx& ctx = via_from && from_ctx ? *from_ctx : direct_ctx;
    int raw = resolve_element_name(field, ctx);

    // Recursive fields become references: attach the handle.
    const VariantDecl* v = adt.find_variant(variant);
    SemTypePtr logical;
    for (const FieldDecl* f : adt.fields_of(*v))
      if (f->name == field) logical = f->type;
    if (logical && type_mentions(*logical, adt.name)) return wrap_reference(raw, *logical, scrut);
    return raw;
  }

  int wrap_reference(int raw, const SemType& logical, int scrut) {
    int h = handle_of(scrut);
    if (logical.kind == TypeKind::Named) {
      IrExpr x;
      x.op = IrOp::MakeAgg;
      x.type = ref_agg_type(plan);
      if (plan.components.size() == 1) {
        x.args = {raw, h};
      } else {
        // Multi-component reference: raw is the component tuple.
        for (size_t i = 0; i < plan.components.size(); i++)
          x.args.push_back(get_elem(raw, i, plan.components[i].type));
        x.args.push_back(h);
      }
      return expr(std::move(x));
    }
    // Array of references: wrap each lane.
    uint32_t lanes = logical.lanes;
    int raw_local = F->add_local("__refs", F->exprs[static_cast<size_t>(raw)].type);
    {
      IrStmt s;
      s.kind = IrStmtKind::Assign;
      s.var = raw_local;
      s.e0 = raw;
      emit(std::move(s));
    }
    IrExpr outer;
    outer.op = IrOp::MakeAgg;
    std::vector<SemTypePtr> elems(lanes, ref_agg_type(plan));
    outer.type = SemType::make_array(ref_agg_type(plan), lanes);
    for (uint32_t k = 0; k < lanes; k++) {
      IrExpr one;
      one.op = IrOp::MakeAgg;
      one.type = ref_agg_type(plan);
      one.args = {get_elem(read_var(raw_local), k, plan.components[0].type), handle_of(scrut)};
      outer.args.push_back(expr(std::move(one)));
    }
    return expr(std::move(outer));
  }

  // --- function lowering -----------------------------------------------------

  int lower_call(const FuncDecl& callee, const Expr& call, const LeafHook& hook) {
    if (callee.name == current_entry &&
        inline_stack.empty()) {
      throw SpecializeError("self-recursive call in expression position");
    }
    if (inline_stack.count(&callee))
      throw SpecializeError("recursive helper function '" + callee.name + "'");
    inline_stack.insert(&callee);

    VarScope callee_scope;  // functions see only their parameters
    for (size_t i = 0; i < callee.params.size(); i++) {
      const ParamDecl& p = callee.params[i];
      int arg_expr;
      if (i < call.args.size()) {
        if (p.is_mut) {
          if (call.args[i]->kind != ExprKind::Ident)
            throw SpecializeError("mut argument must be a variable");
          int alias = hook(*call.args[i]);
          // The hook returns a ReadVar for locals; recover the slot.
          const IrExpr& ae = F->exprs[static_cast<size_t>(alias)];
          if (ae.op != IrOp::ReadVar)
            throw SpecializeError("mut argument must be a plain variable");
          callee_scope.vars[p.name] = ae.i0;
          continue;
        }
        arg_expr = lower_expr_generic(*call.args[i], hook);
      } else {
        arg_expr = lower_expr_generic(*p.default_value, hook);
      }
      int local = assign_new(p.name, arg_expr, p.type);
      callee_scope.vars[p.name] = local;
    }

    Frame frame;
    frame.has_returns = stmt_may_return(*callee.body);
    if (callee.return_type && callee.return_type->kind != TypeKind::Void) {
      frame.result_local = F->add_local("__ret_" + callee.name, callee.return_type);
    }
    if (frame.has_returns) {
      frame.done_local = F->add_local("__done_" + callee.name, SemType::make_bool());
      IrStmt s;
      s.kind = IrStmtKind::Assign;
      s.var = frame.done_local;
      s.e0 = const_b(false);
      emit(std::move(s));
    }
    frames.push_back(frame);
    VarScope* old = scope;
    scope = &callee_scope;
    lower_stmt(*callee.body);
    scope = old;
    frames.pop_back();
    inline_stack.erase(&callee);
    if (frame.result_local >= 0) return read_var(frame.result_local);
    return const_b(false);  // unit value placeholder
  }

  static bool stmt_may_return(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Return:
        return true;
      case StmtKind::Block:
        for (const auto& c : s.block)
          if (stmt_may_return(*c)) return true;
        return false;
      case StmtKind::If: {
        for (const auto& c : s.if_clauses)
          if (stmt_may_return(*c.body)) return true;
        return s.else_body && stmt_may_return(*s.else_body);
      }
      case StmtKind::Match:
        for (const auto& a : s.match_arms)
          if (stmt_may_return(*a.body)) return true;
        return false;
      case StmtKind::Foreach:
        return stmt_may_return(*s.block[0]);
      default:
        return false;
    }
  }

  LeafHook scope_hook() {
    return [this](const Expr& e) -> int {
      if (e.kind == ExprKind::Ident) {
        int local = scope ? scope->lookup(e.name) : -1;
        if (local >= 0) return read_var(local);
      }
      for (auto it = hook_stack.rbegin(); it != hook_stack.rend(); ++it) {
        int r = (*it)(e);
        if (r >= 0) return r;
      }
      return -1;
    };
  }

  // Lower a statement list with return-flattening: statements after a
  // possibly-returning one are guarded by the frame's done flag.
  void lower_stmt_list(const std::vector<StmtPtr>& stmts, size_t from = 0) {
    for (size_t i = from; i < stmts.size(); i++) {
      lower_stmt(*stmts[i]);
      bool returned = stmt_may_return(*stmts[i]);
      if (returned && i + 1 < stmts.size() && !frames.empty() &&
          frames.back().done_local >= 0) {
        IrStmt iff;
        iff.kind = IrStmtKind::If;
        IrIfClause c;
        IrExpr n;
        n.op = IrOp::Un;
        n.i0 = static_cast<int>(UnOp::Not);
        n.args = {read_var(frames.back().done_local)};
        n.type = SemType::make_bool();
        c.cond = expr(std::move(n));
        blocks.push_back(&c.block);
        lower_stmt_list(stmts, i + 1);
        blocks.pop_back();
        iff.clauses.push_back(std::move(c));
        emit(std::move(iff));
        return;
      }
    }
  }

  void lower_stmt(const Stmt& s) {
    LeafHook hook = scope_hook();
    switch (s.kind) {
      case StmtKind::Block: {
        VarScope inner;
        inner.parent = scope;
        VarScope* old = scope;
        scope = &inner;
        lower_stmt_list(s.block);
        scope = old;
        break;
      }
      case StmtKind::ExprStmt: {
        // Self-recursive traversal calls appear here.
        const Expr& e = *s.expr;
        if (e.kind == ExprKind::Call && e.resolved_func >= 0 &&
            module.funcs[static_cast<size_t>(e.resolved_func)].name == current_entry) {
          IrStmt call;
          call.kind = IrStmtKind::Call;
          call.i0 = self_index;
          for (const auto& a : e.args) call.args.push_back(lower_expr_generic(*a, hook));
          emit(std::move(call));
          break;
        }
        if (e.kind == ExprKind::MethodCall &&
            e.resolved_intrinsic == static_cast<int>(Intrinsic::Insert)) {
          int setl = hook(*e.base);
          const IrExpr& se = F->exprs[static_cast<size_t>(setl)];
          if (se.op != IrOp::ReadVar) throw SpecializeError("insert target must be a variable");
          IrStmt ins;
          ins.kind = IrStmtKind::SetInsert;
          ins.var = se.i0;
          ins.e1 = lower_expr_generic(*e.args[0], hook);
          emit(std::move(ins));
          break;
        }
        IrStmt st;
        st.kind = IrStmtKind::Eval;
        st.e0 = lower_expr_generic(e, hook);
        emit(std::move(st));
        break;
      }
      case StmtKind::Let: {
        int v;
        if (s.expr) {
          v = lower_expr_generic(*s.expr, hook);
          v = coerce(v, *s.expr->type, *s.decl_type);
        } else {
          v = zero_value(*s.decl_type);
        }
        int local = F->add_local(s.name, s.decl_type);
        IrStmt st;
        st.kind = IrStmtKind::Assign;
        st.var = local;
        st.e0 = v;
        emit(std::move(st));
        scope->vars[s.name] = local;
        break;
      }
      case StmtKind::Assign: {
        int local = scope->lookup(s.lv_name);
        if (local < 0) throw SpecializeError("assignment to unknown variable " + s.lv_name);
        SemTypePtr base_type = F->local_types[static_cast<size_t>(local)];
        if (s.lv_is_field) {
          static const std::string lanes = "xyzw";
          uint64_t idx;
          if (base_type->kind == TypeKind::Vec) {
            idx = static_cast<uint64_t>(lanes.find(s.lv_field[0]));
          } else {
            const AdtDecl* d = types.lookup(base_type->name);
            idx = 0;
            for (size_t i = 0; i < d->common_fields.size(); i++)
              if (d->common_fields[i].name == s.lv_field) idx = i;
          }
          IrStmt st;
          st.kind = IrStmtKind::AssignLane;
          st.var = local;
          st.e0 = const_u(idx, SemType::make_int(32, false));
          st.e1 = lower_expr_generic(*s.expr, hook);
          emit(std::move(st));
        } else if (s.lv_is_index) {
          IrStmt st;
          st.kind = IrStmtKind::AssignLane;
          st.var = local;
          st.e0 = lower_expr_generic(*s.lv_index, hook);
          st.e1 = lower_expr_generic(*s.expr, hook);
          emit(std::move(st));
        } else if (s.lv_is_bitrange) {
          IrStmt st;
          st.kind = IrStmtKind::AssignBits;
          st.var = local;
          st.u0 = s.lv_index->int_val;
          st.u1 = s.lv_index2->int_val;
          st.e1 = lower_expr_generic(*s.expr, hook);
          emit(std::move(st));
        } else {
          int v = lower_expr_generic(*s.expr, hook);
          v = coerce(v, *s.expr->type, *base_type);
          IrStmt st;
          st.kind = IrStmtKind::Assign;
          st.var = local;
          st.e0 = v;
          emit(std::move(st));
        }
        break;
      }
      case StmtKind::Return: {
        Frame& frame = frames.back();
        if (s.expr && frame.result_local >= 0) {
          int v = lower_expr_generic(*s.expr, hook);
          v = coerce(v, *s.expr->type,
                     *F->local_types[static_cast<size_t>(frame.result_local)]);
          IrStmt st;
          st.kind = IrStmtKind::Assign;
          st.var = frame.result_local;
          st.e0 = v;
          emit(std::move(st));
        }
        if (frame.done_local >= 0) {
          IrStmt st;
          st.kind = IrStmtKind::Assign;
          st.var = frame.done_local;
          st.e0 = const_b(true);
          emit(std::move(st));
        }
        break;
      }
      case StmtKind::If: {
        IrStmt iff;
        iff.kind = IrStmtKind::If;
        for (const auto& cl : s.if_clauses) {
          IrIfClause c;
          int cond = lower_expr_generic(*cl.cond, hook);
          if (cl.cond->type->kind == TypeKind::Optional) {
            IrExpr has;
            has.op = IrOp::OptHas;
            has.args = {cond};
            has.type = SemType::make_bool();
            cond = expr(std::move(has));
          }
          c.cond = cond;
          blocks.push_back(&c.block);
          VarScope inner;
          inner.parent = scope;
          VarScope* old = scope;
          scope = &inner;
          lower_stmt(*cl.body);
          scope = old;
          blocks.pop_back();
          iff.clauses.push_back(std::move(c));
        }
        if (s.else_body) {
          blocks.push_back(&iff.block);
          VarScope inner;
          inner.parent = scope;
          VarScope* old = scope;
          scope = &inner;
          lower_stmt(*s.else_body);
          scope = old;
          blocks.pop_back();
        }
        emit(std::move(iff));
        break;
      }
      case StmtKind::Foreach: {
        VarScope inner;
        inner.parent = scope;
        IrStmt loop;
        SemTypePtr elem_type;
        if (s.foreach_hi) {
          loop.kind = IrStmtKind::ForRange;
          loop.e0 = lower_expr_generic(*s.expr, hook);
          loop.e1 = lower_expr_generic(*s.foreach_hi, hook);
          elem_type = s.expr->type;
        } else if (s.expr->type->kind == TypeKind::Array && s.expr->type->lanes == 0 &&
                   !is_ref_array(*s.expr)) {
          loop.kind = IrStmtKind::ForSlice;
          loop.e0 = lower_expr_generic(*s.expr, hook);
          elem_type = s.expr->type->elem;
        } else {
          loop.kind = IrStmtKind::ForVec;
          loop.e0 = lower_expr_generic(*s.expr, hook);
          elem_type = element_rep_type(*s.expr);
        }
        int var = F->add_local(s.name, elem_type);
        loop.var = var;
        inner.vars[s.name] = var;
        blocks.push_back(&loop.block);
        VarScope* old = scope;
        scope = &inner;
        lower_stmt(*s.block[0]);
        scope = old;
        blocks.pop_back();
        emit(std::move(loop));
        break;
      }
      case StmtKind::Match: {
        const Expr& scrutinee = *s.expr;
        lower_match_impl(
            scrutinee, hook, s.match_arms.size(),
            [&](size_t i) -> const MatchPattern& { return s.match_arms[i].pattern; },
            [&](size_t i, const LeafHook& arm_hook) {
              // Arm bodies run with an extended variable hook: binders and
              // then the enclosing scope.
              VarScope inner;
              inner.parent = scope;
              VarScope* old = scope;
              scope = &inner;
              LeafHook saved = arm_hook;
              lower_stmt_with_hook(*s.match_arms[i].body, saved);
              scope = old;
            });
        break;
      }
      case StmtKind::BuildField:
        throw SpecializeError("build statement outside a build procedure");
    }
  }

  // Temporarily extends identifier resolution (pattern binders).
  std::vector<LeafHook> hook_stack;
  void lower_stmt_with_hook(const Stmt& s, const LeafHook& hook) {
    hook_stack.push_back(hook);
    lower_stmt(s);
    hook_stack.pop_back();
  }

  // The element type a foreach variable holds.
  SemTypePtr element_rep_type(const Expr& iterable) {
    if (is_ref_array(iterable)) return ref_agg_type(plan);
    if (iterable.type->kind == TypeKind::Array || iterable.type->kind == TypeKind::Vec)
      return iterable.type->elem;
    throw SpecializeError("not iterable");
  }

  bool is_ref_array(const Expr& e) {
    return e.type && (e.type->kind == TypeKind::Array || e.type->kind == TypeKind::Vec) &&
           e.type->elem && types.is_adt(*e.type->elem);
  }

  int coerce(int value, const SemType& from, const SemType& to) {
    if (type_equal(from, to)) return value;
    if (from.kind == TypeKind::Int && to.kind == TypeKind::Int) {
      IrExpr x;
      x.op = IrOp::CastVal;
      x.args = {value};
      x.type = std::make_shared<SemType>(to);
      return expr(std::move(x));
    }
    if (to.kind == TypeKind::Optional && type_equal(from, *to.elem)) {
      IrExpr x;
      x.op = IrOp::OptSome;
      x.args = {value};
      x.type = std::make_shared<SemType>(to);
      return expr(std::move(x));
    }
    // ADT values: DSL type vs reference aggregate; representations match.
    return value;
  }

  int zero_value(const SemType& t) {
    switch (t.kind) {
      case TypeKind::Float: {
        IrExpr x;
        x.op = IrOp::ConstF;
        x.f0 = 0;
        x.type = std::make_shared<SemType>(t);
        return expr(std::move(x));
      }
      case TypeKind::Bool:
        return const_b(false);
      default:
        return const_u(0, std::make_shared<SemType>(t));
    }
  }

  // --- entry lowering ---------------------------------------------------------

  void lower_entry(FuncDecl& fn, int func_index) {
    IrFunc& irf = out.funcs[static_cast<size_t>(func_index)];
    F = &irf;
    irf.name = fn.name;
    irf.is_entry = true;
    irf.recursive_attr = fn.has_attr("recursive");
    irf.return_type = fn.return_type;
    current_entry = fn.name;
    self_index = func_index;

    VarScope top;
    for (const auto& p : fn.params) {
      IrParamInfo pi;
      pi.name = p.name;
      pi.dsl_type = p.type;
      pi.is_mut = p.is_mut;
      pi.is_adt = types.is_adt(*p.type);
      SemTypePtr rep = pi.is_adt ? ref_agg_type(plan) : p.type;
      pi.local = irf.add_local(p.name, rep);
      irf.params.push_back(pi);
      top.vars[p.name] = pi.local;
    }
    scope = &top;
    blocks.push_back(&irf.body);

    Frame frame;
    frame.has_returns = stmt_may_return(*fn.body);
    if (fn.return_type && fn.return_type->kind != TypeKind::Void)
      frame.result_local = irf.add_local("__ret", fn.return_type);
    if (frame.has_returns) {
      frame.done_local = irf.add_local("__done", SemType::make_bool());
      IrStmt st;
      st.kind = IrStmtKind::Assign;
      st.var = frame.done_local;
      st.e0 = const_b(false);
      emit(std::move(st));
    }
    frames.push_back(frame);
    lower_stmt(*fn.body);
    if (frame.result_local >= 0) {
      IrStmt ret;
      ret.kind = IrStmtKind::Return;
      ret.e0 = read_var(frame.result_local);
      emit(std::move(ret));
    }
    frames.pop_back();
    blocks.pop_back();
    scope = nullptr;
    F = nullptr;
  }
};

}  // namespace lower_detail
}  // namespace layoutc
