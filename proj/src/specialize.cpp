#include "layoutc/specialize.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "layoutc/sema.hpp"

#include "lower_internal.hpp"

namespace layoutc {

// ---------------------------------------------------------------------------
// Field resolution
// ---------------------------------------------------------------------------

AccessPath concretize(const AccessPath& prefix, const Member& member, const std::string& field,
                      const std::string& variant, ConcretizeCtx& ctx) {
  switch (member.kind) {
    case MemberKind::StoredField: {
      if (member.name == field) {
        AccessPath p = prefix;
        p.terminal = &member;
        p.is_derived = false;
        p.found = true;
        return p;
      }
      // Cache the stored field's path for later derivation evaluation.
      AccessPath cached = prefix;
      cached.terminal = &member;
      cached.found = true;
      ctx.cache[member.name] = cached;
      return {};
    }
    case MemberKind::Derive: {
      if (member.name == field) {
        AccessPath p = prefix;
        p.terminal = &member;
        p.is_derived = true;
        p.found = true;
        return p;
      }
      return {};
    }
    case MemberKind::Let:
    case MemberKind::Padding:
    case MemberKind::Separator:
      return {};
    case MemberKind::Group: {
      if (member.indirect) {
        ctx.indirects[member.group_name] = {&member, prefix};
        return {};
      }
      AccessPath next = prefix;
      if (!member.index_binding.empty()) {
        AccessStep step;
        bool is_ptr = false;
        if (ctx.plan) {
          for (const auto& c : ctx.plan->components)
            if (c.name == member.index_binding && c.type->kind == TypeKind::Ptr) is_ptr = true;
        }
        step.kind = is_ptr ? AccessStep::Kind::AddressLoad : AccessStep::Kind::IndexBuffer;
        step.component = member.index_binding;
        if (ctx.plan) {
          auto it = ctx.plan->group_buffers.find(&member);
          if (it != ctx.plan->group_buffers.end()) step.buffer = it->second;
        }
        next.steps.push_back(step);
      } else {
        // Anonymous or tiled direct group: same element address space.
        if (ctx.plan) {
          auto it = ctx.plan->group_buffers.find(&member);
          if (it != ctx.plan->group_buffers.end()) {
            AccessStep step;
            step.kind = AccessStep::Kind::IndexBuffer;
            step.buffer = it->second;
            next.steps.push_back(step);
          }
        }
      }
      for (const auto& m : member.members) {
        AccessPath r = concretize(next, *m, field, variant, ctx);
        if (r.found) return r;
      }
      return {};
    }
    case MemberKind::Split: {
      for (const auto& arm : member.arms) {
        if (arm.variant != variant) continue;
        if (arm.is_from) {
          auto it = ctx.indirects.find(arm.from_group);
          if (it == ctx.indirects.end())
            throw SpecializeError("'from' names unregistered indirect group " + arm.from_group);
          AccessPath next = prefix;
          AccessStep step;
          step.kind = AccessStep::Kind::ForeignKey;
          step.index = arm.from_key.get();
          if (ctx.plan) {
            auto bit = ctx.plan->group_buffers.find(it->second.first);
            if (bit != ctx.plan->group_buffers.end()) step.buffer = bit->second;
          }
          next.steps.push_back(step);
          for (const auto& m : it->second.first->members) {
            AccessPath r = concretize(next, *m, field, variant, ctx);
            if (r.found) return r;
          }
          return {};
        }
        for (const auto& m : arm.members) {
          AccessPath r = concretize(prefix, *m, field, variant, ctx);
          if (r.found) return r;
        }
        return {};
      }
      return {};
    }
  }
  return {};
}

AccessPath resolve_field(const MemoryPlan& plan, const std::string& field,
                         const std::string& variant) {
  ConcretizeCtx ctx;
  ctx.plan = &plan;
  AccessPath base;
  AccessStep root;
  root.kind = AccessStep::Kind::Base;
  base.steps.push_back(root);
  for (const auto& m : plan.layout->members) {
    AccessPath r = concretize(base, *m, field, variant, ctx);
    if (r.found) return r;
  }
  return {};
}

namespace {
using lower_detail::Lowerer;
}  // namespace

void specialize_destructors(Program& module, const MemoryPlan& plan, LoweredProgram& out) {
  TypeTable types(module);
  // Entries: functions taking ADT-typed parameters.
  std::vector<FuncDecl*> entries;
  for (auto& f : module.funcs) {
    bool has_adt = false;
    for (const auto& p : f.params)
      if (types.is_adt(*p.type)) has_adt = true;
    if (has_adt) entries.push_back(&f);
  }
  for (FuncDecl* f : entries) {
    int idx = static_cast<int>(out.funcs.size());
    out.funcs.emplace_back();
    out.entries[f->name] = idx;
  }
  for (FuncDecl* f : entries) {
    Lowerer lw(module, plan, out);
    lw.lower_entry(*f, out.entries[f->name]);
  }
}

}  // namespace layoutc
