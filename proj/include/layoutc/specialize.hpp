#pragma once

#include <map>
#include <string>
#include <vector>

#include "layoutc/ir.hpp"

namespace layoutc {

// ---------------------------------------------------------------------------
// Field resolution: the chain of indexings, address loads and foreign-key
// redirects from the reference root to one field of one variant.
// ---------------------------------------------------------------------------

struct AccessStep {
  enum class Kind { Base, IndexBuffer, AddressLoad, ForeignKey, SegmentHop };
  Kind kind = Kind::Base;
  int buffer = -1;
  int segment = 0;
  const Expr* index = nullptr;  // IndexBuffer: reference component use;
                                // ForeignKey: key expression (borrowed AST)
  std::string component;        // IndexBuffer: component name
};

struct AccessPath {
  std::vector<AccessStep> steps;
  const Member* terminal = nullptr;  // stored field or derive
  bool is_derived = false;
  bool found = false;
};

// Resolution context: indirect group registration in declaration order plus
// the cache of stored-field paths encountered before the target (used when
// evaluating derivations).
struct ConcretizeCtx {
  std::map<std::string, std::pair<const Member*, AccessPath>> indirects;
  std::map<std::string, AccessPath> cache;
  const MemoryPlan* plan = nullptr;
};

// Field resolution over one member; sema guarantees existence/uniqueness, so
// a miss simply returns found=false and the caller keeps scanning.
AccessPath concretize(const AccessPath& prefix, const Member& member, const std::string& field,
                      const std::string& variant, ConcretizeCtx& ctx);

// Resolution across the whole layout.
AccessPath resolve_field(const MemoryPlan& plan, const std::string& field,
                         const std::string& variant);

// ---------------------------------------------------------------------------
// Specialization
// ---------------------------------------------------------------------------

struct CompileOptions {
  int opt_level = 0;
  uint32_t stack_depth = 64;
  bool lower_stack = true;
};

struct SpecializeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Destructor specialization: every traversal function taking ADT values
// becomes an IR entry whose matches are branches over concretized
// discriminants. Non-recursive helper calls are inlined.
void specialize_destructors(Program& module, const MemoryPlan& plan, LoweredProgram& out);

// Constructor specialization: emits the count pass, the index-assignment
// bookkeeping, the optional root block, and the recursive emit pass.
void specialize_constructors(Program& module, const BuildSpec& build, const MemoryPlan& plan,
                             LoweredProgram& out);

// Recursion -> explicit bounded stack for self-recursive entries (skips
// functions marked [recursive]).
void lower_recursion_to_stack(LoweredProgram& program, uint32_t stack_depth);

// Full pipeline: plan must correspond to (adt, layout); build may be null
// when only destructors are needed.
LoweredProgram compile_program(Program& module, const LayoutSpec& layout, const BuildSpec* build,
                               const MemoryPlan& plan, const CompileOptions& opts);

}  // namespace layoutc
