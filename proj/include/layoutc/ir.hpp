#pragma once

#include <map>
#include <string>
#include <vector>

#include "layoutc/plan.hpp"

namespace layoutc {

// ---------------------------------------------------------------------------
// Imperative IR: loads, stores, arithmetic, branches, loops, explicit stack
// operations. Programs contain no `match` and no logical field names; every
// access is a slot операция or a derivation over prior bindings.
// ---------------------------------------------------------------------------

enum class IrOp {
  ConstI,      // u0 = raw bits (type gives width/signedness)
  ConstF,      // f0
  ConstB,      // u0 = 0/1
  ReadVar,     // i0 = local slot
  LoadSlot,    // i0 = buffer, i1 = segment, u0 = bit offset, u1 = field width,
               // args = {index expr, handle expr}
  LoadGlobal,  // u0 = name id, args = {handle expr}
  LoadElem,    // i0 = buffer, args = {index expr, handle expr}; type = element
  Bin,         // i0 = BinOp, args = {lhs, rhs}
  Un,          // i0 = UnOp, args = {operand}
  Intrin,      // i0 = Intrinsic, args
  CallF,       // i0 = function index, args (builder recursion / uninlined)
  MakeAgg,     // args = elements (tuples, records, vectors, references)
  GetElem,     // u0 = element index, args = {agg}
  IndexDyn,    // args = {agg, index}
  BitExtract,  // u0 = lo, u1 = hi, args = {operand}
  CastVal,     // value conversion; type = target, args = {operand}
  CastBits,    // bit reinterpretation; type = target, args = {operand}
  OptNone,     // none of type
  OptSome,     // args = {value}
  OptHas,      // args = {option} -> bool
  OptVal,      // args = {option} -> payload (runtime checked)
  MakeSlice,   // i0 = buffer, args = {begin, len, handle}
  NodeIndex,   // args = {node}; assigned element index / arena byte offset
  LogVariant,  // args = {node} -> u32 variant tag
  LogField,    // u0 = field name id, args = {node}
  LogChild,    // u0 = field name id, u1 = lane, args = {node} -> node handle
  LogChildNull,// u0 = field name id, u1 = lane, args = {node} -> bool (SENTINEL)
  LogLen,      // u0 = field name id, args = {node} -> element count
  Append,      // i0 = buffer, u0 = field name id, args = {node, count expr};
               // impure: copies elements, returns the starting position
};

enum class IrStmtKind {
  Assign,       // var = e0
  AssignLane,   // var[e0] = e1
  AssignBits,   // var[u0:u1] = e1
  Eval,         // e0 for side effects
  If,           // clauses + else_block
  ForRange,     // var in [e0, e1) { body }
  ForSlice,     // var over slice e0 { body }
  ForVec,       // var over aggregate e0 { body }
  Return,       // e0 (optional, -1)
  Call,         // void call: i0 = function, args
  SetInsert,    // var .insert(e1)
  StoreSlot,    // i0 = buffer, i1 = segment, u0 = offset, u1 = width,
                // e0 = index, e1 = value
  StoreGlobal,  // u0 = name id, e1 = value
  BumpCount,    // i0 = buffer, e1 = amount (count pass)
  AssignNode,   // i0 = home buffer (-1 = none), e0 = node (index assignment)
  StackPush,    // e0 = reference value
  StackLoop,    // var = popped reference; body (runs until the stack empties)
  Trap,         // u0 = message id
};

struct IrExpr {
  IrOp op;
  SemTypePtr type;
  int i0 = 0, i1 = 0;
  uint64_t u0 = 0, u1 = 0;
  double f0 = 0;
  std::vector<int> args;
};

struct IrIfClause {
  int cond = -1;
  std::vector<int> block;
};

struct IrStmt {
  IrStmtKind kind;
  int var = -1;
  int e0 = -1, e1 = -1;
  int i0 = 0, i1 = 0;
  uint64_t u0 = 0, u1 = 0;
  std::vector<int> args;
  std::vector<IrIfClause> clauses;
  std::vector<int> block;   // else / loop body
};

struct IrParamInfo {
  std::string name;
  SemTypePtr dsl_type;
  bool is_adt = false;
  bool is_mut = false;
  int local = -1;  // local slot holding the value (references are aggregates)
};

struct IrFunc {
  std::string name;
  bool is_entry = false;
  bool recursive_attr = false;  // marked [recursive]: never stack-lowered
  bool stack_lowered = false;
  SemTypePtr return_type;
  std::vector<IrParamInfo> params;
  std::vector<SemTypePtr> local_types;
  std::vector<std::string> local_names;
  std::vector<IrExpr> exprs;
  std::vector<IrStmt> stmts;
  std::vector<int> body;

  int add_local(const std::string& n, SemTypePtr t) {
    local_names.push_back(n);
    local_types.push_back(std::move(t));
    return static_cast<int>(local_types.size()) - 1;
  }
  int add_expr(IrExpr e) {
    exprs.push_back(std::move(e));
    return static_cast<int>(exprs.size()) - 1;
  }
  int add_stmt(IrStmt s) {
    stmts.push_back(std::move(s));
    return static_cast<int>(stmts.size()) - 1;
  }
};

// Reference component description carried by the compiled program.
struct IrRefComponent {
  std::string name;
  SemTypePtr type;
  bool has_default = false;
  uint64_t default_bits = 0;  // constant default (integer components)
};

// Self-contained snapshot of the memory plan (no AST pointers).
struct PlanInfo {
  std::string layout_name;
  std::string adt_name;
  std::vector<BufferDesc> buffers;
  std::vector<GlobalDesc> globals;
  std::vector<IrRefComponent> components;
  std::map<std::string, int> variant_home;      // variant -> buffer (-1 none)
  std::vector<std::string> variant_order;       // ADT declaration order
  std::map<std::string, int> buffer_by_name;

  const BufferDesc* buffer_named(const std::string& n) const {
    auto it = buffer_by_name.find(n);
    return it == buffer_by_name.end() ? nullptr : &buffers[static_cast<size_t>(it->second)];
  }
};

struct LoweredProgram {
  PlanInfo plan;
  BuildOrder order = BuildOrder::Pre;
  std::vector<IrFunc> funcs;
  std::map<std::string, int> entries;  // traversal entry points
  int count_func = -1;                 // recursive count pass
  int emit_func = -1;                  // recursive emit pass
  int root_func = -1;                  // root block (-1 if none)
  uint32_t stack_depth = 64;
  std::vector<std::string> strings;    // interned names (fields, globals, msgs)
  std::map<std::string, int> string_ids;

  int intern(const std::string& s) {
    auto it = string_ids.find(s);
    if (it != string_ids.end()) return it->second;
    strings.push_back(s);
    int id = static_cast<int>(strings.size()) - 1;
    string_ids.emplace(s, id);
    return id;
  }
  const std::string& str(uint64_t id) const { return strings.at(static_cast<size_t>(id)); }
  const IrFunc* entry(const std::string& name) const {
    auto it = entries.find(name);
    return it == entries.end() ? nullptr : &funcs[static_cast<size_t>(it->second)];
  }
};

// Textual dump (--emit-ir).
std::string print_ir(const LoweredProgram& p);
std::string print_ir_func(const LoweredProgram& p, const IrFunc& f);

// Versioned JSON serialization (the `compile` artifact).
std::string program_to_json(const LoweredProgram& p);
LoweredProgram program_from_json(const std::string& text);

// Static operation counts (optimizer monotonicity checks).
struct OpCounts {
  uint64_t load_slots = 0;
  uint64_t pure_ops = 0;
  uint64_t stmts = 0;
};
OpCounts count_ops(const IrFunc& f);

}  // namespace layoutc
