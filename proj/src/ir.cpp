#include "layoutc/ir.hpp"

#include <sstream>

#include "json.hpp"
#include "layoutc/sema.hpp"

namespace layoutc {

using nlohmann::json;

namespace {

const char* op_name(IrOp op) {
  switch (op) {
    case IrOp::ConstI: return "consti";
    case IrOp::ConstF: return "constf";
    case IrOp::ConstB: return "constb";
    case IrOp::ReadVar: return "var";
    case IrOp::LoadSlot: return "load_slot";
    case IrOp::LoadGlobal: return "load_global";
    case IrOp::LoadElem: return "load_elem";
    case IrOp::Bin: return "bin";
    case IrOp::Un: return "un";
    case IrOp::Intrin: return "intrin";
    case IrOp::CallF: return "call";
    case IrOp::MakeAgg: return "agg";
    case IrOp::GetElem: return "get";
    case IrOp::IndexDyn: return "index";
    case IrOp::BitExtract: return "bits";
    case IrOp::CastVal: return "as";
    case IrOp::CastBits: return "to";
    case IrOp::OptNone: return "none";
    case IrOp::OptSome: return "some";
    case IrOp::OptHas: return "has";
    case IrOp::OptVal: return "val";
    case IrOp::MakeSlice: return "slice";
    case IrOp::NodeIndex: return "node_index";
    case IrOp::LogVariant: return "log_variant";
    case IrOp::LogField: return "log_field";
    case IrOp::LogChild: return "log_child";
    case IrOp::LogChildNull: return "log_child_null";
    case IrOp::LogLen: return "log_len";
    case IrOp::Append: return "append";
  }
  return "?";
}

const char* stmt_name(IrStmtKind k) {
  switch (k) {
    case IrStmtKind::Assign: return "assign";
    case IrStmtKind::AssignLane: return "assign_lane";
    case IrStmtKind::AssignBits: return "assign_bits";
    case IrStmtKind::Eval: return "eval";
    case IrStmtKind::If: return "if";
    case IrStmtKind::ForRange: return "for_range";
    case IrStmtKind::ForSlice: return "for_slice";
    case IrStmtKind::ForVec: return "for_vec";
    case IrStmtKind::Return: return "return";
    case IrStmtKind::Call: return "call";
    case IrStmtKind::SetInsert: return "set_insert";
    case IrStmtKind::StoreSlot: return "store_slot";
    case IrStmtKind::StoreGlobal: return "store_global";
    case IrStmtKind::BumpCount: return "bump_count";
    case IrStmtKind::AssignNode: return "assign_node";
    case IrStmtKind::StackPush: return "stack_push";
    case IrStmtKind::StackLoop: return "stack_loop";
    case IrStmtKind::Trap: return "trap";
  }
  return "?";
}

// ---- SemType <-> json ------------------------------------------------------

json type_to_json(const SemTypePtr& t);

json type_to_json_ref(const SemType& t) {
  json j;
  j["k"] = static_cast<int>(t.kind);
  if (t.width) j["w"] = t.width;
  if (t.is_signed) j["s"] = true;
  if (t.lanes) j["n"] = t.lanes;
  if (!t.len_field.empty()) j["lf"] = t.len_field;
  if (!t.name.empty()) j["nm"] = t.name;
  if (t.elem) j["e"] = type_to_json(t.elem);
  if (!t.members.empty()) {
    json ms = json::array();
    for (const auto& m : t.members) ms.push_back(type_to_json(m));
    j["ms"] = ms;
  }
  return j;
}

json type_to_json(const SemTypePtr& t) {
  if (!t) return nullptr;
  return type_to_json_ref(*t);
}

SemTypePtr type_from_json(const json& j) {
  if (j.is_null()) return nullptr;
  auto t = std::make_shared<SemType>();
  t->kind = static_cast<TypeKind>(j.at("k").get<int>());
  if (j.contains("w")) t->width = j["w"].get<uint32_t>();
  if (j.contains("s")) t->is_signed = j["s"].get<bool>();
  if (j.contains("n")) t->lanes = j["n"].get<uint32_t>();
  if (j.contains("lf")) t->len_field = j["lf"].get<std::string>();
  if (j.contains("nm")) t->name = j["nm"].get<std::string>();
  if (j.contains("e")) t->elem = type_from_json(j["e"]);
  if (j.contains("ms"))
    for (const auto& m : j["ms"]) t->members.push_back(type_from_json(m));
  return t;
}

void expr_str(const LoweredProgram& p, const IrFunc& f, int id, std::ostream& os) {
  const IrExpr& e = f.exprs[static_cast<size_t>(id)];
  switch (e.op) {
    case IrOp::ConstI: os << e.u0; return;
    case IrOp::ConstF: os << e.f0 << 'f'; return;
    case IrOp::ConstB: os << (e.u0 ? "true" : "false"); return;
    case IrOp::ReadVar: os << '%' << f.local_names[static_cast<size_t>(e.i0)] << e.i0; return;
    case IrOp::Bin: {
      os << '(';
      expr_str(p, f, e.args[0], os);
      os << ' ' << binop_name(static_cast<BinOp>(e.i0)) << ' ';
      expr_str(p, f, e.args[1], os);
      os << ')';
      return;
    }
    case IrOp::LoadSlot: {
      os << "load(b" << e.i0 << ".s" << e.i1 << "@" << e.u0 << ":" << e.u1 << ", ";
      expr_str(p, f, e.args[0], os);
      os << ')';
      return;
    }
    case IrOp::LoadGlobal: os << "global(" << p.str(e.u0) << ')'; return;
    case IrOp::GetElem: {
      expr_str(p, f, e.args[0], os);
      os << '.' << e.u0;
      return;
    }
    default: {
      os << op_name(e.op);
      if (e.op == IrOp::Intrin) os << ':' << intrinsic_name(static_cast<Intrinsic>(e.i0));
      if (e.op == IrOp::CallF) os << ':' << p.funcs[static_cast<size_t>(e.i0)].name;
      if (e.op == IrOp::LogField || e.op == IrOp::LogChild || e.op == IrOp::LogLen ||
          e.op == IrOp::LogChildNull || e.op == IrOp::Append)
        os << ':' << p.str(e.u0);
      os << '(';
      for (size_t i = 0; i < e.args.size(); i++) {
        if (i) os << ", ";
        expr_str(p, f, e.args[i], os);
      }
      os << ')';
      return;
    }
  }
}

void block_str(const LoweredProgram& p, const IrFunc& f, const std::vector<int>& block,
               int indent, std::ostream& os);

void stmt_str(const LoweredProgram& p, const IrFunc& f, int id, int indent, std::ostream& os) {
  const IrStmt& s = f.stmts[static_cast<size_t>(id)];
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  os << pad;
  switch (s.kind) {
    case IrStmtKind::Assign:
      os << '%' << f.local_names[static_cast<size_t>(s.var)] << s.var << " = ";
      expr_str(p, f, s.e0, os);
      os << '\n';
      return;
    case IrStmtKind::If: {
      bool first = true;
      for (const auto& c : s.clauses) {
        os << (first ? "if " : pad + "elif ");
        first = false;
        expr_str(p, f, c.cond, os);
        os << " {\n";
        block_str(p, f, c.block, indent + 1, os);
        os << pad << "}\n";
      }
      if (!s.block.empty()) {
        os << pad << "else {\n";
        block_str(p, f, s.block, indent + 1, os);
        os << pad << "}\n";
      }
      return;
    }
    case IrStmtKind::ForRange:
    case IrStmtKind::ForSlice:
    case IrStmtKind::ForVec: {
      os << stmt_name(s.kind) << " %" << f.local_names[static_cast<size_t>(s.var)] << s.var
         << " in ";
      expr_str(p, f, s.e0, os);
      if (s.kind == IrStmtKind::ForRange) {
        os << " .. ";
        expr_str(p, f, s.e1, os);
      }
      os << " {\n";
      block_str(p, f, s.block, indent + 1, os);
      os << pad << "}\n";
      return;
    }
    case IrStmtKind::StackLoop: {
      os << "stack_loop %" << f.local_names[static_cast<size_t>(s.var)] << s.var << " {\n";
      block_str(p, f, s.block, indent + 1, os);
      os << pad << "}\n";
      return;
    }
    default: {
      os << stmt_name(s.kind);
      if (s.kind == IrStmtKind::Call) os << ' ' << p.funcs[static_cast<size_t>(s.i0)].name;
      if (s.kind == IrStmtKind::StoreSlot) os << " b" << s.i0 << ".s" << s.i1 << '@' << s.u0;
      if (s.kind == IrStmtKind::StoreGlobal || s.kind == IrStmtKind::Trap)
        os << ' ' << p.str(s.u0);
      if (s.var >= 0 && s.kind != IrStmtKind::Call)
        os << " %" << f.local_names[static_cast<size_t>(s.var)] << s.var;
      if (s.e0 >= 0) {
        os << " [";
        expr_str(p, f, s.e0, os);
        os << ']';
      }
      if (s.e1 >= 0) {
        os << " <- ";
        expr_str(p, f, s.e1, os);
      }
      for (int a : s.args) {
        os << ' ';
        expr_str(p, f, a, os);
      }
      os << '\n';
      return;
    }
  }
}

void block_str(const LoweredProgram& p, const IrFunc& f, const std::vector<int>& block,
               int indent, std::ostream& os) {
  for (int id : block) stmt_str(p, f, id, indent, os);
}

}  // namespace

std::string print_ir_func(const LoweredProgram& p, const IrFunc& f) {
  std::ostringstream os;
  os << "func " << f.name << '(';
  for (size_t i = 0; i < f.params.size(); i++) {
    if (i) os << ", ";
    os << f.params[i].name << (f.params[i].is_mut ? ": mut " : ": ")
       << type_to_string(*f.local_types[static_cast<size_t>(f.params[i].local)]);
  }
  os << ")";
  if (f.stack_lowered) os << " [stack]";
  os << " {\n";
  block_str(p, f, f.body, 1, os);
  os << "}\n";
  return os.str();
}

std::string print_ir(const LoweredProgram& p) {
  std::ostringstream os;
  os << "; layout " << p.plan.layout_name << " over " << p.plan.adt_name << '\n';
  for (const auto& f : p.funcs) os << print_ir_func(p, f) << '\n';
  return os.str();
}

// ---- op counting ------------------------------------------------------------

OpCounts count_ops(const IrFunc& f) {
  OpCounts c;
  for (const auto& e : f.exprs) {
    if (e.op == IrOp::LoadSlot) c.load_slots++;
    switch (e.op) {
      case IrOp::Bin:
      case IrOp::Un:
      case IrOp::Intrin:
      case IrOp::BitExtract:
      case IrOp::CastVal:
      case IrOp::CastBits:
        c.pure_ops++;
        break;
      default:
        break;
    }
  }
  c.stmts = f.stmts.size();
  return c;
}

// ---- serialization ------------------------------------------------------------

namespace {

json expr_to_json(const IrExpr& e) {
  json j;
  j["op"] = static_cast<int>(e.op);
  if (e.i0) j["i0"] = e.i0;
  if (e.i1) j["i1"] = e.i1;
  if (e.u0) j["u0"] = e.u0;
  if (e.u1) j["u1"] = e.u1;
  if (e.f0 != 0) j["f0"] = e.f0;
  if (e.op == IrOp::ConstF) j["f0"] = e.f0;  // keep zero floats explicit
  if (!e.args.empty()) j["a"] = e.args;
  j["t"] = type_to_json(e.type);
  return j;
}

IrExpr expr_from_json(const json& j) {
  IrExpr e;
  e.op = static_cast<IrOp>(j.at("op").get<int>());
  if (j.contains("i0")) e.i0 = j["i0"].get<int>();
  if (j.contains("i1")) e.i1 = j["i1"].get<int>();
  if (j.contains("u0")) e.u0 = j["u0"].get<uint64_t>();
  if (j.contains("u1")) e.u1 = j["u1"].get<uint64_t>();
  if (j.contains("f0")) e.f0 = j["f0"].get<double>();
  if (j.contains("a")) e.args = j["a"].get<std::vector<int>>();
  if (j.contains("t")) e.type = type_from_json(j["t"]);
  return e;
}

json stmt_to_json(const IrStmt& s) {
  json j;
  j["k"] = static_cast<int>(s.kind);
  if (s.var >= 0) j["v"] = s.var;
  if (s.e0 >= 0) j["e0"] = s.e0;
  if (s.e1 >= 0) j["e1"] = s.e1;
  if (s.i0) j["i0"] = s.i0;
  if (s.i1) j["i1"] = s.i1;
  if (s.u0) j["u0"] = s.u0;
  if (s.u1) j["u1"] = s.u1;
  if (!s.args.empty()) j["a"] = s.args;
  if (!s.block.empty()) j["b"] = s.block;
  if (!s.clauses.empty()) {
    json cs = json::array();
    for (const auto& c : s.clauses) {
      json cj;
      cj["c"] = c.cond;
      cj["b"] = c.block;
      cs.push_back(cj);
    }
    j["cs"] = cs;
  }
  return j;
}

IrStmt stmt_from_json(const json& j) {
  IrStmt s;
  s.kind = static_cast<IrStmtKind>(j.at("k").get<int>());
  if (j.contains("v")) s.var = j["v"].get<int>();
  if (j.contains("e0")) s.e0 = j["e0"].get<int>();
  if (j.contains("e1")) s.e1 = j["e1"].get<int>();
  if (j.contains("i0")) s.i0 = j["i0"].get<int>();
  if (j.contains("i1")) s.i1 = j["i1"].get<int>();
  if (j.contains("u0")) s.u0 = j["u0"].get<uint64_t>();
  if (j.contains("u1")) s.u1 = j["u1"].get<uint64_t>();
  if (j.contains("a")) s.args = j["a"].get<std::vector<int>>();
  if (j.contains("b")) s.block = j["b"].get<std::vector<int>>();
  if (j.contains("cs")) {
    for (const auto& cj : j["cs"]) {
      IrIfClause c;
      c.cond = cj.at("c").get<int>();
      c.block = cj.at("b").get<std::vector<int>>();
      s.clauses.push_back(std::move(c));
    }
  }
  return s;
}

json func_to_json(const IrFunc& f) {
  json j;
  j["name"] = f.name;
  j["entry"] = f.is_entry;
  j["recursive"] = f.recursive_attr;
  j["stack"] = f.stack_lowered;
  j["ret"] = type_to_json(f.return_type);
  json params = json::array();
  for (const auto& p : f.params) {
    json pj;
    pj["n"] = p.name;
    pj["t"] = type_to_json(p.dsl_type);
    pj["adt"] = p.is_adt;
    pj["mut"] = p.is_mut;
    pj["l"] = p.local;
    params.push_back(pj);
  }
  j["params"] = params;
  json locals = json::array();
  for (size_t i = 0; i < f.local_types.size(); i++) {
    json lj;
    lj["n"] = f.local_names[i];
    lj["t"] = type_to_json(f.local_types[i]);
    locals.push_back(lj);
  }
  j["locals"] = locals;
  json exprs = json::array();
  for (const auto& e : f.exprs) exprs.push_back(expr_to_json(e));
  j["exprs"] = exprs;
  json stmts = json::array();
  for (const auto& s : f.stmts) stmts.push_back(stmt_to_json(s));
  j["stmts"] = stmts;
  j["body"] = f.body;
  return j;
}

IrFunc func_from_json(const json& j) {
  IrFunc f;
  f.name = j.at("name").get<std::string>();
  f.is_entry = j.at("entry").get<bool>();
  f.recursive_attr = j.at("recursive").get<bool>();
  f.stack_lowered = j.at("stack").get<bool>();
  f.return_type = type_from_json(j.at("ret"));
  for (const auto& pj : j.at("params")) {
    IrParamInfo p;
    p.name = pj.at("n").get<std::string>();
    p.dsl_type = type_from_json(pj.at("t"));
    p.is_adt = pj.at("adt").get<bool>();
    p.is_mut = pj.at("mut").get<bool>();
    p.local = pj.at("l").get<int>();
    f.params.push_back(std::move(p));
  }
  for (const auto& lj : j.at("locals")) {
    f.local_names.push_back(lj.at("n").get<std::string>());
    f.local_types.push_back(type_from_json(lj.at("t")));
  }
  for (const auto& ej : j.at("exprs")) f.exprs.push_back(expr_from_json(ej));
  for (const auto& sj : j.at("stmts")) f.stmts.push_back(stmt_from_json(sj));
  f.body = j.at("body").get<std::vector<int>>();
  return f;
}

json buffer_to_json(const BufferDesc& b) {
  json j;
  j["id"] = b.id;
  j["name"] = b.name;
  j["arena"] = b.is_arena;
  j["global_array"] = b.is_global_array;
  j["align"] = b.align_bytes;
  j["count"] = b.count_name;
  j["count_internal"] = b.count_is_internal;
  j["elem"] = type_to_json(b.elem_type);
  json segs = json::array();
  for (const auto& s : b.segments) {
    json sj;
    sj["bits"] = s.stride_bits;
    sj["bytes"] = s.stride_bytes;
    sj["tile"] = s.tile;
    sj["block"] = s.block_bytes;
    segs.push_back(sj);
  }
  j["segments"] = segs;
  return j;
}

BufferDesc buffer_from_json(const json& j) {
  BufferDesc b;
  b.id = j.at("id").get<int>();
  b.name = j.at("name").get<std::string>();
  b.is_arena = j.at("arena").get<bool>();
  b.is_global_array = j.at("global_array").get<bool>();
  b.align_bytes = j.at("align").get<uint32_t>();
  b.count_name = j.at("count").get<std::string>();
  b.count_is_internal = j.at("count_internal").get<bool>();
  b.elem_type = type_from_json(j.at("elem"));
  for (const auto& sj : j.at("segments")) {
    SegmentDesc s;
    s.stride_bits = sj.at("bits").get<uint64_t>();
    s.stride_bytes = sj.at("bytes").get<uint64_t>();
    s.tile = sj.at("tile").get<uint64_t>();
    s.block_bytes = sj.at("block").get<uint64_t>();
    b.segments.push_back(s);
  }
  return b;
}

}  // namespace

std::string program_to_json(const LoweredProgram& p) {
  json j;
  j["format"] = "layoutc-ir";
  j["version"] = 1;
  json plan;
  plan["layout"] = p.plan.layout_name;
  plan["adt"] = p.plan.adt_name;
  json bufs = json::array();
  for (const auto& b : p.plan.buffers) bufs.push_back(buffer_to_json(b));
  plan["buffers"] = bufs;
  json globals = json::array();
  for (const auto& g : p.plan.globals) {
    json gj;
    gj["name"] = g.name;
    gj["t"] = type_to_json(g.type);
    gj["inferred"] = g.inferred;
    globals.push_back(gj);
  }
  plan["globals"] = globals;
  json comps = json::array();
  for (const auto& c : p.plan.components) {
    json cj;
    cj["name"] = c.name;
    cj["t"] = type_to_json(c.type);
    cj["has_default"] = c.has_default;
    cj["default"] = c.default_bits;
    comps.push_back(cj);
  }
  plan["components"] = comps;
  plan["variant_home"] = p.plan.variant_home;
  plan["variant_order"] = p.plan.variant_order;
  j["plan"] = plan;
  j["order"] = p.order == BuildOrder::Pre ? "pre" : "post";
  j["stack_depth"] = p.stack_depth;
  j["entries"] = p.entries;
  j["count_func"] = p.count_func;
  j["emit_func"] = p.emit_func;
  j["root_func"] = p.root_func;
  j["strings"] = p.strings;
  json funcs = json::array();
  for (const auto& f : p.funcs) funcs.push_back(func_to_json(f));
  j["funcs"] = funcs;
  return j.dump();
}

LoweredProgram program_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.at("format").get<std::string>() != "layoutc-ir" || j.at("version").get<int>() != 1)
    throw InternalError("unsupported program format");
  LoweredProgram p;
  const json& plan = j.at("plan");
  p.plan.layout_name = plan.at("layout").get<std::string>();
  p.plan.adt_name = plan.at("adt").get<std::string>();
  for (const auto& bj : plan.at("buffers")) {
    BufferDesc b = buffer_from_json(bj);
    p.plan.buffer_by_name[b.name] = b.id;
    p.plan.buffers.push_back(std::move(b));
  }
  for (const auto& gj : plan.at("globals")) {
    GlobalDesc g;
    g.name = gj.at("name").get<std::string>();
    g.type = type_from_json(gj.at("t"));
    g.inferred = gj.at("inferred").get<bool>();
    p.plan.globals.push_back(std::move(g));
  }
  for (const auto& cj : plan.at("components")) {
    IrRefComponent c;
    c.name = cj.at("name").get<std::string>();
    c.type = type_from_json(cj.at("t"));
    c.has_default = cj.at("has_default").get<bool>();
    c.default_bits = cj.at("default").get<uint64_t>();
    p.plan.components.push_back(std::move(c));
  }
  p.plan.variant_home = plan.at("variant_home").get<std::map<std::string, int>>();
  p.plan.variant_order = plan.at("variant_order").get<std::vector<std::string>>();
  p.order = j.at("order").get<std::string>() == "pre" ? BuildOrder::Pre : BuildOrder::Post;
  p.stack_depth = j.at("stack_depth").get<uint32_t>();
  p.entries = j.at("entries").get<std::map<std::string, int>>();
  p.count_func = j.at("count_func").get<int>();
  p.emit_func = j.at("emit_func").get<int>();
  p.root_func = j.at("root_func").get<int>();
  p.strings = j.at("strings").get<std::vector<std::string>>();
  for (size_t i = 0; i < p.strings.size(); i++) p.string_ids[p.strings[i]] = static_cast<int>(i);
  for (const auto& fj : j.at("funcs")) p.funcs.push_back(func_from_json(fj));
  return p;
}

}  // namespace layoutc
