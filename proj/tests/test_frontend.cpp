#include <string>

#include "doctest.h"
#include "layoutc/parser.hpp"
#include "layoutc/printer.hpp"
#include "paper_sources.hpp"

using namespace layoutc;

TEST_CASE("closest-hit module parses into ADT + function") {
  ParseResult r = parse_traversal(testsrc::kClosestHit);
  REQUIRE(r.ok());
  int adts = 0;
  for (const auto& t : r.program.types)
    if (!t.is_record()) adts++;
  CHECK(adts == 1);
  const AdtDecl* bvh = r.program.find_type("BVH");
  REQUIRE(bvh != nullptr);
  CHECK(bvh->variants.size() == 2);
  CHECK(bvh->common_fields.size() == 1);
  REQUIRE(r.program.funcs.size() == 1);
  CHECK(r.program.funcs[0].name == "closest_hit");
  CHECK(r.program.funcs[0].params.size() == 3);
  CHECK(r.program.funcs[0].params[2].is_mut);
}

TEST_CASE("empty source parses to an empty module") {
  ParseResult r = parse_traversal("");
  REQUIRE(r.ok());
  CHECK(r.program.types.empty());
  CHECK(r.program.funcs.empty());
}

TEST_CASE("duplicate variant names rejected") {
  ParseResult r = parse_traversal("type T = A() | A();");
  REQUIRE(!r.ok());
  CHECK(r.diags[0].code == DiagCode::DuplicateName);
}

TEST_CASE("LinearBVH layout shape") {
  SourceSet ss;
  ss.add("types.scion", testsrc::kClosestHit);
  ss.add("layout.scion", testsrc::kPbrtLayout);
  ParseResult r = parse_sources(ss);
  REQUIRE(r.ok());
  const LayoutSpec* l = r.program.find_layout("LinearBVH");
  REQUIRE(l != nullptr);
  REQUIRE(l->reference_params.size() == 1);
  CHECK(l->reference_params[0].name == "I");
  CHECK(l->reference_params[0].type->kind == TypeKind::Int);
  CHECK(l->reference_params[0].type->width == 32);
  // 3 global members then the node group.
  REQUIRE(l->members.size() == 4);
  CHECK(l->members[0]->kind == MemberKind::StoredField);
  CHECK(l->members[1]->kind == MemberKind::StoredField);
  CHECK(l->members[2]->kind == MemberKind::StoredField);
  const Member& g = *l->members[3];
  CHECK(g.kind == MemberKind::Group);
  CHECK(!g.indirect);
  CHECK(g.index_binding == "I");
  CHECK(g.align_bytes == 32);
  int stored = 0, splits = 0;
  for (const auto& m : g.members) {
    if (m->kind == MemberKind::StoredField) stored++;
    if (m->kind == MemberKind::Split) splits++;
  }
  CHECK(stored == 2);
  CHECK(splits == 1);
  for (const auto& m : g.members)
    if (m->kind == MemberKind::Split) CHECK(m->arms.size() == 2);
}

TEST_CASE("bvh8 compressed-index layout shape") {
  ParseResult r = parse_layout(testsrc::kBvh8Q8Ci);
  REQUIRE(r.ok());
  const LayoutSpec* l = r.program.find_layout("BVH");
  REQUIRE(l != nullptr);
  int indirect = 0;
  const Member* direct = nullptr;
  for (const auto& m : l->members) {
    if (m->kind == MemberKind::Group) {
      if (m->indirect) indirect++;
      else direct = m.get();
    }
  }
  CHECK(indirect == 1);
  REQUIRE(direct != nullptr);
  REQUIRE(direct->members.size() == 1);
  const Member& split = *direct->members[0];
  REQUIRE(split.kind == MemberKind::Split);
  // discriminant I[0:1]
  CHECK(split.value->kind == ExprKind::Slice);
  CHECK(split.value->base->name == "I");
  REQUIRE(split.arms.size() == 2);
  CHECK(split.arms[0].is_from);
  CHECK(split.arms[0].from_group == "Interiors");
  // default reference value on the signature
  REQUIRE(l->reference_params[0].default_value != nullptr);
}

TEST_CASE("non power-of-two alignment rejected") {
  ParseResult r = parse_layout("layout L(I: u32) { group G[align=3] by I { x: u8; }; };");
  REQUIRE(!r.ok());
  CHECK(r.diags[0].code == DiagCode::BadAttribute);
}

TEST_CASE("pbrt build parses with both builders") {
  ParseResult r = parse_build(testsrc::kPbrtBuild);
  REQUIRE(r.ok());
  const BuildSpec* b = r.program.find_build("LinearBVH");
  REQUIRE(b != nullptr);
  CHECK(b->order == BuildOrder::Pre);
  REQUIRE(b->builders.size() == 2);
  const VariantBuilder* in = b->find_builder("Interior");
  REQUIRE(in != nullptr);
  bool found_co = false;
  for (const auto& s : in->stmts) {
    if (s->kind == StmtKind::BuildField && s->name == "c_o" && s->expr &&
        s->expr->kind == ExprKind::Binary && s->expr->bin_op == BinOp::Sub) {
      if (s->expr->index->kind == ExprKind::Ident && s->expr->index->name == "R" &&
          s->expr->index2->kind == ExprKind::This)
        found_co = true;
    }
  }
  CHECK(found_co);
}

TEST_CASE("sg-eq build has a 4-statement root block") {
  SourceSet ss;
  ss.add("types.scion", testsrc::kLoHiTypes);
  ss.add("sgeq.scion", testsrc::kSgEq);
  ParseResult r = parse_sources(ss);
  REQUIRE(r.ok());
  const BuildSpec* b = r.program.find_build("BVH");
  REQUIRE(b != nullptr);
  const VariantBuilder* in = b->find_builder("Interior");
  REQUIRE(in != nullptr);
  CHECK(in->has_root);
  CHECK(in->root_block.size() == 4);
}

TEST_CASE("invalid build order rejected") {
  ParseResult r = parse_build("build B[order=mid] { build A() { return this; }; };");
  REQUIRE(!r.ok());
  CHECK(r.diags[0].code == DiagCode::BadAttribute);
}

TEST_CASE("syntax errors carry span and expectations") {
  ParseResult r = parse_traversal("type = ;");
  REQUIRE(!r.ok());
  CHECK(r.diags[0].code == DiagCode::SyntaxError);
  CHECK(r.diags[0].span.line == 1);
  CHECK(!r.diags[0].expected.empty());
}

TEST_CASE("pretty-print round trip on embedded sources") {
  // Each entry: optional prelude + source.
  std::pair<const char*, const char*> sources[] = {
      {nullptr, testsrc::kClosestHit},        {testsrc::kClosestHit, testsrc::kPbrtLayout},
      {nullptr, testsrc::kPbrtBuild},         {testsrc::kLoHiTypes, testsrc::kSgEq},
      {nullptr, testsrc::kBvh8Q8Ci},          {nullptr, testsrc::kPbrtQ16}};
  for (auto [prelude, src] : sources) {
    SourceSet ss;
    if (prelude) ss.add("prelude.scion", prelude);
    ss.add("src.scion", src);
    ParseResult a = parse_sources(ss);
    REQUIRE(a.ok());
    std::string printed = print_program(a.program);
    SourceSet ss2;
    ss2.add("printed.scion", printed);
    ParseResult b = parse_sources(ss2);
    if (!b.ok()) {
      for (auto& d : b.diags) MESSAGE(format_diagnostic(ss2, d));
      MESSAGE(printed);
    }
    REQUIRE(b.ok());
    CHECK(program_equal(a.program, b.program));
  }
}
