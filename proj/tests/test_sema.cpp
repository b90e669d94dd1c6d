#include <algorithm>
#include <string>

#include "doctest.h"
#include "layoutc/corpus.hpp"
#include "layoutc/parser.hpp"
#include "layoutc/sema.hpp"
#include "paper_sources.hpp"

using namespace layoutc;

namespace {

Program parse_ok(std::vector<const char*> sources) {
  SourceSet ss;
  for (size_t i = 0; i < sources.size(); i++) ss.add("src" + std::to_string(i), sources[i]);
  ParseResult r = parse_sources(ss);
  if (!r.ok())
    for (auto& d : r.diags) FAIL(format_diagnostic(ss, d));
  return std::move(r.program);
}

bool has_code(const std::vector<Diagnostic>& ds, DiagCode c) {
  return std::any_of(ds.begin(), ds.end(), [&](const Diagnostic& d) { return d.code == c; });
}

std::string dump(const std::vector<Diagnostic>& ds) {
  std::string s;
  SourceSet empty;
  for (const auto& d : ds) s += format_diagnostic(empty, d) + "\n";
  return s;
}

}  // namespace

TEST_CASE("count_paths on the LinearBVH layout") {
  Program p = parse_ok({testsrc::kClosestHit, testsrc::kPbrtLayout});
  const LayoutSpec* l = p.find_layout("LinearBVH");
  REQUIRE(l);

  PathCountCtx ctx;
  CHECK(count_paths_seq(l->members, "bounds", "Interior", ctx) == 1);
  CHECK(!ctx.ambiguous);

  PathCountCtx ctx2;
  CHECK(count_paths_seq(l->members, "left", "Leaf", ctx2) == 0);

  PathCountCtx ctx3;
  CHECK(count_paths_seq(l->members, "left", "Interior", ctx3) == 1);

  // Duplicate field declarations make the path ambiguous.
  Program dup = parse_ok({"layout L(I: u32) { group g[size=4] by I { x: u8; x: u8; }; };"});
  PathCountCtx ctx4;
  count_paths_seq(dup.layouts[0].members, "x", "Any", ctx4);
  CHECK(ctx4.ambiguous);
}

TEST_CASE("check_layout accepts the worked PBRT pairing") {
  Program p = parse_ok({testsrc::kClosestHit, testsrc::kPbrtLayout});
  const AdtDecl* adt = p.find_type("BVH");
  REQUIRE(adt);
  auto diags = check_layout(*adt, p.layouts[0], p);
  CHECK_MESSAGE(diags.empty(), dump(diags));
}

TEST_CASE("deleting the interior arm breaks exhaustiveness and field mapping") {
  std::string layout = testsrc::kPbrtLayout;
  size_t pos = layout.find("0 -> Interior {");
  REQUIRE(pos != std::string::npos);
  size_t end = layout.find("};", pos);
  layout.erase(pos, end - pos + 2);
  SourceSet ss;
  ss.add("types", testsrc::kClosestHit);
  ss.add("layout", layout);
  ParseResult r = parse_sources(ss);
  REQUIRE(r.ok());
  auto diags = check_layout(*r.program.find_type("BVH"), r.program.layouts[0], r.program);
  CHECK(has_code(diags, DiagCode::NonExhaustiveSplit));
  CHECK(has_code(diags, DiagCode::MissingField));
  int missing = 0;
  for (auto& d : diags)
    if (d.code == DiagCode::MissingField) missing++;
  CHECK(missing >= 2);  // left and right both unmapped
}

TEST_CASE("cyclic derivations are rejected") {
  Program p = parse_ok({
      "type T(q: u8) = A(x: u32) | B(y: u32);",
      "layout T(I: u32) { N: u32; group g[size=N] by I { q: u8; a = b; b = a; x: u32;"
      " split q { 0 -> A { }; _ -> B { y: u32; }; }; }; };"});
  auto diags = check_layout(*p.find_type("T"), p.layouts[0], p);
  CHECK(has_code(diags, DiagCode::CyclicDerive));
}

TEST_CASE("the approx pattern is parsed but rejected") {
  Program p = parse_ok({
      "type T(q: u8) = A(x: u32) | B(x: u32);",
      "layout T(I: u32) { N: u32; group g[size=N] by I { q: u8; x: u32;"
      " split q { ~ 3 -> A { }; _ -> B { }; }; }; };"});
  auto diags = check_layout(*p.find_type("T"), p.layouts[0], p);
  CHECK(has_code(diags, DiagCode::UnsupportedPattern));
}

TEST_CASE("check_build accepts the PBRT build") {
  Program p = parse_ok({testsrc::kClosestHit, testsrc::kPbrtLayout, testsrc::kPbrtBuild});
  const AdtDecl* adt = p.find_type("BVH");
  auto ld = check_layout(*adt, p.layouts[0], p);
  REQUIRE(ld.empty());
  auto diags = check_build(*adt, p.layouts[0], p.builds[0], p);
  CHECK_MESSAGE(diags.empty(), dump(diags));
}

TEST_CASE("removing a build statement yields UnbuiltField") {
  std::string build = testsrc::kPbrtBuild;
  size_t pos = build.find("build nprims = 0;");
  REQUIRE(pos != std::string::npos);
  build.erase(pos, std::string("build nprims = 0;").size());
  SourceSet ss;
  ss.add("types", testsrc::kClosestHit);
  ss.add("layout", testsrc::kPbrtLayout);
  ss.add("build", build);
  ParseResult r = parse_sources(ss);
  REQUIRE(r.ok());
  const AdtDecl* adt = r.program.find_type("BVH");
  auto diags = check_build(*adt, r.program.layouts[0], r.program.builds[0], r.program);
  CHECK(has_code(diags, DiagCode::UnbuiltField));
  bool found = false;
  for (auto& d : diags)
    if (d.code == DiagCode::UnbuiltField && d.message.find("nprims") != std::string::npos)
      found = true;
  CHECK(found);
}

TEST_CASE("shared-slab build without root initialization is rejected") {
  std::string src = read_text_file(corpus_dir() + "/layouts/shared_slab.scion");
  size_t pos = src.find("build root { build plo = low; build phi = high; };");
  REQUIRE(pos != std::string::npos);
  src.erase(pos, std::string("build root { build plo = low; build phi = high; };").size());
  SourceSet ss;
  ss.add("geometry", read_text_file(corpus_dir() + "/lib/geometry.scion"));
  ss.add("layout", src);
  ParseResult r = parse_sources(ss);
  REQUIRE(r.ok());
  const AdtDecl* adt = r.program.find_type("BVH");
  auto ld = check_layout(*adt, r.program.layouts[0], r.program);
  REQUIRE_MESSAGE(ld.empty(), dump(ld));
  auto diags = check_build(*adt, r.program.layouts[0], r.program.builds[0], r.program);
  CHECK(has_code(diags, DiagCode::UninitializedTreeDep));
}

TEST_CASE("typecheck_traversal accepts the corpus closest-hit module") {
  SourceSet dummy;
  ParseResult r = parse_corpus(
      {"lib/geometry.scion", "alg/chrt.scion", "layouts/pbrt.scion"}, &dummy);
  REQUIRE(r.ok());
  auto diags = typecheck_traversal(r.program);
  CHECK_MESSAGE(diags.empty(), dump(diags));
}

TEST_CASE("all corpus pairings typecheck and check clean") {
  const char* algs_bvh2[] = {"chrt", "cpq", "cd"};
  for (const auto& cl : corpus_layouts()) {
    std::vector<std::string> alg_list;
    alg_list.push_back("chrt");
    if (cl.family != Family::Bvh8) {
      alg_list.push_back("cpq");
      alg_list.push_back("cd");
    }
    (void)algs_bvh2;
    for (const auto& alg : alg_list) {
      SourceSet ss;
      ParseResult r = parse_corpus(corpus_files_for_pair(cl.name, alg), &ss);
      if (!r.ok())
        for (auto& d : r.diags) FAIL(cl.name, "/", alg, ": ", format_diagnostic(ss, d));
      auto tdiags = typecheck_traversal(r.program);
      CHECK_MESSAGE(tdiags.empty(), cl.name, "/", alg, ": ", dump(tdiags));
      LayoutSpec* layout = nullptr;
      for (auto& l : r.program.layouts)
        if (r.program.find_build(l.name)) layout = &l;
      REQUIRE(layout);
      const AdtDecl* adt = layout_adt(r.program, *layout);
      REQUIRE(adt);
      auto ld = check_layout(*adt, *layout, r.program);
      CHECK_MESSAGE(ld.empty(), cl.name, ": ", dump(ld));
      BuildSpec* build = nullptr;
      for (auto& b : r.program.builds)
        if (b.name == layout->name) build = &b;
      REQUIRE(build);
      auto bd = check_build(*adt, *layout, *build, r.program);
      CHECK_MESSAGE(bd.empty(), cl.name, ": ", dump(bd));
    }
  }
}

TEST_CASE("feature zoo checks clean") {
  SourceSet ss;
  ParseResult r = parse_corpus({"lib/geometry.scion", "extras/feature_zoo.scion"}, &ss);
  if (!r.ok())
    for (auto& d : r.diags) FAIL(format_diagnostic(ss, d));
  auto tdiags = typecheck_traversal(r.program);
  CHECK_MESSAGE(tdiags.empty(), dump(tdiags));
  const AdtDecl* adt = r.program.find_type("Zoo");
  REQUIRE(adt);
  for (auto& l : r.program.layouts) {
    auto ld = check_layout(*adt, l, r.program);
    CHECK_MESSAGE(ld.empty(), l.name, ": ", dump(ld));
  }
  auto bd = check_build(*adt, *const_cast<LayoutSpec*>(r.program.find_layout("Zoo")),
                        r.program.builds[0], r.program);
  CHECK_MESSAGE(bd.empty(), dump(bd));
}

TEST_CASE("assignment to an immutable binding is rejected") {
  Program p = parse_ok({"func f() = { let x: f32 = 1; x = 2.0; }"});
  auto diags = typecheck_traversal(p);
  REQUIRE(!diags.empty());
  CHECK(diags[0].code == DiagCode::TypeMismatch);
  CHECK(diags[0].message.find("immutable") != std::string::npos);
}

TEST_CASE("bit cast width mismatch is rejected") {
  Program p = parse_ok({"func f() -> u16 = { return (1.0f32) to u16; }"});
  auto diags = typecheck_traversal(p);
  REQUIRE(!diags.empty());
  CHECK(diags[0].code == DiagCode::TypeMismatch);
}

TEST_CASE("diagnostics are deterministic") {
  std::string layout = testsrc::kPbrtLayout;
  size_t pos = layout.find("0 -> Interior {");
  size_t end = layout.find("};", pos);
  layout.erase(pos, end - pos + 2);
  std::vector<std::string> first;
  for (int i = 0; i < 3; i++) {
    SourceSet ss;
    ss.add("types", testsrc::kClosestHit);
    ss.add("layout", layout);
    ParseResult r = parse_sources(ss);
    auto diags = check_layout(*r.program.find_type("BVH"), r.program.layouts[0], r.program);
    std::vector<std::string> msgs;
    for (auto& d : diags) msgs.push_back(std::string(diag_code_name(d.code)) + ":" + d.message);
    if (i == 0) first = msgs;
    else CHECK(first == msgs);
  }
}
