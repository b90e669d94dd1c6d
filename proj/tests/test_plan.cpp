#include <random>

#include "doctest.h"
#include "layoutc/bits.hpp"
#include "layoutc/corpus.hpp"
#include "layoutc/plan.hpp"
#include "layoutc/printer.hpp"
#include "paper_sources.hpp"

using namespace layoutc;

namespace {

// Independent oracle: a plain bit array with one bool per bit.
struct BitArrayOracle {
  std::vector<bool> bits;
  explicit BitArrayOracle(size_t nbytes) : bits(nbytes * 8, false) {}
  void write(uint64_t off, uint32_t width, uint64_t value) {
    for (uint32_t i = 0; i < width; i++) bits[off + i] = (value >> i) & 1;
  }
  uint64_t read(uint64_t off, uint32_t width) const {
    uint64_t v = 0;
    for (uint32_t i = 0; i < width; i++)
      if (bits[off + i]) v |= uint64_t(1) << i;
    return v;
  }
  std::vector<uint8_t> bytes() const {
    std::vector<uint8_t> out(bits.size() / 8, 0);
    for (size_t i = 0; i < bits.size(); i++)
      if (bits[i]) out[i / 8] |= uint8_t(1u << (i % 8));
    return out;
  }
};

struct PlannedCorpus {
  Program program;
  MemoryPlan plan;
};

PlannedCorpus plan_corpus(const std::string& name) {
  SourceSet ss;
  ParseResult r = parse_corpus(corpus_files_for_layout(name), &ss);
  REQUIRE(r.ok());
  PlannedCorpus out;
  out.program = std::move(r.program);
  LayoutSpec* layout = nullptr;
  for (auto& l : out.program.layouts)
    if (out.program.find_build(l.name)) layout = &l;
  REQUIRE(layout);
  const AdtDecl* adt = layout_adt(out.program, *layout);
  REQUIRE(adt);
  auto diags = check_layout(*adt, *layout, out.program);
  REQUIRE(diags.empty());
  out.plan = plan_layout(*adt, *layout, out.program);
  return out;
}

}  // namespace

TEST_CASE("bit round trips and adjacency") {
  std::vector<uint8_t> buf(16, 0);
  write_bits(buf, 5, 3, 0b101);
  CHECK(read_bits(buf, 5, 3) == 0b101);

  // Adjacent 30-bit fields with distinct patterns do not interfere.
  BitArrayOracle oracle(16);
  std::vector<uint8_t> b2(16, 0);
  uint64_t a = 0x2AAAAAAA & mask_width(30), b = 0x15555555 & mask_width(30);
  write_bits(b2, 0, 30, a);
  write_bits(b2, 30, 30, b);
  oracle.write(0, 30, a);
  oracle.write(30, 30, b);
  CHECK(read_bits(b2, 0, 30) == a);
  CHECK(read_bits(b2, 30, 30) == b);
  CHECK(b2 == oracle.bytes());

  // u28 boundary value.
  std::vector<uint8_t> b3(8, 0);
  write_bits(b3, 3, 28, (uint64_t(1) << 28) - 1);
  CHECK(read_bits(b3, 3, 28) == (uint64_t(1) << 28) - 1);

  CHECK_THROWS_AS(read_bits(b3, 60, 8), BitRangeError);
}

TEST_CASE("randomized write/read identity vs the bit-array oracle") {
  std::mt19937_64 rng(0xbeefcafe);
  const size_t nbytes = 64;
  std::vector<uint8_t> buf(nbytes, 0);
  BitArrayOracle oracle(nbytes);
  for (int iter = 0; iter < 20000; iter++) {
    uint32_t width = 1 + static_cast<uint32_t>(rng() % 64);
    uint64_t off = rng() % (nbytes * 8 - width);
    uint64_t value = rng();
    write_bits(buf, off, width, value);
    oracle.write(off, width, value & mask_width(width));
    uint64_t got = read_bits(buf, off, width);
    uint64_t want = oracle.read(off, width);
    if (got != want) {
      CAPTURE(off);
      CAPTURE(width);
      REQUIRE(got == want);
    }
  }
  CHECK(buf == oracle.bytes());
}

TEST_CASE("LinearBVH plans to a 32-byte node") {
  SourceSet ss;
  ss.add("types", testsrc::kClosestHit);
  ss.add("layout", testsrc::kPbrtLayout);
  ParseResult r = parse_sources(ss);
  REQUIRE(r.ok());
  const AdtDecl* adt = r.program.find_type("BVH");
  auto diags = check_layout(*adt, r.program.layouts[0], r.program);
  REQUIRE(diags.empty());
  MemoryPlan plan = plan_layout(*adt, r.program.layouts[0], r.program);
  const BufferDesc* nodes = plan.buffer_named("nodes");
  REQUIRE(nodes);
  REQUIRE(nodes->segments.size() == 1);
  CHECK(nodes->segments[0].stride_bits == 240);  // 192 + 32 + 16
  CHECK(nodes->segments[0].stride_bytes == 32);  // padded by align=32
  // Slot offsets: bounds at 0, union at 192, nprims at 224.
  bool saw_bounds = false, saw_union = false, saw_nprims = false;
  for (const auto& [m, slot] : plan.slots) {
    if (slot.name == "bounds") {
      CHECK(slot.offset == 0);
      CHECK(slot.width == 192);
      saw_bounds = true;
    }
    if (slot.name == "p_o" || slot.name == "c_o") {
      CHECK(slot.offset == 192);
      CHECK(slot.width == 32);
      saw_union = true;
    }
    if (slot.name == "nprims") {
      CHECK(slot.offset == 224);
      saw_nprims = true;
    }
  }
  CHECK(saw_bounds);
  CHECK(saw_union);
  CHECK(saw_nprims);

  // Footprint: 5 nodes -> 160 bytes; empty buffer -> 0 bytes.
  auto rep = footprint(plan, {{"N", 5}, {"P", 4}});
  for (const auto& pb : rep.buffers) {
    if (pb.name == "nodes") CHECK(pb.bytes == 160);
    if (pb.name == "primitives") CHECK(pb.bytes == 4 * 36);
  }
  auto rep0 = footprint(plan, {{"N", 0}, {"P", 0}});
  for (const auto& pb : rep0.buffers) CHECK(pb.bytes == 0);
  CHECK_THROWS_AS(footprint(plan, {{"N", 5}}), PlanError);
}

TEST_CASE("corpus node strides match the published table") {
  for (const auto& cl : corpus_layouts()) {
    if (cl.table_stride < 0) continue;
    PlannedCorpus pc = plan_corpus(cl.name);
    const BufferDesc* buf = pc.plan.buffer_named(cl.node_group);
    REQUIRE_MESSAGE(buf, cl.name);
    CHECK_MESSAGE(node_stride_bytes(*buf) == static_cast<uint64_t>(cl.table_stride), cl.name,
                  " expected ", cl.table_stride, " got ", node_stride_bytes(*buf));
  }
}

TEST_CASE("bvh8-q8-ci footprint example") {
  PlannedCorpus pc = plan_corpus("bvh8-q8-ci");
  auto rep = footprint(pc.plan, {{"interior_count", 1}, {"primitive_count", 0}});
  bool found = false;
  for (const auto& pb : rep.buffers) {
    if (pb.name == "Interiors") {
      CHECK(pb.bytes == 104);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("dop14 separates planes into two adjoining segments") {
  PlannedCorpus pc = plan_corpus("dop14");
  const BufferDesc* nodes = pc.plan.buffer_named("nodes");
  REQUIRE(nodes);
  REQUIRE(nodes->segments.size() == 2);
  CHECK(nodes->segments[0].stride_bytes == 32);  // lo1,hi1,c0,c1
  CHECK(nodes->segments[1].stride_bytes == 32);  // lo2,hi2
  auto rep = footprint(pc.plan, {{"N", 5}, {"P", 3}});
  for (const auto& pb : rep.buffers) {
    if (pb.name == "nodes") {
      CHECK(pb.bytes == 5 * 64);
      REQUIRE(pb.segment_bases.size() == 2);
      CHECK(pb.segment_bases[0] == 0);
      CHECK(pb.segment_bases[1] == 160);
    }
  }
}

TEST_CASE("split arms never widen the element beyond the widest arm") {
  SourceSet ss;
  ss.add("src", R"(
type T(x: u8) = A(a: u64) | B(b: u8);
layout T(I: u32) {
  N: u32;
  group g[size=N] by I {
    x: u8;
    split x { 0 -> A { a: u64; }; _ -> B { b: u8; }; };
  };
};
)");
  ParseResult r = parse_sources(ss);
  REQUIRE(r.ok());
  const AdtDecl* adt = r.program.find_type("T");
  auto diags = check_layout(*adt, r.program.layouts[0], r.program);
  REQUIRE(diags.empty());
  MemoryPlan plan = plan_layout(*adt, r.program.layouts[0], r.program);
  const BufferDesc* g = plan.buffer_named("g");
  REQUIRE(g);
  CHECK(g->segments[0].stride_bits == 72);  // 8 + max(64, 8)
}

TEST_CASE("tiled segment addressing") {
  PlannedCorpus pc = [&] {
    SourceSet ss;
    ParseResult r = parse_corpus({"lib/geometry.scion", "extras/feature_zoo.scion"}, &ss);
    REQUIRE(r.ok());
    PlannedCorpus out;
    out.program = std::move(r.program);
    LayoutSpec* layout = const_cast<LayoutSpec*>(out.program.find_layout("Zoo"));
    const AdtDecl* adt = out.program.find_type("Zoo");
    auto diags = check_layout(*adt, *layout, out.program);
    REQUIRE(diags.empty());
    out.plan = plan_layout(*adt, *layout, out.program);
    return out;
  }();
  const BufferDesc* cells = pc.plan.buffer_named("cells");
  REQUIRE(cells);
  REQUIRE(cells->segments.size() == 2);
  CHECK(cells->segments[0].tile == 4);
  CHECK(cells->segments[0].block_bytes == 4);  // 4 x u8
  // Elements 0..3 share a tile; element 4 starts the next block.
  const FieldSlot* tag = nullptr;
  for (const auto& [m, slot] : pc.plan.slots)
    if (slot.name == "tagv" && slot.buffer == cells->id) tag = &slot;
  REQUIRE(tag);
  std::vector<uint64_t> bases = {0, 0};
  CHECK(pc.plan.slot_bitpos(*tag, 0, bases) == 0);
  CHECK(pc.plan.slot_bitpos(*tag, 1, bases) == 8);
  CHECK(pc.plan.slot_bitpos(*tag, 4, bases) == 32);
}
