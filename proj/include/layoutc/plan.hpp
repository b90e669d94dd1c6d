#pragma once

#include <map>
#include <string>
#include <vector>

#include "layoutc/ast.hpp"
#include "layoutc/sema.hpp"

namespace layoutc {

// A stored field's home: bit position within an element is
//   segment_base + (I / tile) * block_bits + offset * tile + (I % tile) * width
// where tile == 1 collapses to the plain element_stride * I + offset form.
struct FieldSlot {
  int buffer = -1;
  int segment = 0;
  uint64_t offset = 0;  // bit offset within one element of the segment
  uint32_t width = 0;   // total field width in bits
  SemTypePtr type;
  std::string name;
};

struct SegmentDesc {
  uint64_t stride_bits = 0;   // packed per-element bits (pre-rounding)
  uint64_t stride_bytes = 0;  // rounded to whole bytes and group alignment
  uint64_t tile = 1;          // AoSoA tile factor
  uint64_t block_bytes = 0;   // tile block size (== stride_bytes when tile == 1)
};

struct BufferDesc {
  int id = -1;
  std::string name;
  bool is_arena = false;        // ptr-indexed: elements addressed by byte offset
  bool is_global_array = false; // top-level T[len] field
  uint32_t align_bytes = 1;
  std::vector<SegmentDesc> segments;
  std::string count_name;  // global holding this buffer's element count; for
                           // arenas/attr-less groups an internal counter name
  bool count_is_internal = false;
  SemTypePtr elem_type;    // global arrays: element type
};

struct GlobalDesc {
  std::string name;
  SemTypePtr type;
  bool inferred = false;  // populated by the count pass
};

struct RefComponent {
  std::string name;
  SemTypePtr type;
  const Expr* default_value = nullptr;  // borrowed from the layout AST
};

struct MemoryPlan {
  std::string layout_name;
  std::string adt_name;
  const LayoutSpec* layout = nullptr;  // borrowed; owner keeps the Program alive
  const AdtDecl* adt = nullptr;
  std::vector<RefComponent> components;
  std::vector<BufferDesc> buffers;
  std::vector<GlobalDesc> globals;
  std::map<const Member*, FieldSlot> slots;      // stored field -> slot
  std::map<const Member*, int> group_buffers;    // group member -> buffer id
  std::map<std::string, int> variant_home;       // variant -> buffer id (-1: none)
  std::map<std::string, int> buffer_by_name;

  const BufferDesc* buffer(int id) const { return &buffers.at(static_cast<size_t>(id)); }
  const BufferDesc* buffer_named(const std::string& n) const {
    auto it = buffer_by_name.find(n);
    return it == buffer_by_name.end() ? nullptr : &buffers[static_cast<size_t>(it->second)];
  }
  const GlobalDesc* global(const std::string& n) const {
    for (const auto& g : globals)
      if (g.name == n) return &g;
    return nullptr;
  }
  const FieldSlot* slot_of(const Member* m) const {
    auto it = slots.find(m);
    return it == slots.end() ? nullptr : &it->second;
  }

  // Address of a slot within its buffer, in bits.
  uint64_t slot_bitpos(const FieldSlot& slot, uint64_t index,
                       const std::vector<uint64_t>& segment_bases_bits) const;
};

struct PlanError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// [OP] plan_layout. Precondition: check_layout passed (expressions typed).
MemoryPlan plan_layout(const AdtDecl& adt, const LayoutSpec& layout, const Program& module);

// Per-buffer byte sizes for bound counts.
struct FootprintReport {
  struct PerBuffer {
    std::string name;
    uint64_t count = 0;
    uint64_t bytes = 0;
    std::vector<uint64_t> segment_bases;  // byte offsets
    uint64_t stride_bytes = 0;            // sum of segment strides (node size)
  };
  std::vector<PerBuffer> buffers;
  uint64_t total_bytes = 0;
};

// [OP] footprint: every symbolic count must be bound in `sizes`.
FootprintReport footprint(const MemoryPlan& plan, const std::map<std::string, uint64_t>& sizes);

// Byte size + segment base layout of one buffer for a given element count.
uint64_t buffer_bytes(const BufferDesc& buf, uint64_t count,
                      std::vector<uint64_t>* segment_bases_bytes = nullptr);

// Node stride in bytes (sum over segments of per-element stride).
uint64_t node_stride_bytes(const BufferDesc& buf);

}  // namespace layoutc
