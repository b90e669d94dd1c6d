#include "layoutc/plan.hpp"

#include <algorithm>
#include <functional>

namespace layoutc {

namespace {

uint64_t round_up(uint64_t v, uint64_t to) { return to ? (v + to - 1) / to * to : v; }

constexpr uint64_t kStrideCapBits = uint64_t(1) << 32;

struct Planner {
  const AdtDecl& adt;
  const LayoutSpec& layout;
  const Program& module;
  TypeTable types;
  MemoryPlan plan;
  int internal_counter = 0;

  Planner(const AdtDecl& a, const LayoutSpec& l, const Program& m)
      : adt(a), layout(l), module(m), types(m) {}

  uint64_t width_of(const SemTypePtr& t, Span span) {
    std::string err;
    uint64_t w = types.packed_width(*t, &err);
    if (w == 0) throw PlanError("unstorable field type: " + err);
    if (w > kStrideCapBits) throw PlanError("field exceeds stride cap");
    (void)span;
    return w;
  }

  // Lays out the member list of one group body starting at the current
  // segment. Returns nothing; slots are assigned as encountered.
  struct GroupCtx {
    int buf_id = -1;
    uint64_t cursor = 0;  // bit offset within the current segment's element
    int segment = 0;
  };

  BufferDesc& ctx_buf(GroupCtx& g) { return plan.buffers[static_cast<size_t>(g.buf_id)]; }

  void close_segment(GroupCtx& g, uint64_t tile) {
    BufferDesc& buf = ctx_buf(g);
    SegmentDesc seg;
    seg.stride_bits = g.cursor;
    seg.tile = tile;
    uint64_t bytes = (g.cursor + 7) / 8;
    if (tile == 1) {
      seg.stride_bytes = round_up(bytes, buf.align_bytes);
      seg.block_bytes = seg.stride_bytes;
    } else {
      // Tiled segments round (and align) whole tile blocks.
      uint64_t block = (g.cursor * tile + 7) / 8;
      seg.block_bytes = round_up(block, buf.align_bytes);
      seg.stride_bytes = bytes;  // informational
    }
    if (seg.stride_bits > kStrideCapBits) throw PlanError("element stride exceeds 2^32 bits");
    buf.segments.push_back(seg);
    g.cursor = 0;
    g.segment++;
  }

  // Width of a member list laid flat at the current cursor (split arms rely
  // on the returned extent to size union regions).
  uint64_t lay_members(const std::vector<MemberPtr>& members, GroupCtx& g, uint64_t tile) {
    uint64_t start = g.cursor;
    int start_segment = g.segment;
    for (const auto& m : members) lay_member(*m, g, tile);
    // Width only meaningful when no segment boundary was crossed.
    return g.segment == start_segment ? g.cursor - start : 0;
  }

  uint64_t lay_member(const Member& m, GroupCtx& g, uint64_t tile) {
    switch (m.kind) {
      case MemberKind::StoredField: {
        if (m.type->kind == TypeKind::Array && !m.type->len_field.empty())
          throw PlanError("dynamically sized arrays may only appear at the layout top level");
        uint64_t w = width_of(m.type, m.span);
        FieldSlot slot;
        slot.buffer = g.buf_id;
        slot.segment = g.segment;
        slot.offset = g.cursor;
        slot.width = static_cast<uint32_t>(w);
        slot.type = m.type;
        slot.name = m.name;
        plan.slots[&m] = slot;
        g.cursor += w;
        return w;
      }
      case MemberKind::Padding:
        g.cursor += m.padding_bits;
        return m.padding_bits;
      case MemberKind::Derive:
      case MemberKind::Let:
        return 0;
      case MemberKind::Separator:
        if (tile != 1) throw PlanError("--- not supported inside tiled groups");
        if (ctx_buf(g).is_arena) throw PlanError("--- not supported in address-referenced groups");
        close_segment(g, 1);
        return 0;
      case MemberKind::Group: {
        if (m.indirect) {
          plan_group(m);  // indirect groups own their buffers
          return 0;
        }
        if (m.tile == 0)
          throw PlanError("nested direct groups must carry a tile count attribute");
        if (ctx_buf(g).is_arena) throw PlanError("tiled groups not supported in ptr groups");
        // Tile stripe: close the running segment, lay the tile's fields in a
        // dedicated tiled segment, continue in a fresh segment.
        if (g.cursor > 0) close_segment(g, 1);
        for (const auto& c : m.members) {
          if (c->kind != MemberKind::StoredField && c->kind != MemberKind::Padding &&
              c->kind != MemberKind::Derive && c->kind != MemberKind::Let)
            throw PlanError("tiled groups may contain only fields");
          lay_member(*c, g, m.tile);
        }
        close_segment(g, m.tile);
        return 0;
      }
      case MemberKind::Split: {
        // All arms overlay the same region; its width is the widest arm.
        uint64_t base = g.cursor;
        int seg0 = g.segment;
        uint64_t widest = 0;
        for (const auto& arm : m.arms) {
          if (arm.is_from) continue;  // storage lives in the indirect group
          g.cursor = base;
          uint64_t w = lay_members(arm.members, g, tile);
          if (g.segment != seg0)
            throw PlanError("segment boundaries inside split arms are not supported");
          widest = std::max(widest, w);
        }
        g.cursor = base + widest;
        return widest;
      }
    }
    return 0;
  }

  void plan_group(const Member& m) {
    BufferDesc buf;
    buf.id = static_cast<int>(plan.buffers.size());
    buf.name = m.group_name.empty() ? ("group" + std::to_string(buf.id)) : m.group_name;
    buf.align_bytes = m.align_bytes ? static_cast<uint32_t>(m.align_bytes) : 1;
    bool is_ptr_indexed = false;
    if (!m.indirect && !m.index_binding.empty()) {
      for (const auto& p : layout.reference_params)
        if (p.name == m.index_binding && p.type->kind == TypeKind::Ptr) is_ptr_indexed = true;
    }
    buf.is_arena = is_ptr_indexed;
    if (m.size_expr && m.size_expr->kind == ExprKind::Ident) {
      buf.count_name = m.size_expr->name;
    } else {
      buf.count_name = "__count_" + buf.name;
      buf.count_is_internal = true;
    }
    plan.buffers.push_back(buf);
    int id = buf.id;
    plan.group_buffers[&m] = id;
    plan.buffer_by_name[plan.buffers[static_cast<size_t>(id)].name] = id;

    GroupCtx g;
    g.buf_id = id;
    lay_members(m.members, g, 1);
    close_segment(g, 1);
    // Drop trailing empty segments so zero-width groups have no storage.
    auto& segs = plan.buffers[static_cast<size_t>(id)].segments;
    while (!segs.empty() && segs.back().stride_bits == 0) segs.pop_back();
  }

  void run() {
    plan.layout_name = layout.name;
    plan.adt_name = adt.name;
    plan.layout = &layout;
    plan.adt = &adt;
    for (const auto& p : layout.reference_params) {
      RefComponent c;
      c.name = p.name;
      c.type = p.type;
      c.default_value = p.default_value.get();
      plan.components.push_back(c);
    }
    std::vector<std::string> inferred = inferred_global_names(layout);
    auto is_inferred = [&](const std::string& n) {
      return std::find(inferred.begin(), inferred.end(), n) != inferred.end();
    };

    for (const auto& m : layout.members) {
      switch (m->kind) {
        case MemberKind::StoredField: {
          if (m->type->kind == TypeKind::Array && !m->type->len_field.empty()) {
            BufferDesc buf;
            buf.id = static_cast<int>(plan.buffers.size());
            buf.name = m->name;
            buf.is_global_array = true;
            buf.elem_type = m->type->elem;
            buf.count_name = m->type->len_field;
            SegmentDesc seg;
            seg.stride_bits = width_of(m->type->elem, m->span);
            seg.stride_bytes = (seg.stride_bits + 7) / 8;
            seg.block_bytes = seg.stride_bytes;
            buf.segments.push_back(seg);
            plan.buffers.push_back(buf);
            plan.group_buffers[m.get()] = buf.id;
            plan.buffer_by_name[buf.name] = buf.id;
          } else {
            GlobalDesc gl;
            gl.name = m->name;
            gl.type = m->type;
            gl.inferred = is_inferred(m->name);
            plan.globals.push_back(gl);
          }
          break;
        }
        case MemberKind::Group:
          plan_group(*m);
          break;
        case MemberKind::Derive:
        case MemberKind::Let:
          break;
        case MemberKind::Split:
          throw PlanError("top-level splits are not supported");
        case MemberKind::Padding:
          break;
        case MemberKind::Separator:
          throw PlanError("--- outside a group");
      }
    }

    // Tree-carried components initialized in root blocks get implicit global
    // slots so the physical tree can carry the root reference.
    for (size_t i = 1; i < layout.reference_params.size(); i++) {
      GlobalDesc gl;
      gl.name = "__ref_" + layout.reference_params[i].name;
      gl.type = layout.reference_params[i].type;
      gl.inferred = false;
      plan.globals.push_back(gl);
    }

    // Variant homes.
    for (const auto& v : adt.variants) {
      plan.variant_home[v.name] = find_home(v.name);
    }
  }

  int find_home(const std::string& variant) {
    // The arm taken by this variant decides: a `from` arm homes in the
    // indirect buffer, an inline arm in the enclosing direct group (when it
    // materializes storage at all).
    std::map<std::string, const Member*> indirects;
    int home = -1;
    std::function<bool(const std::vector<MemberPtr>&, const Member*)> walk =
        [&](const std::vector<MemberPtr>& members, const Member* enclosing_group) -> bool {
      for (const auto& m : members) {
        if (m->kind == MemberKind::Group) {
          if (m->indirect) {
            indirects[m->group_name] = m.get();
          } else if (m->tile == 0) {
            if (walk(m->members, m.get())) return true;
          }
        } else if (m->kind == MemberKind::Split) {
          for (const auto& arm : m->arms) {
            if (arm.variant != variant) continue;
            if (arm.is_from) {
              auto it = indirects.find(arm.from_group);
              if (it != indirects.end()) {
                auto bit = plan.group_buffers.find(it->second);
                if (bit != plan.group_buffers.end() &&
                    !plan.buffers[static_cast<size_t>(bit->second)].segments.empty())
                  home = bit->second;
              }
              return true;
            }
            // Inline arm: home is the enclosing direct group if it has bits.
            if (enclosing_group) {
              auto bit = plan.group_buffers.find(enclosing_group);
              if (bit != plan.group_buffers.end() &&
                  !plan.buffers[static_cast<size_t>(bit->second)].segments.empty())
                home = bit->second;
            }
            return true;
          }
        }
      }
      return false;
    };
    if (!walk(layout.members, nullptr)) {
      // No split names this variant: single-variant layouts home in the
      // first direct group with storage.
      for (const auto& m : layout.members) {
        if (m->kind == MemberKind::Group && !m->indirect) {
          auto bit = plan.group_buffers.find(m.get());
          if (bit != plan.group_buffers.end() &&
              !plan.buffers[static_cast<size_t>(bit->second)].segments.empty())
            return bit->second;
        }
      }
    }
    return home;
  }
};

}  // namespace

uint64_t MemoryPlan::slot_bitpos(const FieldSlot& slot, uint64_t index,
                                 const std::vector<uint64_t>& segment_bases_bits) const {
  const BufferDesc& buf = buffers[static_cast<size_t>(slot.buffer)];
  const SegmentDesc& seg = buf.segments[static_cast<size_t>(slot.segment)];
  uint64_t base = segment_bases_bits.empty()
                      ? 0
                      : segment_bases_bits[static_cast<size_t>(slot.segment)];
  if (buf.is_arena) {
    // index is the element's byte offset in the arena.
    return index * 8 + slot.offset;
  }
  if (seg.tile == 1) {
    return base + index * seg.stride_bytes * 8 + slot.offset;
  }
  uint64_t block = index / seg.tile;
  uint64_t lane = index % seg.tile;
  return base + block * seg.block_bytes * 8 + slot.offset * seg.tile + lane * slot.width;
}

uint64_t node_stride_bytes(const BufferDesc& buf) {
  uint64_t total = 0;
  for (const auto& s : buf.segments) total += s.tile == 1 ? s.stride_bytes : s.block_bytes / s.tile;
  return total;
}

uint64_t buffer_bytes(const BufferDesc& buf, uint64_t count,
                      std::vector<uint64_t>* segment_bases_bytes) {
  uint64_t base = 0;
  if (segment_bases_bytes) segment_bases_bytes->clear();
  for (const auto& seg : buf.segments) {
    base = round_up(base, buf.align_bytes);
    if (segment_bases_bytes) segment_bases_bytes->push_back(base);
    if (seg.tile == 1) {
      base += count * seg.stride_bytes;
    } else {
      base += (count + seg.tile - 1) / seg.tile * seg.block_bytes;
    }
  }
  return base;
}

MemoryPlan plan_layout(const AdtDecl& adt, const LayoutSpec& layout, const Program& module) {
  Planner planner(adt, layout, module);
  planner.run();
  return std::move(planner.plan);
}

FootprintReport footprint(const MemoryPlan& plan, const std::map<std::string, uint64_t>& sizes) {
  FootprintReport rep;
  for (const auto& buf : plan.buffers) {
    if (buf.segments.empty()) {
      // Zero-width groups (pure bit-stolen references) own no storage.
      FootprintReport::PerBuffer pb;
      pb.name = buf.name;
      rep.buffers.push_back(pb);
      continue;
    }
    auto it = sizes.find(buf.count_name);
    if (it == sizes.end() && buf.count_is_internal) it = sizes.find(buf.name);
    if (it == sizes.end())
      throw PlanError("unbound symbolic count '" + buf.count_name + "' for buffer " + buf.name);
    FootprintReport::PerBuffer pb;
    pb.name = buf.name;
    pb.count = it->second;
    pb.bytes = buffer_bytes(buf, it->second, &pb.segment_bases);
    pb.stride_bytes = node_stride_bytes(buf);
    rep.buffers.push_back(pb);
    rep.total_bytes += pb.bytes;
  }
  return rep;
}

}  // namespace layoutc
