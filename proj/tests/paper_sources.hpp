// Verbatim-style DSL sources used across the unit tests: the worked PBRTv4
// example (closest-hit query, LinearBVH layout, its build), and the two
// quantized layouts exercised by the planner tests.
#pragma once

namespace testsrc {

// Closest-hit module over a bounds-as-AABB binary BVH.
inline const char* kClosestHit = R"(
type Ray(origin: f32x3, direction: f32x3, tmax: f32 = inf);
type AABB(low: f32x3, high: f32x3);
type Triangle(p0: f32x3, p1: f32x3, p2: f32x3);
type BVH(bounds : AABB) = Interior(left: BVH, right: BVH) | Leaf(nprims: u16, data: Triangle[nprims]);
func closest_hit(ray: Ray, bvh: BVH, best: mut (f32, Triangle)) =
  match bvh {
  | Interior(bounds, left, right) ->
    if intersects(ray, bounds) && (distmin(ray, bounds) < best[0]) {
      closest_hit(ray, left,  best);  closest_hit(ray, right, best);
    }
  | Leaf(bounds, nprims, data) ->
    if intersects(ray, bounds) {
      foreach t in data {
        if intersects(ray, t) && distmin(ray, t) < best[0] {  best = (distmin(ray, t), t); }
      }
    }
  }
)";

// LinearBVH layout for the bounds-as-AABB BVH.
inline const char* kPbrtLayout = R"(
layout LinearBVH(I: u32) {
  P: u32; N: u32; primitives: Triangle[P];
  group nodes[size=N, align=32] by I {
    bounds: AABB;
    split nprims {
      > 0 -> Leaf {
        p_o : u32; data = primitives[p_o : p_o + nprims];
      };
      0 -> Interior {
        c_o : u32; left = I + 1; right = I + c_o;
      };
    };
    nprims: u16;
  };
};
)";

inline const char* kPbrtBuild = R"(
build LinearBVH[order=pre] {
 build Interior(bounds : AABB, left: BVH, right: BVH) {
  build bounds; build nprims = 0;
  build left; let R: u32 = build right;
  build c_o = R - this;
  return this;
 };
 build Leaf(bounds : AABB, nprims: u16, data: Triangle[nprims]) {
  build bounds; build nprims;
  build p_o = append(data, nprims);
  return this;
 };
};
)";

// Types shared by the quantized-layout snippets.
inline const char* kLoHiTypes = R"(
type Triangle(p0: f32x3, p1: f32x3, p2: f32x3);
type BVH(low : f32x3, high : f32x3) = Interior(left : BVH, right : BVH) | Leaf(nprims: u4, data : Triangle[nprims]);
)";

// Snapped-grid extent quantization, 2^10-1 bins.
inline const char* kSgEq = R"(
func dequantize(v: u30, bins: f32x3) -> f32x3 {
  let x_: u32 = (v >> 20) & 1023; let y_: u32 = (v >> 10) & 1023; let z_: u32 = (v >> 0) & 1023;
  return f32x3 { fmul_rd(x_ as f32, bins.x), fmul_rd(y_ as f32, bins.y), fmul_rd(z_ as f32, bins.z) };
}
func construct_bins_inverse(low: f32x3, high: f32x3) -> f32x3 {
  let L1: f32x3 = f32x3{fsub_ru(high.x, low.x), fsub_ru(high.y, low.y), fsub_ru(high.z, low.z)};
  let L2: mut f32x3 = {1.0, 1.0, 1.0};
  if (L1.x > 0.0) { L2.x = L1.x; } if (L1.y > 0.0) { L2.y = L1.y; } if (L1.z > 0.0) { L2.z = L1.z; }
  return f32x3{fdiv_rd(1023.0, L2.x), fdiv_rd(1023.0, L2.y), fdiv_rd(1023.0, L2.z)};
}
func construct_bins(low: f32x3, high: f32x3) -> f32x3 {
  let bins_inverse: f32x3 = construct_bins_inverse(low, high);
  return f32x3 {frcp_rd(bins_inverse.x), frcp_rd(bins_inverse.y), frcp_rd(bins_inverse.z)};
}
func quantize_lo(current: f32x3, world: f32x3, bin_inverse: f32x3) -> u32 {
  let x: u32 = floorf(fmul_rd(fsub_rd(current.x, world.x), bin_inverse.x)) as u32;
  let y: u32 = floorf(fmul_rd(fsub_rd(current.y, world.y), bin_inverse.y)) as u32;
  let z: u32 = floorf(fmul_rd(fsub_rd(current.z, world.z), bin_inverse.z)) as u32;
  return ((x & 1023u) << 20u) | ((y & 1023u) << 10u) | (z & 1023u);
}
func quantize_hi(current: f32x3, world: f32x3, bin_inverse: f32x3) -> u32 {
  let x: u32 = floorf(fmul_rd(fsub_rd(world.x, current.x), bin_inverse.x)) as u32;
  let y: u32 = floorf(fmul_rd(fsub_rd(world.y, current.y), bin_inverse.y)) as u32;
  let z: u32 = floorf(fmul_rd(fsub_rd(world.z, current.z), bin_inverse.z)) as u32;
  return ((x & 1023u) << 20u) | ((y & 1023u) << 10u) | (z & 1023u);
}
layout BVH(index: u32) {
  primitive_count : u32;
  primitives : Triangle[primitive_count];
  wlow: f32x3; whigh: f32x3;
  bins: f32x3; bins_inv: f32x3;
  node_count : u32;
  group nodes[size=node_count] by index {
    q_min: u30; q_max: u30; nprims: u4;
    low  = fadd_rd(wlow,  dequantize(q_min, bins));
    high = fsub_ru(whigh, dequantize(q_max, bins));
    split nprims {
      0 -> Interior {
        offset : u32; left = index + 1; right = index + offset;
      };
      > 0 -> Leaf {
        poffset : u32; data = primitives[poffset : poffset + nprims];
      };
    };
  };
};
build BVH[order=pre] {
  build Interior(low: f32x3, high: f32x3, left: BVH, right: BVH) {
    build root {
      build wlow = low;
      build whigh = high;
      build bins_inv = construct_bins_inverse(low, high);
      build bins = construct_bins(low, high);
    };
    build q_min = quantize_lo(low, wlow, bins_inv);
    build q_max = quantize_hi(high, whigh, bins_inv);
    build nprims = 0;
    build left;
    let R: u32 = build right;
    build offset = R - this;
    return this;
  };
  build Leaf(low: f32x3, high: f32x3, nprims: u4, data: Triangle[nprims]) {
    build q_min = quantize_lo(low, wlow, bins_inv);
    build q_max = quantize_hi(high, whigh, bins_inv);
    build nprims;
    build poffset = append(data, nprims);
    return this;
  };
};
)";

// 8-wide compressed-index layout: bit-stolen u32 reference, quantized child
// boxes in an indirect group.
inline const char* kBvh8Q8Ci = R"(
type Triangle(p0: f32x3, p1: f32x3, p2: f32x3);
type BVH = Interior(children: BVH[8], lo: f32x3x8, hi: f32x3x8) | Leaf(nprims: u8, data: Triangle[nprims]);
type qbox3(lo: u8x3, hi: u8x3);

func dequantize_bounds_lo(mlo: f32x3, mex: f32x3, bound: qbox3x8) -> f32x3x8 {
  let rcp: f32 = 1 / 255.0;
  return f32x3x8 {
    mlo + (bound[0].lo as f32x3 * rcp) * mex, mlo + (bound[1].lo as f32x3 * rcp) * mex,
    mlo + (bound[2].lo as f32x3 * rcp) * mex, mlo + (bound[3].lo as f32x3 * rcp) * mex,
    mlo + (bound[4].lo as f32x3 * rcp) * mex, mlo + (bound[5].lo as f32x3 * rcp) * mex,
    mlo + (bound[6].lo as f32x3 * rcp) * mex, mlo + (bound[7].lo as f32x3 * rcp) * mex
  };
}
func dequantize_bounds_hi(mlo: f32x3, mex: f32x3, bound: qbox3x8) -> f32x3x8 {
  let rcp: f32 = 1 / 255.0;
  return f32x3x8 {
    mlo + (bound[0].hi as f32x3 * rcp) * mex, mlo + (bound[1].hi as f32x3 * rcp) * mex,
    mlo + (bound[2].hi as f32x3 * rcp) * mex, mlo + (bound[3].hi as f32x3 * rcp) * mex,
    mlo + (bound[4].hi as f32x3 * rcp) * mex, mlo + (bound[5].hi as f32x3 * rcp) * mex,
    mlo + (bound[6].hi as f32x3 * rcp) * mex, mlo + (bound[7].hi as f32x3 * rcp) * mex
  };
}
func tfloor(f: f32x3) -> u8x3 { let f1: f32x3 = floorf(f); let f2: f32x3 = max(0.0, min(f1, 255.0)); return f2 as u8x3; }
func tceil(f: f32x3) -> u8x3 { let f1: f32x3 = ceilf(f); let f2: f32x3 = max(0.0, min(f1, 255.0)); return f2 as u8x3; }
layout BVH(I: u32 = 1u) {
  primitive_count: u32; primitives : Triangle[primitive_count]; interior_count: u32;
  indirect group Interiors[size=interior_count] {
    mlo: f32x3; mex: f32x3; child_bounds: qbox3x8; children: u32x8;
    lo = dequantize_bounds_lo(mlo, mex, child_bounds); hi = dequantize_bounds_hi(mlo, mex, child_bounds);
  };
  group by I {
    split I[0:1] {
      1 -> Interior from Interiors[I[2:31]];
      _ -> Leaf { let O: u32 = I[7:31]; nprims = (I[2:6] + 1) as u8;  data = primitives[O : O + nprims];  };
    };
  };
};

func quantize_bounds(low: f32x3x8, high: f32x3x8) -> qbox3x8 {
  let mlo: f32x3 = compute_merged_low(low); let mex: f32x3 = compute_merged_extent(low, high);
  let rcp: f32x3 = (1.0 / mex) * 255.0;
  return qbox3x8 {
    qbox3 {tfloor((low[0] - mlo) * rcp), tceil((high[0] - mlo) * rcp) },
    qbox3 {tfloor((low[1] - mlo) * rcp), tceil((high[1] - mlo) * rcp) },
    qbox3 {tfloor((low[2] - mlo) * rcp), tceil((high[2] - mlo) * rcp) },
    qbox3 {tfloor((low[3] - mlo) * rcp), tceil((high[3] - mlo) * rcp) },
    qbox3 {tfloor((low[4] - mlo) * rcp), tceil((high[4] - mlo) * rcp) },
    qbox3 {tfloor((low[5] - mlo) * rcp), tceil((high[5] - mlo) * rcp) },
    qbox3 {tfloor((low[6] - mlo) * rcp), tceil((high[6] - mlo) * rcp) },
    qbox3 {tfloor((low[7] - mlo) * rcp), tceil((high[7] - mlo) * rcp) }
  };
}
func compute_merged_low(low: f32x3x8) -> f32x3 {
  return min(low[0], min(low[1], min(low[2], min(low[3],
         min(low[4], min(low[5], min(low[6], low[7])))))));
}
func compute_merged_extent(lo: f32x3x8, hi: f32x3x8) -> f32x3 {
  let mlo: f32x3 = min(lo[0], min(lo[1], min(lo[2], min(lo[3],
                   min(lo[4], min(lo[5], min(lo[6], lo[7])))))));
  let mhi: f32x3 = max(hi[0], max(hi[1], max(hi[2], max(hi[3],
                   max(hi[4], max(hi[5], max(hi[6], hi[7])))))));
  return mhi - mlo;
}
build BVH[order=pre] {
  build Interior(children: BVH[8], lo: f32x3x8, hi: f32x3x8) {
    build mlo = compute_merged_low(lo); build mex = compute_merged_extent(lo, hi);
    build child_bounds = quantize_bounds(lo, hi);
    build children;
    return ((this << 2u) | 1u) as u32;
  };
  build Leaf(nprims: u8, data: Triangle[nprims]) {
    let poffset: u32 = append(data, nprims);
    return ((poffset << 7u) | ((nprims - 1u) << 2u) | 0u) as u32;
  };
};
)";

// 16-bit snapped-grid quantization over the PBRT scheme.
inline const char* kPbrtQ16 = R"(
type Triangle(p0: f32x3, p1: f32x3, p2: f32x3);
type BVH(low : f32x3, high : f32x3) = Interior(left : BVH, right : BVH) | Leaf(nprims: u4, data : Triangle[nprims]);
type q16x3(lo: u16x3, hi: u16x3);

func dequantize_lo(mlo: f32x3, mex: f32x3, bound: q16x3) -> f32x3 {
  let rcp: f32 = 1.0 / 65535.0;
  return mlo + ((bound.lo as f32x3) * rcp) * mex;
}
func dequantize_hi(mlo: f32x3, mex: f32x3, bound: q16x3) -> f32x3 {
  let rcp: f32 = 1.0 / 65535.0;
  return mlo + ((bound.hi as f32x3) * rcp) * mex;
}
func vu_floor(f: f32x3) -> u16x3 {
    let f1: f32x3 = floorf(f);
    let f2: f32x3 = max(0.0, min(f1, 65535.0));
    return f2 as u16x3;
}
func vu_ceil(f: f32x3) -> u16x3 {
    let f1: f32x3 = ceilf(f);
    let f2: f32x3 = max(0.0, min(f1, 65535.0));
    return f2 as u16x3;
}
layout BVH(index: u32) {
  primitive_count : u32;
  primitives : Triangle[primitive_count];
  world_low : f32x3; world_extent : f32x3;
  node_count : u32;
  group nodes[size=node_count, align=16] by index {
    bounds_q : q16x3;
    low = dequantize_lo(world_low, world_extent, bounds_q);
    high = dequantize_hi(world_low, world_extent, bounds_q);
    nprims: u4;
    split nprims {
      0 -> Interior {
        c_offset: u28;
        left = index + 1;
        right = index + c_offset;
      };
      > 0 -> Leaf {
        p_offset: u28;
        data = primitives[p_offset : p_offset + nprims];
      };
    };
  };
};
func quantize_bounds(low: f32x3, high: f32x3, mlo: f32x3, mex: f32x3) -> q16x3 {
  let rcp: f32x3 = (1.0 / mex) * 65535.0;
  return q16x3 { vu_floor((low - mlo) * rcp), vu_ceil((high - mlo) * rcp) };
}
build BVH[order=pre] {
  build Interior(low: f32x3, high: f32x3, left: BVH, right: BVH) {
    build root {
      build world_low = low;
      build world_extent = high - low;
    };
    build bounds_q = quantize_bounds(low, high, world_low, world_extent);
    build left;
    let R: u32 = build right;
    build c_offset = R - this;
    return this;
  };
  build Leaf(low: f32x3, high: f32x3, nprims: u4, data: Triangle[nprims]) {
    build bounds_q = quantize_bounds(low, high, world_low, world_extent);
    build p_offset = append(data, nprims);
    build nprims;
    return this;
  };
};
)";

}  // namespace testsrc
