#pragma once

#include <cstdint>
#include <vector>

namespace gaitlab {

enum class TerrainKind { Flat, Gaps };

struct Gap {
  double start_x = 0.0; // m
  double width = 0.0;   // m
  double end_x() const { return start_x + width; }
};

/// Gap course: support plane at z = 0 with y-invariant rectangular gaps whose
/// floor sits at gap_floor_z. Gaps are non-overlapping and ascending in x.
struct Terrain {
  TerrainKind kind = TerrainKind::Flat;
  std::vector<Gap> gaps;
  double beam_width = 0.14;   // contact surface between consecutive gaps, m
  double gap_floor_z = -1.0;  // m
};

/// Height at (x, y): 0 on support, gap_floor_z strictly inside a gap interval.
/// Gap intervals are open at both ends, so the boundaries count as support.
double terrain_height(const Terrain& t, double x, double y);

/// Seeded gap course: `count` gaps with widths uniform in
/// [min_width, max_width], first gap starting at first_gap_x, separated by
/// beam_width contact surfaces.
Terrain make_gap_terrain(int count, double min_width, double max_width,
                         double beam_width, double first_gap_x, uint64_t seed);

Terrain make_flat_terrain();

} // namespace gaitlab
