#include "gaitlab/terrain.hpp"

#include <random>
#include <stdexcept>

namespace gaitlab {

double terrain_height(const Terrain& t, double x, double /*y*/) {
  if (t.kind == TerrainKind::Flat) return 0.0;
  for (const Gap& g : t.gaps) {
    if (x > g.start_x && x < g.end_x()) return t.gap_floor_z;
    if (x <= g.start_x) break; // gaps ascend in x
  }
  return 0.0;
}

Terrain make_gap_terrain(int count, double min_width, double max_width,
                         double beam_width, double first_gap_x, uint64_t seed) {
  if (count < 0 || min_width <= 0.0 || max_width < min_width || beam_width <= 0.0)
    throw std::invalid_argument("invalid gap terrain parameters");
  Terrain t;
  t.kind = TerrainKind::Gaps;
  t.beam_width = beam_width;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> width(min_width, max_width);
  double x = first_gap_x;
  for (int i = 0; i < count; ++i) {
    Gap g;
    g.start_x = x;
    g.width = width(rng);
    t.gaps.push_back(g);
    x = g.end_x() + beam_width;
  }
  return t;
}

Terrain make_flat_terrain() { return Terrain{}; }

} // namespace gaitlab
