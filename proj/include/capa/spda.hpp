#pragma once

// Discrete-array baseline: lambda/2-spaced point antennas on the same aperture.

#include <vector>

#include "capa/channel.hpp"
#include "capa/system.hpp"

namespace capa {

struct Scenario;

enum class ElementWeighting {
  effective_area,  // unit weights, channel scaled by sqrt(lambda^2 / 4 pi)
  voronoi,         // unscaled channel, weight = clipped cell area (continuum limit)
};

struct SpdaArray {
  Aperture aperture;
  double spacing = 0.0;
  int nx = 0, ny = 0;
  std::vector<Vec3> positions;  // index ix*ny + iy
  std::vector<double> cell_x, cell_y;  // per-axis cell lengths

  int size() const { return nx * ny; }
};

/// Element n along an axis of length L sits at n*d - L/2, n = 0..ceil(L/d)-1.
SpdaArray build_array(const Aperture& aperture, double spacing);
SpdaArray build_array(const Aperture& aperture, const Radio& radio);

/// Effective element area lambda^2 / (4 pi).
double effective_area(const Radio& radio);

ChannelSet spda_channels(const SpdaArray& array, const Scenario& scenario,
                         ElementWeighting weighting = ElementWeighting::effective_area);

MulticastSystem make_spda_system(const Scenario& scenario, ElementWeighting weighting = ElementWeighting::effective_area);
MulticastSystem make_spda_system(const Scenario& scenario, const SpdaArray& array, ElementWeighting weighting);

}  // namespace capa
