#include "capa/spda.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "capa/errors.hpp"
#include "capa/scenario.hpp"

namespace capa {

namespace {

struct Axis {
  std::vector<double> pos, cell;
};

Axis make_axis(double len, double d) {
  const int n = std::max(1, static_cast<int>(std::ceil(len / d - 1e-9)));
  Axis a;
  for (int i = 0; i < n; ++i) a.pos.push_back(i * d - 0.5 * len);
  for (int i = 0; i < n; ++i) {
    const double lo = i == 0 ? -0.5 * len : 0.5 * (a.pos[static_cast<std::size_t>(i - 1)] + a.pos[static_cast<std::size_t>(i)]);
    const double hi = i == n - 1 ? 0.5 * len : 0.5 * (a.pos[static_cast<std::size_t>(i)] + a.pos[static_cast<std::size_t>(i + 1)]);
    a.cell.push_back(hi - lo);
  }
  return a;
}

}  // namespace

SpdaArray build_array(const Aperture& aperture, double spacing) {
  aperture.validate();
  if (!(spacing > 0.0)) throw ValidationError("antenna spacing must be positive");
  const Axis ax = make_axis(aperture.len_x, spacing), ay = make_axis(aperture.len_y, spacing);
  SpdaArray arr;
  arr.aperture = aperture;
  arr.spacing = spacing;
  arr.nx = static_cast<int>(ax.pos.size());
  arr.ny = static_cast<int>(ay.pos.size());
  arr.cell_x = ax.cell;
  arr.cell_y = ay.cell;
  for (double x : ax.pos)
    for (double y : ay.pos) arr.positions.emplace_back(x, y, 0.0);
  return arr;
}

SpdaArray build_array(const Aperture& aperture, const Radio& radio) {
  radio.validate();
  return build_array(aperture, 0.5 * radio.wavelength);
}

double effective_area(const Radio& radio) { return radio.wavelength * radio.wavelength / (4.0 * std::numbers::pi); }

ChannelSet spda_channels(const SpdaArray& array, const Scenario& scenario, ElementWeighting weighting) {
  const auto n = static_cast<std::size_t>(array.size());
  const auto k = scenario.users.size();
  const Radio& radio = scenario.config.radio;
  const double scale = weighting == ElementWeighting::effective_area ? std::sqrt(effective_area(radio)) : 1.0;
  RowMajorCMatrix samples(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  for (std::size_t u = 0; u < k; ++u)
    for (std::size_t e = 0; e < n; ++e)
      samples(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(e)) =
          scale * channel_scalar(scenario.users[u].geometry, array.positions[e], radio);

  std::vector<double> weights(n, 1.0);
  if (weighting == ElementWeighting::voronoi) {
    for (int ix = 0; ix < array.nx; ++ix)
      for (int iy = 0; iy < array.ny; ++iy)
        weights[static_cast<std::size_t>(ix * array.ny + iy)] =
            array.cell_x[static_cast<std::size_t>(ix)] * array.cell_y[static_cast<std::size_t>(iy)];
  }
  return ChannelSet(std::move(weights), std::move(samples));
}

MulticastSystem make_spda_system(const Scenario& scenario, const SpdaArray& array, ElementWeighting weighting) {
  std::vector<double> noise;
  for (const auto& ch : scenario.channels) noise.push_back(ch.noise_variance);
  std::vector<double> floors;
  for (int g = 0; g < scenario.config.num_groups; ++g) floors.push_back(scenario.config.rate_floor(g));
  return MulticastSystem(spda_channels(array, scenario, weighting), scenario.config.num_groups,
                         scenario.config.users_per_group, std::move(noise), scenario.config.power_budget,
                         std::move(floors));
}

MulticastSystem make_spda_system(const Scenario& scenario, ElementWeighting weighting) {
  return make_spda_system(scenario, build_array(scenario.config.aperture, scenario.config.radio), weighting);
}

}  // namespace capa
