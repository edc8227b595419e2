#include "capa/system.hpp"

#include <cmath>

#include "capa/errors.hpp"
#include "capa/scenario.hpp"

namespace capa {

MulticastSystem::MulticastSystem(ChannelSet channels, int num_groups, int users_per_group, std::vector<double> noise,
                                 double power_budget, std::vector<double> rate_floors)
    : channels_(std::move(channels)), num_groups_(num_groups), users_per_group_(users_per_group),
      noise_(std::move(noise)) {
  if (num_groups_ < 1 || users_per_group_ < 1) throw ValidationError("system needs at least one group and one user");
  if (channels_.num_users() != static_cast<std::size_t>(num_users()))
    throw ValidationError("channel count differs from num_groups * users_per_group");
  if (noise_.size() != channels_.num_users()) throw ValidationError("one noise variance per user expected");
  for (double s : noise_)
    if (!(s > 0.0)) throw ValidationError("noise variance must be positive");
  set_power_budget(power_budget);
  set_rate_floors(std::move(rate_floors));
  gram_ = channels_.gram();
}

double MulticastSystem::sinr_floor(int group) const { return std::exp2(rate_floor(group)) - 1.0; }

void MulticastSystem::set_power_budget(double p) {
  if (!(p > 0.0)) throw ValidationError("power budget must be positive");
  power_budget_ = p;
}

void MulticastSystem::set_rate_floors(std::vector<double> floors) {
  if (floors.size() == 1) floors.assign(static_cast<std::size_t>(num_groups_), floors.front());
  if (floors.size() != static_cast<std::size_t>(num_groups_)) throw ValidationError("one rate floor per group expected");
  for (double r : floors)
    if (!(r >= 0.0)) throw ValidationError("rate floors must be nonnegative");
  rate_floors_ = std::move(floors);
}

MulticastSystem make_capa_system(const Scenario& scenario) {
  const auto k = scenario.channels.size();
  const auto n = scenario.grid.size();
  RowMajorCMatrix samples(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  std::vector<double> noise;
  noise.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& ch = scenario.channels[i];
    for (std::size_t j = 0; j < n; ++j) samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ch.values[j];
    noise.push_back(ch.noise_variance);
  }
  std::vector<double> floors;
  for (int g = 0; g < scenario.config.num_groups; ++g) floors.push_back(scenario.config.rate_floor(g));
  return MulticastSystem(ChannelSet(scenario.grid.weights, std::move(samples)), scenario.config.num_groups,
                         scenario.config.users_per_group, std::move(noise), scenario.config.power_budget,
                         std::move(floors));
}

}  // namespace capa
