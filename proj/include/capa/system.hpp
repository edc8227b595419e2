#pragma once

// The multicast downlink as the optimizers see it: user channels on a
// weighted node set, their Gram matrix, group layout and constraints.

#include <vector>

#include "capa/channel.hpp"

namespace capa {

struct Scenario;

class MulticastSystem {
 public:
  MulticastSystem() = default;
  MulticastSystem(ChannelSet channels, int num_groups, int users_per_group, std::vector<double> noise,
                  double power_budget, std::vector<double> rate_floors);

  const ChannelSet& channels() const { return channels_; }
  /// gram()(i, j) = <h_i, h_j>.
  const CMatrix& gram() const { return gram_; }

  int num_groups() const { return num_groups_; }
  int users_per_group() const { return users_per_group_; }
  int num_users() const { return num_groups_ * users_per_group_; }
  int group_of(int user) const { return user / users_per_group_; }
  int first_user(int group) const { return group * users_per_group_; }

  double noise(int user) const { return noise_[static_cast<std::size_t>(user)]; }
  double power_budget() const { return power_budget_; }
  double rate_floor(int group) const { return rate_floors_[static_cast<std::size_t>(group)]; }
  /// 2^floor - 1.
  double sinr_floor(int group) const;

  void set_power_budget(double p);
  /// One value broadcasts to every group.
  void set_rate_floors(std::vector<double> floors);

 private:
  ChannelSet channels_;
  CMatrix gram_;
  int num_groups_ = 0;
  int users_per_group_ = 0;
  std::vector<double> noise_;
  double power_budget_ = 0.0;
  std::vector<double> rate_floors_;
};

/// Continuous-aperture backend: channels on the quadrature grid.
MulticastSystem make_capa_system(const Scenario& scenario);

}  // namespace capa
