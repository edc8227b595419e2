#pragma once

// Reproducible multi-group multicast deployments.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "capa/channel.hpp"
#include "capa/geometry.hpp"

namespace capa {

namespace text {
class Document;
struct Section;
}  // namespace text

struct ScenarioConfig {
  int num_groups = 3;
  int users_per_group = 3;
  Vec3 box_min{-5.0, -5.0, 15.0};  // region for group centers, m
  Vec3 box_max{5.0, 5.0, 30.0};
  double spread_radius = 1.0;        // m
  double min_group_distance = 1.0;   // center-to-center, m
  double max_group_distance = 5.0;
  double power_budget = 1000.0;      // mA^2
  double noise_variance = 5.6e-3;    // V^2/m^2, every user
  std::vector<double> rate_floors{1.0};  // bit/s/Hz; one entry broadcasts to all groups
  std::uint64_t seed = 1;
  int grid_order = 20;
  Aperture aperture{};
  Radio radio{};

  double rate_floor(int group) const;
  void validate() const;

  void write(std::string& out) const;
  /// Reads the keys of a [config] section; absent keys keep their defaults.
  static ScenarioConfig read(const text::Document& doc, const text::Section& section);
};

struct ScenarioUser {
  int group = 0;
  int index = 0;  // within group
  UserGeometry geometry;
};

/// Users are stored group-major: global index i = group * K_g + index.
struct Scenario {
  ScenarioConfig config;
  std::vector<Vec3> group_centers;
  std::vector<ScenarioUser> users;
  ApertureGrid grid;
  std::vector<ChannelSample> channels;

  int num_users() const { return static_cast<int>(users.size()); }
  int global_index(int group, int index) const { return group * config.users_per_group + index; }
};

/// Draws centers and users from config.seed and samples every channel.
Scenario generate(const ScenarioConfig& config);

/// Builds a scenario from explicit positions (users given group-major).
Scenario assemble(const ScenarioConfig& config, std::vector<Vec3> centers, const std::vector<Vec3>& user_positions);

std::string to_text(const Scenario& scenario);
Scenario from_text(std::string_view content, const std::string& origin = "<memory>");

void save(const Scenario& scenario, const std::string& path);
Scenario load(const std::string& path);

/// Uniform [0, 1) draws from a 64-bit Mersenne twister (53-bit mantissa).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace capa
