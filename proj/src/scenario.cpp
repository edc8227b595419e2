#include "capa/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "capa/errors.hpp"
#include "capa/textfmt.hpp"

namespace capa {

namespace {

constexpr int kPlacementBudget = 10000;
constexpr int kRestartAfter = 200;

std::string vec_text(const Vec3& v) {
  return text::format_double(v.x()) + ' ' + text::format_double(v.y()) + ' ' + text::format_double(v.z());
}

Vec3 vec_from(const text::Document& doc, const text::Entry& e) {
  const auto v = doc.parse_doubles(e);
  if (v.size() != 3) doc.fail(e.line, e.key, "expected three coordinates");
  return {v[0], v[1], v[2]};
}

bool centers_compatible(const std::vector<Vec3>& placed, const Vec3& cand, double dmin, double dmax) {
  for (const auto& c : placed) {
    const double d = (c - cand).norm();
    if (d < dmin || d > dmax) return false;
  }
  return true;
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double ScenarioConfig::rate_floor(int group) const {
  if (rate_floors.size() == 1) return rate_floors.front();
  return rate_floors.at(static_cast<std::size_t>(group));
}

void ScenarioConfig::validate() const {
  if (num_groups < 1) throw ValidationError("num_groups must be >= 1");
  if (users_per_group < 1) throw ValidationError("users_per_group must be >= 1");
  if (!(power_budget > 0.0)) throw ValidationError("power_budget must be positive");
  if (!(noise_variance > 0.0)) throw ValidationError("noise_variance must be positive");
  if (!(spread_radius >= 0.0)) throw ValidationError("spread_radius must be nonnegative");
  if (!(min_group_distance >= 0.0) || !(max_group_distance >= min_group_distance))
    throw ValidationError("group distance interval must satisfy 0 <= min <= max");
  if (rate_floors.empty() || (rate_floors.size() != 1 && rate_floors.size() != static_cast<std::size_t>(num_groups)))
    throw ValidationError("rate_floor needs one value or one per group");
  for (double r : rate_floors)
    if (!(r >= 0.0)) throw ValidationError("rate floors must be nonnegative");
  for (int a = 0; a < 3; ++a)
    if (!(box_min[a] <= box_max[a])) throw ValidationError("group box has min > max");
  if (!(box_min.z() > 0.0)) throw ValidationError("group box must lie in front of the aperture (z > 0)");
  if (grid_order < 1) throw ValidationError("grid_order must be >= 1");
  aperture.validate();
  radio.validate();
}

void ScenarioConfig::write(std::string& out) const {
  auto line = [&out](std::string_view key, const std::string& value) {
    out.append(key).append(" = ").append(value).push_back('\n');
  };
  line("num_groups", std::to_string(num_groups));
  line("users_per_group", std::to_string(users_per_group));
  line("box_min", vec_text(box_min));
  line("box_max", vec_text(box_max));
  line("spread_radius", text::format_double(spread_radius));
  line("min_group_distance", text::format_double(min_group_distance));
  line("max_group_distance", text::format_double(max_group_distance));
  line("power_budget", text::format_double(power_budget));
  line("noise_variance", text::format_double(noise_variance));
  std::string floors;
  for (std::size_t i = 0; i < rate_floors.size(); ++i) {
    if (i) floors.push_back(' ');
    floors += text::format_double(rate_floors[i]);
  }
  line("rate_floor", floors);
  line("seed", std::to_string(seed));
  line("grid_order", std::to_string(grid_order));
  line("aperture", text::format_double(aperture.len_x) + ' ' + text::format_double(aperture.len_y));
  line("wavelength", text::format_double(radio.wavelength));
  line("impedance", text::format_double(radio.impedance));
}

ScenarioConfig ScenarioConfig::read(const text::Document& doc, const text::Section& section) {
  ScenarioConfig c;
  for (const auto& e : section.entries) {
    if (e.key == "num_groups") {
      c.num_groups = static_cast<int>(doc.parse_int(e));
    } else if (e.key == "users_per_group") {
      c.users_per_group = static_cast<int>(doc.parse_int(e));
    } else if (e.key == "box_min") {
      c.box_min = vec_from(doc, e);
    } else if (e.key == "box_max") {
      c.box_max = vec_from(doc, e);
    } else if (e.key == "spread_radius") {
      c.spread_radius = doc.parse_doubles(e).at(0);
    } else if (e.key == "min_group_distance") {
      c.min_group_distance = doc.parse_doubles(e).at(0);
    } else if (e.key == "max_group_distance") {
      c.max_group_distance = doc.parse_doubles(e).at(0);
    } else if (e.key == "power_budget") {
      c.power_budget = doc.parse_doubles(e).at(0);
    } else if (e.key == "noise_variance") {
      c.noise_variance = doc.parse_doubles(e).at(0);
    } else if (e.key == "rate_floor") {
      c.rate_floors = doc.parse_doubles(e);
    } else if (e.key == "seed") {
      const auto v = doc.parse_int(e);
      if (v < 0) doc.fail(e.line, e.key, "seed must be nonnegative");
      c.seed = static_cast<std::uint64_t>(v);
    } else if (e.key == "grid_order") {
      c.grid_order = static_cast<int>(doc.parse_int(e));
    } else if (e.key == "aperture") {
      const auto v = doc.parse_doubles(e);
      if (v.size() != 2) doc.fail(e.line, e.key, "expected 'len_x len_y'");
      c.aperture = {v[0], v[1]};
    } else if (e.key == "aperture_area") {
      c.aperture = Aperture::square(doc.parse_doubles(e).at(0));
    } else if (e.key == "wavelength") {
      c.radio.wavelength = doc.parse_doubles(e).at(0);
    } else if (e.key == "impedance") {
      c.radio.impedance = doc.parse_doubles(e).at(0);
    } else {
      doc.fail(e.line, e.key, "unknown key in [" + section.name + "]");
    }
  }
  try {
    c.validate();
  } catch (const ValidationError& err) {
    doc.fail(section.line, section.name, err.what());
  }
  return c;
}

Scenario assemble(const ScenarioConfig& config, std::vector<Vec3> centers, const std::vector<Vec3>& user_positions) {
  config.validate();
  const auto g = static_cast<std::size_t>(config.num_groups);
  const auto k = static_cast<std::size_t>(config.users_per_group);
  if (centers.size() != g) throw ValidationError("expected one center per group");
  if (user_positions.size() != g * k) throw ValidationError("expected num_groups * users_per_group user positions");

  Scenario sc;
  sc.config = config;
  sc.group_centers = std::move(centers);
  sc.grid = make_grid(config.aperture, config.grid_order);
  sc.users.reserve(user_positions.size());
  sc.channels.reserve(user_positions.size());
  for (std::size_t i = 0; i < user_positions.size(); ++i) {
    ScenarioUser u;
    u.group = static_cast<int>(i / k);
    u.index = static_cast<int>(i % k);
    u.geometry.position = user_positions[i];
    u.geometry.validate();
    ChannelSample ch = sample_channel(u.geometry, sc.grid, config.radio);
    ch.group = u.group;
    ch.index = u.index;
    ch.noise_variance = config.noise_variance;
    sc.users.push_back(u);
    sc.channels.push_back(std::move(ch));
  }
  return sc;
}

Scenario generate(const ScenarioConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const auto g = static_cast<std::size_t>(config.num_groups);

  std::vector<Vec3> centers;
  int attempts = 0;
  int failures_in_row = 0;
  while (centers.size() < g) {
    if (attempts++ >= kPlacementBudget) {
      std::ostringstream msg;
      msg << "could not place " << g << " group centers with pairwise distances in [" << config.min_group_distance
          << ", " << config.max_group_distance << "] m after " << kPlacementBudget << " attempts";
      throw InfeasibleGeometry(msg.str());
    }
    const Vec3 cand(rng.uniform(config.box_min.x(), config.box_max.x()),
                    rng.uniform(config.box_min.y(), config.box_max.y()),
                    rng.uniform(config.box_min.z(), config.box_max.z()));
    if (centers_compatible(centers, cand, config.min_group_distance, config.max_group_distance)) {
      centers.push_back(cand);
      failures_in_row = 0;
    } else if (++failures_in_row >= kRestartAfter) {
      centers.clear();
      failures_in_row = 0;
    }
  }

  std::vector<Vec3> users;
  users.reserve(g * static_cast<std::size_t>(config.users_per_group));
  for (const auto& c : centers) {
    for (int k = 0; k < config.users_per_group; ++k) {
      // Uniform in the horizontal disk around the center.
      const double radius = config.spread_radius * std::sqrt(rng.uniform());
      const double angle = 2.0 * std::numbers::pi * rng.uniform();
      users.emplace_back(c.x() + radius * std::cos(angle), c.y() + radius * std::sin(angle), c.z());
    }
  }
  return assemble(config, std::move(centers), users);
}

std::string to_text(const Scenario& sc) {
  std::string out = "# capa multicast scenario\n[config]\n";
  sc.config.write(out);
  for (int g = 0; g < sc.config.num_groups; ++g) {
    out += "\n[group " + std::to_string(g + 1) + "]\n";
    out += "center: " + vec_text(sc.group_centers[static_cast<std::size_t>(g)]) + '\n';
    for (int k = 0; k < sc.config.users_per_group; ++k) {
      const auto& u = sc.users[static_cast<std::size_t>(sc.global_index(g, k))];
      out += "user " + std::to_string(k + 1) + ": " + vec_text(u.geometry.position) + '\n';
    }
  }
  return out;
}

Scenario from_text(std::string_view content, const std::string& origin) {
  const auto doc = text::Document::parse(content, origin);
  const text::Section* cfg = doc.find("config");
  if (!cfg) throw ParseError(origin + ": missing [config] section");
  const ScenarioConfig config = ScenarioConfig::read(doc, *cfg);

  const auto g = static_cast<std::size_t>(config.num_groups);
  const auto k = static_cast<std::size_t>(config.users_per_group);
  std::vector<Vec3> centers(g);
  std::vector<Vec3> users(g * k);
  std::vector<bool> seen_group(g, false), seen_user(g * k, false);
  for (const auto& s : doc.sections()) {
    if (s.name == "config") continue;
    if (s.name.rfind("group", 0) != 0) doc.fail(s.line, s.name, "unknown section");
    text::Entry tag{"group", s.name.substr(5), s.line};
    const auto gi = doc.parse_int(tag);
    if (gi < 1 || static_cast<std::size_t>(gi) > g) doc.fail(s.line, s.name, "group number out of range");
    const auto gidx = static_cast<std::size_t>(gi - 1);
    if (seen_group[gidx]) doc.fail(s.line, s.name, "duplicate group section");
    seen_group[gidx] = true;
    bool have_center = false;
    for (const auto& e : s.entries) {
      if (e.key == "center") {
        centers[gidx] = vec_from(doc, e);
        have_center = true;
      } else if (e.key.rfind("user", 0) == 0) {
        text::Entry idx{e.key, e.key.substr(4), e.line};
        const auto ki = doc.parse_int(idx);
        if (ki < 1 || static_cast<std::size_t>(ki) > k) doc.fail(e.line, e.key, "user number out of range");
        const auto flat = gidx * k + static_cast<std::size_t>(ki - 1);
        if (seen_user[flat]) doc.fail(e.line, e.key, "duplicate user");
        seen_user[flat] = true;
        users[flat] = vec_from(doc, e);
      } else {
        doc.fail(e.line, e.key, "unknown key in [" + s.name + "]");
      }
    }
    if (!have_center) doc.fail(s.line, s.name, "missing 'center'");
  }
  for (std::size_t i = 0; i < g; ++i)
    if (!seen_group[i]) doc.fail(cfg->line, "group " + std::to_string(i + 1), "section missing");
  for (std::size_t i = 0; i < g * k; ++i)
    if (!seen_user[i])
      doc.fail(cfg->line, "group " + std::to_string(i / k + 1) + " user " + std::to_string(i % k + 1), "missing");
  try {
    return assemble(config, std::move(centers), users);
  } catch (const ValidationError& err) {
    throw ParseError(origin + ": " + err.what());
  }
}

void save(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write scenario file " + path);
  out << to_text(scenario);
  if (!out) throw Error("write failed for " + path);
}

Scenario load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str(), path);
}

}  // namespace capa
