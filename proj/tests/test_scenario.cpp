#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "capa/errors.hpp"
#include "capa/scenario.hpp"
#include "support.hpp"

using namespace capa;

TEST_SUITE("scenario") {
  TEST_CASE("same seed, same scenario; different seed, different users") {
    const ScenarioConfig c = testing::config(3, 3, 42);
    const Scenario a = generate(c), b = generate(c);
    CHECK(to_text(a) == to_text(b));
    for (std::size_t u = 0; u < a.channels.size(); ++u) CHECK(a.channels[u].values == b.channels[u].values);
    ScenarioConfig c2 = c;
    c2.seed = 43;
    CHECK(to_text(generate(c2)) != to_text(a));
  }

  TEST_CASE("placement respects the box, group distances and spread radius") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const ScenarioConfig c = testing::config(4, 3, seed);
      const Scenario s = generate(c);
      REQUIRE(s.group_centers.size() == 4);
      REQUIRE(s.num_users() == 12);
      for (std::size_t i = 0; i < s.group_centers.size(); ++i) {
        const Vec3& ci = s.group_centers[i];
        for (int a = 0; a < 3; ++a) {
          CHECK(ci[a] >= c.box_min[a]);
          CHECK(ci[a] <= c.box_max[a]);
        }
        for (std::size_t j = 0; j < i; ++j) {
          const double d = (ci - s.group_centers[j]).norm();
          CHECK(d >= c.min_group_distance);
          CHECK(d <= c.max_group_distance);
        }
      }
      for (const auto& u : s.users) {
        const Vec3& ctr = s.group_centers[static_cast<std::size_t>(u.group)];
        CHECK((u.geometry.position - ctr).norm() <= c.spread_radius + 1e-12);
        CHECK(u.geometry.polarization == Vec3::UnitY());
        CHECK(s.global_index(u.group, u.index) == &u - s.users.data());
      }
    }
  }

  TEST_CASE("zero spread puts every user at its group center") {
    ScenarioConfig c = testing::config(2, 3, 5);
    c.spread_radius = 0.0;
    const Scenario s = generate(c);
    for (const auto& u : s.users) CHECK((u.geometry.position - s.group_centers[static_cast<std::size_t>(u.group)]).norm() == 0.0);
  }

  TEST_CASE("text round trip is exact") {
    ScenarioConfig c = testing::config(3, 2, 9);
    c.rate_floors = {0.5, 1.0, 1.5};
    c.grid_order = 6;
    const Scenario a = generate(c);
    const std::string text = to_text(a);
    const Scenario b = from_text(text);
    CHECK(to_text(b) == text);
    CHECK(b.config.rate_floor(2) == 1.5);
    for (std::size_t u = 0; u < a.channels.size(); ++u) CHECK(a.channels[u].values == b.channels[u].values);

    const auto path = (std::filesystem::temp_directory_path() / "capa_scenario_roundtrip.txt").string();
    save(a, path);
    CHECK(to_text(load(path)) == text);
    std::remove(path.c_str());
  }

  TEST_CASE("parse errors carry the origin and line") {
    const std::string good = to_text(generate(testing::config(1, 2, 3)));
    auto expect_parse_error = [](const std::string& text, const std::string& fragment) {
      try {
        from_text(text, "case.txt");
        FAIL("expected ParseError");
      } catch (const ParseError& e) {
        const std::string msg = e.what();
        CAPTURE(msg);
        CHECK(msg.find("case.txt") != std::string::npos);
        CHECK(msg.find(fragment) != std::string::npos);
      }
    };
    expect_parse_error("[config]\nnum_groups = 1\nusers_per_group = 1\nwobble = 3\n", "wobble");
    expect_parse_error("[config]\nnum_groups = 1\nusers_per_group = 1\n", "group 1");
    expect_parse_error("[config]\nnum_groups = 1\nusers_per_group = 1\n[group 1]\ncenter: 0 0 20\n", "user 1");
    expect_parse_error("[config]\nnum_groups = 1\nusers_per_group = 1\n[group 1]\ncenter: 0 0 20\nuser 1: 0 0 20\nuser 1: 0 0 21\n",
                       "duplicate");
    expect_parse_error("[config]\nnum_groups = 1\nusers_per_group = 1\n[group 1]\ncenter: 0 0\nuser 1: 0 0 20\n",
                       "three coordinates");
    expect_parse_error("[config]\nnum_groups = 0\n", "num_groups");
    expect_parse_error("[config]\nnum_groups = 1\nusers_per_group = 1\n[group 1]\ncenter: 0 0 20\nuser 1: 0 0 -2\n",
                       "front");
    expect_parse_error("[group 1]\n", "config");
    CHECK_NOTHROW(from_text(good));
  }

  TEST_CASE("validation and infeasible geometry") {
    ScenarioConfig c;
    c.num_groups = 0;
    CHECK_THROWS_AS(generate(c), ValidationError);
    c = {};
    c.power_budget = -1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.rate_floors = {1.0, 2.0};
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.num_groups = 4;
    c.min_group_distance = 30.0;
    c.max_group_distance = 40.0;
    CHECK_THROWS_AS(generate(c), InfeasibleGeometry);
  }

  TEST_CASE("rng draws are in [0, 1) and reproducible") {
    Rng a(7), b(7);
    for (int i = 0; i < 1000; ++i) {
      const double x = a.uniform();
      CHECK(x >= 0.0);
      CHECK(x < 1.0);
      CHECK(x == b.uniform());
    }
  }
}
