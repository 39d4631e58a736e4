#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "v2x/model/agent_model.hpp"
#include "v2x/model/loss.hpp"

namespace v2x {

struct ScenarioConfig {
  std::size_t min_agents = 3;
  std::size_t max_agents = 6;
  std::size_t steps = 12;      // forecast horizon at 2 Hz
  std::size_t plan_steps = 6;
  Range ego_range{-51.2, -51.2, 51.2, 51.2};
  Range infra_range{0.0, -51.2, 102.4, 51.2};
  double sensor_noise = 0.3;   // meters, std dev of observed positions

  void validate() const;
};

struct ScenarioAgent {
  std::int64_t id = 0;
  Box box;            // ego frame
  Point2 velocity;    // ego frame, m/s
  PointSet2D future;  // ego frame, one point per 0.5 s step
  bool ego_visible = true;
  bool infra_visible = false;

  friend bool operator==(const ScenarioAgent&, const ScenarioAgent&) = default;
};

// One synthetic frame at a four-way intersection. Everything except the two
// poses is expressed in the ego frame; poses map each party's frame to the world.
struct Scenario {
  std::uint64_t seed = 0;
  int difficulty = 0;
  ScenarioConfig config;
  RigidTransform2D ego_pose;
  RigidTransform2D infra_pose;
  std::vector<ScenarioAgent> agents;
  std::vector<MapElement> map;
  PointSet2D expert_plan;

  RigidTransform2D infra_to_ego() const;

  friend bool operator==(const Scenario& a, const Scenario& b);
};

// difficulty 0 makes every agent visible to the ego vehicle; higher values
// occlude cross-traffic from the ego side, which the infrastructure still sees.
Scenario gen_scenario(std::uint64_t seed, int difficulty, const ScenarioConfig& config = {});

enum class Party { ego, infra };

// Observation rows for one party in its own frame: one per visible agent and
// per map element within range, columns
// [x, y, cos h, sin h, vx, vy, length, width, is_agent, map class (+1 lane, -1 crossing)],
// positions divided by position_scale. Deterministic from the scenario seed.
Matrix sensor_features(const Scenario& s, Party party, double position_scale);

// Ground truth on the model's BEV layout.
GroundTruth ground_truth(const Scenario& s, const AgentModel& model);
OccupancyGrid occupancy_truth(const Scenario& s, const OccupancyGrid& layout);

nlohmann::json to_json(const Scenario& s);

}  // namespace v2x
