#include "v2x/harness/scenario.hpp"

#include <cmath>
#include <numbers>

namespace v2x {

void ScenarioConfig::validate() const {
  if (min_agents == 0 || min_agents > max_agents) {
    throw ContractError("scenario agent bounds must satisfy 1 <= min <= max");
  }
  if (steps == 0 || plan_steps == 0) throw ContractError("scenario horizons must be positive");
}

RigidTransform2D Scenario::infra_to_ego() const {
  return compose(invert(ego_pose), infra_pose);
}

bool operator==(const Scenario& a, const Scenario& b) {
  return a.seed == b.seed && a.difficulty == b.difficulty && a.ego_pose == b.ego_pose &&
         a.infra_pose == b.infra_pose && a.agents == b.agents && a.expert_plan == b.expert_plan &&
         a.map.size() == b.map.size() &&
         std::equal(a.map.begin(), a.map.end(), b.map.begin(), [](const auto& x, const auto& y) {
           return x.position == y.position && x.cls == y.cls;
         });
}

namespace {

constexpr double kLane = 1.75;
constexpr double kDt = 0.5;

struct Approach {
  Point2 dir;     // travel direction, world
  Point2 offset;  // lateral lane offset, world
};

// West->east, east->west, south->north, north->south.
constexpr Approach kApproaches[4] = {
    {{1, 0}, {0, -kLane}}, {{-1, 0}, {0, kLane}}, {{0, 1}, {kLane, 0}}, {{0, -1}, {-kLane, 0}}};

Point2 scaled(Point2 p, double s) { return {p.x * s, p.y * s}; }

}  // namespace

Scenario gen_scenario(std::uint64_t seed, int difficulty, const ScenarioConfig& config) {
  config.validate();
  if (difficulty < 0) throw ContractError("difficulty must be >= 0");
  Rng rng(seed * 0x9E3779B97F4A7C15ull + 17);
  Scenario s;
  s.seed = seed;
  s.difficulty = difficulty;
  s.config = config;
  s.ego_pose = RigidTransform2D(rng.uniform(-0.05, 0.05), {rng.uniform(-24, -18), -kLane});
  s.infra_pose = RigidTransform2D(rng.uniform(-0.4, 0.0), {rng.uniform(-42, -36), rng.uniform(10, 16)});
  const RigidTransform2D world_to_ego = invert(s.ego_pose);
  const RigidTransform2D ego_to_infra = invert(s.infra_to_ego());
  const double ego_heading = s.ego_pose.angle();

  const std::size_t n = config.min_agents + rng.index(config.max_agents - config.min_agents + 1);
  const double occlusion = std::min(0.8, 0.35 * difficulty);
  std::vector<Point2> taken{s.ego_pose.translation()};
  for (std::size_t attempt = 0; s.agents.size() < n && attempt < 1000; ++attempt) {
    const std::size_t a = rng.index(4);
    const Approach& ap = kApproaches[a];
    const double dist = rng.uniform(6.0, 30.0);
    const double speed = rng.uniform(2.0, 8.0);
    const double lateral = rng.uniform(-0.3, 0.3);
    const double drawn_occlusion = rng.uniform(0.0, 1.0);
    const Point2 world = ap.offset + scaled(ap.dir, -dist) +
                         Point2{ap.dir.y * lateral, -ap.dir.x * lateral};
    bool clear = true;
    for (const Point2& p : taken) clear = clear && distance(p, world) > 7.0;
    const Point2 local = world_to_ego.apply(world);
    Range inner = config.ego_range;
    inner.min_x += 3;
    inner.min_y += 3;
    inner.max_x -= 3;
    inner.max_y -= 3;
    if (!clear || !inner.contains(local)) continue;
    taken.push_back(world);

    ScenarioAgent ag;
    ag.id = static_cast<std::int64_t>(s.agents.size());
    const double heading = std::atan2(ap.dir.y, ap.dir.x) - ego_heading;
    ag.box = Box{local, 4.0, 1.8, heading};
    ag.velocity = {speed * std::cos(heading), speed * std::sin(heading)};
    for (std::size_t t = 1; t <= config.steps; ++t) {
      ag.future.push_back(local + scaled(ag.velocity, kDt * static_cast<double>(t)));
    }
    ag.infra_visible = config.infra_range.contains(ego_to_infra.apply(local));
    // Cross traffic (north/south approaches) can be hidden from the ego by buildings.
    const bool cross = a >= 2;
    ag.ego_visible = !(cross && drawn_occlusion < occlusion && ag.infra_visible);
    s.agents.push_back(ag);
  }

  const Point2 lanes[4] = {{-12, -kLane}, {12, kLane}, {kLane, -12}, {-kLane, 12}};
  const Point2 crossings[4] = {{0, -7}, {0, 7}, {-7, 0}, {7, 0}};
  for (const Point2& p : lanes) s.map.push_back({world_to_ego.apply(p), MapClass::lane});
  for (const Point2& p : crossings) s.map.push_back({world_to_ego.apply(p), MapClass::crossing});

  const double ego_speed = rng.uniform(3.0, 6.0);
  for (std::size_t t = 1; t <= config.plan_steps; ++t) {
    s.expert_plan.push_back({ego_speed * kDt * static_cast<double>(t), 0.0});
  }
  return s;
}

Matrix sensor_features(const Scenario& s, Party party, double position_scale) {
  const RigidTransform2D to_party =
      party == Party::ego ? RigidTransform2D::identity() : invert(s.infra_to_ego());
  const Range& range = party == Party::ego ? s.config.ego_range : s.config.infra_range;
  const double rot = to_party.angle();
  Rng noise(s.seed * 0x2545F4914F6CDD1Dull + (party == Party::ego ? 1 : 2));
  std::vector<std::vector<double>> rows;
  for (const auto& a : s.agents) {
    if (!(party == Party::ego ? a.ego_visible : a.infra_visible)) continue;
    const Point2 p = to_party.apply(a.box.center);
    const double h = a.box.heading + rot;
    const double speed = std::hypot(a.velocity.x, a.velocity.y);
    const double nx = noise.normal(0.0, s.config.sensor_noise);
    const double ny = noise.normal(0.0, s.config.sensor_noise);
    rows.push_back({(p.x + nx) / position_scale, (p.y + ny) / position_scale, std::cos(h),
                    std::sin(h), speed * std::cos(h) / 10.0, speed * std::sin(h) / 10.0,
                    a.box.length / 5.0, a.box.width / 5.0, 1.0, 0.0});
  }
  for (const auto& m : s.map) {
    const Point2 p = to_party.apply(m.position);
    if (!range.contains(p)) continue;
    rows.push_back({p.x / position_scale, p.y / position_scale, 0, 0, 0, 0, 0, 0, 0,
                    m.cls == MapClass::lane ? 1.0 : -1.0});
  }
  if (rows.empty()) rows.push_back(std::vector<double>(10, 0.0));
  Matrix out(rows.size(), 10);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < 10; ++j) out(i, j) = rows[i][j];
  return out;
}

OccupancyGrid occupancy_truth(const Scenario& s, const OccupancyGrid& layout) {
  OccupancyGrid g = OccupancyGrid::zeros(layout.rows, layout.cols, layout.cell_size, layout.origin);
  for (const auto& a : s.agents) {
    if (auto cell = g.locate(a.box.center)) g.at(cell->first, cell->second) = 1.0;
    for (std::size_t i = 0; i < g.rows; ++i)
      for (std::size_t j = 0; j < g.cols; ++j)
        if (contains(a.box, g.cell_center(i, j))) g.at(i, j) = 1.0;
  }
  return g;
}

GroundTruth ground_truth(const Scenario& s, const AgentModel& model) {
  if (s.config.steps != model.config.steps || s.config.plan_steps != model.config.plan_steps) {
    throw ContractError("scenario horizons do not match the model configuration");
  }
  GroundTruth gt;
  for (const auto& a : s.agents) gt.agents.push_back({a.id, a.box, a.velocity, a.future});
  gt.map = s.map;
  const OccupancyGrid layout =
      OccupancyGrid::zeros(model.config.bev_height, model.config.bev_width, model.cell_size(),
                           {model.range.min_x, model.range.min_y});
  gt.occupancy = occupancy_truth(s, layout);
  gt.expert_plan = s.expert_plan;
  return gt;
}

nlohmann::json to_json(const Scenario& s) {
  auto pose = [](const RigidTransform2D& t) {
    return nlohmann::json{{"theta", t.angle()}, {"x", t.translation().x}, {"y", t.translation().y}};
  };
  auto pt = [](const Point2& p) { return nlohmann::json::array({p.x, p.y}); };
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : s.agents) {
    nlohmann::json fut = nlohmann::json::array();
    for (const auto& p : a.future) fut.push_back(pt(p));
    agents.push_back({{"id", a.id},
                      {"center", pt(a.box.center)},
                      {"length", a.box.length},
                      {"width", a.box.width},
                      {"heading", a.box.heading},
                      {"velocity", pt(a.velocity)},
                      {"future", fut},
                      {"ego_visible", a.ego_visible},
                      {"infra_visible", a.infra_visible}});
  }
  nlohmann::json map = nlohmann::json::array();
  for (const auto& m : s.map) {
    map.push_back({{"position", pt(m.position)}, {"class", m.cls == MapClass::lane ? "lane" : "crossing"}});
  }
  nlohmann::json plan = nlohmann::json::array();
  for (const auto& p : s.expert_plan) plan.push_back(pt(p));
  return {{"seed", s.seed},        {"difficulty", s.difficulty}, {"ego_pose", pose(s.ego_pose)},
          {"infra_pose", pose(s.infra_pose)}, {"agents", agents},  {"map", map},
          {"expert_plan", plan}};
}

}  // namespace v2x
