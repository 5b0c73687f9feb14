#pragma once
// Procedural stand-in world: a jittered grid road network, constant-speed
// drives along shortest paths, and a toy renderer producing images of a
// world-anchored procedural intensity field under configurable appearance
// conditions.

#include "mcvl/features.hpp"
#include "mcvl/geometry.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcvl::simworld {

struct RoadEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double width = 8.0;  // meters
};

struct RoadNetwork {
  std::vector<Eigen::Vector2d> nodes;
  std::vector<RoadEdge> edges;
};

struct ConditionSpec {
  std::string name;
  double gain = 1.0;           // brightness gain, > 0
  double bias = 0.0;           // brightness bias
  double noise_sigma = 0.0;    // additive noise
  int occlusion_blocks = 0;    // gray blocks dropped onto the image
  double texture_jitter = 0.0; // world-texture phase offset, meters
};

struct Traversal {
  std::string name;
  ConditionSpec condition;
  std::vector<geometry::Pose6D> poses;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  int grid_n = 5;                  // grid_n x grid_n nodes
  double extent = 240.0;           // meters spanned by the grid per axis
  int image_width = 128;
  int image_height = 96;
  double speed = 5.0;              // m/s
  double dt = 0.4;                 // s
  std::size_t route_start = 0;     // node indices
  std::size_t route_goal = 0;
  std::vector<ConditionSpec> train_conditions;
  ConditionSpec test_condition;
};

struct Scenario {
  ScenarioConfig config;
  RoadNetwork network;
  std::vector<Traversal> training;
  Traversal test;
};

struct UnreachableGoal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Jittered grid with one diagonal per cell. Node count grid_n^2, edge count
// 2*grid_n*(grid_n-1) + (grid_n-1)^2. Deterministic per seed.
RoadNetwork generate_network(std::uint64_t seed, double extent, int grid_n);

// Shortest-path drive at roughly constant speed; yaw follows the path
// tangent with the per-step yaw rate capped, roll/pitch carry small noise,
// z = 0.
std::vector<geometry::Pose6D> drive(const RoadNetwork& network, std::size_t start,
                                    std::size_t goal, double speed, double dt,
                                    std::uint64_t seed);

features::GrayImage render(const geometry::Pose6D& pose,
                           std::uint64_t world_texture_seed,
                           const ConditionSpec& cond, int width, int height);

// Builds the network and all traversals. Throws if the test condition
// duplicates a training condition.
Scenario build_scenario(const ScenarioConfig& cfg);

// Total path length of a traversal, meters.
double traversal_distance(const std::vector<geometry::Pose6D>& poses);

}  // namespace mcvl::simworld
