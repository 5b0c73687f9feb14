#include "mcvl/simworld.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

namespace mcvl::simworld {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double hash_unit(std::uint64_t x) {
  return static_cast<double>(mix64(x) >> 11) * 0x1.0p-53;
}

std::uint64_t hash_double(double v) { return std::bit_cast<std::uint64_t>(v); }

double lattice(std::int64_t ix, std::int64_t iy, std::uint64_t seed) {
  return hash_unit(seed + static_cast<std::uint64_t>(ix) * 0x8DA6B343ULL +
                   static_cast<std::uint64_t>(iy) * 0xD8163841ULL);
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(double x, double y, double wavelength, std::uint64_t seed) {
  const double u = x / wavelength, v = y / wavelength;
  const double fu = std::floor(u), fv = std::floor(v);
  const std::int64_t iu = static_cast<std::int64_t>(fu);
  const std::int64_t iv = static_cast<std::int64_t>(fv);
  const double tu = smoothstep(u - fu), tv = smoothstep(v - fv);
  const double a = lattice(iu, iv, seed), b = lattice(iu + 1, iv, seed);
  const double c = lattice(iu, iv + 1, seed), d = lattice(iu + 1, iv + 1, seed);
  return (a * (1 - tu) + b * tu) * (1 - tv) + (c * (1 - tu) + d * tu) * tv;
}

// Multi-octave world texture; the largest wavelength bounds the spatial
// correlation length, so views hundreds of meters apart decorrelate.
double field(double x, double y, std::uint64_t seed) {
  static constexpr double kWavelengths[] = {40.0, 20.0, 10.0, 5.0, 2.5};
  static constexpr double kAmps[] = {1.0, 0.55, 0.4, 0.3, 0.25};
  double sum = 0.0, amp_sum = 0.0;
  for (std::size_t o = 0; o < std::size(kWavelengths); ++o) {
    sum += kAmps[o] * value_noise(x, y, kWavelengths[o], mix64(seed + o));
    amp_sum += kAmps[o];
  }
  return sum / amp_sum;
}

std::uint64_t condition_hash(const ConditionSpec& c) {
  std::uint64_t h = 0x243F6A8885A308D3ULL;
  h = mix64(h ^ hash_double(c.gain));
  h = mix64(h ^ hash_double(c.bias));
  h = mix64(h ^ hash_double(c.noise_sigma));
  h = mix64(h ^ static_cast<std::uint64_t>(c.occlusion_blocks));
  h = mix64(h ^ hash_double(c.texture_jitter));
  return h;
}

std::uint64_t pose_hash(const geometry::Pose6D& p) {
  std::uint64_t h = 0x13198A2E03707344ULL;
  for (int i = 0; i < 3; ++i) h = mix64(h ^ hash_double(p.position[i]));
  for (int i = 0; i < 3; ++i) h = mix64(h ^ hash_double(p.orientation[i]));
  return h;
}

bool same_condition(const ConditionSpec& a, const ConditionSpec& b) {
  return a.gain == b.gain && a.bias == b.bias && a.noise_sigma == b.noise_sigma &&
         a.occlusion_blocks == b.occlusion_blocks &&
         a.texture_jitter == b.texture_jitter;
}

}  // namespace

RoadNetwork generate_network(std::uint64_t seed, double extent, int grid_n) {
  if (extent <= 0.0 || grid_n < 2) {
    throw std::invalid_argument("generate_network: bad extent or grid size");
  }
  const double spacing = extent / (grid_n - 1);
  const double jitter = 0.1 * spacing;
  RoadNetwork net;
  net.nodes.reserve(static_cast<std::size_t>(grid_n) * grid_n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-jitter, jitter);
  for (int gy = 0; gy < grid_n; ++gy) {
    for (int gx = 0; gx < grid_n; ++gx) {
      double x = gx * spacing, y = gy * spacing;
      // Keep boundary nodes inside the extent after jitter.
      const double jx = uni(rng), jy = uni(rng);
      x = std::clamp(x + jx, 0.0, extent);
      y = std::clamp(y + jy, 0.0, extent);
      net.nodes.emplace_back(x, y);
    }
  }
  auto idx = [grid_n](int gx, int gy) {
    return static_cast<std::size_t>(gy) * grid_n + gx;
  };
  for (int gy = 0; gy < grid_n; ++gy) {
    for (int gx = 0; gx + 1 < grid_n; ++gx) {
      net.edges.push_back({idx(gx, gy), idx(gx + 1, gy), 8.0});
    }
  }
  for (int gy = 0; gy + 1 < grid_n; ++gy) {
    for (int gx = 0; gx < grid_n; ++gx) {
      net.edges.push_back({idx(gx, gy), idx(gx, gy + 1), 8.0});
    }
  }
  for (int gy = 0; gy + 1 < grid_n; ++gy) {
    for (int gx = 0; gx + 1 < grid_n; ++gx) {
      net.edges.push_back({idx(gx, gy), idx(gx + 1, gy + 1), 6.0});
    }
  }
  return net;
}

namespace {

std::vector<std::size_t> shortest_path(const RoadNetwork& net, std::size_t start,
                                       std::size_t goal) {
  const std::size_t n = net.nodes.size();
  if (start >= n || goal >= n) {
    throw std::invalid_argument("drive: node index out of range");
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (const auto& e : net.edges) {
    const double len = (net.nodes[e.a] - net.nodes[e.b]).norm();
    adj[e.a].emplace_back(e.b, len);
    adj[e.b].emplace_back(e.a, len);
  }
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> prev(n, n);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[start] = 0.0;
  pq.emplace(0.0, start);
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    if (u == goal) break;
    for (const auto& [v, len] : adj[u]) {
      if (d + len < dist[v]) {
        dist[v] = d + len;
        prev[v] = u;
        pq.emplace(dist[v], v);
      }
    }
  }
  if (!std::isfinite(dist[goal])) throw UnreachableGoal("drive: goal unreachable");
  std::vector<std::size_t> path;
  for (std::size_t u = goal; u != n; u = prev[u]) {
    path.push_back(u);
    if (u == start) break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

// Per-step yaw rate cap, radians.
constexpr double kYawRateCap = 0.35;

std::vector<geometry::Pose6D> drive(const RoadNetwork& network, std::size_t start,
                                    std::size_t goal, double speed, double dt,
                                    std::uint64_t seed) {
  const std::vector<std::size_t> path = shortest_path(network, start, goal);
  std::vector<Eigen::Vector2d> poly;
  poly.reserve(path.size());
  for (std::size_t u : path) poly.push_back(network.nodes[u]);

  std::vector<double> cumlen(poly.size(), 0.0);
  for (std::size_t i = 1; i < poly.size(); ++i) {
    cumlen[i] = cumlen[i - 1] + (poly[i] - poly[i - 1]).norm();
  }
  const double total = cumlen.back();

  auto sample = [&](double s, Eigen::Vector2d& pos, double& tangent_yaw) {
    s = std::clamp(s, 0.0, total);
    std::size_t seg = 1;
    while (seg + 1 < poly.size() && cumlen[seg] < s) ++seg;
    const double seg_len = cumlen[seg] - cumlen[seg - 1];
    const double t = seg_len > 0.0 ? (s - cumlen[seg - 1]) / seg_len : 0.0;
    const Eigen::Vector2d dir = poly[seg] - poly[seg - 1];
    pos = poly[seg - 1] + t * dir;
    tangent_yaw = std::atan2(dir.y(), dir.x());
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<geometry::Pose6D> out;
  double s = 0.0;
  double yaw = 0.0;
  bool first = true;
  while (true) {
    Eigen::Vector2d pos;
    double tangent;
    sample(s, pos, tangent);
    if (first) {
      yaw = tangent;
      first = false;
    } else {
      const double dyaw = geometry::wrap_angle(tangent - yaw);
      yaw = geometry::wrap_angle(yaw + std::clamp(dyaw, -kYawRateCap, kYawRateCap));
    }
    geometry::Pose6D p;
    p.position = geometry::Vec3(pos.x(), pos.y(), 0.0);
    p.orientation = geometry::wrap_euler(
        {0.002 * normal(rng), 0.002 * normal(rng), yaw});
    out.push_back(p);
    if (s >= total) break;
    const double jitter = std::clamp(1.0 + 0.05 * normal(rng), 0.8, 1.2);
    s = std::min(s + speed * dt * jitter, total);
  }
  return out;
}

features::GrayImage render(const geometry::Pose6D& pose,
                           std::uint64_t world_texture_seed,
                           const ConditionSpec& cond, int width, int height) {
  const std::uint64_t chash = condition_hash(cond);
  const std::uint64_t phash = pose_hash(pose);

  // Condition-dependent texture phase offset.
  const double jang = 2.0 * M_PI * hash_unit(chash ^ 0x5851F42DULL);
  const double jx = cond.texture_jitter * std::cos(jang);
  const double jy = cond.texture_jitter * std::sin(jang);

  const double yaw = pose.orientation[2];
  const double c = std::cos(yaw), sy = std::sin(yaw);
  constexpr double kNear = 2.0, kFar = 30.0;
  constexpr double kFov = 1.2;  // lateral spread per unit depth

  features::GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * height);

  for (int v = 0; v < height; ++v) {
    // Forward-facing strip: rows sweep depth, pitch shifts it slightly.
    double d = kNear + (kFar - kNear) * (static_cast<double>(v) / (height - 1));
    d *= 1.0 - 0.5 * pose.orientation[1];
    for (int u = 0; u < width; ++u) {
      const double l = ((u + 0.5) / width - 0.5) * kFov * d +
                       0.5 * pose.orientation[0] * d;
      const double wx = pose.position.x() + c * d - sy * l + jx;
      const double wy = pose.position.y() + sy * d + c * l + jy;
      double val = field(wx, wy, world_texture_seed);
      val = cond.gain * val + cond.bias;
      if (cond.noise_sigma > 0.0) {
        const std::uint64_t key =
            mix64(world_texture_seed ^ chash ^ mix64(phash + static_cast<std::uint64_t>(v) * width + u));
        // Uniform noise with standard deviation noise_sigma.
        val += cond.noise_sigma * std::sqrt(3.0) * (2.0 * hash_unit(key) - 1.0);
      }
      img.pixels[static_cast<std::size_t>(v) * width + u] =
          static_cast<float>(std::clamp(val, 0.0, 1.0));
    }
  }
  // Occlusion blocks at condition/pose-determined positions.
  const int block = std::max(4, width / 8);
  for (int b = 0; b < cond.occlusion_blocks; ++b) {
    const std::uint64_t key = mix64(chash ^ mix64(phash + 0xABCDULL + b));
    const int bx = static_cast<int>(hash_unit(key) * (width - block));
    const int by = static_cast<int>(hash_unit(mix64(key)) * (height - block));
    for (int y = by; y < by + block; ++y) {
      for (int x = bx; x < bx + block; ++x) {
        img.pixels[static_cast<std::size_t>(y) * width + x] = 0.5f;
      }
    }
  }
  return img;
}

double traversal_distance(const std::vector<geometry::Pose6D>& poses) {
  double total = 0.0;
  for (std::size_t i = 1; i < poses.size(); ++i) {
    total += (poses[i].position - poses[i - 1].position).norm();
  }
  return total;
}

Scenario build_scenario(const ScenarioConfig& cfg) {
  if (cfg.train_conditions.empty()) {
    throw std::invalid_argument("build_scenario: no training conditions");
  }
  for (const auto& tc : cfg.train_conditions) {
    if (same_condition(tc, cfg.test_condition)) {
      throw std::invalid_argument(
          "build_scenario: test condition duplicates a training condition");
    }
  }
  Scenario sc;
  sc.config = cfg;
  sc.network = generate_network(cfg.seed, cfg.extent, cfg.grid_n);
  const std::size_t goal =
      cfg.route_goal != cfg.route_start ? cfg.route_goal : sc.network.nodes.size() - 1;
  for (std::size_t i = 0; i < cfg.train_conditions.size(); ++i) {
    Traversal t;
    t.name = "train_" + cfg.train_conditions[i].name;
    t.condition = cfg.train_conditions[i];
    t.poses = drive(sc.network, cfg.route_start, goal, cfg.speed, cfg.dt,
                    mix64(cfg.seed + 101 + i));
    sc.training.push_back(std::move(t));
  }
  sc.test.name = "test_" + cfg.test_condition.name;
  sc.test.condition = cfg.test_condition;
  sc.test.poses = drive(sc.network, cfg.route_start, goal, cfg.speed, cfg.dt,
                        mix64(cfg.seed + 999));
  return sc;
}

}  // namespace mcvl::simworld
