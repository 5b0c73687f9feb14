#include "mcvl/config.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mcvl::config {

namespace {

struct ParsedFile {
  std::map<std::string, std::string> values;  // key = value lines
  std::vector<std::vector<std::string>> directives;  // whitespace token lines
};

ParsedFile parse_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path.string());
  ParsedFile out;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq != std::string::npos) {
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      out.values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    } else {
      std::istringstream ls(line);
      std::vector<std::string> toks;
      std::string t;
      while (ls >> t) toks.push_back(t);
      out.directives.push_back(std::move(toks));
    }
  }
  return out;
}

double to_double(const std::string& s) { return std::stod(s); }

Eigen::Vector3d to_vec3(const std::string& s) {
  std::istringstream is(s);
  Eigen::Vector3d v;
  if (!(is >> v[0] >> v[1] >> v[2])) {
    throw std::runtime_error("expected 3 numbers: " + s);
  }
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::runtime_error("expected boolean: " + s);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt(const Eigen::Vector3d& v) {
  return fmt(v[0]) + " " + fmt(v[1]) + " " + fmt(v[2]);
}

}  // namespace

LocalizerConfig parse_localizer_config(const std::filesystem::path& path) {
  const ParsedFile f = parse_file(path);
  LocalizerConfig cfg;
  auto& flt = cfg.filter;
  for (const auto& [key, val] : f.values) {
    if (key == "n_particles") flt.n_particles = std::stoull(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "init_cov_pos") flt.init_cov_pos = to_vec3(val);
    else if (key == "init_cov_rot") flt.init_cov_rot = to_vec3(val);
    else if (key == "mu_v") flt.motion.mu_v = to_vec3(val);
    else if (key == "sigma_v") flt.motion.sigma_v = to_vec3(val).asDiagonal();
    else if (key == "mu_psi") flt.motion.mu_psi = to_vec3(val);
    else if (key == "sigma_psi") flt.motion.sigma_psi = to_vec3(val).asDiagonal();
    else if (key == "sigma_o") {
      std::istringstream is(val);
      Eigen::Vector<double, 6> d;
      for (int i = 0; i < 6; ++i) {
        if (!(is >> d[i])) throw std::runtime_error("sigma_o needs 6 numbers");
      }
      flt.observation.sigma_o = d.asDiagonal();
    } else if (key == "motion_frame") {
      if (val == "world") flt.motion_frame = filter::MotionFrame::World;
      else if (val == "body") flt.motion_frame = filter::MotionFrame::Body;
      else throw std::runtime_error("motion_frame must be world or body");
    } else if (key == "resample_every_step") flt.resample_every_step = to_bool(val);
    else if (key == "ess_threshold_ratio") flt.ess_threshold_ratio = to_double(val);
    else if (key == "skip_low_confidence") flt.skip_low_confidence = to_bool(val);
    else if (key == "knn_r") flt.retrieval.top_r = std::stoull(val);
    else if (key == "meanshift_bandwidth") flt.retrieval.meanshift_bandwidth = to_double(val);
    else throw std::runtime_error("unknown localizer config key: " + key);
  }
  if (!f.directives.empty()) {
    throw std::runtime_error("unexpected directive line in localizer config");
  }
  return cfg;
}

void write_localizer_config(const std::filesystem::path& path,
                            const LocalizerConfig& cfg) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write config: " + path.string());
  const auto& flt = cfg.filter;
  os << "n_particles = " << flt.n_particles << '\n';
  os << "seed = " << cfg.seed << '\n';
  os << "init_cov_pos = " << fmt(flt.init_cov_pos) << '\n';
  os << "init_cov_rot = " << fmt(flt.init_cov_rot) << '\n';
  os << "mu_v = " << fmt(flt.motion.mu_v) << '\n';
  os << "sigma_v = " << fmt(flt.motion.sigma_v.diagonal()) << '\n';
  os << "mu_psi = " << fmt(flt.motion.mu_psi) << '\n';
  os << "sigma_psi = " << fmt(flt.motion.sigma_psi.diagonal()) << '\n';
  os << "sigma_o =";
  for (int i = 0; i < 6; ++i) os << ' ' << fmt(flt.observation.sigma_o(i, i));
  os << '\n';
  os << "motion_frame = "
     << (flt.motion_frame == filter::MotionFrame::World ? "world" : "body") << '\n';
  os << "resample_every_step = " << (flt.resample_every_step ? "true" : "false") << '\n';
  os << "ess_threshold_ratio = " << fmt(flt.ess_threshold_ratio) << '\n';
  os << "skip_low_confidence = " << (flt.skip_low_confidence ? "true" : "false") << '\n';
  os << "knn_r = " << flt.retrieval.top_r << '\n';
  os << "meanshift_bandwidth = " << fmt(flt.retrieval.meanshift_bandwidth) << '\n';
}

simworld::ScenarioConfig parse_scenario(const std::filesystem::path& path) {
  const ParsedFile f = parse_file(path);
  simworld::ScenarioConfig cfg;
  std::map<std::string, simworld::ConditionSpec> conditions;
  for (const auto& [key, val] : f.values) {
    if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "grid_n") cfg.grid_n = std::stoi(val);
    else if (key == "extent") cfg.extent = to_double(val);
    else if (key == "image_width") cfg.image_width = std::stoi(val);
    else if (key == "image_height") cfg.image_height = std::stoi(val);
    else if (key == "speed") cfg.speed = to_double(val);
    else if (key == "dt") cfg.dt = to_double(val);
    else if (key == "route_start") cfg.route_start = std::stoull(val);
    else if (key == "route_goal") cfg.route_goal = std::stoull(val);
    else throw std::runtime_error("unknown scenario config key: " + key);
  }
  for (const auto& toks : f.directives) {
    if (toks[0] == "condition") {
      if (toks.size() != 7) {
        throw std::runtime_error("condition needs: name gain bias noise blocks jitter");
      }
      simworld::ConditionSpec c;
      c.name = toks[1];
      c.gain = to_double(toks[2]);
      c.bias = to_double(toks[3]);
      c.noise_sigma = to_double(toks[4]);
      c.occlusion_blocks = std::stoi(toks[5]);
      c.texture_jitter = to_double(toks[6]);
      if (c.gain <= 0.0 || c.noise_sigma < 0.0) {
        throw std::runtime_error("condition " + c.name + ": bad gain or noise");
      }
      conditions[c.name] = c;
    } else if (toks[0] == "train" || toks[0] == "test") {
      if (toks.size() != 2) throw std::runtime_error(toks[0] + " needs a condition name");
      const auto it = conditions.find(toks[1]);
      if (it == conditions.end()) {
        throw std::runtime_error("undefined condition: " + toks[1]);
      }
      if (toks[0] == "train") cfg.train_conditions.push_back(it->second);
      else cfg.test_condition = it->second;
    } else {
      throw std::runtime_error("unknown scenario directive: " + toks[0]);
    }
  }
  return cfg;
}

void write_scenario(const std::filesystem::path& path,
                    const simworld::ScenarioConfig& cfg) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write scenario: " + path.string());
  os << "seed = " << cfg.seed << '\n';
  os << "grid_n = " << cfg.grid_n << '\n';
  os << "extent = " << fmt(cfg.extent) << '\n';
  os << "image_width = " << cfg.image_width << '\n';
  os << "image_height = " << cfg.image_height << '\n';
  os << "speed = " << fmt(cfg.speed) << '\n';
  os << "dt = " << fmt(cfg.dt) << '\n';
  os << "route_start = " << cfg.route_start << '\n';
  os << "route_goal = " << cfg.route_goal << '\n';
  auto emit_condition = [&](const simworld::ConditionSpec& c) {
    os << "condition " << c.name << ' ' << fmt(c.gain) << ' ' << fmt(c.bias) << ' '
       << fmt(c.noise_sigma) << ' ' << c.occlusion_blocks << ' '
       << fmt(c.texture_jitter) << '\n';
  };
  for (const auto& c : cfg.train_conditions) emit_condition(c);
  emit_condition(cfg.test_condition);
  for (const auto& c : cfg.train_conditions) os << "train " << c.name << '\n';
  os << "test " << cfg.test_condition.name << '\n';
}

std::string scenario_manifest(const simworld::Scenario& sc) {
  std::ostringstream os;
  os << "# sequence image_count condition distance_m\n";
  auto emit = [&](const simworld::Traversal& t) {
    os << t.name << ' ' << t.poses.size() << ' ' << t.condition.name << ' '
       << std::fixed << std::setprecision(1)
       << simworld::traversal_distance(t.poses) << '\n';
  };
  for (const auto& t : sc.training) emit(t);
  emit(sc.test);
  return os.str();
}

}  // namespace mcvl::config
