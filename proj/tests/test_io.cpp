#include "mcvl/config.hpp"
#include "mcvl/io.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

using namespace mcvl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mcvl_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("fnv1a64 known vectors") {
  CHECK(io::fnv1a64("", 0) == 0xcbf29ce484222325ull);
  CHECK(io::fnv1a64("a", 1) == 0xaf63dc4c8601ec8cull);
  CHECK(io::fnv1a64("foobar", 6) == 0x85944171f73967e8ull);
}

TEST_CASE("trajectory round trip is byte identical") {
  TempDir tmp;
  io::Trajectory traj;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uni(-100.0, 100.0);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  for (int i = 0; i < 25; ++i) {
    traj.times.push_back(0.4 * i);
    geometry::Pose6D p;
    p.position = {uni(rng), uni(rng), uni(rng)};
    p.orientation = {ang(rng), ang(rng) / 3.0, ang(rng)};
    traj.poses.push_back(p);
  }
  const fs::path f1 = tmp.path / "a.traj", f2 = tmp.path / "b.traj";
  io::write_trajectory(f1, traj);
  const io::Trajectory back = io::read_trajectory(f1);
  REQUIRE(back.poses.size() == traj.poses.size());
  for (std::size_t i = 0; i < traj.poses.size(); ++i) {
    CHECK(back.times[i] == traj.times[i]);
    CHECK(back.poses[i].position == traj.poses[i].position);
    CHECK(back.poses[i].orientation == traj.poses[i].orientation);
  }
  io::write_trajectory(f2, back);
  CHECK(slurp(f1) == slurp(f2));
}

TEST_CASE("trajectory reader skips comments and rejects malformed lines") {
  TempDir tmp;
  const fs::path f = tmp.path / "c.traj";
  {
    std::ofstream out(f);
    out << "# comment\n\n0.0 1 2 3 0.1 0.2 0.3\n";
  }
  const io::Trajectory traj = io::read_trajectory(f);
  REQUIRE(traj.poses.size() == 1);
  CHECK(traj.poses[0].position.x() == 1.0);
  {
    std::ofstream out(f);
    out << "0.0 1 2 3\n";
  }
  CHECK_THROWS_AS(io::read_trajectory(f), io::FormatError);
  CHECK_THROWS_AS(io::read_trajectory(tmp.path / "missing.traj"), io::FormatError);
}

TEST_CASE("pgm round trip preserves quantized intensities") {
  TempDir tmp;
  features::GrayImage img;
  img.width = 17;
  img.height = 9;
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  img.pixels.resize(17 * 9);
  for (auto& p : img.pixels) p = uni(rng);
  const fs::path f = tmp.path / "img.pgm";
  io::write_pgm(f, img);
  const features::GrayImage back = io::read_pgm(f);
  REQUIRE(back.width == 17);
  REQUIRE(back.height == 9);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    CHECK(std::abs(back.pixels[i] - img.pixels[i]) <= 0.5f / 255.0f + 1e-6f);
  }
  // Write -> read -> write is byte identical.
  const fs::path f2 = tmp.path / "img2.pgm";
  io::write_pgm(f2, back);
  CHECK(slurp(f) == slurp(f2));
}

TEST_CASE("descriptor set round trip is exact") {
  TempDir tmp;
  features::DescriptorSet ds;
  ds.dim = 128;
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  for (int i = 0; i < 10; ++i) {
    ds.keypoints.push_back({static_cast<float>(i), 2.0f * i, 16.0f});
    for (std::size_t c = 0; c < ds.dim; ++c) ds.data.push_back(uni(rng));
  }
  const fs::path f = tmp.path / "d.desc";
  io::write_descriptor_set(f, ds);
  const features::DescriptorSet back = io::read_descriptor_set(f);
  CHECK(back.dim == ds.dim);
  CHECK(back.data == ds.data);
  REQUIRE(back.keypoints.size() == ds.keypoints.size());
  for (std::size_t i = 0; i < ds.keypoints.size(); ++i) {
    CHECK(back.keypoints[i].x == ds.keypoints[i].x);
    CHECK(back.keypoints[i].scale == ds.keypoints[i].scale);
  }
}

TEST_CASE("descriptor reader rejects a bad magic") {
  TempDir tmp;
  const fs::path f = tmp.path / "bad.desc";
  {
    std::ofstream out(f, std::ios::binary);
    out << "NOTMAGIC and some junk";
  }
  CHECK_THROWS_AS(io::read_descriptor_set(f), io::FormatError);
}

TEST_CASE("codebook round trip is byte identical") {
  TempDir tmp;
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  std::normal_distribution<double> gauss(0.0, 1.0);

  encoder::Codebook cb;
  cb.vocabulary.k = 4;
  cb.vocabulary.dim = 8;
  cb.vocabulary.centers.resize(32);
  for (auto& v : cb.vocabulary.centers) v = uni(rng);
  const std::size_t d = 32, p = 5;
  cb.pca.mean.resize(d);
  cb.pca.basis.resize(d, p);
  cb.pca.scale.resize(p);
  for (std::size_t i = 0; i < d; ++i) cb.pca.mean[i] = gauss(rng);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < p; ++j) cb.pca.basis(i, j) = gauss(rng);
  }
  for (std::size_t j = 0; j < p; ++j) cb.pca.scale[j] = std::abs(gauss(rng)) + 0.1;

  const fs::path f1 = tmp.path / "cb1.bin", f2 = tmp.path / "cb2.bin";
  io::write_codebook(f1, cb);
  const encoder::Codebook back = io::read_codebook(f1);
  CHECK(back.vocabulary.k == cb.vocabulary.k);
  CHECK(back.vocabulary.centers == cb.vocabulary.centers);
  CHECK(back.pca.basis.rows() == cb.pca.basis.rows());
  io::write_codebook(f2, back);
  CHECK(slurp(f1) == slurp(f2));
}

TEST_CASE("database round trip is byte identical") {
  TempDir tmp;
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<float> uni(-1.0f, 1.0f);
  std::normal_distribution<double> gauss(0.0, 10.0);
  retrieval::MapDatabase db;
  db.codebook_hash = 0xdeadbeefcafef00dull;
  for (int i = 0; i < 12; ++i) {
    retrieval::MapEntry e;
    e.descriptor.resize(16);
    for (auto& v : e.descriptor) v = uni(rng);
    e.pose.position = {gauss(rng), gauss(rng), gauss(rng)};
    e.pose.orientation = {0.01 * i, 0.0, 0.3 * i};
    e.sequence_id = static_cast<std::uint32_t>(i / 5);
    e.frame_id = static_cast<std::uint32_t>(i % 5);
    db.entries.push_back(e);
  }
  const fs::path f1 = tmp.path / "db1.bin", f2 = tmp.path / "db2.bin";
  io::write_database(f1, db);
  const retrieval::MapDatabase back = io::read_database(f1);
  REQUIRE(back.entries.size() == db.entries.size());
  CHECK(back.codebook_hash == db.codebook_hash);
  for (std::size_t i = 0; i < db.entries.size(); ++i) {
    CHECK(back.entries[i].descriptor == db.entries[i].descriptor);
    CHECK(back.entries[i].pose.position == db.entries[i].pose.position);
    CHECK(back.entries[i].sequence_id == db.entries[i].sequence_id);
    CHECK(back.entries[i].frame_id == db.entries[i].frame_id);
  }
  io::write_database(f2, back);
  CHECK(slurp(f1) == slurp(f2));
}

TEST_CASE("step_record_json carries the step fields") {
  filter::StepRecord rec;
  rec.step = 7;
  rec.has_measurement = true;
  rec.support = 12;
  rec.n_eff = 345.6;
  rec.estimate.position = {1.5, -2.5, 0.0};
  rec.spread = 3.25;
  const std::string j = io::step_record_json(rec);
  CHECK(j.find("\"step\":7") != std::string::npos);
  CHECK(j.find("\"support\":12") != std::string::npos);
  CHECK(j.find("1.5") != std::string::npos);
}

TEST_CASE("localizer config write/read/write is byte identical") {
  TempDir tmp;
  config::LocalizerConfig cfg;
  cfg.seed = 77;
  cfg.filter.n_particles = 500;
  cfg.filter.init_cov_pos = {25.0, 25.0, 25.0};
  cfg.filter.motion_frame = filter::MotionFrame::Body;
  cfg.filter.resample_every_step = false;
  cfg.filter.retrieval.top_r = 15;
  const fs::path f1 = tmp.path / "loc1.cfg", f2 = tmp.path / "loc2.cfg";
  config::write_localizer_config(f1, cfg);
  const config::LocalizerConfig back = config::parse_localizer_config(f1);
  CHECK(back.seed == 77);
  CHECK(back.filter.n_particles == 500);
  CHECK(back.filter.init_cov_pos == cfg.filter.init_cov_pos);
  CHECK(back.filter.motion_frame == filter::MotionFrame::Body);
  CHECK(back.filter.resample_every_step == false);
  CHECK(back.filter.retrieval.top_r == 15);
  config::write_localizer_config(f2, back);
  CHECK(slurp(f1) == slurp(f2));
}

TEST_CASE("scenario config write/read/write is byte identical") {
  TempDir tmp;
  simworld::ScenarioConfig cfg;
  cfg.seed = 5;
  cfg.grid_n = 4;
  cfg.extent = 150.0;
  cfg.route_goal = 15;
  simworld::ConditionSpec day;
  day.name = "day";
  simworld::ConditionSpec dusk;
  dusk.name = "dusk";
  dusk.gain = 0.6;
  dusk.bias = -0.05;
  simworld::ConditionSpec rain;
  rain.name = "rain";
  rain.noise_sigma = 0.04;
  rain.occlusion_blocks = 2;
  cfg.train_conditions = {day, dusk};
  cfg.test_condition = rain;

  const fs::path f1 = tmp.path / "sc1.cfg", f2 = tmp.path / "sc2.cfg";
  config::write_scenario(f1, cfg);
  const simworld::ScenarioConfig back = config::parse_scenario(f1);
  CHECK(back.grid_n == 4);
  CHECK(back.extent == 150.0);
  REQUIRE(back.train_conditions.size() == 2);
  CHECK(back.train_conditions[1].gain == 0.6);
  CHECK(back.test_condition.occlusion_blocks == 2);
  config::write_scenario(f2, back);
  CHECK(slurp(f1) == slurp(f2));
}
