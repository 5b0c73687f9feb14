#include "mcvl/filter.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>

using namespace mcvl;
using namespace mcvl::filter;

namespace {

retrieval::Measurement meas(geometry::Vec3 pos,
                            geometry::EulerTriple rot = {0, 0, 0},
                            std::size_t support = 10) {
  retrieval::Measurement z;
  z.pose.position = pos;
  z.pose.orientation = rot;
  z.support = support;
  z.low_confidence = support < 3;
  return z;
}

}  // namespace

TEST_CASE("init sample statistics match the requested covariance") {
  Rng rng(7);
  const auto z0 = meas({100, -50, 2}, {0.0, 0.0, 1.0});
  const geometry::Vec3 cov_pos(10, 10, 10), cov_rot(0.001, 0.001, 1.0);
  const auto ps = init(z0, 20000, cov_pos, cov_rot, rng);
  REQUIRE(ps.size() == 20000);

  geometry::Vec3 mean = geometry::Vec3::Zero();
  for (const auto& p : ps) {
    mean += p.pose.position;
    CHECK(p.weight == doctest::Approx(1.0 / 20000).epsilon(1e-12));
  }
  mean /= 20000.0;
  CHECK((mean - z0.pose.position).norm() < 0.1);

  geometry::Vec3 var = geometry::Vec3::Zero();
  double yaw_var = 0.0;
  for (const auto& p : ps) {
    const geometry::Vec3 d = p.pose.position - mean;
    var += d.cwiseProduct(d);
    const double dy = geometry::wrap_angle(p.pose.orientation[2] - 1.0);
    yaw_var += dy * dy;
  }
  var /= 20000.0;
  yaw_var /= 20000.0;
  for (int i = 0; i < 3; ++i) {
    CHECK(var[i] == doctest::Approx(cov_pos[i]).epsilon(0.05));
  }
  CHECK(yaw_var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("init with zero covariance collapses to the measurement") {
  Rng rng(8);
  const auto z0 = meas({1, 2, 3}, {0.1, 0.2, 0.3});
  const auto ps = init(z0, 50, geometry::Vec3::Zero(), geometry::Vec3::Zero(), rng);
  for (const auto& p : ps) {
    CHECK((p.pose.position - z0.pose.position).norm() == 0.0);
    CHECK((p.pose.orientation - z0.pose.orientation).norm() < 1e-15);
  }
}

TEST_CASE("init rejects an empty particle set") {
  Rng rng(9);
  CHECK_THROWS(init(meas({0, 0, 0}), 0, {1, 1, 1}, {1, 1, 1}, rng));
}

TEST_CASE("noise-free world-frame predict is a pure translation plus yaw") {
  Rng rng(10);
  MotionNoiseModel noise;
  noise.mu_v = {1.0, 2.0, 0.5};
  noise.sigma_v.setZero();
  noise.mu_psi = {0.0, 0.0, 0.25};
  noise.sigma_psi.setZero();
  ParticleSet ps(4);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ps[i].pose.position = {static_cast<double>(i), 0, 0};
    ps[i].weight = 0.25;
  }
  predict(ps, noise, MotionFrame::World, rng);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CHECK((ps[i].pose.position -
           geometry::Vec3(static_cast<double>(i) + 1.0, 2.0, 0.5)).norm() < 1e-12);
    CHECK(ps[i].pose.orientation[2] == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("noise-free body-frame predict rotates velocity by heading") {
  Rng rng(11);
  MotionNoiseModel noise;
  noise.mu_v = {1.0, 0.0, 0.0};
  noise.sigma_v.setZero();
  noise.mu_psi = geometry::Vec3::Zero();
  noise.sigma_psi.setZero();
  ParticleSet ps(1);
  ps[0].pose.orientation = {0.0, 0.0, M_PI / 2.0};
  ps[0].weight = 1.0;
  predict(ps, noise, MotionFrame::Body, rng);
  CHECK(ps[0].pose.position.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ps[0].pose.position.y() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("predict drift matches the mean velocity over many particles") {
  Rng rng(12);
  MotionNoiseModel noise;  // defaults
  ParticleSet ps(50000);
  for (auto& p : ps) p.weight = 1.0 / 50000.0;
  predict(ps, noise, MotionFrame::World, rng);
  geometry::Vec3 mean = geometry::Vec3::Zero();
  for (const auto& p : ps) mean += p.pose.position;
  mean /= 50000.0;
  CHECK(mean.x() == doctest::Approx(0.1).epsilon(0.2));
  CHECK(mean.y() == doctest::Approx(0.1).epsilon(0.2));
  CHECK(std::abs(mean.z() - 0.01) < 0.01);
}

TEST_CASE("update_weights prefers particles near the measurement") {
  ParticleSet ps(3);
  ps[0].pose.position = {0, 0, 0};
  ps[1].pose.position = {3, 0, 0};
  ps[2].pose.position = {30, 0, 0};
  for (auto& p : ps) p.weight = 1.0 / 3.0;
  const auto z = meas({0, 0, 0});
  update_weights(ps, z, ObservationNoiseModel{});
  CHECK(ps[0].weight > ps[1].weight);
  CHECK(ps[1].weight > ps[2].weight);
  const double sum = ps[0].weight + ps[1].weight + ps[2].weight;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  // Hand check with sigma = 5 on x: w1/w0 = exp(-0.5 * 9/5).
  CHECK(ps[1].weight / ps[0].weight ==
        doctest::Approx(std::exp(-0.5 * 9.0 / 5.0)).epsilon(1e-9));
}

TEST_CASE("update_weights wraps angular residuals") {
  ParticleSet ps(2);
  ps[0].pose.orientation = {0.0, 0.0, M_PI - 0.01};
  ps[1].pose.orientation = {0.0, 0.0, 0.0};
  for (auto& p : ps) p.weight = 0.5;
  const auto z = meas({0, 0, 0}, {0.0, 0.0, -M_PI + 0.01});
  update_weights(ps, z, ObservationNoiseModel{});
  // True yaw residual for particle 0 is 0.02 rad, not ~2*pi.
  CHECK(ps[0].weight > ps[1].weight);
}

TEST_CASE("update_weights survives an extreme outlier measurement") {
  ParticleSet ps(100);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ps[i].pose.position = {static_cast<double>(i) * 0.01, 0, 0};
    ps[i].weight = 0.01;
  }
  const auto z = meas({1e6, 1e6, 1e6});
  update_weights(ps, z, ObservationNoiseModel{});
  double sum = 0.0;
  for (const auto& p : ps) {
    CHECK(std::isfinite(p.weight));
    sum += p.weight;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("update_weights rejects a singular observation covariance") {
  ParticleSet ps(2);
  ps[0].weight = ps[1].weight = 0.5;
  ObservationNoiseModel obs;
  obs.sigma_o.setZero();
  CHECK_THROWS(update_weights(ps, meas({0, 0, 0}), obs));
}

TEST_CASE("resample_sus keeps integer-expectation counts exactly") {
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    ParticleSet ps(4);
    ps[0].pose.position = {0, 0, 0};
    ps[1].pose.position = {1, 0, 0};
    ps[2].pose.position = {2, 0, 0};
    ps[3].pose.position = {3, 0, 0};
    ps[0].weight = 0.5;
    ps[1].weight = 0.5;
    ps[2].weight = 0.0;
    ps[3].weight = 0.0;
    resample_sus(ps, rng);
    std::map<double, int> counts;
    for (const auto& p : ps) counts[p.pose.position.x()]++;
    CHECK(counts[0.0] == 2);
    CHECK(counts[1.0] == 2);
    for (const auto& p : ps) CHECK(p.weight == doctest::Approx(0.25));
  }
}

TEST_CASE("resample_sus counts are within one of N times the weight") {
  Rng rng(13);
  ParticleSet ps(10);
  std::vector<double> w = {0.05, 0.15, 0.02, 0.08, 0.3, 0.1, 0.05, 0.05, 0.12, 0.08};
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ps[i].pose.position = {static_cast<double>(i), 0, 0};
    ps[i].weight = w[i];
  }
  for (int trial = 0; trial < 200; ++trial) {
    ParticleSet copy = ps;
    resample_sus(copy, rng);
    std::map<double, int> counts;
    for (const auto& p : copy) counts[p.pose.position.x()]++;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double expected = 10.0 * w[i];
      const int c = counts.count(static_cast<double>(i))
                        ? counts[static_cast<double>(i)]
                        : 0;
      CHECK(c >= static_cast<int>(std::floor(expected)));
      CHECK(c <= static_cast<int>(std::ceil(expected)));
    }
  }
}

TEST_CASE("resample_sus empirical frequencies converge to the weights") {
  Rng rng(14);
  ParticleSet ps(5);
  const std::vector<double> w = {0.1, 0.2, 0.3, 0.25, 0.15};
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ps[i].pose.position = {static_cast<double>(i), 0, 0};
    ps[i].weight = w[i];
  }
  std::vector<long> totals(5, 0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    ParticleSet copy = ps;
    resample_sus(copy, rng);
    for (const auto& p : copy) totals[static_cast<std::size_t>(p.pose.position.x())]++;
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double freq = static_cast<double>(totals[i]) / (5.0 * trials);
    CHECK(freq == doctest::Approx(w[i]).epsilon(0.02));
  }
}

TEST_CASE("estimate is the weighted mean of positions") {
  ParticleSet ps(2);
  ps[0].pose.position = {0, 0, 0};
  ps[0].weight = 0.25;
  ps[1].pose.position = {4, 0, 0};
  ps[1].weight = 0.75;
  const auto e = estimate(ps);
  CHECK(e.position.x() == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS(estimate(ParticleSet{}));
}

TEST_CASE("estimate averages yaw across the wrap correctly") {
  ParticleSet ps(2);
  ps[0].pose.orientation = {0.0, 0.0, M_PI - 0.1};
  ps[1].pose.orientation = {0.0, 0.0, -M_PI + 0.1};
  ps[0].weight = ps[1].weight = 0.5;
  const auto e = estimate(ps);
  // Naive averaging would give yaw ~ 0; the chordal mean stays near pi.
  CHECK(std::abs(geometry::wrap_angle(e.orientation[2] - M_PI)) < 1e-9);
}

TEST_CASE("effective sample size endpoints") {
  ParticleSet ps(4);
  for (auto& p : ps) p.weight = 0.25;
  CHECK(effective_sample_size(ps) == doctest::Approx(4.0).epsilon(1e-12));
  ps[0].weight = 1.0;
  ps[1].weight = ps[2].weight = ps[3].weight = 0.0;
  CHECK(effective_sample_size(ps) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("position_spread is the trace of the weighted covariance") {
  ParticleSet ps(2);
  ps[0].pose.position = {-1, 0, 0};
  ps[1].pose.position = {1, 0, 0};
  ps[0].weight = ps[1].weight = 0.5;
  CHECK(position_spread(ps) == doctest::Approx(1.0).epsilon(1e-12));
  ps[0].pose.position = ps[1].pose.position;
  CHECK(position_spread(ps) == doctest::Approx(0.0));
}

TEST_CASE("repeated measurements at a fixed pose pull the filter onto it") {
  Rng rng(15);
  FilterConfig cfg;
  cfg.n_particles = 1000;
  cfg.motion.mu_v = geometry::Vec3::Zero();
  cfg.motion.mu_psi = geometry::Vec3::Zero();
  const geometry::Vec3 target(40, -25, 1);
  auto ps = init(meas(target), cfg, rng);
  double last_err = 1e9;
  for (std::size_t k = 0; k < 20; ++k) {
    const auto rec = step_with_measurement(ps, meas(target), cfg, rng, k);
    last_err = (rec.estimate.position - target).norm();
    CHECK(rec.has_measurement);
  }
  CHECK(last_err < 1.5);
  CHECK(position_spread(ps) < 20.0);
}

TEST_CASE("predict-only steps inflate the spread") {
  Rng rng(16);
  FilterConfig cfg;
  cfg.n_particles = 2000;
  auto ps = init(meas({0, 0, 0}), cfg, rng);
  const double s0 = position_spread(ps);
  for (std::size_t k = 0; k < 10; ++k) {
    const auto rec = step_with_measurement(ps, std::nullopt, cfg, rng, k);
    CHECK_FALSE(rec.has_measurement);
  }
  CHECK(position_spread(ps) > s0);
}

TEST_CASE("skip_low_confidence turns weak measurements into predict-only steps") {
  Rng rng(17);
  FilterConfig cfg;
  cfg.n_particles = 500;
  cfg.skip_low_confidence = true;
  auto ps = init(meas({0, 0, 0}), cfg, rng);
  auto z = meas({1000, 1000, 0});
  z.support = 1;
  z.low_confidence = true;
  const auto rec = step_with_measurement(ps, z, cfg, rng, 0);
  CHECK_FALSE(rec.has_measurement);
  // The bogus far-away measurement must not have been applied.
  CHECK((estimate(ps).position - geometry::Vec3(1000, 1000, 0)).norm() > 500.0);
}

TEST_CASE("ess-triggered resampling leaves balanced weights alone") {
  Rng rng(18);
  FilterConfig cfg;
  cfg.n_particles = 400;
  cfg.resample_every_step = false;
  cfg.ess_threshold_ratio = 0.5;
  // Tight prior and motion noise so a center measurement barely reweights
  // the cloud.
  cfg.init_cov_pos = {1.0, 1.0, 1.0};
  cfg.init_cov_rot = {1e-5, 1e-5, 1e-4};
  cfg.motion.mu_v = geometry::Vec3::Zero();
  cfg.motion.mu_psi = geometry::Vec3::Zero();
  cfg.motion.sigma_v = Eigen::Vector3d(0.01, 0.01, 1e-4).asDiagonal();
  cfg.motion.sigma_psi = Eigen::Vector3d(1e-6, 1e-6, 1e-5).asDiagonal();
  auto ps = init(meas({0, 0, 0}), cfg, rng);
  // A measurement at the cloud center keeps weights diffuse: no resample,
  // so weights stay non-uniform but the ESS stays above threshold.
  const auto rec = step_with_measurement(ps, meas({0, 0, 0}), cfg, rng, 0);
  CHECK(rec.n_eff > 0.5 * 400);
  bool uniform = true;
  for (const auto& p : ps) {
    if (std::abs(p.weight - 1.0 / 400.0) > 1e-12) uniform = false;
  }
  CHECK_FALSE(uniform);
}

TEST_CASE("filter runs are reproducible for a fixed seed") {
  FilterConfig cfg;
  cfg.n_particles = 300;
  auto run = [&cfg]() {
    Rng rng(99);
    auto ps = init(meas({5, 5, 0}), cfg, rng);
    geometry::Pose6D last;
    for (std::size_t k = 0; k < 8; ++k) {
      const auto rec = step_with_measurement(
          ps, meas({5.0 + k, 5.0, 0.0}), cfg, rng, k);
      last = rec.estimate;
    }
    return last;
  };
  const auto a = run();
  const auto b = run();
  CHECK((a.position - b.position).norm() == 0.0);
  CHECK((a.orientation - b.orientation).norm() == 0.0);
}
