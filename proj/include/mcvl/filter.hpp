#pragma once
// Monte Carlo localizer: Gaussian velocity motion model composed on SO(3)
// via DCMs, Gaussian observation weighting in log space, stochastic
// universal resampling, weighted-mean point estimate.

#include "mcvl/geometry.hpp"
#include "mcvl/retrieval.hpp"

#include <Eigen/Core>

#include <optional>
#include <random>
#include <vector>

namespace mcvl::filter {

using Rng = std::mt19937_64;

struct Particle {
  geometry::Pose6D pose;
  double weight = 0.0;
};

using ParticleSet = std::vector<Particle>;

struct MotionNoiseModel {
  geometry::Vec3 mu_v{0.1, 0.1, 0.01};               // m/step
  Eigen::Matrix3d sigma_v = Eigen::Vector3d(1.0, 1.0, 0.01).asDiagonal();
  geometry::Vec3 mu_psi{0.001, 1e-5, 0.01};          // rad/step (roll, pitch, yaw rates)
  Eigen::Matrix3d sigma_psi = Eigen::Vector3d(1e-4, 1e-5, 0.01).asDiagonal();
};

struct ObservationNoiseModel {
  Eigen::Matrix<double, 6, 6> sigma_o{
      Eigen::Vector<double, 6>(5.0, 5.0, 5.0, 1e-4, 1e-4, 1e-3).asDiagonal()};
};

enum class MotionFrame { World, Body };

struct FilterConfig {
  std::size_t n_particles = 1000;
  geometry::Vec3 init_cov_pos{10.0, 10.0, 10.0};    // diagonal variances
  geometry::Vec3 init_cov_rot{0.001, 0.001, 1.0};
  MotionNoiseModel motion;
  ObservationNoiseModel observation;
  MotionFrame motion_frame = MotionFrame::World;
  bool resample_every_step = true;   // optional N_eff trigger below, off by default
  double ess_threshold_ratio = 0.5;  // used only when resample_every_step == false
  bool skip_low_confidence = false;  // treat support < 3 measurements as missing
  retrieval::RetrievalConfig retrieval;
};

struct StepRecord {
  std::size_t step = 0;
  bool has_measurement = false;
  geometry::Pose6D measurement;
  std::size_t support = 0;
  double n_eff = 0.0;
  geometry::Pose6D estimate;
  double spread = 0.0;  // trace of the position sample covariance
};

ParticleSet init(const retrieval::Measurement& z0, std::size_t n,
                 const geometry::Vec3& init_cov_pos,
                 const geometry::Vec3& init_cov_rot, Rng& rng);
ParticleSet init(const retrieval::Measurement& z0, const FilterConfig& cfg, Rng& rng);

void predict(ParticleSet& ps, const MotionNoiseModel& noise, MotionFrame frame,
             Rng& rng);

void update_weights(ParticleSet& ps, const retrieval::Measurement& z,
                    const ObservationNoiseModel& obs);

void resample_sus(ParticleSet& ps, Rng& rng);

geometry::Pose6D estimate(const ParticleSet& ps);

double effective_sample_size(const ParticleSet& ps);
double position_spread(const ParticleSet& ps);

// One filter iteration with an externally supplied measurement (or none, in
// which case the step is predict-only).
StepRecord step_with_measurement(ParticleSet& ps,
                                 const std::optional<retrieval::Measurement>& z,
                                 const FilterConfig& cfg, Rng& rng,
                                 std::size_t step_index);

// Full iteration: encode the image, query the database, then filter.
// Measurement failures degrade to a predict-only step.
StepRecord step(ParticleSet& ps, const features::GrayImage& img,
                const retrieval::MapDatabase& db, const encoder::Codebook& cb,
                const FilterConfig& cfg, Rng& rng, std::size_t step_index);

}  // namespace mcvl::filter
