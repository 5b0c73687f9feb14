#include "mcvl/filter.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace mcvl::filter {

namespace {

// Matrix square root of a PSD covariance; tolerates singular input so that
// zero covariances sample exactly at the mean.
Eigen::Matrix3d cov_sqrt(const Eigen::Matrix3d& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  Eigen::Vector3d d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

geometry::Vec3 draw_gaussian(const geometry::Vec3& mu, const Eigen::Matrix3d& sqrt_cov,
                             Rng& rng, std::normal_distribution<double>& normal) {
  geometry::Vec3 n;
  for (int i = 0; i < 3; ++i) n[i] = normal(rng);
  return mu + sqrt_cov * n;
}

}  // namespace

ParticleSet init(const retrieval::Measurement& z0, std::size_t n,
                 const geometry::Vec3& init_cov_pos,
                 const geometry::Vec3& init_cov_rot, Rng& rng) {
  if (n < 1) throw std::invalid_argument("init: need at least one particle");
  std::normal_distribution<double> normal(0.0, 1.0);
  const geometry::Vec3 sd_pos = init_cov_pos.cwiseMax(0.0).cwiseSqrt();
  const geometry::Vec3 sd_rot = init_cov_rot.cwiseMax(0.0).cwiseSqrt();
  ParticleSet ps(n);
  for (auto& p : ps) {
    geometry::Vec3 dp, dr;
    for (int i = 0; i < 3; ++i) dp[i] = normal(rng) * sd_pos[i];
    for (int i = 0; i < 3; ++i) dr[i] = normal(rng) * sd_rot[i];
    p.pose.position = z0.pose.position + dp;
    p.pose.orientation = geometry::wrap_euler(z0.pose.orientation + dr);
    p.weight = 1.0 / static_cast<double>(n);
  }
  return ps;
}

ParticleSet init(const retrieval::Measurement& z0, const FilterConfig& cfg, Rng& rng) {
  return init(z0, cfg.n_particles, cfg.init_cov_pos, cfg.init_cov_rot, rng);
}

void predict(ParticleSet& ps, const MotionNoiseModel& noise, MotionFrame frame,
             Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Matrix3d sv = cov_sqrt(noise.sigma_v);
  const Eigen::Matrix3d sp = cov_sqrt(noise.sigma_psi);
  for (auto& p : ps) {
    const geometry::Vec3 v = draw_gaussian(noise.mu_v, sv, rng, normal);
    const geometry::Vec3 psi = draw_gaussian(noise.mu_psi, sp, rng, normal);
    if (frame == MotionFrame::Body) {
      const double yaw = p.pose.orientation[2];
      const double c = std::cos(yaw), s = std::sin(yaw);
      p.pose.position += geometry::Vec3(c * v[0] - s * v[1],
                                        s * v[0] + c * v[1], v[2]);
    } else {
      p.pose.position += v;
    }
    p.pose.orientation = geometry::compose_rotation(psi, p.pose.orientation);
  }
}

void update_weights(ParticleSet& ps, const retrieval::Measurement& z,
                    const ObservationNoiseModel& obs) {
  Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(obs.sigma_o);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
    throw std::invalid_argument("update_weights: sigma_o not invertible");
  }
  std::vector<double> logw(ps.size());
  double max_logw = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    Eigen::Vector<double, 6> r;
    r.head<3>() = z.pose.position - ps[i].pose.position;
    for (int a = 0; a < 3; ++a) {
      r[3 + a] = geometry::wrap_angle(z.pose.orientation[a] -
                                      ps[i].pose.orientation[a]);
    }
    if (!r.allFinite()) {
      throw std::invalid_argument("update_weights: non-finite residual");
    }
    const double maha = r.dot(ldlt.solve(r));
    logw[i] = std::log(std::max(ps[i].weight, 1e-300)) - 0.5 * maha;
    max_logw = std::max(max_logw, logw[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    ps[i].weight = std::exp(logw[i] - max_logw);
    sum += ps[i].weight;
  }
  for (auto& p : ps) p.weight /= sum;
}

void resample_sus(ParticleSet& ps, Rng& rng) {
  const std::size_t n = ps.size();
  std::uniform_real_distribution<double> uni(0.0, 1.0 / static_cast<double>(n));
  const double start = uni(rng);

  ParticleSet out;
  out.reserve(n);
  double cumulative = ps[0].weight;
  std::size_t i = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double pointer = start + static_cast<double>(k) / static_cast<double>(n);
    while (cumulative <= pointer && i + 1 < n) {
      ++i;
      cumulative += ps[i].weight;
    }
    out.push_back({ps[i].pose, 1.0 / static_cast<double>(n)});
  }
  ps = std::move(out);
}

geometry::Pose6D estimate(const ParticleSet& ps) {
  if (ps.empty()) throw std::invalid_argument("estimate: empty particle set");
  geometry::Vec3 pos = geometry::Vec3::Zero();
  std::vector<geometry::EulerTriple> rots;
  std::vector<double> weights;
  rots.reserve(ps.size());
  weights.reserve(ps.size());
  double total = 0.0;
  for (const auto& p : ps) {
    pos += p.weight * p.pose.position;
    rots.push_back(p.pose.orientation);
    weights.push_back(p.weight);
    total += p.weight;
  }
  geometry::Pose6D e;
  e.position = pos / total;
  e.orientation = geometry::mean_rotation(rots, weights);
  return e;
}

double effective_sample_size(const ParticleSet& ps) {
  double s2 = 0.0;
  for (const auto& p : ps) s2 += p.weight * p.weight;
  return 1.0 / s2;
}

double position_spread(const ParticleSet& ps) {
  double total = 0.0;
  geometry::Vec3 mean = geometry::Vec3::Zero();
  for (const auto& p : ps) {
    mean += p.weight * p.pose.position;
    total += p.weight;
  }
  mean /= total;
  double trace = 0.0;
  for (const auto& p : ps) {
    trace += (p.weight / total) * (p.pose.position - mean).squaredNorm();
  }
  return trace;
}

StepRecord step_with_measurement(ParticleSet& ps,
                                 const std::optional<retrieval::Measurement>& z,
                                 const FilterConfig& cfg, Rng& rng,
                                 std::size_t step_index) {
  predict(ps, cfg.motion, cfg.motion_frame, rng);

  StepRecord rec;
  rec.step = step_index;
  const bool usable = z.has_value() &&
                      !(cfg.skip_low_confidence && z->low_confidence);
  if (usable) {
    update_weights(ps, *z, cfg.observation);
    rec.has_measurement = true;
    rec.measurement = z->pose;
    rec.support = z->support;
    rec.n_eff = effective_sample_size(ps);
    const bool do_resample =
        cfg.resample_every_step ||
        rec.n_eff < cfg.ess_threshold_ratio * static_cast<double>(ps.size());
    if (do_resample) resample_sus(ps, rng);
  } else {
    rec.n_eff = effective_sample_size(ps);
  }
  rec.estimate = estimate(ps);
  rec.spread = position_spread(ps);
  return rec;
}

StepRecord step(ParticleSet& ps, const features::GrayImage& img,
                const retrieval::MapDatabase& db, const encoder::Codebook& cb,
                const FilterConfig& cfg, Rng& rng, std::size_t step_index) {
  std::optional<retrieval::Measurement> z;
  try {
    const encoder::GlobalDescriptor q = encoder::encode(img, cb);
    if (!q.degenerate) z = retrieval::measure(db, q, cfg.retrieval);
  } catch (const std::exception&) {
    // Measurement failure: fall through to a predict-only step.
  }
  return step_with_measurement(ps, z, cfg, rng, step_index);
}

}  // namespace mcvl::filter
