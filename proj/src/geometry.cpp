#include "mcvl/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace mcvl::geometry {

double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

EulerTriple wrap_euler(const EulerTriple& e) {
  return {wrap_angle(e[0]), wrap_angle(e[1]), wrap_angle(e[2])};
}

bool is_rotation_matrix(const Mat3& R, double tol) {
  if (!R.allFinite()) return false;
  const Mat3 err = R.transpose() * R - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

Mat3 euler_to_dcm(const EulerTriple& e) {
  const double cr = std::cos(e[0]), sr = std::sin(e[0]);
  const double cp = std::cos(e[1]), sp = std::sin(e[1]);
  const double cy = std::cos(e[2]), sy = std::sin(e[2]);
  Mat3 R;
  R << cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
       sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
       -sp,     cp * sr,                cp * cr;
  return R;
}

EulerTriple dcm_to_euler(const Mat3& R) {
  if (!is_rotation_matrix(R, 1e-6)) {
    throw InvalidRotation("dcm_to_euler: input is not a rotation matrix");
  }
  const double sp = std::clamp(-R(2, 0), -1.0, 1.0);
  if (1.0 - std::abs(sp) < 1e-12) {
    // Gimbal lock: roll := 0, yaw absorbs the free angle.
    const double pitch = sp > 0.0 ? M_PI / 2.0 : -M_PI / 2.0;
    const double yaw = sp > 0.0 ? std::atan2(R(1, 2), R(1, 1))
                                : std::atan2(-R(1, 2), R(1, 1));
    return {0.0, pitch, wrap_angle(yaw)};
  }
  const double pitch = std::asin(sp);
  const double roll = std::atan2(R(2, 1), R(2, 2));
  const double yaw = std::atan2(R(1, 0), R(0, 0));
  return {wrap_angle(roll), wrap_angle(pitch), wrap_angle(yaw)};
}

EulerTriple compose_rotation(const EulerTriple& a, const EulerTriple& b) {
  return dcm_to_euler(euler_to_dcm(a) * euler_to_dcm(b));
}

double rotation_error(const Mat3& R_est, const Mat3& R_gt) {
  const double t = (R_gt.transpose() * R_est).trace();
  return std::acos(std::clamp((t - 1.0) / 2.0, -1.0, 1.0));
}

double rotation_error(const EulerTriple& est, const EulerTriple& gt) {
  return rotation_error(euler_to_dcm(est), euler_to_dcm(gt));
}

double translation_error(const Vec3& c_est, const Vec3& c_gt) {
  return (c_est - c_gt).norm();
}

Eigen::Quaterniond euler_to_quat(const EulerTriple& e) {
  Eigen::Quaterniond q(euler_to_dcm(e));
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

EulerTriple quat_to_euler(const Eigen::Quaterniond& q) {
  return dcm_to_euler(q.normalized().toRotationMatrix());
}

EulerTriple mean_rotation(const std::vector<EulerTriple>& rs) {
  return mean_rotation(rs, std::vector<double>(rs.size(), 1.0));
}

EulerTriple mean_rotation(const std::vector<EulerTriple>& rs,
                          const std::vector<double>& weights) {
  if (rs.empty()) throw std::invalid_argument("mean_rotation: empty input");
  if (rs.size() != weights.size()) {
    throw std::invalid_argument("mean_rotation: size mismatch");
  }
  Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
  double total = 0.0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (weights[i] < 0.0) {
      throw std::invalid_argument("mean_rotation: negative weight");
    }
    const Eigen::Quaterniond q = euler_to_quat(rs[i]);
    const Eigen::Vector4d v(q.w(), q.x(), q.y(), q.z());
    M += weights[i] * v * v.transpose();  // sign-invariant accumulation
    total += weights[i];
  }
  if (total <= 0.0) {
    throw std::invalid_argument("mean_rotation: zero total weight");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(M);
  const auto& evals = es.eigenvalues();  // ascending
  // Eigenvalue tie (antipodal inputs): prefer the first input.
  if (evals[3] - evals[2] < 1e-12 * std::max(1.0, std::abs(evals[3]))) {
    return rs.front();
  }
  const Eigen::Vector4d v = es.eigenvectors().col(3);
  Eigen::Quaterniond q(v[0], v[1], v[2], v[3]);
  return quat_to_euler(q);
}

}  // namespace mcvl::geometry
