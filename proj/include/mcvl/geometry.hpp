#pragma once
// SO(3)/SE(3) substrate: 6-DoF poses, Euler <-> rotation-matrix conversion,
// rotation composition, pose distance metrics and quaternion rotation
// averaging.
//
// Euler convention: intrinsic Z-Y-X (yaw, then pitch, then roll), i.e.
// R = Rz(yaw) * Ry(pitch) * Rx(roll). All angles in radians, wrapped to
// (-pi, pi]. At gimbal lock (|pitch| = pi/2) roll is set to 0 and yaw
// absorbs the free angle.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <vector>

namespace mcvl::geometry {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Euler triple is (roll, pitch, yaw).
using EulerTriple = Eigen::Vector3d;

// Wraps an angle to (-pi, pi].
double wrap_angle(double a);
EulerTriple wrap_euler(const EulerTriple& e);

struct Pose6D {
  Vec3 position = Vec3::Zero();      // meters
  EulerTriple orientation = EulerTriple::Zero();  // radians, wrapped

  static Pose6D make(const Vec3& pos, const EulerTriple& orient) {
    return {pos, wrap_euler(orient)};
  }
};

// Thrown by dcm_to_euler on non-orthonormal input.
struct InvalidRotation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_rotation_matrix(const Mat3& R, double tol = 1e-6);

Mat3 euler_to_dcm(const EulerTriple& e);
EulerTriple dcm_to_euler(const Mat3& R);

// phi^-1(phi(a) * phi(b))
EulerTriple compose_rotation(const EulerTriple& a, const EulerTriple& b);

// Geodesic angle acos(clamp((trace(R_gt^T R_est) - 1)/2, -1, 1)).
double rotation_error(const Mat3& R_est, const Mat3& R_gt);
double rotation_error(const EulerTriple& est, const EulerTriple& gt);

double translation_error(const Vec3& c_est, const Vec3& c_gt);

// Unit quaternion with w >= 0 canonical sign.
Eigen::Quaterniond euler_to_quat(const EulerTriple& e);
EulerTriple quat_to_euler(const Eigen::Quaterniond& q);

// Weighted quaternion average: principal eigenvector of sum_i w_i q_i q_i^T.
// Antipodal eigenvalue ties resolve to the first input. Throws on an empty
// list or non-positive total weight.
EulerTriple mean_rotation(const std::vector<EulerTriple>& rs);
EulerTriple mean_rotation(const std::vector<EulerTriple>& rs,
                          const std::vector<double>& weights);

}  // namespace mcvl::geometry
