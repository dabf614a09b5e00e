#pragma once

#include <Eigen/Dense>

#include "so3sync/error.hpp"

namespace so3sync {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Default numerical budgets. Every checked constructor and map below takes
// its tolerance as a trailing argument defaulting to these.
inline constexpr double kSkewTol = 1e-9;
inline constexpr double kRotationTol = 1e-9;
inline constexpr double kUnitAxisTol = 1e-12;
inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kAttitudeNormClamp = 1e-12;
inline constexpr double kProjectionMaxDistance = 0.5;

/// Element of SO(3): 3x3 orthonormal with unit determinant.
class RotationMatrix {
public:
    RotationMatrix() : m_(Mat3::Identity()) {}

    /// Throws Errc::NotARotation when ||m'm - I||_F or |det(m) - 1| exceed `tol`.
    explicit RotationMatrix(const Mat3& m, double tol = kRotationTol);

    static RotationMatrix identity() { return RotationMatrix(); }

    const Mat3& matrix() const { return m_; }
    double operator()(int r, int c) const { return m_(r, c); }

    RotationMatrix transpose() const { return RotationMatrix(m_.transpose(), Unchecked{}); }

    RotationMatrix operator*(const RotationMatrix& rhs) const {
        return RotationMatrix(m_ * rhs.m_, Unchecked{});
    }
    Vec3 operator*(const Vec3& v) const { return m_ * v; }

    /// Distance to the group, ||m'm - I||_F.
    double orthonormality_error() const {
        return (m_.transpose() * m_ - Mat3::Identity()).norm();
    }

private:
    struct Unchecked {};
    RotationMatrix(const Mat3& m, Unchecked) : m_(m) {}

    Mat3 m_;
};

/// Angle (rad) and unit axis.
class AxisAngle {
public:
    /// Throws Errc::NonUnitAxis if | ||axis|| - 1 | > tol.
    AxisAngle(double theta, const Vec3& axis, double tol = kUnitAxisTol);

    /// Normalizes `axis` first; throws Errc::NonUnitAxis for a zero axis.
    static AxisAngle from_unnormalized(double theta, const Vec3& axis);

    double theta() const { return theta_; }
    const Vec3& axis() const { return axis_; }

private:
    double theta_;
    Vec3 axis_;
};

/// Real symmetric 3x3 matrix.
class SymMatrix3 {
public:
    SymMatrix3() : a_(Mat3::Zero()) {}
    explicit SymMatrix3(const Mat3& a, double tol = kSymmetryTol);

    static SymMatrix3 diagonal(double a, double b, double c) {
        return SymMatrix3(Vec3(a, b, c).asDiagonal().toDenseMatrix());
    }

    const Mat3& matrix() const { return a_; }

    friend bool operator==(const SymMatrix3& x, const SymMatrix3& y) { return x.a_ == y.a_; }

private:
    Mat3 a_;
};

/// x^ with hat(x) * y = x cross y.
Mat3 hat(const Vec3& v);

/// Inverse of hat; throws Errc::NonSkewInput if ||m + m'||_F > tol.
Vec3 vex(const Mat3& m, double tol = kSkewTol);

/// vex of the skew-symmetric part: 0.5 [a32 - a23, a13 - a31, a21 - a12].
Vec3 psi(const Mat3& a);

/// E(A) = 0.5 (tr(A) I - A').
Mat3 e_matrix(const Mat3& a);

/// Rodrigues: I + sin(theta) u^ + (1 - cos(theta)) (u^)^2.
RotationMatrix rot_axis_angle(const AxisAngle& aa);

/// Exponential map of a rotation vector.
RotationMatrix exp_so3(const Vec3& r);

/// Inverse of rot_axis_angle with theta in [0, pi].
///
/// At theta = 0 the axis is e1. At theta = pi the axis is recovered from
/// 0.5 (R + I) = u u' and its sign is chosen so that the first nonzero
/// component is positive.
AxisAngle log_so3(const RotationMatrix& r);

/// |R|_I = 0.5 sqrt(tr(I - R)), in [0, 1].
double attitude_norm(const RotationMatrix& r);

/// Nearest rotation in Frobenius norm (orthogonal polar factor).
///
/// Throws Errc::DegenerateMatrix if det(m) <= 0 or the Frobenius distance
/// from m to the result exceeds `max_distance`.
RotationMatrix project_to_so3(const Mat3& m, double max_distance = kProjectionMaxDistance);

}  // namespace so3sync
