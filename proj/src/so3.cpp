#include "so3sync/so3.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace so3sync {

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::NonSkewInput: return "NonSkewInput";
        case Errc::NonUnitAxis: return "NonUnitAxis";
        case Errc::NotARotation: return "NotARotation";
        case Errc::NotSymmetric: return "NotSymmetric";
        case Errc::DegenerateMatrix: return "DegenerateMatrix";
        case Errc::InvalidGraph: return "InvalidGraph";
        case Errc::NotConnected: return "NotConnected";
        case Errc::HasCycle: return "HasCycle";
        case Errc::DuplicateEdge: return "DuplicateEdge";
        case Errc::MissingLeaderAttitude: return "MissingLeaderAttitude";
        case Errc::UnknownNeighbor: return "UnknownNeighbor";
        case Errc::MissingNeighbor: return "MissingNeighbor";
        case Errc::NonPositiveGain: return "NonPositiveGain";
        case Errc::NonPositiveDefiniteGain: return "NonPositiveDefiniteGain";
        case Errc::RepeatedEigenvalue: return "RepeatedEigenvalue";
        case Errc::NonPositiveDefiniteInertia: return "NonPositiveDefiniteInertia";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::IntegrationDiverged: return "IntegrationDiverged";
        case Errc::EmptyPiSet: return "EmptyPiSet";
        case Errc::LeaderSlotNotPi: return "LeaderSlotNotPi";
        case Errc::EigensolverFailure: return "EigensolverFailure";
        case Errc::ParseError: return "ParseError";
        case Errc::ValidationError: return "ValidationError";
        case Errc::MultipleLeaders: return "MultipleLeaders";
        case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

RotationMatrix::RotationMatrix(const Mat3& m, double tol) : m_(m) {
    if (!m.allFinite()) {
        throw Error(Errc::NotARotation, "non-finite entries");
    }
    const double ortho = (m.transpose() * m - Mat3::Identity()).norm();
    const double det = m.determinant();
    if (ortho > tol || std::abs(det - 1.0) > tol) {
        std::ostringstream os;
        os << "||R'R - I||_F = " << ortho << ", det = " << det;
        throw Error(Errc::NotARotation, os.str());
    }
}

AxisAngle::AxisAngle(double theta, const Vec3& axis, double tol) : theta_(theta), axis_(axis) {
    if (!std::isfinite(theta) || !axis.allFinite() || std::abs(axis.norm() - 1.0) > tol) {
        throw Error(Errc::NonUnitAxis, "axis norm must be 1");
    }
}

AxisAngle AxisAngle::from_unnormalized(double theta, const Vec3& axis) {
    const double n = axis.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw Error(Errc::NonUnitAxis, "zero or non-finite axis");
    }
    // Leave already-unit axes untouched so that serialized values reload bit-exactly.
    if (std::abs(n - 1.0) <= 4 * std::numeric_limits<double>::epsilon()) {
        return AxisAngle(theta, axis);
    }
    return AxisAngle(theta, axis / n);
}

SymMatrix3::SymMatrix3(const Mat3& a, double tol) : a_(a) {
    if (!a.allFinite() || (a - a.transpose()).norm() > tol) {
        throw Error(Errc::NotSymmetric, "matrix is not symmetric");
    }
}

Mat3 hat(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return m;
}

Vec3 vex(const Mat3& m, double tol) {
    if ((m + m.transpose()).norm() > tol) {
        throw Error(Errc::NonSkewInput, "input is not skew-symmetric");
    }
    return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

Vec3 psi(const Mat3& a) {
    return 0.5 * Vec3(a(2, 1) - a(1, 2), a(0, 2) - a(2, 0), a(1, 0) - a(0, 1));
}

Mat3 e_matrix(const Mat3& a) {
    return 0.5 * (a.trace() * Mat3::Identity() - a.transpose());
}

RotationMatrix rot_axis_angle(const AxisAngle& aa) {
    const Mat3 u = hat(aa.axis());
    const Mat3 r = Mat3::Identity() + std::sin(aa.theta()) * u + (1.0 - std::cos(aa.theta())) * u * u;
    return RotationMatrix(r);
}

RotationMatrix exp_so3(const Vec3& r) {
    const double theta = r.norm();
    if (theta == 0.0) {
        return RotationMatrix::identity();
    }
    return rot_axis_angle(AxisAngle(theta, r / theta));
}

namespace {

// Below this ||psi(R)|| = sin(theta) a rotation with negative cosine is
// treated as exactly a half turn; the induced error is below 1e-11.
constexpr double kHalfTurnSinTol = 1e-12;

Vec3 canonical_sign(Vec3 u) {
    for (int i = 0; i < 3; ++i) {
        if (u(i) != 0.0) {
            return u(i) < 0.0 ? Vec3(-u) : u;
        }
    }
    return u;
}

}  // namespace

AxisAngle log_so3(const RotationMatrix& rot) {
    const Mat3& r = rot.matrix();
    const Vec3 s = psi(r);  // sin(theta) u
    const double sn = s.norm();
    const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);

    if (c >= 0.0) {
        if (sn == 0.0) {
            return AxisAngle(0.0, Vec3::UnitX());
        }
        return AxisAngle(std::atan2(sn, c), s / sn);
    }

    // Obtuse angle: sin(theta) is small, so read the axis from the symmetric
    // part (1 - cos) u u' and take only the sign from psi.
    const Mat3 b = 0.5 * (r + r.transpose()) - c * Mat3::Identity();
    const double one_minus_c = 1.0 - c;
    int k = 0;
    b.diagonal().maxCoeff(&k);
    Vec3 u;
    const double uk = std::sqrt(std::max(b(k, k), 0.0) / one_minus_c);
    for (int j = 0; j < 3; ++j) {
        u(j) = (j == k) ? uk : b(k, j) / (one_minus_c * uk);
    }
    u.normalize();

    if (sn <= kHalfTurnSinTol) {
        return AxisAngle(std::numbers::pi, canonical_sign(u));
    }
    if (u.dot(s) < 0.0) {
        u = -u;
    }
    return AxisAngle(std::atan2(sn, c), u);
}

double attitude_norm(const RotationMatrix& r) {
    double arg = 3.0 - r.matrix().trace();
    if (arg < 0.0) {
        arg = 0.0;  // round-off only: tr(R) <= 3 on SO(3)
    }
    return 0.5 * std::sqrt(arg);
}

RotationMatrix project_to_so3(const Mat3& m, double max_distance) {
    if (!m.allFinite() || !(m.determinant() > 0.0)) {
        throw Error(Errc::DegenerateMatrix, "determinant must be positive");
    }
    // Newton iteration X <- (X + X^-T) / 2 converges quadratically to the
    // orthogonal polar factor of any nonsingular matrix.
    Mat3 x = m;
    for (int it = 0; it < 64; ++it) {
        const Mat3 next = 0.5 * (x + x.inverse().transpose());
        const double delta = (next - x).norm();
        x = next;
        if (delta <= 4 * std::numeric_limits<double>::epsilon()) {
            break;
        }
    }
    const double dist = (m - x).norm();
    if (!(dist <= max_distance)) {
        std::ostringstream os;
        os << "distance to SO(3) " << dist << " exceeds " << max_distance;
        throw Error(Errc::DegenerateMatrix, os.str());
    }
    return RotationMatrix(x);
}

}  // namespace so3sync
