#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace jetmount {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// S(x) such that S(x) y = x cross y.
inline Mat3 skew(const Vec3& x) {
    Mat3 s;
    s << 0.0, -x.z(), x.y(),
         x.z(), 0.0, -x.x(),
        -x.y(), x.x(), 0.0;
    return s;
}

// Rodrigues formula; safe at phi -> 0.
inline Mat3 so3_exp(const Vec3& phi) {
    const double angle = phi.norm();
    if (angle < 1e-12) {
        return Mat3::Identity() + skew(phi);
    }
    const Vec3 axis = phi / angle;
    const Mat3 k = skew(axis);
    return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
}

// Rotation vector of R. Falls back to eigen-axis extraction near pi where
// the sine-based formula loses the axis.
inline Vec3 so3_log(const Mat3& r) {
    const double trace = r.trace();
    double c = 0.5 * (trace - 1.0);
    c = std::clamp(c, -1.0, 1.0);
    const double angle = std::acos(c);
    if (angle < 1e-10) {
        return 0.5 * Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    }
    if (angle > kPi - 1e-6) {
        // R ~ 2 a a^T - I; pick the dominant column.
        Mat3 aa = 0.5 * (r + Mat3::Identity());
        int col = 0;
        aa.diagonal().maxCoeff(&col);
        Vec3 axis = aa.col(col) / std::sqrt(aa(col, col));
        // Resolve the sign from the skew part when it survives.
        const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
        if (w.dot(axis) < 0.0) axis = -axis;
        return angle * axis.normalized();
    }
    const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    return (angle / (2.0 * std::sin(angle))) * w;
}

inline Mat3 rot_x(double a) {
    Mat3 r;
    r << 1, 0, 0,
         0, std::cos(a), -std::sin(a),
         0, std::sin(a), std::cos(a);
    return r;
}

inline Mat3 rot_y(double a) {
    Mat3 r;
    r << std::cos(a), 0, std::sin(a),
         0, 1, 0,
        -std::sin(a), 0, std::cos(a);
    return r;
}

inline Mat3 rot_z(double a) {
    Mat3 r;
    r << std::cos(a), -std::sin(a), 0,
         std::sin(a), std::cos(a), 0,
         0, 0, 1;
    return r;
}

inline Mat3 rpy_to_matrix(const Vec3& rpy) {
    return rot_z(rpy.z()) * rot_y(rpy.y()) * rot_x(rpy.x());
}

// Nearest rotation via the Gram-Schmidt-free polar projection.
inline Mat3 orthonormalize(const Mat3& r) {
    Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 q = svd.matrixU() * svd.matrixV().transpose();
    if (q.determinant() < 0.0) {
        Mat3 d = Mat3::Identity();
        d(2, 2) = -1.0;
        q = svd.matrixU() * d * svd.matrixV().transpose();
    }
    return q;
}

// Rigid transform: x_parent = rot * x_local + pos.
struct Pose {
    Mat3 rot = Mat3::Identity();
    Vec3 pos = Vec3::Zero();

    Pose operator*(const Pose& other) const {
        return Pose{rot * other.rot, rot * other.pos + pos};
    }
    Vec3 apply(const Vec3& p) const { return rot * p + pos; }
    Pose inverse() const { return Pose{rot.transpose(), -(rot.transpose() * pos)}; }
};

inline bool is_rotation(const Mat3& r, double tol = 1e-9) {
    return (r.transpose() * r - Mat3::Identity()).norm() <= tol && r.determinant() > 0.0;
}

inline bool all_finite(const VecX& v) { return v.allFinite(); }

}  // namespace jetmount
