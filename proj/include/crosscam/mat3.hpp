#pragma once

#include <array>
#include <cmath>

namespace crosscam {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline Vec3 normalized(Vec3 v) {
    const double n = v.norm();
    return {v.x / n, v.y / n, v.z / n};
}

/// Row-major 3x3 matrix. Small enough that everything is done by hand.
struct Mat3 {
    std::array<double, 9> m{};

    double& operator()(int r, int c) { return m[static_cast<std::size_t>(3 * r + c)]; }
    double operator()(int r, int c) const { return m[static_cast<std::size_t>(3 * r + c)]; }

    static Mat3 identity() { return {{1, 0, 0, 0, 1, 0, 0, 0, 1}}; }
    static Mat3 zero() { return {}; }

    static Mat3 from_rows(Vec3 r0, Vec3 r1, Vec3 r2) {
        return {{r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z}};
    }
};

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            r(i, j) = s;
        }
    return r;
}

inline Vec3 operator*(const Mat3& a, Vec3 v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z,
            a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
}

inline Mat3 operator*(double s, const Mat3& a) {
    Mat3 r = a;
    for (auto& e : r.m) e *= s;
    return r;
}

inline Mat3 operator-(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (std::size_t i = 0; i < 9; ++i) r.m[i] = a.m[i] - b.m[i];
    return r;
}

inline Mat3 transpose(const Mat3& a) {
    return {{a.m[0], a.m[3], a.m[6], a.m[1], a.m[4], a.m[7], a.m[2], a.m[5], a.m[8]}};
}

inline double det(const Mat3& a) {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

/// Adjugate-based inverse. Callers guarantee invertibility (camera intrinsics,
/// rotations); a singular argument yields infs, no silent fallback.
Mat3 inverse(const Mat3& a);

inline double frobenius_norm(const Mat3& a) {
    double s = 0;
    for (double e : a.m) s += e * e;
    return std::sqrt(s);
}

/// Singular values in descending order, via cyclic Jacobi on A^T A.
std::array<double, 3> singular_values(const Mat3& a);

}  // namespace crosscam
