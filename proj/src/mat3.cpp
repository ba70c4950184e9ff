#include "crosscam/mat3.hpp"

#include <algorithm>

namespace crosscam {

Mat3 inverse(const Mat3& a) {
    const double d = det(a);
    Mat3 adj;
    adj(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
    adj(0, 1) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
    adj(0, 2) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
    adj(1, 0) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
    adj(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
    adj(1, 2) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
    adj(2, 0) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
    adj(2, 1) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
    adj(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    return (1.0 / d) * adj;
}

std::array<double, 3> singular_values(const Mat3& a) {
    // Eigenvalues of the symmetric matrix S = A^T A by cyclic Jacobi rotations.
    Mat3 s = transpose(a) * a;
    for (int sweep = 0; sweep < 32; ++sweep) {
        double off = 0;
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 3; ++q) off += s(p, q) * s(p, q);
        if (off < 1e-300) break;
        for (int p = 0; p < 3; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (s(p, q) == 0.0) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                Mat3 rot = Mat3::identity();
                rot(p, p) = c;
                rot(q, q) = c;
                rot(p, q) = sn;
                rot(q, p) = -sn;
                s = transpose(rot) * s * rot;
            }
        }
    }
    std::array<double, 3> ev = {s(0, 0), s(1, 1), s(2, 2)};
    std::sort(ev.begin(), ev.end(), std::greater<>());
    for (auto& e : ev) e = std::sqrt(std::max(e, 0.0));
    return ev;
}

}  // namespace crosscam
