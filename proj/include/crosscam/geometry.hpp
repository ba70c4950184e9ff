#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "crosscam/bbox.hpp"
#include "crosscam/mat3.hpp"

namespace crosscam {

/// Calibrated pinhole camera. World points map to the camera frame as
/// X_cam = R * X_world + t, then to pixels as dehom(K * X_cam).
struct CameraModel {
    std::string id;
    Mat3 K;
    Mat3 R;
    Vec3 t;
    int width = 0;
    int height = 0;

    Vec3 center() const;  // camera center in world coordinates, -R^T t

    /// Throws ConfigError unless K is upper-triangular with positive focal
    /// entries and K(2,2)=1, and R is a proper rotation (within 1e-9).
    void validate() const;
};

/// Maps a pixel in src_cam to its epipolar line in dst_cam (l = F * p_src,
/// residual convention p_dst^T F p_src = 0). Stored at unit Frobenius norm
/// with the largest-magnitude entry positive, so equal geometries compare
/// and serialize identically.
struct FundamentalMatrix {
    Mat3 F;
    std::string src_cam;
    std::string dst_cam;
};

/// Homogeneous image line a*x + b*y + c = 0 with a^2 + b^2 = 1 unless
/// near_null (the source pixel was at or next to the epipole).
struct EpipolarLine {
    double a = 0, b = 0, c = 0;
    bool near_null = false;
    bool src_out_of_bounds = false;

    double signed_distance(Vec2 p) const { return a * p.x + b * p.y + c; }
};

/// The four oriented corner lines of a bbox's epipolar image, dilated by a
/// fudge margin. A point is inside when it lies between the outermost lines,
/// each pushed out by epsilon.
struct EpipolarBand {
    std::array<EpipolarLine, 4> lines;
    double epsilon = 0.0;
};

/// Cross-product matrix: skew(t) * v == t x v for all v.
Mat3 skew(const Vec3& t);

/// F built from the relative pose of dst with respect to src
/// (R_rel = R_dst R_src^T, t_rel = t_dst - R_rel t_src). Throws
/// DegenerateGeometry when the relative translation is (near) zero.
FundamentalMatrix fundamental_matrix(const CameraModel& cam_src, const CameraModel& cam_dst);

/// Epipolar line of pixel p (src image) in the dst image. Pass the source
/// image size to get the soft out-of-bounds warning flag; zero sizes skip
/// the check.
EpipolarLine epipolar_line(const FundamentalMatrix& fm, Vec2 p, int src_width = 0,
                           int src_height = 0);

/// Band of the four corner lines, consistently oriented (any line whose
/// normal opposes line 0's is flipped). Throws DegenerateBand if a corner
/// maps to a near-null line.
EpipolarBand bbox_epipolar_band(const FundamentalMatrix& fm, const BBox& bbox, double epsilon);

/// How deep p sits inside the band; >= 0 iff contained. Defined as
/// min(epsilon - min_i s_i(p), max_i s_i(p) + epsilon).
double band_margin(const EpipolarBand& band, Vec2 p);

bool band_contains(const EpipolarBand& band, Vec2 p);

struct Projection {
    Vec2 pixel;
    double depth = 0;
    bool in_frustum = false;
};

/// Pinhole projection; in_frustum iff depth > 0 and the pixel falls inside
/// [0,width]x[0,height]. Throws PointAtCameraCenter for points at the center.
Projection project_point(const CameraModel& cam, const Vec3& p_world);

/// Calibration file: JSON array of {id, K, R, t, width, height}, row-major
/// matrices. Cameras are validated on load.
std::vector<CameraModel> load_calibration(const std::filesystem::path& path);
void save_calibration(const std::filesystem::path& path, const std::vector<CameraModel>& cams);

}  // namespace crosscam
