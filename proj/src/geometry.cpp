#include "crosscam/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crosscam/errors.hpp"
#include "crosscam/io.hpp"

namespace crosscam {

namespace {

constexpr double kNearNullLineSq = 1e-9;   // on a^2+b^2 of l = F_unit * p
constexpr double kMinRelTranslation = 1e-12;

Mat3 canonical_scale(Mat3 f) {
    const double n = frobenius_norm(f);
    if (n > 0) f = (1.0 / n) * f;
    // Fix the sign by the largest-magnitude entry so equal geometries
    // produce identical bytes.
    double best = 0;
    for (double e : f.m)
        if (std::abs(e) > std::abs(best)) best = e;
    if (best < 0) f = -1.0 * f;
    return f;
}

}  // namespace

Vec3 CameraModel::center() const { return -1.0 * (transpose(R) * t); }

void CameraModel::validate() const {
    if (width <= 0 || height <= 0) throw ConfigError("camera " + id + ": non-positive image size");
    if (K(1, 0) != 0 || K(2, 0) != 0 || K(2, 1) != 0)
        throw ConfigError("camera " + id + ": K is not upper-triangular");
    if (K(2, 2) != 1.0) throw ConfigError("camera " + id + ": K(2,2) != 1");
    if (K(0, 0) <= 0 || K(1, 1) <= 0)
        throw ConfigError("camera " + id + ": non-positive focal length");
    const Mat3 rtr = transpose(R) * R;
    if (frobenius_norm(rtr - Mat3::identity()) > 1e-9)
        throw ConfigError("camera " + id + ": R is not orthonormal");
    if (std::abs(det(R) - 1.0) > 1e-9)
        throw ConfigError("camera " + id + ": det(R) != 1");
}

Mat3 skew(const Vec3& t) {
    return {{0, -t.z, t.y, t.z, 0, -t.x, -t.y, t.x, 0}};
}

FundamentalMatrix fundamental_matrix(const CameraModel& cam_src, const CameraModel& cam_dst) {
    const Mat3 r_rel = cam_dst.R * transpose(cam_src.R);
    const Vec3 t_rel = cam_dst.t - r_rel * cam_src.t;
    if (t_rel.norm() < kMinRelTranslation)
        throw DegenerateGeometry("pure rotation between " + cam_src.id + " and " + cam_dst.id +
                                 ": epipolar geometry undefined");
    const Mat3 essential = skew(t_rel) * r_rel;
    const Mat3 f = transpose(inverse(cam_dst.K)) * essential * inverse(cam_src.K);
    return {canonical_scale(f), cam_src.id, cam_dst.id};
}

EpipolarLine epipolar_line(const FundamentalMatrix& fm, Vec2 p, int src_width, int src_height) {
    // Work at unit Frobenius scale so the near-null test does not depend on
    // the caller's scaling of F.
    const Mat3 f = canonical_scale(fm.F);
    const Vec3 l = f * Vec3{p.x, p.y, 1.0};
    EpipolarLine line;
    line.src_out_of_bounds = src_width > 0 && src_height > 0 &&
                             (p.x < 0 || p.x > src_width || p.y < 0 || p.y > src_height);
    const double n2 = l.x * l.x + l.y * l.y;
    if (n2 < kNearNullLineSq) {
        line.a = l.x;
        line.b = l.y;
        line.c = l.z;
        line.near_null = true;
        return line;
    }
    const double inv = 1.0 / std::sqrt(n2);
    line.a = l.x * inv;
    line.b = l.y * inv;
    line.c = l.z * inv;
    return line;
}

EpipolarBand bbox_epipolar_band(const FundamentalMatrix& fm, const BBox& bbox, double epsilon) {
    if (!bbox.valid()) throw DegenerateBand("bbox has non-positive extent");
    if (epsilon < 0) throw DegenerateBand("negative epsilon");
    EpipolarBand band;
    band.epsilon = epsilon;
    const auto corners = bbox.corners();
    for (int i = 0; i < 4; ++i) {
        band.lines[static_cast<std::size_t>(i)] = epipolar_line(fm, corners[static_cast<std::size_t>(i)]);
        if (band.lines[static_cast<std::size_t>(i)].near_null)
            throw DegenerateBand("bbox corner maps to a near-null epipolar line");
    }
    // Orientation fix-up: all normals agree with line 0 (idempotent).
    const auto& l0 = band.lines[0];
    for (auto& l : band.lines) {
        if (l.a * l0.a + l.b * l0.b < 0) {
            l.a = -l.a;
            l.b = -l.b;
            l.c = -l.c;
        }
    }
    return band;
}

double band_margin(const EpipolarBand& band, Vec2 p) {
    double smin = band.lines[0].signed_distance(p);
    double smax = smin;
    for (int i = 1; i < 4; ++i) {
        const double s = band.lines[static_cast<std::size_t>(i)].signed_distance(p);
        smin = std::min(smin, s);
        smax = std::max(smax, s);
    }
    return std::min(band.epsilon - smin, smax + band.epsilon);
}

bool band_contains(const EpipolarBand& band, Vec2 p) { return band_margin(band, p) >= 0; }

Projection project_point(const CameraModel& cam, const Vec3& p_world) {
    const Vec3 x_cam = cam.R * p_world + cam.t;
    if (x_cam.norm() < 1e-12)
        throw PointAtCameraCenter("point coincides with center of camera " + cam.id);
    Projection proj;
    proj.depth = x_cam.z;
    const Vec3 h = cam.K * x_cam;
    if (std::abs(h.z) < 1e-12) {
        proj.pixel = {std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};
        proj.in_frustum = false;
        return proj;
    }
    proj.pixel = {h.x / h.z, h.y / h.z};
    proj.in_frustum = proj.depth > 0 && proj.pixel.x >= 0 && proj.pixel.x <= cam.width &&
                      proj.pixel.y >= 0 && proj.pixel.y <= cam.height;
    return proj;
}

namespace {

json mat3_to_json(const Mat3& m) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
    return rows;
}

Mat3 mat3_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) throw IoError(what + ": expected 3 rows");
    Mat3 m;
    for (int r = 0; r < 3; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || row.size() != 3) throw IoError(what + ": expected 3 columns");
        for (int c = 0; c < 3; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

}  // namespace

std::vector<CameraModel> load_calibration(const std::filesystem::path& path) {
    const json j = load_json(path);
    if (!j.is_array()) throw IoError(path.string() + ": calibration must be a JSON array");
    std::vector<CameraModel> cams;
    for (const auto& e : j) {
        CameraModel cam;
        cam.id = e.at("id").get<std::string>();
        cam.K = mat3_from_json(e.at("K"), "K of " + cam.id);
        cam.R = mat3_from_json(e.at("R"), "R of " + cam.id);
        const auto& t = e.at("t");
        cam.t = {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
        cam.width = e.at("width").get<int>();
        cam.height = e.at("height").get<int>();
        cam.validate();
        cams.push_back(std::move(cam));
    }
    return cams;
}

void save_calibration(const std::filesystem::path& path, const std::vector<CameraModel>& cams) {
    json arr = json::array();
    for (const auto& cam : cams) {
        arr.push_back({{"id", cam.id},
                       {"K", mat3_to_json(cam.K)},
                       {"R", mat3_to_json(cam.R)},
                       {"t", {cam.t.x, cam.t.y, cam.t.z}},
                       {"width", cam.width},
                       {"height", cam.height}});
    }
    save_json(path, arr);
}

}  // namespace crosscam
