#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "crosscam/geometry.hpp"
#include "crosscam/labels.hpp"
#include "crosscam/rng.hpp"

namespace crosscam {

struct MotionConfig {
    double speed_min = 0.05;   // world units per frame
    double speed_max = 0.30;
    double turn_prob = 0.05;   // per-frame chance of a new heading/speed
};

struct CameraRigConfig {
    int n_cameras = 3;
    double ring_radius = 13.0;
    double height = 5.0;
    double hfov_deg = 62.0;
    int image_width = 640;
    int image_height = 480;
    double aim_height = 0.9;
    /// 1 = all cameras aim at the arena center (maximal shared FOV),
    /// 0 = each camera looks tangentially along the ring (disjoint views
    /// for opposing cameras). Broadcast from a scalar in JSON.
    std::vector<double> overlap = {1.0};
};

struct DetectorNoiseConfig {
    double jitter_sigma = 2.0;   // px, per box coordinate
    double miss_scale = 1.2;     // p_miss(score) = clamp(miss_scale*(1-score), 0, 0.95)
    double fp_rate = 1.0;        // expected false positives per frame per camera
    double tp_score_mu = 0.86;
    double tp_score_sigma = 0.12;
    double fp_score_mu = 0.50;
    double fp_score_sigma = 0.16;
};

struct EmbeddingConfig {
    std::size_t dim = 16;
    std::size_t n_classes = 3;
    double class_spread = 0.55;  // latent scatter around the class anchor
    double style_scale = 0.45;   // per-camera appearance transform strength
    double noise_sigma = 0.08;   // per-observation descriptor noise
};

struct SceneConfig {
    int n_objects = 20;
    int n_frames = 200;
    double world_extent_x = 16.0;  // arena is centered on the origin
    double world_extent_y = 16.0;
    double object_width = 0.8;     // world units
    double object_height = 1.8;
    MotionConfig motion;
    CameraRigConfig rig;
    DetectorNoiseConfig noise;
    EmbeddingConfig embedding;

    void validate() const;  // throws ConfigError

    json to_json() const;
    static SceneConfig from_json(const json& j);
};

/// One ground-truth box: visible means the object's center is in the frustum
/// and the projected box lies fully inside the image. Boxes that would need
/// clipping are flagged and never rendered as detections.
struct GtBox {
    std::uint64_t identity = 0;
    std::uint32_t class_id = 0;
    BBox bbox;
    bool visible = false;
    bool clipped = false;
};

struct IdentityInfo {
    std::uint32_t class_id = 0;
    std::vector<double> latent;  // unit vector
};

/// Per-camera appearance transform: e = normalize(A*z + s + noise).
struct CameraStyle {
    std::vector<double> a;  // dim x dim, row-major
    std::vector<double> s;  // dim
};

struct GroundTruth {
    std::vector<IdentityInfo> identities;
    /// gt[frame][camera] -> boxes, camera index parallel to the camera list.
    std::vector<std::vector<std::vector<GtBox>>> frames;
    /// 3D object-center trajectories, traj[frame][identity].
    std::vector<std::vector<Vec3>> trajectories;
};

struct SceneData {
    std::vector<CameraModel> cameras;
    std::vector<CameraStyle> styles;
    GroundTruth gt;
};

/// Deterministic in (config, seed). Cameras sit on a ring looking inward;
/// trajectories are piecewise constant-velocity with boundary reflection.
SceneData gen_scene(const SceneConfig& config, std::uint64_t seed);

/// Noisy detections per camera: jittered true positives (score-dependent
/// misses) plus uniform false positives carrying null gt_identity. Noise
/// sub-streams are pre-split, so disabling one source leaves the others'
/// draws unchanged.
std::map<std::string, std::vector<PseudoLabel>> render_detections(const SceneData& scene,
                                                                  const SceneConfig& config,
                                                                  std::uint64_t seed);

/// Styled descriptor of one observation. Resamples the noise once on an
/// exact cancellation, then throws ZeroVector.
std::vector<double> gen_embedding(const std::vector<double>& latent, const CameraStyle& style,
                                  double noise_sigma, SplitRng& rng);

// gt.jsonl: flat records {frame, camera_id, identity, class_id, bbox, visible}.
struct GtRecord {
    std::uint64_t frame = 0;
    std::string camera_id;
    std::uint64_t identity = 0;
    std::uint32_t class_id = 0;
    BBox bbox;
    bool visible = false;
};

std::vector<GtRecord> flatten_ground_truth(const SceneData& scene);
void save_ground_truth(const std::filesystem::path& path, const std::vector<GtRecord>& records);
std::vector<GtRecord> load_ground_truth(const std::filesystem::path& path);

}  // namespace crosscam
