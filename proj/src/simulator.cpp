#include "crosscam/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crosscam/errors.hpp"

namespace crosscam {

namespace {

constexpr double kRingAngleOffset = 0.35;  // keeps the rig off the world axes

double clamp(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
}

CameraModel make_ring_camera(const CameraRigConfig& rig, int index, double overlap,
                             double aim_height) {
    const double angle = 2.0 * std::numbers::pi * index / rig.n_cameras + kRingAngleOffset;
    const Vec3 pos{rig.ring_radius * std::cos(angle), rig.ring_radius * std::sin(angle),
                   rig.height};
    const Vec3 tangent{-std::sin(angle), std::cos(angle), 0.0};
    // overlap=1 aims every camera at the arena center; overlap=0 swings the
    // aim fully tangential so opposing cameras watch disjoint half-planes.
    const Vec3 aim = Vec3{0, 0, aim_height} + (1.0 - overlap) * (rig.ring_radius * tangent);

    const Vec3 forward = normalized(aim - pos);
    const Vec3 right = normalized(cross(forward, Vec3{0, 0, 1}));
    const Vec3 down = cross(forward, right);

    CameraModel cam;
    cam.id = "cam" + std::to_string(index);
    cam.width = rig.image_width;
    cam.height = rig.image_height;
    const double f =
        0.5 * rig.image_width / std::tan(0.5 * rig.hfov_deg * std::numbers::pi / 180.0);
    cam.K = {{f, 0, rig.image_width / 2.0, 0, f, rig.image_height / 2.0, 0, 0, 1}};
    cam.R = Mat3::from_rows(right, down, forward);
    cam.t = -1.0 * (cam.R * pos);
    cam.validate();
    return cam;
}

GtBox make_gt_box(const CameraModel& cam, const Vec3& center, double half_w, double half_h,
                  std::uint64_t identity, std::uint32_t class_id, bool& representable) {
    GtBox box;
    box.identity = identity;
    box.class_id = class_id;
    representable = false;

    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
    bool first = true;
    for (int dx : {-1, 1})
        for (int dy : {-1, 1})
            for (int dz : {-1, 1}) {
                const Vec3 corner = center + Vec3{dx * half_w, dy * half_w, dz * half_h};
                const Projection proj = project_point(cam, corner);
                if (proj.depth <= 0) return box;  // behind the camera, skip
                if (first) {
                    x1 = x2 = proj.pixel.x;
                    y1 = y2 = proj.pixel.y;
                    first = false;
                } else {
                    x1 = std::min(x1, proj.pixel.x);
                    x2 = std::max(x2, proj.pixel.x);
                    y1 = std::min(y1, proj.pixel.y);
                    y2 = std::max(y2, proj.pixel.y);
                }
            }
    // Skip objects that do not touch the image at all.
    if (x2 < 0 || x1 > cam.width || y2 < 0 || y1 > cam.height) return box;

    box.bbox = {x1, y1, x2, y2};
    box.clipped = x1 < 0 || y1 < 0 || x2 > cam.width || y2 > cam.height;
    const Projection center_proj = project_point(cam, center);
    box.visible = center_proj.in_frustum && !box.clipped;
    representable = true;
    return box;
}

}  // namespace

void SceneConfig::validate() const {
    if (n_objects <= 0 || n_frames <= 0) throw ConfigError("n_objects and n_frames must be > 0");
    if (world_extent_x <= 0 || world_extent_y <= 0) throw ConfigError("world extent must be > 0");
    if (object_width <= 0 || object_height <= 0) throw ConfigError("object size must be > 0");
    if (motion.speed_min < 0 || motion.speed_max < motion.speed_min)
        throw ConfigError("invalid speed range");
    if (motion.turn_prob < 0 || motion.turn_prob > 1) throw ConfigError("turn_prob outside [0,1]");
    if (rig.n_cameras < 1) throw ConfigError("need at least one camera");
    if (rig.hfov_deg <= 0 || rig.hfov_deg >= 90)
        throw ConfigError("hfov_deg must lie in (0,90)");
    if (rig.overlap.empty()) throw ConfigError("overlap must have at least one entry");
    for (double o : rig.overlap)
        if (o < 0 || o > 1) throw ConfigError("overlap outside [0,1]");
    if (noise.jitter_sigma < 0) throw ConfigError("jitter_sigma must be >= 0");
    if (noise.miss_scale < 0 || noise.fp_rate < 0) throw ConfigError("negative noise rate");
    if (embedding.dim < 2) throw ConfigError("embedding dim must be >= 2");
    if (embedding.n_classes < 1) throw ConfigError("need at least one class");
}

json SceneConfig::to_json() const {
    return json{
        {"n_objects", n_objects},
        {"n_frames", n_frames},
        {"world_extent_x", world_extent_x},
        {"world_extent_y", world_extent_y},
        {"object_width", object_width},
        {"object_height", object_height},
        {"motion",
         {{"speed_min", motion.speed_min},
          {"speed_max", motion.speed_max},
          {"turn_prob", motion.turn_prob}}},
        {"rig",
         {{"n_cameras", rig.n_cameras},
          {"ring_radius", rig.ring_radius},
          {"height", rig.height},
          {"hfov_deg", rig.hfov_deg},
          {"image_width", rig.image_width},
          {"image_height", rig.image_height},
          {"aim_height", rig.aim_height},
          {"overlap", rig.overlap}}},
        {"noise",
         {{"jitter_sigma", noise.jitter_sigma},
          {"miss_scale", noise.miss_scale},
          {"fp_rate", noise.fp_rate},
          {"tp_score_mu", noise.tp_score_mu},
          {"tp_score_sigma", noise.tp_score_sigma},
          {"fp_score_mu", noise.fp_score_mu},
          {"fp_score_sigma", noise.fp_score_sigma}}},
        {"embedding",
         {{"dim", embedding.dim},
          {"n_classes", embedding.n_classes},
          {"class_spread", embedding.class_spread},
          {"style_scale", embedding.style_scale},
          {"noise_sigma", embedding.noise_sigma}}}};
}

SceneConfig SceneConfig::from_json(const json& j) {
    SceneConfig c;
    require_keys(j,
                 {"n_objects", "n_frames", "world_extent_x", "world_extent_y", "object_width",
                  "object_height", "motion", "rig", "noise", "embedding"},
                 "scene");
    c.n_objects = j.value("n_objects", c.n_objects);
    c.n_frames = j.value("n_frames", c.n_frames);
    c.world_extent_x = j.value("world_extent_x", c.world_extent_x);
    c.world_extent_y = j.value("world_extent_y", c.world_extent_y);
    c.object_width = j.value("object_width", c.object_width);
    c.object_height = j.value("object_height", c.object_height);
    if (j.contains("motion")) {
        const auto& m = j.at("motion");
        require_keys(m, {"speed_min", "speed_max", "turn_prob"}, "scene.motion");
        c.motion.speed_min = m.value("speed_min", c.motion.speed_min);
        c.motion.speed_max = m.value("speed_max", c.motion.speed_max);
        c.motion.turn_prob = m.value("turn_prob", c.motion.turn_prob);
    }
    if (j.contains("rig")) {
        const auto& r = j.at("rig");
        require_keys(r,
                     {"n_cameras", "ring_radius", "height", "hfov_deg", "image_width",
                      "image_height", "aim_height", "overlap"},
                     "scene.rig");
        c.rig.n_cameras = r.value("n_cameras", c.rig.n_cameras);
        c.rig.ring_radius = r.value("ring_radius", c.rig.ring_radius);
        c.rig.height = r.value("height", c.rig.height);
        c.rig.hfov_deg = r.value("hfov_deg", c.rig.hfov_deg);
        c.rig.image_width = r.value("image_width", c.rig.image_width);
        c.rig.image_height = r.value("image_height", c.rig.image_height);
        c.rig.aim_height = r.value("aim_height", c.rig.aim_height);
        if (r.contains("overlap")) {
            if (r.at("overlap").is_number())
                c.rig.overlap = {r.at("overlap").get<double>()};
            else
                c.rig.overlap = r.at("overlap").get<std::vector<double>>();
        }
    }
    if (j.contains("noise")) {
        const auto& n = j.at("noise");
        require_keys(n,
                     {"jitter_sigma", "miss_scale", "fp_rate", "tp_score_mu", "tp_score_sigma",
                      "fp_score_mu", "fp_score_sigma"},
                     "scene.noise");
        c.noise.jitter_sigma = n.value("jitter_sigma", c.noise.jitter_sigma);
        c.noise.miss_scale = n.value("miss_scale", c.noise.miss_scale);
        c.noise.fp_rate = n.value("fp_rate", c.noise.fp_rate);
        c.noise.tp_score_mu = n.value("tp_score_mu", c.noise.tp_score_mu);
        c.noise.tp_score_sigma = n.value("tp_score_sigma", c.noise.tp_score_sigma);
        c.noise.fp_score_mu = n.value("fp_score_mu", c.noise.fp_score_mu);
        c.noise.fp_score_sigma = n.value("fp_score_sigma", c.noise.fp_score_sigma);
    }
    if (j.contains("embedding")) {
        const auto& e = j.at("embedding");
        require_keys(e, {"dim", "n_classes", "class_spread", "style_scale", "noise_sigma"},
                     "scene.embedding");
        c.embedding.dim = e.value("dim", c.embedding.dim);
        c.embedding.n_classes = e.value("n_classes", c.embedding.n_classes);
        c.embedding.class_spread = e.value("class_spread", c.embedding.class_spread);
        c.embedding.style_scale = e.value("style_scale", c.embedding.style_scale);
        c.embedding.noise_sigma = e.value("noise_sigma", c.embedding.noise_sigma);
    }
    c.validate();
    return c;
}

SceneData gen_scene(const SceneConfig& config, std::uint64_t seed) {
    config.validate();
    SceneData scene;

    for (int i = 0; i < config.rig.n_cameras; ++i) {
        const double overlap =
            config.rig.overlap[std::min<std::size_t>(static_cast<std::size_t>(i),
                                                     config.rig.overlap.size() - 1)];
        scene.cameras.push_back(
            make_ring_camera(config.rig, i, overlap, config.rig.aim_height));
    }

    // Identity latents cluster around per-class anchor directions.
    SplitRng id_rng(seed, "identities");
    std::vector<std::vector<double>> anchors;
    for (std::size_t k = 0; k < config.embedding.n_classes; ++k)
        anchors.push_back(id_rng.unit_vector(config.embedding.dim));
    for (int i = 0; i < config.n_objects; ++i) {
        IdentityInfo info;
        info.class_id = static_cast<std::uint32_t>(i) %
                        static_cast<std::uint32_t>(config.embedding.n_classes);
        const auto dir = id_rng.unit_vector(config.embedding.dim);
        std::vector<double> z(config.embedding.dim);
        double norm2 = 0;
        for (std::size_t d = 0; d < z.size(); ++d) {
            z[d] = anchors[info.class_id][d] + config.embedding.class_spread * dir[d];
            norm2 += z[d] * z[d];
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& v : z) v *= inv;
        info.latent = std::move(z);
        scene.gt.identities.push_back(std::move(info));
    }

    SplitRng style_rng(seed, "styles");
    const std::size_t dim = config.embedding.dim;
    const double row_scale = config.embedding.style_scale / std::sqrt(static_cast<double>(dim));
    for (int c = 0; c < config.rig.n_cameras; ++c) {
        CameraStyle style;
        style.a.resize(dim * dim);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t k = 0; k < dim; ++k)
                style.a[i * dim + k] = (i == k ? 1.0 : 0.0) + row_scale * style_rng.normal();
        style.s.resize(dim);
        for (std::size_t i = 0; i < dim; ++i)
            style.s[i] = 0.5 * config.embedding.style_scale * style_rng.normal() /
                         std::sqrt(static_cast<double>(dim));
        scene.styles.push_back(std::move(style));
    }

    // Piecewise constant-velocity trajectories with boundary reflection.
    SplitRng traj_rng(seed, "trajectories");
    const double half_x = config.world_extent_x / 2.0;
    const double half_y = config.world_extent_y / 2.0;
    const double margin = config.object_width;  // keep boxes inside the arena
    struct Walker {
        double x, y, vx, vy;
    };
    std::vector<Walker> walkers;
    for (int i = 0; i < config.n_objects; ++i) {
        Walker w;
        w.x = traj_rng.uniform(-half_x + margin, half_x - margin);
        w.y = traj_rng.uniform(-half_y + margin, half_y - margin);
        const double heading = traj_rng.uniform(0, 2 * std::numbers::pi);
        const double speed = traj_rng.uniform(config.motion.speed_min, config.motion.speed_max);
        w.vx = speed * std::cos(heading);
        w.vy = speed * std::sin(heading);
        walkers.push_back(w);
    }

    const double half_w = config.object_width / 2.0;
    const double half_h = config.object_height / 2.0;
    scene.gt.trajectories.resize(static_cast<std::size_t>(config.n_frames));
    scene.gt.frames.resize(static_cast<std::size_t>(config.n_frames));
    for (int f = 0; f < config.n_frames; ++f) {
        auto& centers = scene.gt.trajectories[static_cast<std::size_t>(f)];
        for (int i = 0; i < config.n_objects; ++i) {
            auto& w = walkers[static_cast<std::size_t>(i)];
            if (f > 0) {
                if (traj_rng.uniform01() < config.motion.turn_prob) {
                    const double heading = traj_rng.uniform(0, 2 * std::numbers::pi);
                    const double speed =
                        traj_rng.uniform(config.motion.speed_min, config.motion.speed_max);
                    w.vx = speed * std::cos(heading);
                    w.vy = speed * std::sin(heading);
                }
                w.x += w.vx;
                w.y += w.vy;
                if (w.x > half_x - margin) {
                    w.x = 2 * (half_x - margin) - w.x;
                    w.vx = -w.vx;
                } else if (w.x < -half_x + margin) {
                    w.x = 2 * (-half_x + margin) - w.x;
                    w.vx = -w.vx;
                }
                if (w.y > half_y - margin) {
                    w.y = 2 * (half_y - margin) - w.y;
                    w.vy = -w.vy;
                } else if (w.y < -half_y + margin) {
                    w.y = 2 * (-half_y + margin) - w.y;
                    w.vy = -w.vy;
                }
            }
            centers.push_back({w.x, w.y, half_h});
        }

        auto& per_camera = scene.gt.frames[static_cast<std::size_t>(f)];
        per_camera.resize(scene.cameras.size());
        for (std::size_t c = 0; c < scene.cameras.size(); ++c) {
            for (int i = 0; i < config.n_objects; ++i) {
                bool representable = false;
                const GtBox box = make_gt_box(
                    scene.cameras[c], centers[static_cast<std::size_t>(i)], half_w, half_h,
                    static_cast<std::uint64_t>(i),
                    scene.gt.identities[static_cast<std::size_t>(i)].class_id, representable);
                if (representable) per_camera[c].push_back(box);
            }
        }
    }
    return scene;
}

std::vector<double> gen_embedding(const std::vector<double>& latent, const CameraStyle& style,
                                  double noise_sigma, SplitRng& rng) {
    const std::size_t dim = latent.size();
    std::vector<double> e(dim);
    for (int attempt = 0; attempt < 2; ++attempt) {
        double norm2 = 0;
        for (std::size_t i = 0; i < dim; ++i) {
            double v = style.s[i];
            for (std::size_t k = 0; k < dim; ++k) v += style.a[i * dim + k] * latent[k];
            if (noise_sigma > 0) v += noise_sigma * rng.normal();
            e[i] = v;
            norm2 += v * v;
        }
        if (norm2 >= 1e-24) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (auto& v : e) v *= inv;
            return e;
        }
        if (noise_sigma <= 0) break;  // resampling cannot change anything
    }
    throw ZeroVector("styled embedding collapsed to the zero vector");
}

std::map<std::string, std::vector<PseudoLabel>> render_detections(const SceneData& scene,
                                                                  const SceneConfig& config,
                                                                  std::uint64_t seed) {
    SplitRng score_rng(seed, "scores");
    SplitRng jitter_rng(seed, "jitter");
    SplitRng miss_rng(seed, "misses");
    SplitRng fp_rng(seed, "fps");
    SplitRng emb_rng(seed, "embeddings");

    std::map<std::string, std::vector<PseudoLabel>> out;
    for (std::size_t c = 0; c < scene.cameras.size(); ++c) {
        const auto& cam = scene.cameras[c];
        auto& stream = out[cam.id];
        for (std::size_t f = 0; f < scene.gt.frames.size(); ++f) {
            for (const auto& gt_box : scene.gt.frames[f][c]) {
                if (!gt_box.visible) continue;
                // Draw every noise source for every visible box so that
                // toggling one source never shifts another stream.
                const double score =
                    clamp(score_rng.normal(config.noise.tp_score_mu, config.noise.tp_score_sigma),
                          0.01, 0.995);
                const double jx1 = jitter_rng.normal() * config.noise.jitter_sigma;
                const double jy1 = jitter_rng.normal() * config.noise.jitter_sigma;
                const double jx2 = jitter_rng.normal() * config.noise.jitter_sigma;
                const double jy2 = jitter_rng.normal() * config.noise.jitter_sigma;
                auto embedding = gen_embedding(
                    scene.gt.identities[gt_box.identity].latent, scene.styles[c],
                    config.embedding.noise_sigma, emb_rng);
                const double p_miss =
                    clamp(config.noise.miss_scale * (1.0 - score), 0.0, 0.95);
                const bool missed = miss_rng.uniform01() < p_miss;
                if (missed) continue;

                double x1 = gt_box.bbox.x1 + jx1;
                double y1 = gt_box.bbox.y1 + jy1;
                double x2 = gt_box.bbox.x2 + jx2;
                double y2 = gt_box.bbox.y2 + jy2;
                if (x1 > x2) std::swap(x1, x2);
                if (y1 > y2) std::swap(y1, y2);
                x1 = clamp(x1, 0, cam.width);
                x2 = clamp(x2, 0, cam.width);
                y1 = clamp(y1, 0, cam.height);
                y2 = clamp(y2, 0, cam.height);
                if (x2 - x1 < 0.5 || y2 - y1 < 0.5) continue;

                PseudoLabel det;
                det.camera_id = cam.id;
                det.frame = static_cast<std::uint64_t>(f);
                det.bbox = {x1, y1, x2, y2};
                det.score = score;
                det.class_id = gt_box.class_id;
                det.embedding = std::move(embedding);
                det.gt_identity = gt_box.identity;
                stream.push_back(std::move(det));
            }

            const int n_fp = fp_rng.poisson(config.noise.fp_rate);
            for (int k = 0; k < n_fp; ++k) {
                const double cx = fp_rng.uniform(0, cam.width);
                const double cy = fp_rng.uniform(0, cam.height);
                const double w = fp_rng.uniform(12, 60);
                const double h = w * fp_rng.uniform(1.5, 3.0);
                const double score =
                    clamp(fp_rng.normal(config.noise.fp_score_mu, config.noise.fp_score_sigma),
                          0.01, 0.995);
                const auto class_id = static_cast<std::uint32_t>(
                    fp_rng.uniform_int(config.embedding.n_classes));
                auto embedding = fp_rng.unit_vector(config.embedding.dim);

                PseudoLabel det;
                det.camera_id = cam.id;
                det.frame = static_cast<std::uint64_t>(f);
                det.bbox = {clamp(cx - w / 2, 0, cam.width), clamp(cy - h / 2, 0, cam.height),
                            clamp(cx + w / 2, 0, cam.width), clamp(cy + h / 2, 0, cam.height)};
                if (det.bbox.width() < 0.5 || det.bbox.height() < 0.5) continue;
                det.score = score;
                det.class_id = class_id;
                det.embedding = std::move(embedding);
                stream.push_back(std::move(det));
            }
        }
    }
    return out;
}

std::vector<GtRecord> flatten_ground_truth(const SceneData& scene) {
    std::vector<GtRecord> records;
    for (std::size_t f = 0; f < scene.gt.frames.size(); ++f)
        for (std::size_t c = 0; c < scene.cameras.size(); ++c)
            for (const auto& box : scene.gt.frames[f][c])
                records.push_back({static_cast<std::uint64_t>(f), scene.cameras[c].id,
                                   box.identity, box.class_id, box.bbox, box.visible});
    return records;
}

void save_ground_truth(const std::filesystem::path& path, const std::vector<GtRecord>& records) {
    std::vector<json> lines;
    lines.reserve(records.size());
    for (const auto& r : records)
        lines.push_back(json{{"frame", r.frame},
                             {"camera_id", r.camera_id},
                             {"identity", r.identity},
                             {"class_id", r.class_id},
                             {"bbox", {r.bbox.x1, r.bbox.y1, r.bbox.x2, r.bbox.y2}},
                             {"visible", r.visible}});
    save_jsonl(path, lines);
}

std::vector<GtRecord> load_ground_truth(const std::filesystem::path& path) {
    std::vector<GtRecord> records;
    for (const auto& j : load_jsonl(path)) {
        GtRecord r;
        r.frame = j.at("frame").get<std::uint64_t>();
        r.camera_id = j.at("camera_id").get<std::string>();
        r.identity = j.at("identity").get<std::uint64_t>();
        r.class_id = j.at("class_id").get<std::uint32_t>();
        const auto& b = j.at("bbox");
        r.bbox = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                  b.at(3).get<double>()};
        r.visible = j.at("visible").get<bool>();
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace crosscam
