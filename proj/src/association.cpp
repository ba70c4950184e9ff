#include "crosscam/association.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crosscam/errors.hpp"

namespace crosscam {

PruneResult prune_candidates(const std::vector<PseudoLabel>& teacher_dets,
                             const std::vector<PseudoLabel>& student_uncertain,
                             const FundamentalMatrix& f, double epsilon, ContainmentMode mode) {
    PruneResult result;
    result.teacher_count = teacher_dets.size();
    result.student_count = student_uncertain.size();
    for (std::size_t ti = 0; ti < teacher_dets.size(); ++ti) {
        const auto& teacher = teacher_dets[ti];
        EpipolarBand band;
        try {
            band = bbox_epipolar_band(f, teacher.bbox, epsilon);
        } catch (const DegenerateBand&) {
            continue;  // teacher box at the epipole prunes to nothing
        }
        for (std::size_t si = 0; si < student_uncertain.size(); ++si) {
            const auto& student = student_uncertain[si];
            double margin;
            if (mode == ContainmentMode::Center) {
                margin = band_margin(band, student.bbox.center());
            } else {
                margin = -std::numeric_limits<double>::infinity();
                for (const auto& corner : student.bbox.corners())
                    margin = std::max(margin, band_margin(band, corner));
            }
            if (margin >= 0)
                result.pairs.push_back({teacher, student, margin, ti, si});
        }
    }
    result.factor = static_cast<double>(result.teacher_count * result.student_count) /
                    static_cast<double>(std::max<std::size_t>(1, result.pairs.size()));
    return result;
}

DetectionIndex::DetectionIndex(const std::map<std::string, std::vector<PseudoLabel>>& per_camera,
                               std::uint64_t n_frames)
    : n_frames_(n_frames) {
    for (const auto& [cam, dets] : per_camera) {
        auto& frames = by_camera_[cam];
        frames.resize(n_frames);
        for (const auto& d : dets) {
            if (d.frame < n_frames) frames[d.frame].push_back(d);
        }
    }
}

const std::vector<PseudoLabel>& DetectionIndex::at(const std::string& camera,
                                                   std::uint64_t frame) const {
    static const std::vector<PseudoLabel> kEmpty;
    const auto it = by_camera_.find(camera);
    if (it == by_camera_.end() || frame >= it->second.size()) return kEmpty;
    return it->second[frame];
}

std::span<const std::vector<PseudoLabel>> DetectionIndex::after(const std::string& camera,
                                                                std::uint64_t frame) const {
    const auto it = by_camera_.find(camera);
    if (it == by_camera_.end() || frame + 1 >= it->second.size()) return {};
    return {it->second.data() + frame + 1, it->second.size() - frame - 1};
}

std::vector<std::string> DetectionIndex::cameras() const {
    std::vector<std::string> out;
    for (const auto& [cam, _] : by_camera_) out.push_back(cam);
    return out;
}

TrackletPair augment_with_tracking(const CandidatePair& pair, const DetectionIndex& index,
                                   int horizon, double iou_min) {
    TrackletPair tp;
    tp.a = track_n(pair.teacher, index.after(pair.teacher.camera_id, pair.teacher.frame),
                   horizon, iou_min);
    tp.b = track_n(pair.student, index.after(pair.student.camera_id, pair.student.frame),
                   horizon, iou_min);
    tp.a_gt = pair.teacher.gt_identity;
    tp.b_gt = pair.student.gt_identity;
    tp.teacher_index = pair.teacher_index;
    tp.student_index = pair.student_index;
    return tp;
}

std::vector<double> aggregate_feature(const Tracklet& tracklet) {
    if (tracklet.embeddings.empty()) throw ZeroVector("empty tracklet");
    const std::size_t dim = tracklet.embeddings.front().size();
    std::vector<double> mean(dim, 0.0);
    for (const auto& e : tracklet.embeddings)
        for (std::size_t i = 0; i < dim; ++i) mean[i] += e[i];
    double norm2 = 0;
    for (auto& v : mean) {
        v /= static_cast<double>(tracklet.embeddings.size());
        norm2 += v * v;
    }
    if (norm2 < 1e-24) throw ZeroVector("aggregated feature has near-zero norm");
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& v : mean) v *= inv;
    return mean;
}

void reid_gate(TrackletPair& pair, double tau) {
    try {
        const auto fa = aggregate_feature(pair.a);
        const auto fb = aggregate_feature(pair.b);
        double d2 = 0;
        for (std::size_t i = 0; i < fa.size(); ++i) {
            const double d = fa[i] - fb[i];
            d2 += d * d;
        }
        pair.distance = std::sqrt(d2);
        pair.accepted = *pair.distance <= tau;
    } catch (const ZeroVector& e) {
        pair.distance.reset();
        pair.accepted = false;
        pair.note = "zero_vector";
    }
}

AssociationResult build_training_sets(const std::string& student_cam,
                                      const std::map<std::string, std::vector<PseudoLabel>>& dets,
                                      const std::vector<CameraModel>& calib,
                                      const AssociationConfig& config) {
    const auto find_cam = [&](const std::string& id) -> const CameraModel* {
        for (const auto& c : calib)
            if (c.id == id) return &c;
        return nullptr;
    };
    const CameraModel* student_model = find_cam(student_cam);
    if (!student_model) throw ConfigError("no calibration for student camera " + student_cam);
    if (dets.find(student_cam) == dets.end())
        throw ConfigError("no detections for student camera " + student_cam);

    std::uint64_t n_frames = 0;
    for (const auto& [cam, stream] : dets)
        for (const auto& d : stream) n_frames = std::max(n_frames, d.frame + 1);
    const DetectionIndex index(dets, n_frames);

    // Students come only from the uncertain tier, bucketed per frame so the
    // (frame, index) key identifies one physical box for deduplication.
    std::vector<std::vector<PseudoLabel>> student_uncertain(n_frames);
    std::vector<PseudoLabel> cs_labels;
    const std::uint64_t seed_end = std::min<std::uint64_t>(config.frame_end, n_frames);
    for (std::uint64_t f = 0; f < n_frames; ++f) {
        auto split = split_labels(index.at(student_cam, f), config.t_cls);
        student_uncertain[f] = std::move(split.uncertain);
        if (f >= config.frame_begin && f < seed_end)
            for (auto& l : split.confident) cs_labels.push_back(std::move(l));
    }

    std::vector<std::string> teacher_cams;
    for (const auto& [cam, _] : dets) {
        if (cam == student_cam) continue;
        if (!find_cam(cam)) throw ConfigError("no calibration for teacher camera " + cam);
        teacher_cams.push_back(cam);
    }
    std::sort(teacher_cams.begin(), teacher_cams.end());

    AssociationResult result;
    const int w = config.time_window;
    for (const auto& teacher_cam : teacher_cams) {
        const FundamentalMatrix f = fundamental_matrix(*find_cam(teacher_cam), *student_model);
        for (std::uint64_t frame = config.frame_begin; frame < seed_end; ++frame) {
            const auto& teachers = index.at(teacher_cam, frame);
            if (teachers.empty()) continue;
            for (int dj = -w; dj <= w; ++dj) {
                const std::int64_t j = static_cast<std::int64_t>(frame) + dj;
                if (j < 0 || j >= static_cast<std::int64_t>(n_frames)) continue;
                const auto& students = student_uncertain[static_cast<std::uint64_t>(j)];
                result.pair_product_sum += teachers.size() * students.size();
                if (students.empty()) continue;
                auto pruned =
                    prune_candidates(teachers, students, f, config.epsilon, config.containment);
                result.candidate_count += pruned.pairs.size();
                for (const auto& cand : pruned.pairs) {
                    TrackletPair pair =
                        augment_with_tracking(cand, index, config.horizon, config.iou_min);
                    reid_gate(pair, config.tau);
                    result.gated.push_back(std::move(pair));
                }
            }
        }
    }

    // Deduplicate: a student box accepted against several teachers keeps only
    // the closest one (earliest in canonical order on exact ties).
    std::map<std::pair<std::uint64_t, std::size_t>, std::size_t> best;
    for (std::size_t i = 0; i < result.gated.size(); ++i) {
        auto& p = result.gated[i];
        if (!p.accepted) continue;
        const auto key = std::make_pair(p.b.start_frame, p.student_index);
        const auto it = best.find(key);
        if (it == best.end() ||
            *p.distance < *result.gated[it->second].distance) {
            if (it != best.end()) {
                result.gated[it->second].accepted = false;
                result.gated[it->second].note = "dedup";
            }
            best[key] = i;
        } else {
            p.accepted = false;
            p.note = "dedup";
        }
    }
    for (const auto& p : result.gated)
        if (p.accepted) result.sets.ncs_pairs.push_back(p);

    result.sets.cs_labels = std::move(cs_labels);
    result.pruning_factor =
        static_cast<double>(result.pair_product_sum) /
        static_cast<double>(std::max<std::size_t>(1, result.candidate_count));
    if (result.pair_product_sum == 0) result.pruning_factor = 1.0;
    result.no_overlap = result.sets.ncs_pairs.empty();
    return result;
}

json tracklet_to_json(const Tracklet& t) {
    json boxes = json::array();
    for (const auto& b : t.boxes) boxes.push_back({b.x1, b.y1, b.x2, b.y2});
    json observed = json::array();
    for (bool o : t.observed) observed.push_back(o);
    return json{{"camera_id", t.camera_id},
                {"start_frame", t.start_frame},
                {"boxes", boxes},
                {"embeddings", t.embeddings},
                {"observed", observed}};
}

Tracklet tracklet_from_json(const json& j) {
    Tracklet t;
    t.camera_id = j.at("camera_id").get<std::string>();
    t.start_frame = j.at("start_frame").get<std::uint64_t>();
    for (const auto& b : j.at("boxes"))
        t.boxes.push_back({b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                           b.at(3).get<double>()});
    t.embeddings = j.at("embeddings").get<std::vector<std::vector<double>>>();
    for (const auto& o : j.at("observed")) t.observed.push_back(o.get<bool>());
    return t;
}

json pair_to_json(const TrackletPair& p) {
    json j{{"a", tracklet_to_json(p.a)},
           {"b", tracklet_to_json(p.b)},
           {"distance", p.distance ? json(*p.distance) : json(nullptr)},
           {"accepted", p.accepted},
           {"teacher_index", p.teacher_index},
           {"student_index", p.student_index}};
    j["a_gt"] = p.a_gt ? json(*p.a_gt) : json(nullptr);
    j["b_gt"] = p.b_gt ? json(*p.b_gt) : json(nullptr);
    if (!p.note.empty()) j["note"] = p.note;
    return j;
}

TrackletPair pair_from_json(const json& j) {
    TrackletPair p;
    p.a = tracklet_from_json(j.at("a"));
    p.b = tracklet_from_json(j.at("b"));
    if (!j.at("distance").is_null()) p.distance = j.at("distance").get<double>();
    p.accepted = j.at("accepted").get<bool>();
    p.teacher_index = j.at("teacher_index").get<std::size_t>();
    p.student_index = j.at("student_index").get<std::size_t>();
    if (j.contains("a_gt") && !j.at("a_gt").is_null())
        p.a_gt = j.at("a_gt").get<std::uint64_t>();
    if (j.contains("b_gt") && !j.at("b_gt").is_null())
        p.b_gt = j.at("b_gt").get<std::uint64_t>();
    if (j.contains("note")) p.note = j.at("note").get<std::string>();
    return p;
}

void save_pairs(const std::filesystem::path& path, const std::vector<TrackletPair>& pairs) {
    std::vector<json> lines;
    lines.reserve(pairs.size());
    for (const auto& p : pairs) lines.push_back(pair_to_json(p));
    save_jsonl(path, lines);
}

std::vector<TrackletPair> load_pairs(const std::filesystem::path& path) {
    std::vector<TrackletPair> pairs;
    for (const auto& j : load_jsonl(path)) pairs.push_back(pair_from_json(j));
    return pairs;
}

}  // namespace crosscam
