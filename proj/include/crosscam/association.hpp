#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crosscam/geometry.hpp"
#include "crosscam/labels.hpp"
#include "crosscam/tracker.hpp"

namespace crosscam {

enum class ContainmentMode { Center, AnyCorner };

/// A coarse cross-camera pair: teacher box (any tier) whose epipolar band
/// captured an uncertain student box.
struct CandidatePair {
    PseudoLabel teacher;
    PseudoLabel student;
    double band_margin = 0.0;
    std::size_t teacher_index = 0;  // file order within the teacher frame
    std::size_t student_index = 0;  // file order within the student frame
};

struct TrackletPair {
    Tracklet a;  // teacher side
    Tracklet b;  // student side
    std::optional<double> distance;
    bool accepted = false;
    std::string note;  // "", "zero_vector", "dedup"
    std::size_t teacher_index = 0;
    std::size_t student_index = 0;
    // Seed identities, simulator runs only; evaluation reads these.
    std::optional<std::uint64_t> a_gt;
    std::optional<std::uint64_t> b_gt;
};

struct TrainingSets {
    std::vector<TrackletPair> ncs_pairs;   // accepted, deduplicated
    std::vector<PseudoLabel> cs_labels;    // confident tier on the student camera
};

struct PruneResult {
    std::vector<CandidatePair> pairs;
    std::size_t teacher_count = 0;
    std::size_t student_count = 0;
    /// |teacher| * |student| / max(1, |candidates|)
    double factor = 1.0;
};

/// Epipolar pruning for one frame: keep (teacher, student) pairs whose
/// student query point falls inside the teacher box's epipolar band.
/// F must map teacher pixels to student-image lines.
PruneResult prune_candidates(const std::vector<PseudoLabel>& teacher_dets,
                             const std::vector<PseudoLabel>& student_uncertain,
                             const FundamentalMatrix& f, double epsilon,
                             ContainmentMode mode = ContainmentMode::Center);

/// Detections bucketed by camera and frame for O(1) slot lookup.
class DetectionIndex {
public:
    DetectionIndex(const std::map<std::string, std::vector<PseudoLabel>>& per_camera,
                   std::uint64_t n_frames);

    const std::vector<PseudoLabel>& at(const std::string& camera, std::uint64_t frame) const;
    std::span<const std::vector<PseudoLabel>> after(const std::string& camera,
                                                    std::uint64_t frame) const;
    std::uint64_t n_frames() const { return n_frames_; }
    std::vector<std::string> cameras() const;

private:
    std::map<std::string, std::vector<std::vector<PseudoLabel>>> by_camera_;
    std::uint64_t n_frames_ = 0;
};

/// Track both seeds independently over the next `horizon` frames.
TrackletPair augment_with_tracking(const CandidatePair& pair, const DetectionIndex& index,
                                   int horizon, double iou_min);

/// Mean of the tracklet's embeddings, L2-normalized. Throws ZeroVector on
/// exact cancellation.
std::vector<double> aggregate_feature(const Tracklet& tracklet);

/// Euclidean distance of the two aggregated features; accepted iff <= tau.
/// A ZeroVector on either side rejects the pair with a diagnostic note.
void reid_gate(TrackletPair& pair, double tau);

struct AssociationConfig {
    double t_cls = 0.8;
    double epsilon = 6.0;
    double tau = 0.7;
    int horizon = 4;
    int time_window = 0;     // teacher frame i vs student frames i-w..i+w
    double iou_min = 0.3;    // tracker association threshold
    ContainmentMode containment = ContainmentMode::Center;
    std::uint64_t frame_begin = 0;              // seed frames [begin, end)
    std::uint64_t frame_end = UINT64_MAX;
};

struct AssociationResult {
    TrainingSets sets;
    /// Every gated pair in canonical order (frame, teacher camera, teacher
    /// box, student box); accepted marks final membership in ncs_pairs.
    std::vector<TrackletPair> gated;
    std::size_t pair_product_sum = 0;   // sum over frames of |teacher|*|student|
    std::size_t candidate_count = 0;
    double pruning_factor = 1.0;
    bool no_overlap = false;
};

/// Full pipeline for one student camera: per teacher camera and seed frame,
/// prune by epipolar band, augment by tracking, gate by aggregated-feature
/// distance, then deduplicate so each student box keeps its closest teacher.
AssociationResult build_training_sets(const std::string& student_cam,
                                      const std::map<std::string, std::vector<PseudoLabel>>& dets,
                                      const std::vector<CameraModel>& calib,
                                      const AssociationConfig& config);

json tracklet_to_json(const Tracklet& t);
Tracklet tracklet_from_json(const json& j);
json pair_to_json(const TrackletPair& p);
TrackletPair pair_from_json(const json& j);

void save_pairs(const std::filesystem::path& path, const std::vector<TrackletPair>& pairs);
std::vector<TrackletPair> load_pairs(const std::filesystem::path& path);

}  // namespace crosscam
