#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crosscam/association.hpp"
#include "crosscam/labels.hpp"
#include "crosscam/simulator.hpp"

namespace crosscam {

/// Ground truth reorganized for matching and co-visibility queries.
/// Only visible boxes participate.
class GtIndex {
public:
    explicit GtIndex(const std::vector<GtRecord>& records);

    const std::vector<GtRecord>& boxes(const std::string& camera, std::uint64_t frame) const;
    bool is_visible(const std::string& camera, std::uint64_t frame, std::uint64_t identity) const;
    std::uint32_t class_of(std::uint64_t identity) const;  // throws MissingGT

    /// (identity, frame) pairs visible on the student camera and on at least
    /// one other camera, restricted to frames in [begin, end).
    std::size_t covisible_pairs(const std::string& student_cam, std::uint64_t begin,
                                std::uint64_t end) const;

    std::size_t visible_count(const std::string& camera, std::uint64_t begin,
                              std::uint64_t end) const;

private:
    std::map<std::pair<std::string, std::uint64_t>, std::vector<GtRecord>> by_cam_frame_;
    std::map<std::uint64_t, std::uint32_t> class_by_identity_;
    std::map<std::uint64_t, std::map<std::uint64_t, std::set<std::string>>> visible_cams_;
};

struct TierStats {
    std::optional<double> precision;  // null when the tier is empty
    double recall = 0.0;              // denominator: all visible GT boxes
    std::size_t tp = 0;
    std::size_t count = 0;
};

struct TierQuality {
    TierStats confident;
    TierStats uncertain;
    TierStats combined;
    double iou_thresh = 0.8;
};

/// Greedy score-descending one-to-one matching against visible GT boxes of
/// the same frame and camera. Throws MissingGT if the index has no boxes at
/// all for the labels' cameras.
TierQuality tier_quality(const std::vector<PseudoLabel>& labels, const GtIndex& gt,
                         double iou_thresh = 0.8);

struct PairPr {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t tp = 0;
    std::size_t accepted = 0;
    std::size_t gt_pairs = 0;
};

/// Batch route: a pair is a true positive iff both seeds carry the same
/// non-null identity. Recall counts distinct matched (identity, frame) seeds
/// over GT co-visible pairs in [begin, end).
PairPr association_pr(const std::vector<TrackletPair>& accepted_pairs, const GtIndex& gt,
                      const std::string& student_cam, std::uint64_t frame_begin,
                      std::uint64_t frame_end);

/// Streaming route over the same definition; must agree with the batch
/// route exactly.
class AssociationPrAccumulator {
public:
    void add(const TrackletPair& pair);
    PairPr finish(const GtIndex& gt, const std::string& student_cam, std::uint64_t frame_begin,
                  std::uint64_t frame_end) const;

private:
    std::size_t accepted_ = 0;
    std::size_t tp_ = 0;
    std::set<std::pair<std::uint64_t, std::uint64_t>> matched_;  // (identity, frame)
};

/// Area under the all-points interpolated precision/recall curve at one IoU
/// threshold, single class. Throws MissingGT when gt is empty.
double average_precision(const std::vector<PseudoLabel>& detections, const GtIndex& gt,
                         double iou_thresh = 0.8);

struct SweepPoint {
    double tau = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Re-gates the given pairs at each tau (with per-student deduplication) and
/// evaluates association PR. Used for threshold selection and the report's
/// trade-off curve.
std::vector<SweepPoint> sweep_tau(const std::vector<TrackletPair>& gated, const GtIndex& gt,
                                  const std::string& student_cam, std::uint64_t frame_begin,
                                  std::uint64_t frame_end, const std::vector<double>& taus);

struct EvalCounts {
    std::size_t gt_cross_camera_pairs = 0;
    std::size_t candidates = 0;
    std::size_t accepted = 0;
};

struct EvalReport {
    TierQuality tiers;
    PairPr association;
    double pruning_factor = 1.0;
    double ap_at_08 = 0.0;
    EvalCounts counts;
    std::optional<double> toy_accuracy;  // null unless trained params were given

    json to_json() const;
};

}  // namespace crosscam
