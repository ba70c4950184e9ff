#include "crosscam/eval.hpp"

#include <algorithm>
#include <cmath>

#include "crosscam/errors.hpp"

namespace crosscam {

GtIndex::GtIndex(const std::vector<GtRecord>& records) {
    for (const auto& r : records) {
        class_by_identity_[r.identity] = r.class_id;
        if (!r.visible) continue;
        by_cam_frame_[{r.camera_id, r.frame}].push_back(r);
        visible_cams_[r.frame][r.identity].insert(r.camera_id);
    }
}

const std::vector<GtRecord>& GtIndex::boxes(const std::string& camera,
                                            std::uint64_t frame) const {
    static const std::vector<GtRecord> kEmpty;
    const auto it = by_cam_frame_.find({camera, frame});
    return it == by_cam_frame_.end() ? kEmpty : it->second;
}

bool GtIndex::is_visible(const std::string& camera, std::uint64_t frame,
                         std::uint64_t identity) const {
    const auto fit = visible_cams_.find(frame);
    if (fit == visible_cams_.end()) return false;
    const auto iit = fit->second.find(identity);
    return iit != fit->second.end() && iit->second.count(camera) > 0;
}

std::uint32_t GtIndex::class_of(std::uint64_t identity) const {
    const auto it = class_by_identity_.find(identity);
    if (it == class_by_identity_.end())
        throw MissingGT("identity " + std::to_string(identity) + " not in ground truth");
    return it->second;
}

std::size_t GtIndex::covisible_pairs(const std::string& student_cam, std::uint64_t begin,
                                     std::uint64_t end) const {
    std::size_t count = 0;
    for (const auto& [frame, identities] : visible_cams_) {
        if (frame < begin || frame >= end) continue;
        for (const auto& [identity, cams] : identities) {
            (void)identity;
            if (cams.count(student_cam) == 0) continue;
            if (cams.size() > 1) ++count;
        }
    }
    return count;
}

std::size_t GtIndex::visible_count(const std::string& camera, std::uint64_t begin,
                                   std::uint64_t end) const {
    std::size_t count = 0;
    for (const auto& [key, boxes] : by_cam_frame_) {
        if (key.first != camera || key.second < begin || key.second >= end) continue;
        count += boxes.size();
    }
    return count;
}

namespace {

/// Greedy score-descending matching inside one (camera, frame) group.
/// Returns, for each detection index in the group, whether it matched.
std::vector<bool> match_group(const std::vector<const PseudoLabel*>& dets,
                              const std::vector<GtRecord>& gt_boxes, double iou_thresh) {
    std::vector<std::size_t> order(dets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a]->score > dets[b]->score;
    });
    std::vector<bool> gt_used(gt_boxes.size(), false);
    std::vector<bool> matched(dets.size(), false);
    for (const std::size_t di : order) {
        double best_iou = 0.0;
        int best = -1;
        for (std::size_t gi = 0; gi < gt_boxes.size(); ++gi) {
            if (gt_used[gi]) continue;
            const double v = iou(dets[di]->bbox, gt_boxes[gi].bbox);
            if (v > best_iou) {
                best_iou = v;
                best = static_cast<int>(gi);
            }
        }
        if (best >= 0 && best_iou >= iou_thresh) {
            gt_used[static_cast<std::size_t>(best)] = true;
            matched[di] = true;
        }
    }
    return matched;
}

double safe_f1(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

}  // namespace

TierQuality tier_quality(const std::vector<PseudoLabel>& labels, const GtIndex& gt,
                         double iou_thresh) {
    // Group detections by (camera, frame), preserving file order.
    std::map<std::pair<std::string, std::uint64_t>, std::vector<const PseudoLabel*>> groups;
    for (const auto& l : labels) groups[{l.camera_id, l.frame}].push_back(&l);

    std::set<std::string> cameras;
    for (const auto& l : labels) cameras.insert(l.camera_id);
    std::size_t total_gt = 0;
    bool any_gt = false;

    TierQuality q;
    q.iou_thresh = iou_thresh;
    std::size_t tp_conf = 0, tp_unc = 0, n_conf = 0, n_unc = 0, tp_all = 0, n_all = 0;
    std::set<std::pair<std::string, std::uint64_t>> gt_domains;
    for (const auto& [key, dets] : groups) {
        const auto& gt_boxes = gt.boxes(key.first, key.second);
        const auto matched = match_group(dets, gt_boxes, iou_thresh);
        for (std::size_t i = 0; i < dets.size(); ++i) {
            ++n_all;
            if (matched[i]) ++tp_all;
            if (dets[i]->tier == Tier::Confident) {
                ++n_conf;
                if (matched[i]) ++tp_conf;
            } else if (dets[i]->tier == Tier::Uncertain) {
                ++n_unc;
                if (matched[i]) ++tp_unc;
            }
        }
    }
    // Recall denominator: every visible GT box on the labelled cameras.
    for (const auto& cam : cameras) {
        const std::size_t n = gt.visible_count(cam, 0, UINT64_MAX);
        total_gt += n;
        if (n > 0) any_gt = true;
    }
    if (!any_gt) throw MissingGT("no visible ground truth for the labelled cameras");

    const auto tier_stats = [&](std::size_t tp, std::size_t count) {
        TierStats s;
        s.tp = tp;
        s.count = count;
        if (count > 0) s.precision = static_cast<double>(tp) / static_cast<double>(count);
        s.recall = total_gt > 0 ? static_cast<double>(tp) / static_cast<double>(total_gt) : 0.0;
        return s;
    };
    q.confident = tier_stats(tp_conf, n_conf);
    q.uncertain = tier_stats(tp_unc, n_unc);
    q.combined = tier_stats(tp_all, n_all);
    return q;
}

PairPr association_pr(const std::vector<TrackletPair>& accepted_pairs, const GtIndex& gt,
                      const std::string& student_cam, std::uint64_t frame_begin,
                      std::uint64_t frame_end) {
    AssociationPrAccumulator acc;
    for (const auto& p : accepted_pairs) acc.add(p);
    return acc.finish(gt, student_cam, frame_begin, frame_end);
}

void AssociationPrAccumulator::add(const TrackletPair& pair) {
    ++accepted_;
    if (pair.a_gt && pair.b_gt && *pair.a_gt == *pair.b_gt) {
        ++tp_;
        matched_.insert({*pair.b_gt, pair.b.start_frame});
    }
}

PairPr AssociationPrAccumulator::finish(const GtIndex& gt, const std::string& student_cam,
                                        std::uint64_t frame_begin,
                                        std::uint64_t frame_end) const {
    PairPr pr;
    pr.accepted = accepted_;
    pr.tp = tp_;
    pr.gt_pairs = gt.covisible_pairs(student_cam, frame_begin, frame_end);
    std::size_t matched_in_range = 0;
    for (const auto& [identity, frame] : matched_) {
        (void)identity;
        if (frame >= frame_begin && frame < frame_end) ++matched_in_range;
    }
    pr.precision = accepted_ > 0 ? static_cast<double>(tp_) / static_cast<double>(accepted_) : 0.0;
    pr.recall = pr.gt_pairs > 0
                    ? static_cast<double>(matched_in_range) / static_cast<double>(pr.gt_pairs)
                    : 0.0;
    pr.f1 = safe_f1(pr.precision, pr.recall);
    return pr;
}

double average_precision(const std::vector<PseudoLabel>& detections, const GtIndex& gt,
                         double iou_thresh) {
    // Total positives over the detections' cameras.
    std::set<std::string> cameras;
    for (const auto& d : detections) cameras.insert(d.camera_id);
    std::size_t total_gt = 0;
    for (const auto& cam : cameras) total_gt += gt.visible_count(cam, 0, UINT64_MAX);
    if (total_gt == 0) throw MissingGT("no visible ground truth boxes");

    std::vector<std::size_t> order(detections.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return detections[a].score > detections[b].score;
    });

    std::map<std::pair<std::string, std::uint64_t>, std::vector<bool>> gt_used;
    std::vector<double> precision, recall;
    std::size_t tp = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const auto& d = detections[order[rank]];
        const auto& boxes = gt.boxes(d.camera_id, d.frame);
        auto& used = gt_used[{d.camera_id, d.frame}];
        used.resize(boxes.size(), false);
        double best_iou = 0.0;
        int best = -1;
        for (std::size_t gi = 0; gi < boxes.size(); ++gi) {
            if (used[gi]) continue;
            const double v = iou(d.bbox, boxes[gi].bbox);
            if (v > best_iou) {
                best_iou = v;
                best = static_cast<int>(gi);
            }
        }
        if (best >= 0 && best_iou >= iou_thresh) {
            used[static_cast<std::size_t>(best)] = true;
            ++tp;
        }
        precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(total_gt));
    }

    // All-points interpolation: integrate recall steps against the running
    // maximum of precision over higher recalls.
    double ap = 0.0;
    double p_interp = 0.0;
    for (std::size_t i = precision.size(); i-- > 0;) {
        p_interp = std::max(p_interp, precision[i]);
        const double r_lo = i > 0 ? recall[i - 1] : 0.0;
        ap += (recall[i] - r_lo) * p_interp;
    }
    return ap;
}

std::vector<SweepPoint> sweep_tau(const std::vector<TrackletPair>& gated, const GtIndex& gt,
                                  const std::string& student_cam, std::uint64_t frame_begin,
                                  std::uint64_t frame_end, const std::vector<double>& taus) {
    // Best (lowest-distance) pair per student box; at any tau the deduplicated
    // accepted set is exactly the best pairs with distance <= tau.
    std::map<std::pair<std::uint64_t, std::size_t>, const TrackletPair*> best;
    for (const auto& p : gated) {
        if (!p.distance) continue;
        const auto key = std::make_pair(p.b.start_frame, p.student_index);
        const auto it = best.find(key);
        if (it == best.end() || *p.distance < *it->second->distance) best[key] = &p;
    }
    std::vector<SweepPoint> points;
    for (const double tau : taus) {
        AssociationPrAccumulator acc;
        for (const auto& [key, p] : best) {
            (void)key;
            if (*p->distance <= tau) acc.add(*p);
        }
        const PairPr pr = acc.finish(gt, student_cam, frame_begin, frame_end);
        points.push_back({tau, pr.precision, pr.recall, pr.f1});
    }
    return points;
}

namespace {

json tier_stats_json(const TierStats& s) {
    return json{{"precision", s.precision ? json(*s.precision) : json(nullptr)},
                {"recall", s.recall},
                {"tp", s.tp},
                {"count", s.count}};
}

}  // namespace

json EvalReport::to_json() const {
    return json{
        {"schema_version", 1},
        {"tier_quality",
         {{"confident", tier_stats_json(tiers.confident)},
          {"uncertain", tier_stats_json(tiers.uncertain)},
          {"combined", tier_stats_json(tiers.combined)},
          {"iou_thresh", tiers.iou_thresh}}},
        {"association",
         {{"precision", association.precision},
          {"recall", association.recall},
          {"f1", association.f1},
          {"tp", association.tp},
          {"accepted", association.accepted},
          {"gt_pairs", association.gt_pairs}}},
        {"pruning_factor", pruning_factor},
        {"ap_at_08", ap_at_08},
        {"counts",
         {{"gt_cross_camera_pairs", counts.gt_cross_camera_pairs},
          {"candidates", counts.candidates},
          {"accepted", counts.accepted}}},
        {"toy_accuracy", toy_accuracy ? json(*toy_accuracy) : json(nullptr)}};
}

}  // namespace crosscam
