#include "crosscam/tracker.hpp"

namespace crosscam {

BBox predict(std::span<const BBox> prev_boxes) {
    const std::size_t n = prev_boxes.size();
    const BBox& last = prev_boxes[n - 1];
    if (n < 2) return last;
    const Vec2 c1 = prev_boxes[n - 2].center();
    const Vec2 c2 = last.center();
    const double dx = c2.x - c1.x;
    const double dy = c2.y - c1.y;
    return {last.x1 + dx, last.y1 + dy, last.x2 + dx, last.y2 + dy};
}

void step(Tracklet& track, const std::vector<PseudoLabel>& next_frame_detections,
          double iou_min) {
    const std::size_t n = track.boxes.size();
    const std::span<const BBox> tail(track.boxes.data() + (n >= 2 ? n - 2 : 0),
                                     n >= 2 ? 2 : n);
    const BBox predicted = predict(tail);

    int best = -1;
    double best_iou = -1.0;
    for (std::size_t i = 0; i < next_frame_detections.size(); ++i) {
        const double v = iou(predicted, next_frame_detections[i].bbox);
        if (v > best_iou) {  // strict: ties keep the lowest index
            best_iou = v;
            best = static_cast<int>(i);
        }
    }

    if (best >= 0 && best_iou >= iou_min) {
        const auto& d = next_frame_detections[static_cast<std::size_t>(best)];
        track.boxes.push_back(d.bbox);
        track.embeddings.push_back(d.embedding);
        track.observed.push_back(true);
    } else {
        track.boxes.push_back(predicted);
        track.embeddings.push_back(track.embeddings.back());
        track.observed.push_back(false);
    }
}

Tracklet track_n(const PseudoLabel& seed,
                 std::span<const std::vector<PseudoLabel>> subsequent_frames, int n,
                 double iou_min) {
    Tracklet track;
    track.camera_id = seed.camera_id;
    track.start_frame = seed.frame;
    track.boxes.push_back(seed.bbox);
    track.embeddings.push_back(seed.embedding);
    track.observed.push_back(true);
    static const std::vector<PseudoLabel> kEmpty;
    for (int i = 0; i < n; ++i) {
        const auto& dets =
            static_cast<std::size_t>(i) < subsequent_frames.size()
                ? subsequent_frames[static_cast<std::size_t>(i)]
                : kEmpty;
        step(track, dets, iou_min);
    }
    return track;
}

}  // namespace crosscam
