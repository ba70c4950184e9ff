#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crosscam/labels.hpp"

namespace crosscam {

/// Short fixed-horizon track of one object on one camera. Frames without a
/// matched detection carry the motion-model prediction and the last observed
/// embedding, with observed=false.
struct Tracklet {
    std::string camera_id;
    std::uint64_t start_frame = 0;
    std::vector<BBox> boxes;
    std::vector<std::vector<double>> embeddings;
    std::vector<bool> observed;

    std::size_t length() const { return boxes.size(); }
};

/// Constant-velocity extrapolation over the last two boxes; with a single
/// box, returns it unchanged.
BBox predict(std::span<const BBox> prev_boxes);

/// Advance one frame: append the detection with the highest IoU against the
/// prediction if that IoU >= iou_min (ties broken by lowest index), else
/// append the prediction itself.
void step(Tracklet& track, const std::vector<PseudoLabel>& next_frame_detections,
          double iou_min);

/// Seeded track extended over n subsequent frame slots. Slots beyond
/// subsequent_frames.size() are treated as empty.
Tracklet track_n(const PseudoLabel& seed,
                 std::span<const std::vector<PseudoLabel>> subsequent_frames, int n,
                 double iou_min);

}  // namespace crosscam
