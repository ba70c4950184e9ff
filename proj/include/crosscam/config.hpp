#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "crosscam/association.hpp"
#include "crosscam/simulator.hpp"
#include "crosscam/trainer.hpp"

namespace crosscam {

struct SplitRatio {
    int train = 16;
    int val = 4;
    int test = 5;
};

/// Contiguous [begin, end) frame blocks in train/val/test order.
struct FrameSplit {
    std::uint64_t train_begin = 0, train_end = 0;
    std::uint64_t val_begin = 0, val_end = 0;
    std::uint64_t test_begin = 0, test_end = 0;
};

FrameSplit split_frames(int n_frames, const SplitRatio& ratio);

/// Everything one `run` needs, in one versioned document. Unknown keys are
/// rejected; missing keys take the defaults below.
struct PipelineConfig {
    std::uint64_t seed = 7;
    std::string student_cam = "cam0";
    double t_cls = 0.8;
    std::optional<double> epsilon;  // resolved to max(3*jitter_sigma, 1) when absent
    double tau = 0.7;
    int horizon = 4;
    int time_window = 0;
    double iou_min = 0.3;
    ContainmentMode containment = ContainmentMode::Center;
    ConsistencyMode consistency = ConsistencyMode::Literal;
    SplitRatio split;
    double lr = 0.01;
    int batch_size = 8;
    int epochs_phase1 = 30;
    int epochs_phase2 = 30;
    std::size_t hidden = 32;
    bool no_phase1 = false;
    bool backbone_confident = false;
    SceneConfig scene;

    double resolved_epsilon() const;
    AssociationConfig association_config(std::uint64_t frame_begin,
                                         std::uint64_t frame_end) const;
    TrainConfig train_config() const;
    FrameSplit frame_split() const { return split_frames(scene.n_frames, split); }

    json to_json() const;  // fully resolved, including schema_version
    static PipelineConfig from_json(const json& j);
    static PipelineConfig load(const std::filesystem::path& path);

    void validate() const;
};

}  // namespace crosscam
