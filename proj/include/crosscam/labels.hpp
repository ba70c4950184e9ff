#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crosscam/bbox.hpp"
#include "crosscam/io.hpp"

namespace crosscam {

enum class Tier { Unassigned, Confident, Uncertain };

std::string tier_name(Tier t);

/// One detected box with its classification score and reID descriptor.
/// gt_identity is only ever set by the simulator and is used by oracles and
/// evaluation, never by the pipeline itself.
struct PseudoLabel {
    std::string camera_id;
    std::uint64_t frame = 0;
    BBox bbox;
    double score = 0.0;
    std::uint32_t class_id = 0;
    std::vector<double> embedding;
    Tier tier = Tier::Unassigned;
    std::optional<std::uint64_t> gt_identity;
};

struct SplitLabels {
    std::vector<PseudoLabel> confident;
    std::vector<PseudoLabel> uncertain;
};

/// Partition by score >= t_cls (boundary goes to confident), preserving
/// order and stamping tiers. Throws InvalidThreshold outside (0,1).
SplitLabels split_labels(const std::vector<PseudoLabel>& detections, double t_cls);

json label_to_json(const PseudoLabel& l, bool with_tier);
PseudoLabel label_from_json(const json& j);

std::vector<PseudoLabel> load_detections(const std::filesystem::path& path);
void save_detections(const std::filesystem::path& path, const std::vector<PseudoLabel>& labels,
                     bool with_tier);

}  // namespace crosscam
