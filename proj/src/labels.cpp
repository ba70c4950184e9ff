#include "crosscam/labels.hpp"

#include "crosscam/errors.hpp"

namespace crosscam {

std::string tier_name(Tier t) {
    switch (t) {
        case Tier::Confident: return "confident";
        case Tier::Uncertain: return "uncertain";
        case Tier::Unassigned: return "unassigned";
    }
    return "unassigned";
}

SplitLabels split_labels(const std::vector<PseudoLabel>& detections, double t_cls) {
    if (!(t_cls > 0.0 && t_cls < 1.0))
        throw InvalidThreshold("t_cls must lie in (0,1), got " + std::to_string(t_cls));
    SplitLabels out;
    for (const auto& d : detections) {
        PseudoLabel l = d;
        if (l.score >= t_cls) {
            l.tier = Tier::Confident;
            out.confident.push_back(std::move(l));
        } else {
            l.tier = Tier::Uncertain;
            out.uncertain.push_back(std::move(l));
        }
    }
    return out;
}

json label_to_json(const PseudoLabel& l, bool with_tier) {
    json j{{"camera_id", l.camera_id},
           {"frame", l.frame},
           {"bbox", {l.bbox.x1, l.bbox.y1, l.bbox.x2, l.bbox.y2}},
           {"score", l.score},
           {"class_id", l.class_id},
           {"embedding", l.embedding}};
    j["gt_identity"] = l.gt_identity ? json(*l.gt_identity) : json(nullptr);
    if (with_tier && l.tier != Tier::Unassigned) j["tier"] = tier_name(l.tier);
    return j;
}

PseudoLabel label_from_json(const json& j) {
    PseudoLabel l;
    l.camera_id = j.at("camera_id").get<std::string>();
    l.frame = j.at("frame").get<std::uint64_t>();
    const auto& b = j.at("bbox");
    l.bbox = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
              b.at(3).get<double>()};
    l.score = j.at("score").get<double>();
    l.class_id = j.at("class_id").get<std::uint32_t>();
    l.embedding = j.at("embedding").get<std::vector<double>>();
    if (j.contains("gt_identity") && !j.at("gt_identity").is_null())
        l.gt_identity = j.at("gt_identity").get<std::uint64_t>();
    if (j.contains("tier")) {
        const auto name = j.at("tier").get<std::string>();
        if (name == "confident")
            l.tier = Tier::Confident;
        else if (name == "uncertain")
            l.tier = Tier::Uncertain;
    }
    return l;
}

std::vector<PseudoLabel> load_detections(const std::filesystem::path& path) {
    std::vector<PseudoLabel> out;
    for (const auto& j : load_jsonl(path)) out.push_back(label_from_json(j));
    return out;
}

void save_detections(const std::filesystem::path& path, const std::vector<PseudoLabel>& labels,
                     bool with_tier) {
    std::vector<json> lines;
    lines.reserve(labels.size());
    for (const auto& l : labels) lines.push_back(label_to_json(l, with_tier));
    save_jsonl(path, lines);
}

}  // namespace crosscam
