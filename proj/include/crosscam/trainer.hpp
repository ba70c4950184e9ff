#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "crosscam/association.hpp"
#include "crosscam/io.hpp"

namespace crosscam {

/// Two named parameter groups of a small classifier:
///   backbone   h = tanh(W_b x + b_b)
///   detection  cls = softmax(W_d h + b_d)
/// Group membership is fixed at construction; the trainer only ever updates
/// one group per phase.
struct ToyModelParams {
    std::size_t d_in = 0;
    std::size_t d_h = 0;
    std::size_t n_classes = 0;  // includes a background slot
    std::vector<double> w_backbone;  // d_h x d_in, row-major
    std::vector<double> b_backbone;  // d_h
    std::vector<double> w_detect;    // n_classes x d_h
    std::vector<double> b_detect;    // n_classes

    static ToyModelParams init(std::size_t d_in, std::size_t d_h, std::size_t n_classes,
                               std::uint64_t seed);

    json to_json() const;
    static ToyModelParams from_json(const json& j);
};

enum class ParamGroup { Backbone, Detection };

/// Loss weights for one phase plus the epoch boundaries. Phase 1 runs with
/// (alpha, beta) = (1, 0), phase 2 with (0, 1).
struct LossSchedule {
    double alpha = 1.0;
    double beta = 0.0;
    int epochs_phase1 = 30;
    int epochs_phase2 = 30;

    static LossSchedule phase1(int e1 = 30, int e2 = 30) { return {1.0, 0.0, e1, e2}; }
    static LossSchedule phase2(int e1 = 30, int e2 = 30) { return {0.0, 1.0, e1, e2}; }
};

/// Class distribution for one descriptor; sums to 1.
std::vector<double> forward(const ToyModelParams& params, std::span<const double> x);

/// Sum over pairs of CE(p, q) = -sum_c p_c ln(max(q_c, 1e-12)).
double consistency_loss(
    std::span<const std::pair<std::vector<double>, std::vector<double>>> pairs);

/// -ln(max(cls[label], 1e-12)). Throws LabelOutOfRange.
double detection_loss(std::span<const double> cls, std::uint32_t label);

double overall_loss(const LossSchedule& schedule, double consistency, double det);

/// Phase-1 batch: (x1, x2) descriptor pairs run through the same model.
struct PairBatch {
    std::vector<std::pair<std::vector<double>, std::vector<double>>> items;
};

/// Phase-2 batch: (descriptor, class label).
struct LabelBatch {
    std::vector<std::pair<std::vector<double>, std::uint32_t>> items;
};

using Batch = std::variant<PairBatch, LabelBatch>;

struct Gradients {
    std::vector<double> w_backbone;
    std::vector<double> b_backbone;
    std::vector<double> w_detect;
    std::vector<double> b_detect;

    static Gradients zeros(const ToyModelParams& p);
};

enum class ConsistencyMode { Literal, Symmetric };

/// Analytic gradients of the summed overall loss, routed to `active` only;
/// the inactive group's gradient entries are exactly zero. Throws
/// PhaseBatchMismatch when the batch type does not carry the loss the
/// schedule weights (pairs for alpha > 0, labels for beta > 0).
Gradients backward(const ToyModelParams& params, const Batch& batch,
                   const LossSchedule& schedule, ParamGroup active,
                   ConsistencyMode mode = ConsistencyMode::Literal);

/// Summed loss matching backward(), for finite-difference checks.
double batch_loss(const ToyModelParams& params, const Batch& batch,
                  const LossSchedule& schedule, ConsistencyMode mode = ConsistencyMode::Literal);

enum class TrainMode {
    Full,               // phase 1 = consistency on ncs pairs
    NoPhase1,           // detection head only
    BackboneConfident,  // phase 1 = detection CE on cs labels, routed to backbone
};

struct TrainConfig {
    double lr = 0.01;
    int batch_size = 8;
    int epochs_phase1 = 30;
    int epochs_phase2 = 30;
    std::size_t d_h = 32;
    std::size_t n_classes = 4;
    std::uint64_t seed = 0;
    ConsistencyMode consistency = ConsistencyMode::Literal;
    TrainMode mode = TrainMode::Full;
};

struct EpochLoss {
    int epoch = 0;      // global epoch index, 0-based
    int phase = 1;
    double loss = 0.0;  // dataset mean per item after the epoch
};

struct TrainResult {
    ToyModelParams params;
    ToyModelParams params_initial;
    ToyModelParams params_after_phase1;
    std::vector<EpochLoss> curve;
    double initial_phase1_loss = 0.0;  // summed dataset loss before training
    double final_phase1_loss = 0.0;
    bool phase1_skipped = false;
};

/// Descriptor pairs (student, teacher) per aligned tracklet frame, plus the
/// labeled confident set. This realizes the per-pair sum of the consistency
/// objective.
struct TrainingData {
    PairBatch pairs;
    LabelBatch labels;
};

TrainingData training_data_from_sets(const TrainingSets& sets);

/// Two-phase SGD: phase 1 updates the backbone group, phase 2 the detection
/// group. Skips phase 1 with a warning when no pairs exist (no shared FOV);
/// throws ConfigError when phase 2 has no labels, Diverged on non-finite
/// loss.
TrainResult train_two_phase(const TrainingData& data, const TrainConfig& config);

/// Fraction of (descriptor, class) samples whose argmax class matches.
double classification_accuracy(
    const ToyModelParams& params,
    std::span<const std::pair<std::vector<double>, std::uint32_t>> samples);

void save_params(const std::filesystem::path& path, const ToyModelParams& p);
ToyModelParams load_params(const std::filesystem::path& path);

}  // namespace crosscam
