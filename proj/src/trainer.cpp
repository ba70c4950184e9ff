#include "crosscam/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "crosscam/errors.hpp"
#include "crosscam/rng.hpp"

namespace crosscam {

namespace {

constexpr double kLogClamp = 1e-12;  // keeps ln finite on softmax underflow

struct Trace {
    std::vector<double> h;    // tanh activations
    std::vector<double> cls;  // softmax output
};

Trace run_forward(const ToyModelParams& p, std::span<const double> x) {
    if (x.size() != p.d_in) throw DimMismatch("input dim " + std::to_string(x.size()) +
                                              ", expected " + std::to_string(p.d_in));
    Trace t;
    t.h.resize(p.d_h);
    for (std::size_t r = 0; r < p.d_h; ++r) {
        double a = p.b_backbone[r];
        for (std::size_t c = 0; c < p.d_in; ++c) a += p.w_backbone[r * p.d_in + c] * x[c];
        t.h[r] = std::tanh(a);
    }
    std::vector<double> z(p.n_classes);
    double zmax = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < p.n_classes; ++r) {
        double a = p.b_detect[r];
        for (std::size_t c = 0; c < p.d_h; ++c) a += p.w_detect[r * p.d_h + c] * t.h[c];
        z[r] = a;
        zmax = std::max(zmax, a);
    }
    double sum = 0;
    t.cls.resize(p.n_classes);
    for (std::size_t r = 0; r < p.n_classes; ++r) {
        t.cls[r] = std::exp(z[r] - zmax);
        sum += t.cls[r];
    }
    for (auto& v : t.cls) v /= sum;
    return t;
}

double cross_entropy(std::span<const double> p, std::span<const double> q) {
    double s = 0;
    for (std::size_t c = 0; c < p.size(); ++c) s -= p[c] * std::log(std::max(q[c], kLogClamp));
    return s;
}

/// dL/dlogits for softmax output `s` given dL/ds = v: s_i (v_i - s.v).
std::vector<double> softmax_backward(std::span<const double> s, std::span<const double> v) {
    double sv = 0;
    for (std::size_t i = 0; i < s.size(); ++i) sv += s[i] * v[i];
    std::vector<double> g(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) g[i] = s[i] * (v[i] - sv);
    return g;
}

/// Accumulate one input's contribution into the active group given dL/dlogits.
void accumulate(const ToyModelParams& p, std::span<const double> x, const Trace& t,
                std::span<const double> dz, ParamGroup active, double weight, Gradients& g) {
    if (active == ParamGroup::Detection) {
        for (std::size_t r = 0; r < p.n_classes; ++r) {
            const double gr = weight * dz[r];
            g.b_detect[r] += gr;
            for (std::size_t c = 0; c < p.d_h; ++c) g.w_detect[r * p.d_h + c] += gr * t.h[c];
        }
        return;
    }
    std::vector<double> dh(p.d_h, 0.0);
    for (std::size_t r = 0; r < p.n_classes; ++r)
        for (std::size_t c = 0; c < p.d_h; ++c) dh[c] += p.w_detect[r * p.d_h + c] * dz[r];
    for (std::size_t r = 0; r < p.d_h; ++r) {
        const double da = weight * dh[r] * (1.0 - t.h[r] * t.h[r]);
        g.b_backbone[r] += da;
        for (std::size_t c = 0; c < p.d_in; ++c) g.w_backbone[r * p.d_in + c] += da * x[c];
    }
}

/// dCE(p,q)/dq with the log clamp: -p/q where q is above the clamp, else 0.
std::vector<double> dce_dq(std::span<const double> p, std::span<const double> q) {
    std::vector<double> v(p.size(), 0.0);
    for (std::size_t c = 0; c < p.size(); ++c)
        if (q[c] > kLogClamp) v[c] = -p[c] / q[c];
    return v;
}

/// dCE(p,q)/dp = -ln(max(q, clamp)).
std::vector<double> dce_dp(std::span<const double> q) {
    std::vector<double> v(q.size());
    for (std::size_t c = 0; c < q.size(); ++c) v[c] = -std::log(std::max(q[c], kLogClamp));
    return v;
}

void check_schedule(const LossSchedule& s) {
    if (s.alpha < 0 || s.beta < 0) throw ConfigError("loss weights must be non-negative");
}

}  // namespace

ToyModelParams ToyModelParams::init(std::size_t d_in, std::size_t d_h, std::size_t n_classes,
                                    std::uint64_t seed) {
    ToyModelParams p;
    p.d_in = d_in;
    p.d_h = d_h;
    p.n_classes = n_classes;
    SplitRng rng(seed, "init");
    const double sb = 1.0 / std::sqrt(static_cast<double>(d_in));
    const double sd = 1.0 / std::sqrt(static_cast<double>(d_h));
    p.w_backbone.resize(d_h * d_in);
    for (auto& w : p.w_backbone) w = sb * rng.normal();
    p.b_backbone.assign(d_h, 0.0);
    p.w_detect.resize(n_classes * d_h);
    for (auto& w : p.w_detect) w = sd * rng.normal();
    p.b_detect.assign(n_classes, 0.0);
    return p;
}

json ToyModelParams::to_json() const {
    return json{{"schema_version", 1}, {"d_in", d_in},           {"d_h", d_h},
                {"n_classes", n_classes}, {"w_backbone", w_backbone}, {"b_backbone", b_backbone},
                {"w_detect", w_detect},   {"b_detect", b_detect}};
}

ToyModelParams ToyModelParams::from_json(const json& j) {
    ToyModelParams p;
    p.d_in = j.at("d_in").get<std::size_t>();
    p.d_h = j.at("d_h").get<std::size_t>();
    p.n_classes = j.at("n_classes").get<std::size_t>();
    p.w_backbone = j.at("w_backbone").get<std::vector<double>>();
    p.b_backbone = j.at("b_backbone").get<std::vector<double>>();
    p.w_detect = j.at("w_detect").get<std::vector<double>>();
    p.b_detect = j.at("b_detect").get<std::vector<double>>();
    if (p.w_backbone.size() != p.d_h * p.d_in || p.b_backbone.size() != p.d_h ||
        p.w_detect.size() != p.n_classes * p.d_h || p.b_detect.size() != p.n_classes)
        throw DimMismatch("params file has inconsistent shapes");
    return p;
}

std::vector<double> forward(const ToyModelParams& params, std::span<const double> x) {
    return run_forward(params, x).cls;
}

double consistency_loss(
    std::span<const std::pair<std::vector<double>, std::vector<double>>> pairs) {
    double s = 0;
    for (const auto& [p, q] : pairs) s += cross_entropy(p, q);
    return s;
}

double detection_loss(std::span<const double> cls, std::uint32_t label) {
    if (label >= cls.size())
        throw LabelOutOfRange("label " + std::to_string(label) + " for " +
                              std::to_string(cls.size()) + " classes");
    return -std::log(std::max(cls[label], kLogClamp));
}

double overall_loss(const LossSchedule& schedule, double consistency, double det) {
    check_schedule(schedule);
    return schedule.alpha * consistency + schedule.beta * det;
}

Gradients Gradients::zeros(const ToyModelParams& p) {
    Gradients g;
    g.w_backbone.assign(p.w_backbone.size(), 0.0);
    g.b_backbone.assign(p.b_backbone.size(), 0.0);
    g.w_detect.assign(p.w_detect.size(), 0.0);
    g.b_detect.assign(p.b_detect.size(), 0.0);
    return g;
}

Gradients backward(const ToyModelParams& params, const Batch& batch,
                   const LossSchedule& schedule, ParamGroup active, ConsistencyMode mode) {
    check_schedule(schedule);
    Gradients g = Gradients::zeros(params);
    if (schedule.alpha > 0) {
        const auto* pairs = std::get_if<PairBatch>(&batch);
        if (!pairs)
            throw PhaseBatchMismatch("consistency weight is active but the batch has labels");
        for (const auto& [x1, x2] : pairs->items) {
            const Trace t1 = run_forward(params, x1);
            const Trace t2 = run_forward(params, x2);
            const auto& p = t1.cls;
            const auto& q = t2.cls;
            std::vector<double> vp = dce_dp(q);       // dCE(p,q)/dp
            std::vector<double> vq = dce_dq(p, q);    // dCE(p,q)/dq
            if (mode == ConsistencyMode::Symmetric) {
                const auto wp = dce_dq(q, p);  // dCE(q,p)/dp
                const auto wq = dce_dp(p);     // dCE(q,p)/dq
                for (std::size_t c = 0; c < vp.size(); ++c) {
                    vp[c] = 0.5 * (vp[c] + wp[c]);
                    vq[c] = 0.5 * (vq[c] + wq[c]);
                }
            }
            accumulate(params, x1, t1, softmax_backward(p, vp), active, schedule.alpha, g);
            accumulate(params, x2, t2, softmax_backward(q, vq), active, schedule.alpha, g);
        }
    }
    if (schedule.beta > 0) {
        const auto* labels = std::get_if<LabelBatch>(&batch);
        if (!labels)
            throw PhaseBatchMismatch("detection weight is active but the batch has pairs");
        for (const auto& [x, label] : labels->items) {
            const Trace t = run_forward(params, x);
            if (label >= params.n_classes)
                throw LabelOutOfRange("label " + std::to_string(label));
            std::vector<double> dz = t.cls;
            dz[label] -= 1.0;  // softmax-CE shortcut
            accumulate(params, x, t, dz, active, schedule.beta, g);
        }
    }
    return g;
}

double batch_loss(const ToyModelParams& params, const Batch& batch, const LossSchedule& schedule,
                  ConsistencyMode mode) {
    check_schedule(schedule);
    double consistency = 0, det = 0;
    if (schedule.alpha > 0) {
        const auto* pairs = std::get_if<PairBatch>(&batch);
        if (!pairs)
            throw PhaseBatchMismatch("consistency weight is active but the batch has labels");
        for (const auto& [x1, x2] : pairs->items) {
            const auto p = forward(params, x1);
            const auto q = forward(params, x2);
            if (mode == ConsistencyMode::Literal)
                consistency += cross_entropy(p, q);
            else
                consistency += 0.5 * (cross_entropy(p, q) + cross_entropy(q, p));
        }
    }
    if (schedule.beta > 0) {
        const auto* labels = std::get_if<LabelBatch>(&batch);
        if (!labels)
            throw PhaseBatchMismatch("detection weight is active but the batch has pairs");
        for (const auto& [x, label] : labels->items)
            det += detection_loss(forward(params, x), label);
    }
    return overall_loss(schedule, consistency, det);
}

TrainingData training_data_from_sets(const TrainingSets& sets) {
    TrainingData data;
    for (const auto& pair : sets.ncs_pairs) {
        const std::size_t len = std::min(pair.a.embeddings.size(), pair.b.embeddings.size());
        for (std::size_t k = 0; k < len; ++k)
            data.pairs.items.emplace_back(pair.b.embeddings[k], pair.a.embeddings[k]);
    }
    for (const auto& l : sets.cs_labels) data.labels.items.emplace_back(l.embedding, l.class_id);
    return data;
}

namespace {

struct PhasePlan {
    Batch all;           // full dataset, for loss curves
    LossSchedule schedule;
    ParamGroup active = ParamGroup::Backbone;
    int epochs = 0;
    int phase_tag = 1;
    std::size_t n_items = 0;
};

void apply_sgd(ToyModelParams& params, const Gradients& g, ParamGroup active, double step) {
    if (active == ParamGroup::Backbone) {
        for (std::size_t i = 0; i < params.w_backbone.size(); ++i)
            params.w_backbone[i] -= step * g.w_backbone[i];
        for (std::size_t i = 0; i < params.b_backbone.size(); ++i)
            params.b_backbone[i] -= step * g.b_backbone[i];
    } else {
        for (std::size_t i = 0; i < params.w_detect.size(); ++i)
            params.w_detect[i] -= step * g.w_detect[i];
        for (std::size_t i = 0; i < params.b_detect.size(); ++i)
            params.b_detect[i] -= step * g.b_detect[i];
    }
}

template <typename Items>
Batch take_batch(const Items& items, const std::vector<std::size_t>& order, std::size_t begin,
                 std::size_t end) {
    std::remove_cvref_t<Items> slice;
    for (std::size_t i = begin; i < end; ++i) slice.items.push_back(items.items[order[i]]);
    return slice;
}

void run_phase(ToyModelParams& params, const PhasePlan& plan, const TrainConfig& cfg,
               ConsistencyMode mode, int epoch_base, std::vector<EpochLoss>& curve,
               SplitRng& shuffle_rng) {
    std::vector<std::size_t> order(plan.n_items);
    std::iota(order.begin(), order.end(), 0);
    const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
    for (int epoch = 0; epoch < plan.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t begin = 0; begin < plan.n_items; begin += batch_size) {
            const std::size_t end = std::min(plan.n_items, begin + batch_size);
            Batch batch =
                std::holds_alternative<PairBatch>(plan.all)
                    ? take_batch(std::get<PairBatch>(plan.all), order, begin, end)
                    : take_batch(std::get<LabelBatch>(plan.all), order, begin, end);
            const Gradients g = backward(params, batch, plan.schedule, plan.active, mode);
            apply_sgd(params, g, plan.active, cfg.lr / static_cast<double>(end - begin));
        }
        const double total = batch_loss(params, plan.all, plan.schedule, mode);
        if (!std::isfinite(total)) throw Diverged("non-finite loss in phase " +
                                                  std::to_string(plan.phase_tag));
        curve.push_back({epoch_base + epoch, plan.phase_tag,
                         total / static_cast<double>(std::max<std::size_t>(1, plan.n_items))});
    }
}

}  // namespace

TrainResult train_two_phase(const TrainingData& data, const TrainConfig& config) {
    if (data.labels.items.empty())
        throw ConfigError("phase 2 requires a non-empty confident label set");
    std::size_t d_in = data.labels.items.front().first.size();

    TrainResult result;
    result.params = ToyModelParams::init(d_in, config.d_h, config.n_classes, config.seed);
    result.params_initial = result.params;

    // Phase 1: backbone group.
    const bool want_phase1 = config.mode != TrainMode::NoPhase1;
    PhasePlan p1;
    p1.active = ParamGroup::Backbone;
    p1.epochs = config.epochs_phase1;
    p1.phase_tag = 1;
    if (config.mode == TrainMode::BackboneConfident) {
        p1.all = data.labels;
        p1.schedule = LossSchedule{0.0, 1.0, config.epochs_phase1, config.epochs_phase2};
        p1.n_items = data.labels.items.size();
    } else {
        p1.all = data.pairs;
        p1.schedule = LossSchedule::phase1(config.epochs_phase1, config.epochs_phase2);
        p1.n_items = data.pairs.items.size();
    }

    SplitRng shuffle1(config.seed, "shuffle-phase1");
    int epoch_base = 0;
    if (want_phase1 && p1.n_items > 0) {
        result.initial_phase1_loss = batch_loss(result.params, p1.all, p1.schedule,
                                                config.consistency);
        run_phase(result.params, p1, config, config.consistency, epoch_base, result.curve,
                  shuffle1);
        result.final_phase1_loss = batch_loss(result.params, p1.all, p1.schedule,
                                              config.consistency);
        epoch_base += p1.epochs;
    } else {
        result.phase1_skipped = true;
    }
    result.params_after_phase1 = result.params;

    // Phase 2: detection group on confident labels.
    PhasePlan p2;
    p2.all = data.labels;
    p2.schedule = LossSchedule::phase2(config.epochs_phase1, config.epochs_phase2);
    p2.active = ParamGroup::Detection;
    p2.epochs = config.epochs_phase2;
    p2.phase_tag = 2;
    p2.n_items = data.labels.items.size();
    SplitRng shuffle2(config.seed, "shuffle-phase2");
    run_phase(result.params, p2, config, config.consistency, epoch_base, result.curve, shuffle2);

    return result;
}

double classification_accuracy(
    const ToyModelParams& params,
    std::span<const std::pair<std::vector<double>, std::uint32_t>> samples) {
    if (samples.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& [x, label] : samples) {
        const auto cls = forward(params, x);
        const std::size_t pred = static_cast<std::size_t>(
            std::max_element(cls.begin(), cls.end()) - cls.begin());
        if (pred == label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

void save_params(const std::filesystem::path& path, const ToyModelParams& p) {
    save_json(path, p.to_json());
}

ToyModelParams load_params(const std::filesystem::path& path) {
    return ToyModelParams::from_json(load_json(path));
}

}  // namespace crosscam
