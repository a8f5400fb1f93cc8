#include "ptosis/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ptosis/errors.hpp"

namespace ptosis::classify {

namespace {

void require_feature(std::span<const LabeledSample> samples, int feature_index) {
    for (const auto& s : samples) {
        if (feature_index < 0 || feature_index >= static_cast<int>(s.features.size())) {
            throw ParameterError("feature index out of range");
        }
    }
}

struct ClassCounts {
    long long pos = 0;
    long long neg = 0;
};

ClassCounts count_classes(std::span<const LabeledSample> samples) {
    ClassCounts c;
    for (const auto& s : samples) {
        (s.label == kPtosis ? c.pos : c.neg)++;
    }
    return c;
}

}  // namespace

ThresholdClassifier fit_threshold(std::span<const LabeledSample> samples, int feature_index,
                                  const FitOptions& options) {
    if (samples.size() < 2) {
        throw DegenerateFitError("fit_threshold: need at least 2 samples");
    }
    require_feature(samples, feature_index);
    const ClassCounts counts = count_classes(samples);
    if (counts.pos == 0 || counts.neg == 0) {
        throw DegenerateFitError("fit_threshold: training data contains a single class");
    }

    // Integer per-sample weights keep the objective exact: weighting a
    // positive by neg-count and a negative by pos-count is proportional to
    // inverse class frequency.
    const long long w_pos = options.class_weighted ? counts.neg : 1;
    const long long w_neg = options.class_weighted ? counts.pos : 1;
    const long long total_weight = w_pos * counts.pos + w_neg * counts.neg;

    struct Entry {
        double value;
        int label;
    };
    std::vector<Entry> sorted;
    sorted.reserve(samples.size());
    for (const auto& s : samples) {
        if (!std::isfinite(s.features[feature_index])) {
            throw ParameterError("fit_threshold: non-finite feature value");
        }
        sorted.push_back({s.features[feature_index], s.label});
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const Entry& a, const Entry& b) { return a.value < b.value; });

    const long long n = static_cast<long long>(sorted.size());
    // prefix_pos[k] = positives among the k smallest values
    std::vector<long long> prefix_pos(n + 1, 0);
    for (long long i = 0; i < n; ++i) {
        prefix_pos[i + 1] = prefix_pos[i] + (sorted[i].label == kPtosis ? 1 : 0);
    }

    ThresholdClassifier best;
    long long best_score = -1;

    // Boundary k separates the k smallest values from the rest. k=0 and k=n
    // are the below-all/above-all sentinels.
    for (long long k = 0; k <= n; ++k) {
        if (k > 0 && k < n && !(sorted[k - 1].value < sorted[k].value)) {
            continue;  // inside a run of duplicates
        }
        double t;
        if (k == 0) {
            t = sorted[0].value - 1.0;
        } else if (k == n) {
            t = sorted[n - 1].value + 1.0;
        } else {
            t = sorted[k - 1].value + (sorted[k].value - sorted[k - 1].value) / 2.0;
            if (t >= sorted[k].value) {
                t = sorted[k - 1].value;  // midpoint rounded onto the upper value
            }
        }

        const long long pos_below = prefix_pos[k];
        const long long neg_below = k - pos_below;
        // predict_below: ptosis for the k smallest values
        const long long score_below = w_pos * pos_below + w_neg * (counts.neg - neg_below);
        // predict_above: ptosis for the rest
        const long long score_above = w_pos * (counts.pos - pos_below) + w_neg * neg_below;

        if (score_below > best_score) {
            best_score = score_below;
            best.threshold = t;
            best.direction = ThresholdDirection::predict_below;
        }
        if (score_above > best_score) {
            best_score = score_above;
            best.threshold = t;
            best.direction = ThresholdDirection::predict_above;
        }
    }

    best.feature_index = feature_index;
    best.objective = static_cast<double>(best_score) / static_cast<double>(total_weight);
    long long correct = 0;
    for (const auto& s : samples) {
        correct += predict(best, s.features) == s.label ? 1 : 0;
    }
    best.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return best;
}

int predict(const ThresholdClassifier& c, std::span<const double> features) {
    if (c.feature_index < 0 || static_cast<std::size_t>(c.feature_index) >= features.size()) {
        throw ParameterError("threshold predict: feature index out of range");
    }
    const double v = features[c.feature_index];
    const bool below = v <= c.threshold;
    return (c.direction == ThresholdDirection::predict_below ? below : !below) ? kPtosis
                                                                               : kNotPtosis;
}

namespace {

// Split goodness (A^2+B^2)/WL + (C^2+D^2)/WR with weighted integer counts,
// compared exactly via cross multiplication. Counts fit __int128 for any
// realistic n (weights are bounded by n, so terms stay under ~n^10).
struct SplitGoodness {
    unsigned __int128 num = 0;
    unsigned __int128 den = 1;

    static SplitGoodness of(long long a, long long b, long long c, long long d) {
        const auto a2 = static_cast<unsigned __int128>(a) * a;
        const auto b2 = static_cast<unsigned __int128>(b) * b;
        const auto c2 = static_cast<unsigned __int128>(c) * c;
        const auto d2 = static_cast<unsigned __int128>(d) * d;
        const auto wl = static_cast<unsigned __int128>(a) + b;
        const auto wr = static_cast<unsigned __int128>(c) + d;
        SplitGoodness g;
        if (wl == 0 || wr == 0) {
            // Empty side: goodness collapses to the other side's term.
            g.num = wl == 0 ? c2 + d2 : a2 + b2;
            g.den = wl == 0 ? wr : wl;
            return g;
        }
        g.num = (a2 + b2) * wr + (c2 + d2) * wl;
        g.den = wl * wr;
        return g;
    }

    bool better_than(const SplitGoodness& o) const { return num * o.den > o.num * den; }
};

struct TreeBuilder {
    std::span<const LabeledSample> samples;
    TreeFitOptions opts;
    long long w_pos = 1;
    long long w_neg = 1;
    int n_features = 0;
    DecisionTree tree;

    int build(std::vector<int>& indices, int depth) {
        long long n1 = 0;
        for (int i : indices) {
            n1 += samples[i].label == kPtosis ? 1 : 0;
        }
        const long long n0 = static_cast<long long>(indices.size()) - n1;

        const int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        fill_leaf(tree.nodes.back(), n1, n0);

        if (depth >= opts.max_depth || n1 == 0 || n0 == 0 ||
            static_cast<long long>(indices.size()) < 2LL * opts.min_leaf) {
            return node_index;
        }

        // Exhaustive midpoint search; parent goodness is the no-split baseline.
        const SplitGoodness parent =
            SplitGoodness::of(n1 * w_pos, n0 * w_neg, 0, 0);
        int best_feature = -1;
        double best_split = 0.0;
        SplitGoodness best = parent;

        std::vector<int> order(indices);
        for (int f = 0; f < n_features; ++f) {
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                return samples[a].features[f] < samples[b].features[f];
            });
            long long l1 = 0;
            for (std::size_t k = 1; k < order.size(); ++k) {
                l1 += samples[order[k - 1]].label == kPtosis ? 1 : 0;
                const double lo = samples[order[k - 1]].features[f];
                const double hi = samples[order[k]].features[f];
                if (!(lo < hi)) {
                    continue;
                }
                if (static_cast<long long>(k) < opts.min_leaf ||
                    static_cast<long long>(order.size() - k) < opts.min_leaf) {
                    continue;
                }
                const long long l0 = static_cast<long long>(k) - l1;
                const SplitGoodness g = SplitGoodness::of(l1 * w_pos, l0 * w_neg,
                                                          (n1 - l1) * w_pos, (n0 - l0) * w_neg);
                if (g.better_than(best)) {
                    best = g;
                    best_feature = f;
                    double split = lo + (hi - lo) / 2.0;
                    if (!(split > lo)) {
                        split = hi;  // midpoint rounded down onto the lower value
                    }
                    best_split = split;
                }
            }
        }

        if (best_feature < 0) {
            return node_index;  // no split strictly reduces impurity
        }

        std::vector<int> left_idx;
        std::vector<int> right_idx;
        for (int i : indices) {
            (samples[i].features[best_feature] < best_split ? left_idx : right_idx).push_back(i);
        }

        tree.nodes[node_index].feature = best_feature;
        tree.nodes[node_index].split = best_split;
        const int left = build(left_idx, depth + 1);
        tree.nodes[node_index].left = left;
        const int right = build(right_idx, depth + 1);
        tree.nodes[node_index].right = right;
        return node_index;
    }

    void fill_leaf(DecisionTree::Node& node, long long n1, long long n0) const {
        const long long wp = n1 * w_pos;
        const long long wn = n0 * w_neg;
        node.feature = -1;
        node.label = wp >= wn ? kPtosis : kNotPtosis;
        node.prob = (wp + wn) > 0 ? static_cast<double>(wp) / static_cast<double>(wp + wn) : 0.0;
    }
};

}  // namespace

DecisionTree fit_tree(std::span<const LabeledSample> samples, const TreeFitOptions& options) {
    if (samples.empty()) {
        throw DegenerateFitError("fit_tree: empty training data");
    }
    if (options.max_depth < 0 || options.min_leaf < 1) {
        throw ParameterError("fit_tree: invalid max_depth/min_leaf");
    }
    const int n_features = static_cast<int>(samples[0].features.size());
    for (const auto& s : samples) {
        if (static_cast<int>(s.features.size()) != n_features) {
            throw ParameterError("fit_tree: ragged feature vectors");
        }
        for (double v : s.features) {
            if (!std::isfinite(v)) {
                throw ParameterError("fit_tree: non-finite feature value");
            }
        }
    }

    const ClassCounts counts = count_classes(samples);
    TreeBuilder builder;
    builder.samples = samples;
    builder.opts = options;
    builder.n_features = n_features;
    if (options.class_weighted && counts.pos > 0 && counts.neg > 0) {
        // Cross-multiplied goodness terms stay below ~32*n^10; keep the exact
        // comparator within __int128 range.
        if (samples.size() > 5000) {
            throw ParameterError("fit_tree: class-weighted fit supports at most 5000 samples");
        }
        builder.w_pos = counts.neg;
        builder.w_neg = counts.pos;
    }

    std::vector<int> indices(samples.size());
    std::iota(indices.begin(), indices.end(), 0);
    builder.build(indices, 0);
    return builder.tree;
}

namespace {

const DecisionTree::Node& descend(const DecisionTree& tree, std::span<const double> features) {
    if (tree.empty()) {
        throw ParameterError("decision tree is empty");
    }
    int i = 0;
    while (tree.nodes[i].feature >= 0) {
        const auto& node = tree.nodes[i];
        if (static_cast<std::size_t>(node.feature) >= features.size()) {
            throw ParameterError("tree predict: feature index out of range");
        }
        i = features[node.feature] < node.split ? node.left : node.right;
    }
    return tree.nodes[i];
}

}  // namespace

int predict(const DecisionTree& tree, std::span<const double> features) {
    return descend(tree, features).label;
}

double predict_prob(const DecisionTree& tree, std::span<const double> features) {
    return descend(tree, features).prob;
}

namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double softplus(double u) {
    if (u > 30.0) {
        return u;
    }
    if (u < -30.0) {
        return std::exp(u);
    }
    return std::log1p(std::exp(u));
}

}  // namespace

LossGrad logistic_loss_grad(std::span<const LabeledSample> samples,
                            std::span<const double> weights, double bias, double l2) {
    if (samples.empty()) {
        throw ParameterError("logistic_loss_grad: no samples");
    }
    const std::size_t dim = weights.size();
    LossGrad out;
    out.grad_weights.assign(dim, 0.0);
    const double n = static_cast<double>(samples.size());

    for (const auto& s : samples) {
        if (s.features.size() != dim) {
            throw ParameterError("logistic_loss_grad: feature dimension mismatch");
        }
        double t = bias;
        for (std::size_t j = 0; j < dim; ++j) {
            t += weights[j] * s.features[j];
        }
        const double y = s.label == kPtosis ? 1.0 : 0.0;
        out.loss += y * softplus(-t) + (1.0 - y) * softplus(t);
        const double resid = sigmoid(t) - y;
        for (std::size_t j = 0; j < dim; ++j) {
            out.grad_weights[j] += resid * s.features[j];
        }
        out.grad_bias += resid;
    }

    out.loss /= n;
    out.grad_bias /= n;
    double reg = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        out.grad_weights[j] = out.grad_weights[j] / n + l2 * weights[j];
        reg += weights[j] * weights[j];
    }
    out.loss += 0.5 * l2 * reg;
    return out;
}

LogisticModel fit_logistic(std::span<const LabeledSample> samples,
                           const LogisticFitOptions& options) {
    if (samples.size() < 2) {
        throw DegenerateFitError("fit_logistic: need at least 2 samples");
    }
    const ClassCounts counts = count_classes(samples);
    if (counts.pos == 0 || counts.neg == 0) {
        throw DegenerateFitError("fit_logistic: training data contains a single class");
    }
    const std::size_t dim = samples[0].features.size();
    for (const auto& s : samples) {
        if (s.features.size() != dim) {
            throw ParameterError("fit_logistic: ragged feature vectors");
        }
        for (double v : s.features) {
            if (!std::isfinite(v)) {
                throw ParameterError("fit_logistic: non-finite feature value");
            }
        }
    }

    LogisticModel model;
    model.means.assign(dim, 0.0);
    model.stds.assign(dim, 0.0);
    const double n = static_cast<double>(samples.size());
    for (const auto& s : samples) {
        for (std::size_t j = 0; j < dim; ++j) {
            model.means[j] += s.features[j];
        }
    }
    for (double& m : model.means) {
        m /= n;
    }
    for (const auto& s : samples) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = s.features[j] - model.means[j];
            model.stds[j] += d * d;
        }
    }
    for (double& sd : model.stds) {
        sd = std::sqrt(sd / n);
        if (sd < 1e-12) {
            sd = 1.0;  // constant feature: leave it centered only
        }
    }

    std::vector<LabeledSample> standardized(samples.begin(), samples.end());
    for (auto& s : standardized) {
        for (std::size_t j = 0; j < dim; ++j) {
            s.features[j] = (s.features[j] - model.means[j]) / model.stds[j];
        }
    }

    model.weights.assign(dim, 0.0);
    model.bias = 0.0;
    double step = options.learning_rate;
    LossGrad lg = logistic_loss_grad(standardized, model.weights, model.bias, options.l2);
    model.loss_history.push_back(lg.loss);

    for (int iter = 0; iter < options.max_iters; ++iter) {
        double gmax = std::abs(lg.grad_bias);
        for (double g : lg.grad_weights) {
            gmax = std::max(gmax, std::abs(g));
        }
        if (gmax < options.tolerance) {
            break;
        }

        std::vector<double> w_next(dim);
        double b_next = 0.0;
        bool halved = false;
        bool stalled = false;
        for (;;) {
            for (std::size_t j = 0; j < dim; ++j) {
                w_next[j] = model.weights[j] - step * lg.grad_weights[j];
            }
            b_next = model.bias - step * lg.grad_bias;
            const LossGrad next = logistic_loss_grad(standardized, w_next, b_next, options.l2);
            if (next.loss <= lg.loss) {
                model.weights = w_next;
                model.bias = b_next;
                lg = next;
                break;
            }
            if (step < 1e-12) {
                stalled = true;  // no descent possible at the numeric floor
                break;
            }
            step *= 0.5;
            halved = true;
        }
        if (stalled) {
            break;
        }
        if (!halved) {
            step = std::min(step * 1.1, options.learning_rate * 10.0);
        }
        model.loss_history.push_back(lg.loss);
        model.iterations = iter + 1;
    }
    model.final_loss = lg.loss;
    return model;
}

double predict_prob(const LogisticModel& m, std::span<const double> features) {
    if (features.size() != m.weights.size()) {
        throw ParameterError("logistic predict: feature dimension mismatch");
    }
    double t = m.bias;
    for (std::size_t j = 0; j < m.weights.size(); ++j) {
        t += m.weights[j] * (features[j] - m.means[j]) / m.stds[j];
    }
    return sigmoid(t);
}

int predict(const LogisticModel& m, std::span<const double> features) {
    return predict_prob(m, features) >= 0.5 ? kPtosis : kNotPtosis;
}

EnsembleResult ensemble_average(std::span<const double> probs) {
    if (probs.empty()) {
        throw ParameterError("ensemble_average: empty probability list");
    }
    std::vector<double> sorted(probs.begin(), probs.end());
    for (double p : sorted) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ParameterError("ensemble_average: probability outside [0,1]");
        }
    }
    std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double p : sorted) {
        sum += p;
    }
    EnsembleResult out;
    out.prob = sum / static_cast<double>(sorted.size());
    out.label = out.prob >= 0.5 ? kPtosis : kNotPtosis;
    return out;
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::threshold: return "threshold";
        case ModelKind::tree: return "tree";
        case ModelKind::logistic: return "logistic";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "threshold") {
        return ModelKind::threshold;
    }
    if (s == "tree") {
        return ModelKind::tree;
    }
    if (s == "logistic") {
        return ModelKind::logistic;
    }
    throw SchemaError("unknown model kind '" + s + "'");
}

double feature_by_name(const FeatureRow& row, const std::string& name) {
    if (name == "p_deep") {
        return row.p_deep;
    }
    if (name == "mrd1_mm") {
        return row.mrd1_mm;
    }
    if (name == "iris_ratio_pct") {
        return row.iris_ratio_pct;
    }
    throw SchemaError("unknown feature name '" + name + "'");
}

namespace {

std::vector<double> gather_features(const Model& m, const FeatureRow& row) {
    std::vector<double> v;
    v.reserve(m.feature_names.size());
    for (const auto& name : m.feature_names) {
        const double x = feature_by_name(row, name);
        if (!std::isfinite(x)) {
            throw ParameterError("model input '" + name + "' is unavailable or non-finite");
        }
        v.push_back(x);
    }
    return v;
}

}  // namespace

int predict_row(const Model& m, const FeatureRow& row) {
    const std::vector<double> v = gather_features(m, row);
    switch (m.kind) {
        case ModelKind::threshold: return predict(m.threshold, v);
        case ModelKind::tree: return predict(m.tree, v);
        case ModelKind::logistic: return predict(m.logistic, v);
    }
    throw ParameterError("predict_row: invalid model");
}

double predict_prob_row(const Model& m, const FeatureRow& row) {
    const std::vector<double> v = gather_features(m, row);
    switch (m.kind) {
        case ModelKind::threshold:
            return predict(m.threshold, v) == kPtosis ? 1.0 : 0.0;
        case ModelKind::tree: return predict_prob(m.tree, v);
        case ModelKind::logistic: return predict_prob(m.logistic, v);
    }
    throw ParameterError("predict_prob_row: invalid model");
}

FusionResult fuse(double p_deep, const clinical::ClinicalMeasurements& meas,
                  const FusionPolicy& policy) {
    if (!(p_deep >= 0.0 && p_deep <= 1.0)) {
        throw ParameterError("fuse: p_deep outside [0,1]");
    }
    if (!(policy.t_lo >= 0.0 && policy.t_lo <= policy.t_hi && policy.t_hi <= 1.0)) {
        throw ParameterError("fuse: thresholds must satisfy 0 <= t_lo <= t_hi <= 1");
    }
    if (p_deep < policy.t_lo) {
        return {kNotPtosis, DecisionPath::deep};
    }
    if (p_deep > policy.t_hi) {
        return {kPtosis, DecisionPath::deep};
    }
    if (policy.deferred == nullptr) {
        throw ParameterError("fuse: no deferred model configured");
    }
    if (policy.deferred->kind == ModelKind::threshold) {
        throw ParameterError("fuse: deferred model must be a tree or logistic model");
    }
    FeatureRow row;
    row.p_deep = p_deep;
    row.mrd1_mm = meas.mrd1_mm;
    row.iris_ratio_pct = meas.iris_ratio_pct;
    return {predict_row(*policy.deferred, row), DecisionPath::deferred};
}

FusionBand fit_fusion_thresholds(std::span<const double> probs, std::span<const int> labels) {
    if (probs.size() != labels.size() || probs.empty()) {
        throw ParameterError("fit_fusion_thresholds: probabilities and labels must align");
    }
    double min_pos = std::numeric_limits<double>::infinity();
    double max_neg = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
            throw ParameterError("fit_fusion_thresholds: probability outside [0,1]");
        }
        if (labels[i] == kPtosis) {
            min_pos = std::min(min_pos, probs[i]);
        } else {
            max_neg = std::max(max_neg, probs[i]);
        }
    }
    if (!std::isfinite(min_pos) || !std::isfinite(max_neg)) {
        throw DegenerateFitError("fit_fusion_thresholds: validation data contains a single class");
    }
    if (min_pos > max_neg) {
        const double mid = min_pos + (max_neg - min_pos) / 2.0;
        return {mid, mid};  // separable: the deep path alone is error-free
    }
    return {min_pos, max_neg};
}

std::string to_string(FaceLabel label) {
    switch (label) {
        case FaceLabel::none: return "none";
        case FaceLabel::left_only: return "left_only";
        case FaceLabel::right_only: return "right_only";
        case FaceLabel::both: return "both";
    }
    return "unknown";
}

FaceLabel aggregate_face(int left_label, int right_label) {
    const bool l = left_label == kPtosis;
    const bool r = right_label == kPtosis;
    if (l && r) {
        return FaceLabel::both;
    }
    if (l) {
        return FaceLabel::left_only;
    }
    if (r) {
        return FaceLabel::right_only;
    }
    return FaceLabel::none;
}

}  // namespace ptosis::classify
