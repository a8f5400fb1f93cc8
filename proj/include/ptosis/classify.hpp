#pragma once

#include <span>
#include <string>
#include <vector>

#include "ptosis/clinical.hpp"

namespace ptosis::classify {

inline constexpr int kNotPtosis = 0;
inline constexpr int kPtosis = 1;

// Canonical feature column order for models consuming the full row.
inline const std::vector<std::string> kAllFeatures = {"p_deep", "mrd1_mm", "iris_ratio_pct"};

struct LabeledSample {
    std::vector<double> features;
    int label = 0;  // 1 = ptosis
};

enum class ThresholdDirection {
    predict_below,  // ptosis when feature <= threshold
    predict_above,  // ptosis when feature >  threshold
};

struct ThresholdClassifier {
    int feature_index = 0;
    double threshold = 0.0;
    ThresholdDirection direction = ThresholdDirection::predict_below;
    double train_accuracy = 0.0;  // plain fraction correct
    double objective = 0.0;       // fit objective (class-weighted accuracy when enabled)
};

struct FitOptions {
    // Weights samples inversely to class frequency, mirroring training on
    // balanced data. The sweep objective stays in exact integer arithmetic
    // either way.
    bool class_weighted = true;
};

/// Exhaustive sweep over midpoints of consecutive sorted unique feature
/// values plus below-all/above-all sentinels, both directions. Ties break to
/// the smaller threshold, then predict_below. Throws DegenerateFitError when
/// only one class is present.
ThresholdClassifier fit_threshold(std::span<const LabeledSample> samples, int feature_index,
                                  const FitOptions& options = {});
int predict(const ThresholdClassifier& c, std::span<const double> features);

struct DecisionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double split = 0.0;
        int left = -1;
        int right = -1;
        int label = 0;
        double prob = 0.0;  // leaf ptosis probability
    };
    std::vector<Node> nodes;  // nodes[0] is the root; children always follow parents

    bool empty() const { return nodes.empty(); }
    const Node& root() const { return nodes.front(); }
};

struct TreeFitOptions {
    int max_depth = 3;
    int min_leaf = 5;
    bool class_weighted = true;
};

/// CART with Gini impurity and exhaustive midpoint split search. Split
/// comparisons use exact integer arithmetic, so ties resolve deterministically
/// (lower feature index, then smaller split value). Degenerate data yields a
/// single-leaf majority tree.
DecisionTree fit_tree(std::span<const LabeledSample> samples, const TreeFitOptions& options = {});
int predict(const DecisionTree& tree, std::span<const double> features);
double predict_prob(const DecisionTree& tree, std::span<const double> features);

struct LogisticFitOptions {
    double learning_rate = 1.0;
    int max_iters = 5000;
    double tolerance = 1e-6;  // gradient max-norm stopping criterion
    double l2 = 1e-3;
};

struct LogisticModel {
    std::vector<double> weights;  // in standardized feature space
    double bias = 0.0;
    // Stored affine transform: prediction standardizes inputs with these.
    std::vector<double> means;
    std::vector<double> stds;
    int iterations = 0;
    double final_loss = 0.0;
    std::vector<double> loss_history;  // accepted-step losses, non-increasing
};

/// Full-batch gradient descent from zero initialization on mean cross-entropy
/// + l2*||w||^2/2. The step halves whenever it would increase the loss, so the
/// loss sequence is non-increasing. Features are standardized internally.
LogisticModel fit_logistic(std::span<const LabeledSample> samples,
                           const LogisticFitOptions& options = {});
double predict_prob(const LogisticModel& m, std::span<const double> features);
int predict(const LogisticModel& m, std::span<const double> features);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad_weights;
    double grad_bias = 0.0;
};

/// Regularized mean cross-entropy and its analytic gradient, evaluated on the
/// features exactly as given (no standardization). Exposed so the gradient
/// can be checked against finite differences.
LossGrad logistic_loss_grad(std::span<const LabeledSample> samples,
                            std::span<const double> weights, double bias, double l2);

struct EnsembleResult {
    double prob = 0.0;
    int label = 0;
};

/// Arithmetic mean of the member probabilities; ptosis at mean >= 0.5.
/// Summation runs over a sorted copy so any permutation of the inputs yields
/// an identical result.
EnsembleResult ensemble_average(std::span<const double> probs);

enum class ModelKind { threshold, tree, logistic };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

/// Serializable wrapper: one fitted classifier plus the named features it
/// consumes, in order.
struct Model {
    ModelKind kind = ModelKind::threshold;
    std::vector<std::string> feature_names;
    ThresholdClassifier threshold;
    DecisionTree tree;
    LogisticModel logistic;
    double train_accuracy = 0.0;
};

/// One measured eye's worth of classifier inputs. p_deep may be NaN when no
/// deep-model probability is available.
struct FeatureRow {
    double p_deep = std::numeric_limits<double>::quiet_NaN();
    double mrd1_mm = 0.0;
    double iris_ratio_pct = 0.0;
};

double feature_by_name(const FeatureRow& row, const std::string& name);
int predict_row(const Model& m, const FeatureRow& row);
double predict_prob_row(const Model& m, const FeatureRow& row);

struct FusionPolicy {
    double t_lo = 0.34;
    double t_hi = 0.78;
    const Model* deferred = nullptr;  // must be a tree or logistic model
};

enum class DecisionPath { deep, deferred };

struct FusionResult {
    int label = 0;
    DecisionPath used = DecisionPath::deep;
};

/// Trust the deep probability outside [t_lo, t_hi] (strict inequalities);
/// consult the deferred model inside the closed band.
FusionResult fuse(double p_deep, const clinical::ClinicalMeasurements& meas,
                  const FusionPolicy& policy);

struct FusionBand {
    double t_lo = 0.0;
    double t_hi = 1.0;
};

/// Refits the fusion thresholds from validation probabilities: the tightest
/// band whose outside carries zero deep-path errors, i.e. t_lo = smallest
/// probability among positives and t_hi = largest among negatives. Separable
/// data collapses the band to a point between the classes.
FusionBand fit_fusion_thresholds(std::span<const double> probs, std::span<const int> labels);

enum class FaceLabel { none, left_only, right_only, both };

std::string to_string(FaceLabel label);
FaceLabel aggregate_face(int left_label, int right_label);

}  // namespace ptosis::classify
