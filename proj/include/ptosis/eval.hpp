#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ptosis::eval {

struct ConfusionMatrix {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;

    long long total() const { return tp + fp + fn + tn; }
};

/// Positive class = ptosis (label 1). Throws ParameterError on length
/// mismatch or empty input.
ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> truth);

/// Percentage metrics. Ratios with a zero denominator are reported as absent
/// rather than 0.
struct Metrics {
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

Metrics metrics(const ConfusionMatrix& cm);

/// Mann-Whitney concordance AUC: (concordant + 0.5*tied) / (P*N), computed
/// via tie-averaged ranks. Throws ParameterError when only one class is
/// present.
double roc_auc(std::span<const double> scores, std::span<const int> truth);

struct MethodPredictions {
    std::string name;
    std::vector<int> preds;
    std::vector<double> scores;  // optional; empty = no AUC column
};

struct MethodRow {
    std::string name;
    Metrics m;
    std::optional<double> auc;
};

/// Per-method metric rows against a shared ground truth.
std::vector<MethodRow> evaluate_methods(std::span<const int> truth,
                                        std::span<const MethodPredictions> methods);

/// Aligned plain-text comparison table (one decimal, "n/a" for absent cells).
std::string render_table_text(std::span<const MethodRow> rows);

/// CSV rendering with four-decimal precision.
std::string render_table_csv(std::span<const MethodRow> rows);

}  // namespace ptosis::eval
