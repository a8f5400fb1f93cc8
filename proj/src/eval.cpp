#include "ptosis/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "ptosis/errors.hpp"

namespace ptosis::eval {

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> truth) {
    if (preds.size() != truth.size()) {
        throw ParameterError("confusion: predictions and truth differ in length");
    }
    if (preds.empty()) {
        throw ParameterError("confusion: empty input");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool p = preds[i] == 1;
        const bool t = truth[i] == 1;
        if (p && t) {
            cm.tp++;
        } else if (p && !t) {
            cm.fp++;
        } else if (!p && t) {
            cm.fn++;
        } else {
            cm.tn++;
        }
    }
    return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
    if (cm.total() <= 0) {
        throw ParameterError("metrics: empty confusion matrix");
    }
    Metrics m;
    m.accuracy = 100.0 * static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    if (cm.tp + cm.fp > 0) {
        m.precision = 100.0 * static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    }
    if (cm.tp + cm.fn > 0) {
        m.recall = 100.0 * static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    }
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0) {
        m.f1 = 2.0 * (*m.precision) * (*m.recall) / (*m.precision + *m.recall);
    }
    return m;
}

double roc_auc(std::span<const double> scores, std::span<const int> truth) {
    if (scores.size() != truth.size()) {
        throw ParameterError("roc_auc: scores and truth differ in length");
    }
    long long pos = 0;
    for (int t : truth) {
        pos += t == 1 ? 1 : 0;
    }
    const long long neg = static_cast<long long>(truth.size()) - pos;
    if (pos == 0 || neg == 0) {
        throw ParameterError("roc_auc: AUC undefined for single-class truth");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Tie-averaged ranks; rank sums of halves are exact in doubles.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) {
            ++j;
        }
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (truth[order[k]] == 1) {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }

    const double u = rank_sum_pos - static_cast<double>(pos) * (static_cast<double>(pos) + 1.0) / 2.0;
    return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

std::vector<MethodRow> evaluate_methods(std::span<const int> truth,
                                        std::span<const MethodPredictions> methods) {
    std::vector<MethodRow> rows;
    rows.reserve(methods.size());
    for (const auto& method : methods) {
        if (method.preds.size() != truth.size()) {
            throw ParameterError("evaluate_methods: '" + method.name +
                                 "' predictions are misaligned with the truth");
        }
        if (!method.scores.empty() && method.scores.size() != truth.size()) {
            throw ParameterError("evaluate_methods: '" + method.name +
                                 "' scores are misaligned with the truth");
        }
        MethodRow row;
        row.name = method.name;
        row.m = metrics(confusion(method.preds, truth));
        if (!method.scores.empty()) {
            row.auc = roc_auc(method.scores, truth);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string cell(const std::optional<double>& v, int decimals) {
    if (!v) {
        return "n/a";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, *v);
    return buf;
}

}  // namespace

std::string render_table_text(std::span<const MethodRow> rows) {
    static constexpr const char* kHeaders[] = {"Method",   "Accuracy", "Precision",
                                               "Recall",   "F1",       "ROC AUC"};
    std::vector<std::array<std::string, 6>> cells;
    for (const auto& row : rows) {
        cells.push_back({row.name, cell(row.m.accuracy, 1), cell(row.m.precision, 1),
                         cell(row.m.recall, 1), cell(row.m.f1, 1),
                         row.auc ? cell(100.0 * *row.auc, 1) : "n/a"});
    }
    std::array<std::size_t, 6> widths{};
    for (std::size_t c = 0; c < 6; ++c) {
        widths[c] = std::string(kHeaders[c]).size();
        for (const auto& r : cells) {
            widths[c] = std::max(widths[c], r[c].size());
        }
    }
    std::ostringstream out;
    auto emit = [&](const std::array<std::string, 6>& r) {
        for (std::size_t c = 0; c < 6; ++c) {
            out << (c == 0 ? "" : "  ") << r[c];
            if (c + 1 < 6) {
                out << std::string(widths[c] - r[c].size(), ' ');
            }
        }
        out << "\n";
    };
    emit({kHeaders[0], kHeaders[1], kHeaders[2], kHeaders[3], kHeaders[4], kHeaders[5]});
    for (const auto& r : cells) {
        emit(r);
    }
    return out.str();
}

std::string render_table_csv(std::span<const MethodRow> rows) {
    std::ostringstream out;
    out << "method,accuracy,precision,recall,f1,roc_auc\n";
    for (const auto& row : rows) {
        out << row.name << "," << cell(row.m.accuracy, 4) << "," << cell(row.m.precision, 4) << ","
            << cell(row.m.recall, 4) << "," << cell(row.m.f1, 4) << ","
            << (row.auc ? cell(100.0 * *row.auc, 4) : "n/a") << "\n";
    }
    return out.str();
}

}  // namespace ptosis::eval
