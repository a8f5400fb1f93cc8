#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ptosis/classify.hpp"
#include "ptosis/clinical.hpp"
#include "ptosis/synth.hpp"

namespace ptosis::io {

inline constexpr int kLandmarkSchemaVersion = 1;
inline constexpr int kModelSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

/// Landmark document: coordinates in full-image space, at most one eye per
/// side. See docs/FORMATS.md.
struct LandmarkFile {
    std::string image;  // path as recorded in the document
    std::vector<clinical::EyeLandmarks> eyes;
};

LandmarkFile read_landmark_file(const std::filesystem::path& path);
void write_landmark_file(const LandmarkFile& file, const std::filesystem::path& path);

struct EyeReport {
    clinical::EyeSide side = clinical::EyeSide::left;
    clinical::ClinicalMeasurements measurements;
    std::optional<double> p_deep;
    std::optional<int> prediction;       // 1 = ptosis
    std::optional<std::string> decision_path;  // deep | deferred | clinical_only
};

struct Provenance {
    std::vector<std::pair<std::string, std::string>> inputs;  // (name, fnv1a64 hex)
    std::string model;                                        // model descriptor, if any
    std::vector<std::pair<std::string, std::string>> parameters;
};

struct DiagnosisReport {
    std::vector<EyeReport> eyes;
    std::optional<classify::FaceLabel> face;
    Provenance provenance;
};

std::string report_to_json(const DiagnosisReport& report);
DiagnosisReport report_from_json(const std::string& text);
DiagnosisReport read_report(const std::filesystem::path& path);
void write_report(const DiagnosisReport& report, const std::filesystem::path& path);

/// Human-readable per-eye summary lines.
std::string report_summary(const DiagnosisReport& report);

// Versioned model documents.
void write_model(const classify::Model& model, const std::filesystem::path& path);
classify::Model read_model(const std::filesystem::path& path);
std::string model_to_json(const classify::Model& model);
classify::Model model_from_json(const std::string& text);

/// Feature CSV with header `p_deep,mrd1_mm,iris_ratio_pct,label` (an optional
/// leading `id` column is accepted; label may be omitted for unlabeled data;
/// p_deep cells may be blank).
struct FeatureTable {
    std::vector<std::string> ids;  // empty strings when the file has no id column
    std::vector<classify::FeatureRow> rows;
    std::vector<std::optional<int>> labels;

    std::size_t size() const { return rows.size(); }
};

FeatureTable read_feature_csv(const std::filesystem::path& path);
void write_feature_csv(const FeatureTable& table, const std::filesystem::path& path);

/// Predictions CSV: header `id,prediction[,score]`.
struct PredictionTable {
    std::vector<std::string> ids;
    std::vector<int> predictions;
    std::vector<double> scores;  // empty when the file has no score column
};

PredictionTable read_prediction_csv(const std::filesystem::path& path);
void write_prediction_csv(const PredictionTable& table, const std::filesystem::path& path);

/// Truth CSV as written by suite export: `id,mrd1_px,mrd1_mm,iris_ratio_pct,label`.
struct TruthTable {
    std::vector<std::string> ids;
    std::vector<double> mrd1_px;
    std::vector<double> mrd1_mm;
    std::vector<double> iris_ratio_pct;
    std::vector<int> labels;
};

TruthTable read_truth_csv(const std::filesystem::path& path);

/// Writes NNNN.pgm + NNNN.landmarks.json per item plus truth.csv.
void write_suite(const std::vector<synth::RenderResult>& suite,
                 const std::filesystem::path& directory);

/// FNV-1a 64-bit content hash, lowercase hex. Used for report provenance.
std::string fnv1a64_hex(const std::filesystem::path& path);

/// Atomic text-file write (tmp + rename).
void write_text_file(const std::string& text, const std::filesystem::path& path);

}  // namespace ptosis::io
