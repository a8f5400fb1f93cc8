#pragma once

#include <array>
#include <string>

#include "ptosis/geometry.hpp"
#include "ptosis/image.hpp"

namespace ptosis::clinical {

using imaging::GrayImage;

enum class EyeSide { left, right };

std::string to_string(EyeSide side);
EyeSide eye_side_from_string(const std::string& s);

// Contour index convention: 0 = temporal canthus, 1..7 upper lid
// temporal->nasal, 8 = nasal canthus, 9..15 lower lid nasal->temporal.
inline constexpr int kContourPoints = 16;
inline constexpr int kIrisPoints = 5;
inline constexpr int kUpperLidBegin = 0;
inline constexpr int kUpperLidEnd = 8;  // inclusive

struct EyeLandmarks {
    EyeSide side = EyeSide::left;
    std::array<geom::Point2, kContourPoints> contour;
    std::array<geom::Point2, kIrisPoints> iris;

    std::span<const geom::Point2> upper_lid() const {
        return {contour.data() + kUpperLidBegin, kUpperLidEnd - kUpperLidBegin + 1};
    }
};

/// Throws ParameterError when any coordinate is non-finite.
void validate_landmarks(const EyeLandmarks& lm);

struct CalibrationModel {
    double iris_diameter_mm = 11.7;  // assumed constant horizontal iris diameter
};

struct ClrParams {
    double absolute_floor = 240.0;  // candidate pixels need intensity >= this...
    double relative_delta = 5.0;    // ...or >= iris max - delta, whichever is larger
};

struct ClrResult {
    geom::Point2 location;
    bool found = false;
};

/// Corneal-light-reflex detection: bright pixels inside the iris disc are
/// grouped into 8-connected components and the component centroid nearest the
/// iris center wins. Falls back to the iris center (found=false) when nothing
/// passes the brightness gate. Throws ParameterError when the disc misses the
/// image entirely.
ClrResult detect_clr(const GrayImage& img, const geom::Circle& iris, const ClrParams& params = {});

enum class Mrd1Mode {
    segment,  // distance to the upper-lid polyline (default)
    vertex,   // nearest-vertex distance, for comparison
};

/// Signed distance from the CLR to the upper-lid chain (contour 0..8).
/// Positive when the CLR sits below the chain (normal anatomy), negative when
/// the nearest lid point sits below the CLR (lid covers the reflex).
double measure_mrd1(const EyeLandmarks& lm, geom::Point2 clr, Mrd1Mode mode = Mrd1Mode::segment);

/// 100 * area(iris disc inside the 16-point contour polygon) / (pi r^2).
double measure_iris_ratio(const EyeLandmarks& lm);

struct MmConversion {
    double mrd1_mm = 0.0;
    double mm_per_px = 0.0;
};

/// mm_per_px = assumed iris diameter / fitted horizontal diameter (2r).
MmConversion px_to_mm(double mrd1_px, const geom::Circle& iris, const CalibrationModel& cal = {});

struct ClinicalMeasurements {
    double mrd1_px = 0.0;
    double mrd1_mm = 0.0;
    double iris_ratio_pct = 0.0;
    geom::Point2 clr;
    bool clr_found = false;
    double mm_per_px = 0.0;
};

struct MeasureOptions {
    CalibrationModel calibration;
    ClrParams clr;
    Mrd1Mode mrd1_mode = Mrd1Mode::segment;
    bool clamp_negative_mrd1 = false;  // optional clamp-to-zero mode; default keeps the sign
};

/// Full per-eye pipeline: iris fit -> CLR detection -> MRD1 -> iris ratio ->
/// mm conversion. Failures are rethrown as MeasurementError tagged with the
/// stage name.
ClinicalMeasurements measure_eye(const GrayImage& img, const EyeLandmarks& lm,
                                 const MeasureOptions& options = {});

}  // namespace ptosis::clinical
