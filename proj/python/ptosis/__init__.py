"""Eyelid ptosis measurement toolkit: clinical measurements (MRD1, iris
ratio, corneal light reflex), the filter bank for deep-model inputs, the
classifier stack, and a synthetic-eye oracle. Thin wrapper over the C++ core.
"""

from ._core import (  # noqa: F401
    DecisionTree,
    DegenerateFitError,
    EyeSceneSpec,
    GroundTruth,
    LogisticModel,
    Measurements,
    MeasurementError,
    ParameterError,
    SchemaError,
    ThresholdClassifier,
    aggregate_face,
    build_feature_stack,
    canny_edges,
    circle_from_iris_landmarks,
    circle_polygon_intersection_area,
    confusion,
    crop_eye_region,
    detect_clr,
    difference_of_gaussians,
    ensemble_average,
    fit_fusion_thresholds,
    fit_logistic,
    fit_threshold,
    fit_tree,
    fuse,
    gamma_correct,
    harris_response,
    hist_equalize,
    measure_eye,
    measure_iris_ratio,
    measure_mrd1,
    metrics,
    mirror_horizontal,
    point_to_polyline_distance,
    polygon_area,
    px_to_mm,
    read_pgm,
    render_eye,
    roc_auc,
    suite_spec,
    write_pgm,
)

__version__ = "0.1.0"
