"""Smoke tests for the python bindings: shapes, a few exact values, and one
full measure-classify round trip on a rendered synthetic eye."""

import math

import numpy as np
import pytest

import ptosis


def test_filters_shapes_and_contracts():
    rng = np.random.default_rng(7)
    img = rng.integers(0, 256, size=(18, 24), dtype=np.uint8)

    assert np.array_equal(ptosis.mirror_horizontal(ptosis.mirror_horizontal(img)), img)

    ramp = np.arange(256, dtype=np.uint8).reshape(1, 256)
    g = ptosis.gamma_correct(ramp, 1.5)
    assert g[0, 0] == 0 and g[0, 255] == 255
    assert g[0, 128] == 91

    stack = ptosis.build_feature_stack(img)
    assert stack.shape == (7, 18, 24)
    assert np.array_equal(stack[0], img)

    flat = np.full((16, 16), 90, dtype=np.uint8)
    fstack = ptosis.build_feature_stack(flat)
    assert np.all(fstack[4] == 0)       # canny
    assert np.all(fstack[5] == 0)       # harris
    assert np.all(fstack[6] == 128)     # difference of gaussians


def test_geometry_values():
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    assert ptosis.polygon_area(square) == pytest.approx(1.0)

    big = np.array([[-10, -10], [10, -10], [10, 10], [-10, 10]], dtype=float)
    area = ptosis.circle_polygon_intersection_area((0.0, 0.0), 1.0, big)
    assert area == pytest.approx(math.pi, rel=1e-9)

    dist, closest = ptosis.point_to_polyline_distance(
        (0.0, 1.0), np.array([[-1.0, 0.0], [1.0, 0.0]])
    )
    assert dist == pytest.approx(1.0)
    assert closest == pytest.approx((0.0, 0.0))

    iris = np.array([[50, 50], [40, 50], [50, 40], [60, 50], [50, 60]], dtype=float)
    center, radius = ptosis.circle_from_iris_landmarks(iris)
    assert center == pytest.approx((50.0, 50.0))
    assert radius == pytest.approx(10.0)


def test_calibration():
    mm, mm_per_px = ptosis.px_to_mm(35.0, 58.5)
    assert mm == pytest.approx(3.50, abs=1e-12)
    assert mm_per_px == pytest.approx(0.1, abs=1e-12)


def test_synthetic_measure_round_trip():
    spec = ptosis.EyeSceneSpec()
    spec.noise_sigma = 3.0
    spec.seed = 11
    image, truth = ptosis.render_eye(spec)
    assert image.dtype == np.uint8
    assert image.shape == (spec.height, spec.width)

    meas = ptosis.measure_eye(image, truth.side, truth.contour, truth.iris)
    assert meas.mrd1_mm == pytest.approx(truth.mrd1_mm, abs=0.2)
    assert meas.iris_ratio_pct == pytest.approx(truth.iris_ratio_pct, abs=1.0)
    assert meas.mrd1_mm == pytest.approx(meas.mrd1_px * meas.mm_per_px)


def test_classifiers_and_metrics():
    rng = np.random.default_rng(3)
    n = 80
    mrd1 = rng.uniform(-1.0, 5.0, size=n)
    ratio = rng.uniform(30.0, 100.0, size=n)
    y = (mrd1 < 2.0).astype(np.int64)
    x = np.column_stack([mrd1, ratio])

    thr = ptosis.fit_threshold(x, y, feature_index=0)
    assert thr.train_accuracy == pytest.approx(1.0)
    assert np.array_equal(thr.predict(x), y)

    tree = ptosis.fit_tree(x, y, min_leaf=1)
    assert np.array_equal(tree.predict(x), y)

    prob, label = ptosis.ensemble_average([0.2, 0.3, 0.4, 0.35, 0.25])
    assert prob == pytest.approx(0.30)
    assert label == 0

    assert ptosis.aggregate_face(1, 0) == "left_only"
    assert ptosis.aggregate_face(1, 1) == "both"

    auc = ptosis.roc_auc([0.9, 0.2, 0.8, 0.3], [1, 0, 0, 1])
    assert auc == pytest.approx(0.75)

    t_lo, t_hi = ptosis.fit_fusion_thresholds([0.1, 0.2, 0.5, 0.6, 0.9], [0, 0, 1, 0, 1])
    assert (t_lo, t_hi) == pytest.approx((0.5, 0.6))

    m = ptosis.metrics(44, 1, 9, 46)
    assert m["accuracy"] == pytest.approx(90.0)
    assert m["precision"] == pytest.approx(97.78, abs=0.01)

    absent = ptosis.metrics(0, 0, 3, 7)
    assert absent["precision"] is None


def test_error_mapping():
    with pytest.raises(ValueError):
        ptosis.polygon_area(np.array([[0.0, 0.0], [1.0, 1.0]]))
    with pytest.raises(ValueError):
        ptosis.ensemble_average([1.5])
