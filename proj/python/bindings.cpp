#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ptosis/classify.hpp"
#include "ptosis/clinical.hpp"
#include "ptosis/errors.hpp"
#include "ptosis/eval.hpp"
#include "ptosis/filters.hpp"
#include "ptosis/formats.hpp"
#include "ptosis/geometry.hpp"
#include "ptosis/image.hpp"
#include "ptosis/synth.hpp"

namespace py = pybind11;
using namespace ptosis;

namespace {

imaging::GrayImage image_from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2) {
        throw ParameterError("image array must be 2-D (height, width)");
    }
    imaging::GrayImage img(static_cast<int>(arr.shape(1)), static_cast<int>(arr.shape(0)));
    std::memcpy(img.data.data(), arr.data(), img.data.size());
    return img;
}

py::array_t<std::uint8_t> array_from_image(const imaging::GrayImage& img) {
    py::array_t<std::uint8_t> arr({img.height, img.width});
    std::memcpy(arr.mutable_data(), img.data.data(), img.data.size());
    return arr;
}

std::vector<geom::Point2> points_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 2) {
        throw ParameterError("points array must have shape (n, 2)");
    }
    std::vector<geom::Point2> pts(static_cast<std::size_t>(arr.shape(0)));
    for (py::ssize_t i = 0; i < arr.shape(0); ++i) {
        pts[static_cast<std::size_t>(i)] = {arr.at(i, 0), arr.at(i, 1)};
    }
    return pts;
}

py::array_t<double> array_from_points(std::span<const geom::Point2> pts) {
    py::array_t<double> arr({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        *arr.mutable_data(static_cast<py::ssize_t>(i), 0) = pts[i].x;
        *arr.mutable_data(static_cast<py::ssize_t>(i), 1) = pts[i].y;
    }
    return arr;
}

clinical::EyeLandmarks landmarks_from_arrays(const std::string& side, const py::array_t<double>& contour,
                                             const py::array_t<double>& iris) {
    const auto c = points_from_array(contour);
    const auto i = points_from_array(iris);
    if (c.size() != clinical::kContourPoints || i.size() != clinical::kIrisPoints) {
        throw ParameterError("landmarks need 16 contour and 5 iris points");
    }
    clinical::EyeLandmarks lm;
    lm.side = clinical::eye_side_from_string(side);
    std::copy(c.begin(), c.end(), lm.contour.begin());
    std::copy(i.begin(), i.end(), lm.iris.begin());
    return lm;
}

std::vector<classify::LabeledSample> samples_from_arrays(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& x,
    const py::array_t<long, py::array::c_style | py::array::forcecast>& y) {
    if (x.ndim() != 2 || y.ndim() != 1 || x.shape(0) != y.shape(0)) {
        throw ParameterError("expected X with shape (n, d) and y with shape (n,)");
    }
    std::vector<classify::LabeledSample> samples(static_cast<std::size_t>(x.shape(0)));
    for (py::ssize_t i = 0; i < x.shape(0); ++i) {
        auto& s = samples[static_cast<std::size_t>(i)];
        s.features.resize(static_cast<std::size_t>(x.shape(1)));
        for (py::ssize_t j = 0; j < x.shape(1); ++j) {
            s.features[static_cast<std::size_t>(j)] = x.at(i, j);
        }
        s.label = static_cast<int>(y.at(i));
    }
    return samples;
}

template <typename ModelT>
py::array_t<long> predict_matrix(const ModelT& model,
                                 const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
    if (x.ndim() != 2) {
        throw ParameterError("expected X with shape (n, d)");
    }
    py::array_t<long> out(x.shape(0));
    std::vector<double> row(static_cast<std::size_t>(x.shape(1)));
    for (py::ssize_t i = 0; i < x.shape(0); ++i) {
        for (py::ssize_t j = 0; j < x.shape(1); ++j) {
            row[static_cast<std::size_t>(j)] = x.at(i, j);
        }
        *out.mutable_data(i) = classify::predict(model, row);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Eyelid ptosis measurement toolkit (C++ core)";

    py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<MeasurementError>(m, "MeasurementError", PyExc_RuntimeError);
    py::register_exception<DegenerateFitError>(m, "DegenerateFitError", PyExc_RuntimeError);

    // ---- imaging
    m.def("read_pgm", [](const std::string& path) { return array_from_image(imaging::read_pgm(path)); });
    m.def("write_pgm", [](const py::array_t<std::uint8_t>& img, const std::string& path) {
        imaging::write_pgm(image_from_array(img), path);
    });
    m.def("mirror_horizontal", [](const py::array_t<std::uint8_t>& img) {
        return array_from_image(imaging::mirror_horizontal(image_from_array(img)));
    });
    m.def("gamma_correct", [](const py::array_t<std::uint8_t>& img, double gamma) {
        return array_from_image(imaging::gamma_correct(image_from_array(img), gamma));
    });
    m.def("hist_equalize", [](const py::array_t<std::uint8_t>& img) {
        return array_from_image(imaging::hist_equalize(image_from_array(img)));
    });
    m.def(
        "canny_edges",
        [](const py::array_t<std::uint8_t>& img, double sigma, double lo, double hi) {
            return array_from_image(imaging::canny_edges(image_from_array(img), sigma, lo, hi));
        },
        py::arg("image"), py::arg("sigma") = 1.0, py::arg("lo") = 50.0, py::arg("hi") = 100.0);
    m.def(
        "harris_response",
        [](const py::array_t<std::uint8_t>& img, double k, double sigma) {
            return array_from_image(imaging::harris_response(image_from_array(img), k, sigma));
        },
        py::arg("image"), py::arg("k") = 0.04, py::arg("sigma") = 1.0);
    m.def(
        "difference_of_gaussians",
        [](const py::array_t<std::uint8_t>& img, double sigma1, double sigma2) {
            return array_from_image(
                imaging::difference_of_gaussians(image_from_array(img), sigma1, sigma2));
        },
        py::arg("image"), py::arg("sigma1") = 1.0, py::arg("sigma2") = 2.0);
    m.def("build_feature_stack", [](const py::array_t<std::uint8_t>& img) {
        const imaging::FeatureStack stack = imaging::build_feature_stack(image_from_array(img));
        py::array_t<std::uint8_t> out({imaging::FeatureStack::kChannels, stack.height, stack.width});
        for (int c = 0; c < imaging::FeatureStack::kChannels; ++c) {
            std::memcpy(out.mutable_data(c, 0, 0), stack.channels[c].data.data(),
                        stack.channels[c].data.size());
        }
        return out;
    });
    m.def(
        "crop_eye_region",
        [](const py::array_t<std::uint8_t>& img, const py::array_t<double>& points, double margin) {
            const auto pts = points_from_array(points);
            const imaging::CropResult crop =
                imaging::crop_eye_region(image_from_array(img), pts, margin);
            return py::make_tuple(array_from_image(crop.image), py::make_tuple(crop.x0, crop.y0));
        },
        py::arg("image"), py::arg("points"), py::arg("margin") = 0.5);

    // ---- geometry
    m.def("polygon_area", [](const py::array_t<double>& poly) {
        return geom::polygon_area(points_from_array(poly));
    });
    m.def("circle_polygon_intersection_area",
          [](std::pair<double, double> center, double radius, const py::array_t<double>& poly) {
              return geom::circle_polygon_intersection_area(
                  {{center.first, center.second}, radius}, points_from_array(poly));
          });
    m.def("point_to_polyline_distance",
          [](std::pair<double, double> p, const py::array_t<double>& chain) {
              const auto res =
                  geom::point_to_polyline_distance({p.first, p.second}, points_from_array(chain));
              return py::make_tuple(res.distance, py::make_tuple(res.point.x, res.point.y));
          });
    m.def("circle_from_iris_landmarks", [](const py::array_t<double>& iris) {
        const geom::Circle c = geom::circle_from_iris_landmarks(points_from_array(iris));
        return py::make_tuple(py::make_tuple(c.center.x, c.center.y), c.radius);
    });

    // ---- clinical
    py::class_<clinical::ClinicalMeasurements>(m, "Measurements")
        .def_readonly("mrd1_px", &clinical::ClinicalMeasurements::mrd1_px)
        .def_readonly("mrd1_mm", &clinical::ClinicalMeasurements::mrd1_mm)
        .def_readonly("iris_ratio_pct", &clinical::ClinicalMeasurements::iris_ratio_pct)
        .def_readonly("clr_found", &clinical::ClinicalMeasurements::clr_found)
        .def_readonly("mm_per_px", &clinical::ClinicalMeasurements::mm_per_px)
        .def_property_readonly("clr",
                               [](const clinical::ClinicalMeasurements& mm) {
                                   return py::make_tuple(mm.clr.x, mm.clr.y);
                               })
        .def("__repr__", [](const clinical::ClinicalMeasurements& mm) {
            return "Measurements(mrd1_mm=" + std::to_string(mm.mrd1_mm) +
                   ", iris_ratio_pct=" + std::to_string(mm.iris_ratio_pct) + ")";
        });

    m.def(
        "measure_eye",
        [](const py::array_t<std::uint8_t>& img, const std::string& side,
           const py::array_t<double>& contour, const py::array_t<double>& iris, double iris_mm) {
            clinical::MeasureOptions opts;
            opts.calibration.iris_diameter_mm = iris_mm;
            return clinical::measure_eye(image_from_array(img),
                                         landmarks_from_arrays(side, contour, iris), opts);
        },
        py::arg("image"), py::arg("side"), py::arg("contour"), py::arg("iris"),
        py::arg("iris_mm") = 11.7);
    m.def(
        "detect_clr",
        [](const py::array_t<std::uint8_t>& img, std::pair<double, double> center, double radius) {
            const auto res = clinical::detect_clr(image_from_array(img),
                                                  {{center.first, center.second}, radius});
            return py::make_tuple(py::make_tuple(res.location.x, res.location.y), res.found);
        },
        py::arg("image"), py::arg("center"), py::arg("radius"));
    m.def(
        "measure_mrd1",
        [](const std::string& side, const py::array_t<double>& contour,
           const py::array_t<double>& iris, std::pair<double, double> clr) {
            return clinical::measure_mrd1(landmarks_from_arrays(side, contour, iris),
                                          {clr.first, clr.second});
        },
        py::arg("side"), py::arg("contour"), py::arg("iris"), py::arg("clr"));
    m.def("measure_iris_ratio", [](const std::string& side, const py::array_t<double>& contour,
                                   const py::array_t<double>& iris) {
        return clinical::measure_iris_ratio(landmarks_from_arrays(side, contour, iris));
    });
    m.def(
        "px_to_mm",
        [](double mrd1_px, double iris_radius_px, double iris_mm) {
            const auto conv = clinical::px_to_mm(
                mrd1_px, {{0.0, 0.0}, iris_radius_px}, clinical::CalibrationModel{iris_mm});
            return py::make_tuple(conv.mrd1_mm, conv.mm_per_px);
        },
        py::arg("mrd1_px"), py::arg("iris_radius_px"), py::arg("iris_mm") = 11.7);

    // ---- classifiers
    py::class_<classify::ThresholdClassifier>(m, "ThresholdClassifier")
        .def_readonly("feature_index", &classify::ThresholdClassifier::feature_index)
        .def_readonly("threshold", &classify::ThresholdClassifier::threshold)
        .def_readonly("train_accuracy", &classify::ThresholdClassifier::train_accuracy)
        .def_property_readonly("direction",
                               [](const classify::ThresholdClassifier& c) {
                                   return c.direction == classify::ThresholdDirection::predict_below
                                              ? "below"
                                              : "above";
                               })
        .def("predict", &predict_matrix<classify::ThresholdClassifier>);

    py::class_<classify::DecisionTree>(m, "DecisionTree")
        .def_property_readonly("n_nodes",
                               [](const classify::DecisionTree& t) { return t.nodes.size(); })
        .def("predict", &predict_matrix<classify::DecisionTree>);

    py::class_<classify::LogisticModel>(m, "LogisticModel")
        .def_readonly("bias", &classify::LogisticModel::bias)
        .def_readonly("weights", &classify::LogisticModel::weights)
        .def_readonly("iterations", &classify::LogisticModel::iterations)
        .def("predict", &predict_matrix<classify::LogisticModel>)
        .def("predict_prob", [](const classify::LogisticModel& mdl, const std::vector<double>& x) {
            return classify::predict_prob(mdl, x);
        });

    m.def(
        "fit_threshold",
        [](const py::array_t<double>& x, const py::array_t<long>& y, int feature_index,
           bool class_weighted) {
            return classify::fit_threshold(samples_from_arrays(x, y), feature_index,
                                           {class_weighted});
        },
        py::arg("X"), py::arg("y"), py::arg("feature_index") = 0, py::arg("class_weighted") = true);
    m.def(
        "fit_tree",
        [](const py::array_t<double>& x, const py::array_t<long>& y, int max_depth, int min_leaf,
           bool class_weighted) {
            classify::TreeFitOptions opts;
            opts.max_depth = max_depth;
            opts.min_leaf = min_leaf;
            opts.class_weighted = class_weighted;
            return classify::fit_tree(samples_from_arrays(x, y), opts);
        },
        py::arg("X"), py::arg("y"), py::arg("max_depth") = 3, py::arg("min_leaf") = 5,
        py::arg("class_weighted") = true);
    m.def(
        "fit_logistic",
        [](const py::array_t<double>& x, const py::array_t<long>& y, double lr, int max_iters,
           double tol, double l2) {
            classify::LogisticFitOptions opts;
            opts.learning_rate = lr;
            opts.max_iters = max_iters;
            opts.tolerance = tol;
            opts.l2 = l2;
            return classify::fit_logistic(samples_from_arrays(x, y), opts);
        },
        py::arg("X"), py::arg("y"), py::arg("lr") = 1.0, py::arg("max_iters") = 5000,
        py::arg("tol") = 1e-6, py::arg("l2") = 1e-3);
    m.def("ensemble_average", [](const std::vector<double>& probs) {
        const auto res = classify::ensemble_average(probs);
        return py::make_tuple(res.prob, res.label);
    });
    m.def(
        "fuse",
        [](double p_deep, double mrd1_mm, double iris_ratio_pct, const std::string& model_path,
           double t_lo, double t_hi) {
            const classify::Model model = io::read_model(model_path);
            clinical::ClinicalMeasurements meas;
            meas.mrd1_mm = mrd1_mm;
            meas.iris_ratio_pct = iris_ratio_pct;
            classify::FusionPolicy policy{t_lo, t_hi, &model};
            const auto res = classify::fuse(p_deep, meas, policy);
            return py::make_tuple(res.label,
                                  res.used == classify::DecisionPath::deep ? "deep" : "deferred");
        },
        py::arg("p_deep"), py::arg("mrd1_mm"), py::arg("iris_ratio_pct"), py::arg("model_path"),
        py::arg("t_lo") = 0.34, py::arg("t_hi") = 0.78);
    m.def("aggregate_face", [](int left, int right) {
        return classify::to_string(classify::aggregate_face(left, right));
    });
    m.def("fit_fusion_thresholds",
          [](const std::vector<double>& probs, const std::vector<int>& labels) {
              const auto band = classify::fit_fusion_thresholds(probs, labels);
              return py::make_tuple(band.t_lo, band.t_hi);
          });

    // ---- synth
    py::class_<synth::EyeSceneSpec>(m, "EyeSceneSpec")
        .def(py::init<>())
        .def_readwrite("width", &synth::EyeSceneSpec::width)
        .def_readwrite("height", &synth::EyeSceneSpec::height)
        .def_readwrite("iris_radius", &synth::EyeSceneSpec::iris_radius)
        .def_readwrite("pupil_radius", &synth::EyeSceneSpec::pupil_radius)
        .def_readwrite("lid_center_x", &synth::EyeSceneSpec::lid_center_x)
        .def_readwrite("upper_apex_y", &synth::EyeSceneSpec::upper_apex_y)
        .def_readwrite("upper_curvature", &synth::EyeSceneSpec::upper_curvature)
        .def_readwrite("lower_apex_y", &synth::EyeSceneSpec::lower_apex_y)
        .def_readwrite("lower_curvature", &synth::EyeSceneSpec::lower_curvature)
        .def_readwrite("clr_dx", &synth::EyeSceneSpec::clr_dx)
        .def_readwrite("clr_dy", &synth::EyeSceneSpec::clr_dy)
        .def_readwrite("noise_sigma", &synth::EyeSceneSpec::noise_sigma)
        .def_readwrite("seed", &synth::EyeSceneSpec::seed)
        .def_property(
            "iris_center",
            [](const synth::EyeSceneSpec& s) { return py::make_tuple(s.iris_center.x, s.iris_center.y); },
            [](synth::EyeSceneSpec& s, std::pair<double, double> c) {
                s.iris_center = {c.first, c.second};
            });

    py::class_<synth::GroundTruth>(m, "GroundTruth")
        .def_readonly("mrd1_px", &synth::GroundTruth::mrd1_px)
        .def_readonly("mrd1_mm", &synth::GroundTruth::mrd1_mm)
        .def_readonly("mm_per_px", &synth::GroundTruth::mm_per_px)
        .def_readonly("iris_ratio_pct", &synth::GroundTruth::iris_ratio_pct)
        .def_readonly("clr_visible", &synth::GroundTruth::clr_visible)
        .def_readonly("ptosis_label", &synth::GroundTruth::ptosis_label)
        .def_property_readonly("clr",
                               [](const synth::GroundTruth& t) {
                                   return py::make_tuple(t.clr.x, t.clr.y);
                               })
        .def_property_readonly("side",
                               [](const synth::GroundTruth& t) {
                                   return clinical::to_string(t.landmarks.side);
                               })
        .def_property_readonly("contour",
                               [](const synth::GroundTruth& t) {
                                   return array_from_points(t.landmarks.contour);
                               })
        .def_property_readonly("iris", [](const synth::GroundTruth& t) {
            return array_from_points(t.landmarks.iris);
        });

    m.def("render_eye", [](const synth::EyeSceneSpec& spec) {
        const synth::RenderResult res = synth::render_eye(spec);
        return py::make_tuple(array_from_image(res.image), res.truth);
    });
    m.def(
        "suite_spec",
        [](int index, double droop_min, double droop_max, double sigma_min, double sigma_max,
           std::uint64_t seed) {
            return synth::suite_spec(index, {droop_min, droop_max, sigma_min, sigma_max}, seed);
        },
        py::arg("index"), py::arg("droop_min") = 0.0, py::arg("droop_max") = 1.0,
        py::arg("sigma_min") = 0.0, py::arg("sigma_max") = 8.0, py::arg("seed") = 0);

    // ---- eval
    m.def("confusion", [](const std::vector<int>& preds, const std::vector<int>& truth) {
        const auto cm = eval::confusion(preds, truth);
        py::dict d;
        d["tp"] = cm.tp;
        d["fp"] = cm.fp;
        d["fn"] = cm.fn;
        d["tn"] = cm.tn;
        return d;
    });
    m.def("metrics", [](long long tp, long long fp, long long fn, long long tn) {
        const auto mm = eval::metrics({tp, fp, fn, tn});
        py::dict d;
        d["accuracy"] = mm.accuracy ? py::cast(*mm.accuracy) : py::none();
        d["precision"] = mm.precision ? py::cast(*mm.precision) : py::none();
        d["recall"] = mm.recall ? py::cast(*mm.recall) : py::none();
        d["f1"] = mm.f1 ? py::cast(*mm.f1) : py::none();
        return d;
    });
    m.def("roc_auc", [](const std::vector<double>& scores, const std::vector<int>& truth) {
        return eval::roc_auc(scores, truth);
    });
}
