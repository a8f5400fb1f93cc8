#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ptosis/classify.hpp"
#include "ptosis/clinical.hpp"
#include "ptosis/errors.hpp"
#include "ptosis/eval.hpp"
#include "ptosis/filters.hpp"
#include "ptosis/formats.hpp"
#include "ptosis/image.hpp"
#include "ptosis/rand.hpp"
#include "ptosis/synth.hpp"

namespace fs = std::filesystem;

namespace ptosis::cli {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// Six crop anchors picked from the 16-point contour: both canthi plus
// upper/lower mid-lid samples.
constexpr std::array<int, 6> kCropAnchors = {0, 2, 4, 6, 8, 12};

struct MeasureFlags {
    double iris_mm = 11.7;
    double margin = 0.5;
    double clr_floor = 240.0;
    double clr_delta = 5.0;
    std::string mrd1_mode = "segment";
    bool clamp_negative = false;

    clinical::MeasureOptions to_options() const {
        clinical::MeasureOptions opts;
        opts.calibration.iris_diameter_mm = iris_mm;
        opts.clr.absolute_floor = clr_floor;
        opts.clr.relative_delta = clr_delta;
        opts.mrd1_mode =
            mrd1_mode == "vertex" ? clinical::Mrd1Mode::vertex : clinical::Mrd1Mode::segment;
        opts.clamp_negative_mrd1 = clamp_negative;
        return opts;
    }

    void add_to(CLI::App* cmd) {
        cmd->add_option("--iris-mm", iris_mm, "Assumed horizontal iris diameter in mm")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--margin", margin, "Eye-crop margin as a fraction of the box size")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--clr-floor", clr_floor, "Absolute CLR brightness floor");
        cmd->add_option("--clr-delta", clr_delta, "CLR brightness delta below the iris maximum");
        cmd->add_option("--mrd1-mode", mrd1_mode, "MRD1 distance mode")
            ->check(CLI::IsMember({"segment", "vertex"}));
        cmd->add_flag("--clamp-negative", clamp_negative, "Clamp negative MRD1 to zero");
    }

    std::vector<std::pair<std::string, std::string>> provenance() const {
        return {{"iris_mm", format_double(iris_mm)},
                {"margin", format_double(margin)},
                {"clr_floor", format_double(clr_floor)},
                {"clr_delta", format_double(clr_delta)},
                {"mrd1_mode", mrd1_mode},
                {"clamp_negative", clamp_negative ? "true" : "false"}};
    }
};

io::EyeReport measure_one_eye(const imaging::GrayImage& image, const clinical::EyeLandmarks& lm,
                              const MeasureFlags& flags) {
    std::array<geom::Point2, 6> anchors;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        anchors[i] = lm.contour[kCropAnchors[i]];
    }
    const imaging::CropResult crop = imaging::crop_eye_region(image, anchors, flags.margin);

    clinical::EyeLandmarks local = lm;
    const geom::Point2 offset{static_cast<double>(crop.x0), static_cast<double>(crop.y0)};
    for (auto& p : local.contour) {
        p = p - offset;
    }
    for (auto& p : local.iris) {
        p = p - offset;
    }

    io::EyeReport report;
    report.side = lm.side;
    report.measurements = clinical::measure_eye(crop.image, local, flags.to_options());
    report.measurements.clr = report.measurements.clr + offset;  // back to full-image space
    return report;
}

void emit_report(const io::DiagnosisReport& report, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << io::report_to_json(report);
        std::cerr << io::report_summary(report);
    } else {
        io::write_report(report, out_path);
        std::cout << io::report_summary(report);
    }
}

// ---------------------------------------------------------------- measure

struct MeasureArgs {
    std::string image;
    std::string landmarks;
    std::string suite;
    std::string out;
    std::string out_csv;
    std::string reports_dir;
    int jobs = 1;
    MeasureFlags flags;
};

int cmd_measure_single(const MeasureArgs& args) {
    const imaging::GrayImage image = imaging::read_pgm(args.image);
    const io::LandmarkFile lm = io::read_landmark_file(args.landmarks);

    io::DiagnosisReport report;
    for (const auto& eye : lm.eyes) {
        report.eyes.push_back(measure_one_eye(image, eye, args.flags));
    }
    report.provenance.inputs = {{"image", io::fnv1a64_hex(args.image)},
                                {"landmarks", io::fnv1a64_hex(args.landmarks)}};
    report.provenance.parameters = args.flags.provenance();
    emit_report(report, args.out);
    return kExitOk;
}

std::vector<std::string> suite_item_ids(const fs::path& dir) {
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        const std::string suffix = ".landmarks.json";
        if (name.size() > suffix.size() && name.ends_with(suffix)) {
            ids.push_back(name.substr(0, name.size() - suffix.size()));
        }
    }
    std::sort(ids.begin(), ids.end());
    if (ids.empty()) {
        throw SchemaError("suite " + dir.string() + ": no *.landmarks.json items found");
    }
    return ids;
}

int cmd_measure_suite(const MeasureArgs& args) {
    const fs::path dir(args.suite);
    const std::vector<std::string> ids = suite_item_ids(dir);

    std::map<std::string, int> labels;
    if (fs::exists(dir / "truth.csv")) {
        const io::TruthTable truth = io::read_truth_csv(dir / "truth.csv");
        for (std::size_t i = 0; i < truth.ids.size(); ++i) {
            labels[truth.ids[i]] = truth.labels[i];
        }
    }

    std::vector<io::EyeReport> eyes(ids.size());
    std::vector<std::exception_ptr> errors(ids.size());
    const int workers = std::clamp(args.jobs, 1, static_cast<int>(ids.size()));
    auto work = [&](int start) {
        for (std::size_t i = start; i < ids.size(); i += workers) {
            try {
                const io::LandmarkFile lm = io::read_landmark_file(dir / (ids[i] + ".landmarks.json"));
                const imaging::GrayImage image =
                    imaging::read_pgm(dir / (lm.image.empty() ? ids[i] + ".pgm" : lm.image));
                if (lm.eyes.size() != 1) {
                    throw SchemaError("suite item " + ids[i] + ": expected exactly one eye");
                }
                eyes[i] = measure_one_eye(image, lm.eyes[0], args.flags);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) {
            threads.emplace_back(work, w);
        }
        for (auto& t : threads) {
            t.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    io::FeatureTable table;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        table.ids.push_back(ids[i]);
        classify::FeatureRow row;
        row.mrd1_mm = eyes[i].measurements.mrd1_mm;
        row.iris_ratio_pct = eyes[i].measurements.iris_ratio_pct;
        table.rows.push_back(row);
        const auto it = labels.find(ids[i]);
        table.labels.push_back(it == labels.end() ? std::optional<int>() : it->second);
    }
    if (args.out_csv.empty()) {
        throw ParameterError("measure --suite requires --out-csv");
    }
    io::write_feature_csv(table, args.out_csv);

    if (!args.reports_dir.empty()) {
        fs::create_directories(args.reports_dir);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            io::DiagnosisReport report;
            report.eyes.push_back(eyes[i]);
            report.provenance.parameters = args.flags.provenance();
            io::write_report(report, fs::path(args.reports_dir) / (ids[i] + ".report.json"));
        }
    }
    std::cout << "measured " << ids.size() << " eyes -> " << args.out_csv << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- classify

struct ClassifyArgs {
    std::string report;
    std::string features;
    std::string model;
    std::string p_deep;  // literal value or JSON file mapping side -> value
    std::string out;
    std::vector<double> fusion_band;  // optional [t_lo, t_hi] pair
    double fusion_lo = 0.34;
    double fusion_hi = 0.78;
    bool no_fusion = false;

    void resolve_band() {
        if (fusion_band.size() == 2) {
            fusion_lo = fusion_band[0];
            fusion_hi = fusion_band[1];
        }
    }
};

std::optional<double> parse_p_deep_for(const std::string& source, clinical::EyeSide side) {
    if (source.empty()) {
        return std::nullopt;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(source, &used);
        if (used == source.size()) {
            return v;
        }
    } catch (const std::exception&) {
        // fall through to file form
    }
    const auto j = nlohmann::json::parse(std::ifstream(source), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw SchemaError("--p-deep: expected a number or a JSON object file mapping sides");
    }
    const std::string key = clinical::to_string(side);
    if (!j.contains(key)) {
        return std::nullopt;
    }
    return j[key].get<double>();
}

int classify_eye(io::EyeReport& eye, const classify::Model& model, const ClassifyArgs& args) {
    std::optional<double> p_deep = eye.p_deep;
    if (!args.p_deep.empty()) {
        p_deep = parse_p_deep_for(args.p_deep, eye.side);
    }
    eye.p_deep = p_deep;

    if (p_deep && !args.no_fusion) {
        classify::FusionPolicy policy;
        policy.t_lo = args.fusion_lo;
        policy.t_hi = args.fusion_hi;
        policy.deferred = &model;
        const classify::FusionResult fused = classify::fuse(*p_deep, eye.measurements, policy);
        eye.prediction = fused.label;
        eye.decision_path = fused.used == classify::DecisionPath::deep ? "deep" : "deferred";
    } else {
        classify::FeatureRow row;
        row.p_deep = p_deep ? *p_deep : std::numeric_limits<double>::quiet_NaN();
        row.mrd1_mm = eye.measurements.mrd1_mm;
        row.iris_ratio_pct = eye.measurements.iris_ratio_pct;
        eye.prediction = classify::predict_row(model, row);
        eye.decision_path = "clinical-only";
    }
    return *eye.prediction;
}

int cmd_classify_report(const ClassifyArgs& args) {
    io::DiagnosisReport report = io::read_report(args.report);
    const classify::Model model = io::read_model(args.model);

    std::optional<int> left;
    std::optional<int> right;
    for (auto& eye : report.eyes) {
        const int label = classify_eye(eye, model, args);
        (eye.side == clinical::EyeSide::left ? left : right) = label;
    }
    if (left && right) {
        report.face = classify::aggregate_face(*left, *right);
    }
    report.provenance.model = classify::to_string(model.kind) + ":" + io::fnv1a64_hex(args.model);
    report.provenance.parameters.emplace_back("fusion_lo", format_double(args.fusion_lo));
    report.provenance.parameters.emplace_back("fusion_hi", format_double(args.fusion_hi));
    report.provenance.parameters.emplace_back("fusion", args.no_fusion ? "off" : "auto");
    emit_report(report, args.out);
    return kExitOk;
}

int cmd_classify_csv(const ClassifyArgs& args) {
    const io::FeatureTable table = io::read_feature_csv(args.features);
    const classify::Model model = io::read_model(args.model);

    io::PredictionTable preds;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const classify::FeatureRow& row = table.rows[i];
        int label = 0;
        double score = 0.0;
        if (std::isfinite(row.p_deep) && !args.no_fusion) {
            clinical::ClinicalMeasurements meas;
            meas.mrd1_mm = row.mrd1_mm;
            meas.iris_ratio_pct = row.iris_ratio_pct;
            classify::FusionPolicy policy;
            policy.t_lo = args.fusion_lo;
            policy.t_hi = args.fusion_hi;
            policy.deferred = &model;
            const classify::FusionResult fused = classify::fuse(row.p_deep, meas, policy);
            label = fused.label;
            score = fused.used == classify::DecisionPath::deep ? row.p_deep
                                                               : classify::predict_prob_row(model, row);
        } else {
            label = classify::predict_row(model, row);
            score = classify::predict_prob_row(model, row);
        }
        preds.ids.push_back(table.ids[i].empty() ? std::to_string(i) : table.ids[i]);
        preds.predictions.push_back(label);
        preds.scores.push_back(score);
    }

    if (args.out.empty()) {
        std::cout << "id,prediction,score\n";
        for (std::size_t i = 0; i < preds.ids.size(); ++i) {
            std::cout << preds.ids[i] << "," << preds.predictions[i] << ","
                      << format_double(preds.scores[i]) << "\n";
        }
    } else {
        io::write_prediction_csv(preds, args.out);
    }
    return kExitOk;
}

// ---------------------------------------------------------------- fit

struct FitArgs {
    std::string training;
    std::string model_kind;
    std::string out;
    std::uint64_t seed = 0;
    double val_fraction = 0.0;
    int max_depth = 3;
    int min_leaf = 5;
    bool no_class_weights = false;
    classify::LogisticFitOptions logistic;
};

std::vector<classify::LabeledSample> build_samples(const io::FeatureTable& table,
                                                   const std::vector<std::string>& features,
                                                   const std::vector<std::size_t>& rows) {
    std::vector<classify::LabeledSample> samples;
    samples.reserve(rows.size());
    for (std::size_t i : rows) {
        if (!table.labels[i]) {
            throw SchemaError("training CSV: row " + std::to_string(i + 2) + " is missing a label");
        }
        classify::LabeledSample s;
        for (const auto& name : features) {
            const double v = classify::feature_by_name(table.rows[i], name);
            if (!std::isfinite(v)) {
                throw SchemaError("training CSV: row " + std::to_string(i + 2) + " has no usable '" +
                                  name + "' value");
            }
            s.features.push_back(v);
        }
        s.label = *table.labels[i];
        samples.push_back(std::move(s));
    }
    return samples;
}

double accuracy_on(const classify::Model& model, const io::FeatureTable& table,
                   const std::vector<std::size_t>& rows) {
    long long correct = 0;
    for (std::size_t i : rows) {
        correct += classify::predict_row(model, table.rows[i]) == *table.labels[i] ? 1 : 0;
    }
    return rows.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(rows.size());
}

int cmd_fit(const FitArgs& args) {
    const io::FeatureTable table = io::read_feature_csv(args.training);

    // The CLI contract treats single-class training data as a degenerate fit
    // for every model kind, including trees.
    bool has[2] = {false, false};
    for (const auto& label : table.labels) {
        if (label) {
            has[*label == 1 ? 1 : 0] = true;
        }
    }
    if (!has[0] || !has[1]) {
        throw DegenerateFitError("training data contains a single class");
    }

    std::vector<std::size_t> all(table.size());
    std::iota(all.begin(), all.end(), std::size_t{0});

    std::vector<std::size_t> train = all;
    std::vector<std::size_t> val;
    if (args.val_fraction > 0.0) {
        if (args.val_fraction >= 1.0) {
            throw ParameterError("--val-fraction must be in [0, 1)");
        }
        SplitMix64 rng(args.seed);
        for (std::size_t i = all.size(); i > 1; --i) {
            const std::size_t j = rng.next_u64() % i;
            std::swap(all[i - 1], all[j]);
        }
        const std::size_t n_val = static_cast<std::size_t>(args.val_fraction * all.size());
        val.assign(all.begin(), all.begin() + n_val);
        train.assign(all.begin() + n_val, all.end());
        std::sort(train.begin(), train.end());
        std::sort(val.begin(), val.end());
    }

    classify::Model model;
    const classify::FitOptions fit_opts{!args.no_class_weights};
    if (args.model_kind == "threshold-mrd1" || args.model_kind == "threshold-ir") {
        model.kind = classify::ModelKind::threshold;
        model.feature_names = {args.model_kind == "threshold-mrd1" ? "mrd1_mm" : "iris_ratio_pct"};
        model.threshold =
            classify::fit_threshold(build_samples(table, model.feature_names, train), 0, fit_opts);
    } else if (args.model_kind == "tree") {
        model.kind = classify::ModelKind::tree;
        model.feature_names = {"mrd1_mm", "iris_ratio_pct"};
        classify::TreeFitOptions opts;
        opts.max_depth = args.max_depth;
        opts.min_leaf = args.min_leaf;
        opts.class_weighted = !args.no_class_weights;
        model.tree = classify::fit_tree(build_samples(table, model.feature_names, train), opts);
    } else if (args.model_kind == "logistic") {
        model.kind = classify::ModelKind::logistic;
        model.feature_names = classify::kAllFeatures;
        model.logistic =
            classify::fit_logistic(build_samples(table, model.feature_names, train), args.logistic);
    } else {
        throw ParameterError("--model must be one of threshold-mrd1, threshold-ir, tree, logistic");
    }

    model.train_accuracy = accuracy_on(model, table, train);
    io::write_model(model, args.out);
    std::cout << "train_accuracy " << format_double(model.train_accuracy) << "\n";
    if (!val.empty()) {
        std::cout << "val_accuracy " << format_double(accuracy_on(model, table, val)) << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    int n = 0;
    std::uint64_t seed = 0;
    std::string out;
    synth::SuiteOptions options;
    int jobs = 1;
};

int cmd_synth(const SynthArgs& args) {
    const std::vector<synth::RenderResult> suite =
        synth::generate_suite(args.n, args.options, args.seed, args.jobs);
    io::write_suite(suite, args.out);
    std::cout << "wrote " << suite.size() << " items to " << args.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::vector<std::string> preds;
    std::string truth;
    std::string csv_out;
};

int cmd_eval(const EvalArgs& args) {
    const io::TruthTable truth = io::read_truth_csv(args.truth);
    std::map<std::string, int> truth_by_id;
    for (std::size_t i = 0; i < truth.ids.size(); ++i) {
        truth_by_id[truth.ids[i]] = truth.labels[i];
    }

    std::vector<eval::MethodPredictions> methods;
    std::vector<int> truth_labels;
    for (const auto& spec : args.preds) {
        std::string name;
        std::string path = spec;
        if (const auto pos = spec.find('='); pos != std::string::npos) {
            name = spec.substr(0, pos);
            path = spec.substr(pos + 1);
        } else {
            name = fs::path(spec).stem().string();
        }
        const io::PredictionTable table = io::read_prediction_csv(path);

        std::vector<int> labels;
        for (const auto& id : table.ids) {
            const auto it = truth_by_id.find(id);
            if (it == truth_by_id.end()) {
                throw SchemaError(path + ": id '" + id + "' not present in the truth file");
            }
            labels.push_back(it->second);
        }
        if (methods.empty()) {
            truth_labels = labels;
        } else if (labels != truth_labels) {
            throw SchemaError(path + ": prediction ids are not aligned across methods");
        }
        eval::MethodPredictions m;
        m.name = name;
        m.preds = table.predictions;
        m.scores = table.scores;
        methods.push_back(std::move(m));
    }

    const std::vector<eval::MethodRow> rows = eval::evaluate_methods(truth_labels, methods);
    std::cout << eval::render_table_text(rows);
    if (!args.csv_out.empty()) {
        io::write_text_file(eval::render_table_csv(rows), args.csv_out);
    }
    return kExitOk;
}

// ---------------------------------------------------------------- features

struct FeaturesArgs {
    std::string image;
    std::string landmarks;
    std::string out;
    std::string side;
    std::string format = "raw";
    double margin = 0.5;
};

int cmd_features(const FeaturesArgs& args) {
    const imaging::GrayImage image = imaging::read_pgm(args.image);
    const io::LandmarkFile lm = io::read_landmark_file(args.landmarks);

    std::vector<const clinical::EyeLandmarks*> selected;
    for (const auto& eye : lm.eyes) {
        if (args.side.empty() || clinical::to_string(eye.side) == args.side) {
            selected.push_back(&eye);
        }
    }
    if (selected.empty()) {
        throw SchemaError("features: no matching eye in " + args.landmarks);
    }

    const imaging::StackFormat format =
        args.format == "pgms" ? imaging::StackFormat::pgms : imaging::StackFormat::raw;

    for (const auto* eye : selected) {
        std::array<geom::Point2, 6> anchors;
        for (std::size_t i = 0; i < anchors.size(); ++i) {
            anchors[i] = eye->contour[kCropAnchors[i]];
        }
        imaging::CropResult crop = imaging::crop_eye_region(image, anchors, args.margin);
        // The deep model sees every eye in left-eye orientation.
        if (eye->side == clinical::EyeSide::right) {
            crop.image = imaging::mirror_horizontal(crop.image);
        }
        const imaging::FeatureStack stack = imaging::build_feature_stack(crop.image);

        fs::path out_path(args.out);
        if (selected.size() > 1) {
            out_path = out_path.parent_path() /
                       (out_path.stem().string() + "." + clinical::to_string(eye->side) +
                        out_path.extension().string());
        }
        imaging::write_feature_stack(stack, out_path, format);
        std::cout << clinical::to_string(eye->side) << " " << stack.width << "x" << stack.height
                  << "x" << imaging::FeatureStack::kChannels << " -> " << out_path.string() << "\n";
    }
    return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Eyelid ptosis measurement and classification toolkit"};
    app.require_subcommand(1);

    MeasureArgs measure;
    auto* cmd_m = app.add_subcommand("measure", "Measure MRD1, iris ratio and CLR for each eye");
    cmd_m->add_option("--image", measure.image, "Input PGM image");
    cmd_m->add_option("--landmarks", measure.landmarks, "Landmark JSON document");
    cmd_m->add_option("--suite", measure.suite, "Measure a whole suite directory instead");
    cmd_m->add_option("--out", measure.out, "Report output path (stdout when omitted)");
    cmd_m->add_option("--out-csv", measure.out_csv, "Feature CSV output (suite mode)");
    cmd_m->add_option("--reports-dir", measure.reports_dir, "Per-item report directory (suite mode)");
    cmd_m->add_option("--jobs", measure.jobs, "Worker threads (suite mode)")
        ->check(CLI::PositiveNumber);
    measure.flags.add_to(cmd_m);

    ClassifyArgs classify_args;
    auto* cmd_c = app.add_subcommand("classify", "Apply a fitted model, optionally fused with a deep probability");
    cmd_c->add_option("--report", classify_args.report, "Measurement report JSON to classify");
    cmd_c->add_option("--features", classify_args.features, "Feature CSV to classify");
    cmd_c->add_option("--model", classify_args.model, "Model file")->required();
    cmd_c->add_option("--p-deep", classify_args.p_deep,
                      "Deep-model probability: a number or a JSON file {\"left\":p,\"right\":p}");
    cmd_c->add_option("--fusion", classify_args.fusion_band, "Fusion band as two values: t_lo t_hi")
        ->expected(2);
    cmd_c->add_option("--fusion-lo", classify_args.fusion_lo, "Lower fusion threshold");
    cmd_c->add_option("--fusion-hi", classify_args.fusion_hi, "Upper fusion threshold");
    cmd_c->add_flag("--no-fusion", classify_args.no_fusion, "Always use the model directly");
    cmd_c->add_option("--out", classify_args.out, "Output path");

    FitArgs fit;
    auto* cmd_f = app.add_subcommand("fit", "Fit a classifier from a training CSV");
    cmd_f->add_option("--training", fit.training, "Training CSV")->required();
    cmd_f->add_option("--model", fit.model_kind, "threshold-mrd1 | threshold-ir | tree | logistic")
        ->required();
    cmd_f->add_option("--out", fit.out, "Model output path")->required();
    cmd_f->add_option("--seed", fit.seed, "Seed for the train/validation split");
    cmd_f->add_option("--val-fraction", fit.val_fraction, "Validation fraction in [0,1)");
    cmd_f->add_option("--max-depth", fit.max_depth, "Decision tree depth bound");
    cmd_f->add_option("--min-leaf", fit.min_leaf, "Decision tree minimum leaf size");
    cmd_f->add_flag("--no-class-weights", fit.no_class_weights,
                    "Disable inverse-frequency class weighting");
    cmd_f->add_option("--lr", fit.logistic.learning_rate, "Logistic learning rate");
    cmd_f->add_option("--l2", fit.logistic.l2, "Logistic L2 strength");
    cmd_f->add_option("--max-iters", fit.logistic.max_iters, "Logistic iteration bound");
    cmd_f->add_option("--tol", fit.logistic.tolerance, "Logistic gradient tolerance");

    SynthArgs synth_args;
    auto* cmd_s = app.add_subcommand("synth", "Render a synthetic labelled eye suite");
    cmd_s->add_option("--n", synth_args.n, "Number of eyes")->required();
    cmd_s->add_option("--seed", synth_args.seed, "Suite seed");
    cmd_s->add_option("--out", synth_args.out, "Output directory")->required();
    cmd_s->add_option("--droop-min", synth_args.options.droop_min, "Droop sweep lower bound");
    cmd_s->add_option("--droop-max", synth_args.options.droop_max, "Droop sweep upper bound");
    cmd_s->add_option("--sigma-min", synth_args.options.sigma_min, "Noise sigma lower bound");
    cmd_s->add_option("--sigma-max", synth_args.options.sigma_max, "Noise sigma upper bound");
    cmd_s->add_option("--jobs", synth_args.jobs, "Worker threads")->check(CLI::PositiveNumber);

    EvalArgs eval_args;
    auto* cmd_e = app.add_subcommand("eval", "Score prediction files against a truth CSV");
    cmd_e->add_option("--pred", eval_args.preds, "Prediction CSV, optionally NAME=PATH (repeatable)")
        ->required();
    cmd_e->add_option("--truth", eval_args.truth, "Truth CSV")->required();
    cmd_e->add_option("--csv", eval_args.csv_out, "Also write the table as CSV");

    FeaturesArgs features;
    auto* cmd_x = app.add_subcommand("features", "Export the 7-channel filter stack for deep training");
    cmd_x->add_option("--image", features.image, "Input PGM image")->required();
    cmd_x->add_option("--landmarks", features.landmarks, "Landmark JSON document")->required();
    cmd_x->add_option("--out", features.out, "Output path")->required();
    cmd_x->add_option("--side", features.side, "Only export one side")
        ->check(CLI::IsMember({"left", "right"}));
    cmd_x->add_option("--format", features.format, "raw | pgms")
        ->check(CLI::IsMember({"raw", "pgms"}));
    cmd_x->add_option("--margin", features.margin, "Eye-crop margin")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (cmd_m->parsed()) {
            if (!measure.suite.empty()) {
                return cmd_measure_suite(measure);
            }
            if (measure.image.empty() || measure.landmarks.empty()) {
                throw ParameterError("measure requires --image and --landmarks (or --suite)");
            }
            return cmd_measure_single(measure);
        }
        if (cmd_c->parsed()) {
            if (!classify_args.report.empty() == !classify_args.features.empty()) {
                throw ParameterError("classify requires exactly one of --report or --features");
            }
            classify_args.resolve_band();
            return classify_args.report.empty() ? cmd_classify_csv(classify_args)
                                                : cmd_classify_report(classify_args);
        }
        if (cmd_f->parsed()) {
            return cmd_fit(fit);
        }
        if (cmd_s->parsed()) {
            return cmd_synth(synth_args);
        }
        if (cmd_e->parsed()) {
            return cmd_eval(eval_args);
        }
        if (cmd_x->parsed()) {
            return cmd_features(features);
        }
        return kExitInput;
    } catch (const MeasurementError& e) {
        std::cerr << "error: measurement failed at stage " << e.what() << "\n";
        return kExitComputation;
    } catch (const DegenerateFitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitComputation;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitComputation;
    }
}

}  // namespace ptosis::cli
