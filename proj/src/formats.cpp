#include "ptosis/formats.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ptosis/errors.hpp"

namespace ptosis::io {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string read_whole_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ordered_json parse_json(const std::string& text, const std::string& context) {
    try {
        return ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(context + ": " + e.what());
    }
}

double require_finite_number(const ordered_json& j, const std::string& what) {
    if (!j.is_number()) {
        throw SchemaError(what + " must be a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw SchemaError(what + " must be finite");
    }
    return v;
}

geom::Point2 parse_point(const ordered_json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2) {
        throw SchemaError(what + " must be an [x, y] pair");
    }
    return {require_finite_number(j[0], what + "[0]"), require_finite_number(j[1], what + "[1]")};
}

ordered_json point_to_json(const geom::Point2& p) { return ordered_json::array({p.x, p.y}); }

}  // namespace

LandmarkFile read_landmark_file(const std::filesystem::path& path) {
    const ordered_json j = parse_json(read_whole_file(path), "landmarks " + path.string());
    const std::string ctx = "landmarks " + path.string();
    if (!j.is_object()) {
        throw SchemaError(ctx + ": top level must be an object");
    }
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
        throw SchemaError(ctx + ": missing integer schema_version");
    }
    if (j["schema_version"].get<int>() != kLandmarkSchemaVersion) {
        throw SchemaError(ctx + ": unsupported schema_version");
    }
    if (!j.contains("eyes") || !j["eyes"].is_array() || j["eyes"].empty()) {
        throw SchemaError(ctx + ": missing non-empty eyes array");
    }

    LandmarkFile out;
    if (j.contains("image")) {
        if (!j["image"].is_string()) {
            throw SchemaError(ctx + ": image must be a string path");
        }
        out.image = j["image"].get<std::string>();
    }

    bool seen[2] = {false, false};
    int index = 0;
    for (const auto& je : j["eyes"]) {
        const std::string ectx = ctx + ": eyes[" + std::to_string(index++) + "]";
        if (!je.is_object() || !je.contains("side") || !je["side"].is_string()) {
            throw SchemaError(ectx + ": missing side");
        }
        clinical::EyeLandmarks lm;
        lm.side = clinical::eye_side_from_string(je["side"].get<std::string>());
        if (seen[static_cast<int>(lm.side)]) {
            throw SchemaError(ectx + ": duplicate side '" + to_string(lm.side) + "'");
        }
        seen[static_cast<int>(lm.side)] = true;

        if (!je.contains("contour") || !je["contour"].is_array() ||
            je["contour"].size() != clinical::kContourPoints) {
            throw SchemaError(ectx + ": contour must hold exactly 16 [x, y] pairs");
        }
        if (!je.contains("iris") || !je["iris"].is_array() ||
            je["iris"].size() != clinical::kIrisPoints) {
            throw SchemaError(ectx + ": iris must hold exactly 5 [x, y] pairs");
        }
        for (int i = 0; i < clinical::kContourPoints; ++i) {
            lm.contour[i] = parse_point(je["contour"][i], ectx + ".contour[" + std::to_string(i) + "]");
        }
        for (int i = 0; i < clinical::kIrisPoints; ++i) {
            lm.iris[i] = parse_point(je["iris"][i], ectx + ".iris[" + std::to_string(i) + "]");
        }
        out.eyes.push_back(lm);
    }
    return out;
}

void write_landmark_file(const LandmarkFile& file, const std::filesystem::path& path) {
    ordered_json j;
    j["schema_version"] = kLandmarkSchemaVersion;
    j["image"] = file.image;
    j["eyes"] = ordered_json::array();
    for (const auto& eye : file.eyes) {
        ordered_json je;
        je["side"] = to_string(eye.side);
        ordered_json contour = ordered_json::array();
        for (const auto& p : eye.contour) {
            contour.push_back(point_to_json(p));
        }
        ordered_json iris = ordered_json::array();
        for (const auto& p : eye.iris) {
            iris.push_back(point_to_json(p));
        }
        je["contour"] = std::move(contour);
        je["iris"] = std::move(iris);
        j["eyes"].push_back(std::move(je));
    }
    write_text_file(j.dump(2) + "\n", path);
}

namespace {

std::string label_to_string(int label) {
    return label == classify::kPtosis ? "ptosis" : "not_ptosis";
}

int label_from_string(const std::string& s, const std::string& ctx) {
    if (s == "ptosis") {
        return classify::kPtosis;
    }
    if (s == "not_ptosis") {
        return classify::kNotPtosis;
    }
    throw SchemaError(ctx + ": unknown label '" + s + "'");
}

classify::FaceLabel face_from_string(const std::string& s, const std::string& ctx) {
    if (s == "none") {
        return classify::FaceLabel::none;
    }
    if (s == "left_only") {
        return classify::FaceLabel::left_only;
    }
    if (s == "right_only") {
        return classify::FaceLabel::right_only;
    }
    if (s == "both") {
        return classify::FaceLabel::both;
    }
    throw SchemaError(ctx + ": unknown face label '" + s + "'");
}

}  // namespace

std::string report_to_json(const DiagnosisReport& report) {
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["eyes"] = ordered_json::array();
    for (const auto& eye : report.eyes) {
        ordered_json je;
        je["side"] = to_string(eye.side);
        je["mrd1_px"] = eye.measurements.mrd1_px;
        je["mrd1_mm"] = eye.measurements.mrd1_mm;
        je["iris_ratio_pct"] = eye.measurements.iris_ratio_pct;
        je["clr"] = point_to_json(eye.measurements.clr);
        je["clr_found"] = eye.measurements.clr_found;
        je["mm_per_px"] = eye.measurements.mm_per_px;
        if (eye.p_deep) {
            je["p_deep"] = *eye.p_deep;
        }
        if (eye.prediction) {
            je["prediction"] = label_to_string(*eye.prediction);
        }
        if (eye.decision_path) {
            je["decision_path"] = *eye.decision_path;
        }
        j["eyes"].push_back(std::move(je));
    }
    if (report.face) {
        j["face"] = classify::to_string(*report.face);
    }
    ordered_json prov;
    ordered_json inputs;
    for (const auto& [name, hash] : report.provenance.inputs) {
        inputs[name] = hash;
    }
    prov["inputs"] = std::move(inputs);
    if (!report.provenance.model.empty()) {
        prov["model"] = report.provenance.model;
    }
    ordered_json params;
    for (const auto& [name, value] : report.provenance.parameters) {
        params[name] = value;
    }
    prov["parameters"] = std::move(params);
    j["provenance"] = std::move(prov);
    return j.dump(2) + "\n";
}

DiagnosisReport report_from_json(const std::string& text) {
    const ordered_json j = parse_json(text, "report");
    if (!j.is_object() || !j.contains("schema_version") ||
        j["schema_version"].get<int>() != kReportSchemaVersion) {
        throw SchemaError("report: missing or unsupported schema_version");
    }
    if (!j.contains("eyes") || !j["eyes"].is_array()) {
        throw SchemaError("report: missing eyes array");
    }
    DiagnosisReport out;
    for (const auto& je : j["eyes"]) {
        EyeReport eye;
        eye.side = clinical::eye_side_from_string(je.at("side").get<std::string>());
        eye.measurements.mrd1_px = require_finite_number(je.at("mrd1_px"), "report mrd1_px");
        eye.measurements.mrd1_mm = require_finite_number(je.at("mrd1_mm"), "report mrd1_mm");
        eye.measurements.iris_ratio_pct =
            require_finite_number(je.at("iris_ratio_pct"), "report iris_ratio_pct");
        eye.measurements.clr = parse_point(je.at("clr"), "report clr");
        eye.measurements.clr_found = je.at("clr_found").get<bool>();
        eye.measurements.mm_per_px = require_finite_number(je.at("mm_per_px"), "report mm_per_px");
        if (je.contains("p_deep")) {
            eye.p_deep = require_finite_number(je["p_deep"], "report p_deep");
        }
        if (je.contains("prediction")) {
            eye.prediction = label_from_string(je["prediction"].get<std::string>(), "report");
        }
        if (je.contains("decision_path")) {
            eye.decision_path = je["decision_path"].get<std::string>();
        }
        out.eyes.push_back(std::move(eye));
    }
    if (j.contains("face")) {
        out.face = face_from_string(j["face"].get<std::string>(), "report");
    }
    if (j.contains("provenance")) {
        const auto& prov = j["provenance"];
        if (prov.contains("inputs")) {
            for (const auto& [k, v] : prov["inputs"].items()) {
                out.provenance.inputs.emplace_back(k, v.get<std::string>());
            }
        }
        if (prov.contains("model")) {
            out.provenance.model = prov["model"].get<std::string>();
        }
        if (prov.contains("parameters")) {
            for (const auto& [k, v] : prov["parameters"].items()) {
                out.provenance.parameters.emplace_back(k, v.get<std::string>());
            }
        }
    }
    return out;
}

DiagnosisReport read_report(const std::filesystem::path& path) {
    try {
        return report_from_json(read_whole_file(path));
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

void write_report(const DiagnosisReport& report, const std::filesystem::path& path) {
    write_text_file(report_to_json(report), path);
}

std::string report_summary(const DiagnosisReport& report) {
    std::ostringstream out;
    for (const auto& eye : report.eyes) {
        char line[256];
        std::snprintf(line, sizeof(line),
                      "%-5s  MRD1 %6.2f mm (%7.2f px)  iris ratio %6.2f %%  CLR %s",
                      to_string(eye.side).c_str(), eye.measurements.mrd1_mm,
                      eye.measurements.mrd1_px, eye.measurements.iris_ratio_pct,
                      eye.measurements.clr_found ? "found" : "fallback(center)");
        out << line;
        if (eye.prediction) {
            out << "  -> " << label_to_string(*eye.prediction);
            if (eye.decision_path) {
                out << " [" << *eye.decision_path << "]";
            }
        }
        out << "\n";
    }
    if (report.face) {
        out << "face: " << classify::to_string(*report.face) << "\n";
    }
    return out.str();
}

namespace {

ordered_json tree_to_json(const classify::DecisionTree& tree) {
    ordered_json nodes = ordered_json::array();
    for (const auto& n : tree.nodes) {
        ordered_json jn;
        jn["feature"] = n.feature;
        jn["split"] = n.split;
        jn["left"] = n.left;
        jn["right"] = n.right;
        jn["label"] = n.label;
        jn["prob"] = n.prob;
        nodes.push_back(std::move(jn));
    }
    ordered_json j;
    j["nodes"] = std::move(nodes);
    return j;
}

classify::DecisionTree tree_from_json(const ordered_json& j) {
    classify::DecisionTree tree;
    if (!j.contains("nodes") || !j["nodes"].is_array() || j["nodes"].empty()) {
        throw SchemaError("model: tree needs a non-empty nodes array");
    }
    for (const auto& jn : j["nodes"]) {
        classify::DecisionTree::Node n;
        n.feature = jn.at("feature").get<int>();
        n.split = jn.at("split").get<double>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.label = jn.at("label").get<int>();
        n.prob = jn.at("prob").get<double>();
        tree.nodes.push_back(n);
    }
    const int count = static_cast<int>(tree.nodes.size());
    for (const auto& n : tree.nodes) {
        const bool leaf = n.feature < 0;
        if (!leaf && (n.left < 0 || n.left >= count || n.right < 0 || n.right >= count)) {
            throw SchemaError("model: tree node has out-of-range children");
        }
    }
    return tree;
}

}  // namespace

std::string model_to_json(const classify::Model& model) {
    ordered_json j;
    j["schema_version"] = kModelSchemaVersion;
    j["kind"] = classify::to_string(model.kind);
    j["features"] = model.feature_names;
    j["train_accuracy"] = model.train_accuracy;
    switch (model.kind) {
        case classify::ModelKind::threshold: {
            ordered_json jt;
            jt["feature_index"] = model.threshold.feature_index;
            jt["threshold"] = model.threshold.threshold;
            jt["direction"] = model.threshold.direction == classify::ThresholdDirection::predict_below
                                  ? "below"
                                  : "above";
            jt["objective"] = model.threshold.objective;
            j["threshold"] = std::move(jt);
            break;
        }
        case classify::ModelKind::tree:
            j["tree"] = tree_to_json(model.tree);
            break;
        case classify::ModelKind::logistic: {
            ordered_json jl;
            jl["weights"] = model.logistic.weights;
            jl["bias"] = model.logistic.bias;
            jl["means"] = model.logistic.means;
            jl["stds"] = model.logistic.stds;
            j["logistic"] = std::move(jl);
            break;
        }
    }
    return j.dump(2) + "\n";
}

classify::Model model_from_json(const std::string& text) {
    const ordered_json j = parse_json(text, "model");
    if (!j.is_object() || !j.contains("schema_version") ||
        j["schema_version"].get<int>() != kModelSchemaVersion) {
        throw SchemaError("model: missing or unsupported schema_version");
    }
    classify::Model model;
    model.kind = classify::model_kind_from_string(j.at("kind").get<std::string>());
    if (!j.contains("features") || !j["features"].is_array() || j["features"].empty()) {
        throw SchemaError("model: missing features list");
    }
    for (const auto& f : j["features"]) {
        model.feature_names.push_back(f.get<std::string>());
    }
    if (j.contains("train_accuracy")) {
        model.train_accuracy = j["train_accuracy"].get<double>();
    }
    switch (model.kind) {
        case classify::ModelKind::threshold: {
            const auto& jt = j.at("threshold");
            model.threshold.feature_index = jt.at("feature_index").get<int>();
            model.threshold.threshold = jt.at("threshold").get<double>();
            const std::string dir = jt.at("direction").get<std::string>();
            if (dir != "below" && dir != "above") {
                throw SchemaError("model: threshold direction must be below or above");
            }
            model.threshold.direction = dir == "below"
                                            ? classify::ThresholdDirection::predict_below
                                            : classify::ThresholdDirection::predict_above;
            if (jt.contains("objective")) {
                model.threshold.objective = jt["objective"].get<double>();
            }
            if (model.threshold.feature_index < 0 ||
                model.threshold.feature_index >= static_cast<int>(model.feature_names.size())) {
                throw SchemaError("model: threshold feature_index out of range");
            }
            break;
        }
        case classify::ModelKind::tree:
            model.tree = tree_from_json(j.at("tree"));
            break;
        case classify::ModelKind::logistic: {
            const auto& jl = j.at("logistic");
            model.logistic.weights = jl.at("weights").get<std::vector<double>>();
            model.logistic.bias = jl.at("bias").get<double>();
            model.logistic.means = jl.at("means").get<std::vector<double>>();
            model.logistic.stds = jl.at("stds").get<std::vector<double>>();
            if (model.logistic.weights.size() != model.feature_names.size() ||
                model.logistic.means.size() != model.feature_names.size() ||
                model.logistic.stds.size() != model.feature_names.size()) {
                throw SchemaError("model: logistic parameter sizes disagree with features");
            }
            break;
        }
    }
    return model;
}

void write_model(const classify::Model& model, const std::filesystem::path& path) {
    write_text_file(model_to_json(model), path);
}

classify::Model read_model(const std::filesystem::path& path) {
    try {
        return model_from_json(read_whole_file(path));
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

double parse_double_cell(const std::string& cell, const std::string& ctx) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) {
            throw std::invalid_argument("trailing junk");
        }
        return v;
    } catch (const std::exception&) {
        throw SchemaError(ctx + ": cannot parse number '" + cell + "'");
    }
}

int parse_label_cell(const std::string& cell, const std::string& ctx) {
    if (cell == "0" || cell == "not_ptosis") {
        return 0;
    }
    if (cell == "1" || cell == "ptosis") {
        return 1;
    }
    throw SchemaError(ctx + ": label must be 0/1 or ptosis/not_ptosis, got '" + cell + "'");
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

FeatureTable read_feature_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) {
        throw SchemaError(path.string() + ":1: empty CSV");
    }
    const std::vector<std::string> header = split_csv_line(lines[0]);
    std::size_t col = 0;
    const bool has_id = !header.empty() && header[0] == "id";
    if (has_id) {
        col = 1;
    }
    const std::vector<std::string> expected = {"p_deep", "mrd1_mm", "iris_ratio_pct"};
    for (const auto& name : expected) {
        if (col >= header.size() || header[col] != name) {
            throw SchemaError(path.string() +
                              ":1: expected header [id,]p_deep,mrd1_mm,iris_ratio_pct[,label]");
        }
        ++col;
    }
    bool has_label = false;
    if (col < header.size()) {
        if (header[col] != "label" || col + 1 != header.size()) {
            throw SchemaError(path.string() +
                              ":1: expected header [id,]p_deep,mrd1_mm,iris_ratio_pct[,label]");
        }
        has_label = true;
    }

    FeatureTable table;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) {
            continue;
        }
        const std::string ctx = path.string() + ":" + std::to_string(li + 1);
        const std::vector<std::string> cells = split_csv_line(lines[li]);
        const std::size_t expected_cells = (has_id ? 1 : 0) + 3 + (has_label ? 1 : 0);
        if (cells.size() != expected_cells) {
            throw SchemaError(ctx + ": expected " + std::to_string(expected_cells) + " cells, got " +
                              std::to_string(cells.size()));
        }
        std::size_t c = 0;
        table.ids.push_back(has_id ? cells[c++] : std::string());
        classify::FeatureRow row;
        const std::string& pd = cells[c++];
        row.p_deep = pd.empty() ? std::numeric_limits<double>::quiet_NaN()
                                : parse_double_cell(pd, ctx + " p_deep");
        row.mrd1_mm = parse_double_cell(cells[c++], ctx + " mrd1_mm");
        row.iris_ratio_pct = parse_double_cell(cells[c++], ctx + " iris_ratio_pct");
        table.rows.push_back(row);
        if (has_label) {
            table.labels.push_back(parse_label_cell(cells[c++], ctx));
        } else {
            table.labels.push_back(std::nullopt);
        }
    }
    if (table.rows.empty()) {
        throw SchemaError(path.string() + ": no data rows");
    }
    return table;
}

void write_feature_csv(const FeatureTable& table, const std::filesystem::path& path) {
    std::ostringstream out;
    bool any_id = false;
    for (const auto& id : table.ids) {
        any_id = any_id || !id.empty();
    }
    bool any_label = false;
    for (const auto& l : table.labels) {
        any_label = any_label || l.has_value();
    }
    out << (any_id ? "id," : "") << "p_deep,mrd1_mm,iris_ratio_pct" << (any_label ? ",label" : "")
        << "\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (any_id) {
            out << table.ids[i] << ",";
        }
        const auto& row = table.rows[i];
        if (std::isfinite(row.p_deep)) {
            out << format_double(row.p_deep);
        }
        out << "," << format_double(row.mrd1_mm) << "," << format_double(row.iris_ratio_pct);
        if (any_label) {
            out << "," << (table.labels[i] ? std::to_string(*table.labels[i]) : std::string());
        }
        out << "\n";
    }
    write_text_file(out.str(), path);
}

PredictionTable read_prediction_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) {
        throw SchemaError(path.string() + ":1: empty CSV");
    }
    const std::vector<std::string> header = split_csv_line(lines[0]);
    const bool has_score = header.size() == 3 && header[2] == "score";
    if (!(header.size() == 2 || has_score) || header[0] != "id" || header[1] != "prediction") {
        throw SchemaError(path.string() + ":1: expected header id,prediction[,score]");
    }
    PredictionTable table;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) {
            continue;
        }
        const std::string ctx = path.string() + ":" + std::to_string(li + 1);
        const std::vector<std::string> cells = split_csv_line(lines[li]);
        if (cells.size() != header.size()) {
            throw SchemaError(ctx + ": wrong cell count");
        }
        table.ids.push_back(cells[0]);
        table.predictions.push_back(parse_label_cell(cells[1], ctx));
        if (has_score) {
            table.scores.push_back(parse_double_cell(cells[2], ctx + " score"));
        }
    }
    if (table.ids.empty()) {
        throw SchemaError(path.string() + ": no data rows");
    }
    return table;
}

void write_prediction_csv(const PredictionTable& table, const std::filesystem::path& path) {
    std::ostringstream out;
    const bool has_score = !table.scores.empty();
    out << "id,prediction" << (has_score ? ",score" : "") << "\n";
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
        out << table.ids[i] << "," << table.predictions[i];
        if (has_score) {
            out << "," << format_double(table.scores[i]);
        }
        out << "\n";
    }
    write_text_file(out.str(), path);
}

TruthTable read_truth_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) {
        throw SchemaError(path.string() + ":1: empty CSV");
    }
    if (split_csv_line(lines[0]) !=
        std::vector<std::string>{"id", "mrd1_px", "mrd1_mm", "iris_ratio_pct", "label"}) {
        throw SchemaError(path.string() + ":1: expected header id,mrd1_px,mrd1_mm,iris_ratio_pct,label");
    }
    TruthTable table;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (lines[li].empty()) {
            continue;
        }
        const std::string ctx = path.string() + ":" + std::to_string(li + 1);
        const std::vector<std::string> cells = split_csv_line(lines[li]);
        if (cells.size() != 5) {
            throw SchemaError(ctx + ": expected 5 cells");
        }
        table.ids.push_back(cells[0]);
        table.mrd1_px.push_back(parse_double_cell(cells[1], ctx + " mrd1_px"));
        table.mrd1_mm.push_back(parse_double_cell(cells[2], ctx + " mrd1_mm"));
        table.iris_ratio_pct.push_back(parse_double_cell(cells[3], ctx + " iris_ratio_pct"));
        table.labels.push_back(parse_label_cell(cells[4], ctx));
    }
    if (table.ids.empty()) {
        throw SchemaError(path.string() + ": no data rows");
    }
    return table;
}

void write_suite(const std::vector<synth::RenderResult>& suite,
                 const std::filesystem::path& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) {
        throw IoError("cannot create directory " + directory.string() + ": " + ec.message());
    }
    std::ostringstream truth;
    truth << "id,mrd1_px,mrd1_mm,iris_ratio_pct,label\n";
    for (std::size_t i = 0; i < suite.size(); ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "%04zu", i);
        const std::string image_name = std::string(id) + ".pgm";
        imaging::write_pgm(suite[i].image, directory / image_name);

        LandmarkFile lm;
        lm.image = image_name;
        lm.eyes.push_back(suite[i].truth.landmarks);
        write_landmark_file(lm, directory / (std::string(id) + ".landmarks.json"));

        const auto& t = suite[i].truth;
        truth << id << "," << format_double(t.mrd1_px) << "," << format_double(t.mrd1_mm) << ","
              << format_double(t.iris_ratio_pct) << "," << t.ptosis_label << "\n";
    }
    write_text_file(truth.str(), directory / "truth.csv");
}

std::string fnv1a64_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string() + " for hashing");
    }
    std::uint64_t hash = 0xcbf29ce484222325ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ull;
        }
    }
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

void write_text_file(const std::string& text, const std::filesystem::path& path) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out << text;
        if (!out) {
            throw IoError("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("rename to " + path.string() + " failed: " + ec.message());
    }
}

}  // namespace ptosis::io
