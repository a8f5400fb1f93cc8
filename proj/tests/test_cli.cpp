// End-to-end tests for the command-line surface: exit codes, file formats,
// determinism. Each test shells out to the built binary.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "ptosis/classify.hpp"
#include "ptosis/filters.hpp"
#include "ptosis/formats.hpp"
#include "ptosis/image.hpp"
#include "ptosis/rand.hpp"
#include "ptosis/synth.hpp"

namespace fs = std::filesystem;
using namespace ptosis;

namespace {

const std::string kCli = PTOSIS_CLI_PATH;

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
    const fs::path out = fs::temp_directory_path() / "ptosis_cli_out.txt";
    const std::string cmd = kCli + " " + args + " > " + out.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    res.output = ss.str();
    return res;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Byte-compare two directories (same file names, same contents).
bool directories_identical(const fs::path& a, const fs::path& b) {
    std::map<std::string, std::string> fa;
    std::map<std::string, std::string> fb;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (e.is_regular_file()) {
            fa[fs::relative(e.path(), a).string()] = slurp(e.path());
        }
    }
    for (const auto& e : fs::recursive_directory_iterator(b)) {
        if (e.is_regular_file()) {
            fb[fs::relative(e.path(), b).string()] = slurp(e.path());
        }
    }
    return fa == fb;
}

}  // namespace

TEST_CASE("cli: synth determinism and round trip into measure") {
    const fs::path dir = fresh_dir("ptosis_cli_synth");
    const auto r1 = run("synth --n 8 --seed 7 --out " + (dir / "a").string() + " --sigma-max 4");
    CHECK(r1.exit_code == 0);
    const auto r2 = run("synth --n 8 --seed 7 --out " + (dir / "b").string() + " --sigma-max 4");
    CHECK(r2.exit_code == 0);
    CHECK(directories_identical(dir / "a", dir / "b"));

    const auto r3 =
        run("measure --suite " + (dir / "a").string() + " --out-csv " + (dir / "f.csv").string());
    CHECK(r3.exit_code == 0);
    const io::FeatureTable table = io::read_feature_csv(dir / "f.csv");
    CHECK(table.size() == 8);
    CHECK(table.labels[0].has_value());

    const auto bad = run("synth --n 0 --seed 1 --out " + (dir / "zero").string());
    CHECK(bad.exit_code == 2);
}

TEST_CASE("cli: measure single image matches the suite truth") {
    const fs::path dir = fresh_dir("ptosis_cli_measure");
    REQUIRE(run("synth --n 3 --seed 21 --out " + dir.string() + " --sigma-max 2").exit_code == 0);
    const io::TruthTable truth = io::read_truth_csv(dir / "truth.csv");

    const auto res = run("measure --image " + (dir / "0001.pgm").string() + " --landmarks " +
                         (dir / "0001.landmarks.json").string() + " --out " +
                         (dir / "report.json").string());
    CHECK(res.exit_code == 0);

    const io::DiagnosisReport report = io::read_report(dir / "report.json");
    REQUIRE(report.eyes.size() == 1);
    CHECK(std::abs(report.eyes[0].measurements.mrd1_mm - truth.mrd1_mm[1]) <= 0.2);
    CHECK(std::abs(report.eyes[0].measurements.iris_ratio_pct - truth.iris_ratio_pct[1]) <= 1.0);
    CHECK_FALSE(report.eyes[0].prediction.has_value());

    // Same inputs, same bytes.
    const std::string first = slurp(dir / "report.json");
    REQUIRE(run("measure --image " + (dir / "0001.pgm").string() + " --landmarks " +
                (dir / "0001.landmarks.json").string() + " --out " + (dir / "report2.json").string())
                .exit_code == 0);
    CHECK(first == slurp(dir / "report2.json"));
}

TEST_CASE("cli: --iris-mm rescales millimetre outputs linearly") {
    const fs::path dir = fresh_dir("ptosis_cli_irismm");
    REQUIRE(run("synth --n 1 --seed 3 --out " + dir.string() + " --sigma-max 0 --droop-max 0.3")
                .exit_code == 0);
    const std::string base_args = "measure --image " + (dir / "0000.pgm").string() +
                                  " --landmarks " + (dir / "0000.landmarks.json").string();
    REQUIRE(run(base_args + " --out " + (dir / "r117.json").string()).exit_code == 0);
    REQUIRE(run(base_args + " --iris-mm 12.2 --out " + (dir / "r122.json").string()).exit_code == 0);

    const auto r117 = io::read_report(dir / "r117.json");
    const auto r122 = io::read_report(dir / "r122.json");
    const double scale = 12.2 / 11.7;
    CHECK(r122.eyes[0].measurements.mrd1_mm ==
          doctest::Approx(r117.eyes[0].measurements.mrd1_mm * scale).epsilon(1e-9));
    CHECK(r122.eyes[0].measurements.mm_per_px ==
          doctest::Approx(r117.eyes[0].measurements.mm_per_px * scale).epsilon(1e-9));
    CHECK(r122.eyes[0].measurements.mrd1_px ==
          doctest::Approx(r117.eyes[0].measurements.mrd1_px).epsilon(1e-12));
}

TEST_CASE("cli: schema violations exit 2") {
    const fs::path dir = fresh_dir("ptosis_cli_schema");
    REQUIRE(run("synth --n 1 --seed 9 --out " + dir.string()).exit_code == 0);

    // Landmark file with a truncated iris array.
    nlohmann::json j = nlohmann::json::parse(slurp(dir / "0000.landmarks.json"));
    j["eyes"][0]["iris"].erase(4);
    std::ofstream(dir / "bad.json") << j.dump();
    const auto res = run("measure --image " + (dir / "0000.pgm").string() + " --landmarks " +
                         (dir / "bad.json").string());
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("iris") != std::string::npos);

    const auto missing = run("measure --image " + (dir / "0000.pgm").string() +
                             " --landmarks /nonexistent.json");
    CHECK(missing.exit_code == 4);

    const auto unknown_flag = run("measure --bogus-flag 1");
    CHECK(unknown_flag.exit_code == 2);
}

TEST_CASE("cli: measurement failure exits 3 naming the stage") {
    const fs::path dir = fresh_dir("ptosis_cli_fail");
    REQUIRE(run("synth --n 1 --seed 11 --out " + dir.string()).exit_code == 0);

    // Drag the iris landmarks far outside the crop: CLR detection must fail.
    nlohmann::json j = nlohmann::json::parse(slurp(dir / "0000.landmarks.json"));
    for (auto& p : j["eyes"][0]["iris"]) {
        p[0] = p[0].get<double>() + 5000.0;
        p[1] = p[1].get<double>() + 5000.0;
    }
    std::ofstream(dir / "far.json") << j.dump();
    const auto res = run("measure --image " + (dir / "0000.pgm").string() + " --landmarks " +
                         (dir / "far.json").string());
    CHECK(res.exit_code == 3);
    CHECK(res.output.find("clr-detection") != std::string::npos);
}

namespace {

void write_training_csv(const fs::path& path, bool separable) {
    std::ofstream out(path);
    out << "p_deep,mrd1_mm,iris_ratio_pct,label\n";
    ptosis::SplitMix64 rng(17);
    for (int i = 0; i < 40; ++i) {
        const int label = i % 2;
        double mrd1;
        double ratio;
        if (separable) {
            mrd1 = label == 1 ? rng.next_uniform(-1.0, 1.5) : rng.next_uniform(2.5, 5.0);
            ratio = label == 1 ? rng.next_uniform(30, 70) : rng.next_uniform(75, 100);
        } else {
            mrd1 = rng.next_uniform(-1, 5);
            ratio = rng.next_uniform(30, 100);
        }
        const double p_deep = label == 1 ? rng.next_uniform(0.4, 1.0) : rng.next_uniform(0.0, 0.6);
        out << p_deep << "," << mrd1 << "," << ratio << "," << label << "\n";
    }
}

}  // namespace

TEST_CASE("cli: fit, classify, and model round trips") {
    const fs::path dir = fresh_dir("ptosis_cli_fit");
    write_training_csv(dir / "train.csv", true);

    const auto fit = run("fit --training " + (dir / "train.csv").string() +
                         " --model tree --out " + (dir / "tree.json").string());
    CHECK(fit.exit_code == 0);
    CHECK(fit.output.find("train_accuracy 1") != std::string::npos);

    // CLI predictions equal in-process predictions.
    const auto cls = run("classify --features " + (dir / "train.csv").string() + " --model " +
                         (dir / "tree.json").string() + " --no-fusion --out " +
                         (dir / "preds.csv").string());
    CHECK(cls.exit_code == 0);
    const classify::Model model = io::read_model(dir / "tree.json");
    const io::FeatureTable table = io::read_feature_csv(dir / "train.csv");
    const io::PredictionTable preds = io::read_prediction_csv(dir / "preds.csv");
    REQUIRE(preds.predictions.size() == table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
        CHECK(preds.predictions[i] == classify::predict_row(model, table.rows[i]));
    }

    // Logistic and thresholds fit cleanly too.
    CHECK(run("fit --training " + (dir / "train.csv").string() + " --model logistic --out " +
              (dir / "logit.json").string())
              .exit_code == 0);
    CHECK(run("fit --training " + (dir / "train.csv").string() + " --model threshold-mrd1 --out " +
              (dir / "thr.json").string())
              .exit_code == 0);

    // Malformed header -> 2; single-class data -> 3.
    std::ofstream(dir / "bad.csv") << "a,b,c\n1,2,3\n";
    CHECK(run("fit --training " + (dir / "bad.csv").string() + " --model tree --out " +
              (dir / "x.json").string())
              .exit_code == 2);
    std::ofstream(dir / "single.csv") << "p_deep,mrd1_mm,iris_ratio_pct,label\n0.5,1,50,1\n0.6,2,60,1\n";
    CHECK(run("fit --training " + (dir / "single.csv").string() + " --model tree --out " +
              (dir / "y.json").string())
              .exit_code == 3);
}

TEST_CASE("cli: classify a report with fusion thresholds") {
    const fs::path dir = fresh_dir("ptosis_cli_classify");
    REQUIRE(run("synth --n 2 --seed 13 --out " + dir.string() + " --sigma-max 2").exit_code == 0);
    write_training_csv(dir / "train.csv", true);
    REQUIRE(run("fit --training " + (dir / "train.csv").string() + " --model tree --out " +
                (dir / "tree.json").string())
                .exit_code == 0);
    REQUIRE(run("measure --image " + (dir / "0000.pgm").string() + " --landmarks " +
                (dir / "0000.landmarks.json").string() + " --out " + (dir / "report.json").string())
                .exit_code == 0);

    // Deep path below t_lo.
    const auto low = run("classify --report " + (dir / "report.json").string() + " --model " +
                         (dir / "tree.json").string() + " --p-deep 0.2 --out " +
                         (dir / "low.json").string());
    CHECK(low.exit_code == 0);
    const auto low_report = io::read_report(dir / "low.json");
    CHECK(low_report.eyes[0].prediction == classify::kNotPtosis);
    CHECK(low_report.eyes[0].decision_path == "deep");

    // Deep path above t_hi.
    REQUIRE(run("classify --report " + (dir / "report.json").string() + " --model " +
                (dir / "tree.json").string() + " --p-deep 0.9 --out " + (dir / "high.json").string())
                .exit_code == 0);
    const auto high_report = io::read_report(dir / "high.json");
    CHECK(high_report.eyes[0].prediction == classify::kPtosis);
    CHECK(high_report.eyes[0].decision_path == "deep");

    // No p_deep: clinical-only path through the model.
    REQUIRE(run("classify --report " + (dir / "report.json").string() + " --model " +
                (dir / "tree.json").string() + " --out " + (dir / "clinical.json").string())
                .exit_code == 0);
    const auto clinical_report = io::read_report(dir / "clinical.json");
    CHECK(clinical_report.eyes[0].decision_path == "clinical-only");

    // Byte-identical on repetition.
    REQUIRE(run("classify --report " + (dir / "report.json").string() + " --model " +
                (dir / "tree.json").string() + " --p-deep 0.2 --out " + (dir / "low2.json").string())
                .exit_code == 0);
    CHECK(slurp(dir / "low.json") == slurp(dir / "low2.json"));

    // A custom --fusion band moves p=0.2 into the deferred region.
    REQUIRE(run("classify --report " + (dir / "report.json").string() + " --model " +
                (dir / "tree.json").string() + " --p-deep 0.2 --fusion 0.1 0.9 --out " +
                (dir / "band.json").string())
                .exit_code == 0);
    CHECK(io::read_report(dir / "band.json").eyes[0].decision_path == "deferred");
}

TEST_CASE("cli: two-eye report aggregates the face label") {
    const fs::path dir = fresh_dir("ptosis_cli_face");
    write_training_csv(dir / "train.csv", true);
    REQUIRE(run("fit --training " + (dir / "train.csv").string() + " --model tree --out " +
                (dir / "tree.json").string())
                .exit_code == 0);

    // Hand-built measurements-only report covering both sides.
    io::DiagnosisReport report;
    for (const auto side : {clinical::EyeSide::left, clinical::EyeSide::right}) {
        io::EyeReport eye;
        eye.side = side;
        eye.measurements.mrd1_px = 40.0;
        eye.measurements.mrd1_mm = side == clinical::EyeSide::left ? 4.1 : 0.4;
        eye.measurements.iris_ratio_pct = side == clinical::EyeSide::left ? 95.0 : 46.0;
        eye.measurements.clr = {100.0, 120.0};
        eye.measurements.clr_found = true;
        eye.measurements.mm_per_px = 0.1;
        report.eyes.push_back(eye);
    }
    io::write_report(report, dir / "two_eyes.json");

    std::ofstream(dir / "p_deep.json") << "{\"left\": 0.10, \"right\": 0.95}\n";
    const auto res = run("classify --report " + (dir / "two_eyes.json").string() + " --model " +
                         (dir / "tree.json").string() + " --p-deep " +
                         (dir / "p_deep.json").string() + " --out " + (dir / "out.json").string());
    CHECK(res.exit_code == 0);

    const auto out = io::read_report(dir / "out.json");
    REQUIRE(out.eyes.size() == 2);
    REQUIRE(out.face.has_value());
    CHECK(*out.face == classify::FaceLabel::right_only);
    int left = -1;
    int right = -1;
    for (const auto& eye : out.eyes) {
        (eye.side == clinical::EyeSide::left ? left : right) = *eye.prediction;
        CHECK(eye.decision_path == "deep");
    }
    CHECK(classify::aggregate_face(left, right) == *out.face);
}

TEST_CASE("cli: eval prints metrics and handles missing scores") {
    const fs::path dir = fresh_dir("ptosis_cli_eval");
    std::ofstream(dir / "truth.csv") << "id,mrd1_px,mrd1_mm,iris_ratio_pct,label\n"
                                     << "a,1,0.1,50,1\nb,2,0.2,60,0\nc,3,0.3,70,1\nd,4,0.4,80,0\n";
    std::ofstream(dir / "perfect.csv") << "id,prediction\na,1\nb,0\nc,1\nd,0\n";

    const auto res = run("eval --pred " + (dir / "perfect.csv").string() + " --truth " +
                         (dir / "truth.csv").string() + " --csv " + (dir / "table.csv").string());
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("100.0") != std::string::npos);
    CHECK(res.output.find("n/a") != std::string::npos);  // no score column -> no AUC
    CHECK(slurp(dir / "table.csv").find("perfect,100.0000") != std::string::npos);

    std::ofstream(dir / "mismatch.csv") << "id,prediction\nzz,1\n";
    CHECK(run("eval --pred " + (dir / "mismatch.csv").string() + " --truth " +
              (dir / "truth.csv").string())
              .exit_code == 2);
}

TEST_CASE("cli: feature stack export honors the right-eye flip") {
    const fs::path dir = fresh_dir("ptosis_cli_features");
    // Item 1 of a suite is a right eye (sides alternate).
    REQUIRE(run("synth --n 2 --seed 31 --out " + dir.string() + " --sigma-max 0").exit_code == 0);

    const auto left = run("features --image " + (dir / "0000.pgm").string() + " --landmarks " +
                          (dir / "0000.landmarks.json").string() + " --out " +
                          (dir / "left.fstack").string());
    CHECK(left.exit_code == 0);
    const auto right = run("features --image " + (dir / "0001.pgm").string() + " --landmarks " +
                           (dir / "0001.landmarks.json").string() + " --out " +
                           (dir / "right.fstack").string());
    CHECK(right.exit_code == 0);

    const imaging::FeatureStack left_stack = imaging::read_feature_stack(dir / "left.fstack");
    const imaging::FeatureStack right_stack = imaging::read_feature_stack(dir / "right.fstack");

    // Rebuild the crops in-process and compare channel 0.
    for (int item = 0; item < 2; ++item) {
        const std::string id = item == 0 ? "0000" : "0001";
        const io::LandmarkFile lm = io::read_landmark_file(dir / (id + ".landmarks.json"));
        const imaging::GrayImage img = imaging::read_pgm(dir / (id + ".pgm"));
        std::vector<geom::Point2> anchors;
        for (int idx : {0, 2, 4, 6, 8, 12}) {
            anchors.push_back(lm.eyes[0].contour[idx]);
        }
        imaging::CropResult crop = imaging::crop_eye_region(img, anchors, 0.5);
        if (lm.eyes[0].side == clinical::EyeSide::right) {
            crop.image = imaging::mirror_horizontal(crop.image);
        }
        const auto& stack = item == 0 ? left_stack : right_stack;
        CHECK(stack.channels[0] == crop.image);
    }
}
