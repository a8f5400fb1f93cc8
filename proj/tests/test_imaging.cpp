#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "ptosis/errors.hpp"
#include "ptosis/filters.hpp"
#include "ptosis/image.hpp"
#include "test_util.hpp"

using namespace ptosis;
using imaging::GrayImage;
using test_util::SplitMix64;

namespace {

GrayImage random_image(SplitMix64& rng, int w, int h) {
    GrayImage img(w, h);
    for (auto& v : img.data) {
        v = static_cast<std::uint8_t>(rng.next_u64() % 256);
    }
    return img;
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("crop_eye_region: zero margin is the exact bounding box") {
    GrayImage img(200, 200);
    for (int y = 0; y < 200; ++y) {
        for (int x = 0; x < 200; ++x) {
            img.at(x, y) = static_cast<std::uint8_t>((x + y) % 256);
        }
    }
    const std::vector<geom::Point2> pts = {{10, 10}, {50, 30}, {30, 20}, {10, 30}, {50, 10}, {25, 15}};
    const auto crop = imaging::crop_eye_region(img, pts, 0.0);
    CHECK(crop.x0 == 10);
    CHECK(crop.y0 == 10);
    CHECK(crop.image.width == 41);
    CHECK(crop.image.height == 21);
    CHECK(crop.image.at(0, 0) == img.at(10, 10));
    CHECK(crop.image.at(40, 20) == img.at(50, 30));
}

TEST_CASE("crop_eye_region: margin expansion and clamping") {
    GrayImage img(200, 200, 9);
    const std::vector<geom::Point2> pts = {{10, 10}, {50, 30}, {30, 20}, {10, 30}, {50, 10}, {25, 15}};
    // box is 40x20, margin 0.5 expands by 20 on every side -> (-10,-10)-(70,50)
    // clamped to (0,0)-(70,50).
    const auto crop = imaging::crop_eye_region(img, pts, 0.5);
    CHECK(crop.x0 == 0);
    CHECK(crop.y0 == 0);
    CHECK(crop.image.width == 71);
    CHECK(crop.image.height == 51);

    // Touching the border: no out-of-bounds access, fully clamped.
    const std::vector<geom::Point2> edge = {{0, 0}, {30, 10}, {15, 5}, {0, 10}, {30, 0}, {10, 3}};
    const auto crop2 = imaging::crop_eye_region(img, edge, 0.5);
    CHECK(crop2.x0 == 0);
    CHECK(crop2.y0 == 0);

    const std::vector<geom::Point2> outside = {{300, 300}, {310, 310}, {305, 300},
                                               {300, 310}, {310, 300}, {305, 305}};
    CHECK_THROWS_AS(imaging::crop_eye_region(img, outside, 0.0), RegionError);
    CHECK_THROWS_AS(imaging::crop_eye_region(img, pts, -0.1), ParameterError);
}

TEST_CASE("mirror_horizontal") {
    GrayImage row(3, 1);
    row.data = {1, 2, 3};
    const GrayImage mirrored = imaging::mirror_horizontal(row);
    CHECK(mirrored.data == std::vector<std::uint8_t>{3, 2, 1});

    SplitMix64 rng(1);
    for (int trial = 0; trial < 10; ++trial) {
        const GrayImage img = random_image(rng, 17, 9);
        CHECK(imaging::mirror_horizontal(imaging::mirror_horizontal(img)) == img);
    }

    GrayImage sym(4, 2);
    sym.data = {5, 8, 8, 5, 1, 3, 3, 1};
    CHECK(imaging::mirror_horizontal(sym) == sym);
}

TEST_CASE("gamma_correct") {
    GrayImage img(256, 1);
    for (int x = 0; x < 256; ++x) {
        img.at(x, 0) = static_cast<std::uint8_t>(x);
    }

    for (double gamma : {0.5, 1.5, 2.2}) {
        const GrayImage out = imaging::gamma_correct(img, gamma);
        CHECK(out.at(0, 0) == 0);
        CHECK(out.at(255, 0) == 255);
        // monotone non-decreasing in input intensity
        for (int x = 1; x < 256; ++x) {
            CHECK(out.at(x, 0) >= out.at(x - 1, 0));
        }
    }

    CHECK(imaging::gamma_correct(img, 1.5).at(128, 0) == 91);
    CHECK(imaging::gamma_correct(img, 1.0) == img);
    CHECK_THROWS_AS(imaging::gamma_correct(img, 0.0), ParameterError);
    CHECK_THROWS_AS(imaging::gamma_correct(img, -1.0), ParameterError);
}

TEST_CASE("hist_equalize") {
    GrayImage constant(8, 4, 77);
    CHECK(imaging::hist_equalize(constant) == constant);

    GrayImage four(2, 2);
    four.data = {0, 0, 255, 255};
    CHECK(imaging::hist_equalize(four).data == std::vector<std::uint8_t>{0, 0, 255, 255});

    SplitMix64 rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const GrayImage img = random_image(rng, 23, 11);
        const GrayImage out = imaging::hist_equalize(img);
        int violations = 0;
        for (std::size_t i = 0; i < img.data.size(); ++i) {
            for (std::size_t j = 0; j < img.data.size(); ++j) {
                if (img.data[i] <= img.data[j] && out.data[i] > out.data[j]) {
                    violations++;
                }
            }
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("canny_edges") {
    const GrayImage flat(32, 32, 100);
    const GrayImage none = imaging::canny_edges(flat, 1.0, 50, 100);
    for (auto v : none.data) {
        CHECK(v == 0);
    }

    // Vertical 50|200 step between columns 31 and 32.
    GrayImage step(64, 32);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 64; ++x) {
            step.at(x, y) = x < 32 ? 50 : 200;
        }
    }
    const GrayImage edges = imaging::canny_edges(step, 1.0, 50, 100);
    int edge_pixels = 0;
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 64; ++x) {
            const auto v = edges.at(x, y);
            CHECK((v == 0 || v == 255));
            if (v == 255) {
                edge_pixels++;
                CHECK(x >= 31);
                CHECK(x <= 32);
            }
        }
    }
    CHECK(edge_pixels >= 32);

    CHECK_THROWS_AS(imaging::canny_edges(flat, 1.0, 100, 50), ParameterError);
}

TEST_CASE("harris_response") {
    const GrayImage flat(32, 32, 128);
    const GrayImage none = imaging::harris_response(flat, 0.04, 1.0);
    CHECK(none.width == 32);
    CHECK(none.height == 32);
    for (auto v : none.data) {
        CHECK(v == 0);
    }

    // White square on black: the four strongest responses sit at its corners.
    GrayImage square(120, 120, 0);
    for (int y = 40; y < 80; ++y) {
        for (int x = 40; x < 80; ++x) {
            square.at(x, y) = 255;
        }
    }
    const GrayImage response = imaging::harris_response(square, 0.04, 1.0);
    std::vector<std::pair<int, std::size_t>> ranked;
    for (std::size_t i = 0; i < response.data.size(); ++i) {
        ranked.push_back({response.data[i], i});
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return a.second < b.second;
    });
    const geom::Point2 corners[4] = {{40, 40}, {79, 40}, {40, 79}, {79, 79}};
    for (int k = 0; k < 4; ++k) {
        const int x = static_cast<int>(ranked[k].second % 120);
        const int y = static_cast<int>(ranked[k].second / 120);
        double best = 1e9;
        for (const auto& c : corners) {
            best = std::min(best, std::hypot(x - c.x, y - c.y));
        }
        CHECK(best <= 2.0);
    }
}

TEST_CASE("difference_of_gaussians") {
    const GrayImage flat(16, 16, 200);
    const GrayImage out = imaging::difference_of_gaussians(flat, 1.0, 2.0);
    CHECK(out.width == 16);
    for (auto v : out.data) {
        CHECK(v == 128);
    }

    GrayImage dot(33, 33, 20);
    dot.at(16, 16) = 255;
    const GrayImage dog = imaging::difference_of_gaussians(dot, 1.0, 2.0);
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < dog.data.size(); ++i) {
        if (dog.data[i] > dog.data[argmax]) {
            argmax = i;
        }
    }
    CHECK(argmax % 33 == 16);
    CHECK(argmax / 33 == 16);

    CHECK_THROWS_AS(imaging::difference_of_gaussians(flat, 2.0, 1.0), ParameterError);
    CHECK_THROWS_AS(imaging::difference_of_gaussians(flat, 0.0, 1.0), ParameterError);
}

TEST_CASE("build_feature_stack") {
    SplitMix64 rng(3);
    const GrayImage img = random_image(rng, 24, 18);
    const imaging::FeatureStack stack = imaging::build_feature_stack(img);
    CHECK(stack.width == 24);
    CHECK(stack.height == 18);
    for (const auto& ch : stack.channels) {
        CHECK(ch.width == 24);
        CHECK(ch.height == 18);
    }
    CHECK(stack.channels[0] == img);

    // Degenerate composition at a gamma fixed point: constant 255 input.
    const GrayImage white(10, 10, 255);
    const imaging::FeatureStack ws = imaging::build_feature_stack(white);
    for (int c = 0; c < 4; ++c) {
        for (auto v : ws.channels[c].data) {
            CHECK(v == 255);
        }
    }
    for (auto v : ws.channels[4].data) {
        CHECK(v == 0);
    }
    for (auto v : ws.channels[5].data) {
        CHECK(v == 0);
    }
    for (auto v : ws.channels[6].data) {
        CHECK(v == 128);
    }

    // Any constant input: gamma channels stay constant, histeq passes through.
    const GrayImage gray(10, 10, 90);
    const imaging::FeatureStack gs = imaging::build_feature_stack(gray);
    for (int c = 1; c <= 2; ++c) {
        for (auto v : gs.channels[c].data) {
            CHECK(v == gs.channels[c].data[0]);
        }
    }
    CHECK(gs.channels[3] == gray);
}

TEST_CASE("pgm round trip and format") {
    SplitMix64 rng(4);
    const GrayImage img = random_image(rng, 31, 17);
    const auto path = temp_file("ptosis_test.pgm");
    imaging::write_pgm(img, path);
    CHECK(imaging::read_pgm(path) == img);

    // Golden header bytes.
    GrayImage tiny(3, 2);
    tiny.data = {10, 20, 30, 40, 50, 60};
    imaging::write_pgm(tiny, path);
    std::ifstream in(path, std::ios::binary);
    std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string expected = std::string("P5\n3 2\n255\n") +
                                 std::string("\x0a\x14\x1e\x28\x32\x3c", 6);
    CHECK(contents == expected);

    std::ofstream bad(path, std::ios::binary | std::ios::trunc);
    bad << "P5\n3 2\n65535\n";
    bad.close();
    CHECK_THROWS_AS(imaging::read_pgm(path), SchemaError);

    std::ofstream trunc(path, std::ios::binary | std::ios::trunc);
    trunc << "P5\n30 20\n255\nxx";
    trunc.close();
    CHECK_THROWS_AS(imaging::read_pgm(path), SchemaError);

    CHECK_THROWS_AS(imaging::read_pgm("/nonexistent/nope.pgm"), IoError);
    std::filesystem::remove(path);
}

TEST_CASE("feature stack files: raw and concatenated pgms") {
    SplitMix64 rng(5);
    const GrayImage img = random_image(rng, 12, 8);
    const imaging::FeatureStack stack = imaging::build_feature_stack(img);

    const auto raw = temp_file("ptosis_stack.fstack");
    imaging::write_feature_stack(stack, raw, imaging::StackFormat::raw);
    const imaging::FeatureStack back = imaging::read_feature_stack(raw);
    CHECK(back.width == stack.width);
    for (int c = 0; c < imaging::FeatureStack::kChannels; ++c) {
        CHECK(back.channels[c] == stack.channels[c]);
    }
    {
        std::ifstream in(raw, std::ios::binary);
        std::string header;
        std::getline(in, header);
        CHECK(header == "FSTACK 12 8 7");
    }

    const auto pgms = temp_file("ptosis_stack.pgms");
    imaging::write_feature_stack(stack, pgms, imaging::StackFormat::pgms);
    const imaging::FeatureStack back2 = imaging::read_feature_stack(pgms);
    for (int c = 0; c < imaging::FeatureStack::kChannels; ++c) {
        CHECK(back2.channels[c] == stack.channels[c]);
    }
    std::filesystem::remove(raw);
    std::filesystem::remove(pgms);
}
