#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "talseg/kinematics.hpp"
#include "talseg/synth.hpp"

using namespace talseg;

namespace {

constexpr double kTol = 1e-9;

Keypoint kp(double x, double y, double conf = 1.0) { return Keypoint{x, y, conf}; }

KeypointFrame frame_from_pose(double head, double left, double right) {
    KeypointFrame f;
    f.video_id = "v";
    f.width = 512;
    f.height = 512;
    f.normalized = true;
    f.keypoints = inverse_pose(head, left, right);
    return f;
}

}  // namespace

TEST_CASE("head angle of a neutral frontal pose is zero") {
    const auto a = head_angle(kp(0.45, 0.40), kp(0.55, 0.40), kp(0.50, 0.45), 1.0, 0.5);
    REQUIRE(a.has_value());
    CHECK_THAT(*a, Catch::Matchers::WithinAbs(0.0, kTol));
}

TEST_CASE("head angle follows lateral nose displacement") {
    // v = nose - eye midpoint = (0.05, 0.05) -> 45 degrees off vertical
    const auto a = head_angle(kp(0.45, 0.40), kp(0.55, 0.40), kp(0.55, 0.45), 1.0, 0.5);
    REQUIRE(a.has_value());
    CHECK_THAT(*a, Catch::Matchers::WithinAbs(45.0, kTol));
}

TEST_CASE("head angle is undefined below the confidence threshold") {
    CHECK_FALSE(head_angle(kp(0.45, 0.40), kp(0.55, 0.40), kp(0.50, 0.45, 0.2), 1.0, 0.5));
    CHECK_FALSE(head_angle(kp(0.45, 0.40, 0.4), kp(0.55, 0.40), kp(0.50, 0.45), 1.0, 0.5));
}

TEST_CASE("head angle is undefined for a zero direction vector") {
    CHECK_FALSE(head_angle(kp(0.5, 0.4), kp(0.5, 0.4), kp(0.5, 0.4), 1.0, 0.5));
}

TEST_CASE("hand angle: horizontal forearm is zero, raised forearm is 90") {
    const auto flat = hand_angle(kp(0.6, 0.6), kp(0.8, 0.6), 1.0, 0.5);
    REQUIRE(flat.has_value());
    CHECK_THAT(*flat, Catch::Matchers::WithinAbs(0.0, kTol));

    const auto up = hand_angle(kp(0.6, 0.6), kp(0.6, 0.4), 1.0, 0.5);
    REQUIRE(up.has_value());
    CHECK_THAT(*up, Catch::Matchers::WithinAbs(90.0, kTol));

    const auto down = hand_angle(kp(0.6, 0.4), kp(0.6, 0.6), 1.0, 0.5);
    REQUIRE(down.has_value());
    CHECK_THAT(*down, Catch::Matchers::WithinAbs(-90.0, kTol));
}

TEST_CASE("hand angle is undefined on low confidence or a degenerate forearm") {
    CHECK_FALSE(hand_angle(kp(0.6, 0.6), kp(0.8, 0.6, 0.0), 1.0, 0.5));
    CHECK_FALSE(hand_angle(kp(0.6, 0.6), kp(0.6, 0.6), 1.0, 0.5));
}

TEST_CASE("angle ranges hold on random inputs") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const auto h = head_angle(kp(u(rng), u(rng)), kp(u(rng), u(rng)), kp(u(rng), u(rng)),
                                  1.0, 0.0);
        if (h) {
            CHECK(*h >= 0.0);
            CHECK(*h <= 180.0);
        }
        const auto e = hand_angle(kp(u(rng), u(rng)), kp(u(rng), u(rng)), 1.0, 0.0);
        if (e) {
            CHECK(*e >= -90.0);
            CHECK(*e <= 90.0);
        }
    }
}

TEST_CASE("aspect correction measures angles in the source raster plane") {
    // 1280x720 raster: eyes at (600,360),(680,360), nose at (680,400) form a
    // 45-degree pixel-space deviation.
    KeypointFrame f;
    f.video_id = "v";
    f.width = 1280;
    f.height = 720;
    f.normalized = true;
    f.keypoints["left_eye"] = kp(600.0 / 1280, 360.0 / 720);
    f.keypoints["right_eye"] = kp(680.0 / 1280, 360.0 / 720);
    f.keypoints["nose"] = kp(680.0 / 1280, 400.0 / 720);

    const AngleSample corrected = frame_angles(f, KinematicsConfig{0.5, true});
    REQUIRE(corrected.head_angle.has_value());
    CHECK_THAT(*corrected.head_angle, Catch::Matchers::WithinAbs(45.0, 1e-9));

    const AngleSample raw = frame_angles(f, KinematicsConfig{0.5, false});
    REQUIRE(raw.head_angle.has_value());
    CHECK(std::abs(*raw.head_angle - 45.0) > 5.0);
}

TEST_CASE("angle_series is empty on an empty trace and total on full confidence") {
    CHECK(angle_series(VideoTrace{"v", 30.0, {}}).empty());

    VideoTrace t{"v", 30.0, {frame_from_pose(10.0, 20.0, -30.0)}};
    const auto series = angle_series(t);
    REQUIRE(series.size() == 1);
    CHECK(series[0].head_angle.has_value());
    CHECK(series[0].left_hand_angle.has_value());
    CHECK(series[0].right_hand_angle.has_value());
}

TEST_CASE("angle_series recovers a scripted 100-frame trace") {
    VideoTrace t{"v", 30.0, {}};
    for (int i = 0; i < 100; ++i) {
        const double head = static_cast<double>(i % 61);
        const double left = static_cast<double>(i % 91) - 45.0;
        const double right = 45.0 - static_cast<double>(i % 46);
        KeypointFrame f = frame_from_pose(head, left, right);
        f.frame = i;
        f.t = i / 30.0;
        t.frames.push_back(std::move(f));
    }
    const auto series = angle_series(t);
    REQUIRE(series.size() == 100);
    for (int i = 0; i < 100; ++i) {
        REQUIRE(series[static_cast<std::size_t>(i)].head_angle.has_value());
        CHECK_THAT(*series[static_cast<std::size_t>(i)].head_angle,
                   Catch::Matchers::WithinAbs(static_cast<double>(i % 61), kTol));
        CHECK_THAT(*series[static_cast<std::size_t>(i)].left_hand_angle,
                   Catch::Matchers::WithinAbs(static_cast<double>(i % 91) - 45.0, kTol));
        CHECK_THAT(*series[static_cast<std::size_t>(i)].right_hand_angle,
                   Catch::Matchers::WithinAbs(45.0 - static_cast<double>(i % 46), kTol));
    }
}

TEST_CASE("defined angles are translation and scale invariant") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> angle_head(0.0, 180.0);
    std::uniform_real_distribution<double> angle_hand(-90.0, 90.0);
    std::uniform_real_distribution<double> shift(-0.2, 0.2);
    std::uniform_real_distribution<double> scale(0.5, 2.0);

    for (int i = 0; i < 300; ++i) {
        const KeypointMap pose = inverse_pose(angle_head(rng), angle_hand(rng), angle_hand(rng));
        const double dx = shift(rng), dy = shift(rng), s = scale(rng);

        auto translated = pose;
        for (auto& [name, p] : translated) {
            p.x += dx;
            p.y += dy;
        }
        auto scaled = pose;
        for (auto& [name, p] : scaled) {
            p.x = 0.5 + s * (p.x - 0.5);
            p.y = 0.5 + s * (p.y - 0.5);
        }

        for (const auto& variant : {translated, scaled}) {
            const auto h0 = head_angle(pose.at("left_eye"), pose.at("right_eye"),
                                       pose.at("nose"), 1.0, 0.5);
            const auto h1 = head_angle(variant.at("left_eye"), variant.at("right_eye"),
                                       variant.at("nose"), 1.0, 0.5);
            REQUIRE(h0.has_value());
            REQUIRE(h1.has_value());
            CHECK_THAT(*h1, Catch::Matchers::WithinAbs(*h0, kTol));

            const auto l0 =
                hand_angle(pose.at("left_elbow"), pose.at("left_wrist"), 1.0, 0.5);
            const auto l1 =
                hand_angle(variant.at("left_elbow"), variant.at("left_wrist"), 1.0, 0.5);
            REQUIRE(l0.has_value());
            REQUIRE(l1.has_value());
            CHECK_THAT(*l1, Catch::Matchers::WithinAbs(*l0, kTol));
        }
    }
}

TEST_CASE("mirroring x swaps hand angles and preserves the head angle") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> angle_head(0.0, 180.0);
    std::uniform_real_distribution<double> angle_hand(-90.0, 90.0);

    for (int i = 0; i < 300; ++i) {
        const KeypointMap pose = inverse_pose(angle_head(rng), angle_hand(rng), angle_hand(rng));
        KeypointMap mirrored;
        auto swap_side = [](const std::string& name) {
            if (name.rfind("left_", 0) == 0) return "right_" + name.substr(5);
            if (name.rfind("right_", 0) == 0) return "left_" + name.substr(6);
            return name;
        };
        for (const auto& [name, p] : pose)
            mirrored[swap_side(name)] = Keypoint{1.0 - p.x, p.y, p.conf};

        const auto h0 =
            head_angle(pose.at("left_eye"), pose.at("right_eye"), pose.at("nose"), 1.0, 0.5);
        const auto h1 = head_angle(mirrored.at("left_eye"), mirrored.at("right_eye"),
                                   mirrored.at("nose"), 1.0, 0.5);
        REQUIRE(h0.has_value());
        REQUIRE(h1.has_value());
        CHECK_THAT(*h1, Catch::Matchers::WithinAbs(*h0, kTol));

        const auto l0 = hand_angle(pose.at("left_elbow"), pose.at("left_wrist"), 1.0, 0.5);
        const auto r1 =
            hand_angle(mirrored.at("right_elbow"), mirrored.at("right_wrist"), 1.0, 0.5);
        REQUIRE(l0.has_value());
        REQUIRE(r1.has_value());
        CHECK_THAT(*r1, Catch::Matchers::WithinAbs(*l0, kTol));

        const auto r0 = hand_angle(pose.at("right_elbow"), pose.at("right_wrist"), 1.0, 0.5);
        const auto l1 =
            hand_angle(mirrored.at("left_elbow"), mirrored.at("left_wrist"), 1.0, 0.5);
        REQUIRE(r0.has_value());
        REQUIRE(l1.has_value());
        CHECK_THAT(*l1, Catch::Matchers::WithinAbs(*r0, kTol));
    }
}

TEST_CASE("head angle grows with lateral nose displacement") {
    const Keypoint le = kp(0.45, 0.40), re = kp(0.55, 0.40);
    double last = -1.0;
    for (int i = 0; i <= 20; ++i) {
        const double lateral = 0.005 * i;
        const auto a = head_angle(le, re, kp(0.5 + lateral, 0.45), 1.0, 0.5);
        REQUIRE(a.has_value());
        CHECK(*a >= last);
        last = *a;
    }
}

TEST_CASE("a missing required joint acts as confidence zero") {
    KeypointFrame f = frame_from_pose(30.0, 0.0, 0.0);
    f.keypoints.erase("nose");
    const AngleSample s = frame_angles(f, KinematicsConfig{});
    CHECK_FALSE(s.head_angle.has_value());
    CHECK(s.left_hand_angle.has_value());
}
