#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "talseg/trace.hpp"

using namespace talseg;

namespace {

std::string record(const std::string& video, int frame, int w = 1280, int h = 720,
                   const std::string& keypoints = R"({"nose": [640, 360, 1.0]})",
                   const std::string& extra = "") {
    std::ostringstream os;
    os << R"({"video_id": ")" << video << R"(", "frame": )" << frame << R"(, "width": )" << w
       << R"(, "height": )" << h << R"(, "keypoints": )" << keypoints << extra << "}";
    return os.str();
}

VideoTrace random_trace(std::mt19937& rng, const std::string& video_id) {
    std::uniform_real_distribution<double> coord(-50.0, 1400.0);
    std::uniform_real_distribution<double> conf(0.0, 1.0);
    std::uniform_int_distribution<int> nkp(0, 8);
    VideoTrace trace{video_id, 30.0, {}};
    std::int64_t frame = 0;
    const int n = std::uniform_int_distribution<int>(0, 40)(rng);
    for (int i = 0; i < n; ++i) {
        frame += std::uniform_int_distribution<int>(1, 3)(rng);
        KeypointFrame f;
        f.video_id = video_id;
        f.frame = frame;
        f.t = static_cast<double>(frame) / trace.fps;
        f.width = 1280;
        f.height = 720;
        const int k = nkp(rng);
        for (int j = 0; j < k; ++j) {
            f.keypoints[std::string(kRequiredKeypoints[static_cast<std::size_t>(j)])] =
                Keypoint{coord(rng), coord(rng), conf(rng)};
        }
        trace.frames.push_back(std::move(f));
    }
    return trace;
}

bool frames_equal(const KeypointFrame& a, const KeypointFrame& b) {
    if (a.video_id != b.video_id || a.frame != b.frame || a.t != b.t || a.width != b.width ||
        a.height != b.height || a.normalized != b.normalized)
        return false;
    if (a.keypoints.size() != b.keypoints.size()) return false;
    for (const auto& [name, kp] : a.keypoints) {
        auto it = b.keypoints.find(name);
        if (it == b.keypoints.end()) return false;
        if (kp.x != it->second.x || kp.y != it->second.y || kp.conf != it->second.conf)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("empty input yields an empty trace") {
    std::istringstream in("");
    const VideoTrace t = parse_trace(in, 30.0);
    CHECK(t.frames.empty());
    CHECK(t.fps == 30.0);
}

TEST_CASE("missing t derives as frame/fps exactly") {
    std::istringstream in(record("a", 0) + "\n" + record("a", 1) + "\n" + record("a", 2) + "\n");
    const VideoTrace t = parse_trace(in, 30.0);
    REQUIRE(t.frames.size() == 3);
    CHECK(t.frames[0].t == 0.0);
    CHECK(t.frames[1].t == 1.0 / 30.0);
    CHECK(t.frames[2].t == 2.0 / 30.0);
}

TEST_CASE("explicit t is preserved") {
    std::istringstream in(record("a", 0, 1280, 720, R"({})", R"(, "t": 12.5)") + "\n");
    const VideoTrace t = parse_trace(in, 30.0);
    REQUIRE(t.frames.size() == 1);
    CHECK(t.frames[0].t == 12.5);
}

TEST_CASE("duplicate frame index is rejected with the frame named") {
    std::istringstream in(record("a", 5) + "\n" + record("a", 5) + "\n");
    CHECK_THROWS_WITH(parse_trace(in, 30.0),
                      Catch::Matchers::ContainsSubstring("duplicate frame index 5"));
}

TEST_CASE("non-monotone frame index is rejected") {
    std::istringstream in(record("a", 5) + "\n" + record("a", 3) + "\n");
    CHECK_THROWS_WITH(parse_trace(in, 30.0),
                      Catch::Matchers::ContainsSubstring("non-monotone frame index 3"));
}

TEST_CASE("non-positive fps is rejected before parsing") {
    std::istringstream in(record("a", 0));
    CHECK_THROWS_AS(parse_trace(in, 0.0), ConfigError);
    std::istringstream in2(record("a", 0));
    CHECK_THROWS_AS(parse_trace(in2, -5.0), ConfigError);
}

TEST_CASE("malformed line reports its line number") {
    std::ostringstream os;
    for (int i = 0; i < 6; ++i) os << record("a", i) << "\n";
    os << "{not json\n";
    std::istringstream in(os.str());
    try {
        parse_trace(in, 30.0);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 7);
    }
}

TEST_CASE("record validation") {
    auto expect_throw = [](const std::string& line) {
        std::istringstream in(line + "\n");
        CHECK_THROWS_AS(parse_trace(in, 30.0), ParseError);
    };
    SECTION("unknown field") {
        expect_throw(record("a", 0, 1280, 720, R"({})", R"(, "bogus": 1)"));
    }
    SECTION("missing required field") {
        expect_throw(R"({"video_id": "a", "frame": 0, "width": 1280, "height": 720})");
    }
    SECTION("non-positive dimensions") {
        expect_throw(record("a", 0, 0, 720));
        expect_throw(record("a", 0, 1280, -1));
    }
    SECTION("confidence outside [0,1]") {
        expect_throw(record("a", 0, 1280, 720, R"({"nose": [1, 1, 1.5]})"));
        expect_throw(record("a", 0, 1280, 720, R"({"nose": [1, 1, -0.1]})"));
    }
    SECTION("keypoint arity") {
        expect_throw(record("a", 0, 1280, 720, R"({"nose": [1, 1]})"));
    }
    SECTION("negative frame") { expect_throw(record("a", -1)); }
    SECTION("negative t") {
        expect_throw(record("a", 0, 1280, 720, R"({})", R"(, "t": -0.5)"));
    }
}

TEST_CASE("videos must be contiguous") {
    std::istringstream in(record("a", 0) + "\n" + record("b", 0) + "\n" + record("a", 1) + "\n");
    CHECK_THROWS_WITH(parse_traces(in, 30.0),
                      Catch::Matchers::ContainsSubstring("not contiguous"));
}

TEST_CASE("parse_trace rejects multi-video input, parse_traces accepts it") {
    const std::string data = record("a", 0) + "\n" + record("b", 0) + "\n";
    std::istringstream in1(data);
    CHECK_THROWS_AS(parse_trace(in1, 30.0), Error);
    std::istringstream in2(data);
    const auto traces = parse_traces(in2, 30.0);
    REQUIRE(traces.size() == 2);
    CHECK(traces[0].video_id == "a");
    CHECK(traces[1].video_id == "b");
}

TEST_CASE("normalization maps pixels into the unit square") {
    VideoTrace t{"a", 30.0, {}};
    KeypointFrame f;
    f.video_id = "a";
    f.width = 1280;
    f.height = 720;
    f.keypoints["nose"] = {640.0, 360.0, 1.0};
    f.keypoints["left_eye"] = {0.0, 0.0, 1.0};
    f.keypoints["right_eye"] = {1300.0, 10.0, 1.0};
    t.frames.push_back(f);

    NormalizeStats stats;
    const VideoTrace n = normalize_coordinates(t, &stats);
    const auto& kps = n.frames[0].keypoints;
    CHECK(kps.at("nose").x == 0.5);
    CHECK(kps.at("nose").y == 0.5);
    CHECK(kps.at("left_eye").x == 0.0);
    CHECK(kps.at("left_eye").y == 0.0);
    CHECK(kps.at("right_eye").x == 1.0);
    CHECK(kps.at("right_eye").y == 10.0 / 720.0);
    CHECK(stats.clamped == 1);
    CHECK(n.frames[0].normalized);
}

TEST_CASE("normalization respects the record-level normalized flag") {
    VideoTrace t{"a", 30.0, {}};
    KeypointFrame f;
    f.video_id = "a";
    f.width = 1280;
    f.height = 720;
    f.normalized = true;
    f.keypoints["nose"] = {0.25, 1.25, 1.0};
    t.frames.push_back(f);
    NormalizeStats stats;
    const VideoTrace n = normalize_coordinates(t, &stats);
    CHECK(n.frames[0].keypoints.at("nose").x == 0.25);
    CHECK(n.frames[0].keypoints.at("nose").y == 1.0);
    CHECK(stats.clamped == 1);
}

TEST_CASE("normalization is idempotent") {
    std::mt19937 rng(7);
    for (int i = 0; i < 50; ++i) {
        const VideoTrace t = random_trace(rng, "v");
        const VideoTrace once = normalize_coordinates(t);
        const VideoTrace twice = normalize_coordinates(once);
        REQUIRE(once.frames.size() == twice.frames.size());
        for (std::size_t k = 0; k < once.frames.size(); ++k)
            CHECK(frames_equal(once.frames[k], twice.frames[k]));
    }
}

TEST_CASE("normalized coordinates stay in [0,1] and t is non-decreasing") {
    std::mt19937 rng(11);
    for (int i = 0; i < 50; ++i) {
        const VideoTrace t = normalize_coordinates(random_trace(rng, "v"));
        double last_t = -1.0;
        for (const KeypointFrame& f : t.frames) {
            CHECK(f.t >= last_t);
            last_t = f.t;
            for (const auto& [name, kp] : f.keypoints) {
                CHECK(kp.x >= 0.0);
                CHECK(kp.x <= 1.0);
                CHECK(kp.y >= 0.0);
                CHECK(kp.y <= 1.0);
            }
        }
    }
}

TEST_CASE("parse-serialize-parse is identity on record fields") {
    std::mt19937 rng(23);
    for (int i = 0; i < 30; ++i) {
        const VideoTrace original = random_trace(rng, "vid");
        std::ostringstream first;
        serialize_trace(original, first);
        std::istringstream back(first.str());
        const VideoTrace reparsed = parse_trace(back, 30.0);
        if (original.frames.empty()) {
            CHECK(reparsed.frames.empty());
            continue;
        }
        REQUIRE(reparsed.frames.size() == original.frames.size());
        for (std::size_t k = 0; k < original.frames.size(); ++k)
            CHECK(frames_equal(original.frames[k], reparsed.frames[k]));
        std::ostringstream second;
        serialize_trace(reparsed, second);
        CHECK(first.str() == second.str());
    }
}
