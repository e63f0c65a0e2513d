// talseg: localize, label, and score anomalous-activity events in driver
// keypoint traces. Subcommands compose: `pipeline` is `segment` | `classify`.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "talseg/commands.hpp"
#include "talseg/config.hpp"
#include "talseg/errors.hpp"

namespace {

// Per-subcommand flag storage. Precedence: explicit flags > config file >
// defaults.
struct CommonFlags {
    double fps = 0;
    double conf_threshold = 0;
    double theta_head = 0;
    double theta_hand = 0;
    double gap_tolerance = 0;
    double min_duration = 0;
    std::string matching;
    std::string config_path;
    std::string out;
    int jobs = 0;

    CLI::Option* fps_opt = nullptr;
    CLI::Option* conf_opt = nullptr;
    CLI::Option* theta_head_opt = nullptr;
    CLI::Option* theta_hand_opt = nullptr;
    CLI::Option* gap_opt = nullptr;
    CLI::Option* min_duration_opt = nullptr;
    CLI::Option* matching_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;

    void attach(CLI::App* cmd) {
        fps_opt = cmd->add_option("--fps", fps, "Frames per second (timestamp derivation)");
        conf_opt =
            cmd->add_option("--conf-threshold", conf_threshold, "Keypoint confidence threshold");
        theta_head_opt =
            cmd->add_option("--theta-head", theta_head, "Head angle threshold, degrees");
        theta_hand_opt =
            cmd->add_option("--theta-hand", theta_hand, "Hand elevation threshold, degrees");
        gap_opt = cmd->add_option("--gap-tolerance", gap_tolerance,
                                  "Longest normal-driving span merged into a segment, seconds");
        min_duration_opt = cmd->add_option("--min-duration", min_duration,
                                           "Shortest event kept by postprocessing, seconds");
        matching_opt = cmd->add_option("--matching", matching, "Matching mode: greedy|optimal");
        cmd->add_option("--config", config_path, "JSON config file");
        out_opt = cmd->add_option("--out", out, "Output path (default: stdout)");
        jobs_opt = cmd->add_option("--jobs", jobs, "Worker threads for per-video processing");
    }

    talseg::PipelineConfig resolve() const {
        talseg::PipelineConfig cfg;
        if (!config_path.empty()) talseg::load_config_file(cfg, config_path);
        if (fps_opt->count()) cfg.fps = fps;
        if (conf_opt->count()) cfg.conf_threshold = conf_threshold;
        if (theta_head_opt->count()) cfg.theta_head = theta_head;
        if (theta_hand_opt->count()) cfg.theta_hand = theta_hand;
        if (gap_opt->count()) cfg.gap_tolerance = gap_tolerance;
        if (min_duration_opt->count()) cfg.min_duration = min_duration;
        if (matching_opt->count()) cfg.matching = talseg::parse_match_mode(matching);
        if (out_opt->count()) cfg.out = out;
        if (jobs_opt->count()) cfg.jobs = jobs;
        talseg::validate(cfg);
        return cfg;
    }
};

// Runs fn against --out (or stdout) and echoes the effective config to a
// sidecar next to the output file.
template <typename Fn>
void with_output(const talseg::PipelineConfig& cfg, Fn&& fn) {
    if (cfg.out.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(cfg.out, std::ios::binary);
    if (!out) throw talseg::Error("cannot write output file '" + cfg.out + "'");
    fn(out);
    talseg::write_config_sidecar(cfg, cfg.out + ".config.json");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal localization and scoring of anomalous driver activity\n"
                 "from keypoint traces"};
    app.require_subcommand(1);

    std::string trace_path, scores_path, segments_path, pred_path, gt_path, script_path, out_dir,
        angles_path;
    double score_noise = 0.0;

    CLI::App* segment = app.add_subcommand("segment", "Extract anomaly segments from a trace");
    segment->add_option("trace", trace_path, "Keypoint trace file (JSONL)")->required();
    segment->add_option("--angles", angles_path, "Also dump per-frame angles to this path");
    CommonFlags segment_flags;
    segment_flags.attach(segment);

    CLI::App* classify =
        app.add_subcommand("classify", "Label a segment dump and emit a submission");
    classify->add_option("segments", segments_path, "Segment dump (JSONL)")->required();
    classify->add_option("scores", scores_path, "Per-frame class scores (JSONL)")->required();
    CommonFlags classify_flags;
    classify_flags.attach(classify);

    CLI::App* pipeline =
        app.add_subcommand("pipeline", "Trace + scores straight to a submission");
    pipeline->add_option("trace", trace_path, "Keypoint trace file (JSONL)")->required();
    pipeline->add_option("scores", scores_path, "Per-frame class scores (JSONL)")->required();
    CommonFlags pipeline_flags;
    pipeline_flags.attach(pipeline);

    CLI::App* score = app.add_subcommand("score", "Score predictions against ground truth");
    score->add_option("predictions", pred_path, "Predicted submission file")->required();
    score->add_option("ground_truth", gt_path, "Ground-truth submission file")->required();
    CommonFlags score_flags;
    score_flags.attach(score);

    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic trace/scores/truth bundle");
    synth->add_option("script", script_path, "Event script (JSON)")->required();
    synth->add_option("out_dir", out_dir, "Output directory")->required();
    CLI::Option* score_noise_opt = synth->add_option(
        "--score-noise", score_noise,
        "Uniform blend weight for score noise, overrides the script");
    CommonFlags synth_flags;
    synth_flags.attach(synth);

    CLI11_PARSE(app, argc, argv);

    try {
        if (segment->parsed()) {
            const talseg::PipelineConfig cfg = segment_flags.resolve();
            std::ofstream angles_file;
            std::ostream* angles_out = nullptr;
            if (!angles_path.empty()) {
                angles_file.open(angles_path, std::ios::binary);
                if (!angles_file)
                    throw talseg::Error("cannot write angle dump '" + angles_path + "'");
                angles_out = &angles_file;
            }
            with_output(cfg, [&](std::ostream& out) {
                talseg::cmd_segment(trace_path, cfg, out, angles_out);
            });
        } else if (classify->parsed()) {
            const talseg::PipelineConfig cfg = classify_flags.resolve();
            with_output(cfg, [&](std::ostream& out) {
                talseg::cmd_classify(segments_path, scores_path, cfg, out);
            });
        } else if (pipeline->parsed()) {
            const talseg::PipelineConfig cfg = pipeline_flags.resolve();
            with_output(cfg, [&](std::ostream& out) {
                talseg::cmd_pipeline(trace_path, scores_path, cfg, out);
            });
        } else if (score->parsed()) {
            const talseg::PipelineConfig cfg = score_flags.resolve();
            if (cfg.out.empty()) {
                talseg::cmd_score(pred_path, gt_path, cfg, nullptr, std::cout);
            } else {
                std::ofstream report(cfg.out, std::ios::binary);
                if (!report)
                    throw talseg::Error("cannot write report file '" + cfg.out + "'");
                talseg::cmd_score(pred_path, gt_path, cfg, &report, std::cout);
                talseg::write_config_sidecar(cfg, cfg.out + ".config.json");
            }
        } else if (synth->parsed()) {
            const talseg::PipelineConfig cfg = synth_flags.resolve();
            talseg::cmd_synth(script_path, out_dir, cfg,
                              score_noise_opt->count() ? std::optional<double>(score_noise)
                                                       : std::nullopt);
            talseg::write_config_sidecar(
                cfg, (std::filesystem::path(out_dir) / "config.json").string());
        }
    } catch (const std::exception& e) {
        std::cerr << "talseg: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
