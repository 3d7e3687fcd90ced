#include "selectrack/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "selectrack/io.hpp"
#include "selectrack/metrics.hpp"
#include "selectrack/synth.hpp"

namespace selectrack::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_real(std::string_view key, const std::string& text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw std::invalid_argument(fmt::format("{}: expected a number, got '{}'", key, text));
    }
    return v;
}

int parse_int(std::string_view key, const std::string& text) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw std::invalid_argument(fmt::format("{}: expected an integer, got '{}'", key, text));
    }
    return v;
}

bool parse_bool(std::string_view key, const std::string& text) {
    if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
    if (text == "0" || text == "false" || text == "off" || text == "no") return false;
    throw std::invalid_argument(fmt::format("{}: expected true or false, got '{}'", key, text));
}

std::string real_text(double v) { return fmt::format("{}", v); }

// Flags shared by track and sweep. Every value is kept as text so that only
// flags actually given override the config file.
struct TrackerFlags {
    std::string config;
    std::map<std::string, std::string> given;
    std::map<std::string, CLI::Option*> options;
    std::map<std::string, std::string> storage;
    bool no_ars = false;
    CLI::Option* no_ars_opt = nullptr;

    void add(CLI::App& app, bool with_threshold) {
        const MatchConfig m;
        const GateConfig g;
        app.add_option("--config", config, "key=value file; explicit flags take precedence");
        auto opt = [&](const std::string& flag, const std::string& key, const std::string& help,
                       const std::string& def) {
            options[key] = app.add_option(flag, storage[key], fmt::format("{} (default: {})", help, def));
        };
        opt("--mode", "mode", "selective, base_gate or always_extract", std::string(to_string(g.mode)));
        if (with_threshold) opt("--iou-th", "theta_iou", "candidate IoU threshold", real_text(g.theta_iou));
        opt("--ars-th", "theta_alpha", "blended alpha threshold", real_text(g.theta_alpha));
        no_ars_opt = app.add_flag("--no-ars", no_ars, "disable the aspect-ratio gate");
        opt("--match", "match", "cascade or fused", std::string(to_string(m.strategy)));
        opt("--appearance-gate", "appearance_gate", "max cosine distance", real_text(m.appearance_gate));
        opt("--iou-gate", "iou_gate", "min IoU for IoU association", real_text(m.iou_gate));
        opt("--fused-weight", "fused_weight", "appearance weight in fused matching", real_text(m.fused_weight));
        opt("--conf-high", "conf_high", "high-confidence threshold", real_text(m.conf_high));
        opt("--byte-low", "byte_low", "associate low-confidence detections", "off for cascade, on for fused");
        opt("--min-hits", "min_hits", "hits before a track is confirmed", fmt::format("{}", m.min_hits));
        opt("--max-age", "max_age", "frames a track survives unmatched", fmt::format("{}", m.max_age));
        opt("--ema-alpha", "ema_alpha", "embedding EMA weight", real_text(m.ema_alpha));
        opt("--output-box", "output", "kalman or detection", std::string(to_string(m.output)));
    }

    std::map<std::string, std::string> merged() const {
        std::map<std::string, std::string> values;
        if (!config.empty()) values = read_key_values(config);
        for (const auto& [key, o] : options) {
            if (o->count() > 0) values[key] = storage.at(key);
        }
        if (no_ars_opt->count() > 0) values["ars"] = "false";
        return values;
    }
};

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io::IoError(fmt::format("cannot write '{}'", path.string()));
    f << text;
    if (!f) throw io::IoError(fmt::format("write failed for '{}'", path.string()));
}

std::string stats_text(const RunStats& stats, const TrackerSettings& s) {
    std::string out;
    const auto pde = stats.pde();
    fmt::format_to(std::back_inserter(out), "pde={}\n", pde ? fmt::format("{:.6f}", *pde) : "n/a");
    fmt::format_to(std::back_inserter(out), "fetches={}\ndetections={}\ntotal_detections={}\nframes={}\n",
                   stats.fetches, stats.detections, stats.total_detections, stats.frames);
    double total_ms = 0.0;
    for (double ms : stats.frame_millis) total_ms += ms;
    fmt::format_to(std::back_inserter(out), "tracking_ms={:.3f}\n", total_ms);
    out += echo_settings(s);
    return out;
}

struct Inputs {
    DetectionsByFrame detections;
    std::optional<FeatureTable> features;
    TrackOutput ground_truth;
};

SequenceResult track_once(const Inputs& in, const TrackerSettings& s) {
    const NullFeatureProvider none;
    const FeatureProvider& provider = in.features ? static_cast<const FeatureProvider&>(*in.features) : none;
    return run_sequence(in.detections, provider, s.gate, s.match);
}

int cmd_track(const std::string& det, const std::string& features, const std::string& out_path,
              std::string stats_path, const TrackerFlags& flags, std::ostream& out) {
    const TrackerSettings settings = settings_from(flags.merged());
    Inputs in;
    in.detections = io::read_detections(det);
    if (!features.empty()) in.features = io::to_feature_table(io::read_features(features));
    const SequenceResult result = track_once(in, settings);

    io::write_results(out_path, result.output);
    if (stats_path.empty()) stats_path = out_path + ".stats";
    write_text(stats_path, stats_text(result.stats, settings));

    const auto pde = result.stats.pde();
    out << fmt::format("{} rows over {} frames, PDE {}\n", result.output.size(), result.stats.frames,
                       pde ? fmt::format("{:.2f}%", *pde) : "n/a");
    return 0;
}

void apply_stats(metrics::EvalReport& report, const std::string& path) {
    const auto kv = read_key_values(path);
    auto find = [&](const char* key) -> std::optional<std::string> {
        const auto it = kv.find(key);
        if (it == kv.end() || it->second == "n/a") return std::nullopt;
        return it->second;
    };
    if (auto v = find("pde")) report.pde = parse_real("pde", *v);
    if (auto v = find("fetches")) report.fetches = static_cast<std::size_t>(parse_real("fetches", *v));
    if (auto v = find("detections")) report.detections = static_cast<std::size_t>(parse_real("detections", *v));
}

int cmd_eval(const std::string& gt, const std::string& pred, const std::string& stats, double iou_match,
             const std::string& format, const std::string& out_path, std::ostream& out) {
    const TrackOutput truth = io::read_ground_truth(gt);
    const TrackOutput predicted = io::read_results(pred);
    metrics::check_frame_domain(truth, predicted);
    metrics::EvalReport report = metrics::evaluate(truth, predicted, iou_match);
    if (!stats.empty()) apply_stats(report, stats);
    const std::string text = format == "kv" ? metrics::format_kv(report) : metrics::format_table(report);
    if (out_path.empty()) {
        out << text;
    } else {
        write_text(out_path, text);
    }
    return 0;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (t.empty()) continue;
        grid.push_back(parse_real("--iou-th-grid", t));
    }
    if (grid.empty()) throw std::invalid_argument("--iou-th-grid: no thresholds given");
    std::sort(grid.begin(), grid.end());
    return grid;
}

struct SweepRow {
    std::string tracker;
    std::optional<double> threshold;
    std::optional<double> pde;
    double idf1 = 0.0;
    int switches = 0;
};

std::string sweep_table(const std::vector<SweepRow>& rows) {
    std::string out = fmt::format("{:<16} {:>9} {:>8} {:>8} {:>6}\n", "tracker", "threshold", "PDE", "IDF1", "IDsw");
    for (const auto& r : rows) {
        fmt::format_to(std::back_inserter(out), "{:<16} {:>9} {:>8} {:>8.2f} {:>6}\n", r.tracker,
                       r.threshold ? fmt::format("{:.2f}", *r.threshold) : "-",
                       r.pde ? fmt::format("{:.2f}", *r.pde) : "n/a", 100.0 * r.idf1, r.switches);
    }
    return out;
}

int cmd_sweep(const std::string& grid_text, const std::string& preset, std::uint64_t seed, const std::string& det,
              const std::string& features, const std::string& gt, double iou_match, unsigned jobs,
              const std::string& out_path, const TrackerFlags& flags, std::ostream& out) {
    const std::vector<double> grid = parse_grid(grid_text);
    auto base_values = flags.merged();
    base_values.erase("theta_iou");
    const TrackerSettings base = settings_from(base_values);
    if (base.gate.mode == ExtractionMode::always_extract) {
        throw std::invalid_argument("sweep: the grid rows need a gated mode (selective or base_gate)");
    }

    Inputs in;
    if (!preset.empty()) {
        const synth::SyntheticData data = synth::generate(synth::preset(preset, seed));
        in.detections = io::group_detections(data.detections);
        in.features = io::to_feature_table(data.features);
        in.ground_truth = data.ground_truth;
    } else {
        in.detections = io::read_detections(det);
        if (!features.empty()) in.features = io::to_feature_table(io::read_features(features));
        in.ground_truth = io::read_ground_truth(gt);
    }

    std::vector<TrackerSettings> configs;
    TrackerSettings baseline = base;
    baseline.gate.mode = ExtractionMode::always_extract;
    configs.push_back(baseline);
    for (double th : grid) {
        TrackerSettings s = base;
        s.gate.theta_iou = th;
        s.gate.validate();
        configs.push_back(s);
    }

    std::vector<SweepRow> rows(configs.size());
    std::vector<std::exception_ptr> errors(configs.size());
    auto work = [&](std::size_t i) {
        try {
            const SequenceResult r = track_once(in, configs[i]);
            metrics::check_frame_domain(in.ground_truth, r.output);
            const metrics::EvalReport e = metrics::evaluate(in.ground_truth, r.output, iou_match);
            rows[i].tracker = std::string(to_string(configs[i].gate.mode));
            if (i > 0) rows[i].threshold = configs[i].gate.theta_iou;
            rows[i].pde = r.stats.pde();
            rows[i].idf1 = e.idf1;
            rows[i].switches = e.id_switches;
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };

    // Each grid point is an independent sequence with its own tracker and
    // fetch counter; the shared inputs are only read.
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs, configs.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < configs.size(); i += workers) work(i);
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    const std::string table = sweep_table(rows);
    if (out_path.empty()) {
        out << table;
    } else {
        write_text(out_path, table);
    }
    return 0;
}

int cmd_synth(const std::string& preset, std::uint64_t seed, int targets, int frames,
              std::optional<double> box_jitter, std::optional<double> feature_jitter, const std::string& dir,
              std::ostream& out) {
    synth::Scenario scenario = preset.empty() ? synth::random_scenario(seed, targets, frames)
                                              : synth::preset(preset, seed);
    if (box_jitter) scenario.box_jitter = *box_jitter;
    if (feature_jitter) scenario.feature_jitter = *feature_jitter;
    const synth::SyntheticData data = synth::generate(scenario);
    const synth::ScenarioFiles files = synth::write_scenario(data, dir);
    out << fmt::format("{}: {} detections, {} ground-truth rows\n  {}\n  {}\n  {}\n", scenario.name,
                       data.detections.size(), data.ground_truth.size(), files.detections.string(),
                       files.features.string(), files.ground_truth.string());
    return 0;
}

}  // namespace

TrackerSettings settings_from(const std::map<std::string, std::string>& values) {
    static const std::vector<std::string> known = {
        "mode",    "theta_iou", "theta_alpha", "ars",     "match",     "appearance_gate", "iou_gate",
        "fused_weight", "conf_high", "byte_low", "min_hits", "max_age", "ema_alpha",      "output"};
    for (const auto& [key, value] : values) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw std::invalid_argument(fmt::format("unknown configuration key '{}'", key));
        }
    }
    auto get = [&](const char* key) -> const std::string* {
        const auto it = values.find(key);
        return it == values.end() ? nullptr : &it->second;
    };

    TrackerSettings s;
    s.match = MatchConfig::for_strategy(get("match") ? parse_match_strategy(*get("match")) : MatchStrategy::cascade);
    if (auto v = get("mode")) s.gate.mode = parse_extraction_mode(*v);
    if (auto v = get("theta_iou")) s.gate.theta_iou = parse_real("theta_iou", *v);
    if (auto v = get("theta_alpha")) s.gate.theta_alpha = parse_real("theta_alpha", *v);
    if (auto v = get("ars")) s.gate.ars_enabled = parse_bool("ars", *v);
    if (auto v = get("appearance_gate")) s.match.appearance_gate = parse_real("appearance_gate", *v);
    if (auto v = get("iou_gate")) s.match.iou_gate = parse_real("iou_gate", *v);
    if (auto v = get("fused_weight")) s.match.fused_weight = parse_real("fused_weight", *v);
    if (auto v = get("conf_high")) s.match.conf_high = parse_real("conf_high", *v);
    if (auto v = get("byte_low")) s.match.byte_low = parse_bool("byte_low", *v);
    if (auto v = get("min_hits")) s.match.min_hits = parse_int("min_hits", *v);
    if (auto v = get("max_age")) s.match.max_age = parse_int("max_age", *v);
    if (auto v = get("ema_alpha")) s.match.ema_alpha = parse_real("ema_alpha", *v);
    if (auto v = get("output")) s.match.output = parse_output_box(*v);
    s.gate.validate();
    s.match.validate();
    return s;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw io::IoError(fmt::format("cannot open '{}'", path));
    std::map<std::string, std::string> values;
    std::string line;
    for (int n = 1; std::getline(f, line); ++n) {
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw io::IoError(fmt::format("{}: line {}: expected key=value", path, n));
        }
        values[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    return values;
}

std::string echo_settings(const TrackerSettings& s) {
    std::string out;
    auto line = [&out](std::string_view key, const std::string& value) {
        fmt::format_to(std::back_inserter(out), "config.{}={}\n", key, value);
    };
    line("mode", std::string(to_string(s.gate.mode)));
    line("theta_iou", real_text(s.gate.theta_iou));
    line("theta_alpha", real_text(s.gate.theta_alpha));
    line("ars", s.gate.ars_enabled ? "true" : "false");
    line("match", std::string(to_string(s.match.strategy)));
    line("appearance_gate", real_text(s.match.appearance_gate));
    line("iou_gate", real_text(s.match.iou_gate));
    line("fused_weight", real_text(s.match.fused_weight));
    line("conf_high", real_text(s.match.conf_high));
    line("byte_low", s.match.byte_low ? "true" : "false");
    line("min_hits", fmt::format("{}", s.match.min_hits));
    line("max_age", fmt::format("{}", s.match.max_age));
    line("ema_alpha", real_text(s.match.ema_alpha));
    line("output", std::string(to_string(s.match.output)));
    return out;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-object tracker with selective appearance-feature extraction", "selectrack"};
    app.require_subcommand(1);

    auto* track = app.add_subcommand("track", "run the tracker over a detection file");
    std::string det, features, out_path, stats;
    TrackerFlags track_flags;
    track->add_option("--det", det, "MOTChallenge detection file")->required();
    track->add_option("--features", features, "binary feature file; without it matching is IoU-only");
    track->add_option("--out", out_path, "result file")->required();
    track->add_option("--stats", stats, "stats file (default: <out>.stats)");
    track_flags.add(*track, true);

    auto* eval = app.add_subcommand("eval", "score a result file against ground truth");
    std::string gt, pred, eval_stats, format = "table", eval_out;
    double iou_match = 0.5;
    eval->add_option("--gt", gt, "ground-truth file")->required();
    eval->add_option("--pred", pred, "result file")->required();
    eval->add_option("--stats", eval_stats, "stats file written by track; its PDE is echoed");
    eval->add_option("--iou", iou_match, "IoU needed for a match")->capture_default_str();
    eval->add_option("--format", format, "table or kv")->check(CLI::IsMember({"table", "kv"}))->capture_default_str();
    eval->add_option("--out", eval_out, "write the report here instead of stdout");

    auto* sweep = app.add_subcommand("sweep", "sweep the candidate IoU threshold");
    std::string grid = "0.0,0.1,0.2,0.3,0.4,0.5", sweep_preset, sweep_det, sweep_features, sweep_gt, sweep_out;
    std::uint64_t sweep_seed = 7;
    double sweep_iou = 0.5;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    TrackerFlags sweep_flags;
    sweep->add_option("--iou-th-grid", grid, "comma-separated thresholds")->capture_default_str();
    auto* sp = sweep->add_option("--preset", sweep_preset, "synthetic preset to sweep on");
    auto* sd = sweep->add_option("--det", sweep_det, "detection file");
    sweep->add_option("--features", sweep_features, "feature file");
    auto* sg = sweep->add_option("--gt", sweep_gt, "ground-truth file");
    sweep->add_option("--seed", sweep_seed, "preset seed")->capture_default_str();
    sweep->add_option("--iou", sweep_iou, "IoU needed for a match in evaluation")->capture_default_str();
    sweep->add_option("--jobs", jobs, "parallel grid points (default: hardware threads)")
        ->check(CLI::PositiveNumber);
    sweep->add_option("--out", sweep_out, "write the table here instead of stdout");
    sp->excludes(sd);
    sp->excludes(sg);
    sd->needs(sg);
    sweep_flags.add(*sweep, false);

    auto* syn = app.add_subcommand("synth", "generate a synthetic scenario");
    std::string syn_preset, syn_out;
    std::uint64_t syn_seed = 7;
    int syn_targets = 6, syn_frames = 80;
    std::optional<double> box_jitter, feature_jitter;
    auto* pp = syn->add_option("--preset", syn_preset,
                               fmt::format("one of: {}", fmt::join(synth::preset_names(), ", ")));
    syn->add_option("--seed", syn_seed, "random seed")->capture_default_str();
    auto* tp = syn->add_option("--targets", syn_targets, "random scenario: number of targets")->capture_default_str();
    auto* fp = syn->add_option("--frames", syn_frames, "random scenario: number of frames")->capture_default_str();
    syn->add_option("--box-jitter", box_jitter, "override box noise std (pixels)");
    syn->add_option("--feature-jitter", feature_jitter, "override feature noise std");
    syn->add_option("--out", syn_out, "output directory")->required();
    pp->excludes(tp);
    pp->excludes(fp);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsageError;
    }

    try {
        if (track->parsed()) return cmd_track(det, features, out_path, stats, track_flags, out);
        if (eval->parsed()) return cmd_eval(gt, pred, eval_stats, iou_match, format, eval_out, out);
        if (sweep->parsed()) {
            if (sweep_preset.empty() && sweep_det.empty()) {
                err << "sweep: give either --preset or --det with --gt\n";
                return kUsageError;
            }
            return cmd_sweep(grid, sweep_preset, sweep_seed, sweep_det, sweep_features, sweep_gt, sweep_iou, jobs,
                             sweep_out, sweep_flags, out);
        }
        if (syn->parsed()) {
            return cmd_synth(syn_preset, syn_seed, syn_targets, syn_frames, box_jitter, feature_jitter, syn_out, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRunError;
    }
    return kUsageError;
}

}  // namespace selectrack::cli
