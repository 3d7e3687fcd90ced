#include "selectrack/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace selectrack::synth {

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double stddev) {
    if (has_spare_) {
        has_spare_ = false;
        return mean + stddev * spare_;
    }
    // 1 - u lies in (0, 1], keeping log finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + stddev * r * std::cos(theta);
}

bool Target::exists_at(int frame) const {
    return !path.empty() && frame >= path.front().frame && frame <= path.back().frame;
}

bool Target::occluded_at(int frame) const {
    return std::any_of(occlusions.begin(), occlusions.end(),
                       [frame](const auto& w) { return frame >= w.first && frame <= w.second; });
}

BBox Target::box_at(int frame) const {
    if (!exists_at(frame)) throw std::out_of_range("Target::box_at: frame outside trajectory");
    auto next = std::lower_bound(path.begin(), path.end(), frame,
                                 [](const Keyframe& k, int f) { return k.frame < f; });
    if (next->frame == frame) return next->box;
    const Keyframe& b = *next;
    const Keyframe& a = *(next - 1);
    const double t = static_cast<double>(frame - a.frame) / static_cast<double>(b.frame - a.frame);
    auto lerp = [t](double x, double y) { return x + t * (y - x); };
    return {lerp(a.box.x, b.box.x), lerp(a.box.y, b.box.y), lerp(a.box.w, b.box.w), lerp(a.box.h, b.box.h)};
}

void Scenario::validate() const {
    auto fail = [this](const std::string& msg) {
        throw std::invalid_argument(fmt::format("scenario '{}': {}", name, msg));
    };
    if (frames < 1) fail("frame count must be positive");
    if (!(width > 0.0) || !(height > 0.0)) fail("scene size must be positive");
    if (!(box_jitter >= 0.0) || !(feature_jitter >= 0.0)) fail("noise levels must be non-negative");
    const std::size_t dim = targets.empty() ? 0 : targets.front().direction.size();
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const Target& t = targets[i];
        if (t.path.empty()) fail(fmt::format("target {} has an empty trajectory", i));
        if (t.direction.size() != dim || dim == 0) fail(fmt::format("target {} has a bad direction size", i));
        if (!(t.confidence >= 0.0 && t.confidence <= 1.0)) fail(fmt::format("target {} confidence", i));
        for (std::size_t k = 0; k < t.path.size(); ++k) {
            const auto& kf = t.path[k];
            if (!kf.box.valid()) fail(fmt::format("target {} keyframe {} has a degenerate box", i, k));
            if (kf.frame < 1 || kf.frame > frames) fail(fmt::format("target {} keyframe {} outside frames", i, k));
            if (k > 0 && kf.frame <= t.path[k - 1].frame) fail(fmt::format("target {} keyframes not increasing", i));
            if (kf.box.x < 0.0 || kf.box.y < 0.0 || kf.box.x + kf.box.w > width || kf.box.y + kf.box.h > height) {
                fail(fmt::format("target {} keyframe {} leaves the scene", i, k));
            }
        }
        for (const auto& [lo, hi] : t.occlusions) {
            if (lo > hi) fail(fmt::format("target {} has an inverted occlusion window", i));
        }
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        for (std::size_t j = i + 1; j < targets.size(); ++j) {
            double dot = 0.0, ni = 0.0, nj = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                dot += targets[i].direction[k] * targets[j].direction[k];
                ni += targets[i].direction[k] * targets[i].direction[k];
                nj += targets[j].direction[k] * targets[j].direction[k];
            }
            if (!(ni > 0.0) || !(nj > 0.0)) fail("identity directions must be non-zero");
            if (dot / std::sqrt(ni * nj) > 1.0 - 1e-9) {
                fail(fmt::format("targets {} and {} share an identity direction", i, j));
            }
        }
    }
}

SyntheticData generate(const Scenario& scenario) {
    scenario.validate();
    Rng rng(scenario.seed);
    SyntheticData out;
    out.features.dim = scenario.targets.empty() ? 0 : static_cast<std::uint32_t>(scenario.targets.front().direction.size());

    for (int frame = 1; frame <= scenario.frames; ++frame) {
        std::uint32_t index = 0;
        for (std::size_t i = 0; i < scenario.targets.size(); ++i) {
            const Target& t = scenario.targets[i];
            if (!t.exists_at(frame) || t.occluded_at(frame)) continue;
            const BBox gt = t.box_at(frame);
            out.ground_truth.push_back({frame, static_cast<int>(i) + 1, gt});

            io::DetFileRow row;
            row.frame = frame;
            row.id = -1;
            row.box = gt;
            row.conf = t.confidence;
            if (scenario.box_jitter > 0.0) {
                row.box.x += rng.normal(0.0, scenario.box_jitter);
                row.box.y += rng.normal(0.0, scenario.box_jitter);
                row.box.w = std::max(1.0, row.box.w + rng.normal(0.0, scenario.box_jitter));
                row.box.h = std::max(1.0, row.box.h + rng.normal(0.0, scenario.box_jitter));
            }
            out.detections.push_back(row);

            std::vector<double> f = t.direction;
            double n2 = 0.0;
            for (double v : f) n2 += v * v;
            const double inv = 1.0 / std::sqrt(n2);
            for (double& v : f) {
                v *= inv;
                if (scenario.feature_jitter > 0.0) v += rng.normal(0.0, scenario.feature_jitter);
            }
            n2 = 0.0;
            for (double v : f) n2 += v * v;
            io::FeatureRecord rec;
            rec.frame = static_cast<std::uint32_t>(frame);
            rec.det_index = index++;
            for (double v : f) rec.values.push_back(static_cast<float>(v / std::sqrt(n2)));
            out.features.records.push_back(std::move(rec));
        }
    }
    return out;
}

ScenarioFiles write_scenario(const SyntheticData& data, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io::IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
    ScenarioFiles files{dir / "det.txt", dir / "features.feab", dir / "gt.txt"};
    io::write_detections(files.detections, data.detections);
    io::write_features(files.features, data.features);
    io::write_ground_truth(files.ground_truth, data.ground_truth);
    return files;
}

namespace {

std::vector<double> basis(std::size_t dim, std::size_t axis) {
    std::vector<double> v(dim, 0.0);
    v[axis] = 1.0;
    return v;
}

}  // namespace

Scenario crossing_scene(std::uint64_t seed) {
    Scenario s;
    s.name = "crossing";
    s.seed = seed;
    s.frames = 60;
    s.width = 640.0;
    s.height = 480.0;
    s.box_jitter = 0.5;
    s.feature_jitter = 0.03;

    // Both walk 10 px/frame, meet with centres aligned at frame 30, then
    // turn back. The smaller target is hidden while they overlap.
    Target small;
    small.direction = basis(8, 0);
    small.path = {{1, {0.0, 200.0, 44.0, 100.0}}, {30, {290.0, 200.0, 44.0, 100.0}}, {60, {0.0, 200.0, 44.0, 100.0}}};
    small.occlusions = {{28, 32}};

    Target large;
    large.direction = basis(8, 1);
    large.path = {{1, {577.0, 190.0, 50.0, 110.0}}, {30, {287.0, 190.0, 50.0, 110.0}}, {60, {587.0, 190.0, 50.0, 110.0}}};

    s.targets = {small, large};
    return s;
}

Scenario parade_scene(std::uint64_t seed, int count, int frames) {
    Scenario s;
    s.name = "parade";
    s.seed = seed;
    s.frames = frames;
    s.width = 1920.0;
    s.height = 40.0 + 100.0 * count;
    s.box_jitter = 1.0;
    s.feature_jitter = 0.02;
    const std::size_t dim = std::max<std::size_t>(16, static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Target t;
        t.direction = basis(dim, static_cast<std::size_t>(i));
        const double y = 20.0 + 100.0 * i;
        const double speed = 2.0 + 0.1 * i;
        t.path = {{1, {100.0, y, 40.0, 90.0}}, {frames, {100.0 + speed * (frames - 1), y, 40.0, 90.0}}};
        s.targets.push_back(t);
    }
    return s;
}

Scenario enter_exit_scene(std::uint64_t seed) {
    Scenario s;
    s.name = "enter_exit";
    s.seed = seed;
    s.frames = 100;
    s.width = 1280.0;
    s.height = 720.0;
    s.box_jitter = 1.0;
    s.feature_jitter = 0.03;
    for (int i = 0; i < 5; ++i) {
        Target t;
        t.direction = basis(16, static_cast<std::size_t>(i));
        const int enter = 1 + 10 * i;
        const int leave = std::min(100, 60 + 10 * i);
        const double y = 30.0 + 130.0 * i;
        const bool rightward = i % 2 == 0;
        const double x0 = rightward ? 10.0 : 1180.0;
        const double x1 = rightward ? x0 + 4.0 * (leave - enter) : x0 - 4.0 * (leave - enter);
        t.path = {{enter, {x0, y, 45.0, 100.0}}, {leave, {x1, y, 45.0, 100.0}}};
        s.targets.push_back(t);
    }
    return s;
}

Scenario dense_grid_scene(std::uint64_t seed) {
    Scenario s;
    s.name = "dense_grid";
    s.seed = seed;
    s.frames = 60;
    s.width = 640.0;
    s.height = 480.0;
    s.box_jitter = 1.0;
    s.feature_jitter = 0.05;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            Target t;
            t.direction = basis(16, static_cast<std::size_t>(r * 4 + c));
            const double x = 100.0 + 36.0 * c;
            const double y = 60.0 + 80.0 * r;
            const double dx = (r % 2 == 0 ? 1.0 : -1.0) * 0.5;
            t.path = {{1, {x, y, 40.0, 90.0}}, {60, {x + 59.0 * dx, y + 20.0, 40.0, 90.0}}};
            if ((r + c) % 5 == 0) t.occlusions = {{20 + r, 24 + r}};
            s.targets.push_back(t);
        }
    }
    return s;
}

Scenario random_scenario(std::uint64_t seed, int targets, int frames) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    Scenario s;
    s.name = "random";
    s.seed = seed;
    s.frames = frames;
    s.width = 960.0;
    s.height = 540.0;
    s.box_jitter = 1.0;
    s.feature_jitter = 0.05;
    for (int i = 0; i < targets; ++i) {
        Target t;
        t.direction.resize(16);
        for (double& v : t.direction) v = rng.normal();
        const double w = rng.uniform(25.0, 60.0);
        const double h = rng.uniform(60.0, 140.0);
        const int enter = 1 + static_cast<int>(rng.uniform() * frames / 3.0);
        const int leave = std::max(enter + 1, frames - static_cast<int>(rng.uniform() * frames / 3.0));
        const int legs = 1 + static_cast<int>(rng.uniform() * 3.0);
        for (int k = 0; k <= legs; ++k) {
            const int f = k == legs ? leave : enter + (leave - enter) * k / legs;
            if (!t.path.empty() && f <= t.path.back().frame) continue;
            t.path.push_back({f, {rng.uniform(0.0, s.width - w), rng.uniform(0.0, s.height - h), w, h}});
        }
        if (rng.uniform() < 0.3 && leave - enter > 10) {
            const int lo = enter + 1 + static_cast<int>(rng.uniform() * (leave - enter - 10));
            t.occlusions.push_back({lo, lo + 1 + static_cast<int>(rng.uniform() * 7.0)});
        }
        t.confidence = rng.uniform(0.3, 1.0);
        s.targets.push_back(std::move(t));
    }
    return s;
}

std::vector<std::string> preset_names() { return {"crossing", "parade", "enter_exit", "dense_grid"}; }

Scenario preset(std::string_view name, std::uint64_t seed) {
    if (name == "crossing") return crossing_scene(seed);
    if (name == "parade") return parade_scene(seed);
    if (name == "enter_exit") return enter_exit_scene(seed);
    if (name == "dense_grid") return dense_grid_scene(seed);
    throw std::invalid_argument(fmt::format("unknown preset '{}' (known presets: {})", name,
                                            fmt::join(preset_names(), ", ")));
}

}  // namespace selectrack::synth
