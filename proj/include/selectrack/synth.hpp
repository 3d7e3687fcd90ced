#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "selectrack/io.hpp"

namespace selectrack::synth {

/// Platform-stable random source: std::mt19937_64 (its output sequence is
/// fixed by the C++ standard) with uniforms taken from the top 53 bits and
/// normals from the Box-Muller transform. Standard distributions are avoided
/// because their algorithms are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal(double mean = 0.0, double stddev = 1.0);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct Keyframe {
    int frame = 1;
    BBox box;
};

struct Target {
    /// Identity appearance direction; normalised when features are emitted.
    std::vector<double> direction;
    /// Piecewise-linear trajectory. The target exists from the first to the
    /// last keyframe.
    std::vector<Keyframe> path;
    /// Inclusive frame ranges in which the target emits no detection.
    std::vector<std::pair<int, int>> occlusions;
    double confidence = 0.9;

    bool exists_at(int frame) const;
    bool occluded_at(int frame) const;
    BBox box_at(int frame) const;
};

struct Scenario {
    std::string name = "custom";
    std::uint64_t seed = 0;
    int frames = 0;
    double width = 1920.0;
    double height = 1080.0;
    std::vector<Target> targets;
    double box_jitter = 0.0;
    double feature_jitter = 0.0;

    /// Throws std::invalid_argument for empty or zero-size trajectories,
    /// keyframes outside the scene or the frame range, unordered keyframes,
    /// mismatched or parallel identity directions.
    void validate() const;
};

struct SyntheticData {
    std::vector<io::DetFileRow> detections;
    io::FeatureFile features;
    /// Boxes of visible targets only; fully occluded frames are omitted.
    TrackOutput ground_truth;
};

/// Per frame, every visible target emits its box plus Gaussian jitter and
/// normalize(direction + Gaussian noise). Identical scenarios (including the
/// seed) give identical output.
SyntheticData generate(const Scenario& scenario);

struct ScenarioFiles {
    std::filesystem::path detections;
    std::filesystem::path features;
    std::filesystem::path ground_truth;
};

/// Writes det.txt, features.feab and gt.txt into `dir`, creating it.
ScenarioFiles write_scenario(const SyntheticData& data, const std::filesystem::path& dir);

/// Two targets walk toward each other, overlap for five frames while the
/// smaller one is hidden, then turn back and separate. Orthogonal features.
Scenario crossing_scene(std::uint64_t seed = 7);

/// `count` targets on parallel lanes that never interact.
Scenario parade_scene(std::uint64_t seed = 7, int count = 10, int frames = 200);

/// Targets entering and leaving the scene at staggered times.
Scenario enter_exit_scene(std::uint64_t seed = 7);

/// A tight grid of slowly drifting targets with overlapping neighbours.
Scenario dense_grid_scene(std::uint64_t seed = 7);

/// Random walkers with random entry, exit and occlusions.
Scenario random_scenario(std::uint64_t seed, int targets = 6, int frames = 80);

std::vector<std::string> preset_names();
/// Throws std::invalid_argument listing the known presets.
Scenario preset(std::string_view name, std::uint64_t seed = 7);

}  // namespace selectrack::synth
