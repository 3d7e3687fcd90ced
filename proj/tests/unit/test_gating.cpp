#include <gtest/gtest.h>

#include <random>
#include <stdexcept>
#include <vector>

#include "selectrack/gating.hpp"
#include "support/oracles.hpp"

using selectrack::BBox;
using selectrack::ExtractionMode;
using selectrack::GateConfig;
using selectrack::RiskLabel;

namespace {

selectrack::oracle::Box ob(const BBox& b) { return {b.x, b.y, b.w, b.h}; }

std::vector<selectrack::oracle::Box> obs(const std::vector<BBox>& v) {
    std::vector<selectrack::oracle::Box> out;
    for (const auto& b : v) out.push_back(ob(b));
    return out;
}

BBox random_box(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(0.0, 200.0), size(5.0, 60.0);
    return {pos(rng), pos(rng), size(rng), size(rng)};
}

}  // namespace

TEST(Classify, NoConfirmedTracksMeansAllRisky) {
    const std::vector<BBox> dets{{0, 0, 10, 10}, {50, 50, 10, 20}};
    const auto labels = selectrack::classify(dets, {}, GateConfig{});
    ASSERT_EQ(labels.size(), 2u);
    for (const auto& l : labels) EXPECT_TRUE(l.is_risky());
}

TEST(Classify, SoleOverlappingTrackWithSameShapeIsCandidate) {
    const std::vector<BBox> dets{{10, 0, 90, 90}};
    const std::vector<BBox> tracks{{0, 0, 90, 90}};
    ASSERT_DOUBLE_EQ(selectrack::iou(dets[0], tracks[0]), 0.8);
    ASSERT_NEAR(selectrack::blended_alpha(0.8, 1.0), 1.0 / 1.2, 1e-15);
    GateConfig cfg;
    cfg.theta_iou = 0.2;
    cfg.theta_alpha = 0.6;
    const auto labels = selectrack::classify(dets, tracks, cfg);
    ASSERT_FALSE(labels[0].is_risky());
    EXPECT_EQ(labels[0].candidate(), 0u);
    EXPECT_EQ(selectrack::oracle::brute_force_label(ob(dets[0]), obs(tracks), 0.2, true, 0.6), 0);
}

TEST(Classify, TwoCandidatesMeansRisky) {
    const std::vector<BBox> dets{{0, 0, 21, 10}};
    const std::vector<BBox> tracks{{7, 0, 21, 10}, {-9, 0, 21, 10}};
    ASSERT_DOUBLE_EQ(selectrack::iou(dets[0], tracks[0]), 0.5);
    ASSERT_DOUBLE_EQ(selectrack::iou(dets[0], tracks[1]), 0.4);
    GateConfig cfg;
    cfg.theta_iou = 0.3;
    EXPECT_EQ(selectrack::oracle::brute_force_label(ob(dets[0]), obs(tracks), 0.3, true, 0.6), -1);
    EXPECT_TRUE(selectrack::classify(dets, tracks, cfg)[0].is_risky());
    // Raising the threshold past the weaker overlap leaves one candidate.
    cfg.theta_iou = 0.45;
    const auto labels = selectrack::classify(dets, tracks, cfg);
    ASSERT_FALSE(labels[0].is_risky());
    EXPECT_EQ(labels[0].candidate(), 0u);
}

TEST(Classify, ThresholdIsStrict) {
    const std::vector<BBox> dets{{10, 0, 90, 90}};
    const std::vector<BBox> tracks{{0, 0, 90, 90}};
    GateConfig cfg;
    cfg.theta_iou = 0.8;
    EXPECT_TRUE(selectrack::classify(dets, tracks, cfg)[0].is_risky());
}

TEST(Classify, AspectGateRejectsMismatchedShape) {
    // Tall detection inside a wide track: one candidate, dissimilar shape.
    const std::vector<BBox> dets{{0, 0, 40, 40}};
    const std::vector<BBox> tracks{{0, 0, 40, 12}};
    GateConfig cfg;
    cfg.theta_iou = 0.2;
    const double u = selectrack::iou(dets[0], tracks[0]);
    ASSERT_GT(u, 0.2);
    const double a = selectrack::blended_alpha(u, selectrack::aspect_ratio_similarity(dets[0], tracks[0]));
    ASSERT_LT(a, 0.6);
    EXPECT_TRUE(selectrack::classify(dets, tracks, cfg)[0].is_risky());
    cfg.ars_enabled = false;
    EXPECT_FALSE(selectrack::classify(dets, tracks, cfg)[0].is_risky());
}

TEST(Classify, TrackMayBeCandidateForSeveralDetections) {
    const std::vector<BBox> dets{{0, 0, 50, 100}, {2, 1, 50, 100}};
    const std::vector<BBox> tracks{{1, 0, 50, 100}};
    const auto labels = selectrack::classify(dets, tracks, GateConfig{});
    EXPECT_EQ(labels[0], RiskLabel::non_risky(0));
    EXPECT_EQ(labels[1], RiskLabel::non_risky(0));
}

TEST(Classify, AlwaysExtractMarksEverythingRisky) {
    std::mt19937_64 rng(4);
    GateConfig cfg;
    cfg.mode = ExtractionMode::always_extract;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<BBox> dets, tracks;
        for (int i = 0; i < 10; ++i) dets.push_back(random_box(rng));
        for (int i = 0; i < 10; ++i) tracks.push_back(i % 2 ? random_box(rng) : dets[i]);
        for (const auto& l : selectrack::classify(dets, tracks, cfg)) EXPECT_TRUE(l.is_risky());
    }
}

TEST(Classify, RejectsBadConfig) {
    GateConfig cfg;
    cfg.theta_iou = 1.5;
    EXPECT_THROW(selectrack::classify(std::vector<BBox>{}, std::vector<BBox>{}, cfg),
                 std::invalid_argument);
}

TEST(ClassifyProperty, AgreesWithBruteForce) {
    std::mt19937_64 rng(31337);
    std::uniform_int_distribution<int> count(0, 30);
    std::uniform_real_distribution<double> th(0.0, 0.6);
    std::bernoulli_distribution ars(0.7);
    for (int frame = 0; frame < 1000; ++frame) {
        std::vector<BBox> dets, tracks;
        const int nd = count(rng), nt = count(rng);
        for (int i = 0; i < nt; ++i) tracks.push_back(random_box(rng));
        for (int i = 0; i < nd; ++i) dets.push_back(random_box(rng));
        GateConfig cfg;
        cfg.theta_iou = th(rng);
        cfg.ars_enabled = ars(rng);
        const auto labels = selectrack::classify(dets, tracks, cfg);
        const auto otracks = obs(tracks);
        for (int d = 0; d < nd; ++d) {
            const int expected = selectrack::oracle::brute_force_label(
                ob(dets[d]), otracks, cfg.theta_iou, cfg.ars_enabled, cfg.theta_alpha);
            const int got = labels[d].is_risky() ? -1 : static_cast<int>(labels[d].candidate());
            ASSERT_EQ(got, expected) << "frame " << frame << " det " << d;
        }
    }
}

TEST(ClassifyProperty, LowOverlapSoleCandidateAlwaysRisky) {
    std::mt19937_64 rng(12);
    GateConfig cfg;
    cfg.theta_iou = 0.0;
    cfg.theta_alpha = 0.6;
    int checked = 0;
    while (checked < 20000) {
        const BBox d = random_box(rng), t = random_box(rng);
        const double u = selectrack::iou(d, t);
        if (u <= 0.0 || u > 0.2) continue;
        ++checked;
        EXPECT_TRUE(selectrack::classify(std::vector<BBox>{d}, std::vector<BBox>{t}, cfg)[0].is_risky());
    }
}

TEST(ClassifyProperty, CandidateSetShrinksWithThreshold) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        const BBox d = random_box(rng);
        std::vector<BBox> tracks;
        for (int i = 0; i < 15; ++i) tracks.push_back(random_box(rng));
        int prev = 1 << 30;
        for (int k = 0; k <= 10; ++k) {
            const double th = k / 10.0;
            int count = 0;
            for (const auto& t : tracks) count += selectrack::iou(d, t) > th ? 1 : 0;
            EXPECT_LE(count, prev);
            prev = count;
        }
    }
}

TEST(BaseGate, SaturatesNonRiskyOnly) {
    GateConfig cfg;
    cfg.mode = ExtractionMode::base_gate;
    const std::vector<RiskLabel> labels{RiskLabel::non_risky(2), RiskLabel::risky()};
    EXPECT_EQ(selectrack::base_gate_labels(labels, cfg), (std::vector<bool>{true, false}));
    const std::vector<RiskLabel> all_risky{RiskLabel::risky(), RiskLabel::risky()};
    EXPECT_EQ(selectrack::base_gate_labels(all_risky, cfg), (std::vector<bool>{false, false}));
}

TEST(BaseGate, RejectedOutsideBaseGateMode) {
    const std::vector<RiskLabel> labels{RiskLabel::risky()};
    EXPECT_THROW(selectrack::base_gate_labels(labels, GateConfig{}), std::logic_error);
}

TEST(Mode, ParseAndPrint) {
    EXPECT_EQ(selectrack::parse_extraction_mode("always"), ExtractionMode::always_extract);
    EXPECT_EQ(selectrack::parse_extraction_mode("base"), ExtractionMode::base_gate);
    EXPECT_EQ(selectrack::to_string(ExtractionMode::selective), "selective");
    EXPECT_THROW(selectrack::parse_extraction_mode("sometimes"), std::invalid_argument);
}
