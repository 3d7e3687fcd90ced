#include "selectrack/tracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "selectrack/assignment.hpp"

namespace selectrack {

std::string_view to_string(MatchStrategy strategy) {
    return strategy == MatchStrategy::cascade ? "cascade" : "fused";
}

MatchStrategy parse_match_strategy(std::string_view text) {
    if (text == "cascade") return MatchStrategy::cascade;
    if (text == "fused") return MatchStrategy::fused;
    throw std::invalid_argument("unknown match strategy '" + std::string(text) +
                                "' (expected cascade or fused)");
}

std::string_view to_string(OutputBox box) { return box == OutputBox::kalman ? "kalman" : "detection"; }

OutputBox parse_output_box(std::string_view text) {
    if (text == "kalman") return OutputBox::kalman;
    if (text == "detection") return OutputBox::detection;
    throw std::invalid_argument("unknown output box '" + std::string(text) +
                                "' (expected kalman or detection)");
}

MatchConfig MatchConfig::for_strategy(MatchStrategy strategy) {
    MatchConfig c;
    c.strategy = strategy;
    c.byte_low = strategy == MatchStrategy::fused;
    return c;
}

void MatchConfig::validate() const {
    auto fail = [](const char* msg) { throw std::invalid_argument(std::string("MatchConfig: ") + msg); };
    if (!(appearance_gate >= 0.0 && appearance_gate <= kMaxCosineDistance))
        fail("appearance_gate must lie in [0, 2]");
    if (!(iou_gate >= 0.0 && iou_gate <= 1.0)) fail("iou_gate must lie in [0, 1]");
    if (!(fused_weight >= 0.0) || !std::isfinite(fused_weight)) fail("fused_weight must be >= 0");
    if (!std::isfinite(conf_high)) fail("conf_high must be finite");
    if (min_hits < 1) fail("min_hits must be >= 1");
    if (max_age < 1) fail("max_age must be >= 1");
    if (!(ema_alpha > 0.0 && ema_alpha < 1.0)) fail("ema_alpha must lie in (0, 1)");
}

void FeatureTable::insert(int frame, std::size_t index, FeatureVector feature) {
    const auto [it, inserted] = table_.emplace(std::make_pair(frame, index), std::move(feature));
    if (!inserted) {
        throw std::invalid_argument("FeatureTable: duplicate feature for frame " + std::to_string(frame) +
                                    " index " + std::to_string(index));
    }
}

std::optional<FeatureVector> FeatureTable::fetch(int frame, std::size_t index) const {
    const auto it = table_.find({frame, index});
    if (it == table_.end()) return std::nullopt;
    return it->second;
}

FeatureTable attached_features(const DetectionsByFrame& detections) {
    FeatureTable table;
    for (const auto& [frame, dets] : detections) {
        for (const auto& d : dets) {
            if (d.feature) table.insert(frame, d.index, *d.feature);
        }
    }
    return table;
}

std::optional<double> RunStats::pde() const {
    if (detections == 0) return std::nullopt;
    return 100.0 * static_cast<double>(fetches) / static_cast<double>(detections);
}

Tracker::Tracker(GateConfig gate, MatchConfig match, MotionConfig motion)
    : gate_(gate), match_(match), filter_(motion) {
    gate_.validate();
    match_.validate();
}

namespace {

struct HighDetection {
    std::size_t input = 0;  // position in the frame's detection span
    std::optional<FeatureVector> fresh;
    std::optional<std::size_t> copy_from;  // track slot
    bool saturated = false;
    bool fetched = false;
};

double iou_cost(const BBox& track, const BBox& det, double iou_gate) {
    const double u = iou(track, det);
    return u >= iou_gate ? 1.0 - u : kInfeasible;
}

}  // namespace

TrackOutput Tracker::step(int frame, std::span<const Detection> detections, const FeatureProvider& provider,
                          std::vector<DetectionDecision>* decisions) {
    if (last_frame_ && frame <= *last_frame_) {
        throw std::invalid_argument("Tracker::step: frame " + std::to_string(frame) +
                                    " does not follow frame " + std::to_string(*last_frame_));
    }
    for (const auto& d : detections) {
        require_valid(d.box, "detection");
        if (!std::isfinite(d.confidence)) {
            throw std::invalid_argument("Tracker::step: non-finite detection confidence");
        }
    }

    std::vector<Track> tracks = tracks_;
    int next_id = next_id_;
    std::size_t fetches = 0;

    // 1. Predict. A track whose prediction degenerates cannot be matched.
    std::vector<std::optional<BBox>> predicted(tracks.size());
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        tracks[t].kalman = filter_.predict(tracks[t].kalman);
        ++tracks[t].age;
        const double a = tracks[t].kalman.mean(2), h = tracks[t].kalman.mean(3);
        if (a > 0.0 && h > 0.0 && std::isfinite(a) && std::isfinite(h)) {
            predicted[t] = state_to_box(tracks[t].kalman);
        } else {
            tracks[t].status = TrackStatus::deleted;
        }
    }
    auto live = [&](std::size_t t) { return predicted[t].has_value(); };

    // 2. Confidence split.
    std::vector<HighDetection> high;
    std::vector<std::size_t> low;
    for (std::size_t i = 0; i < detections.size(); ++i) {
        if (detections[i].confidence >= match_.conf_high) {
            high.emplace_back().input = i;
        } else {
            low.push_back(i);
        }
    }

    // 3. Risk classification against confirmed tracks.
    std::vector<std::size_t> confirmed;
    std::vector<BBox> confirmed_boxes;
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        if (live(t) && tracks[t].status == TrackStatus::confirmed) {
            confirmed.push_back(t);
            confirmed_boxes.push_back(*predicted[t]);
        }
    }
    std::vector<BBox> high_boxes;
    for (const auto& hd : high) high_boxes.push_back(detections[hd.input].box);
    const std::vector<RiskLabel> labels = classify(high_boxes, confirmed_boxes, gate_);

    // 4. Selective extraction.
    for (std::size_t j = 0; j < high.size(); ++j) {
        auto& hd = high[j];
        if (labels[j].is_risky()) {
            hd.fresh = provider.fetch(frame, detections[hd.input].index);
            hd.fetched = true;
            ++fetches;
            continue;
        }
        const std::size_t slot = confirmed[labels[j].candidate()];
        if (gate_.mode == ExtractionMode::base_gate) {
            hd.saturated = true;
        } else if (tracks[slot].ema) {
            hd.copy_from = slot;
        }
    }

    // 5. Association.
    std::vector<std::optional<std::size_t>> match_of_high(high.size());
    std::vector<char> track_matched(tracks.size(), 0);
    auto record = [&](std::size_t t, std::size_t j) {
        match_of_high[j] = t;
        track_matched[t] = 1;
    };

    auto iou_stage = [&](const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols,
                         auto&& box_of_col, auto&& on_match) {
        if (rows.empty() || cols.empty()) return;
        CostMatrix m(rows.size(), cols.size());
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < cols.size(); ++c)
                m.set(r, c, iou_cost(*predicted[rows[r]], box_of_col(cols[c]), match_.iou_gate));
        for (const auto& [r, c] : solve(m, 1.0 - match_.iou_gate).matches) on_match(rows[r], cols[c]);
    };

    if (match_.strategy == MatchStrategy::cascade) {
        std::vector<std::size_t> rows;
        std::vector<FeatureVector> embeddings;
        std::vector<std::size_t> row_of_slot(tracks.size(), tracks.size());
        for (std::size_t t : confirmed) {
            if (!tracks[t].ema) continue;
            row_of_slot[t] = rows.size();
            rows.push_back(t);
            embeddings.push_back(tracks[t].ema->embedding());
        }
        std::vector<std::size_t> cols;
        std::vector<std::optional<FeatureVector>> col_features;
        std::map<std::size_t, std::size_t> copies;
        for (std::size_t j = 0; j < high.size(); ++j) {
            const auto& hd = high[j];
            if (hd.saturated) continue;
            if (hd.copy_from) {
                copies[cols.size()] = row_of_slot[*hd.copy_from];
                col_features.emplace_back(std::nullopt);
            } else if (hd.fresh) {
                col_features.push_back(hd.fresh);
            } else {
                continue;
            }
            cols.push_back(j);
        }
        if (!rows.empty() && !cols.empty()) {
            const CostMatrix m = appearance_cost_matrix(std::span<const FeatureVector>(embeddings),
                                                        col_features, copies);
            for (const auto& [r, c] : solve(m, match_.appearance_gate).matches) record(rows[r], cols[c]);
        }

        std::vector<std::size_t> rest_rows, rest_cols;
        for (std::size_t t = 0; t < tracks.size(); ++t)
            if (live(t) && !track_matched[t]) rest_rows.push_back(t);
        for (std::size_t j = 0; j < high.size(); ++j)
            if (!match_of_high[j]) rest_cols.push_back(j);
        iou_stage(rest_rows, rest_cols, [&](std::size_t j) { return detections[high[j].input].box; }, record);
    } else {
        std::vector<std::size_t> rows;
        for (std::size_t t = 0; t < tracks.size(); ++t)
            if (live(t)) rows.push_back(t);
        if (!rows.empty() && !high.empty()) {
            CostMatrix m(rows.size(), high.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                const Track& tr = tracks[rows[r]];
                for (std::size_t j = 0; j < high.size(); ++j) {
                    const auto& hd = high[j];
                    const double geo = iou_cost(*predicted[rows[r]], detections[hd.input].box, match_.iou_gate);
                    if (!std::isfinite(geo)) {
                        m.set(r, j, kInfeasible);
                        continue;
                    }
                    double app = 0.0;
                    if (hd.saturated) {
                        app = kMaxCosineDistance;
                    } else if (hd.copy_from) {
                        app = rows[r] == *hd.copy_from || !tr.ema
                                  ? 0.0
                                  : cosine_distance(tr.ema->embedding(), tracks[*hd.copy_from].ema->embedding());
                    } else if (hd.fresh && tr.ema) {
                        app = cosine_distance(tr.ema->embedding(), *hd.fresh);
                    }
                    m.set(r, j, match_.fused_weight * app + geo);
                }
            }
            const double gate = match_.fused_weight * kMaxCosineDistance + 1.0;
            for (const auto& [r, c] : solve(m, gate).matches) record(rows[r], c);
        }
    }

    std::vector<std::optional<std::size_t>> match_of_low(low.size());
    if (match_.byte_low) {
        std::vector<std::size_t> rows, cols;
        for (std::size_t t = 0; t < tracks.size(); ++t)
            if (live(t) && !track_matched[t] && tracks[t].status == TrackStatus::confirmed) rows.push_back(t);
        for (std::size_t k = 0; k < low.size(); ++k) cols.push_back(k);
        iou_stage(rows, cols, [&](std::size_t k) { return detections[low[k]].box; },
                  [&](std::size_t t, std::size_t k) {
                      match_of_low[k] = t;
                      track_matched[t] = 1;
                  });
    }

    // 6. Track updates.
    auto apply_match = [&](Track& tr, const BBox& box, const std::optional<FeatureVector>& fresh) {
        tr.kalman = filter_.update(tr.kalman, box);
        ++tr.hits;
        tr.time_since_update = 0;
        if (tr.status == TrackStatus::tentative && tr.hits >= match_.min_hits) {
            tr.status = TrackStatus::confirmed;
        }
        if (fresh) {
            if (!tr.ema) {
                tr.ema = init_ema(*fresh, match_.ema_alpha);
            } else {
                try {
                    tr.ema = ema_update(*tr.ema, *fresh);
                } catch (const std::domain_error&) {
                    tr.ema = mark_skipped(*tr.ema);
                }
            }
        } else if (tr.ema) {
            tr.ema = mark_skipped(*tr.ema);
        }
    };

    std::vector<std::optional<BBox>> emitted_det_box(tracks.size());
    for (std::size_t j = 0; j < high.size(); ++j) {
        if (!match_of_high[j]) continue;
        const std::size_t t = *match_of_high[j];
        const BBox& box = detections[high[j].input].box;
        apply_match(tracks[t], box, high[j].fresh);
        emitted_det_box[t] = box;
    }
    for (std::size_t k = 0; k < low.size(); ++k) {
        if (!match_of_low[k]) continue;
        const std::size_t t = *match_of_low[k];
        const BBox& box = detections[low[k]].box;
        apply_match(tracks[t], box, std::nullopt);
        emitted_det_box[t] = box;
    }
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        if (track_matched[t] || tracks[t].status == TrackStatus::deleted) continue;
        ++tracks[t].time_since_update;
        if (tracks[t].ema) tracks[t].ema = mark_skipped(*tracks[t].ema);
        if (tracks[t].time_since_update > match_.max_age) tracks[t].status = TrackStatus::deleted;
    }

    // 7. Births. Features are fetched at birth when not already extracted.
    std::vector<std::optional<int>> birth_id(high.size());
    for (std::size_t j = 0; j < high.size(); ++j) {
        if (match_of_high[j]) continue;
        auto& hd = high[j];
        const Detection& det = detections[hd.input];
        if (!hd.fetched) {
            hd.fresh = provider.fetch(frame, det.index);
            hd.fetched = true;
            ++fetches;
        }
        Track tr;
        tr.id = next_id++;
        tr.kalman = filter_.initiate(det.box);
        if (hd.fresh) tr.ema = init_ema(*hd.fresh, match_.ema_alpha);
        tr.hits = 1;
        tr.age = 1;
        tr.status = tr.hits >= match_.min_hits ? TrackStatus::confirmed : TrackStatus::tentative;
        birth_id[j] = tr.id;
        tracks.push_back(std::move(tr));
        emitted_det_box.emplace_back(det.box);
    }

    // 8. Output rows for confirmed tracks updated in this frame.
    TrackOutput rows;
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        const Track& tr = tracks[t];
        if (tr.status != TrackStatus::confirmed || tr.time_since_update != 0) continue;
        const BBox box = match_.output == OutputBox::kalman ? state_to_box(tr.kalman) : *emitted_det_box[t];
        rows.push_back({frame, tr.id, box});
    }
    std::sort(rows.begin(), rows.end(), [](const TrackRow& a, const TrackRow& b) { return a.id < b.id; });

    if (decisions) {
        decisions->assign(detections.size(), DetectionDecision{});
        for (std::size_t i = 0; i < detections.size(); ++i) (*decisions)[i].index = detections[i].index;
        for (std::size_t j = 0; j < high.size(); ++j) {
            auto& d = (*decisions)[high[j].input];
            d.high_confidence = true;
            d.risky = labels[j].is_risky();
            if (!d.risky) d.candidate_id = tracks[confirmed[labels[j].candidate()]].id;
            d.fetched = high[j].fetched;
            d.track_id = match_of_high[j] ? std::optional<int>(tracks[*match_of_high[j]].id) : birth_id[j];
        }
        for (std::size_t k = 0; k < low.size(); ++k) {
            if (match_of_low[k]) (*decisions)[low[k]].track_id = tracks[*match_of_low[k]].id;
        }
    }

    std::erase_if(tracks, [](const Track& tr) { return tr.status == TrackStatus::deleted; });

    tracks_ = std::move(tracks);
    next_id_ = next_id;
    last_frame_ = frame;
    fetches_ += fetches;
    high_conf_seen_ += high.size();
    detections_seen_ += detections.size();
    return rows;
}

SequenceResult run_sequence(const DetectionsByFrame& detections, const FeatureProvider& provider,
                            const GateConfig& gate, const MatchConfig& match, const MotionConfig& motion) {
    SequenceResult result;
    if (detections.empty()) return result;

    Tracker tracker(gate, match, motion);
    const CountingProvider counter(provider);
    const int first = detections.begin()->first;
    const int last = detections.rbegin()->first;
    const std::vector<Detection> none;

    for (int frame = first; frame <= last; ++frame) {
        const auto it = detections.find(frame);
        const std::vector<Detection>& dets = it == detections.end() ? none : it->second;
        const auto start = std::chrono::steady_clock::now();
        TrackOutput rows = tracker.step(frame, dets, counter);
        const auto stop = std::chrono::steady_clock::now();
        result.stats.frame_millis.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
        result.output.insert(result.output.end(), rows.begin(), rows.end());
        ++result.stats.frames;
    }

    result.stats.fetches = tracker.fetches();
    result.stats.detections = tracker.high_confidence_detections();
    result.stats.total_detections = tracker.detections_seen();
    if (result.stats.fetches != counter.count()) {
        throw std::logic_error("run_sequence: fetch bookkeeping disagrees with provider counter");
    }
    return result;
}

}  // namespace selectrack
