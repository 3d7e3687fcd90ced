#include "selectrack/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "selectrack/assignment.hpp"

namespace selectrack::metrics {

namespace {

using FrameRows = std::map<int, std::vector<const TrackRow*>>;

FrameRows by_frame(const TrackOutput& rows) {
    FrameRows out;
    for (const auto& r : rows) out[r.frame].push_back(&r);
    return out;
}

std::string fmt_opt(const std::optional<double>& v, int digits) {
    return v ? fmt::format("{:.{}f}", *v, digits) : std::string("n/a");
}

template <typename T>
std::string fmt_opt(const std::optional<T>& v) {
    return v ? fmt::format("{}", *v) : std::string("n/a");
}

}  // namespace

std::optional<double> pde(const RunStats& stats) { return stats.pde(); }

IdentityScore idf1(const TrackOutput& ground_truth, const TrackOutput& predicted, double iou_match) {
    IdentityScore score;
    if (ground_truth.empty() && predicted.empty()) {
        score.idf1 = 1.0;
        return score;
    }

    std::map<int, std::size_t> gt_slot, pred_slot;
    for (const auto& r : ground_truth) gt_slot.emplace(r.id, gt_slot.size());
    for (const auto& r : predicted) pred_slot.emplace(r.id, pred_slot.size());

    std::vector<long> overlap(gt_slot.size() * pred_slot.size(), 0);
    const FrameRows gt_frames = by_frame(ground_truth);
    const FrameRows pred_frames = by_frame(predicted);
    for (const auto& [frame, gts] : gt_frames) {
        const auto it = pred_frames.find(frame);
        if (it == pred_frames.end()) continue;
        for (const TrackRow* g : gts) {
            for (const TrackRow* p : it->second) {
                if (iou(g->box, p->box) >= iou_match) {
                    ++overlap[gt_slot.at(g->id) * pred_slot.size() + pred_slot.at(p->id)];
                }
            }
        }
    }

    // Maximise total overlap: cost -overlap, pairs without overlap excluded.
    CostMatrix costs(gt_slot.size(), pred_slot.size());
    for (std::size_t g = 0; g < gt_slot.size(); ++g) {
        for (std::size_t p = 0; p < pred_slot.size(); ++p) {
            const long m = overlap[g * pred_slot.size() + p];
            costs.set(g, p, m > 0 ? -static_cast<double>(m) : kInfeasible);
        }
    }
    for (const auto& [g, p] : solve(costs, 0.0).matches) score.idtp += overlap[g * pred_slot.size() + p];

    score.idfn = static_cast<long>(ground_truth.size()) - score.idtp;
    score.idfp = static_cast<long>(predicted.size()) - score.idtp;
    score.idf1 = 2.0 * static_cast<double>(score.idtp) /
                 static_cast<double>(2 * score.idtp + score.idfp + score.idfn);
    return score;
}

int id_switches(const TrackOutput& ground_truth, const TrackOutput& predicted, double iou_match) {
    const FrameRows gt_frames = by_frame(ground_truth);
    const FrameRows pred_frames = by_frame(predicted);
    std::map<int, int> last_match;  // gt id -> pred id
    int switches = 0;

    for (const auto& [frame, gts] : gt_frames) {
        const auto it = pred_frames.find(frame);
        if (it == pred_frames.end()) continue;
        const auto& preds = it->second;

        std::vector<char> gt_done(gts.size(), 0), pred_done(preds.size(), 0);
        std::vector<std::pair<std::size_t, std::size_t>> matches;

        for (std::size_t g = 0; g < gts.size(); ++g) {
            const auto prev = last_match.find(gts[g]->id);
            if (prev == last_match.end()) continue;
            for (std::size_t p = 0; p < preds.size(); ++p) {
                if (pred_done[p] || preds[p]->id != prev->second) continue;
                if (iou(gts[g]->box, preds[p]->box) >= iou_match) {
                    matches.emplace_back(g, p);
                    gt_done[g] = pred_done[p] = 1;
                }
                break;
            }
        }

        std::vector<std::size_t> rows, cols;
        for (std::size_t g = 0; g < gts.size(); ++g)
            if (!gt_done[g]) rows.push_back(g);
        for (std::size_t p = 0; p < preds.size(); ++p)
            if (!pred_done[p]) cols.push_back(p);
        if (!rows.empty() && !cols.empty()) {
            CostMatrix costs(rows.size(), cols.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                for (std::size_t c = 0; c < cols.size(); ++c) {
                    const double u = iou(gts[rows[r]]->box, preds[cols[c]]->box);
                    costs.set(r, c, u >= iou_match ? 1.0 - u : kInfeasible);
                }
            }
            for (const auto& [r, c] : solve(costs, 1.0 - iou_match).matches) matches.emplace_back(rows[r], cols[c]);
        }

        for (const auto& [g, p] : matches) {
            const int gid = gts[g]->id, pid = preds[p]->id;
            const auto prev = last_match.find(gid);
            if (prev != last_match.end() && prev->second != pid) ++switches;
            last_match[gid] = pid;
        }
    }
    return switches;
}

void check_frame_domain(const TrackOutput& ground_truth, const TrackOutput& predicted) {
    if (predicted.empty()) return;
    const auto [pmin, pmax] = std::minmax_element(
        predicted.begin(), predicted.end(), [](const TrackRow& a, const TrackRow& b) { return a.frame < b.frame; });
    if (ground_truth.empty()) {
        throw std::invalid_argument("frame domain mismatch: ground truth is empty but predictions are not");
    }
    const auto [gmin, gmax] = std::minmax_element(
        ground_truth.begin(), ground_truth.end(), [](const TrackRow& a, const TrackRow& b) { return a.frame < b.frame; });
    if (pmin->frame < gmin->frame || pmax->frame > gmax->frame) {
        throw std::invalid_argument(fmt::format("frame domain mismatch: predictions span frames {}-{}, "
                                                "ground truth spans {}-{}",
                                                pmin->frame, pmax->frame, gmin->frame, gmax->frame));
    }
}

EvalReport evaluate(const TrackOutput& ground_truth, const TrackOutput& predicted, double iou_match) {
    const IdentityScore s = idf1(ground_truth, predicted, iou_match);
    EvalReport r;
    r.idf1 = s.idf1;
    r.idtp = s.idtp;
    r.idfp = s.idfp;
    r.idfn = s.idfn;
    r.id_switches = id_switches(ground_truth, predicted, iou_match);
    return r;
}

std::string format_table(const EvalReport& r) {
    std::string out;
    auto row = [&](std::string_view key, const std::string& value) {
        fmt::format_to(std::back_inserter(out), "{:<12} {:>10}\n", key, value);
    };
    row("PDE (%)", fmt_opt(r.pde, 2));
    row("IDF1 (%)", fmt::format("{:.2f}", 100.0 * r.idf1));
    row("IDsw", fmt::format("{}", r.id_switches));
    row("IDTP", fmt::format("{}", r.idtp));
    row("IDFP", fmt::format("{}", r.idfp));
    row("IDFN", fmt::format("{}", r.idfn));
    row("fetches", fmt_opt(r.fetches));
    row("detections", fmt_opt(r.detections));
    return out;
}

std::string format_kv(const EvalReport& r) {
    std::string out;
    fmt::format_to(std::back_inserter(out), "pde={}\n", fmt_opt(r.pde, 6));
    fmt::format_to(std::back_inserter(out), "idf1={:.6f}\n", r.idf1);
    fmt::format_to(std::back_inserter(out), "id_switches={}\n", r.id_switches);
    fmt::format_to(std::back_inserter(out), "idtp={}\nidfp={}\nidfn={}\n", r.idtp, r.idfp, r.idfn);
    fmt::format_to(std::back_inserter(out), "fetches={}\n", fmt_opt(r.fetches));
    fmt::format_to(std::back_inserter(out), "detections={}\n", fmt_opt(r.detections));
    return out;
}

}  // namespace selectrack::metrics
