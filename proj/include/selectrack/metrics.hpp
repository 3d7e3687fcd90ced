#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "selectrack/tracker.hpp"

namespace selectrack::metrics {

/// Percentage of high-confidence detections whose feature was extracted;
/// nullopt when there were no such detections.
std::optional<double> pde(const RunStats& stats);

struct IdentityScore {
    double idf1 = 0.0;
    long idtp = 0;
    long idfp = 0;
    long idfn = 0;
};

/// Identity F1 between ground truth and predictions.
///
/// A ground-truth row and a predicted row in the same frame are a potential
/// match when their IoU is >= iou_match. Identities are then paired one to
/// one so that the number of matched rows (IDTP) is maximal; every other
/// ground-truth row is an IDFN and every other predicted row an IDFP.
/// Both inputs empty give idf1 = 1.
IdentityScore idf1(const TrackOutput& ground_truth, const TrackOutput& predicted, double iou_match = 0.5);

/// Number of times a ground-truth identity is matched to a different
/// predicted id than the one it was last matched to. Per frame, existing
/// correspondences are kept while their IoU stays >= iou_match; remaining
/// rows are paired by minimum (1 - IoU).
int id_switches(const TrackOutput& ground_truth, const TrackOutput& predicted, double iou_match = 0.5);

/// Throws std::invalid_argument when the prediction covers frames outside
/// the ground truth's [first, last] frame range.
void check_frame_domain(const TrackOutput& ground_truth, const TrackOutput& predicted);

struct EvalReport {
    std::optional<double> pde;
    double idf1 = 0.0;
    int id_switches = 0;
    long idtp = 0;
    long idfp = 0;
    long idfn = 0;
    std::optional<std::size_t> fetches;
    std::optional<std::size_t> detections;
};

EvalReport evaluate(const TrackOutput& ground_truth, const TrackOutput& predicted, double iou_match = 0.5);

/// Aligned two-column table.
std::string format_table(const EvalReport& report);
/// key=value lines: pde, idf1, id_switches, idtp, idfp, idfn, fetches,
/// detections. Missing values print as n/a.
std::string format_kv(const EvalReport& report);

}  // namespace selectrack::metrics
