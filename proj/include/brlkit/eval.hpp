#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "brlkit/corpus.hpp"
#include "brlkit/geometry.hpp"

namespace brlkit {

struct Detection {
    std::string image_id;
    Box box;
    std::string category;
    double score = 0.0;
};

struct GroundTruth {
    std::string image_id;
    Box box;
    std::string category;
};

// TP/FP flags in descending-score order (ties keep insertion order);
// `order[i]` is the original index of the i-th ranked detection.
struct MatchResult {
    std::vector<std::size_t> order;
    std::vector<bool> tp;
};

struct PRCurve {
    std::vector<double> recall;     // non-decreasing
    std::vector<double> precision;  // in [0, 1]
};

struct APResult {
    // (category, iou threshold) -> AP; absent when undefined (no ground
    // truths and no detections for that class).
    std::map<std::pair<std::string, double>, double> per_class;
    // iou threshold -> mean AP over defined classes
    std::map<double, double> map_per_iou;
    double map50 = 0.0;
    double map75 = 0.0;
    double map_coco = 0.0;  // mean over IoU 0.5:0.05:0.95
};

// The ten COCO-style thresholds 0.5, 0.55, ..., 0.95.
std::vector<double> coco_iou_set();

// Greedy matching within one class: each detection, in score order, takes
// the unmatched ground truth of the same image with highest IoU >= iou_thr;
// later detections on an already-matched ground truth are false positives.
// All inputs must share one category.
MatchResult match_detections(const std::vector<Detection>& dets,
                             const std::vector<GroundTruth>& gts,
                             double iou_thr);

// Area under the precision-recall curve with monotone-decreasing precision
// interpolation. Empty optional when num_gt == 0 and there are no
// detections; 0 when num_gt == 0 but detections exist.
std::optional<double> average_precision(const std::vector<bool>& ranked_tp,
                                        std::size_t num_gt);

PRCurve pr_curve(const std::vector<bool>& ranked_tp, std::size_t num_gt);

APResult evaluate(const std::vector<Detection>& dets,
                  const std::vector<GroundTruth>& gts,
                  const std::vector<double>& iou_set);

// Ground truths of a corpus: the non-erased annotations.
std::vector<GroundTruth> corpus_ground_truths(const Corpus& corpus);

// Detections file: one line per detection,
// "image_id category score x1 y1 x2 y2".
std::vector<Detection> load_detections(const std::string& path);
void save_detections(const std::vector<Detection>& dets,
                     const std::string& path);

std::string ap_result_csv(const APResult& res);
std::string per_iou_tsv(const APResult& res);

}  // namespace brlkit
