#include "brlkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace brlkit {

std::vector<double> coco_iou_set() {
    std::vector<double> out;
    for (int i = 0; i < 10; ++i) out.push_back(0.5 + 0.05 * i);
    return out;
}

MatchResult match_detections(const std::vector<Detection>& dets,
                             const std::vector<GroundTruth>& gts,
                             double iou_thr) {
    MatchResult res;
    res.order.resize(dets.size());
    std::iota(res.order.begin(), res.order.end(), std::size_t{0});
    std::stable_sort(res.order.begin(), res.order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return dets[a].score > dets[b].score;
                     });

    std::unordered_map<std::string, std::vector<std::size_t>> gts_by_image;
    for (std::size_t j = 0; j < gts.size(); ++j) {
        gts_by_image[gts[j].image_id].push_back(j);
    }
    std::vector<bool> gt_taken(gts.size(), false);

    res.tp.resize(dets.size(), false);
    for (std::size_t rank = 0; rank < res.order.size(); ++rank) {
        const Detection& d = dets[res.order[rank]];
        auto it = gts_by_image.find(d.image_id);
        if (it == gts_by_image.end()) continue;
        double best = iou_thr;
        std::size_t best_j = gts.size();
        for (std::size_t j : it->second) {
            if (gt_taken[j] || gts[j].category != d.category) continue;
            const double v = iou(d.box, gts[j].box);
            if (v >= best && (best_j == gts.size() || v > best)) {
                best = v;
                best_j = j;
            }
        }
        if (best_j != gts.size()) {
            gt_taken[best_j] = true;
            res.tp[rank] = true;
        }
    }
    return res;
}

PRCurve pr_curve(const std::vector<bool>& ranked_tp, std::size_t num_gt) {
    PRCurve c;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < ranked_tp.size(); ++i) {
        if (ranked_tp[i]) ++tp;
        c.precision.push_back(static_cast<double>(tp) / (i + 1));
        c.recall.push_back(num_gt == 0 ? 0.0
                                       : static_cast<double>(tp) / num_gt);
    }
    return c;
}

std::optional<double> average_precision(const std::vector<bool>& ranked_tp,
                                        std::size_t num_gt) {
    if (num_gt == 0) {
        if (ranked_tp.empty()) return std::nullopt;
        return 0.0;
    }
    PRCurve c = pr_curve(ranked_tp, num_gt);
    // monotone-decreasing interpolation, then area over all recall points
    for (std::size_t i = c.precision.size(); i-- > 1;) {
        c.precision[i - 1] = std::max(c.precision[i - 1], c.precision[i]);
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < c.recall.size(); ++i) {
        ap += (c.recall[i] - prev_recall) * c.precision[i];
        prev_recall = c.recall[i];
    }
    return ap;
}

APResult evaluate(const std::vector<Detection>& dets,
                  const std::vector<GroundTruth>& gts,
                  const std::vector<double>& iou_set) {
    if (gts.empty()) {
        throw std::invalid_argument("evaluate: empty ground truth set");
    }
    if (iou_set.empty()) {
        throw std::invalid_argument("evaluate: empty IoU set");
    }

    std::set<std::string> categories;
    std::unordered_map<std::string, std::vector<Detection>> dets_by_cat;
    std::unordered_map<std::string, std::vector<GroundTruth>> gts_by_cat;
    for (const auto& g : gts) {
        categories.insert(g.category);
        gts_by_cat[g.category].push_back(g);
    }
    for (const auto& d : dets) {
        categories.insert(d.category);
        dets_by_cat[d.category].push_back(d);
    }

    APResult res;
    for (double thr : iou_set) {
        double sum = 0.0;
        std::size_t defined = 0;
        for (const std::string& cat : categories) {
            const auto& cat_dets = dets_by_cat[cat];
            const auto& cat_gts = gts_by_cat[cat];
            const MatchResult m = match_detections(cat_dets, cat_gts, thr);
            const auto ap = average_precision(m.tp, cat_gts.size());
            if (!ap) continue;  // no gts and no dets: excluded from the mean
            res.per_class[{cat, thr}] = *ap;
            sum += *ap;
            ++defined;
        }
        res.map_per_iou[thr] = defined == 0 ? 0.0 : sum / defined;
    }

    auto lookup = [&](double thr) {
        for (const auto& [k, v] : res.map_per_iou) {
            if (std::abs(k - thr) < 1e-9) return v;
        }
        return 0.0;
    };
    res.map50 = lookup(0.5);
    res.map75 = lookup(0.75);

    double coco_sum = 0.0;
    std::size_t coco_n = 0;
    for (double thr : coco_iou_set()) {
        bool found = false;
        for (const auto& [k, v] : res.map_per_iou) {
            if (std::abs(k - thr) < 1e-9) {
                coco_sum += v;
                found = true;
                break;
            }
        }
        if (found) ++coco_n;
    }
    res.map_coco = coco_n == 0 ? 0.0 : coco_sum / coco_n;
    return res;
}

std::vector<GroundTruth> corpus_ground_truths(const Corpus& corpus) {
    std::vector<GroundTruth> out;
    for (const ImageRecord& rec : corpus) {
        for (const Annotation& a : rec.annotations) {
            if (a.erased) continue;
            out.push_back({rec.image_id, a.box, a.category});
        }
    }
    return out;
}

std::vector<Detection> load_detections(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<Detection> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        Detection d;
        if (!(ls >> d.image_id >> d.category >> d.score >> d.box.x1 >>
              d.box.y1 >> d.box.x2 >> d.box.y2)) {
            throw std::runtime_error("detections line " +
                                     std::to_string(lineno) + ": parse error");
        }
        check_box(d.box, "detection box");
        if (!std::isfinite(d.score)) {
            throw std::runtime_error("detections line " +
                                     std::to_string(lineno) +
                                     ": non-finite score");
        }
        out.push_back(std::move(d));
    }
    return out;
}

void save_detections(const std::vector<Detection>& dets,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.precision(17);
    for (const Detection& d : dets) {
        out << d.image_id << ' ' << d.category << ' ' << d.score << ' '
            << d.box.x1 << ' ' << d.box.y1 << ' ' << d.box.x2 << ' '
            << d.box.y2 << '\n';
    }
}

std::string ap_result_csv(const APResult& res) {
    std::ostringstream out;
    out.precision(17);
    out << "category,iou,ap\n";
    for (const auto& [key, ap] : res.per_class) {
        out << key.first << ',' << key.second << ',' << ap << '\n';
    }
    out << "mAP50,," << res.map50 << '\n';
    out << "mAP75,," << res.map75 << '\n';
    out << "mAP_coco,," << res.map_coco << '\n';
    return out.str();
}

std::string per_iou_tsv(const APResult& res) {
    std::ostringstream out;
    out.precision(17);
    out << "iou\tmAP\n";
    for (const auto& [thr, v] : res.map_per_iou) {
        out << thr << '\t' << v << '\n';
    }
    return out.str();
}

}  // namespace brlkit
