#include "brlkit/anchors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace brlkit {

std::string to_string(AnchorClass cls) {
    switch (cls) {
        case AnchorClass::positive: return "positive";
        case AnchorClass::negative: return "negative";
        case AnchorClass::confusion: return "confusion";
        case AnchorClass::ignored: return "ignored";
    }
    throw std::invalid_argument("unknown anchor class");
}

void AssignmentConfig::validate() const {
    const bool ok = std::isfinite(pos_iou) && std::isfinite(neg_hi) &&
                    std::isfinite(confusion_iou) && confusion_iou >= 0.0 &&
                    confusion_iou < neg_hi && neg_hi < pos_iou && pos_iou <= 1.0;
    if (!ok) {
        throw std::invalid_argument(
            "AssignmentConfig: requires 0 <= confusion_iou < neg_hi < pos_iou <= 1");
    }
}

std::vector<Box> generate_anchors(int rows, int cols,
                                  const std::vector<double>& scales,
                                  const std::vector<double>& ratios,
                                  double image_width, double image_height) {
    if (rows <= 0 || cols <= 0) {
        throw std::invalid_argument("generate_anchors: grid dims must be positive");
    }
    if (scales.empty() || ratios.empty()) {
        throw std::invalid_argument("generate_anchors: scales and ratios required");
    }
    if (!(image_width > 0.0) || !(image_height > 0.0)) {
        throw std::invalid_argument("generate_anchors: degenerate image size");
    }

    std::vector<Box> anchors;
    anchors.reserve(static_cast<std::size_t>(rows) * cols * scales.size() *
                    ratios.size());
    const double cell_w = image_width / cols;
    const double cell_h = image_height / rows;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double cx = (c + 0.5) * cell_w;
            const double cy = (r + 0.5) * cell_h;
            for (double s : scales) {
                for (double ar : ratios) {
                    const double w = s * std::sqrt(ar);
                    const double h = s / std::sqrt(ar);
                    Box b{cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0};
                    b.x1 = std::max(b.x1, 0.0);
                    b.y1 = std::max(b.y1, 0.0);
                    b.x2 = std::min(b.x2, image_width);
                    b.y2 = std::min(b.y2, image_height);
                    anchors.push_back(b);
                }
            }
        }
    }
    return anchors;
}

std::vector<Box> generate_anchors(const AnchorGridConfig& grid,
                                  double image_width, double image_height) {
    return generate_anchors(grid.rows, grid.cols, grid.scales, grid.ratios,
                            image_width, image_height);
}

std::vector<AnchorAssignment> assign(const std::vector<Box>& anchors,
                                     const std::vector<Box>& gts,
                                     const AssignmentConfig& cfg) {
    cfg.validate();
    if (anchors.empty()) {
        throw std::invalid_argument("assign: no anchors");
    }

    std::vector<AnchorAssignment> out;
    out.reserve(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        double best = 0.0;
        std::optional<std::size_t> best_gt;
        for (std::size_t j = 0; j < gts.size(); ++j) {
            const double v = iou(anchors[i], gts[j]);
            if (v > best) {  // strict: ties keep the lowest gt index
                best = v;
                best_gt = j;
            }
        }

        AnchorAssignment a;
        a.anchor_index = i;
        a.max_iou = best;
        if (best > cfg.pos_iou) {
            a.cls = AnchorClass::positive;
            a.matched_gt = best_gt;
        } else if (best > cfg.neg_hi) {
            a.cls = AnchorClass::ignored;
        } else if (best >= cfg.confusion_iou || best == 0.0) {
            a.cls = AnchorClass::negative;
        } else {
            a.cls = AnchorClass::confusion;
        }
        out.push_back(a);
    }
    return out;
}

}  // namespace brlkit
