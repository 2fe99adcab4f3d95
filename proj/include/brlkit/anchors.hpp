#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "brlkit/geometry.hpp"

namespace brlkit {

enum class AnchorClass { positive, negative, confusion, ignored };

std::string to_string(AnchorClass cls);

// IoU bands for anchor triage. Anchors in (neg_hi, pos_iou] are ignored;
// anchors in [confusion_iou, neg_hi] or with no overlap at all are negative;
// anchors in (0, confusion_iou) are confusion candidates.
struct AssignmentConfig {
    double pos_iou = 0.5;
    double neg_hi = 0.4;
    double confusion_iou = 0.1;

    void validate() const;
};

struct AnchorAssignment {
    std::size_t anchor_index = 0;
    AnchorClass cls = AnchorClass::negative;
    std::optional<std::size_t> matched_gt;
    double max_iou = 0.0;
};

struct AnchorGridConfig {
    int rows = 8;
    int cols = 8;
    std::vector<double> scales = {12.0, 24.0};
    std::vector<double> ratios = {1.0};
};

// Dense anchor grid, row-major over cells, then scale, then ratio. Anchor
// centers sit at cell centers; boxes are clipped to the image.
std::vector<Box> generate_anchors(int rows, int cols,
                                  const std::vector<double>& scales,
                                  const std::vector<double>& ratios,
                                  double image_width, double image_height);

std::vector<Box> generate_anchors(const AnchorGridConfig& grid,
                                  double image_width, double image_height);

// Classifies each anchor by its max IoU over all ground truths. With no
// ground truths every anchor is negative. Positive matches break ties toward
// the lowest ground-truth index.
std::vector<AnchorAssignment> assign(const std::vector<Box>& anchors,
                                     const std::vector<Box>& gts,
                                     const AssignmentConfig& cfg);

}  // namespace brlkit
