#pragma once

#include <cstddef>
#include <vector>

#include "brlkit/anchors.hpp"

namespace brlkit {

// Probabilities are clamped away from {0, 1} before any log is taken.
inline constexpr double kProbEps = 1e-7;

struct LossConfig {
    double alpha_t = 0.5;           // loss scale, in (0, 1]
    double gamma = 2.0;             // focusing exponent, >= 0
    double recalib_t = 0.5;         // recalibration threshold, in [0, 1)
    double confusion_weight = 0.1;  // multiplier on confusion-anchor loss, in [0, 1]

    void validate() const;
};

// Confidence in the assigned class: the foreground probability p for a
// positive anchor, 1 - p for a negative or confusion anchor. Construction
// clamps into [kProbEps, 1 - kProbEps] and rejects non-finite input.
class AnchorProbability {
  public:
    explicit AnchorProbability(double p_t);

    static AnchorProbability from_foreground(double p, AnchorClass cls);

    double value() const { return value_; }

  private:
    double value_;
};

// Branch selection for the gradient at the recalibration breakpoint.
enum class BranchSide { focal, mirrored };

double focal_loss(AnchorProbability p_t, const LossConfig& cfg);
double focal_grad(AnchorProbability p_t, const LossConfig& cfg);

double brl_loss(AnchorProbability p_t, const LossConfig& cfg);

// Throws std::domain_error at p_t == recalib_t; the loss there is one-sided.
double brl_grad(AnchorProbability p_t, const LossConfig& cfg);
// One-sided derivative at (or near) the breakpoint.
double brl_grad(AnchorProbability p_t, const LossConfig& cfg, BranchSide side);

// Size of the discontinuity of brl_loss at p_t = recalib_t:
// alpha_t * [t^gamma ln(1/(1-t)) - (1-t)^gamma ln(1/t)]. Zero iff t is 0 or 0.5.
double brl_jump(const LossConfig& cfg);

struct BatchLossResult {
    double total = 0.0;
    double positive_loss = 0.0;
    double negative_loss = 0.0;
    double confusion_loss = 0.0;
    std::size_t positive_count = 0;
    // d(total)/d(foreground probability), one entry per anchor; zero for
    // ignored anchors.
    std::vector<double> grad;
};

// Applies FL to positive and negative anchors and confusion_weight * BRL to
// confusion anchors. `foreground_probs[i]` pairs with the assignment whose
// anchor_index is i. The total is an unnormalized sum; callers typically
// divide by max(1, positive_count).
BatchLossResult batch_loss(const std::vector<double>& foreground_probs,
                           const std::vector<AnchorAssignment>& assignments,
                           const LossConfig& cfg);

}  // namespace brlkit
