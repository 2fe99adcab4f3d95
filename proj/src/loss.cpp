#include "brlkit/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace brlkit {

void LossConfig::validate() const {
    const bool ok = std::isfinite(alpha_t) && alpha_t > 0.0 && alpha_t <= 1.0 &&
                    std::isfinite(gamma) && gamma >= 0.0 &&
                    std::isfinite(recalib_t) && recalib_t >= 0.0 &&
                    recalib_t < 1.0 && std::isfinite(confusion_weight) &&
                    confusion_weight >= 0.0 && confusion_weight <= 1.0;
    if (!ok) throw std::invalid_argument("LossConfig: field out of range");
}

AnchorProbability::AnchorProbability(double p_t) {
    if (!std::isfinite(p_t)) {
        throw std::domain_error("AnchorProbability: non-finite value");
    }
    value_ = std::min(std::max(p_t, kProbEps), 1.0 - kProbEps);
}

AnchorProbability AnchorProbability::from_foreground(double p, AnchorClass cls) {
    if (!std::isfinite(p)) {
        throw std::domain_error("AnchorProbability: non-finite foreground score");
    }
    return AnchorProbability(cls == AnchorClass::positive ? p : 1.0 - p);
}

namespace {

// -alpha (1-p)^g log(p) and its derivative in p.
double fl_value(double p, double alpha, double gamma) {
    return -alpha * std::pow(1.0 - p, gamma) * std::log(p);
}

double fl_deriv(double p, double alpha, double gamma) {
    double d = -alpha * std::pow(1.0 - p, gamma) / p;
    if (gamma > 0.0) {
        d += alpha * gamma * std::pow(1.0 - p, gamma - 1.0) * std::log(p);
    }
    return d;
}

// Mirrored branch: -alpha p^g log(1-p).
double mirror_value(double p, double alpha, double gamma) {
    return -alpha * std::pow(p, gamma) * std::log(1.0 - p);
}

double mirror_deriv(double p, double alpha, double gamma) {
    double d = alpha * std::pow(p, gamma) / (1.0 - p);
    if (gamma > 0.0) {
        d -= alpha * gamma * std::pow(p, gamma - 1.0) * std::log(1.0 - p);
    }
    return d;
}

}  // namespace

double focal_loss(AnchorProbability p_t, const LossConfig& cfg) {
    cfg.validate();
    return fl_value(p_t.value(), cfg.alpha_t, cfg.gamma);
}

double focal_grad(AnchorProbability p_t, const LossConfig& cfg) {
    cfg.validate();
    return fl_deriv(p_t.value(), cfg.alpha_t, cfg.gamma);
}

double brl_loss(AnchorProbability p_t, const LossConfig& cfg) {
    cfg.validate();
    const double p = p_t.value();
    // The breakpoint itself takes the focal branch.
    if (p >= cfg.recalib_t) return fl_value(p, cfg.alpha_t, cfg.gamma);
    return mirror_value(p, cfg.alpha_t, cfg.gamma);
}

double brl_grad(AnchorProbability p_t, const LossConfig& cfg) {
    cfg.validate();
    const double p = p_t.value();
    if (p == cfg.recalib_t) {
        throw std::domain_error(
            "brl_grad: one-sided derivative at the breakpoint; pass a "
            "BranchSide");
    }
    return p > cfg.recalib_t ? fl_deriv(p, cfg.alpha_t, cfg.gamma)
                             : mirror_deriv(p, cfg.alpha_t, cfg.gamma);
}

double brl_grad(AnchorProbability p_t, const LossConfig& cfg, BranchSide side) {
    cfg.validate();
    const double p = p_t.value();
    return side == BranchSide::focal ? fl_deriv(p, cfg.alpha_t, cfg.gamma)
                                     : mirror_deriv(p, cfg.alpha_t, cfg.gamma);
}

double brl_jump(const LossConfig& cfg) {
    cfg.validate();
    const double t = cfg.recalib_t;
    if (t <= 0.0) return 0.0;
    return cfg.alpha_t * (std::pow(t, cfg.gamma) * std::log(1.0 / (1.0 - t)) -
                          std::pow(1.0 - t, cfg.gamma) * std::log(1.0 / t));
}

BatchLossResult batch_loss(const std::vector<double>& foreground_probs,
                           const std::vector<AnchorAssignment>& assignments,
                           const LossConfig& cfg) {
    cfg.validate();
    if (foreground_probs.size() != assignments.size()) {
        throw std::invalid_argument(
            "batch_loss: predictions and assignments differ in length");
    }

    BatchLossResult out;
    out.grad.assign(foreground_probs.size(), 0.0);

    for (const AnchorAssignment& a : assignments) {
        if (a.anchor_index >= foreground_probs.size()) {
            throw std::invalid_argument("batch_loss: anchor index out of range");
        }
        if (a.cls == AnchorClass::ignored) continue;

        const double p = foreground_probs[a.anchor_index];
        const auto p_t = AnchorProbability::from_foreground(p, a.cls);
        // d(p_t)/d(p): +1 for positives, -1 for the background conventions.
        const double chain = a.cls == AnchorClass::positive ? 1.0 : -1.0;

        switch (a.cls) {
            case AnchorClass::positive: {
                const double l = focal_loss(p_t, cfg);
                out.positive_loss += l;
                out.total += l;
                out.grad[a.anchor_index] = chain * focal_grad(p_t, cfg);
                ++out.positive_count;
                break;
            }
            case AnchorClass::negative: {
                const double l = focal_loss(p_t, cfg);
                out.negative_loss += l;
                out.total += l;
                out.grad[a.anchor_index] = chain * focal_grad(p_t, cfg);
                break;
            }
            case AnchorClass::confusion: {
                const double w = cfg.confusion_weight;
                const double l = w * brl_loss(p_t, cfg);
                out.confusion_loss += l;
                out.total += l;
                const double g =
                    p_t.value() == cfg.recalib_t
                        ? brl_grad(p_t, cfg, BranchSide::focal)
                        : brl_grad(p_t, cfg);
                out.grad[a.anchor_index] = chain * w * g;
                break;
            }
            case AnchorClass::ignored:
                break;
        }
    }
    return out;
}

}  // namespace brlkit
