#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brlkit/anchors.hpp"
#include "brlkit/corpus.hpp"
#include "brlkit/curation.hpp"
#include "brlkit/eval.hpp"
#include "brlkit/loss.hpp"

namespace brlkit {

// Synthetic scenes: clustered objects on an empty canvas. Anchor features
// are a noisy blend of a foreground and a background prototype, weighted by
// the anchor's overlap with the latent scene content, so a linear classifier
// separates them exactly at noise 0.
struct SceneConfig {
    double width = 64.0;
    double height = 64.0;
    int min_objects = 2;
    int max_objects = 6;
    double min_size = 10.0;
    double max_size = 18.0;
    // Object centers fall inside a window of this fraction of the image,
    // keeping objects near each other as in natural multi-object images.
    double cluster_spread = 0.55;
    int feature_dim = 16;
    double noise = 0.25;
    int num_scenes = 100;
    uint64_t seed = 1;
    std::string category = "object";

    void validate() const;
};

Corpus generate_scenes(const SceneConfig& cfg);

struct DetectorModel {
    std::vector<double> weights;
    double bias = 0.0;
    uint64_t feature_seed = 0;
    // Anchor layout the model was trained on; scoring reuses it.
    AnchorGridConfig grid;
    std::string category = "object";

    void save(const std::string& path) const;
    static DetectorModel load(const std::string& path);
};

// Fixed random projection: prototypes drawn once from feature_seed, plus
// per-anchor noise keyed by (scene_seed, anchor index).
class FeatureExtractor {
  public:
    FeatureExtractor(uint64_t feature_seed, int dim);

    std::vector<double> features(const ImageRecord& scene,
                                 const Box& anchor,
                                 std::size_t anchor_index) const;

    int dim() const { return dim_; }

  private:
    uint64_t feature_seed_;
    int dim_;
    std::vector<double> mu_fg_;
    std::vector<double> mu_bg_;
};

enum class LossKind { focal, brl };

LossKind loss_kind_from_string(const std::string& s);
std::string to_string(LossKind kind);

struct TrainConfig {
    LossKind kind = LossKind::focal;
    LossConfig loss;
    AssignmentConfig assignment;
    AnchorGridConfig anchors;
    double learning_rate = 0.5;
    int epochs = 60;
    int batch_scenes = 0;  // 0 = full batch
    int feature_dim = 16;
    uint64_t seed = 1;
    double divergence_limit = 1e6;

    void validate() const;
};

struct EpochTrace {
    int epoch = 0;
    double total = 0.0;
    double positive = 0.0;
    double negative = 0.0;
    double confusion = 0.0;
};

struct TrainResult {
    DetectorModel model;
    std::vector<EpochTrace> trace;
    bool converged = true;
};

std::string trace_tsv(const std::vector<EpochTrace>& trace);

// Gradient descent on the anchor classification objective. Assignments use
// the non-erased annotations; features see the full latent scene. Loss and
// gradients are normalized by max(1, #positive anchors) per batch.
// Deterministic for a fixed (corpus, config).
TrainResult train(const Corpus& corpus, const TrainConfig& tc);

// Score every anchor, keep scores >= score_thr, then greedy NMS at nms_iou
// (ties broken by anchor index). Descending-score output.
std::vector<Detection> predict(const DetectorModel& model,
                               const ImageRecord& scene,
                               double score_thr = 0.05, double nms_iou = 0.5);

std::vector<Detection> predict_corpus(const DetectorModel& model,
                                      const Corpus& corpus,
                                      double score_thr = 0.05,
                                      double nms_iou = 0.5);

struct ExperimentCell {
    CurationMode mode = CurationMode::normal;
    LossKind loss = LossKind::focal;
    uint64_t seed = 0;
    bool converged = true;
    double map50 = 0.0;
    double map75 = 0.0;
    double map_coco = 0.0;
};

// curate -> train -> evaluate on the uncurated test split, one cell per
// (mode, loss). Training divergence marks the cell non-converged without
// aborting the rest of the matrix.
std::vector<ExperimentCell> run_experiment(
    const Corpus& train_corpus, const Corpus& test_corpus,
    const std::vector<CurationMode>& modes, const std::vector<LossKind>& losses,
    const TrainConfig& base, uint64_t curation_seed);

std::string experiment_csv(const std::vector<ExperimentCell>& cells,
                           const TrainConfig& base);

}  // namespace brlkit
