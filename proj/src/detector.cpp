#include "brlkit/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "brlkit/rng.hpp"

namespace brlkit {

using nlohmann::json;

void SceneConfig::validate() const {
    const bool ok = width > 0.0 && height > 0.0 && min_objects >= 1 &&
                    max_objects >= min_objects && min_size > 0.0 &&
                    max_size >= min_size && max_size < std::min(width, height) &&
                    cluster_spread > 0.0 && cluster_spread <= 1.0 &&
                    feature_dim >= 1 && noise >= 0.0 && num_scenes >= 1;
    if (!ok) throw std::invalid_argument("SceneConfig: field out of range");
}

Corpus generate_scenes(const SceneConfig& cfg) {
    cfg.validate();
    Corpus corpus;
    corpus.reserve(cfg.num_scenes);
    for (int s = 0; s < cfg.num_scenes; ++s) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "scene_%06d", s);
        ImageRecord rec;
        rec.image_id = idbuf;
        rec.width = cfg.width;
        rec.height = cfg.height;
        rec.scene_seed = rng::mix(cfg.seed, rng::fnv1a64(rec.image_id));
        rec.feature_noise = cfg.noise;

        auto g = rng::make_stream(cfg.seed, rec.image_id);
        const int count =
            cfg.min_objects +
            static_cast<int>(rng::uniform_below(
                g, static_cast<uint64_t>(cfg.max_objects - cfg.min_objects + 1)));

        // Cluster window keeping object centers clear of the borders.
        const double margin = cfg.max_size / 2.0;
        const double win_w =
            std::max(1.0, cfg.cluster_spread * (cfg.width - 2.0 * margin));
        const double win_h =
            std::max(1.0, cfg.cluster_spread * (cfg.height - 2.0 * margin));
        const double win_x =
            rng::uniform(g, margin, std::max(margin, cfg.width - margin - win_w));
        const double win_y = rng::uniform(
            g, margin, std::max(margin, cfg.height - margin - win_h));

        for (int k = 0; k < count; ++k) {
            bool placed = false;
            for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
                const double w = rng::uniform(g, cfg.min_size, cfg.max_size);
                const double h = rng::uniform(g, cfg.min_size, cfg.max_size);
                const double cx = rng::uniform(g, win_x, win_x + win_w);
                const double cy = rng::uniform(g, win_y, win_y + win_h);
                Box b{cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0};
                b.x1 = std::max(b.x1, 0.0);
                b.y1 = std::max(b.y1, 0.0);
                b.x2 = std::min(b.x2, cfg.width);
                b.y2 = std::min(b.y2, cfg.height);
                bool overlaps = false;
                for (const Box& other : rec.objects) {
                    if (iou(b, other) > 0.3) {
                        overlaps = true;
                        break;
                    }
                }
                if (overlaps) continue;
                rec.objects.push_back(b);
                rec.annotations.push_back({b, cfg.category, false});
                placed = true;
            }
            if (!placed) {
                throw std::runtime_error("generate_scenes: infeasible object "
                                         "placement in " + rec.image_id);
            }
        }
        corpus.push_back(std::move(rec));
    }
    return corpus;
}

FeatureExtractor::FeatureExtractor(uint64_t feature_seed, int dim)
    : feature_seed_(feature_seed), dim_(dim) {
    if (dim < 1) throw std::invalid_argument("FeatureExtractor: dim >= 1");
    auto g = rng::make_stream(feature_seed, std::string_view("prototypes"));
    mu_fg_.resize(dim_);
    mu_bg_.resize(dim_);
    auto draw_unit = [&](std::vector<double>& v) {
        double norm2 = 0.0;
        for (double& x : v) {
            x = rng::normal(g);
            norm2 += x * x;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& x : v) x *= inv;
    };
    draw_unit(mu_fg_);
    draw_unit(mu_bg_);
}

std::vector<double> FeatureExtractor::features(const ImageRecord& scene,
                                               const Box& anchor,
                                               std::size_t anchor_index) const {
    double s = 0.0;
    for (const Box& obj : scene.objects) s = std::max(s, iou(anchor, obj));
    auto g = rng::make_stream(scene.scene_seed, anchor_index);
    std::vector<double> x(dim_);
    for (int k = 0; k < dim_; ++k) {
        x[k] = s * mu_fg_[k] + (1.0 - s) * mu_bg_[k] +
               scene.feature_noise * rng::normal(g);
    }
    return x;
}

LossKind loss_kind_from_string(const std::string& s) {
    if (s == "fl" || s == "focal") return LossKind::focal;
    if (s == "brl") return LossKind::brl;
    throw std::invalid_argument("unknown loss kind: " + s);
}

std::string to_string(LossKind kind) {
    return kind == LossKind::focal ? "fl" : "brl";
}

void TrainConfig::validate() const {
    loss.validate();
    assignment.validate();
    if (!(learning_rate > 0.0) || epochs < 1 || batch_scenes < 0 ||
        feature_dim < 1) {
        throw std::invalid_argument("TrainConfig: field out of range");
    }
}

std::string trace_tsv(const std::vector<EpochTrace>& trace) {
    std::ostringstream out;
    out.precision(17);
    out << "epoch\ttotal_loss\tpos_loss\tneg_loss\tconfusion_loss\n";
    for (const EpochTrace& t : trace) {
        out << t.epoch << '\t' << t.total << '\t' << t.positive << '\t'
            << t.negative << '\t' << t.confusion << '\n';
    }
    return out.str();
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

json grid_to_json(const AnchorGridConfig& grid) {
    return json{{"rows", grid.rows},
                {"cols", grid.cols},
                {"scales", grid.scales},
                {"ratios", grid.ratios}};
}

AnchorGridConfig grid_from_json(const json& j) {
    AnchorGridConfig grid;
    grid.rows = j.at("rows").get<int>();
    grid.cols = j.at("cols").get<int>();
    grid.scales = j.at("scales").get<std::vector<double>>();
    grid.ratios = j.at("ratios").get<std::vector<double>>();
    return grid;
}

// Per-scene constants: anchors, features, assignments.
struct SceneCache {
    std::vector<Box> anchors;
    std::vector<std::vector<double>> features;
    std::vector<AnchorAssignment> assignments;
};

std::vector<Box> visible_gts(const ImageRecord& rec) {
    std::vector<Box> gts;
    for (const Annotation& a : rec.annotations) {
        if (!a.erased) gts.push_back(a.box);
    }
    return gts;
}

}  // namespace

void DetectorModel::save(const std::string& path) const {
    json j{{"weights", weights},
           {"bias", bias},
           {"feature_seed", feature_seed},
           {"grid", grid_to_json(grid)},
           {"category", category}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

DetectorModel DetectorModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j = json::parse(in);
    DetectorModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.feature_seed = j.at("feature_seed").get<uint64_t>();
    m.grid = grid_from_json(j.at("grid"));
    m.category = j.value("category", std::string("object"));
    return m;
}

TrainResult train(const Corpus& corpus, const TrainConfig& tc) {
    tc.validate();
    if (corpus.empty()) throw std::invalid_argument("train: empty corpus");

    // FL is BRL with the recalibration switched off; positives and negatives
    // use the focal branch either way.
    LossConfig cfg = tc.loss;
    if (tc.kind == LossKind::focal) cfg.recalib_t = 0.0;

    const int dim = tc.feature_dim;
    const uint64_t feature_seed = rng::mix(tc.seed, rng::fnv1a64("features"));
    const FeatureExtractor fx(feature_seed, dim);

    std::vector<SceneCache> cache(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const ImageRecord& rec = corpus[i];
        cache[i].anchors = generate_anchors(tc.anchors, rec.width, rec.height);
        cache[i].features.reserve(cache[i].anchors.size());
        for (std::size_t a = 0; a < cache[i].anchors.size(); ++a) {
            cache[i].features.push_back(fx.features(rec, cache[i].anchors[a], a));
        }
        cache[i].assignments = assign(cache[i].anchors, visible_gts(rec),
                                      tc.assignment);
    }

    TrainResult res;
    res.model.weights.assign(dim, 0.0);
    res.model.bias = 0.0;
    res.model.feature_seed = feature_seed;
    res.model.grid = tc.anchors;
    if (!corpus[0].annotations.empty()) {
        res.model.category = corpus[0].annotations[0].category;
    }

    const std::size_t batch =
        tc.batch_scenes == 0 ? corpus.size()
                             : static_cast<std::size_t>(tc.batch_scenes);

    std::vector<double> gw(dim);
    for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
        EpochTrace et;
        et.epoch = epoch;
        double epoch_raw_total = 0.0, epoch_pos = 0.0, epoch_neg = 0.0,
               epoch_conf = 0.0;
        std::size_t epoch_positives = 0;

        for (std::size_t start = 0; start < corpus.size(); start += batch) {
            const std::size_t end = std::min(corpus.size(), start + batch);
            std::fill(gw.begin(), gw.end(), 0.0);
            double gb = 0.0;
            double batch_total = 0.0;
            std::size_t batch_positives = 0;

            for (std::size_t i = start; i < end; ++i) {
                const SceneCache& sc = cache[i];
                std::vector<double> probs(sc.anchors.size());
                for (std::size_t a = 0; a < probs.size(); ++a) {
                    double z = res.model.bias;
                    const std::vector<double>& x = sc.features[a];
                    for (int k = 0; k < dim; ++k) z += res.model.weights[k] * x[k];
                    probs[a] = sigmoid(z);
                }
                const BatchLossResult bl = batch_loss(probs, sc.assignments, cfg);
                batch_total += bl.total;
                batch_positives += bl.positive_count;
                epoch_pos += bl.positive_loss;
                epoch_neg += bl.negative_loss;
                epoch_conf += bl.confusion_loss;
                for (std::size_t a = 0; a < probs.size(); ++a) {
                    const double dz = bl.grad[a] * probs[a] * (1.0 - probs[a]);
                    if (dz == 0.0) continue;
                    const std::vector<double>& x = sc.features[a];
                    for (int k = 0; k < dim; ++k) gw[k] += dz * x[k];
                    gb += dz;
                }
            }

            const double norm =
                1.0 / static_cast<double>(std::max<std::size_t>(1, batch_positives));
            const double scaled = batch_total * norm;
            if (!std::isfinite(scaled) || scaled > tc.divergence_limit) {
                res.converged = false;
                res.trace.push_back(et);
                return res;
            }
            epoch_raw_total += batch_total;
            epoch_positives += batch_positives;
            for (int k = 0; k < dim; ++k) {
                res.model.weights[k] -= tc.learning_rate * gw[k] * norm;
            }
            res.model.bias -= tc.learning_rate * gb * norm;
        }

        const double enorm =
            1.0 / static_cast<double>(std::max<std::size_t>(1, epoch_positives));
        et.total = epoch_raw_total * enorm;
        et.positive = epoch_pos * enorm;
        et.negative = epoch_neg * enorm;
        et.confusion = epoch_conf * enorm;
        res.trace.push_back(et);
        if (!std::isfinite(et.total) || et.total > tc.divergence_limit) {
            res.converged = false;
            return res;
        }
    }
    return res;
}

std::vector<Detection> predict(const DetectorModel& model,
                               const ImageRecord& scene, double score_thr,
                               double nms_iou) {
    const FeatureExtractor fx(model.feature_seed,
                              static_cast<int>(model.weights.size()));
    const std::vector<Box> anchors =
        generate_anchors(model.grid, scene.width, scene.height);

    struct Scored {
        double score;
        std::size_t index;
    };
    std::vector<Scored> kept;
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        const std::vector<double> x = fx.features(scene, anchors[a], a);
        double z = model.bias;
        for (std::size_t k = 0; k < x.size(); ++k) z += model.weights[k] * x[k];
        const double p = 1.0 / (1.0 + std::exp(-z));
        if (p >= score_thr) kept.push_back({p, a});
    }
    std::sort(kept.begin(), kept.end(), [](const Scored& l, const Scored& r) {
        return l.score != r.score ? l.score > r.score : l.index < r.index;
    });

    std::vector<Detection> out;
    for (const Scored& s : kept) {
        bool suppressed = false;
        for (const Detection& d : out) {
            if (iou(anchors[s.index], d.box) > nms_iou) {
                suppressed = true;
                break;
            }
        }
        if (suppressed) continue;
        out.push_back({scene.image_id, anchors[s.index], model.category, s.score});
    }
    return out;
}

std::vector<Detection> predict_corpus(const DetectorModel& model,
                                      const Corpus& corpus, double score_thr,
                                      double nms_iou) {
    std::vector<Detection> out;
    for (const ImageRecord& rec : corpus) {
        auto dets = predict(model, rec, score_thr, nms_iou);
        out.insert(out.end(), dets.begin(), dets.end());
    }
    return out;
}

std::vector<ExperimentCell> run_experiment(
    const Corpus& train_corpus, const Corpus& test_corpus,
    const std::vector<CurationMode>& modes, const std::vector<LossKind>& losses,
    const TrainConfig& base, uint64_t curation_seed) {
    const std::vector<GroundTruth> test_gts = corpus_ground_truths(test_corpus);
    std::vector<ExperimentCell> cells;
    for (CurationMode mode : modes) {
        const CurationResult cur = curate(train_corpus, mode, curation_seed);
        for (LossKind loss : losses) {
            TrainConfig tc = base;
            tc.kind = loss;
            if (loss == LossKind::focal) {
                // The baseline is plain FL on every anchor.
                tc.loss.recalib_t = 0.0;
                tc.loss.confusion_weight = 1.0;
            }
            ExperimentCell cell;
            cell.mode = mode;
            cell.loss = loss;
            cell.seed = tc.seed;
            try {
                const TrainResult tr = train(cur.corpus, tc);
                cell.converged = tr.converged;
                if (tr.converged) {
                    const auto dets = predict_corpus(tr.model, test_corpus);
                    const APResult ap =
                        evaluate(dets, test_gts, coco_iou_set());
                    cell.map50 = ap.map50;
                    cell.map75 = ap.map75;
                    cell.map_coco = ap.map_coco;
                }
            } catch (const std::exception&) {
                cell.converged = false;
            }
            cells.push_back(cell);
        }
    }
    return cells;
}

std::string experiment_csv(const std::vector<ExperimentCell>& cells,
                           const TrainConfig& base) {
    std::ostringstream out;
    out.precision(17);
    out << "mode,loss_kind,t,confusion_weight,confusion_iou,seed,mAP50,mAP75,"
           "mAP_coco,converged\n";
    for (const ExperimentCell& c : cells) {
        const double t = c.loss == LossKind::focal ? 0.0 : base.loss.recalib_t;
        const double w =
            c.loss == LossKind::focal ? 1.0 : base.loss.confusion_weight;
        out << to_string(c.mode) << ',' << to_string(c.loss) << ',' << t << ','
            << w << ',' << base.assignment.confusion_iou << ',' << c.seed << ','
            << c.map50 << ',' << c.map75 << ',' << c.map_coco << ','
            << (c.converged ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace brlkit
