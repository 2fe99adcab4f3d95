#include <cmath>

#include <doctest.h>

#include "brlkit/detector.hpp"

using namespace brlkit;

namespace {

SceneConfig small_scene_cfg() {
    SceneConfig sc;
    sc.num_scenes = 40;
    sc.min_objects = 2;
    sc.max_objects = 4;
    sc.seed = 21;
    return sc;
}

TrainConfig small_train_cfg() {
    TrainConfig tc;
    tc.kind = LossKind::focal;
    tc.loss.recalib_t = 0.0;
    tc.loss.confusion_weight = 1.0;
    tc.epochs = 10;
    tc.seed = 3;
    return tc;
}

double total_loss_at(const Corpus& corpus, const TrainConfig& tc,
                     const DetectorModel& model) {
    // recompute the normalized objective for a fixed parameter vector
    LossConfig cfg = tc.loss;
    if (tc.kind == LossKind::focal) cfg.recalib_t = 0.0;
    const FeatureExtractor fx(model.feature_seed,
                              static_cast<int>(model.weights.size()));
    double total = 0.0;
    std::size_t positives = 0;
    for (const ImageRecord& rec : corpus) {
        const auto anchors = generate_anchors(tc.anchors, rec.width, rec.height);
        std::vector<Box> gts;
        for (const auto& a : rec.annotations) {
            if (!a.erased) gts.push_back(a.box);
        }
        const auto asg = assign(anchors, gts, tc.assignment);
        std::vector<double> probs(anchors.size());
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            const auto x = fx.features(rec, anchors[a], a);
            double z = model.bias;
            for (std::size_t k = 0; k < x.size(); ++k) {
                z += model.weights[k] * x[k];
            }
            probs[a] = 1.0 / (1.0 + std::exp(-z));
        }
        const auto bl = batch_loss(probs, asg, cfg);
        total += bl.total;
        positives += bl.positive_count;
    }
    return total / static_cast<double>(std::max<std::size_t>(1, positives));
}

}  // namespace

TEST_CASE("scene generation") {
    SUBCASE("determinism") {
        const SceneConfig sc = small_scene_cfg();
        const Corpus a = generate_scenes(sc);
        const Corpus b = generate_scenes(sc);
        CHECK(corpus_to_jsonl(a) == corpus_to_jsonl(b));
    }

    SUBCASE("object count bounds") {
        SceneConfig sc = small_scene_cfg();
        sc.min_objects = sc.max_objects = 4;
        for (const auto& rec : generate_scenes(sc)) {
            CHECK(rec.annotations.size() == 4);
            CHECK(rec.objects.size() == 4);
        }
    }

    SUBCASE("objects stay inside the image") {
        for (const auto& rec : generate_scenes(small_scene_cfg())) {
            for (const Box& b : rec.objects) {
                CHECK(b.x1 >= 0.0);
                CHECK(b.y1 >= 0.0);
                CHECK(b.x2 <= rec.width);
                CHECK(b.y2 <= rec.height);
            }
        }
    }

    SUBCASE("invalid config rejected") {
        SceneConfig sc = small_scene_cfg();
        sc.min_objects = 0;
        CHECK_THROWS_AS((void)generate_scenes(sc), std::invalid_argument);
    }
}

TEST_CASE("noise-free scenes are linearly separable") {
    SceneConfig sc = small_scene_cfg();
    sc.noise = 0.0;
    sc.num_scenes = 60;
    const Corpus corpus = generate_scenes(sc);

    TrainConfig tc = small_train_cfg();
    tc.epochs = 80;
    const TrainResult tr = train(corpus, tc);
    REQUIRE(tr.converged);

    // held-out scenes from a different seed
    sc.seed = 777;
    sc.num_scenes = 20;
    const Corpus held_out = generate_scenes(sc);
    const FeatureExtractor fx(tr.model.feature_seed, tc.feature_dim);
    std::size_t correct = 0, total = 0;
    for (const ImageRecord& rec : held_out) {
        const auto anchors = generate_anchors(tc.anchors, rec.width, rec.height);
        std::vector<Box> gts;
        for (const auto& a : rec.annotations) gts.push_back(a.box);
        const auto asg = assign(anchors, gts, tc.assignment);
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            if (asg[a].cls == AnchorClass::ignored) continue;
            const auto x = fx.features(rec, anchors[a], a);
            double z = tr.model.bias;
            for (std::size_t k = 0; k < x.size(); ++k) {
                z += tr.model.weights[k] * x[k];
            }
            const bool fg = z > 0.0;
            const bool want = asg[a].cls == AnchorClass::positive;
            if (fg == want || asg[a].cls == AnchorClass::confusion) ++correct;
            ++total;
        }
    }
    CHECK(static_cast<double>(correct) / total > 0.99);
}

TEST_CASE("training determinism") {
    const Corpus corpus = generate_scenes(small_scene_cfg());
    const TrainConfig tc = small_train_cfg();
    const TrainResult a = train(corpus, tc);
    const TrainResult b = train(corpus, tc);
    CHECK(a.model.weights == b.model.weights);
    CHECK(a.model.bias == b.model.bias);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].total == b.trace[i].total);
    }
}

TEST_CASE("one gradient step matches finite differences of the objective") {
    SceneConfig sc = small_scene_cfg();
    sc.num_scenes = 6;
    const Corpus corpus = generate_scenes(sc);

    for (LossKind kind : {LossKind::focal, LossKind::brl}) {
        TrainConfig tc;
        tc.kind = kind;
        // modest step: lr = 1 saturates the sigmoid after one epoch and the
        // clamped plateau makes finite differences meaningless
        tc.learning_rate = 0.2;
        tc.seed = 3;

        // Checking at the parameters after one epoch keeps confusion-anchor
        // p_t away from the BRL breakpoint (at w = 0 every p_t is exactly
        // 0.5). The second update recovers the analytic gradient there.
        tc.epochs = 1;
        const DetectorModel m1 = train(corpus, tc).model;
        tc.epochs = 2;
        const DetectorModel m2 = train(corpus, tc).model;

        const double h = 1e-5;
        for (std::size_t k = 0; k < m1.weights.size(); ++k) {
            DetectorModel plus = m1, minus = m1;
            plus.weights[k] += h;
            minus.weights[k] -= h;
            const double fd = (total_loss_at(corpus, tc, plus) -
                               total_loss_at(corpus, tc, minus)) /
                              (2.0 * h);
            const double analytic =
                (m1.weights[k] - m2.weights[k]) / tc.learning_rate;
            const double err = std::abs(analytic - fd);
            CHECK_MESSAGE(
                err <= 1e-4 * std::max(1e-4, std::abs(fd)),
                "kind " << to_string(kind) << " k=" << k << " analytic "
                        << analytic << " fd " << fd);
        }
    }
}

TEST_CASE("prediction and nms") {
    SceneConfig sc = small_scene_cfg();
    sc.num_scenes = 10;
    const Corpus corpus = generate_scenes(sc);
    TrainConfig tc = small_train_cfg();
    tc.epochs = 40;
    const TrainResult tr = train(corpus, tc);
    REQUIRE(tr.converged);

    SUBCASE("threshold 1.0 gives no detections") {
        CHECK(predict(tr.model, corpus[0], 1.0, 0.5).empty());
    }

    SUBCASE("descending scores, no surviving overlap above the nms iou") {
        for (const ImageRecord& rec : corpus) {
            const auto dets = predict(tr.model, rec, 0.05, 0.5);
            for (std::size_t i = 1; i < dets.size(); ++i) {
                CHECK(dets[i - 1].score >= dets[i].score);
            }
            for (std::size_t i = 0; i < dets.size(); ++i) {
                for (std::size_t j = i + 1; j < dets.size(); ++j) {
                    CHECK(iou(dets[i].box, dets[j].box) <= 0.5);
                }
            }
        }
    }

    SUBCASE("duplicate anchors collapse to one detection") {
        // a 1x1 grid with two identical scales produces two identical anchors
        DetectorModel m = tr.model;
        m.grid.rows = m.grid.cols = 1;
        m.grid.scales = {12.0, 12.0};
        m.grid.ratios = {1.0};
        const auto dets = predict(m, corpus[0], 0.0, 0.5);
        CHECK(dets.size() == 1);
    }
}

TEST_CASE("divergence guard reports non-convergence") {
    SceneConfig sc = small_scene_cfg();
    sc.num_scenes = 8;
    const Corpus corpus = generate_scenes(sc);
    TrainConfig tc = small_train_cfg();
    tc.learning_rate = 1e6;  // blow up on purpose
    tc.epochs = 50;
    // clamped probabilities cap the per-positive loss at 8.06 here, so the
    // limit has to sit between the initial loss and that plateau
    tc.divergence_limit = 7.5;
    const TrainResult tr = train(corpus, tc);
    CHECK_FALSE(tr.converged);
    for (const EpochTrace& t : tr.trace) {
        CHECK(std::isfinite(t.total));
    }
}

TEST_CASE("model round trip") {
    const Corpus corpus = generate_scenes(small_scene_cfg());
    const TrainResult tr = train(corpus, small_train_cfg());
    const std::string path = "test_model_roundtrip.json";
    tr.model.save(path);
    const DetectorModel loaded = DetectorModel::load(path);
    CHECK(loaded.weights == tr.model.weights);
    CHECK(loaded.bias == tr.model.bias);
    CHECK(loaded.feature_seed == tr.model.feature_seed);
    CHECK(loaded.grid.scales == tr.model.grid.scales);
    std::remove(path.c_str());
}

TEST_CASE("trained model suspects erased objects more than an untrained one") {
    SceneConfig sc = small_scene_cfg();
    sc.num_scenes = 80;
    const Corpus corpus = generate_scenes(sc);
    const CurationResult cur = curate(corpus, CurationMode::extreme, 5);

    TrainConfig tc = small_train_cfg();
    tc.epochs = 60;
    const TrainResult tr = train(corpus, tc);  // trained on clean labels
    REQUIRE(tr.converged);

    DetectorModel untrained = tr.model;
    std::fill(untrained.weights.begin(), untrained.weights.end(), 0.0);
    untrained.bias = 0.0;

    auto low_pt_freq = [&](const DetectorModel& model) {
        const FeatureExtractor fx(model.feature_seed, tc.feature_dim);
        std::size_t low = 0, total = 0;
        for (std::size_t r = 0; r < corpus.size(); ++r) {
            const ImageRecord& curated = cur.corpus[r];
            const auto anchors =
                generate_anchors(tc.anchors, curated.width, curated.height);
            for (std::size_t a = 0; a < anchors.size(); ++a) {
                // anchors over erased annotations only
                bool over_erased = false;
                for (const Annotation& ann : curated.annotations) {
                    if (ann.erased && iou(anchors[a], ann.box) > 0.5) {
                        over_erased = true;
                        break;
                    }
                }
                if (!over_erased) continue;
                const auto x = fx.features(curated, anchors[a], a);
                double z = model.bias;
                for (std::size_t k = 0; k < x.size(); ++k) {
                    z += model.weights[k] * x[k];
                }
                const double p = 1.0 / (1.0 + std::exp(-z));
                if (1.0 - p < 0.5) ++low;  // background p_t below 1/2
                ++total;
            }
        }
        REQUIRE(total > 0);
        return static_cast<double>(low) / total;
    };

    CHECK(low_pt_freq(tr.model) > low_pt_freq(untrained));
}
