#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <doctest.h>

#include "brlkit/eval.hpp"
#include "brlkit/rng.hpp"

using namespace brlkit;

namespace {

// Exhaustive reference for the greedy rule: walk detections in score order
// and scan every ground truth each time. No per-image grouping, no reuse of
// implementation helpers beyond iou().
std::vector<bool> match_oracle(std::vector<Detection> dets,
                               const std::vector<GroundTruth>& gts,
                               double thr) {
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Detection& a, const Detection& b) {
                         return a.score > b.score;
                     });
    std::vector<bool> taken(gts.size(), false), tp(dets.size(), false);
    for (std::size_t i = 0; i < dets.size(); ++i) {
        double best = -1.0;
        std::size_t best_j = gts.size();
        for (std::size_t j = 0; j < gts.size(); ++j) {
            if (taken[j] || gts[j].image_id != dets[i].image_id ||
                gts[j].category != dets[i].category) {
                continue;
            }
            const double v = iou(dets[i].box, gts[j].box);
            if (v >= thr && v > best) {
                best = v;
                best_j = j;
            }
        }
        if (best_j != gts.size()) {
            taken[best_j] = true;
            tp[i] = true;
        }
    }
    return tp;
}

Box random_box(std::mt19937_64& g) {
    const double x1 = rng::uniform(g, 0.0, 30.0);
    const double y1 = rng::uniform(g, 0.0, 30.0);
    return Box{x1, y1, x1 + rng::uniform(g, 2.0, 20.0),
               y1 + rng::uniform(g, 2.0, 20.0)};
}

}  // namespace

TEST_CASE("matching basics") {
    const Box b{0, 0, 10, 10};
    const std::vector<GroundTruth> gts = {{"i1", b, "cat"}};

    SUBCASE("exact hit is a TP") {
        const auto m = match_detections({{"i1", b, "cat", 0.9}}, gts, 0.5);
        REQUIRE(m.tp.size() == 1);
        CHECK(m.tp[0]);
    }

    SUBCASE("duplicate detection on one gt is a FP") {
        const auto m = match_detections(
            {{"i1", b, "cat", 0.6}, {"i1", b, "cat", 0.9}}, gts, 0.5);
        REQUIRE(m.tp.size() == 2);
        CHECK(m.order[0] == 1);  // higher score ranks first
        CHECK(m.tp[0]);
        CHECK_FALSE(m.tp[1]);
    }

    SUBCASE("wrong image is a FP") {
        const auto m = match_detections({{"i2", b, "cat", 0.9}}, gts, 0.5);
        CHECK_FALSE(m.tp[0]);
    }
}

TEST_CASE("matching equals the exhaustive oracle on random instances") {
    auto g = rng::make_stream(13, std::string_view("match-oracle"));
    const std::vector<std::string> images = {"a", "b", "c"};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Detection> dets;
        std::vector<GroundTruth> gts;
        for (int i = 0; i < 20; ++i) {
            dets.push_back({images[rng::uniform_below(g, 3)], random_box(g),
                            "cat", rng::uniform01(g)});
        }
        for (int j = 0; j < 5; ++j) {
            gts.push_back({images[rng::uniform_below(g, 3)], random_box(g),
                           "cat"});
        }
        const double thr = 0.3 + 0.4 * rng::uniform01(g);
        const auto got = match_detections(dets, gts, thr);
        const auto want = match_oracle(dets, gts, thr);
        REQUIRE(got.tp.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(got.tp[i] == want[i]);
        }
    }
}

TEST_CASE("average precision") {
    SUBCASE("all TPs covering all gts") {
        CHECK(*average_precision({true, true, true}, 3) == doctest::Approx(1.0));
    }
    SUBCASE("no TPs") {
        CHECK(*average_precision({false, false}, 3) == doctest::Approx(0.0));
    }
    SUBCASE("hand-computed 5/6") {
        CHECK(*average_precision({true, false, true}, 2) ==
              doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    }
    SUBCASE("undefined vs zero") {
        CHECK_FALSE(average_precision({}, 0).has_value());
        CHECK(*average_precision({false}, 0) == 0.0);
    }
    SUBCASE("pr curve shape") {
        const auto c = pr_curve({true, false, true}, 2);
        REQUIRE(c.recall.size() == 3);
        CHECK(c.recall[0] == doctest::Approx(0.5));
        CHECK(c.recall[2] == doctest::Approx(1.0));
        CHECK(std::is_sorted(c.recall.begin(), c.recall.end()));
        for (double p : c.precision) {
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
        }
    }
}

// Two classes, three images, worked out by hand:
//   class A: gts in i1 (two) and i2 (one); four detections where the second
//   is a duplicate, the third overlaps its gt at IoU 2/3, and the fourth
//   sits in an empty image. AP@0.5 = 5/9, AP@0.75 = 1/3.
//   class B: one gt, one exact detection. AP = 1 everywhere.
//   mAP50 = 7/9, mAP75 = 2/3, mAP over 0.5:0.05:0.95 = 32/45.
TEST_CASE("golden evaluation instance") {
    const std::vector<GroundTruth> gts = {
        {"i1", Box{0, 0, 10, 10}, "A"},
        {"i1", Box{20, 20, 30, 30}, "A"},
        {"i2", Box{0, 0, 10, 10}, "A"},
        {"i2", Box{50, 50, 60, 60}, "B"},
    };
    const std::vector<Detection> dets = {
        {"i1", Box{0, 0, 10, 10}, "A", 0.9},
        {"i1", Box{0, 0, 10, 10}, "A", 0.8},
        {"i2", Box{2, 0, 12, 10}, "A", 0.7},
        {"i3", Box{0, 0, 10, 10}, "A", 0.6},
        {"i2", Box{50, 50, 60, 60}, "B", 0.5},
    };
    const APResult res = evaluate(dets, gts, coco_iou_set());
    CHECK(res.per_class.at({"A", 0.5}) == doctest::Approx(5.0 / 9.0).epsilon(1e-12));
    CHECK(res.per_class.at({"B", 0.5}) == doctest::Approx(1.0));
    CHECK(res.per_class.at({"A", 0.75}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(res.map50 == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
    CHECK(res.map75 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(res.map_coco == doctest::Approx(32.0 / 45.0).epsilon(1e-12));
}

TEST_CASE("evaluate edge behavior") {
    const std::vector<GroundTruth> gts = {{"i1", Box{0, 0, 4, 4}, "A"}};

    SUBCASE("perfect detector") {
        const APResult res =
            evaluate({{"i1", Box{0, 0, 4, 4}, "A", 1.0}}, gts, coco_iou_set());
        CHECK(res.map50 == doctest::Approx(1.0));
        CHECK(res.map_coco == doctest::Approx(1.0));
    }

    SUBCASE("empty gts rejected") {
        CHECK_THROWS_AS((void)evaluate({}, {}, coco_iou_set()),
                        std::invalid_argument);
    }

    SUBCASE("class with detections but no gts scores 0 and drags the mean") {
        const APResult res = evaluate({{"i1", Box{0, 0, 4, 4}, "ghost", 0.9}},
                                      gts, {0.5});
        CHECK(res.per_class.at({"ghost", 0.5}) == 0.0);
        CHECK(res.map_per_iou.at(0.5) == doctest::Approx(0.0));
    }
}

TEST_CASE("evaluation properties on random instances") {
    auto g = rng::make_stream(77, std::string_view("eval-props"));
    const std::vector<std::string> images = {"a", "b", "c", "d"};
    const std::vector<std::string> cats = {"A", "B"};

    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Detection> dets;
        std::vector<GroundTruth> gts;
        for (int j = 0; j < 8; ++j) {
            gts.push_back({images[rng::uniform_below(g, 4)], random_box(g),
                           cats[rng::uniform_below(g, 2)]});
        }
        for (int i = 0; i < 25; ++i) {
            dets.push_back({images[rng::uniform_below(g, 4)], random_box(g),
                            cats[rng::uniform_below(g, 2)],
                            rng::uniform01(g)});
        }
        const APResult res = evaluate(dets, gts, coco_iou_set());

        // monotone: higher IoU threshold never scores higher
        double prev = 2.0;
        for (const auto& [thr, v] : res.map_per_iou) {
            CHECK(v <= prev + 1e-12);
            prev = v;
        }

        // scores only matter through their ordering
        std::vector<Detection> transformed = dets;
        for (Detection& d : transformed) d.score = 0.25 * d.score + 0.5;
        const APResult res2 = evaluate(transformed, gts, coco_iou_set());
        CHECK(res2.map50 == doctest::Approx(res.map50).epsilon(1e-12));
        CHECK(res2.map_coco == doctest::Approx(res.map_coco).epsilon(1e-12));

        // image-wise decomposability: pooled inputs equal the union of two
        // disjoint image sets by construction (already pooled here); check
        // instead that restricting to one image set and its detections and
        // re-pooling reproduces the pooled result
        std::vector<Detection> half_dets;
        std::vector<GroundTruth> half_gts;
        for (const auto& d : dets) {
            if (d.image_id == "a" || d.image_id == "b") half_dets.push_back(d);
        }
        for (const auto& gt : gts) {
            if (gt.image_id == "a" || gt.image_id == "b") half_gts.push_back(gt);
        }
        std::vector<Detection> other_dets;
        std::vector<GroundTruth> other_gts;
        for (const auto& d : dets) {
            if (d.image_id == "c" || d.image_id == "d") other_dets.push_back(d);
        }
        for (const auto& gt : gts) {
            if (gt.image_id == "c" || gt.image_id == "d") other_gts.push_back(gt);
        }
        std::vector<Detection> rejoined = half_dets;
        rejoined.insert(rejoined.end(), other_dets.begin(), other_dets.end());
        std::vector<GroundTruth> rejoined_gts = half_gts;
        rejoined_gts.insert(rejoined_gts.end(), other_gts.begin(),
                            other_gts.end());
        if (!rejoined_gts.empty()) {
            const APResult res3 = evaluate(rejoined, rejoined_gts, {0.5});
            const APResult pooled = evaluate(dets, gts, {0.5});
            CHECK(res3.map50 == doctest::Approx(pooled.map50).epsilon(1e-12));
        }
    }
}
