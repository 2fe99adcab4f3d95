import math

import brlkit


def test_iou():
    a = brlkit.Box(0, 0, 2, 2)
    b = brlkit.Box(1, 1, 3, 3)
    assert math.isclose(brlkit.iou(a, b), 1.0 / 7.0, rel_tol=1e-12)


def test_loss_values():
    cfg = brlkit.LossConfig()
    cfg.alpha_t = 0.5
    cfg.gamma = 2.0
    cfg.recalib_t = 0.0
    assert math.isclose(
        brlkit.focal_loss(0.5, cfg), 0.0866433975699932, rel_tol=1e-12
    )
    # with t = 0 the recalibrated loss collapses to focal
    for p in (0.1, 0.5, 0.9):
        assert math.isclose(
            brlkit.brl_loss(p, cfg), brlkit.focal_loss(p, cfg), rel_tol=1e-12
        )


def test_grad_matches_finite_difference():
    cfg = brlkit.LossConfig()
    h = 1e-6
    for p in (0.2, 0.4, 0.7):
        fd = (brlkit.brl_loss(p + h, cfg) - brlkit.brl_loss(p - h, cfg)) / (2 * h)
        assert math.isclose(brlkit.brl_grad(p, cfg), fd, rel_tol=1e-5)


def test_curate_and_train_round_trip():
    sc = brlkit.SceneConfig()
    sc.num_scenes = 20
    sc.seed = 7
    scenes = brlkit.generate_scenes(sc)
    assert len(scenes) == 20

    corpus, report = brlkit.curate(scenes, brlkit.CurationMode.extreme, 3)
    assert report.dropped > 0
    assert all(
        sum(not a.erased for a in rec.annotations) >= 1 for rec in corpus
    )

    tc = brlkit.TrainConfig()
    tc.epochs = 5
    result = brlkit.train(corpus, tc)
    assert result.converged
    assert len(result.trace) == 5

    dets = brlkit.predict(result.model, scenes[0], 0.05, 0.5)
    for d in dets:
        assert 0.0 <= d.score <= 1.0


def test_evaluate():
    gts = [brlkit.GroundTruth("i", brlkit.Box(0, 0, 4, 4), "A")]
    dets = [brlkit.Detection("i", brlkit.Box(0, 0, 4, 4), "A", 0.9)]
    res = brlkit.evaluate(dets, gts, brlkit.coco_iou_set())
    assert math.isclose(res.map50, 1.0)
    assert math.isclose(res.map_coco, 1.0)
