#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "brlkit/anchors.hpp"
#include "brlkit/curation.hpp"
#include "brlkit/detector.hpp"
#include "brlkit/eval.hpp"
#include "brlkit/loss.hpp"

namespace py = pybind11;
using namespace brlkit;

PYBIND11_MODULE(_brlkit, m) {
    m.doc() = "Background-recalibration detection toolkit";

    py::class_<Box>(m, "Box")
        .def(py::init<double, double, double, double>(), py::arg("x1"),
             py::arg("y1"), py::arg("x2"), py::arg("y2"))
        .def_readwrite("x1", &Box::x1)
        .def_readwrite("y1", &Box::y1)
        .def_readwrite("x2", &Box::x2)
        .def_readwrite("y2", &Box::y2)
        .def("area", &Box::area);
    m.def("iou", &iou, py::arg("a"), py::arg("b"));

    py::class_<LossConfig>(m, "LossConfig")
        .def(py::init([](double alpha_t, double gamma, double recalib_t,
                         double confusion_weight) {
                 LossConfig c{alpha_t, gamma, recalib_t, confusion_weight};
                 c.validate();
                 return c;
             }),
             py::arg("alpha_t") = 0.5, py::arg("gamma") = 2.0,
             py::arg("recalib_t") = 0.5, py::arg("confusion_weight") = 0.1)
        .def_readwrite("alpha_t", &LossConfig::alpha_t)
        .def_readwrite("gamma", &LossConfig::gamma)
        .def_readwrite("recalib_t", &LossConfig::recalib_t)
        .def_readwrite("confusion_weight", &LossConfig::confusion_weight);

    m.def(
        "focal_loss",
        [](double p_t, const LossConfig& cfg) {
            return focal_loss(AnchorProbability(p_t), cfg);
        },
        py::arg("p_t"), py::arg("cfg"));
    m.def(
        "focal_grad",
        [](double p_t, const LossConfig& cfg) {
            return focal_grad(AnchorProbability(p_t), cfg);
        },
        py::arg("p_t"), py::arg("cfg"));
    m.def(
        "brl_loss",
        [](double p_t, const LossConfig& cfg) {
            return brl_loss(AnchorProbability(p_t), cfg);
        },
        py::arg("p_t"), py::arg("cfg"));
    m.def(
        "brl_grad",
        [](double p_t, const LossConfig& cfg) {
            return brl_grad(AnchorProbability(p_t), cfg);
        },
        py::arg("p_t"), py::arg("cfg"));
    m.def("brl_jump", &brl_jump, py::arg("cfg"));

    py::enum_<AnchorClass>(m, "AnchorClass")
        .value("positive", AnchorClass::positive)
        .value("negative", AnchorClass::negative)
        .value("confusion", AnchorClass::confusion)
        .value("ignored", AnchorClass::ignored);

    py::class_<AssignmentConfig>(m, "AssignmentConfig")
        .def(py::init([](double pos_iou, double neg_hi, double confusion_iou) {
                 AssignmentConfig c{pos_iou, neg_hi, confusion_iou};
                 c.validate();
                 return c;
             }),
             py::arg("pos_iou") = 0.5, py::arg("neg_hi") = 0.4,
             py::arg("confusion_iou") = 0.1)
        .def_readwrite("pos_iou", &AssignmentConfig::pos_iou)
        .def_readwrite("neg_hi", &AssignmentConfig::neg_hi)
        .def_readwrite("confusion_iou", &AssignmentConfig::confusion_iou);

    py::class_<AnchorAssignment>(m, "AnchorAssignment")
        .def_readonly("anchor_index", &AnchorAssignment::anchor_index)
        .def_readonly("cls", &AnchorAssignment::cls)
        .def_readonly("matched_gt", &AnchorAssignment::matched_gt)
        .def_readonly("max_iou", &AnchorAssignment::max_iou);

    m.def("generate_anchors",
          py::overload_cast<int, int, const std::vector<double>&,
                            const std::vector<double>&, double, double>(
              &generate_anchors),
          py::arg("rows"), py::arg("cols"), py::arg("scales"),
          py::arg("ratios"), py::arg("image_width"), py::arg("image_height"));
    m.def("assign", &assign, py::arg("anchors"), py::arg("gts"),
          py::arg("cfg"));

    m.def(
        "batch_loss",
        [](const std::vector<double>& probs,
           const std::vector<AnchorAssignment>& assignments,
           const LossConfig& cfg) {
            const BatchLossResult r = batch_loss(probs, assignments, cfg);
            return py::make_tuple(r.total, r.grad, r.positive_count);
        },
        py::arg("foreground_probs"), py::arg("assignments"), py::arg("cfg"),
        "Returns (total, per-anchor dL/dp, positive_count).");

    py::class_<Annotation>(m, "Annotation")
        .def(py::init([](const Box& box, const std::string& category,
                         bool erased) {
                 return Annotation{box, category, erased};
             }),
             py::arg("box"), py::arg("category"), py::arg("erased") = false)
        .def_readwrite("box", &Annotation::box)
        .def_readwrite("category", &Annotation::category)
        .def_readwrite("erased", &Annotation::erased);

    py::class_<ImageRecord>(m, "ImageRecord")
        .def(py::init<>())
        .def_readwrite("image_id", &ImageRecord::image_id)
        .def_readwrite("width", &ImageRecord::width)
        .def_readwrite("height", &ImageRecord::height)
        .def_readwrite("annotations", &ImageRecord::annotations)
        .def_readwrite("objects", &ImageRecord::objects)
        .def("kept_count", &ImageRecord::kept_count);

    py::enum_<CurationMode>(m, "CurationMode")
        .value("normal", CurationMode::normal)
        .value("easy", CurationMode::easy)
        .value("hard", CurationMode::hard)
        .value("extreme", CurationMode::extreme);

    py::class_<CurationReport>(m, "CurationReport")
        .def_readonly("total_annotations", &CurationReport::total_annotations)
        .def_readonly("dropped", &CurationReport::dropped)
        .def_readonly("drop_fraction", &CurationReport::drop_fraction)
        .def_readonly("kept_histogram", &CurationReport::kept_histogram);

    m.def(
        "curate",
        [](const Corpus& corpus, CurationMode mode, uint64_t seed) {
            CurationResult r = curate(corpus, mode, seed);
            return py::make_tuple(r.corpus, r.report);
        },
        py::arg("corpus"), py::arg("mode"), py::arg("seed"));
    m.def("corpus_stats", &corpus_stats, py::arg("corpus"));
    m.def("load_corpus", &load_corpus, py::arg("path"));
    m.def("save_corpus", &save_corpus, py::arg("corpus"), py::arg("path"),
          py::arg("include_erased") = false);

    py::class_<Detection>(m, "Detection")
        .def(py::init([](const std::string& image_id, const Box& box,
                         const std::string& category, double score) {
                 return Detection{image_id, box, category, score};
             }),
             py::arg("image_id"), py::arg("box"), py::arg("category"),
             py::arg("score"))
        .def_readwrite("image_id", &Detection::image_id)
        .def_readwrite("box", &Detection::box)
        .def_readwrite("category", &Detection::category)
        .def_readwrite("score", &Detection::score);

    py::class_<GroundTruth>(m, "GroundTruth")
        .def(py::init([](const std::string& image_id, const Box& box,
                         const std::string& category) {
                 return GroundTruth{image_id, box, category};
             }),
             py::arg("image_id"), py::arg("box"), py::arg("category"));

    py::class_<APResult>(m, "APResult")
        .def_readonly("map50", &APResult::map50)
        .def_readonly("map75", &APResult::map75)
        .def_readonly("map_coco", &APResult::map_coco)
        .def_readonly("map_per_iou", &APResult::map_per_iou)
        .def_readonly("per_class", &APResult::per_class);

    m.def(
        "average_precision",
        [](const std::vector<bool>& flags, std::size_t num_gt) {
            return average_precision(flags, num_gt);
        },
        py::arg("ranked_tp"), py::arg("num_gt"));
    m.def("evaluate", &evaluate, py::arg("detections"),
          py::arg("ground_truths"), py::arg("iou_set"));
    m.def("coco_iou_set", &coco_iou_set);
    m.def("corpus_ground_truths", &corpus_ground_truths, py::arg("corpus"));

    py::class_<SceneConfig>(m, "SceneConfig")
        .def(py::init<>())
        .def_readwrite("width", &SceneConfig::width)
        .def_readwrite("height", &SceneConfig::height)
        .def_readwrite("min_objects", &SceneConfig::min_objects)
        .def_readwrite("max_objects", &SceneConfig::max_objects)
        .def_readwrite("min_size", &SceneConfig::min_size)
        .def_readwrite("max_size", &SceneConfig::max_size)
        .def_readwrite("cluster_spread", &SceneConfig::cluster_spread)
        .def_readwrite("noise", &SceneConfig::noise)
        .def_readwrite("num_scenes", &SceneConfig::num_scenes)
        .def_readwrite("seed", &SceneConfig::seed);

    m.def("generate_scenes", &generate_scenes, py::arg("cfg"));

    py::enum_<LossKind>(m, "LossKind")
        .value("focal", LossKind::focal)
        .value("brl", LossKind::brl);

    py::class_<AnchorGridConfig>(m, "AnchorGridConfig")
        .def(py::init<>())
        .def_readwrite("rows", &AnchorGridConfig::rows)
        .def_readwrite("cols", &AnchorGridConfig::cols)
        .def_readwrite("scales", &AnchorGridConfig::scales)
        .def_readwrite("ratios", &AnchorGridConfig::ratios);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("kind", &TrainConfig::kind)
        .def_readwrite("loss", &TrainConfig::loss)
        .def_readwrite("assignment", &TrainConfig::assignment)
        .def_readwrite("anchors", &TrainConfig::anchors)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_scenes", &TrainConfig::batch_scenes)
        .def_readwrite("feature_dim", &TrainConfig::feature_dim)
        .def_readwrite("seed", &TrainConfig::seed);

    py::class_<DetectorModel>(m, "DetectorModel")
        .def_readonly("weights", &DetectorModel::weights)
        .def_readonly("bias", &DetectorModel::bias)
        .def("save", &DetectorModel::save, py::arg("path"))
        .def_static("load", &DetectorModel::load, py::arg("path"));

    py::class_<EpochTrace>(m, "EpochTrace")
        .def_readonly("epoch", &EpochTrace::epoch)
        .def_readonly("total", &EpochTrace::total)
        .def_readonly("positive", &EpochTrace::positive)
        .def_readonly("negative", &EpochTrace::negative)
        .def_readonly("confusion", &EpochTrace::confusion);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("model", &TrainResult::model)
        .def_readonly("trace", &TrainResult::trace)
        .def_readonly("converged", &TrainResult::converged);

    m.def("train", &train, py::arg("corpus"), py::arg("config"));
    m.def("predict", &predict, py::arg("model"), py::arg("scene"),
          py::arg("score_thr") = 0.05, py::arg("nms_iou") = 0.5);
    m.def("predict_corpus", &predict_corpus, py::arg("model"),
          py::arg("corpus"), py::arg("score_thr") = 0.05,
          py::arg("nms_iou") = 0.5);

    py::class_<ExperimentCell>(m, "ExperimentCell")
        .def_readonly("mode", &ExperimentCell::mode)
        .def_readonly("loss", &ExperimentCell::loss)
        .def_readonly("seed", &ExperimentCell::seed)
        .def_readonly("converged", &ExperimentCell::converged)
        .def_readonly("map50", &ExperimentCell::map50)
        .def_readonly("map75", &ExperimentCell::map75)
        .def_readonly("map_coco", &ExperimentCell::map_coco);

    m.def("run_experiment", &run_experiment, py::arg("train_corpus"),
          py::arg("test_corpus"), py::arg("modes"), py::arg("losses"),
          py::arg("base_config"), py::arg("curation_seed"));
}
