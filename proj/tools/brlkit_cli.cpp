// brlkit command-line front end: dataset curation, toy detector training,
// AP evaluation, ablation sweeps, and loss-curve dumps.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "brlkit/curation.hpp"
#include "brlkit/detector.hpp"
#include "brlkit/eval.hpp"
#include "brlkit/loss.hpp"
#include "brlkit/manifest.hpp"
#include "brlkit/voc.hpp"

namespace {

constexpr int kExitInputError = 2;
constexpr int kExitNonConvergence = 3;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
}

std::string dtoa(double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
}

struct TrainFlags {
    std::string loss = "brl";
    double t = 0.5;
    double alpha = 0.5;
    double gamma = 2.0;
    double confusion_weight = 0.1;
    double pos_iou = 0.5;
    double neg_hi = 0.4;
    double confusion_iou = 0.1;
    double lr = 0.5;
    int epochs = 60;
    int batch = 0;
    int feature_dim = 16;
    uint64_t seed = 1;
    double divergence_limit = 1e6;

    void add_options(CLI::App& app, bool with_loss_kind = true) {
        if (with_loss_kind) {
            app.add_option("--loss", loss, "loss kind: fl or brl")
                ->check(CLI::IsMember({"fl", "brl"}));
        }
        app.add_option("--t", t, "recalibration threshold");
        app.add_option("--alpha", alpha, "loss scale alpha_t");
        app.add_option("--gamma", gamma, "focusing exponent");
        app.add_option("--confusion-weight", confusion_weight,
                       "confusion-anchor loss weight");
        app.add_option("--pos-iou", pos_iou, "positive IoU threshold");
        app.add_option("--neg-hi", neg_hi, "upper edge of the negative band");
        app.add_option("--confusion-iou", confusion_iou,
                       "confusion band upper bound");
        app.add_option("--lr", lr, "learning rate");
        app.add_option("--epochs", epochs, "training epochs");
        app.add_option("--batch", batch, "scenes per batch (0 = full batch)");
        app.add_option("--feature-dim", feature_dim, "toy feature width");
        app.add_option("--seed", seed, "training seed")->envname("BRLKIT_SEED");
        app.add_option("--divergence-limit", divergence_limit,
                       "abort when the per-positive loss exceeds this");
    }

    brlkit::TrainConfig to_config() const {
        brlkit::TrainConfig tc;
        tc.kind = brlkit::loss_kind_from_string(loss);
        tc.loss.alpha_t = alpha;
        tc.loss.gamma = gamma;
        tc.loss.recalib_t = t;
        tc.loss.confusion_weight = confusion_weight;
        tc.assignment.pos_iou = pos_iou;
        tc.assignment.neg_hi = neg_hi;
        tc.assignment.confusion_iou = confusion_iou;
        tc.learning_rate = lr;
        tc.epochs = epochs;
        tc.batch_scenes = batch;
        tc.feature_dim = feature_dim;
        tc.seed = seed;
        tc.divergence_limit = divergence_limit;
        return tc;
    }

    void record(brlkit::RunManifest& m) const {
        m.config["loss"] = loss;
        m.config["t"] = dtoa(t);
        m.config["alpha"] = dtoa(alpha);
        m.config["gamma"] = dtoa(gamma);
        m.config["confusion_weight"] = dtoa(confusion_weight);
        m.config["pos_iou"] = dtoa(pos_iou);
        m.config["neg_hi"] = dtoa(neg_hi);
        m.config["confusion_iou"] = dtoa(confusion_iou);
        m.config["lr"] = dtoa(lr);
        m.config["epochs"] = std::to_string(epochs);
        m.config["batch"] = std::to_string(batch);
        m.config["feature_dim"] = std::to_string(feature_dim);
        m.config["seed"] = std::to_string(seed);
        m.config["divergence_limit"] = dtoa(divergence_limit);
    }
};

int cmd_curate(const std::string& corpus_path, const std::string& mode_str,
               uint64_t seed, const std::string& out,
               const std::string& report_path, const std::string& audit,
               const std::string& histogram) {
    const brlkit::Corpus corpus = brlkit::load_corpus(corpus_path);
    for (const auto& rec : corpus) {
        if (rec.annotations.empty()) {
            throw std::runtime_error("image '" + rec.image_id +
                                     "' has no annotations");
        }
    }
    const auto mode = brlkit::curation_mode_from_string(mode_str);
    const brlkit::CurationResult res = brlkit::curate(corpus, mode, seed);
    brlkit::save_corpus(res.corpus, out);
    if (!report_path.empty()) {
        write_text(report_path, res.report.summary_text());
    }
    if (!histogram.empty()) {
        write_text(histogram, res.report.histogram_csv());
    }
    if (!audit.empty()) {
        brlkit::save_corpus(res.corpus, audit, /*include_erased=*/true);
    }

    brlkit::RunManifest m;
    m.command = "curate";
    m.config = {{"mode", mode_str}, {"seed", std::to_string(seed)}};
    m.add_input(corpus_path);
    m.add_output(out);
    if (!report_path.empty()) m.add_output(report_path);
    m.write(out + ".manifest.json");

    std::cout << res.report.summary_text();
    return 0;
}

int cmd_train(const std::string& corpus_path, const TrainFlags& flags,
              const std::string& out_model, const std::string& trace_path) {
    const brlkit::Corpus corpus = brlkit::load_corpus(corpus_path);
    const brlkit::TrainConfig tc = flags.to_config();
    const brlkit::TrainResult res = brlkit::train(corpus, tc);
    if (!trace_path.empty()) {
        write_text(trace_path, brlkit::trace_tsv(res.trace));
    }
    if (!res.converged) {
        std::cerr << "training diverged (loss exceeded "
                  << tc.divergence_limit << " or became non-finite) after "
                  << res.trace.size() << " epochs; no model written\n";
        return kExitNonConvergence;
    }
    res.model.save(out_model);

    brlkit::RunManifest m;
    m.command = "train";
    flags.record(m);
    m.add_input(corpus_path);
    m.add_output(out_model);
    if (!trace_path.empty()) m.add_output(trace_path);
    m.write(out_model + ".manifest.json");
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& dets_path,
             const std::string& test_corpus_path, const std::string& out,
             const std::string& per_iou_path, double score_thr,
             double nms_iou) {
    const brlkit::Corpus test = brlkit::load_corpus(test_corpus_path);
    std::vector<brlkit::Detection> dets;
    if (!model_path.empty()) {
        const auto model = brlkit::DetectorModel::load(model_path);
        dets = brlkit::predict_corpus(model, test, score_thr, nms_iou);
    } else {
        dets = brlkit::load_detections(dets_path);
    }
    const auto gts = brlkit::corpus_ground_truths(test);
    const brlkit::APResult res =
        brlkit::evaluate(dets, gts, brlkit::coco_iou_set());
    write_text(out, brlkit::ap_result_csv(res));
    if (!per_iou_path.empty()) {
        write_text(per_iou_path, brlkit::per_iou_tsv(res));
    }

    brlkit::RunManifest m;
    m.command = "eval";
    m.config = {{"score_thr", dtoa(score_thr)}, {"nms_iou", dtoa(nms_iou)}};
    if (!model_path.empty()) m.add_input(model_path);
    if (!dets_path.empty()) m.add_input(dets_path);
    m.add_input(test_corpus_path);
    m.add_output(out);
    m.write(out + ".manifest.json");

    std::cout << "mAP50 " << res.map50 << "\nmAP75 " << res.map75
              << "\nmAP_coco " << res.map_coco << '\n';
    return 0;
}

int cmd_sweep(const std::string& axis, const std::vector<double>& values,
              const std::string& train_corpus_path,
              const std::string& test_corpus_path, const std::string& mode_str,
              uint64_t curation_seed, const TrainFlags& flags,
              const std::string& out) {
    const brlkit::Corpus train_corpus = brlkit::load_corpus(train_corpus_path);
    const brlkit::Corpus test_corpus = brlkit::load_corpus(test_corpus_path);
    const auto mode = brlkit::curation_mode_from_string(mode_str);
    const auto test_gts = brlkit::corpus_ground_truths(test_corpus);
    const brlkit::CurationResult cur =
        brlkit::curate(train_corpus, mode, curation_seed);

    std::ostringstream csv;
    csv.precision(17);
    csv << "axis,value,mode,loss_kind,seed,mAP50,mAP75,mAP_coco,converged\n";
    for (double v : values) {
        TrainFlags f = flags;
        if (axis == "t") {
            f.t = v;
        } else if (axis == "weight") {
            f.confusion_weight = v;
        } else {
            f.confusion_iou = v;
        }
        bool converged = false;
        double m50 = 0.0, m75 = 0.0, mc = 0.0;
        try {
            const brlkit::TrainResult tr = brlkit::train(cur.corpus, f.to_config());
            converged = tr.converged;
            if (converged) {
                const auto dets = brlkit::predict_corpus(tr.model, test_corpus);
                const auto ap =
                    brlkit::evaluate(dets, test_gts, brlkit::coco_iou_set());
                m50 = ap.map50;
                m75 = ap.map75;
                mc = ap.map_coco;
            }
        } catch (const std::exception& e) {
            std::cerr << "sweep cell " << axis << "=" << v
                      << " failed: " << e.what() << '\n';
        }
        csv << axis << ',' << v << ',' << mode_str << ',' << f.loss << ','
            << f.seed << ',' << m50 << ',' << m75 << ',' << mc << ','
            << (converged ? 1 : 0) << '\n';
    }
    write_text(out, csv.str());

    brlkit::RunManifest m;
    m.command = "sweep";
    flags.record(m);
    m.config["axis"] = axis;
    m.config["mode"] = mode_str;
    m.config["curation_seed"] = std::to_string(curation_seed);
    m.add_input(train_corpus_path);
    m.add_input(test_corpus_path);
    m.add_output(out);
    m.write(out + ".manifest.json");
    return 0;
}

int cmd_experiment(const std::string& train_corpus_path,
                   const std::string& test_corpus_path,
                   const std::vector<std::string>& mode_names,
                   const std::vector<std::string>& loss_names,
                   uint64_t curation_seed, const TrainFlags& flags,
                   const std::string& out) {
    const brlkit::Corpus train_corpus = brlkit::load_corpus(train_corpus_path);
    const brlkit::Corpus test_corpus = brlkit::load_corpus(test_corpus_path);
    std::vector<brlkit::CurationMode> modes;
    for (const auto& s : mode_names) {
        modes.push_back(brlkit::curation_mode_from_string(s));
    }
    std::vector<brlkit::LossKind> losses;
    for (const auto& s : loss_names) {
        losses.push_back(brlkit::loss_kind_from_string(s));
    }
    const brlkit::TrainConfig base = flags.to_config();
    const auto cells = brlkit::run_experiment(train_corpus, test_corpus, modes,
                                              losses, base, curation_seed);
    write_text(out, brlkit::experiment_csv(cells, base));

    brlkit::RunManifest m;
    m.command = "experiment";
    flags.record(m);
    m.config["curation_seed"] = std::to_string(curation_seed);
    m.add_input(train_corpus_path);
    m.add_input(test_corpus_path);
    m.add_output(out);
    m.write(out + ".manifest.json");
    return 0;
}

int cmd_plot_loss(double alpha, double gamma, double t, int points,
                  const std::string& out) {
    brlkit::LossConfig cfg;
    cfg.alpha_t = alpha;
    cfg.gamma = gamma;
    cfg.recalib_t = t;
    cfg.validate();

    std::ostringstream tsv;
    tsv.precision(17);
    tsv << "p_t\tfl\tbrl\tdfl_dp\tdbrl_dp\n";
    for (int i = 1; i <= points; ++i) {
        const double p = static_cast<double>(i) / (points + 1);
        const brlkit::AnchorProbability pt(p);
        const double dbrl =
            pt.value() == cfg.recalib_t
                ? brlkit::brl_grad(pt, cfg, brlkit::BranchSide::focal)
                : brlkit::brl_grad(pt, cfg);
        tsv << p << '\t' << brlkit::focal_loss(pt, cfg) << '\t'
            << brlkit::brl_loss(pt, cfg) << '\t' << brlkit::focal_grad(pt, cfg)
            << '\t' << dbrl << '\n';
    }
    write_text(out, tsv.str());

    brlkit::RunManifest m;
    m.command = "plot-loss";
    m.config = {{"alpha", dtoa(alpha)},
                {"gamma", dtoa(gamma)},
                {"t", dtoa(t)},
                {"points", std::to_string(points)}};
    m.add_output(out);
    m.write(out + ".manifest.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Background-recalibration detection toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file");

    // curate
    auto* curate = app.add_subcommand("curate", "apply an annotation-erasure mode");
    std::string cu_corpus, cu_mode = "normal", cu_out, cu_report, cu_audit,
                cu_hist;
    uint64_t cu_seed = 1;
    curate->add_option("--corpus", cu_corpus)->required();
    curate->add_option("--mode", cu_mode)
        ->check(CLI::IsMember({"normal", "easy", "hard", "extreme"}));
    curate->add_option("--seed", cu_seed)->envname("BRLKIT_SEED");
    curate->add_option("--out", cu_out)->required();
    curate->add_option("--report", cu_report);
    curate->add_option("--histogram", cu_hist);
    curate->add_option("--audit", cu_audit,
                       "corpus copy with erased annotations flagged");

    // gen-scenes
    auto* gen = app.add_subcommand("gen-scenes", "generate a synthetic corpus");
    brlkit::SceneConfig sc;
    std::string gen_out;
    gen->add_option("--num-scenes", sc.num_scenes);
    gen->add_option("--width", sc.width);
    gen->add_option("--height", sc.height);
    gen->add_option("--min-objects", sc.min_objects);
    gen->add_option("--max-objects", sc.max_objects);
    gen->add_option("--min-size", sc.min_size);
    gen->add_option("--max-size", sc.max_size);
    gen->add_option("--cluster-spread", sc.cluster_spread);
    gen->add_option("--noise", sc.noise);
    gen->add_option("--seed", sc.seed)->envname("BRLKIT_SEED");
    gen->add_option("--out", gen_out)->required();

    // train
    auto* train = app.add_subcommand("train", "train the toy detector");
    std::string tr_corpus, tr_out_model, tr_trace;
    TrainFlags tr_flags;
    train->add_option("--corpus", tr_corpus)->required();
    tr_flags.add_options(*train);
    train->add_option("--out-model", tr_out_model)->required();
    train->add_option("--trace", tr_trace);

    // eval
    auto* eval = app.add_subcommand("eval", "compute AP metrics");
    std::string ev_model, ev_dets, ev_corpus, ev_out, ev_per_iou;
    double ev_score_thr = 0.05, ev_nms = 0.5;
    eval->add_option("--model", ev_model);
    eval->add_option("--detections", ev_dets);
    eval->add_option("--test-corpus", ev_corpus)->required();
    eval->add_option("--out", ev_out)->required();
    eval->add_option("--per-iou", ev_per_iou);
    eval->add_option("--score-thr", ev_score_thr);
    eval->add_option("--nms-iou", ev_nms);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "ablation sweep over one axis");
    std::string sw_axis, sw_train, sw_test, sw_mode = "extreme", sw_out;
    std::vector<double> sw_values;
    uint64_t sw_cseed = 1;
    TrainFlags sw_flags;
    sweep->add_option("--axis", sw_axis)
        ->required()
        ->check(CLI::IsMember({"t", "weight", "confusion-iou"}));
    sweep->add_option("--values", sw_values)->required()->delimiter(',');
    sweep->add_option("--train-corpus", sw_train)->required();
    sweep->add_option("--test-corpus", sw_test)->required();
    sweep->add_option("--mode", sw_mode);
    sweep->add_option("--curation-seed", sw_cseed);
    sw_flags.add_options(*sweep);
    sweep->add_option("--out", sw_out)->required();

    // experiment
    auto* exp = app.add_subcommand("experiment",
                                   "modes x losses matrix, CSV results");
    std::string ex_train, ex_test, ex_out;
    std::vector<std::string> ex_modes = {"normal", "easy", "hard", "extreme"};
    std::vector<std::string> ex_losses = {"fl", "brl"};
    uint64_t ex_cseed = 1;
    TrainFlags ex_flags;
    exp->add_option("--train-corpus", ex_train)->required();
    exp->add_option("--test-corpus", ex_test)->required();
    exp->add_option("--modes", ex_modes)->delimiter(',');
    exp->add_option("--losses", ex_losses)->delimiter(',');
    exp->add_option("--curation-seed", ex_cseed);
    ex_flags.add_options(*exp, /*with_loss_kind=*/false);
    exp->add_option("--out", ex_out)->required();

    // plot-loss
    auto* plot = app.add_subcommand("plot-loss", "dump loss curves as TSV");
    double pl_alpha = 0.5, pl_gamma = 2.0, pl_t = 0.5;
    int pl_points = 999;
    std::string pl_out;
    plot->add_option("--alpha", pl_alpha);
    plot->add_option("--gamma", pl_gamma);
    plot->add_option("--t", pl_t);
    plot->add_option("--points", pl_points);
    plot->add_option("--out", pl_out)->required();

    // voc-convert
    auto* voc = app.add_subcommand("voc-convert",
                                   "convert a PASCAL-VOC annotation directory");
    std::string voc_dir, voc_out;
    voc->add_option("--dir", voc_dir)->required();
    voc->add_option("--out", voc_out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (curate->parsed()) {
            return cmd_curate(cu_corpus, cu_mode, cu_seed, cu_out, cu_report,
                              cu_audit, cu_hist);
        }
        if (gen->parsed()) {
            brlkit::save_corpus(brlkit::generate_scenes(sc), gen_out);
            brlkit::RunManifest m;
            m.command = "gen-scenes";
            m.config = {{"num_scenes", std::to_string(sc.num_scenes)},
                        {"seed", std::to_string(sc.seed)},
                        {"noise", dtoa(sc.noise)}};
            m.add_output(gen_out);
            m.write(gen_out + ".manifest.json");
            return 0;
        }
        if (train->parsed()) {
            return cmd_train(tr_corpus, tr_flags, tr_out_model, tr_trace);
        }
        if (eval->parsed()) {
            if (ev_model.empty() == ev_dets.empty()) {
                std::cerr << "eval: exactly one of --model/--detections\n";
                return kExitInputError;
            }
            return cmd_eval(ev_model, ev_dets, ev_corpus, ev_out, ev_per_iou,
                            ev_score_thr, ev_nms);
        }
        if (sweep->parsed()) {
            return cmd_sweep(sw_axis, sw_values, sw_train, sw_test, sw_mode,
                             sw_cseed, sw_flags, sw_out);
        }
        if (exp->parsed()) {
            return cmd_experiment(ex_train, ex_test, ex_modes, ex_losses,
                                  ex_cseed, ex_flags, ex_out);
        }
        if (plot->parsed()) {
            return cmd_plot_loss(pl_alpha, pl_gamma, pl_t, pl_points, pl_out);
        }
        if (voc->parsed()) {
            brlkit::save_corpus(brlkit::convert_voc_dir(voc_dir), voc_out);
            const auto stats =
                brlkit::corpus_stats(brlkit::load_corpus(voc_out));
            std::cout << stats.summary_text();
            brlkit::RunManifest m;
            m.command = "voc-convert";
            m.add_output(voc_out);
            m.write(voc_out + ".manifest.json");
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    }
    return 0;
}
