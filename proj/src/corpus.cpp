#include "brlkit/corpus.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace brlkit {

using nlohmann::json;

namespace {

json box_to_json(const Box& b) {
    return json{{"x1", b.x1}, {"y1", b.y1}, {"x2", b.x2}, {"y2", b.y2}};
}

Box box_from_json(const json& j) {
    Box b{j.at("x1").get<double>(), j.at("y1").get<double>(),
          j.at("x2").get<double>(), j.at("y2").get<double>()};
    check_box(b, "annotation box");
    return b;
}

}  // namespace

std::string corpus_to_jsonl(const Corpus& corpus, bool include_erased) {
    std::ostringstream out;
    for (const ImageRecord& rec : corpus) {
        json jrec;
        jrec["image_id"] = rec.image_id;
        jrec["width"] = rec.width;
        jrec["height"] = rec.height;
        json anns = json::array();
        for (const Annotation& a : rec.annotations) {
            if (a.erased && !include_erased) continue;
            json ja = box_to_json(a.box);
            ja["category"] = a.category;
            if (a.erased) ja["erased"] = true;
            anns.push_back(std::move(ja));
        }
        jrec["annotations"] = std::move(anns);
        if (!rec.objects.empty()) {
            json objs = json::array();
            for (const Box& b : rec.objects) objs.push_back(box_to_json(b));
            jrec["objects"] = std::move(objs);
            jrec["scene_seed"] = rec.scene_seed;
            jrec["feature_noise"] = rec.feature_noise;
        }
        out << jrec.dump() << '\n';
    }
    return out.str();
}

Corpus corpus_from_jsonl(const std::string& text) {
    Corpus corpus;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json jrec;
        try {
            jrec = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("corpus line " + std::to_string(lineno) +
                                     ": " + e.what());
        }
        try {
            ImageRecord rec;
            rec.image_id = jrec.at("image_id").get<std::string>();
            rec.width = jrec.at("width").get<double>();
            rec.height = jrec.at("height").get<double>();
            if (!(rec.width > 0.0) || !(rec.height > 0.0)) {
                throw std::runtime_error("degenerate image size");
            }
            for (const json& ja : jrec.at("annotations")) {
                Annotation a;
                a.box = box_from_json(ja);
                a.category = ja.at("category").get<std::string>();
                a.erased = ja.value("erased", false);
                rec.annotations.push_back(std::move(a));
            }
            if (jrec.contains("objects")) {
                for (const json& jo : jrec["objects"]) {
                    rec.objects.push_back(box_from_json(jo));
                }
                rec.scene_seed = jrec.value("scene_seed", uint64_t{0});
                rec.feature_noise = jrec.value("feature_noise", 0.0);
            }
            corpus.push_back(std::move(rec));
        } catch (const std::exception& e) {
            throw std::runtime_error("corpus line " + std::to_string(lineno) +
                                     ": " + e.what());
        }
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path,
                 bool include_erased) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << corpus_to_jsonl(corpus, include_erased);
}

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return corpus_from_jsonl(buf.str());
}

}  // namespace brlkit
