#include "brlkit/voc.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

namespace brlkit {

namespace pt = boost::property_tree;

ImageRecord parse_voc_xml(const std::string& path) {
    pt::ptree tree;
    try {
        pt::read_xml(path, tree);
    } catch (const pt::xml_parser_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }

    try {
        const pt::ptree& ann = tree.get_child("annotation");
        ImageRecord rec;
        rec.image_id = ann.get<std::string>("filename");
        rec.width = ann.get<double>("size.width");
        rec.height = ann.get<double>("size.height");
        if (!(rec.width > 0.0) || !(rec.height > 0.0)) {
            throw std::runtime_error("degenerate image size");
        }
        for (const auto& [key, node] : ann) {
            if (key != "object") continue;
            Annotation a;
            a.category = node.get<std::string>("name");
            a.box.x1 = node.get<double>("bndbox.xmin");
            a.box.y1 = node.get<double>("bndbox.ymin");
            a.box.x2 = node.get<double>("bndbox.xmax");
            a.box.y2 = node.get<double>("bndbox.ymax");
            check_box(a.box, "bndbox");
            rec.annotations.push_back(std::move(a));
        }
        return rec;
    } catch (const pt::ptree_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

Corpus convert_voc_dir(const std::string& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".xml") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    Corpus corpus;
    corpus.reserve(files.size());
    for (const auto& f : files) corpus.push_back(parse_voc_xml(f.string()));
    return corpus;
}

}  // namespace brlkit
