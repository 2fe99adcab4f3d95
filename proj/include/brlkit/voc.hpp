#pragma once

#include <string>
#include <vector>

#include "brlkit/corpus.hpp"

namespace brlkit {

// Parses one PASCAL-VOC annotation XML (filename, size, object/name,
// object/bndbox, object/difficult). Difficult objects are included.
ImageRecord parse_voc_xml(const std::string& path);

// Converts every *.xml in a directory, ordered by filename.
Corpus convert_voc_dir(const std::string& dir);

}  // namespace brlkit
