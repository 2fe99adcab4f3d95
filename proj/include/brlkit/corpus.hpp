#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brlkit/geometry.hpp"

namespace brlkit {

struct Annotation {
    Box box;
    std::string category;
    // Hidden from training but retained in memory for audits.
    bool erased = false;
};

struct ImageRecord {
    std::string image_id;
    double width = 0.0;
    double height = 0.0;
    std::vector<Annotation> annotations;

    // Synthetic-scene extras. `objects` is the latent scene content: every
    // object physically present, whether or not its annotation survives
    // curation. Empty for plain annotation corpora.
    std::vector<Box> objects;
    uint64_t scene_seed = 0;
    double feature_noise = 0.0;

    std::size_t kept_count() const {
        std::size_t n = 0;
        for (const auto& a : annotations)
            if (!a.erased) ++n;
        return n;
    }
};

using Corpus = std::vector<ImageRecord>;

// One JSON object per line: image_id, width, height, annotations
// [{x1,y1,x2,y2,category}], plus the synthetic-scene fields when present.
// Erased annotations are omitted unless include_erased is set (audit output
// marks them with "erased": true).
void save_corpus(const Corpus& corpus, const std::string& path,
                 bool include_erased = false);
Corpus load_corpus(const std::string& path);

std::string corpus_to_jsonl(const Corpus& corpus, bool include_erased = false);
Corpus corpus_from_jsonl(const std::string& text);

}  // namespace brlkit
