#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "brlkit/corpus.hpp"

namespace brlkit {

enum class CurationMode { normal, easy, hard, extreme };

CurationMode curation_mode_from_string(const std::string& s);
std::string to_string(CurationMode mode);

struct CurationReport {
    std::size_t total_annotations = 0;
    std::size_t dropped = 0;
    double drop_fraction = 0.0;
    // kept-annotation count per image -> number of images
    std::map<std::size_t, std::size_t> kept_histogram;

    std::string summary_text() const;
    std::string histogram_csv() const;
};

struct CurationResult {
    Corpus corpus;
    CurationReport report;
};

// Erasure protocols, each keeping at least one annotation per image:
//   normal  — nothing erased
//   easy    — one annotation erased per image with >= 2
//   hard    — floor(n/2) erased per image with n >= 2
//   extreme — all but one uniformly chosen annotation erased
// Erased annotations are flagged, not deleted. Each image draws from a
// substream keyed by its image_id, so results do not depend on corpus order.
// Rejects images with zero annotations.
CurationResult curate(const Corpus& corpus, CurationMode mode, uint64_t seed);

// Report-shaped summary of a corpus as-is (erased annotations counted as
// dropped).
CurationReport corpus_stats(const Corpus& corpus);

}  // namespace brlkit
