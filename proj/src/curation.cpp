#include "brlkit/curation.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "brlkit/rng.hpp"

namespace brlkit {

CurationMode curation_mode_from_string(const std::string& s) {
    if (s == "normal") return CurationMode::normal;
    if (s == "easy") return CurationMode::easy;
    if (s == "hard") return CurationMode::hard;
    if (s == "extreme") return CurationMode::extreme;
    throw std::invalid_argument("unknown curation mode: " + s);
}

std::string to_string(CurationMode mode) {
    switch (mode) {
        case CurationMode::normal: return "normal";
        case CurationMode::easy: return "easy";
        case CurationMode::hard: return "hard";
        case CurationMode::extreme: return "extreme";
    }
    throw std::invalid_argument("unknown curation mode");
}

std::string CurationReport::summary_text() const {
    std::ostringstream out;
    out << "total_annotations\t" << total_annotations << '\n'
        << "dropped\t" << dropped << '\n'
        << "drop_fraction\t" << drop_fraction << '\n';
    return out.str();
}

std::string CurationReport::histogram_csv() const {
    std::ostringstream out;
    out << "kept_annotations,images\n";
    for (const auto& [kept, images] : kept_histogram) {
        out << kept << ',' << images << '\n';
    }
    return out.str();
}

namespace {

void tally(CurationReport& rep, const ImageRecord& rec) {
    rep.total_annotations += rec.annotations.size();
    const std::size_t kept = rec.kept_count();
    rep.dropped += rec.annotations.size() - kept;
    ++rep.kept_histogram[kept];
}

void finalize(CurationReport& rep) {
    rep.drop_fraction =
        rep.total_annotations == 0
            ? 0.0
            : static_cast<double>(rep.dropped) / rep.total_annotations;
}

// Uniform sample of k distinct indices out of n (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(std::mt19937_64& g,
                                                    std::size_t n,
                                                    std::size_t k) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng::uniform_below(g, n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace

CurationResult curate(const Corpus& corpus, CurationMode mode, uint64_t seed) {
    CurationResult res;
    res.corpus = corpus;
    for (ImageRecord& rec : res.corpus) {
        const std::size_t n = rec.annotations.size();
        if (n == 0) {
            throw std::invalid_argument("curate: image '" + rec.image_id +
                                        "' has no annotations");
        }
        for (Annotation& a : rec.annotations) a.erased = false;

        std::size_t to_erase = 0;
        switch (mode) {
            case CurationMode::normal: to_erase = 0; break;
            case CurationMode::easy: to_erase = n >= 2 ? 1 : 0; break;
            case CurationMode::hard: to_erase = n >= 2 ? n / 2 : 0; break;
            case CurationMode::extreme: to_erase = n - 1; break;
        }
        if (to_erase > 0) {
            auto g = rng::make_stream(seed, rec.image_id);
            for (std::size_t i : sample_without_replacement(g, n, to_erase)) {
                rec.annotations[i].erased = true;
            }
        }
        tally(res.report, rec);
    }
    finalize(res.report);
    return res;
}

CurationReport corpus_stats(const Corpus& corpus) {
    CurationReport rep;
    for (const ImageRecord& rec : corpus) tally(rep, rec);
    finalize(rep);
    return rep;
}

}  // namespace brlkit
