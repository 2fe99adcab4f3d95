#include <cstdio>
#include <fstream>

#include <doctest.h>

#include "brlkit/corpus.hpp"
#include "brlkit/curation.hpp"
#include "brlkit/detector.hpp"
#include "brlkit/voc.hpp"

using namespace brlkit;

TEST_CASE("corpus jsonl round trip") {
    SceneConfig sc;
    sc.num_scenes = 15;
    sc.seed = 9;
    const Corpus corpus = generate_scenes(sc);
    const Corpus back = corpus_from_jsonl(corpus_to_jsonl(corpus));
    // serialization is the canonical form; round-tripping is a fixed point
    CHECK(corpus_to_jsonl(back) == corpus_to_jsonl(corpus));
    REQUIRE(back.size() == corpus.size());
    CHECK(back[3].objects == corpus[3].objects);
    CHECK(back[3].scene_seed == corpus[3].scene_seed);
}

TEST_CASE("erased annotations stay out of training corpora") {
    SceneConfig sc;
    sc.num_scenes = 8;
    sc.min_objects = 3;
    const Corpus corpus = generate_scenes(sc);
    const CurationResult cur = curate(corpus, CurationMode::extreme, 2);

    const Corpus training = corpus_from_jsonl(corpus_to_jsonl(cur.corpus));
    for (const auto& rec : training) {
        CHECK(rec.annotations.size() == 1);
        // latent objects survive: the scene content is unchanged
        CHECK(rec.objects.size() >= 3);
    }

    const Corpus audit =
        corpus_from_jsonl(corpus_to_jsonl(cur.corpus, /*include_erased=*/true));
    for (std::size_t i = 0; i < audit.size(); ++i) {
        CHECK(audit[i].annotations.size() == corpus[i].annotations.size());
        CHECK(audit[i].kept_count() == 1);
    }
}

TEST_CASE("corpus parse errors carry line numbers") {
    try {
        (void)corpus_from_jsonl("{\"image_id\": \"x\"}\n");
        FAIL("expected parse failure");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
    // zero-area box rejected at parse time
    const std::string bad =
        R"({"image_id":"x","width":10,"height":10,"annotations":[{"x1":1,"y1":1,"x2":1,"y2":5,"category":"c"}]})";
    CHECK_THROWS_AS((void)corpus_from_jsonl(bad), std::runtime_error);
}

TEST_CASE("voc xml conversion") {
    const char* xml = R"(<annotation>
  <filename>000001.jpg</filename>
  <size><width>353</width><height>500</height><depth>3</depth></size>
  <object>
    <name>dog</name>
    <difficult>0</difficult>
    <bndbox><xmin>48</xmin><ymin>240</ymin><xmax>195</xmax><ymax>371</ymax></bndbox>
  </object>
  <object>
    <name>person</name>
    <difficult>1</difficult>
    <bndbox><xmin>8</xmin><ymin>12</ymin><xmax>352</xmax><ymax>498</ymax></bndbox>
  </object>
</annotation>
)";
    const std::string path = "test_voc_sample.xml";
    {
        std::ofstream out(path);
        out << xml;
    }
    const ImageRecord rec = parse_voc_xml(path);
    CHECK(rec.image_id == "000001.jpg");
    CHECK(rec.width == 353.0);
    CHECK(rec.height == 500.0);
    REQUIRE(rec.annotations.size() == 2);  // difficult objects included
    CHECK(rec.annotations[0].category == "dog");
    CHECK(rec.annotations[0].box == Box{48.0, 240.0, 195.0, 371.0});
    CHECK(rec.annotations[1].category == "person");
    std::remove(path.c_str());
}
