#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "citytypo/corpus.hpp"
#include "citytypo/errors.hpp"
#include "citytypo/keyline.hpp"
#include "support/planted.hpp"

using namespace citytypo;

namespace {

constexpr std::size_t kDim = 64;

FixtureEncoder test_encoder() { return FixtureEncoder(kDim, 0xFEED); }

EmbeddingMatrix embed(const std::vector<std::string>& sentences, FixtureEncoder& enc,
                      const std::string& id = "city") {
    return embed_sentences(sentences, enc, id);
}

KeylineSet set_of(FixtureEncoder& enc, Typology t, const std::vector<std::string>& texts) {
    KeylineSet set;
    set.typology = t;
    for (const auto& text : texts) {
        Keyline k;
        k.text = text;
        k.embedding = embed_one(text, enc);
        set.keylines.push_back(std::move(k));
    }
    return set;
}

}  // namespace

TEST_CASE("default anchors carry the canonical seed texts") {
    CHECK(default_anchor_text(Typology::kCongestion) == "the city has heavy traffic congestion");
    CHECK(default_anchor_text(Typology::kAuto) == "most people in the city use cars");
    CHECK(default_anchor_text(Typology::kTransit) ==
          "most people in the city use public transit like bus and metro");
    CHECK(default_anchor_text(Typology::kBike) == "many people in the city use bike or cycle");

    auto enc = test_encoder();
    auto anchors = default_anchors(enc);
    for (Typology t : kAllTypologies) {
        auto ti = static_cast<std::size_t>(t);
        CHECK(anchors[ti].typology == t);
        CHECK(anchors[ti].embedding.size() == kDim);
    }
}

TEST_CASE("keyline_feature of a page equal to its sole keyline is 1") {
    auto enc = test_encoder();
    std::string text = "trams cross the river at dawn";
    EmbeddingMatrix city = embed({text}, enc);
    KeylineSet keys = set_of(enc, Typology::kTransit, {text});
    CHECK(std::abs(keyline_feature(city, keys) - 1.0) < 1e-6);
}

TEST_CASE("keyline_feature equals the brute-force max over all pairs") {
    auto enc = test_encoder();
    EmbeddingMatrix city = embed({"the orchard road is quiet", "ferries carry most commuters",
                                  "the granite quarry closed", "buses run along the shore"},
                                 enc);
    KeylineSet keys = set_of(enc, Typology::kTransit,
                             {"most people ride the ferry", "commuters take the bus",
                              "the city has a metro"});
    double brute = -2.0;
    for (std::size_t i = 0; i < city.rows; ++i) {
        for (const auto& k : keys.keylines) {
            brute = std::max(brute, cosine_similarity(city.row(i),
                                                      std::span<const float>(k.embedding)));
        }
    }
    CHECK(keyline_feature(city, keys) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("keyline_feature rejects empty inputs") {
    auto enc = test_encoder();
    EmbeddingMatrix empty;
    empty.dim = kDim;
    KeylineSet keys = set_of(enc, Typology::kAuto, {"cars everywhere"});
    CHECK_THROWS_AS(keyline_feature(empty, keys), std::domain_error);

    EmbeddingMatrix city = embed({"one sentence"}, enc);
    KeylineSet no_keys;
    CHECK_THROWS_AS(keyline_feature(city, no_keys), std::domain_error);
}

TEST_CASE("max-pooling is exactly monotone under keyline-set growth") {
    auto enc = test_encoder();
    std::mt19937 rng(2024);
    planted::Corpus corpus = planted::make_corpus(17);
    auto embedded = planted::embed_all(corpus, enc);

    std::vector<std::string> pool = {"the city has narrow lanes", "most goods arrive by barge",
                                     "cycling is popular along the canal",
                                     "the ring road is often jammed",
                                     "street markets open at sunrise"};
    for (int trial = 0; trial < 60; ++trial) {
        const auto& record = corpus.records[rng() % corpus.records.size()];
        const EmbeddingMatrix& city = embedded.at(record.city_id);
        std::size_t n_small = 1 + rng() % pool.size();
        std::size_t n_big = n_small + rng() % (pool.size() - n_small + 1);
        KeylineSet small = set_of(enc, Typology::kCongestion,
                                  std::vector<std::string>(pool.begin(), pool.begin() + n_small));
        KeylineSet big = set_of(enc, Typology::kCongestion,
                                std::vector<std::string>(pool.begin(), pool.begin() + n_big));
        CHECK(keyline_feature(city, big) >= keyline_feature(city, small));
    }
}

TEST_CASE("extract_candidate: singleton page and planted argmax with tie-break") {
    auto enc = test_encoder();
    std::vector<std::string> one = {"the only sentence"};
    EmbeddingMatrix m1 = embed(one, enc);
    AnchorText anchor{Typology::kCongestion, "the city has heavy traffic congestion",
                      embed_one("the city has heavy traffic congestion", enc)};
    ExtractedCandidate c1 = extract_candidate(m1, one, anchor);
    CHECK(c1.text == one[0]);
    CHECK(c1.sentence_index == 0);

    // sentence 2 planted to dominate
    std::vector<std::string> sents = {"the pottery fair", "the almanac archive",
                                      "the city has heavy traffic congestion today",
                                      "the basilica garden"};
    EmbeddingMatrix m2 = embed(sents, enc);
    ExtractedCandidate c2 = extract_candidate(m2, sents, anchor);
    CHECK(c2.sentence_index == 2);
    CHECK(c2.text == sents[2]);
    CHECK(c2.score == doctest::Approx(max_similarity(m2, anchor.embedding)));

    // exact duplicate sentence: the lower index wins
    std::vector<std::string> dup = {"x y z", "the city has heavy traffic congestion",
                                    "the city has heavy traffic congestion"};
    EmbeddingMatrix m3 = embed(dup, enc);
    CHECK(extract_candidate(m3, dup, anchor).sentence_index == 1);

    EmbeddingMatrix empty;
    empty.dim = kDim;
    CHECK_THROWS_AS(extract_candidate(empty, {}, anchor), std::domain_error);
}

TEST_CASE("collect_candidates sorts, deduplicates and validates") {
    auto enc = test_encoder();
    planted::Corpus corpus = planted::make_corpus(3, {4, 4, 8});
    auto embedded = planted::embed_all(corpus, enc);
    auto anchors = default_anchors(enc);

    std::vector<const CityRecord*> positives;
    for (const auto& r : corpus.records) {
        if (r.typology_label == Typology::kCongestion) positives.push_back(&r);
    }
    REQUIRE(positives.size() == 8);

    CandidateList list = collect_candidates(positives, planted::lookup_of(embedded),
                                            anchors[0]);
    // two planted signals shared by 4 cities each collapse to two candidates
    CHECK(list.entries.size() == 2);
    for (std::size_t i = 1; i < list.entries.size(); ++i) {
        CHECK(list.entries[i - 1].anchor_similarity >= list.entries[i].anchor_similarity);
    }
    for (const auto& c : list.entries) {
        bool verbatim = false;
        for (const CityRecord* p : positives) {
            for (const auto& s : p->sentences) verbatim |= s == c.text;
        }
        CHECK(verbatim);
    }

    CHECK_THROWS_AS(collect_candidates({}, planted::lookup_of(embedded), anchors[0]), DataError);

    // a positive city with an empty page is skipped with a warning
    CityRecord empty_city;
    empty_city.city_id = "empty";
    empty_city.typology_label = Typology::kCongestion;
    auto with_empty = positives;
    with_empty.push_back(&empty_city);
    std::vector<std::string> warnings;
    CandidateList list2 = collect_candidates(with_empty, planted::lookup_of(embedded), anchors[0],
                                             &warnings);
    CHECK(list2.entries.size() == list.entries.size());
    CHECK(warnings.size() == 1);
}

TEST_CASE("stratified folds cover both classes and are deterministic") {
    std::vector<int> y;
    for (int i = 0; i < 30; ++i) y.push_back(i % 3 == 0 ? 1 : 0);
    auto f1 = stratified_folds(y, 3, 99);
    auto f2 = stratified_folds(y, 3, 99);
    CHECK(f1 == f2);
    for (std::size_t fold = 0; fold < 3; ++fold) {
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (f1[i] != fold) continue;
            (y[i] == 1 ? pos : neg) = true;
        }
        CHECK(pos);
        CHECK(neg);
    }
    // two positives cannot stratify into three folds
    std::vector<int> thin = {1, 1, 0, 0, 0, 0, 0, 0};
    CHECK_THROWS_AS(stratified_folds(thin, 3, 1), DataError);
}

TEST_CASE("greedy expansion matches the exhaustive prefix oracle on planted corpora") {
    auto enc = test_encoder();
    for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
        planted::Corpus corpus = planted::make_corpus(seed);
        auto embedded = planted::embed_all(corpus, enc);
        auto anchors = default_anchors(enc);
        auto lookup = planted::lookup_of(embedded);

        std::vector<const CityRecord*> train;
        std::vector<const CityRecord*> positives;
        for (const auto& r : corpus.records) {
            train.push_back(&r);
            if (r.typology_label == Typology::kCongestion) positives.push_back(&r);
        }
        CandidateList candidates = collect_candidates(positives, lookup, anchors[0]);

        CvConfig cv;
        cv.seed = 1000 + seed;
        ExpansionResult result = expand_keylines(Typology::kCongestion, candidates, train, lookup,
                                                 anchors, cv);

        planted::PrefixOracle oracle = planted::exhaustive_prefix_oracle(
            Typology::kCongestion, candidates, train, lookup, anchors, cv, TrainConfig{});

        REQUIRE(result.trajectory.size() == oracle.mean_auc.size());
        for (std::size_t e = 0; e < oracle.mean_auc.size(); ++e) {
            CHECK(result.trajectory[e].mean_auc == doctest::Approx(oracle.mean_auc[e]).epsilon(1e-9));
        }
        CHECK(result.max_expansion == oracle.argmax);
        // expansion dominance and anchor preservation
        CHECK(result.trajectory[result.max_expansion].mean_auc >= result.trajectory[0].mean_auc);
        REQUIRE_FALSE(result.optimal.keylines.empty());
        CHECK(result.optimal.keylines[0].text == anchors[0].text);
        CHECK(result.optimal.keylines.size() == result.max_expansion + 1);
        // candidate provenance: every non-anchor keyline is verbatim from a positive page
        for (std::size_t i = 1; i < result.optimal.keylines.size(); ++i) {
            bool verbatim = false;
            for (const CityRecord* p : positives) {
                for (const auto& s : p->sentences) verbatim |= s == result.optimal.keylines[i].text;
            }
            CHECK(verbatim);
        }
        // the planted corpus is built so both signal prefixes win
        CHECK(result.max_expansion >= 2);
        CHECK(result.trajectory[result.max_expansion].mean_auc >
              result.trajectory[0].mean_auc);
    }
}

TEST_CASE("expansion with no improving candidate keeps the anchor-only set") {
    auto enc = test_encoder();
    // positives contain the anchor text verbatim: anchor-only already perfect
    planted::Corpus corpus = planted::make_corpus(5, {6, 6, 12});
    for (auto& r : corpus.records) {
        if (r.typology_label == Typology::kCongestion) {
            r.sentences.push_back(default_anchor_text(Typology::kCongestion));
        }
    }
    auto embedded = planted::embed_all(corpus, enc);
    auto anchors = default_anchors(enc);
    auto lookup = planted::lookup_of(embedded);
    std::vector<const CityRecord*> train;
    std::vector<const CityRecord*> positives;
    for (const auto& r : corpus.records) {
        train.push_back(&r);
        if (r.typology_label == Typology::kCongestion) positives.push_back(&r);
    }
    CandidateList candidates = collect_candidates(positives, lookup, anchors[0]);
    CvConfig cv;
    cv.seed = 77;
    ExpansionResult result = expand_keylines(Typology::kCongestion, candidates, train, lookup,
                                             anchors, cv);
    CHECK(result.trajectory[0].mean_auc == 1.0);
    CHECK(result.max_expansion == 0);
    CHECK(result.optimal.keylines.size() == 1);
    CHECK(result.optimal.keylines[0].text == anchors[0].text);
}

TEST_CASE("expansion is deterministic under a fixed seed") {
    auto enc = test_encoder();
    planted::Corpus corpus = planted::make_corpus(21);
    auto embedded = planted::embed_all(corpus, enc);
    auto anchors = default_anchors(enc);
    auto lookup = planted::lookup_of(embedded);
    std::vector<const CityRecord*> train;
    std::vector<const CityRecord*> positives;
    for (const auto& r : corpus.records) {
        train.push_back(&r);
        if (r.typology_label == Typology::kCongestion) positives.push_back(&r);
    }
    CandidateList candidates = collect_candidates(positives, lookup, anchors[0]);
    CvConfig cv;
    cv.seed = 31337;
    ExpansionResult a = expand_keylines(Typology::kCongestion, candidates, train, lookup, anchors, cv);
    ExpansionResult b = expand_keylines(Typology::kCongestion, candidates, train, lookup, anchors, cv);
    CHECK(a.max_expansion == b.max_expansion);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t e = 0; e < a.trajectory.size(); ++e) {
        CHECK(a.trajectory[e].mean_auc == b.trajectory[e].mean_auc);
        CHECK(a.trajectory[e].lift_pct == b.trajectory[e].lift_pct);
    }
}

TEST_CASE("trajectory lift is measured against the anchor-only baseline") {
    auto enc = test_encoder();
    planted::Corpus corpus = planted::make_corpus(8);
    auto embedded = planted::embed_all(corpus, enc);
    auto anchors = default_anchors(enc);
    auto lookup = planted::lookup_of(embedded);
    std::vector<const CityRecord*> train;
    std::vector<const CityRecord*> positives;
    for (const auto& r : corpus.records) {
        train.push_back(&r);
        if (r.typology_label == Typology::kCongestion) positives.push_back(&r);
    }
    CandidateList candidates = collect_candidates(positives, lookup, anchors[0]);
    CvConfig cv;
    cv.seed = 5;
    ExpansionResult result = expand_keylines(Typology::kCongestion, candidates, train, lookup,
                                             anchors, cv);
    CHECK(result.trajectory[0].lift_pct == 0.0);
    double base = result.trajectory[0].mean_auc;
    for (const auto& p : result.trajectory) {
        CHECK(p.lift_pct == doctest::Approx((p.mean_auc - base) / base * 100.0));
    }
}

TEST_CASE("assemble_features composes the four keyline features and density") {
    auto enc = test_encoder();
    auto anchors = default_anchors(enc);
    std::array<KeylineSet, 4> sets;
    for (Typology t : kAllTypologies) {
        sets[static_cast<std::size_t>(t)] = make_initial_set(anchors[static_cast<std::size_t>(t)]);
    }
    // a page that is exactly the four anchor texts
    std::vector<std::string> page;
    for (Typology t : kAllTypologies) page.push_back(default_anchor_text(t));
    EmbeddingMatrix city = embed(page, enc);

    CityRecord a, b;
    a.density_per_sq_mi = 100.0;
    b.density_per_sq_mi = 300.0;
    DensityTransform dt = fit_density_transform({&a, &b});

    FeatureVector f = assemble_features(city, sets, dt, 200.0);
    for (Typology t : kAllTypologies) {
        CHECK(std::abs(f.keyline[static_cast<std::size_t>(t)] - 1.0) < 1e-6);
        CHECK(f.keyline[static_cast<std::size_t>(t)] ==
              keyline_feature(city, sets[static_cast<std::size_t>(t)]));
    }
    CHECK(f.density == doctest::Approx(0.5));
}

TEST_CASE("keyline set and trajectory files round-trip") {
    auto enc = test_encoder();
    auto dir = std::filesystem::temp_directory_path() / "citytypo_keyline_files";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    planted::Corpus corpus = planted::make_corpus(9, {3, 3, 6});
    auto embedded = planted::embed_all(corpus, enc);
    auto anchors = default_anchors(enc);
    std::vector<const CityRecord*> positives;
    for (const auto& r : corpus.records) {
        if (r.typology_label == Typology::kCongestion) positives.push_back(&r);
    }
    CandidateList candidates =
        collect_candidates(positives, planted::lookup_of(embedded), anchors[0]);
    KeylineSet set = make_prefix_set(anchors[0], candidates, candidates.entries.size(),
                                     KeylineStage::kAll);

    std::string path = (dir / "keys.txt").string();
    save_keyline_set(path, set, enc.encoder_id(), 0xDEADBEEF);
    KeylineSet loaded = load_keyline_set(path, enc);
    REQUIRE(loaded.keylines.size() == set.keylines.size());
    CHECK(loaded.typology == set.typology);
    CHECK(loaded.stage == set.stage);
    for (std::size_t i = 0; i < set.keylines.size(); ++i) {
        CHECK(loaded.keylines[i].text == set.keylines[i].text);
        CHECK(loaded.keylines[i].source_city_id == set.keylines[i].source_city_id);
        CHECK(loaded.keylines[i].anchor_similarity == set.keylines[i].anchor_similarity);
        CHECK(loaded.keylines[i].embedding == set.keylines[i].embedding);  // bitwise re-embed
    }

    std::vector<TrajectoryPoint> trajectory = {{0, 0.53, 0.0}, {1, 0.61, 15.09}, {2, 0.83, 56.6}};
    std::string tpath = (dir / "trajectory.tsv").string();
    save_trajectory(tpath, trajectory, 0xBEEF);
    auto tloaded = load_trajectory(tpath);
    REQUIRE(tloaded.size() == 3);
    CHECK(tloaded[2].expansion == 2);
    CHECK(tloaded[2].mean_auc == 0.83);
    CHECK(tloaded[1].lift_pct == 15.09);
}
