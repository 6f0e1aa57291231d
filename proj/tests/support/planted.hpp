#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "citytypo/keyline.hpp"
#include "citytypo/types.hpp"

namespace planted {

// Synthetic corpus with a known signal structure for the congestion task:
// positive cities share one of two verbatim "signal" sentences that are only
// moderately similar to the anchor, negatives carry per-city confound
// sentences with comparable anchor similarity, and every city draws one
// sentence from a shared generic pool so the non-task features stay
// label-independent. Under the hashed fixture encoder the anchor-only model
// is mediocre while the two signal sentences, once added as keylines, push
// the positives to feature 1.0.
struct Corpus {
    std::vector<citytypo::CityRecord> records;
    std::string signal1;
    std::string signal2;
    citytypo::Typology task = citytypo::Typology::kCongestion;
};

struct Params {
    std::size_t n_pos1 = 10;
    std::size_t n_pos2 = 10;
    std::size_t n_neg = 20;
    bool with_infobox = true;  // population/area so density features exist
};

Corpus make_corpus(std::uint64_t seed, const Params& params = {});

// Materialize the corpus as fixture page files plus a dataset table with
// file:// URLs, for driving the full pipeline. Returns the dataset path.
std::string write_fixture_pages(const Corpus& corpus, const std::string& dir);

std::map<std::string, citytypo::EmbeddingMatrix> embed_all(const Corpus& corpus,
                                                           citytypo::SentenceEncoder& encoder);
citytypo::EmbeddingLookup lookup_of(const std::map<std::string, citytypo::EmbeddingMatrix>& map);

// Independent oracle for the greedy expansion: evaluates EVERY candidate
// prefix e = 0..n by assembling the four keyline features through
// keyline_feature() and running its own stratified-CV loop, then applies the
// strict-improvement argmax rule. Deliberately avoids the incremental
// prefix-max path used by expand_keylines.
struct PrefixOracle {
    std::vector<double> mean_auc;  // index e
    std::size_t argmax = 0;
};

PrefixOracle exhaustive_prefix_oracle(citytypo::Typology task,
                                      const citytypo::CandidateList& candidates,
                                      const std::vector<const citytypo::CityRecord*>& train,
                                      const citytypo::EmbeddingLookup& embeddings,
                                      const std::array<citytypo::AnchorText, 4>& anchors,
                                      const citytypo::CvConfig& cv,
                                      const citytypo::TrainConfig& trainer);

}  // namespace planted
