#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "citytypo/embedding.hpp"
#include "citytypo/logistic.hpp"
#include "citytypo/types.hpp"

namespace citytypo {

// The hand-written seed sentence per typology whose embedding initializes a
// keyline set.
struct AnchorText {
    Typology typology = Typology::kCongestion;
    std::string text;
    std::vector<float> embedding;  // unit-normalized
};

// Default anchor texts, embedded with the given encoder.
std::array<AnchorText, 4> default_anchors(SentenceEncoder& encoder);
const std::string& default_anchor_text(Typology t);

enum class KeylineStage { kInitial, kOptimal, kAll };
const std::string& stage_name(KeylineStage s);
KeylineStage stage_from_name(const std::string& name);

struct Keyline {
    std::string text;
    std::vector<float> embedding;  // unit-normalized
    std::string source_city_id;    // empty for the anchor
    double anchor_similarity = 1.0;
};

// Ordered keyline set for one typology; keylines[0] is always the anchor.
struct KeylineSet {
    Typology typology = Typology::kCongestion;
    KeylineStage stage = KeylineStage::kInitial;
    std::vector<Keyline> keylines;

    std::vector<std::vector<float>> stacked_embeddings() const;
};

struct Candidate {
    std::string text;
    std::vector<float> embedding;
    std::string source_city_id;
    double anchor_similarity = 0.0;
};

// One candidate per positive train city, deduplicated on exact text and
// sorted by descending anchor similarity (ties broken by text).
struct CandidateList {
    Typology typology = Typology::kCongestion;
    std::vector<Candidate> entries;
};

// ---------------------------------------------------------------------------
// Features

// max over the M x K similarity matrix between page sentences and keylines.
double keyline_feature(const EmbeddingMatrix& city, const KeylineSet& keys);

// The 5 model inputs for one city. Keyline entries live in [-1, 1]; density
// is already min-max normalized into [0, 1].
struct FeatureVector {
    std::array<double, 4> keyline{};  // indexed by Typology
    double density = 0.0;
};

class DensityTransform;  // corpus.hpp

FeatureVector assemble_features(const EmbeddingMatrix& city,
                                const std::array<KeylineSet, 4>& sets,
                                const DensityTransform& density_transform,
                                std::optional<double> raw_density);

// ---------------------------------------------------------------------------
// Candidate extraction

struct ExtractedCandidate {
    std::string text;
    double score = 0.0;
    std::size_t sentence_index = 0;
};

// argmax page sentence by similarity to the anchor; ties go to the lowest
// sentence index. Throws std::domain_error on an empty page.
ExtractedCandidate extract_candidate(const EmbeddingMatrix& city,
                                     const std::vector<std::string>& sentences,
                                     const AnchorText& anchor);

using EmbeddingLookup = std::function<const EmbeddingMatrix&(const std::string& city_id)>;

// Candidates over the positive train cities. Cities with empty pages are
// skipped with a warning. Throws DataError when no city yields a candidate.
CandidateList collect_candidates(const std::vector<const CityRecord*>& positive_train_records,
                                 const EmbeddingLookup& embeddings, const AnchorText& anchor,
                                 std::vector<std::string>* warnings = nullptr);

KeylineSet make_initial_set(const AnchorText& anchor);
// anchor + first `count` candidates (count = list size gives the "all" set).
KeylineSet make_prefix_set(const AnchorText& anchor, const CandidateList& candidates,
                           std::size_t count, KeylineStage stage);

// ---------------------------------------------------------------------------
// Greedy keyline-set expansion

struct CvConfig {
    std::size_t folds = 3;
    std::size_t repeats = 3;
    std::uint64_t seed = 0;
};

// Stratified fold assignment (one fold index per sample). Reshuffles with
// seed+1 when a fold would see a single class; throws DataError when class
// counts make that unavoidable.
std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t n_folds,
                                          std::uint64_t seed);

// Mean validation AUC over folds x repeats for a fixed design matrix; fold
// results are reduced in fold order so the mean is deterministic.
double cv_mean_auc(const DesignMatrix& x, const std::vector<int>& y, const CvConfig& cv,
                   const TrainConfig& trainer);

struct TrajectoryPoint {
    std::size_t expansion = 0;  // number of candidates in the set (e)
    double mean_auc = 0.0;
    double lift_pct = 0.0;  // vs the anchor-only model at e=0
};

struct ExpansionResult {
    KeylineSet optimal;
    std::size_t max_expansion = 0;
    std::vector<TrajectoryPoint> trajectory;  // e = 0 .. |candidates|
};

// Greedy expansion: iterate e = 1..|candidates|; the task's keyline set is
// the anchor plus the first e candidates while the other three features stay
// anchor-only; each prefix is scored by mean cross-validated AUC of a
// logistic model on the four keyline features; the best e under strict
// improvement over e=0 wins (no improvement means an anchor-only set).
ExpansionResult expand_keylines(Typology task, const CandidateList& candidates,
                                const std::vector<const CityRecord*>& train_records,
                                const EmbeddingLookup& embeddings,
                                const std::array<AnchorText, 4>& anchors, const CvConfig& cv,
                                const TrainConfig& trainer = {});

// ---------------------------------------------------------------------------
// Artifact files

// Human-readable keyline set file (diffable); parsing re-embeds the texts.
void save_keyline_set(const std::string& path, const KeylineSet& set,
                      const std::string& encoder_id, std::uint64_t input_hash);
KeylineSet load_keyline_set(const std::string& path, SentenceEncoder& encoder);

void save_trajectory(const std::string& path, const std::vector<TrajectoryPoint>& trajectory,
                     std::uint64_t input_hash);
std::vector<TrajectoryPoint> load_trajectory(const std::string& path);

}  // namespace citytypo
