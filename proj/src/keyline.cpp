#include "citytypo/keyline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "citytypo/corpus.hpp"
#include "citytypo/errors.hpp"
#include "citytypo/metrics.hpp"
#include "citytypo/util.hpp"

namespace citytypo {

namespace {

const std::array<std::string, 4> kDefaultAnchorTexts = {
    "the city has heavy traffic congestion",
    "most people in the city use cars",
    "most people in the city use public transit like bus and metro",
    "many people in the city use bike or cycle",
};

const std::array<std::string, 3> kStageNames = {"initial", "optimal", "all"};

}  // namespace

const std::string& default_anchor_text(Typology t) {
    return kDefaultAnchorTexts[static_cast<std::size_t>(t)];
}

std::array<AnchorText, 4> default_anchors(SentenceEncoder& encoder) {
    std::array<AnchorText, 4> anchors;
    for (Typology t : kAllTypologies) {
        auto& a = anchors[static_cast<std::size_t>(t)];
        a.typology = t;
        a.text = default_anchor_text(t);
        a.embedding = embed_one(a.text, encoder);
    }
    return anchors;
}

const std::string& stage_name(KeylineStage s) {
    return kStageNames[static_cast<std::size_t>(s)];
}

KeylineStage stage_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kStageNames.size(); ++i) {
        if (kStageNames[i] == name) return static_cast<KeylineStage>(i);
    }
    throw ConfigError("unknown keyline stage: '" + name + "'");
}

std::vector<std::vector<float>> KeylineSet::stacked_embeddings() const {
    std::vector<std::vector<float>> out;
    out.reserve(keylines.size());
    for (const auto& k : keylines) out.push_back(k.embedding);
    return out;
}

double keyline_feature(const EmbeddingMatrix& city, const KeylineSet& keys) {
    if (city.rows == 0) throw std::domain_error("keyline_feature: city has no sentences");
    if (keys.keylines.empty()) throw std::domain_error("keyline_feature: empty keyline set");
    SimilarityMatrix sims = similarity_matrix(city, keys.stacked_embeddings());
    double best = sims.values.front();
    for (double v : sims.values) best = std::max(best, v);
    return best;
}

FeatureVector assemble_features(const EmbeddingMatrix& city,
                                const std::array<KeylineSet, 4>& sets,
                                const DensityTransform& density_transform,
                                std::optional<double> raw_density) {
    FeatureVector f;
    for (Typology t : kAllTypologies) {
        auto i = static_cast<std::size_t>(t);
        if (sets[i].typology != t) {
            throw DataError("keyline set order mismatch: slot " + std::to_string(i) + " holds " +
                            typology_name(sets[i].typology));
        }
        f.keyline[i] = keyline_feature(city, sets[i]);
    }
    f.density = density_transform.apply(raw_density);
    return f;
}

ExtractedCandidate extract_candidate(const EmbeddingMatrix& city,
                                     const std::vector<std::string>& sentences,
                                     const AnchorText& anchor) {
    if (city.rows == 0 || sentences.empty()) {
        throw std::domain_error("extract_candidate: empty page");
    }
    if (city.rows != sentences.size()) {
        throw DataError("extract_candidate: sentences and embeddings are misaligned");
    }
    SimilarityMatrix sims = similarity_matrix(city, {anchor.embedding});
    ExtractedCandidate best;
    best.score = -2.0;
    for (std::size_t i = 0; i < city.rows; ++i) {
        double s = sims.at(i, 0);
        if (s > best.score) {  // strict: ties keep the lowest index
            best.score = s;
            best.sentence_index = i;
            best.text = sentences[i];
        }
    }
    return best;
}

CandidateList collect_candidates(const std::vector<const CityRecord*>& positive_train_records,
                                 const EmbeddingLookup& embeddings, const AnchorText& anchor,
                                 std::vector<std::string>* warnings) {
    if (positive_train_records.empty()) {
        throw DataError("collect_candidates: no positive train cities for '" +
                        typology_name(anchor.typology) + "'");
    }
    std::map<std::string, Candidate> by_text;
    for (const CityRecord* record : positive_train_records) {
        if (record->sentences.empty()) {
            if (warnings) {
                warnings->push_back("skipping '" + record->city_id + "': empty page");
            }
            continue;
        }
        const EmbeddingMatrix& matrix = embeddings(record->city_id);
        ExtractedCandidate extracted = extract_candidate(matrix, record->sentences, anchor);
        Candidate c;
        c.text = extracted.text;
        c.source_city_id = record->city_id;
        c.anchor_similarity = extracted.score;
        c.embedding = std::vector<float>(
            matrix.values.begin() + static_cast<std::ptrdiff_t>(extracted.sentence_index * matrix.dim),
            matrix.values.begin() +
                static_cast<std::ptrdiff_t>((extracted.sentence_index + 1) * matrix.dim));
        auto [it, inserted] = by_text.try_emplace(c.text, c);
        if (!inserted && c.anchor_similarity > it->second.anchor_similarity) {
            it->second = c;
        }
    }
    if (by_text.empty()) {
        throw DataError("collect_candidates: every positive city had an empty page");
    }
    CandidateList list;
    list.typology = anchor.typology;
    for (auto& [text, candidate] : by_text) list.entries.push_back(std::move(candidate));
    std::sort(list.entries.begin(), list.entries.end(), [](const Candidate& a, const Candidate& b) {
        if (a.anchor_similarity != b.anchor_similarity) {
            return a.anchor_similarity > b.anchor_similarity;
        }
        return a.text < b.text;
    });
    return list;
}

KeylineSet make_initial_set(const AnchorText& anchor) {
    KeylineSet set;
    set.typology = anchor.typology;
    set.stage = KeylineStage::kInitial;
    Keyline k;
    k.text = anchor.text;
    k.embedding = anchor.embedding;
    k.anchor_similarity = 1.0;
    set.keylines.push_back(std::move(k));
    return set;
}

KeylineSet make_prefix_set(const AnchorText& anchor, const CandidateList& candidates,
                           std::size_t count, KeylineStage stage) {
    if (count > candidates.entries.size()) {
        throw DataError("prefix length exceeds candidate count");
    }
    KeylineSet set = make_initial_set(anchor);
    set.stage = stage;
    for (std::size_t i = 0; i < count; ++i) {
        const Candidate& c = candidates.entries[i];
        Keyline k;
        k.text = c.text;
        k.embedding = c.embedding;
        k.source_city_id = c.source_city_id;
        k.anchor_similarity = c.anchor_similarity;
        set.keylines.push_back(std::move(k));
    }
    return set;
}

std::vector<std::size_t> stratified_folds(const std::vector<int>& labels, std::size_t n_folds,
                                          std::uint64_t seed) {
    if (n_folds < 2) throw ConfigError("need at least 2 folds");
    for (int attempt = 0; attempt < 8; ++attempt) {
        SplitMix64 rng(seed + static_cast<std::uint64_t>(attempt));
        std::vector<std::size_t> pos, neg;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            (labels[i] == 1 ? pos : neg).push_back(i);
        }
        deterministic_shuffle(pos, rng);
        deterministic_shuffle(neg, rng);
        std::vector<std::size_t> fold_of(labels.size());
        for (std::size_t i = 0; i < pos.size(); ++i) fold_of[pos[i]] = i % n_folds;
        for (std::size_t i = 0; i < neg.size(); ++i) fold_of[neg[i]] = i % n_folds;
        // validation folds need both classes
        bool ok = pos.size() >= n_folds && neg.size() >= n_folds;
        if (ok) return fold_of;
    }
    throw DataError("cannot build " + std::to_string(n_folds) +
                    "-fold stratified assignment: a class has too few samples");
}

double cv_mean_auc(const DesignMatrix& x, const std::vector<int>& y, const CvConfig& cv,
                   const TrainConfig& trainer) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t repeat = 0; repeat < cv.repeats; ++repeat) {
        std::uint64_t repeat_seed = cv.seed + 0x9E3779B97F4A7C15ULL * (repeat + 1);
        std::vector<std::size_t> fold_of = stratified_folds(y, cv.folds, repeat_seed);
        for (std::size_t fold = 0; fold < cv.folds; ++fold) {
            DesignMatrix train_x, val_x;
            train_x.cols = val_x.cols = x.cols;
            std::vector<int> train_y, val_y;
            for (std::size_t i = 0; i < x.rows; ++i) {
                auto& dst_x = fold_of[i] == fold ? val_x : train_x;
                auto& dst_y = fold_of[i] == fold ? val_y : train_y;
                dst_x.values.insert(dst_x.values.end(), x.values.begin() + i * x.cols,
                                    x.values.begin() + (i + 1) * x.cols);
                dst_y.push_back(y[i]);
                dst_x.rows++;
            }
            TrainResult result = train_logistic(train_x, train_y, trainer);
            std::vector<double> scores = predict_proba(result.model, val_x);
            total += roc_auc(scores, val_y);
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

ExpansionResult expand_keylines(Typology task, const CandidateList& candidates,
                                const std::vector<const CityRecord*>& train_records,
                                const EmbeddingLookup& embeddings,
                                const std::array<AnchorText, 4>& anchors, const CvConfig& cv,
                                const TrainConfig& trainer) {
    if (candidates.entries.empty()) {
        throw DataError("expand_keylines: empty candidate list");
    }
    const std::size_t n = train_records.size();
    const std::size_t n_cand = candidates.entries.size();
    const std::size_t task_idx = static_cast<std::size_t>(task);

    std::vector<int> y(n);
    // anchor-only feature per typology, and per-candidate max similarity
    std::vector<std::array<double, 4>> anchor_feat(n);
    std::vector<std::vector<double>> cand_max(n, std::vector<double>(n_cand));
    for (std::size_t i = 0; i < n; ++i) {
        const CityRecord* record = train_records[i];
        y[i] = binary_label(*record, task_of(task));
        const EmbeddingMatrix& matrix = embeddings(record->city_id);
        for (Typology t : kAllTypologies) {
            auto ti = static_cast<std::size_t>(t);
            anchor_feat[i][ti] = max_similarity(matrix, anchors[ti].embedding);
        }
        for (std::size_t c = 0; c < n_cand; ++c) {
            cand_max[i][c] = max_similarity(matrix, candidates.entries[c].embedding);
        }
    }

    // prefix running max turns each expansion step into O(n)
    std::vector<std::vector<double>> prefix_max(n, std::vector<double>(n_cand + 1));
    for (std::size_t i = 0; i < n; ++i) {
        prefix_max[i][0] = anchor_feat[i][task_idx];
        for (std::size_t c = 0; c < n_cand; ++c) {
            prefix_max[i][c + 1] = std::max(prefix_max[i][c], cand_max[i][c]);
        }
    }

    auto evaluate = [&](std::size_t e) {
        DesignMatrix x;
        x.rows = n;
        x.cols = 4;
        x.values.resize(n * 4);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t t = 0; t < 4; ++t) {
                x.values[i * 4 + t] = t == task_idx ? prefix_max[i][e] : anchor_feat[i][t];
            }
        }
        return cv_mean_auc(x, y, cv, trainer);
    };

    ExpansionResult result;
    double base_auc = evaluate(0);
    result.trajectory.push_back({0, base_auc, 0.0});
    double max_auc = base_auc;
    result.max_expansion = 0;
    for (std::size_t e = 1; e <= n_cand; ++e) {
        double auc = evaluate(e);
        result.trajectory.push_back({e, auc, (auc - base_auc) / base_auc * 100.0});
        if (auc > max_auc) {
            max_auc = auc;
            result.max_expansion = e;
        }
    }

    result.optimal = make_prefix_set(anchors[task_idx], candidates, result.max_expansion,
                                     KeylineStage::kOptimal);
    return result;
}

// ---------------------------------------------------------------------------
// Files

void save_keyline_set(const std::string& path, const KeylineSet& set,
                      const std::string& encoder_id, std::uint64_t input_hash) {
    std::string out = "# citytypo keylines v1\n";
    out += "typology: " + typology_name(set.typology) + "\n";
    out += "stage: " + stage_name(set.stage) + "\n";
    out += "encoder: " + encoder_id + "\n";
    out += "input_hash: " + to_hex(input_hash) + "\n";
    out += "count: " + std::to_string(set.keylines.size()) + "\n";
    for (std::size_t i = 0; i < set.keylines.size(); ++i) {
        const Keyline& k = set.keylines[i];
        out += "-- keyline " + std::to_string(i) + "\n";
        out += "source: " + (k.source_city_id.empty() ? "(anchor)" : k.source_city_id) + "\n";
        out += "score: " + format_double(k.anchor_similarity) + "\n";
        out += "text: " + k.text + "\n";
    }
    write_file(path, out);
}

KeylineSet load_keyline_set(const std::string& path, SentenceEncoder& encoder) {
    std::string content = read_file(path);
    KeylineSet set;
    std::vector<std::string> texts;
    std::vector<std::string> sources;
    std::vector<double> scores;
    std::size_t declared_count = 0;
    for (const auto& line : split_on(content, '\n')) {
        if (line.empty() || line[0] == '#' || line.rfind("-- ", 0) == 0) continue;
        std::size_t colon = line.find(": ");
        if (colon == std::string::npos) {
            throw DataError("malformed keyline file line in " + path + ": '" + line + "'");
        }
        std::string key = line.substr(0, colon);
        std::string value = line.substr(colon + 2);
        if (key == "typology") set.typology = typology_from_name(value);
        else if (key == "stage") set.stage = stage_from_name(value);
        else if (key == "count") declared_count = std::stoul(value);
        else if (key == "source") sources.push_back(value == "(anchor)" ? "" : value);
        else if (key == "score") scores.push_back(std::stod(value));
        else if (key == "text") texts.push_back(value);
        else if (key != "encoder" && key != "input_hash") {
            throw DataError("unknown keyline file key '" + key + "' in " + path);
        }
    }
    if (texts.empty() || texts.size() != sources.size() || texts.size() != scores.size() ||
        texts.size() != declared_count) {
        throw DataError("inconsistent keyline file: " + path);
    }
    EmbeddingMatrix embedded = embed_sentences(texts, encoder, "keylines:" + path);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        Keyline k;
        k.text = texts[i];
        k.source_city_id = sources[i];
        k.anchor_similarity = scores[i];
        auto row = embedded.row(i);
        k.embedding.assign(row.begin(), row.end());
        set.keylines.push_back(std::move(k));
    }
    return set;
}

void save_trajectory(const std::string& path, const std::vector<TrajectoryPoint>& trajectory,
                     std::uint64_t input_hash) {
    std::string out = "# citytypo trajectory v1 input_hash=" + to_hex(input_hash) + "\n";
    out += "expansion\tmean_auc\tlift_pct\n";
    for (const auto& p : trajectory) {
        out += std::to_string(p.expansion) + "\t" + format_double(p.mean_auc) + "\t" +
               format_double(p.lift_pct) + "\n";
    }
    write_file(path, out);
}

std::vector<TrajectoryPoint> load_trajectory(const std::string& path) {
    std::vector<TrajectoryPoint> out;
    for (const auto& line : split_on(read_file(path), '\n')) {
        if (line.empty() || line[0] == '#' || line.rfind("expansion", 0) == 0) continue;
        auto fields = split_on(line, '\t');
        if (fields.size() != 3) throw DataError("malformed trajectory line: '" + line + "'");
        TrajectoryPoint p;
        p.expansion = std::stoul(fields[0]);
        p.mean_auc = std::stod(fields[1]);
        p.lift_pct = std::stod(fields[2]);
        out.push_back(p);
    }
    return out;
}

}  // namespace citytypo
