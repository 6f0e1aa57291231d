#include "citytypo/pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <set>

#include "citytypo/corpus.hpp"
#include "citytypo/errors.hpp"
#include "citytypo/feasibility.hpp"
#include "citytypo/metrics.hpp"
#include "citytypo/models.hpp"
#include "citytypo/page_cache.hpp"
#include "citytypo/text.hpp"
#include "citytypo/util.hpp"

namespace citytypo {

namespace {

std::ostream& log() { return std::cerr; }

// --------------------------------------------------------------------------
// Artifact plumbing

std::uint64_t hash_file(const std::string& path) { return fnv1a64(read_file(path)); }

struct HashChain {
    std::uint64_t h = kFnvOffset;
    HashChain& add(std::string_view s) {
        h = fnv1a64(s, h);
        h = fnv1a64("|", h);
        return *this;
    }
    HashChain& add_u64(std::uint64_t v) { return add(to_hex(v)); }
};

// Scan an artifact file for its recorded input hash.
std::optional<std::uint64_t> read_artifact_input_hash(const std::string& path) {
    for (const auto& line : split_on(read_file(path), '\n')) {
        std::size_t pos = line.find("input_hash");
        if (pos == std::string::npos) continue;
        std::size_t eq = line.find_first_of(":=", pos);
        if (eq == std::string::npos) continue;
        std::string hex = trim(line.substr(eq + 1));
        if (hex.size() == 16) return std::stoull(hex, nullptr, 16);
    }
    return std::nullopt;
}

void verify_input_hash(const std::string& path, std::uint64_t expected, const std::string& hint) {
    auto stored = read_artifact_input_hash(path);
    if (!stored) throw DataError("artifact missing input hash: " + path);
    if (*stored != expected) {
        throw ConfigError("stale artifact " + path + ": its inputs changed since it was written" +
                          " (re-run " + hint + ")");
    }
}

// --------------------------------------------------------------------------
// Infobox table: numeric extraction results, one row per ingested city.

void save_infobox_table(const std::string& path, const std::vector<CityRecord>& records) {
    std::string out = "city_id,population,area_sq_mi,density_per_sq_mi,lat,lon\n";
    auto opt = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
    };
    for (const auto& r : records) {
        out += csv_row({r.city_id, opt(r.population), opt(r.area_sq_mi),
                        opt(r.density_per_sq_mi), opt(r.lat), opt(r.lon)});
        out.push_back('\n');
    }
    write_file(path, out);
}

struct InfoboxRow {
    std::optional<double> population, area_sq_mi, density_per_sq_mi, lat, lon;
};

std::map<std::string, InfoboxRow> load_infobox_table(const std::string& path) {
    std::map<std::string, InfoboxRow> out;
    auto lines = split_on(read_file(path), '\n');
    auto opt = [](const std::string& s) -> std::optional<double> {
        if (trim(s).empty()) return std::nullopt;
        return std::stod(s);
    };
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        auto f = parse_csv_record(lines[i]);
        if (f.size() != 6) throw DataError("malformed infobox table row: '" + lines[i] + "'");
        out[f[0]] = InfoboxRow{opt(f[1]), opt(f[2]), opt(f[3]), opt(f[4]), opt(f[5])};
    }
    return out;
}

// --------------------------------------------------------------------------
// Corpus loading for downstream stages: dataset rows enriched with the
// sentences and infobox artifacts. Cities absent from the sentences file are
// not featurizable and are excluded (ingest reported them).

struct Corpus {
    std::vector<CityRecord> records;
    std::vector<std::string> skipped;  // dataset rows without sentences
};

Corpus load_corpus(const PipelineConfig& cfg, const OutPaths& paths) {
    Corpus corpus;
    auto dataset = load_dataset_table(cfg.resolve(cfg.dataset));
    if (!cfg.via_list.empty()) merge_via_list(dataset, cfg.resolve(cfg.via_list));
    auto sentences = read_sentences_file(paths.sentences);
    auto infobox = load_infobox_table(paths.infobox);
    for (auto& record : dataset) {
        auto s = sentences.find(record.city_id);
        if (s == sentences.end() || s->second.empty()) {
            corpus.skipped.push_back(record.city_id);
            continue;
        }
        record.sentences = s->second;
        auto info = infobox.find(record.city_id);
        if (info != infobox.end()) {
            record.population = info->second.population;
            record.area_sq_mi = info->second.area_sq_mi;
            record.density_per_sq_mi = info->second.density_per_sq_mi;
            if (info->second.lat && info->second.lon) {
                record.lat = info->second.lat;
                record.lon = info->second.lon;
            }
        }
        corpus.records.push_back(std::move(record));
    }
    return corpus;
}

std::vector<const CityRecord*> typology_labeled(const std::vector<CityRecord>& records) {
    std::vector<const CityRecord*> out;
    for (const auto& r : records) {
        if (r.typology_label) out.push_back(&r);
    }
    return out;
}

// Cache-backed embedding lookup; computed matrices are memoized per command.
class EmbeddingStore {
public:
    EmbeddingStore(const PipelineConfig& cfg, SentenceEncoder& encoder)
        : cache_dir_(cfg.resolve(cfg.embedding_cache)), encoder_(encoder) {}

    const EmbeddingMatrix& get(const CityRecord& record) {
        auto it = loaded_.find(record.city_id);
        if (it != loaded_.end()) return it->second;
        EmbeddingMatrix m = embed_cached(record.sentences, encoder_, record.city_id, cache_dir_);
        return loaded_.emplace(record.city_id, std::move(m)).first->second;
    }

    EmbeddingLookup lookup(const std::map<std::string, const CityRecord*>& index) {
        return [this, &index](const std::string& city_id) -> const EmbeddingMatrix& {
            return get(*index.at(city_id));
        };
    }

private:
    std::string cache_dir_;
    SentenceEncoder& encoder_;
    std::map<std::string, EmbeddingMatrix> loaded_;
};

// --------------------------------------------------------------------------
// Stage input hashes (artifact staleness detection)

std::uint64_t split_params_hash(const PipelineConfig& cfg) {
    HashChain h;
    h.add("split").add_u64(cfg.require_seed());
    h.add(format_double(cfg.split_fraction));
    h.add(cfg.split_stratified ? "stratified" : "plain");
    return h.h;
}

std::uint64_t candidates_input_hash(const PipelineConfig& cfg, const OutPaths& paths,
                                    const std::string& encoder_id, Typology task) {
    HashChain h;
    h.add("candidates").add(typology_name(task)).add(encoder_id);
    h.add_u64(hash_file(cfg.resolve(cfg.dataset)));
    h.add_u64(hash_file(paths.sentences));
    h.add_u64(split_params_hash(cfg));
    for (const auto& o : cfg.anchor_override) {
        h.add(o ? *o : "");
    }
    return h.h;
}

std::uint64_t expansion_input_hash(const PipelineConfig& cfg, const OutPaths& paths,
                                   const std::string& encoder_id, Typology task) {
    HashChain h;
    h.add("expansion").add_u64(candidates_input_hash(cfg, paths, encoder_id, task));
    h.add_u64(cfg.cv.folds).add_u64(cfg.cv.repeats).add_u64(cfg.cv.seed);
    h.add(format_double(cfg.trainer.lambda)).add(format_double(cfg.trainer.tolerance));
    h.add_u64(cfg.trainer.max_iterations);
    return h.h;
}

std::uint64_t model_input_hash(const PipelineConfig& cfg, const OutPaths& paths,
                               const std::string& encoder_id, const std::set<std::string>& files) {
    HashChain h;
    h.add("model").add(encoder_id);
    h.add_u64(hash_file(cfg.resolve(cfg.dataset)));
    h.add_u64(hash_file(paths.sentences));
    h.add_u64(split_params_hash(cfg));
    for (const auto& f : files) h.add(f).add_u64(hash_file(f));
    h.add(format_double(cfg.trainer.lambda)).add(format_double(cfg.trainer.tolerance));
    h.add_u64(cfg.trainer.max_iterations);
    return h.h;
}

// --------------------------------------------------------------------------
// Keyline set assembly for featurization

struct StageSets {
    KeylineSetsByStage sets{};
    bool has_optimal = false;
    bool has_all = false;
    std::set<std::string> files_used;
};

StageSets load_stage_sets(const OutPaths& paths, SentenceEncoder& encoder,
                          const std::array<AnchorText, 4>& anchors, bool need_optimal,
                          bool need_all) {
    StageSets out;
    for (Typology t : kAllTypologies) {
        auto ti = static_cast<std::size_t>(t);
        out.sets[static_cast<std::size_t>(KeylineStage::kInitial)][ti] = make_initial_set(anchors[ti]);
    }
    auto load_stage = [&](KeylineStage stage, bool required) {
        bool all_present = true;
        for (Typology t : kAllTypologies) {
            std::string path = paths.keylines(t, stage);
            if (!file_exists(path)) {
                if (required) {
                    throw ConfigError("missing keyline set artifact " + path + " (run " +
                                      (stage == KeylineStage::kOptimal ? "'expand'" : "'candidates'") +
                                      " for task " + typology_name(t) + ")");
                }
                all_present = false;
                continue;
            }
            KeylineSet set = load_keyline_set(path, encoder);
            if (set.typology != t || set.stage != stage) {
                throw DataError("keyline file " + path + " does not match its expected task/stage");
            }
            out.sets[static_cast<std::size_t>(stage)][static_cast<std::size_t>(t)] = std::move(set);
            out.files_used.insert(path);
        }
        return all_present;
    };
    out.has_optimal = load_stage(KeylineStage::kOptimal, need_optimal);
    out.has_all = load_stage(KeylineStage::kAll, need_all);
    // unreferenced missing stages fall back to the initial set; any subset
    // actually referencing them is rejected below
    for (Typology t : kAllTypologies) {
        auto ti = static_cast<std::size_t>(t);
        auto& opt = out.sets[static_cast<std::size_t>(KeylineStage::kOptimal)][ti];
        auto& all = out.sets[static_cast<std::size_t>(KeylineStage::kAll)][ti];
        if (opt.keylines.empty()) opt = out.sets[0][ti];
        if (all.keylines.empty()) all = out.sets[0][ti];
    }
    return out;
}

void require_stages(const FeatureSubset& subset, const StageSets& sets, const std::string& where) {
    for (const auto& ref : subset.features) {
        if (ref.is_density) continue;
        if (ref.stage == KeylineStage::kOptimal && !sets.has_optimal) {
            throw ConfigError(where + " needs optimal keyline sets; run 'expand' first");
        }
        if (ref.stage == KeylineStage::kAll && !sets.has_all) {
            throw ConfigError(where + " needs all-candidate keyline sets; run 'candidates' with "
                                      "expansion.emit_all_set = true");
        }
    }
}

FeatureSubset final_model_subset(const PipelineConfig& cfg, LabelTask task) {
    const auto& override_label = cfg.subset_override[static_cast<std::size_t>(task)];
    if (override_label) return FeatureSubset::parse(*override_label);
    FeatureSubset subset;
    for (Typology t : kAllTypologies) {
        subset.features.push_back(FeatureRef::keyline(t, KeylineStage::kOptimal));
    }
    subset.features.push_back(FeatureRef::density());
    return subset;
}

std::vector<FeatureBundle> bundles_for(const std::vector<const CityRecord*>& records,
                                       EmbeddingStore& store, const KeylineSetsByStage& sets) {
    std::vector<FeatureBundle> out;
    out.reserve(records.size());
    for (const CityRecord* r : records) {
        out.push_back(compute_feature_bundle(store.get(*r), sets, r->density_per_sq_mi));
    }
    return out;
}

struct SplitViews {
    std::vector<const CityRecord*> train;
    std::vector<const CityRecord*> test;
    std::vector<int> train_labels;
    std::vector<int> test_labels;
};

SplitViews split_views(const std::vector<const CityRecord*>& records, const DatasetSplit& split,
                       LabelTask task) {
    std::map<std::string, const CityRecord*> index;
    for (const CityRecord* r : records) index.emplace(r->city_id, r);
    SplitViews views;
    for (const auto& id : split.train) {
        const CityRecord* r = index.at(id);
        views.train.push_back(r);
        views.train_labels.push_back(binary_label(*r, task));
    }
    for (const auto& id : split.test) {
        const CityRecord* r = index.at(id);
        views.test.push_back(r);
        views.test_labels.push_back(binary_label(*r, task));
    }
    return views;
}

}  // namespace

// --------------------------------------------------------------------------

OutPaths::OutPaths(const PipelineConfig& config) : dir_(config.resolve(config.output)) {
    sentences = dir_ + "/sentences.tsv";
    infobox = dir_ + "/infobox.csv";
    predictions = dir_ + "/predictions.csv";
    via_ratios = dir_ + "/via_ratios.csv";
    feasibility_summary = dir_ + "/feasibility.txt";
}

std::string OutPaths::candidates(Typology task) const {
    return dir_ + "/candidates_" + typology_name(task) + ".txt";
}
std::string OutPaths::keylines(Typology task, KeylineStage stage) const {
    return dir_ + "/keylines_" + typology_name(task) + "_" + stage_name(stage) + ".txt";
}
std::string OutPaths::trajectory(Typology task) const {
    return dir_ + "/trajectory_" + typology_name(task) + ".tsv";
}
std::string OutPaths::model(LabelTask task) const {
    return dir_ + "/model_" + task_name(task) + ".txt";
}
std::string OutPaths::sweep(Typology task) const {
    return dir_ + "/sweep_" + typology_name(task) + ".csv";
}

std::unique_ptr<SentenceEncoder> make_encoder(const PipelineConfig& config) {
    if (config.encoder_kind == "fixture") {
        return std::make_unique<FixtureEncoder>(config.encoder_dim, config.encoder_seed);
    }
    if (config.encoder_kind == "fixture-table") {
        if (config.encoder_table.empty()) throw ConfigError("encoder.table is required");
        return std::make_unique<FixtureEncoder>(
            FixtureEncoder::from_table_file(config.resolve(config.encoder_table)));
    }
    if (config.encoder_url.empty()) throw ConfigError("encoder.url is required for remote encoder");
    return std::make_unique<RemoteEncoder>(config.encoder_url, config.encoder_name,
                                           config.encoder_dim);
}

std::array<AnchorText, 4> config_anchors(const PipelineConfig& config, SentenceEncoder& encoder) {
    std::array<AnchorText, 4> anchors;
    for (Typology t : kAllTypologies) {
        auto ti = static_cast<std::size_t>(t);
        anchors[ti].typology = t;
        anchors[ti].text = config.anchor_override[ti] ? *config.anchor_override[ti]
                                                      : default_anchor_text(t);
        anchors[ti].embedding = embed_one(anchors[ti].text, encoder);
    }
    return anchors;
}

int cmd_ingest(const PipelineConfig& config) {
    OutPaths paths(config);
    auto dataset = load_dataset_table(config.resolve(config.dataset));
    PageCache cache(config.resolve(config.page_cache));

    std::vector<CityRecord> ingested;
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, std::string>> failures;
    std::size_t from_cache = 0, missing_infobox = 0;

    for (auto& record : dataset) {
        try {
            FetchedPage page = fetch_page(record.url, cache, record.city_id, config.offline);
            if (page.from_cache) ++from_cache;
            populate_from_page(record, page.content, &warnings);
            if (!record.population && !record.area_sq_mi && !record.density_per_sq_mi) {
                ++missing_infobox;
            }
            ingested.push_back(record);
        } catch (const FetchError& e) {
            failures.emplace_back(record.city_id, e.what());
        } catch (const DataError& e) {
            failures.emplace_back(record.city_id, e.what());
        }
    }

    write_sentences_file(paths.sentences, ingested);
    save_infobox_table(paths.infobox, ingested);

    log() << "ingest: " << ingested.size() << "/" << dataset.size() << " pages ok (" << from_cache
          << " from cache), " << warnings.size() << " parse warnings, " << missing_infobox
          << " without infobox numerics\n";
    for (const auto& w : warnings) log() << "  warning: " << w << "\n";
    for (const auto& [id, reason] : failures) log() << "  failed: " << id << ": " << reason << "\n";
    return failures.empty() ? kExitOk : kExitPartial;
}

int cmd_embed(const PipelineConfig& config) {
    OutPaths paths(config);
    auto encoder = make_encoder(config);
    auto sentences = read_sentences_file(paths.sentences);
    std::string cache_dir = config.resolve(config.embedding_cache);

    std::size_t hits = 0;
    for (const auto& [city_id, lines] : sentences) {
        bool hit = false;
        EmbeddingMatrix m = embed_cached(lines, *encoder, city_id, cache_dir, &hit);
        if (m.dim != config.encoder_dim && config.encoder_kind != "fixture-table") {
            throw ConfigError("embedding dim " + std::to_string(m.dim) +
                              " does not match encoder.dim " + std::to_string(config.encoder_dim));
        }
        hits += hit ? 1 : 0;
    }
    log() << "embed: " << sentences.size() << " cities, " << hits << " cache hits, encoder "
          << encoder->encoder_id() << "\n";
    return kExitOk;
}

int cmd_candidates(const PipelineConfig& config, Typology task) {
    OutPaths paths(config);
    auto encoder = make_encoder(config);
    auto anchors = config_anchors(config, *encoder);
    Corpus corpus = load_corpus(config, paths);
    auto labeled = typology_labeled(corpus.records);

    std::vector<CityRecord> labeled_records;
    for (const CityRecord* r : labeled) labeled_records.push_back(*r);
    DatasetSplit split = build_split(labeled_records, task_of(task), config.split_fraction,
                                     config.require_seed(), config.split_stratified);

    auto index = index_records(corpus.records);
    EmbeddingStore store(config, *encoder);

    std::vector<const CityRecord*> positives;
    for (const auto& id : split.train) {
        const CityRecord* r = index.at(id);
        if (binary_label(*r, task_of(task)) == 1) positives.push_back(r);
    }

    std::vector<std::string> warnings;
    CandidateList candidates = collect_candidates(positives, store.lookup(index),
                                                  anchors[static_cast<std::size_t>(task)], &warnings);
    for (const auto& w : warnings) log() << "  warning: " << w << "\n";

    std::uint64_t input_hash = candidates_input_hash(config, paths, encoder->encoder_id(), task);
    // candidates double as the "all" keyline set (anchor + every candidate)
    KeylineSet all_set = make_prefix_set(anchors[static_cast<std::size_t>(task)], candidates,
                                         candidates.entries.size(), KeylineStage::kAll);
    save_keyline_set(paths.candidates(task), all_set, encoder->encoder_id(), input_hash);
    if (config.emit_all_set) {
        save_keyline_set(paths.keylines(task, KeylineStage::kAll), all_set, encoder->encoder_id(),
                         input_hash);
    }
    save_keyline_set(paths.keylines(task, KeylineStage::kInitial),
                     make_initial_set(anchors[static_cast<std::size_t>(task)]),
                     encoder->encoder_id(), input_hash);

    log() << "candidates[" << typology_name(task) << "]: " << candidates.entries.size()
          << " candidates from " << positives.size() << " positive train cities\n";
    return kExitOk;
}

int cmd_expand(const PipelineConfig& config, Typology task) {
    OutPaths paths(config);
    auto encoder = make_encoder(config);
    auto anchors = config_anchors(config, *encoder);
    Corpus corpus = load_corpus(config, paths);
    auto labeled = typology_labeled(corpus.records);

    std::vector<CityRecord> labeled_records;
    for (const CityRecord* r : labeled) labeled_records.push_back(*r);
    DatasetSplit split = build_split(labeled_records, task_of(task), config.split_fraction,
                                     config.require_seed(), config.split_stratified);

    std::uint64_t cand_hash = candidates_input_hash(config, paths, encoder->encoder_id(), task);
    std::string cand_path = paths.candidates(task);
    if (!file_exists(cand_path)) {
        throw ConfigError("missing candidates artifact " + cand_path + " (run 'candidates')");
    }
    verify_input_hash(cand_path, cand_hash, "'candidates'");
    KeylineSet all_set = load_keyline_set(cand_path, *encoder);
    CandidateList candidates;
    candidates.typology = task;
    for (std::size_t i = 1; i < all_set.keylines.size(); ++i) {  // [0] is the anchor
        const Keyline& k = all_set.keylines[i];
        candidates.entries.push_back(Candidate{k.text, k.embedding, k.source_city_id,
                                               k.anchor_similarity});
    }

    auto index = index_records(corpus.records);
    EmbeddingStore store(config, *encoder);
    std::vector<const CityRecord*> train_records;
    for (const auto& id : split.train) train_records.push_back(index.at(id));

    CvConfig cv = config.cv;
    if (!config.cv_seed_set) cv.seed = config.require_seed();

    ExpansionResult result = expand_keylines(task, candidates, train_records, store.lookup(index),
                                             anchors, cv, config.trainer);

    std::uint64_t input_hash = expansion_input_hash(config, paths, encoder->encoder_id(), task);
    save_keyline_set(paths.keylines(task, KeylineStage::kOptimal), result.optimal,
                     encoder->encoder_id(), input_hash);
    save_trajectory(paths.trajectory(task), result.trajectory, input_hash);

    log() << "expand[" << typology_name(task) << "]: max_expansion = " << result.max_expansion
          << " of " << candidates.entries.size() << " candidates, mean AUC "
          << result.trajectory[result.max_expansion].mean_auc << " (baseline "
          << result.trajectory[0].mean_auc << ")\n";
    return kExitOk;
}

namespace {

struct TrainContext {
    Corpus corpus;
    std::vector<const CityRecord*> labeled;
    DatasetSplit split;
    SplitViews views;
    StageSets stages;
    std::vector<FeatureBundle> train_bundles;
    std::vector<FeatureBundle> test_bundles;
    DensityTransform density;
    std::set<std::string> files_used;
};

TrainContext make_train_context(const PipelineConfig& config, const OutPaths& paths,
                                SentenceEncoder& encoder, LabelTask task, bool need_optimal,
                                bool need_all) {
    TrainContext ctx;
    auto anchors = config_anchors(config, encoder);
    ctx.corpus = load_corpus(config, paths);
    ctx.labeled = typology_labeled(ctx.corpus.records);

    std::vector<CityRecord> labeled_records;
    for (const CityRecord* r : ctx.labeled) labeled_records.push_back(*r);
    ctx.split = build_split(labeled_records, task, config.split_fraction, config.require_seed(),
                            config.split_stratified);
    ctx.views = split_views(ctx.labeled, ctx.split, task);

    ctx.stages = load_stage_sets(paths, encoder, anchors, need_optimal, need_all);
    ctx.files_used = ctx.stages.files_used;

    ctx.density = fit_density_transform(ctx.views.train);

    EmbeddingStore store(config, encoder);
    ctx.train_bundles = bundles_for(ctx.views.train, store, ctx.stages.sets);
    ctx.test_bundles = bundles_for(ctx.views.test, store, ctx.stages.sets);
    return ctx;
}

}  // namespace

int cmd_train(const PipelineConfig& config, Typology task) {
    OutPaths paths(config);
    auto encoder = make_encoder(config);
    FeatureSubset subset = final_model_subset(config, task_of(task));
    bool wants_all = false, wants_opt = false;
    for (const auto& ref : subset.features) {
        wants_all |= !ref.is_density && ref.stage == KeylineStage::kAll;
        wants_opt |= !ref.is_density && ref.stage == KeylineStage::kOptimal;
    }
    TrainContext ctx =
        make_train_context(config, paths, *encoder, task_of(task), wants_opt, wants_all);
    require_stages(subset, ctx.stages, "train[" + typology_name(task) + "]");

    TrainedModel model =
        train_task_model(task_of(task), subset, ctx.train_bundles, ctx.views.train_labels,
                         ctx.density, config.trainer, config.require_seed(), encoder->encoder_id());

    std::vector<double> test_scores;
    for (const auto& b : ctx.test_bundles) test_scores.push_back(model.predict(b));
    double test_auc = roc_auc(test_scores, ctx.views.test_labels);
    ClassificationScores scores =
        classification_scores(test_scores, ctx.views.test_labels, model.threshold);

    std::uint64_t input_hash =
        model_input_hash(config, paths, encoder->encoder_id(), ctx.files_used);
    save_model(paths.model(task_of(task)), model, input_hash);

    log() << "train[" << typology_name(task) << "]: subset {" << subset.label() << "}, train AUC "
          << model.train_auc << ", test AUC " << test_auc << ", accuracy " << scores.accuracy
          << ", precision " << scores.precision << ", recall " << scores.recall << ", F1 "
          << scores.f1 << "\n";
    return kExitOk;
}

int cmd_sweep(const PipelineConfig& config, Typology task) {
    OutPaths paths(config);
    auto encoder = make_encoder(config);
    TrainContext ctx = make_train_context(config, paths, *encoder, task_of(task),
                                          /*need_optimal=*/true, /*need_all=*/true);

    std::vector<SweepRow> rows =
        subset_sweep(task, ctx.train_bundles, ctx.views.train_labels, ctx.test_bundles,
                     ctx.views.test_labels, ctx.density, config.trainer);

    std::uint64_t input_hash =
        model_input_hash(config, paths, encoder->encoder_id(), ctx.files_used);
    save_sweep_report(paths.sweep(task), rows, input_hash);

    log() << "sweep[" << typology_name(task) << "]: " << rows.size() << " subsets, baseline AUC "
          << rows.front().auc_test << "\n";
    return kExitOk;
}

int cmd_predict(const PipelineConfig& config, const std::optional<std::string>& only_city) {
    OutPaths paths(config);
    auto encoder = make_encoder(config);
    auto anchors = config_anchors(config, *encoder);

    std::array<TrainedModel, 4> models;
    bool wants_all = false, wants_opt = false;
    for (Typology t : kAllTypologies) {
        std::string path = paths.model(task_of(t));
        if (!file_exists(path)) {
            throw ConfigError("missing model artifact " + path + " (run 'train' for task " +
                              typology_name(t) + ")");
        }
        models[static_cast<std::size_t>(t)] = load_model(path);
        const TrainedModel& m = models[static_cast<std::size_t>(t)];
        if (m.encoder_id != encoder->encoder_id()) {
            throw ConfigError("model " + path + " was trained with encoder '" + m.encoder_id +
                              "' but the config selects '" + encoder->encoder_id() + "'");
        }
        for (const auto& ref : m.subset.features) {
            wants_all |= !ref.is_density && ref.stage == KeylineStage::kAll;
            wants_opt |= !ref.is_density && ref.stage == KeylineStage::kOptimal;
        }
    }

    StageSets stages = load_stage_sets(paths, *encoder, anchors, wants_opt, wants_all);

    // the batch list defaults to the dataset table
    std::string list_path =
        config.predict_list.empty() ? config.resolve(config.dataset) : config.resolve(config.predict_list);
    auto batch = load_dataset_table(list_path);
    auto sentences = read_sentences_file(paths.sentences);
    auto infobox = load_infobox_table(paths.infobox);

    EmbeddingStore store(config, *encoder);
    std::string out =
        "city_id,name,lat,lon,p_congestion,p_auto,p_transit,p_bike,"
        "label_congestion,label_auto,label_transit,label_bike\n";
    std::size_t rows = 0;
    std::vector<std::pair<std::string, std::string>> failures;

    for (auto& record : batch) {
        if (only_city && record.city_id != *only_city) continue;
        try {
            auto s = sentences.find(record.city_id);
            if (s == sentences.end() || s->second.empty()) {
                throw DataError("no extracted sentences (was it ingested?)");
            }
            record.sentences = s->second;
            auto info = infobox.find(record.city_id);
            if (info != infobox.end()) {
                record.density_per_sq_mi = info->second.density_per_sq_mi;
                if (info->second.lat && info->second.lon) {
                    record.lat = info->second.lat;
                    record.lon = info->second.lon;
                }
            }
            FeatureBundle bundle = compute_feature_bundle(store.get(record), stages.sets,
                                                          record.density_per_sq_mi);
            std::vector<std::string> fields = {
                record.city_id, record.name,
                record.lat ? format_double(*record.lat) : std::string(),
                record.lon ? format_double(*record.lon) : std::string()};
            std::array<double, 4> p{};
            for (Typology t : kAllTypologies) {
                auto ti = static_cast<std::size_t>(t);
                p[ti] = models[ti].predict(bundle);
                fields.push_back(format_double(p[ti]));
            }
            for (Typology t : kAllTypologies) {
                auto ti = static_cast<std::size_t>(t);
                fields.push_back(p[ti] > models[ti].threshold ? "1" : "0");
            }
            out += csv_row(fields);
            out.push_back('\n');
            ++rows;
        } catch (const DataError& e) {
            failures.emplace_back(record.city_id, e.what());
        } catch (const FetchError& e) {
            failures.emplace_back(record.city_id, e.what());
        }
    }

    write_file(paths.predictions, out);
    log() << "predict: " << rows << " rows written to " << paths.predictions << ", "
          << failures.size() << " cities skipped\n";
    for (const auto& [id, reason] : failures) log() << "  skipped: " << id << ": " << reason << "\n";
    return failures.empty() ? kExitOk : kExitPartial;
}

int cmd_feasibility(const PipelineConfig& config) {
    OutPaths paths(config);
    if (config.via_list.empty()) {
        throw ConfigError("feasibility needs [paths] via_list");
    }
    auto encoder = make_encoder(config);
    auto anchors = config_anchors(config, *encoder);
    Corpus corpus = load_corpus(config, paths);

    // Bayes ratios: typology-labeled train cities only
    auto labeled = typology_labeled(corpus.records);
    std::vector<CityRecord> labeled_records;
    for (const CityRecord* r : labeled) labeled_records.push_back(*r);
    DatasetSplit typo_split = build_split(labeled_records, LabelTask::kCongestion,
                                          config.split_fraction, config.require_seed(),
                                          config.split_stratified);
    std::map<std::string, const CityRecord*> by_id;
    for (const CityRecord* r : labeled) by_id.emplace(r->city_id, r);
    std::vector<const CityRecord*> ratio_subset;
    for (const auto& id : typo_split.train) ratio_subset.push_back(by_id.at(id));

    std::vector<RatioRow> ratios = ratio_report(ratio_subset);
    HashChain ratio_hash;
    ratio_hash.add("via_ratios").add_u64(hash_file(config.resolve(config.dataset)));
    ratio_hash.add_u64(hash_file(config.resolve(config.via_list)));
    ratio_hash.add_u64(split_params_hash(config));
    save_ratio_report(paths.via_ratios, ratios, ratio_hash.h);
    for (const auto& row : ratios) {
        log() << "via ratio [" << typology_name(row.typology) << "]: "
              << (row.defined ? format_double(row.ratio) : "undefined (" + row.note + ")") << "\n";
    }

    // Feasibility model over every via-flagged record with sentences
    StageSets stages = load_stage_sets(paths, *encoder, anchors, /*need_optimal=*/true,
                                       /*need_all=*/false);
    std::vector<const CityRecord*> via_records;
    for (const auto& r : corpus.records) via_records.push_back(&r);

    std::vector<CityRecord> via_copy;
    for (const CityRecord* r : via_records) via_copy.push_back(*r);
    DatasetSplit via_split = build_split(via_copy, LabelTask::kVia, config.split_fraction,
                                         config.require_seed(), config.split_stratified);
    SplitViews views = split_views(via_records, via_split, LabelTask::kVia);

    DensityTransform density = fit_density_transform(views.train);
    EmbeddingStore store(config, *encoder);
    std::vector<FeatureBundle> train_bundles = bundles_for(views.train, store, stages.sets);
    std::vector<FeatureBundle> test_bundles = bundles_for(views.test, store, stages.sets);

    FeasibilityResult result = train_feasibility_model(
        train_bundles, views.train_labels, test_bundles, views.test_labels, density,
        config.trainer, config.require_seed(), encoder->encoder_id());

    std::uint64_t input_hash =
        model_input_hash(config, paths, encoder->encoder_id(), stages.files_used);
    save_model(paths.model(LabelTask::kVia), result.model, input_hash);

    std::string summary = "# citytypo feasibility v1\n";
    summary += "auc_train: " + format_double(result.auc_train) + "\n";
    summary += "auc_test: " + format_double(result.auc_test) + "\n";
    summary += "input_hash: " + to_hex(input_hash) + "\n";
    write_file(paths.feasibility_summary, summary);

    log() << "feasibility: AUC train " << result.auc_train << ", test " << result.auc_test << "\n";
    return kExitOk;
}

}  // namespace citytypo
