#include "citytypo/models.hpp"

#include <algorithm>

#include "citytypo/errors.hpp"
#include "citytypo/metrics.hpp"
#include "citytypo/util.hpp"

namespace citytypo {

namespace {

const std::array<std::string, 4> kShortNames = {"c", "a", "t", "b"};

}  // namespace

std::string FeatureRef::label() const {
    if (is_density) return "f_density";
    return "f_" + kShortNames[static_cast<std::size_t>(typology)] + ":" + stage_name(stage);
}

FeatureRef FeatureRef::parse(const std::string& label) {
    if (label == "f_density") return density();
    if (label.rfind("f_", 0) != 0) throw ConfigError("bad feature label: '" + label + "'");
    std::size_t colon = label.find(':');
    if (colon == std::string::npos) throw ConfigError("bad feature label: '" + label + "'");
    std::string short_name = label.substr(2, colon - 2);
    FeatureRef ref;
    ref.is_density = false;
    ref.stage = stage_from_name(label.substr(colon + 1));
    auto it = std::find(kShortNames.begin(), kShortNames.end(), short_name);
    if (it == kShortNames.end()) throw ConfigError("bad feature label: '" + label + "'");
    ref.typology = static_cast<Typology>(it - kShortNames.begin());
    return ref;
}

FeatureRef FeatureRef::density() {
    FeatureRef ref;
    ref.is_density = true;
    return ref;
}

FeatureRef FeatureRef::keyline(Typology t, KeylineStage s) {
    FeatureRef ref;
    ref.typology = t;
    ref.stage = s;
    return ref;
}

std::string FeatureSubset::label() const {
    std::string out;
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (i) out.push_back(' ');
        out += features[i].label();
    }
    return out;
}

FeatureSubset FeatureSubset::parse(const std::string& label) {
    FeatureSubset subset;
    for (const auto& piece : split_on(label, ' ')) {
        if (!piece.empty()) subset.features.push_back(FeatureRef::parse(piece));
    }
    if (subset.features.empty()) throw ConfigError("empty feature subset");
    return subset;
}

FeatureBundle compute_feature_bundle(const EmbeddingMatrix& city, const KeylineSetsByStage& sets,
                                     std::optional<double> raw_density) {
    FeatureBundle bundle;
    bundle.city_id = city.city_id;
    bundle.raw_density = raw_density;
    for (std::size_t stage = 0; stage < 3; ++stage) {
        for (Typology t : kAllTypologies) {
            auto ti = static_cast<std::size_t>(t);
            bundle.keyline[stage][ti] = keyline_feature(city, sets[stage][ti]);
        }
    }
    return bundle;
}

namespace {

double feature_value(const FeatureBundle& bundle, const FeatureRef& ref,
                     const DensityTransform& dt) {
    if (ref.is_density) return dt.apply(bundle.raw_density);
    return bundle.keyline[static_cast<std::size_t>(ref.stage)][static_cast<std::size_t>(ref.typology)];
}

}  // namespace

DesignMatrix build_design(const std::vector<FeatureBundle>& bundles, const FeatureSubset& subset,
                          const DensityTransform& density_transform) {
    if (subset.features.empty()) throw ConfigError("feature subset is empty");
    DesignMatrix x;
    x.rows = bundles.size();
    x.cols = subset.features.size();
    x.values.reserve(x.rows * x.cols);
    for (const auto& bundle : bundles) {
        for (const auto& ref : subset.features) {
            x.values.push_back(feature_value(bundle, ref, density_transform));
        }
    }
    return x;
}

double TrainedModel::predict(const FeatureBundle& bundle) const {
    std::vector<double> row;
    row.reserve(subset.features.size());
    for (const auto& ref : subset.features) {
        row.push_back(feature_value(bundle, ref, density_transform));
    }
    return predict_proba(logistic, row);
}

TrainedModel train_task_model(LabelTask task, const FeatureSubset& subset,
                              const std::vector<FeatureBundle>& train_bundles,
                              const std::vector<int>& train_labels,
                              const DensityTransform& density_transform,
                              const TrainConfig& trainer, std::uint64_t seed,
                              const std::string& encoder_id) {
    TrainedModel model;
    model.task = task;
    model.subset = subset;
    model.density_transform = density_transform;
    model.seed = seed;
    model.encoder_id = encoder_id;

    DesignMatrix x = build_design(train_bundles, subset, density_transform);
    TrainResult result = train_logistic(x, train_labels, trainer);
    model.logistic = result.model;
    model.lambda = result.lambda;

    std::vector<double> train_scores = predict_proba(model.logistic, x);
    model.train_auc = roc_auc(train_scores, train_labels);
    model.threshold = gmean_threshold(train_scores, train_labels);
    return model;
}

void save_model(const std::string& path, const TrainedModel& model, std::uint64_t input_hash) {
    std::string out = "# citytypo model v1\n";
    out += "task: " + task_name(model.task) + "\n";
    out += "features: " + model.subset.label() + "\n";
    out += "weights:";
    for (double w : model.logistic.weights) out += " " + format_double(w);
    out += "\nbias: " + format_double(model.logistic.bias) + "\n";
    out += "threshold: " + format_double(model.threshold) + "\n";
    out += "lambda: " + format_double(model.lambda) + "\n";
    out += "density_min: " + format_double(model.density_transform.train_min) + "\n";
    out += "density_max: " + format_double(model.density_transform.train_max) + "\n";
    out += "density_median: " + format_double(model.density_transform.train_median) + "\n";
    out += "seed: " + std::to_string(model.seed) + "\n";
    out += "encoder: " + model.encoder_id + "\n";
    out += "train_auc: " + format_double(model.train_auc) + "\n";
    out += "input_hash: " + to_hex(input_hash) + "\n";
    write_file(path, out);
}

TrainedModel load_model(const std::string& path) {
    TrainedModel model;
    bool saw_weights = false;
    for (const auto& line : split_on(read_file(path), '\n')) {
        if (line.empty() || line[0] == '#') continue;
        std::size_t colon = line.find(": ");
        if (colon == std::string::npos) {
            // "weights:" may legitimately carry no space when empty
            if (line == "weights:") {
                saw_weights = true;
                continue;
            }
            throw DataError("malformed model file line in " + path + ": '" + line + "'");
        }
        std::string key = line.substr(0, colon);
        std::string value = line.substr(colon + 2);
        if (key == "task") model.task = task_from_name(value);
        else if (key == "features") model.subset = FeatureSubset::parse(value);
        else if (key == "weights") {
            saw_weights = true;
            for (const auto& piece : split_on(value, ' ')) {
                if (!piece.empty()) model.logistic.weights.push_back(std::stod(piece));
            }
        } else if (key == "bias") model.logistic.bias = std::stod(value);
        else if (key == "threshold") model.threshold = std::stod(value);
        else if (key == "lambda") model.lambda = std::stod(value);
        else if (key == "density_min") model.density_transform.train_min = std::stod(value);
        else if (key == "density_max") model.density_transform.train_max = std::stod(value);
        else if (key == "density_median") model.density_transform.train_median = std::stod(value);
        else if (key == "seed") model.seed = std::stoull(value);
        else if (key == "encoder") model.encoder_id = value;
        else if (key == "train_auc") model.train_auc = std::stod(value);
        else if (key != "input_hash") {
            throw DataError("unknown model file key '" + key + "' in " + path);
        }
    }
    if (!saw_weights || model.subset.features.empty()) {
        throw DataError("incomplete model file: " + path);
    }
    if (model.logistic.weights.size() != model.subset.features.size()) {
        throw DataError("model weight count does not match feature subset in " + path);
    }
    return model;
}

std::vector<FeatureSubset> sweep_subsets(Typology task) {
    const auto opt = KeylineStage::kOptimal;
    const auto init = KeylineStage::kInitial;
    std::vector<Typology> others;
    for (Typology t : kAllTypologies) {
        if (t != task) others.push_back(t);
    }
    auto k = [&](Typology t, KeylineStage s) { return FeatureRef::keyline(t, s); };
    const FeatureRef d = FeatureRef::density();
    const FeatureRef task_opt = k(task, opt);

    std::vector<FeatureSubset> subsets;
    auto add = [&](std::vector<FeatureRef> refs) { subsets.push_back(FeatureSubset{std::move(refs)}); };

    // anchor-only baseline, then the task feature upgraded to optimal / all
    add({k(task, init), k(others[0], init), k(others[1], init), k(others[2], init)});
    add({task_opt, k(others[0], init), k(others[1], init), k(others[2], init)});
    add({k(task, KeylineStage::kAll), k(others[0], init), k(others[1], init), k(others[2], init)});
    // optimal combinations without density
    add({task_opt});
    add({task_opt, k(others[0], opt)});
    add({task_opt, k(others[1], opt)});
    add({task_opt, k(others[2], opt)});
    add({task_opt, k(others[0], opt), k(others[1], opt)});
    add({task_opt, k(others[0], opt), k(others[2], opt)});
    add({task_opt, k(others[1], opt), k(others[2], opt)});
    add({task_opt, k(others[0], opt), k(others[1], opt), k(others[2], opt)});
    // density-only and optimal combinations with density
    add({d});
    add({task_opt, d});
    add({task_opt, k(others[0], init), k(others[1], init), k(others[2], init), d});
    add({task_opt, k(others[0], opt), d});
    add({task_opt, k(others[1], opt), d});
    add({task_opt, k(others[2], opt), d});
    add({task_opt, k(others[0], opt), k(others[1], opt), d});
    add({task_opt, k(others[0], opt), k(others[2], opt), d});
    add({task_opt, k(others[1], opt), k(others[2], opt), d});
    add({task_opt, k(others[0], opt), k(others[1], opt), k(others[2], opt), d});
    return subsets;
}

std::vector<SweepRow> subset_sweep(Typology task, const std::vector<FeatureBundle>& train_bundles,
                                   const std::vector<int>& train_labels,
                                   const std::vector<FeatureBundle>& test_bundles,
                                   const std::vector<int>& test_labels,
                                   const DensityTransform& density_transform,
                                   const TrainConfig& trainer) {
    std::vector<SweepRow> rows;
    double baseline = 0.0;
    for (const FeatureSubset& subset : sweep_subsets(task)) {
        DesignMatrix train_x = build_design(train_bundles, subset, density_transform);
        TrainResult result = train_logistic(train_x, train_labels, trainer);
        DesignMatrix test_x = build_design(test_bundles, subset, density_transform);
        std::vector<double> scores = predict_proba(result.model, test_x);
        SweepRow row;
        row.subset = subset;
        row.auc_test = roc_auc(scores, test_labels);
        if (rows.empty()) {
            baseline = row.auc_test;
            row.lift_pct = 0.0;
        } else {
            row.lift_pct = (row.auc_test - baseline) / baseline * 100.0;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void save_sweep_report(const std::string& path, const std::vector<SweepRow>& rows,
                       std::uint64_t input_hash) {
    std::string out = "# citytypo sweep v1 input_hash=" + to_hex(input_hash) + "\n";
    out += "features,auc_test,lift_pct\n";
    for (const auto& row : rows) {
        out += csv_row({row.subset.label(), format_double(row.auc_test),
                        format_double(row.lift_pct)});
        out.push_back('\n');
    }
    write_file(path, out);
}

std::vector<SweepRow> load_sweep_report(const std::string& path) {
    std::vector<SweepRow> rows;
    for (const auto& line : split_on(read_file(path), '\n')) {
        if (line.empty() || line[0] == '#' || line.rfind("features,", 0) == 0) continue;
        auto fields = parse_csv_record(line);
        if (fields.size() != 3) throw DataError("malformed sweep row: '" + line + "'");
        SweepRow row;
        row.subset = FeatureSubset::parse(fields[0]);
        row.auc_test = std::stod(fields[1]);
        row.lift_pct = std::stod(fields[2]);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace citytypo
