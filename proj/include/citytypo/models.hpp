#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "citytypo/corpus.hpp"
#include "citytypo/keyline.hpp"
#include "citytypo/logistic.hpp"
#include "citytypo/types.hpp"

namespace citytypo {

// One model input: a keyline feature at a specific stage, or the density.
struct FeatureRef {
    bool is_density = false;
    Typology typology = Typology::kCongestion;
    KeylineStage stage = KeylineStage::kOptimal;

    std::string label() const;  // "f_c:optimal", "f_density", ...
    static FeatureRef parse(const std::string& label);
    static FeatureRef density();
    static FeatureRef keyline(Typology t, KeylineStage s);

    bool operator==(const FeatureRef&) const = default;
};

// The subset mask of a model: which of the available features it consumes.
struct FeatureSubset {
    std::vector<FeatureRef> features;

    std::string label() const;  // space-joined feature labels
    static FeatureSubset parse(const std::string& label);
    bool operator==(const FeatureSubset&) const = default;
};

// All keyline feature variants plus the raw density for one city; a feature
// subset picks columns out of this.
struct FeatureBundle {
    std::string city_id;
    std::array<std::array<double, 4>, 3> keyline{};  // [stage][typology]
    std::optional<double> raw_density;
};

// Keyline sets per stage, each indexed by typology in canonical order.
using KeylineSetsByStage = std::array<std::array<KeylineSet, 4>, 3>;

FeatureBundle compute_feature_bundle(const EmbeddingMatrix& city, const KeylineSetsByStage& sets,
                                     std::optional<double> raw_density);

DesignMatrix build_design(const std::vector<FeatureBundle>& bundles, const FeatureSubset& subset,
                          const DensityTransform& density_transform);

// A persisted one-vs-all classifier: weights over its feature subset, the
// G-mean decision threshold, and the density normalization fitted on train.
struct TrainedModel {
    LabelTask task = LabelTask::kCongestion;
    FeatureSubset subset;
    LogisticModel logistic;
    double threshold = 0.5;
    double lambda = 0.0;
    DensityTransform density_transform;
    std::uint64_t seed = 0;
    std::string encoder_id;
    double train_auc = 0.0;

    double predict(const FeatureBundle& bundle) const;
};

TrainedModel train_task_model(LabelTask task, const FeatureSubset& subset,
                              const std::vector<FeatureBundle>& train_bundles,
                              const std::vector<int>& train_labels,
                              const DensityTransform& density_transform,
                              const TrainConfig& trainer, std::uint64_t seed,
                              const std::string& encoder_id);

void save_model(const std::string& path, const TrainedModel& model, std::uint64_t input_hash);
TrainedModel load_model(const std::string& path);

// ---------------------------------------------------------------------------
// Feature-subset sweep: the fixed 21 subsets per task (anchor-only baseline,
// initial/optimal/all task-feature variants, density-only, and the optimal
// combinations with and without density).

std::vector<FeatureSubset> sweep_subsets(Typology task);

struct SweepRow {
    FeatureSubset subset;
    double auc_test = 0.0;
    double lift_pct = 0.0;  // vs the anchor-only baseline row
};

std::vector<SweepRow> subset_sweep(Typology task, const std::vector<FeatureBundle>& train_bundles,
                                   const std::vector<int>& train_labels,
                                   const std::vector<FeatureBundle>& test_bundles,
                                   const std::vector<int>& test_labels,
                                   const DensityTransform& density_transform,
                                   const TrainConfig& trainer);

void save_sweep_report(const std::string& path, const std::vector<SweepRow>& rows,
                       std::uint64_t input_hash);
std::vector<SweepRow> load_sweep_report(const std::string& path);

}  // namespace citytypo
