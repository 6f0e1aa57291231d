#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "citytypo/models.hpp"
#include "citytypo/types.hpp"

namespace citytypo {

// Via/typology contingency counts over one city subset.
struct ContingencyTable {
    std::uint64_t via_and_t = 0;      // n(V ∧ T)
    std::uint64_t t_total = 0;        // n(T)
    std::uint64_t via_and_not_t = 0;  // n(V ∧ ¬T)
    std::uint64_t not_t_total = 0;    // n(¬T)
};

ContingencyTable via_contingency(const std::vector<const CityRecord*>& records, Typology t);

// P(V|T) / P(V|¬T) straight from counts: [n(V∧T)/n(T)] / [n(V∧¬T)/n(¬T)].
// Throws DataError naming the offending cell when a denominator is zero.
double bayes_ratio(const ContingencyTable& counts);

struct RatioRow {
    Typology typology = Typology::kCongestion;
    ContingencyTable counts;
    double ratio = 0.0;
    bool defined = true;
    std::string note;  // the zero cell when undefined
};

// One row per typology; undefined ratios are reported, not fatal.
std::vector<RatioRow> ratio_report(const std::vector<const CityRecord*>& records);
void save_ratio_report(const std::string& path, const std::vector<RatioRow>& rows,
                       std::uint64_t input_hash);

// The Via-feasibility model: optimal keyline features + density, labels from
// the via flag, reusing the shared logistic machinery.
struct FeasibilityResult {
    TrainedModel model;
    double auc_train = 0.0;
    double auc_test = 0.0;
};

FeasibilityResult train_feasibility_model(const std::vector<FeatureBundle>& train_bundles,
                                          const std::vector<int>& train_labels,
                                          const std::vector<FeatureBundle>& test_bundles,
                                          const std::vector<int>& test_labels,
                                          const DensityTransform& density_transform,
                                          const TrainConfig& trainer, std::uint64_t seed,
                                          const std::string& encoder_id);

}  // namespace citytypo
