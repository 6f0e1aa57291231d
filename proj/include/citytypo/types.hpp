#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace citytypo {

// The four transportation typologies. Values double as indices into
// per-typology arrays, in this canonical order.
enum class Typology { kCongestion = 0, kAuto = 1, kTransit = 2, kBike = 3 };

inline constexpr std::array<Typology, 4> kAllTypologies = {
    Typology::kCongestion, Typology::kAuto, Typology::kTransit, Typology::kBike};

// Binary classification tasks: the four one-vs-all typology tasks plus the
// microtransit feasibility task.
enum class LabelTask { kCongestion = 0, kAuto = 1, kTransit = 2, kBike = 3, kVia = 4 };

const std::string& typology_name(Typology t);
Typology typology_from_name(const std::string& name);
const std::string& task_name(LabelTask t);
LabelTask task_from_name(const std::string& name);
inline LabelTask task_of(Typology t) { return static_cast<LabelTask>(static_cast<int>(t)); }

// One city: identity, page provenance, extracted text, infobox numerics and
// optional labels. `sentences` holds the cleaned main-body sentences in
// document order.
struct CityRecord {
    std::string city_id;
    std::string name;
    std::string url;
    std::vector<std::string> sentences;
    std::optional<double> population;
    std::optional<double> area_sq_mi;
    std::optional<double> density_per_sq_mi;
    std::optional<double> lat;
    std::optional<double> lon;
    std::optional<Typology> typology_label;
    std::optional<bool> via_city;
};

// Binary label for `record` under `task` (one-vs-all; via task uses the flag).
// Throws DataError when the needed label is missing.
int binary_label(const CityRecord& record, LabelTask task);

struct DatasetSplit {
    std::vector<std::string> train;  // city_ids
    std::vector<std::string> test;
    LabelTask label_task = LabelTask::kCongestion;
    std::uint64_t seed = 0;
    bool stratified = false;
};

}  // namespace citytypo
