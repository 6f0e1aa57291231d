#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "citytypo/types.hpp"

namespace citytypo {

// ---------------------------------------------------------------------------
// Density normalization: min-max fitted on TRAIN densities only; out-of-range
// values are clipped to [0, 1]; missing densities are imputed with the train
// median before the transform. Parameters persist inside TrainedModel.

struct DensityTransform {
    double train_min = 0.0;
    double train_max = 0.0;
    double train_median = 0.0;

    double apply(std::optional<double> density) const;
};

// Throws ConfigError when fewer than two train records carry a density.
DensityTransform fit_density_transform(const std::vector<const CityRecord*>& train_records);

// ---------------------------------------------------------------------------
// Dataset table: CSV with header city_id,name,url,label,via_flag,lat,lon.

std::vector<CityRecord> load_dataset_table(const std::string& path);
void save_dataset_table(const std::string& path, const std::vector<CityRecord>& records);

// Via list: one "name<TAB>url" per line; sets via_city=true on records whose
// url matches and via_city=false elsewhere. Returns the urls that matched no
// record (they need their own dataset rows to contribute).
std::vector<std::string> merge_via_list(std::vector<CityRecord>& records, const std::string& path);

// ---------------------------------------------------------------------------
// Sentences file: one "city_id<TAB>index<TAB>text" line per sentence.

void write_sentences_file(const std::string& path, const std::vector<CityRecord>& records);
std::map<std::string, std::vector<std::string>> read_sentences_file(const std::string& path);

// ---------------------------------------------------------------------------
// Record assembly

// Fill record.sentences and infobox numerics from a raw page. Dataset-table
// lat/lon act as fallback when the page has none; density is derived from
// population/area when the infobox lacks it. Parse warnings are appended to
// *warnings when given.
void populate_from_page(CityRecord& record, const std::string& raw_page,
                        std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// Train/test split: deterministic shuffle under seed, then a fraction split.
// The shuffle ignores labels, so every task sees the same partition. With
// stratified=true the fraction is applied per typology group instead.
// Throws DataError when a record misses the label the task needs or when the
// train side ends up with zero positives.

DatasetSplit build_split(const std::vector<CityRecord>& records, LabelTask task,
                         double train_fraction, std::uint64_t seed, bool stratified = false);

// Convenience lookup table.
std::map<std::string, const CityRecord*> index_records(const std::vector<CityRecord>& records);

}  // namespace citytypo
