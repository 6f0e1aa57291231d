#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "citytypo/keyline.hpp"
#include "citytypo/logistic.hpp"
#include "citytypo/types.hpp"

namespace citytypo {

// Pipeline configuration: a plain-text key-value document with [sections],
// versioned by schema_version. Unknown sections or keys are errors.
struct PipelineConfig {
    // [paths]
    std::string dataset;
    std::string via_list;      // optional
    std::string predict_list;  // optional; defaults to dataset
    std::string page_cache = "cache/pages";
    std::string embedding_cache = "cache/embeddings";
    std::string output = "out";

    // [encoder]
    std::string encoder_kind = "fixture";  // fixture | fixture-table | remote
    std::size_t encoder_dim = 768;
    std::uint64_t encoder_seed = 0x5EED;
    std::string encoder_table;  // fixture-table
    std::string encoder_url;    // remote
    std::string encoder_name = "stsb-distilbert-base";  // remote id

    // [anchors] (defaults per typology unless overridden)
    std::array<std::optional<std::string>, 4> anchor_override;

    // [split]
    double split_fraction = 0.7;
    std::optional<std::uint64_t> split_seed;  // mandatory for training commands
    bool split_stratified = false;

    // [cv]
    CvConfig cv;
    bool cv_seed_set = false;

    // [fetch]
    bool offline = false;

    // [trainer]
    TrainConfig trainer;

    // [subsets] final-model feature subsets per task (labels), optional
    std::array<std::optional<std::string>, 5> subset_override;

    // [expansion]
    bool emit_all_set = true;

    std::string config_dir;  // directory of the config file; relative paths resolve against it

    std::string resolve(const std::string& path) const;
    std::uint64_t require_seed() const;  // throws ConfigError when absent
};

PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(const std::string& content, const std::string& config_dir);

}  // namespace citytypo
