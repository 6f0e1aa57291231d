#include "citytypo/config.hpp"

#include <filesystem>

#include "citytypo/errors.hpp"
#include "citytypo/util.hpp"

namespace citytypo {

namespace {

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("boolean expected for '" + key + "', got '" + value + "'");
}

double parse_double(const std::string& value, const std::string& key) {
    try {
        std::size_t consumed = 0;
        double v = std::stod(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("number expected for '" + key + "', got '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
    try {
        std::size_t consumed = 0;
        std::uint64_t v = std::stoull(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("unsigned integer expected for '" + key + "', got '" + value + "'");
    }
}

}  // namespace

std::string PipelineConfig::resolve(const std::string& path) const {
    if (path.empty() || path.front() == '/' || config_dir.empty()) return path;
    return config_dir + "/" + path;
}

std::uint64_t PipelineConfig::require_seed() const {
    if (!split_seed) {
        throw ConfigError("a seed is mandatory for this command: set [split] seed or pass --seed");
    }
    return *split_seed;
}

PipelineConfig load_config(const std::string& path) {
    std::filesystem::path p(path);
    std::string dir = p.has_parent_path() ? p.parent_path().string() : ".";
    return parse_config(read_file(path), dir);
}

PipelineConfig parse_config(const std::string& content, const std::string& config_dir) {
    PipelineConfig cfg;
    cfg.config_dir = config_dir;

    bool saw_schema = false;
    std::string section;
    std::size_t line_no = 0;
    for (const auto& raw_line : split_on(content, '\n')) {
        ++line_no;
        std::string line = trim(raw_line);
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("malformed section header at line " + std::to_string(line_no));
            }
            section = line.substr(1, line.size() - 2);
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected key = value at line " + std::to_string(line_no));
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        std::string qualified = section.empty() ? key : section + "." + key;

        if (qualified == "schema_version") {
            if (value != "1") throw ConfigError("unsupported schema_version '" + value + "'");
            saw_schema = true;
        } else if (qualified == "paths.dataset") cfg.dataset = value;
        else if (qualified == "paths.via_list") cfg.via_list = value;
        else if (qualified == "paths.predict_list") cfg.predict_list = value;
        else if (qualified == "paths.page_cache") cfg.page_cache = value;
        else if (qualified == "paths.embedding_cache") cfg.embedding_cache = value;
        else if (qualified == "paths.output") cfg.output = value;
        else if (qualified == "encoder.kind") {
            if (value != "fixture" && value != "fixture-table" && value != "remote") {
                throw ConfigError("encoder.kind must be fixture, fixture-table or remote");
            }
            cfg.encoder_kind = value;
        } else if (qualified == "encoder.dim") cfg.encoder_dim = parse_u64(value, qualified);
        else if (qualified == "encoder.seed") cfg.encoder_seed = parse_u64(value, qualified);
        else if (qualified == "encoder.table") cfg.encoder_table = value;
        else if (qualified == "encoder.url") cfg.encoder_url = value;
        else if (qualified == "encoder.id") cfg.encoder_name = value;
        else if (section == "anchors") {
            cfg.anchor_override[static_cast<std::size_t>(typology_from_name(key))] = value;
        } else if (qualified == "split.fraction") cfg.split_fraction = parse_double(value, qualified);
        else if (qualified == "split.seed") cfg.split_seed = parse_u64(value, qualified);
        else if (qualified == "split.stratified") cfg.split_stratified = parse_bool(value, qualified);
        else if (qualified == "cv.folds") cfg.cv.folds = parse_u64(value, qualified);
        else if (qualified == "cv.repeats") cfg.cv.repeats = parse_u64(value, qualified);
        else if (qualified == "cv.seed") {
            cfg.cv.seed = parse_u64(value, qualified);
            cfg.cv_seed_set = true;
        } else if (qualified == "fetch.offline") cfg.offline = parse_bool(value, qualified);
        else if (qualified == "trainer.lambda") cfg.trainer.lambda = parse_double(value, qualified);
        else if (qualified == "trainer.tolerance") cfg.trainer.tolerance = parse_double(value, qualified);
        else if (qualified == "trainer.max_iterations") {
            cfg.trainer.max_iterations = parse_u64(value, qualified);
        } else if (section == "subsets") {
            cfg.subset_override[static_cast<std::size_t>(task_from_name(key))] = value;
        } else if (qualified == "expansion.emit_all_set") {
            cfg.emit_all_set = parse_bool(value, qualified);
        } else {
            throw ConfigError("unknown config key '" + qualified + "' at line " +
                              std::to_string(line_no));
        }
    }
    if (!saw_schema) throw ConfigError("config is missing schema_version");
    if (cfg.dataset.empty()) throw ConfigError("config is missing paths.dataset");
    if (cfg.split_fraction <= 0.0 || cfg.split_fraction >= 1.0) {
        throw ConfigError("split.fraction must be in (0, 1)");
    }
    if (cfg.cv.folds < 2) throw ConfigError("cv.folds must be at least 2");
    if (cfg.cv.repeats < 1) throw ConfigError("cv.repeats must be at least 1");
    return cfg;
}

}  // namespace citytypo
