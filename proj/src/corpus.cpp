#include "citytypo/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "citytypo/errors.hpp"
#include "citytypo/text.hpp"
#include "citytypo/util.hpp"

namespace citytypo {

double DensityTransform::apply(std::optional<double> density) const {
    double v = density.has_value() ? *density : train_median;
    if (train_max == train_min) return 0.5;  // degenerate all-equal train densities
    double scaled = (v - train_min) / (train_max - train_min);
    return std::clamp(scaled, 0.0, 1.0);
}

DensityTransform fit_density_transform(const std::vector<const CityRecord*>& train_records) {
    std::vector<double> densities;
    for (const CityRecord* r : train_records) {
        if (r->density_per_sq_mi) densities.push_back(*r->density_per_sq_mi);
    }
    if (densities.size() < 2) {
        throw ConfigError("density normalization needs at least two train records with density (" +
                          std::to_string(densities.size()) + " present)");
    }
    std::sort(densities.begin(), densities.end());
    DensityTransform t;
    t.train_min = densities.front();
    t.train_max = densities.back();
    std::size_t n = densities.size();
    t.train_median = (n % 2 == 1) ? densities[n / 2]
                                  : (densities[n / 2 - 1] + densities[n / 2]) / 2.0;
    return t;
}

namespace {

std::string opt_to_string(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

std::optional<double> opt_from_string(const std::string& s) {
    if (trim(s).empty()) return std::nullopt;
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw DataError("bad numeric field: '" + s + "'");
    }
}

}  // namespace

std::vector<CityRecord> load_dataset_table(const std::string& path) {
    std::string content = read_file(path);
    auto lines = split_on(content, '\n');
    if (lines.empty()) throw DataError("empty dataset table: " + path);

    auto header = parse_csv_record(lines[0]);
    const std::vector<std::string> expected = {"city_id", "name", "url", "label",
                                               "via_flag", "lat", "lon"};
    if (header != expected) {
        throw DataError("dataset table header mismatch in " + path + " (expected " +
                        csv_row(expected) + ")");
    }

    std::vector<CityRecord> records;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        auto fields = parse_csv_record(lines[i]);
        if (fields.size() != expected.size()) {
            throw DataError("dataset row " + std::to_string(i + 1) + " has " +
                            std::to_string(fields.size()) + " fields");
        }
        CityRecord r;
        r.city_id = fields[0];
        r.name = fields[1];
        r.url = fields[2];
        if (!trim(fields[3]).empty()) r.typology_label = typology_from_name(trim(fields[3]));
        std::string via = trim(fields[4]);
        if (!via.empty()) {
            if (via != "0" && via != "1") throw DataError("via_flag must be 0 or 1, got " + via);
            r.via_city = via == "1";
        }
        r.lat = opt_from_string(fields[5]);
        r.lon = opt_from_string(fields[6]);
        if (r.city_id.empty()) throw DataError("dataset row " + std::to_string(i + 1) +
                                               " has empty city_id");
        records.push_back(std::move(r));
    }
    return records;
}

void save_dataset_table(const std::string& path, const std::vector<CityRecord>& records) {
    std::string out = "city_id,name,url,label,via_flag,lat,lon\n";
    for (const auto& r : records) {
        std::vector<std::string> fields = {
            r.city_id,
            r.name,
            r.url,
            r.typology_label ? typology_name(*r.typology_label) : std::string(),
            r.via_city ? (*r.via_city ? "1" : "0") : std::string(),
            opt_to_string(r.lat),
            opt_to_string(r.lon)};
        out += csv_row(fields);
        out.push_back('\n');
    }
    write_file(path, out);
}

std::vector<std::string> merge_via_list(std::vector<CityRecord>& records,
                                        const std::string& path) {
    std::string content = read_file(path);
    std::vector<std::string> unmatched;
    std::map<std::string, bool> via_urls;
    for (const auto& line : split_on(content, '\n')) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto tab = t.find('\t');
        std::string url = tab == std::string::npos ? t : trim(t.substr(tab + 1));
        via_urls[url] = false;
    }
    for (auto& r : records) {
        auto it = via_urls.find(r.url);
        if (it != via_urls.end()) {
            r.via_city = true;
            it->second = true;
        } else {
            r.via_city = false;
        }
    }
    for (const auto& [url, matched] : via_urls) {
        if (!matched) unmatched.push_back(url);
    }
    return unmatched;
}

void write_sentences_file(const std::string& path, const std::vector<CityRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        for (std::size_t i = 0; i < r.sentences.size(); ++i) {
            out += r.city_id;
            out.push_back('\t');
            out += std::to_string(i);
            out.push_back('\t');
            out += r.sentences[i];
            out.push_back('\n');
        }
    }
    write_file(path, out);
}

std::map<std::string, std::vector<std::string>> read_sentences_file(const std::string& path) {
    std::map<std::string, std::vector<std::string>> out;
    std::string content = read_file(path);
    std::size_t line_no = 0;
    for (const auto& line : split_on(content, '\n')) {
        ++line_no;
        if (line.empty()) continue;
        auto t1 = line.find('\t');
        auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) {
            throw DataError("malformed sentences file line " + std::to_string(line_no));
        }
        std::string city_id = line.substr(0, t1);
        std::size_t index = std::stoul(line.substr(t1 + 1, t2 - t1 - 1));
        auto& list = out[city_id];
        if (index != list.size()) {
            throw DataError("sentence indices out of order for '" + city_id + "' at line " +
                            std::to_string(line_no));
        }
        list.push_back(line.substr(t2 + 1));
    }
    return out;
}

void populate_from_page(CityRecord& record, const std::string& raw_page,
                        std::vector<std::string>* warnings) {
    record.sentences = extract_sentences(raw_page);
    InfoboxNumerics info = extract_infobox_numerics(raw_page);
    if (warnings) {
        for (auto& w : info.warnings) warnings->push_back(record.city_id + ": " + w);
    }
    record.population = info.population;
    record.area_sq_mi = info.area_sq_mi;
    record.density_per_sq_mi = info.density_per_sq_mi;
    if (info.lat && info.lon) {
        record.lat = info.lat;
        record.lon = info.lon;
    }
    if (!record.density_per_sq_mi && record.population && record.area_sq_mi &&
        *record.area_sq_mi > 0.0) {
        record.density_per_sq_mi = *record.population / *record.area_sq_mi;
    }
    if (record.density_per_sq_mi && *record.density_per_sq_mi <= 0.0) {
        if (warnings) {
            warnings->push_back(record.city_id + ": non-positive density dropped");
        }
        record.density_per_sq_mi.reset();
    }
}

DatasetSplit build_split(const std::vector<CityRecord>& records, LabelTask task,
                         double train_fraction, std::uint64_t seed, bool stratified) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw ConfigError("train_fraction must be in (0, 1)");
    }
    for (const auto& r : records) binary_label(r, task);  // validates label presence

    DatasetSplit split;
    split.label_task = task;
    split.seed = seed;
    split.stratified = stratified;

    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    if (!stratified) {
        SplitMix64 rng(seed);
        deterministic_shuffle(order, rng);
        std::size_t n_train = static_cast<std::size_t>(train_fraction *
                                                       static_cast<double>(order.size()));
        for (std::size_t i = 0; i < order.size(); ++i) {
            auto& side = i < n_train ? split.train : split.test;
            side.push_back(records[order[i]].city_id);
        }
    } else {
        // group by the 4-class label (or via flag), split each group
        std::map<int, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < records.size(); ++i) {
            int g = task == LabelTask::kVia ? binary_label(records[i], task)
                                            : static_cast<int>(*records[i].typology_label);
            groups[g].push_back(i);
        }
        SplitMix64 rng(seed);
        for (auto& [g, members] : groups) {
            deterministic_shuffle(members, rng);
            std::size_t n_train = static_cast<std::size_t>(
                train_fraction * static_cast<double>(members.size()) + 0.5);
            for (std::size_t i = 0; i < members.size(); ++i) {
                auto& side = i < n_train ? split.train : split.test;
                side.push_back(records[members[i]].city_id);
            }
        }
    }

    auto index = index_records(records);
    std::size_t train_pos = 0;
    for (const auto& id : split.train) {
        train_pos += static_cast<std::size_t>(binary_label(*index.at(id), task));
    }
    if (train_pos == 0) {
        throw DataError("task '" + task_name(task) + "' has zero positives in the train split");
    }
    return split;
}

std::map<std::string, const CityRecord*> index_records(const std::vector<CityRecord>& records) {
    std::map<std::string, const CityRecord*> index;
    for (const auto& r : records) {
        if (!index.emplace(r.city_id, &r).second) {
            throw DataError("duplicate city_id '" + r.city_id + "'");
        }
    }
    return index;
}

}  // namespace citytypo
