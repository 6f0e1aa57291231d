#include "citytypo/types.hpp"

#include "citytypo/errors.hpp"

namespace citytypo {

namespace {
const std::array<std::string, 4> kTypologyNames = {"congestion", "auto", "transit", "bike"};
const std::array<std::string, 5> kTaskNames = {"congestion", "auto", "transit", "bike", "via"};
}  // namespace

const std::string& typology_name(Typology t) {
    return kTypologyNames[static_cast<std::size_t>(t)];
}

Typology typology_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kTypologyNames.size(); ++i) {
        if (kTypologyNames[i] == name) return static_cast<Typology>(i);
    }
    throw ConfigError("unknown typology: '" + name + "'");
}

const std::string& task_name(LabelTask t) {
    return kTaskNames[static_cast<std::size_t>(t)];
}

LabelTask task_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kTaskNames.size(); ++i) {
        if (kTaskNames[i] == name) return static_cast<LabelTask>(i);
    }
    throw ConfigError("unknown task: '" + name + "'");
}

int binary_label(const CityRecord& record, LabelTask task) {
    if (task == LabelTask::kVia) {
        if (!record.via_city.has_value()) {
            throw DataError("city '" + record.city_id + "' has no via flag");
        }
        return *record.via_city ? 1 : 0;
    }
    if (!record.typology_label.has_value()) {
        throw DataError("city '" + record.city_id + "' has no typology label");
    }
    return static_cast<int>(*record.typology_label) == static_cast<int>(task) ? 1 : 0;
}

}  // namespace citytypo
