#include "citytypo/feasibility.hpp"

#include "citytypo/errors.hpp"
#include "citytypo/metrics.hpp"
#include "citytypo/util.hpp"

namespace citytypo {

ContingencyTable via_contingency(const std::vector<const CityRecord*>& records, Typology t) {
    ContingencyTable counts;
    for (const CityRecord* r : records) {
        bool via = binary_label(*r, LabelTask::kVia) == 1;
        bool is_t = binary_label(*r, task_of(t)) == 1;
        if (is_t) {
            counts.t_total++;
            if (via) counts.via_and_t++;
        } else {
            counts.not_t_total++;
            if (via) counts.via_and_not_t++;
        }
    }
    return counts;
}

double bayes_ratio(const ContingencyTable& counts) {
    if (counts.t_total == 0) throw DataError("bayes_ratio undefined: n(T) = 0");
    if (counts.not_t_total == 0) throw DataError("bayes_ratio undefined: n(notT) = 0");
    if (counts.via_and_not_t == 0) {
        throw DataError("bayes_ratio undefined: n(V and notT) = 0, so P(V|notT) = 0");
    }
    double p_given_t = static_cast<double>(counts.via_and_t) / static_cast<double>(counts.t_total);
    double p_given_not_t =
        static_cast<double>(counts.via_and_not_t) / static_cast<double>(counts.not_t_total);
    return p_given_t / p_given_not_t;
}

std::vector<RatioRow> ratio_report(const std::vector<const CityRecord*>& records) {
    std::vector<RatioRow> rows;
    for (Typology t : kAllTypologies) {
        RatioRow row;
        row.typology = t;
        row.counts = via_contingency(records, t);
        try {
            row.ratio = bayes_ratio(row.counts);
        } catch (const DataError& e) {
            row.defined = false;
            row.note = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void save_ratio_report(const std::string& path, const std::vector<RatioRow>& rows,
                       std::uint64_t input_hash) {
    std::string out = "# citytypo via ratios v1 input_hash=" + to_hex(input_hash) + "\n";
    out += "typology,ratio,n_via_and_t,n_t,n_via_and_not_t,n_not_t,note\n";
    for (const auto& row : rows) {
        out += csv_row({typology_name(row.typology),
                        row.defined ? format_double(row.ratio) : std::string("undefined"),
                        std::to_string(row.counts.via_and_t), std::to_string(row.counts.t_total),
                        std::to_string(row.counts.via_and_not_t),
                        std::to_string(row.counts.not_t_total), row.note});
        out.push_back('\n');
    }
    write_file(path, out);
}

FeasibilityResult train_feasibility_model(const std::vector<FeatureBundle>& train_bundles,
                                          const std::vector<int>& train_labels,
                                          const std::vector<FeatureBundle>& test_bundles,
                                          const std::vector<int>& test_labels,
                                          const DensityTransform& density_transform,
                                          const TrainConfig& trainer, std::uint64_t seed,
                                          const std::string& encoder_id) {
    FeatureSubset subset;
    for (Typology t : kAllTypologies) {
        subset.features.push_back(FeatureRef::keyline(t, KeylineStage::kOptimal));
    }
    subset.features.push_back(FeatureRef::density());

    FeasibilityResult result;
    result.model = train_task_model(LabelTask::kVia, subset, train_bundles, train_labels,
                                    density_transform, trainer, seed, encoder_id);
    result.auc_train = result.model.train_auc;

    std::vector<double> test_scores;
    test_scores.reserve(test_bundles.size());
    for (const auto& bundle : test_bundles) test_scores.push_back(result.model.predict(bundle));
    result.auc_test = roc_auc(test_scores, test_labels);
    return result;
}

}  // namespace citytypo
