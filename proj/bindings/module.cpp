#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "citytypo/embedding.hpp"
#include "citytypo/feasibility.hpp"
#include "citytypo/keyline.hpp"
#include "citytypo/logistic.hpp"
#include "citytypo/metrics.hpp"
#include "citytypo/text.hpp"

namespace py = pybind11;
using namespace citytypo;

namespace {

EmbeddingMatrix matrix_from_rows(const std::vector<std::vector<float>>& rows,
                                 const std::string& city_id) {
    if (rows.empty()) throw std::invalid_argument("need at least one row");
    EmbeddingMatrix m;
    m.city_id = city_id;
    m.rows = rows.size();
    m.dim = rows[0].size();
    m.values.reserve(m.rows * m.dim);
    for (const auto& row : rows) {
        if (row.size() != m.dim) throw std::invalid_argument("ragged rows");
        m.values.insert(m.values.end(), row.begin(), row.end());
    }
    return m;
}

KeylineSet set_from_rows(const std::vector<std::vector<float>>& keys) {
    KeylineSet set;
    for (const auto& key : keys) {
        Keyline k;
        k.embedding = key;
        set.keylines.push_back(std::move(k));
    }
    return set;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "City typology prediction from encyclopedia text: similarity features, "
              "keyline max-pooling, logistic training and ranking metrics.";

    m.def("cosine_similarity",
          [](const std::vector<float>& u, const std::vector<float>& v) {
              return cosine_similarity(u, v);
          },
          py::arg("u"), py::arg("v"));

    m.def("similarity_matrix",
          [](const std::vector<std::vector<float>>& doc_rows,
             const std::vector<std::vector<float>>& keys) {
              EmbeddingMatrix doc = matrix_from_rows(doc_rows, "doc");
              SimilarityMatrix sims = similarity_matrix(doc, keys);
              std::vector<std::vector<double>> out(sims.rows);
              for (std::size_t r = 0; r < sims.rows; ++r) {
                  out[r].assign(sims.values.begin() + r * sims.cols,
                                sims.values.begin() + (r + 1) * sims.cols);
              }
              return out;
          },
          py::arg("doc_rows"), py::arg("keys"),
          "Dense similarity matrix between unit-normalized rows and keys.");

    m.def("keyline_feature",
          [](const std::vector<std::vector<float>>& doc_rows,
             const std::vector<std::vector<float>>& keys) {
              EmbeddingMatrix doc = matrix_from_rows(doc_rows, "doc");
              return keyline_feature(doc, set_from_rows(keys));
          },
          py::arg("doc_rows"), py::arg("keys"),
          "Max cosine similarity between any document row and any keyline.");

    m.def("extract_sentences", &extract_sentences, py::arg("raw_page"));

    m.def("extract_infobox_numerics",
          [](const std::string& raw_page) {
              InfoboxNumerics info = extract_infobox_numerics(raw_page);
              py::dict out;
              auto set = [&](const char* key, const std::optional<double>& v) {
                  out[key] = v ? py::object(py::float_(*v)) : py::object(py::none());
              };
              set("population", info.population);
              set("area_sq_mi", info.area_sq_mi);
              set("density_per_sq_mi", info.density_per_sq_mi);
              set("lat", info.lat);
              set("lon", info.lon);
              out["warnings"] = info.warnings;
              return out;
          },
          py::arg("raw_page"));

    py::class_<FixtureEncoder>(m, "FixtureEncoder")
        .def(py::init<std::size_t, std::uint64_t>(), py::arg("dim"), py::arg("seed"))
        .def_property_readonly("encoder_id", &FixtureEncoder::encoder_id)
        .def_property_readonly("dim", &FixtureEncoder::dim)
        .def("embed",
             [](FixtureEncoder& self, const std::vector<std::string>& sentences) {
                 EmbeddingMatrix mat = embed_sentences(sentences, self, "py");
                 std::vector<std::vector<float>> rows(mat.rows);
                 for (std::size_t r = 0; r < mat.rows; ++r) {
                     auto row = mat.row(r);
                     rows[r].assign(row.begin(), row.end());
                 }
                 return rows;
             },
             py::arg("sentences"), "Unit-normalized embeddings, one row per sentence.");

    m.def("train_logistic",
          [](const std::vector<std::vector<double>>& x, const std::vector<int>& y, double lambda,
             double tolerance, std::size_t max_iterations) {
              if (x.empty()) throw std::invalid_argument("empty design matrix");
              DesignMatrix mat;
              mat.rows = x.size();
              mat.cols = x[0].size();
              for (const auto& row : x) {
                  if (row.size() != mat.cols) throw std::invalid_argument("ragged rows");
                  mat.values.insert(mat.values.end(), row.begin(), row.end());
              }
              TrainConfig cfg;
              cfg.lambda = lambda;
              cfg.tolerance = tolerance;
              cfg.max_iterations = max_iterations;
              TrainResult result = train_logistic(mat, y, cfg);
              return py::make_tuple(result.model.weights, result.model.bias, result.final_loss);
          },
          py::arg("x"), py::arg("y"), py::arg("lambda_") = -1.0, py::arg("tolerance") = 1e-6,
          py::arg("max_iterations") = 10000,
          "Returns (weights, bias, final_loss) of the regularized fit.");

    m.def("predict_proba",
          [](const std::vector<double>& weights, double bias, const std::vector<double>& x) {
              LogisticModel model{weights, bias};
              return predict_proba(model, x);
          },
          py::arg("weights"), py::arg("bias"), py::arg("x"));

    m.def("roc_auc", &roc_auc, py::arg("scores"), py::arg("labels"));
    m.def("gmean_threshold", &gmean_threshold, py::arg("scores"), py::arg("labels"));

    m.def("classification_scores",
          [](const std::vector<double>& scores, const std::vector<int>& labels, double threshold) {
              ClassificationScores s = classification_scores(scores, labels, threshold);
              py::dict out;
              out["accuracy"] = s.accuracy;
              out["precision"] = s.precision;
              out["recall"] = s.recall;
              out["f1"] = s.f1;
              return out;
          },
          py::arg("scores"), py::arg("labels"), py::arg("threshold"));

    m.def("bayes_ratio",
          [](std::uint64_t via_and_t, std::uint64_t t_total, std::uint64_t via_and_not_t,
             std::uint64_t not_t_total) {
              return bayes_ratio(ContingencyTable{via_and_t, t_total, via_and_not_t, not_t_total});
          },
          py::arg("via_and_t"), py::arg("t_total"), py::arg("via_and_not_t"),
          py::arg("not_t_total"),
          "P(V|T)/P(V|not T) from contingency counts.");

    m.def("default_anchor_text",
          [](const std::string& typology) { return default_anchor_text(typology_from_name(typology)); },
          py::arg("typology"));
}
