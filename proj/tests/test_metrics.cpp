#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "citytypo/errors.hpp"
#include "citytypo/metrics.hpp"

using namespace citytypo;

namespace {

// O(n^2) pair-counting oracle: P(score_pos > score_neg) + 0.5 P(tie).
double auc_pair_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
    double wins = 0.0;
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        ++n_pos;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    for (int y : labels) n_neg += static_cast<std::size_t>(y == 0);
    return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double gmean_at(const std::vector<double>& scores, const std::vector<int>& labels, double t) {
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool pred = scores[i] > t;
        if (labels[i] == 1) (pred ? tp : fn)++;
        else (pred ? fp : tn)++;
    }
    double tpr = static_cast<double>(tp) / static_cast<double>(tp + fn);
    double tnr = static_cast<double>(tn) / static_cast<double>(tn + fp);
    return std::sqrt(tpr * tnr);
}

// Exhaustive scan over the same candidate grid the implementation declares:
// min/2, midpoints of adjacent distinct scores, (max+1)/2; lowest wins ties.
double gmean_scan_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<double> candidates = {sorted.front() / 2.0};
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        candidates.push_back((sorted[i - 1] + sorted[i]) / 2.0);
    }
    candidates.push_back((sorted.back() + 1.0) / 2.0);
    double best_g = -1.0, best_t = candidates.front();
    for (double t : candidates) {
        double g = gmean_at(scores, labels, t);
        if (g > best_g) {
            best_g = g;
            best_t = t;
        }
    }
    return best_t;
}

struct RandomInstance {
    std::vector<double> scores;
    std::vector<int> labels;
};

RandomInstance random_instance(std::mt19937& rng, bool with_ties) {
    std::uniform_int_distribution<std::size_t> size_dist(4, 60);
    std::uniform_real_distribution<double> score_dist(0.0, 1.0);
    std::uniform_int_distribution<int> label_dist(0, 1);
    std::uniform_int_distribution<int> tie_level(1, 8);
    RandomInstance inst;
    std::size_t n = size_dist(rng);
    for (std::size_t i = 0; i < n; ++i) {
        double s = score_dist(rng);
        if (with_ties) s = static_cast<double>(tie_level(rng)) / 10.0;
        inst.scores.push_back(s);
        inst.labels.push_back(label_dist(rng));
    }
    // ensure both classes
    inst.labels[0] = 1;
    inst.labels[1] = 0;
    return inst;
}

}  // namespace

TEST_CASE("roc_auc on perfectly ordered scores is 1") {
    CHECK(roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == 1.0);
    CHECK(roc_auc({0.1, 0.2, 0.8, 0.9}, {1, 1, 0, 0}) == 0.0);
}

TEST_CASE("roc_auc with all-equal scores is 0.5") {
    CHECK(roc_auc({0.5, 0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0, 0}) == 0.5);
}

TEST_CASE("roc_auc equals the pair-counting oracle on an 8-sample fixture") {
    std::vector<double> scores = {0.1, 0.4, 0.35, 0.8, 0.8, 0.7, 0.2, 0.4};
    std::vector<int> labels = {0, 1, 0, 1, 0, 1, 0, 1};
    CHECK(roc_auc(scores, labels) == auc_pair_oracle(scores, labels));
}

TEST_CASE("roc_auc equals the pair-counting oracle on random instances with ties") {
    std::mt19937 rng(20260810);
    for (int trial = 0; trial < 200; ++trial) {
        RandomInstance inst = random_instance(rng, trial % 2 == 0);
        CHECK(roc_auc(inst.scores, inst.labels) == auc_pair_oracle(inst.scores, inst.labels));
    }
}

TEST_CASE("roc_auc is exactly invariant under strictly monotone transforms") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        RandomInstance inst = random_instance(rng, true);
        std::vector<double> transformed = inst.scores;
        for (double& s : transformed) s = 3.0 * s + 1.0;  // exact in floating point
        CHECK(roc_auc(inst.scores, inst.labels) == roc_auc(transformed, inst.labels));
    }
}

TEST_CASE("roc_auc rejects single-class inputs") {
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {1, 1}), DataError);
    CHECK_THROWS_AS(roc_auc({0.1, 0.2}, {0, 0}), DataError);
}

TEST_CASE("gmean_threshold separates a clean gap at its midpoint") {
    std::vector<double> scores = {0.9, 0.8, 0.3, 0.2};
    std::vector<int> labels = {1, 1, 0, 0};
    double t = gmean_threshold(scores, labels);
    CHECK(t == doctest::Approx((0.3 + 0.8) / 2.0));
    CHECK(gmean_at(scores, labels, t) == 1.0);
}

TEST_CASE("gmean_threshold with all-equal scores returns the lowest candidate") {
    std::vector<double> scores = {0.4, 0.4, 0.4, 0.4};
    std::vector<int> labels = {1, 0, 1, 0};
    CHECK(gmean_threshold(scores, labels) == 0.2);  // min/2
}

TEST_CASE("gmean_threshold matches the exhaustive scan oracle") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        RandomInstance inst = random_instance(rng, trial % 3 != 0);
        CHECK(gmean_threshold(inst.scores, inst.labels) ==
              gmean_scan_oracle(inst.scores, inst.labels));
    }
}

TEST_CASE("classification_scores on a hand-counted confusion") {
    // TP=2, FP=1, FN=1, TN=2 at threshold 0.5
    std::vector<double> scores = {0.9, 0.8, 0.7, 0.4, 0.3, 0.2};
    std::vector<int> labels = {1, 1, 0, 1, 0, 0};
    ClassificationScores s = classification_scores(scores, labels, 0.5);
    CHECK(s.precision == doctest::Approx(2.0 / 3.0));
    CHECK(s.recall == doctest::Approx(2.0 / 3.0));
    CHECK(s.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(s.accuracy == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("classification_scores when everything is correct") {
    ClassificationScores s = classification_scores({0.9, 0.1}, {1, 0}, 0.5);
    CHECK(s.accuracy == 1.0);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.f1 == 1.0);
}

TEST_CASE("classification_scores defines precision as 0 with no predicted positives") {
    ClassificationScores s = classification_scores({0.1, 0.2}, {1, 0}, 0.9);
    CHECK(s.precision == 0.0);
    CHECK(s.precision_degenerate);
    CHECK(s.recall == 0.0);
    CHECK(s.f1 == 0.0);
}
