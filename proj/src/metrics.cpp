#include "citytypo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "citytypo/errors.hpp"

namespace citytypo {

namespace {

void check_binary(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw DataError("scores and labels differ in length");
    }
    bool has_pos = false, has_neg = false;
    for (int y : labels) {
        if (y == 1) has_pos = true;
        else if (y == 0) has_neg = true;
        else throw DataError("labels must be 0 or 1");
    }
    if (!has_pos || !has_neg) {
        throw DataError("metric undefined: only one class present");
    }
}

}  // namespace

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_binary(scores, labels);
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks over tied groups; ranks are 1-based. Tied-group averages
    // are integers or half-integers, so the rank sum is exact in double.
    double pos_rank_sum = 0.0;
    std::size_t n_pos = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) {
                pos_rank_sum += avg_rank;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    const double np = static_cast<double>(n_pos);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double gmean_threshold(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_binary(scores, labels);
    const std::size_t n = scores.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    std::size_t total_pos = 0;
    for (int y : labels) total_pos += static_cast<std::size_t>(y == 1);
    const std::size_t total_neg = n - total_pos;

    double lo = scores[order.front()];
    double hi = scores[order.back()];
    std::vector<double> candidates;
    candidates.push_back(lo / 2.0);
    for (std::size_t k = 1; k < n; ++k) {
        double a = scores[order[k - 1]];
        double b = scores[order[k]];
        if (a != b) candidates.push_back((a + b) / 2.0);
    }
    candidates.push_back((hi + 1.0) / 2.0);

    double best_gmean = -1.0;
    double best_threshold = candidates.front();
    // Sweep candidates in increasing order, maintaining counts of samples at
    // or below the threshold (those are predicted negative: predict 1 iff
    // score > threshold).
    std::size_t idx = 0;
    std::size_t pos_below = 0, neg_below = 0;
    for (double t : candidates) {
        while (idx < n && scores[order[idx]] <= t) {
            if (labels[order[idx]] == 1) ++pos_below;
            else ++neg_below;
            ++idx;
        }
        double tpr = static_cast<double>(total_pos - pos_below) / static_cast<double>(total_pos);
        double tnr = static_cast<double>(neg_below) / static_cast<double>(total_neg);
        double g = std::sqrt(tpr * tnr);
        if (g > best_gmean) {
            best_gmean = g;
            best_threshold = t;
        }
    }
    return best_threshold;
}

ClassificationScores classification_scores(const std::vector<double>& scores,
                                           const std::vector<int>& labels, double threshold) {
    if (scores.size() != labels.size()) {
        throw DataError("scores and labels differ in length");
    }
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool pred = scores[i] > threshold;
        bool truth = labels[i] == 1;
        if (pred && truth) ++tp;
        else if (pred && !truth) ++fp;
        else if (!pred && truth) ++fn;
        else ++tn;
    }
    ClassificationScores out;
    const double total = static_cast<double>(scores.size());
    out.accuracy = total > 0 ? static_cast<double>(tp + tn) / total : 0.0;
    if (tp + fp == 0) {
        out.precision = 0.0;
        out.precision_degenerate = true;
    } else {
        out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    out.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    out.f1 = (out.precision + out.recall) > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

}  // namespace citytypo
