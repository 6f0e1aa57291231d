#pragma once

#include <vector>

namespace citytypo {

// ROC AUC via the rank formulation: P(score_pos > score_neg) + 0.5 P(tie).
// Equivalent to trapezoidal integration of the ROC curve. Throws DataError
// when only one class is present.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// Decision threshold maximizing the G-mean sqrt(TPR * TNR), where a sample is
// predicted positive iff score > threshold. Candidate thresholds are the
// midpoints between adjacent distinct scores plus one candidate below the
// minimum (min/2) and one above the maximum ((max+1)/2); ties in G-mean go
// to the lowest threshold. Throws DataError when only one class is present.
double gmean_threshold(const std::vector<double>& scores, const std::vector<int>& labels);

struct ClassificationScores {
    double accuracy = 0.0;
    double precision = 0.0;  // 0 when nothing is predicted positive
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_degenerate = false;  // no predicted positives
};

ClassificationScores classification_scores(const std::vector<double>& scores,
                                           const std::vector<int>& labels, double threshold);

}  // namespace citytypo
