#include "citytypo/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "citytypo/errors.hpp"

namespace citytypo {

namespace {

// log(1 + e^x) without overflow.
double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

constexpr double kProbClamp = 1e-12;

double dot_row(const DesignMatrix& x, std::size_t r, const std::vector<double>& w) {
    double z = 0.0;
    const double* row = x.values.data() + r * x.cols;
    for (std::size_t c = 0; c < x.cols; ++c) z += row[c] * w[c];
    return z;
}

}  // namespace

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

double predict_proba(const LogisticModel& model, const std::vector<double>& x) {
    if (x.size() != model.weights.size()) {
        throw DataError("predict_proba: feature count " + std::to_string(x.size()) +
                        " does not match model (" + std::to_string(model.weights.size()) + ")");
    }
    double z = model.bias;
    for (std::size_t i = 0; i < x.size(); ++i) z += model.weights[i] * x[i];
    return std::clamp(sigmoid(z), kProbClamp, 1.0 - kProbClamp);
}

std::vector<double> predict_proba(const LogisticModel& model, const DesignMatrix& x) {
    if (x.cols != model.weights.size()) {
        throw DataError("predict_proba: matrix column count does not match model");
    }
    std::vector<double> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) {
        double z = model.bias + dot_row(x, r, model.weights);
        out[r] = std::clamp(sigmoid(z), kProbClamp, 1.0 - kProbClamp);
    }
    return out;
}

double logistic_loss(const DesignMatrix& x, const std::vector<int>& y,
                     const std::vector<double>& weights, double bias, double lambda) {
    const double n = static_cast<double>(x.rows);
    double loss = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
        double z = bias + dot_row(x, r, weights);
        // BCE term: softplus(-z) for y=1, softplus(z) for y=0.
        loss += softplus(y[r] == 1 ? -z : z);
    }
    loss /= n;
    double w2 = 0.0;
    for (double w : weights) w2 += w * w;
    return loss + 0.5 * lambda * w2;
}

void logistic_gradient(const DesignMatrix& x, const std::vector<int>& y,
                       const std::vector<double>& weights, double bias, double lambda,
                       std::vector<double>& grad_weights, double& grad_bias) {
    const double n = static_cast<double>(x.rows);
    grad_weights.assign(x.cols, 0.0);
    grad_bias = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
        double z = bias + dot_row(x, r, weights);
        double residual = sigmoid(z) - static_cast<double>(y[r]);
        const double* row = x.values.data() + r * x.cols;
        for (std::size_t c = 0; c < x.cols; ++c) grad_weights[c] += residual * row[c];
        grad_bias += residual;
    }
    for (std::size_t c = 0; c < x.cols; ++c) {
        grad_weights[c] = grad_weights[c] / n + lambda * weights[c];
    }
    grad_bias /= n;
}

TrainResult train_logistic(const DesignMatrix& x, const std::vector<int>& y,
                           const TrainConfig& config) {
    if (x.rows == 0 || x.rows != y.size()) {
        throw DataError("train_logistic: empty or mismatched inputs");
    }
    bool has_pos = false, has_neg = false;
    for (int label : y) {
        if (label == 1) has_pos = true;
        else if (label == 0) has_neg = true;
        else throw DataError("train_logistic: labels must be 0 or 1");
    }
    if (!has_pos || !has_neg) {
        throw DataError("train_logistic: need at least one example of each class");
    }
    for (double v : x.values) {
        if (!std::isfinite(v)) throw DataError("train_logistic: non-finite feature value");
    }

    const double lambda = config.lambda >= 0.0 ? config.lambda : 1.0 / static_cast<double>(x.rows);

    TrainResult result;
    result.lambda = lambda;
    std::vector<double>& w = result.model.weights;
    w.assign(x.cols, 0.0);
    double& b = result.model.bias;
    b = 0.0;

    std::vector<double> gw(x.cols, 0.0);
    std::vector<double> trial_w(x.cols, 0.0);
    double gb = 0.0;
    double loss = logistic_loss(x, y, w, b, lambda);
    double step = 1.0;

    for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
        logistic_gradient(x, y, w, b, lambda, gw, gb);
        double grad_inf = std::abs(gb);
        double grad_sq = gb * gb;
        for (double g : gw) {
            grad_inf = std::max(grad_inf, std::abs(g));
            grad_sq += g * g;
        }
        if (grad_inf < config.tolerance) {
            result.converged = true;
            break;
        }

        // Armijo backtracking; start from twice the previous accepted step so
        // the line search can grow again after a cautious stretch.
        double eta = std::min(step * 2.0, 1e4);
        double trial_loss = 0.0;
        for (;;) {
            for (std::size_t c = 0; c < x.cols; ++c) trial_w[c] = w[c] - eta * gw[c];
            double trial_b = b - eta * gb;
            trial_loss = logistic_loss(x, y, trial_w, trial_b, lambda);
            if (trial_loss <= loss - 1e-4 * eta * grad_sq) {
                b = trial_b;
                break;
            }
            eta *= 0.5;
            if (eta < 1e-18) {
                // No descent step found: gradient is numerically flat.
                result.converged = true;
                break;
            }
        }
        if (result.converged) break;
        w.swap(trial_w);
        loss = trial_loss;
        step = eta;
        result.iterations = iter + 1;
        if (!std::isfinite(loss)) {
            throw DataError("train_logistic: loss diverged to a non-finite value at iteration " +
                            std::to_string(iter));
        }
    }

    result.final_loss = logistic_loss(x, y, w, b, lambda);
    return result;
}

}  // namespace citytypo
