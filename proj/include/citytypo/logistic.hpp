#pragma once

#include <cstdint>
#include <vector>

namespace citytypo {

// Row-major dense design matrix.
struct DesignMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // rows * cols

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

struct TrainConfig {
    double lambda = -1.0;    // L2 strength; < 0 means the 1/n default
    double tolerance = 1e-6;  // gradient infinity-norm stopping criterion
    std::size_t max_iterations = 10000;
};

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
};

struct TrainResult {
    LogisticModel model;
    double final_loss = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    double lambda = 0.0;  // the value actually used
};

double sigmoid(double z);

// p̂ = sigmoid(w·x + b), clamped into (0, 1) so downstream logs stay finite.
double predict_proba(const LogisticModel& model, const std::vector<double>& x);
std::vector<double> predict_proba(const LogisticModel& model, const DesignMatrix& x);

// Regularized mean binary cross-entropy:
//   J(w, b) = (1/n) Σ softplus((1 - 2 y_i) z_i) + (λ/2) ||w||²   with z = w·x + b.
// The bias is not penalized.
double logistic_loss(const DesignMatrix& x, const std::vector<int>& y,
                     const std::vector<double>& weights, double bias, double lambda);

// Analytic gradient of logistic_loss; grad_weights gets (1/n) Xᵀ(p - y) + λ w,
// grad_bias gets mean(p - y).
void logistic_gradient(const DesignMatrix& x, const std::vector<int>& y,
                       const std::vector<double>& weights, double bias, double lambda,
                       std::vector<double>& grad_weights, double& grad_bias);

// Full-batch gradient descent with Armijo backtracking from zero initialization.
// Deterministic. Stops when the gradient infinity-norm drops below
// config.tolerance or after config.max_iterations steps. Throws DataError on
// single-class targets and on non-finite losses.
TrainResult train_logistic(const DesignMatrix& x, const std::vector<int>& y,
                           const TrainConfig& config = {});

}  // namespace citytypo
