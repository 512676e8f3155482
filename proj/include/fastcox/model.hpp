#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fastcox/dataset.hpp"
#include "fastcox/loss.hpp"
#include "fastcox/risk_order.hpp"

namespace fastcox {

struct Standardization {
    Eigen::MatrixXd matrix;  // centered, unit population sd
    Eigen::VectorXd means;
    Eigen::VectorXd sds;        // 1 for constant columns
    std::vector<bool> constant;  // zero-variance columns, left centered

    Eigen::MatrixXd destandardize(const Eigen::MatrixXd& z) const;
};

// Throws InvalidInput on NaN entries.
Standardization standardize(const Eigen::MatrixXd& features);

// g = X beta. No intercept: the partial likelihood ignores constant shifts.
Eigen::VectorXd predict_risk(const Eigen::VectorXd& beta, const Eigen::MatrixXd& features);

struct FitOptions {
    TieMethod tie_method = TieMethod::Efron;
    int max_iters = 20000;
    // Stop when an accepted step lowers the objective by less than this
    // fraction; reported as non-converged unless the KKT test also passes.
    double tol = 1e-15;
    double step_init = 1.0;
    double backtrack_factor = 0.5;
    bool standardize = true;
    // Stop once the KKT violation (standardized scale) is at most this.
    double kkt_tol = 1e-4;
};

struct FitResult {
    Eigen::VectorXd beta;               // original feature scale
    Eigen::VectorXd beta_standardized;  // scale the penalty acts on
    double nll = 0.0;
    double objective = 0.0;  // nll + lambda * |beta_standardized|_1
    double kkt_violation = 0.0;
    int iterations = 0;
    bool converged = false;
    // Objective after every accepted iteration, starting with the initial point.
    std::vector<double> objective_trace;
};

// min_beta nll(Z beta) + lambda * |beta|_1 over one (optionally standardized)
// design, reusable across many lambdas. Immutable after construction.
class CoxLassoProblem {
public:
    CoxLassoProblem(const Eigen::MatrixXd& features, std::span<const double> durations,
                    EventView events, const FitOptions& opts);

    std::size_t num_features() const noexcept { return static_cast<std::size_t>(design_.cols()); }
    const RiskOrder& order() const noexcept { return order_; }
    const FitOptions& options() const noexcept { return opts_; }

    // Smallest lambda whose solution is exactly zero: max_j |grad_j nll(0)|.
    double lambda_max() const noexcept { return lambda_max_; }

    // warm_start is on the standardized scale.
    FitResult solve(double lambda, const Eigen::VectorXd* warm_start = nullptr) const;

    // Largest subgradient-condition violation at beta (standardized scale).
    double kkt_violation(const Eigen::VectorXd& beta_standardized, double lambda) const;

    // nll and gradient w.r.t. standardized coefficients.
    double nll(const Eigen::VectorXd& beta_standardized, Eigen::VectorXd* grad = nullptr) const;

    Eigen::VectorXd to_original(const Eigen::VectorXd& beta_standardized) const;
    Eigen::VectorXd to_standardized(const Eigen::VectorXd& beta) const;

private:
    Eigen::MatrixXd design_;
    Eigen::VectorXd scale_;  // beta_original = beta_standardized ./ scale_
    RiskOrder order_;
    FitOptions opts_;
    double lambda_max_ = 0.0;
};

// Throws DegenerateObjective without an observed event; a non-converged fit
// returns its best iterate with converged = false.
FitResult fit(const Eigen::MatrixXd& features, std::span<const double> durations, EventView events,
              double lambda, const FitOptions& opts,
              const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

struct PathOptions {
    std::optional<double> lambda_start;  // nullopt: lambda_max / 10
    double path_multiplier = 1.02;
    int cv_folds = 5;  // <= 1 disables cross-validation
    std::uint64_t seed = 0;
    std::size_t max_steps = 1000;
};

struct PathStep {
    double lambda = 0.0;
    Eigen::VectorXd beta;  // original scale
    Eigen::VectorXd beta_standardized;
    std::size_t n_selected = 0;
    double cv_cindex = 0.0;  // NaN without cross-validation
    double cv_cindex_sd = 0.0;
    double nll = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct PathResult {
    std::vector<PathStep> steps;
    double lambda_max = 0.0;
    double lambda_start = 0.0;
    // Step maximizing mean CV C-index (largest lambda on ties); step 0 when
    // cross-validation is disabled.
    std::size_t best_index = 0;
    double best_lambda = 0.0;
    Eigen::VectorXd best_beta;
    bool completed = false;  // reached an all-zero step within max_steps
};

PathResult lasso_path(const Eigen::MatrixXd& features, std::span<const double> durations,
                      EventView events, const PathOptions& popts, const FitOptions& fopts);
PathResult lasso_path(const SurvivalDataset& ds, const PathOptions& popts, const FitOptions& fopts);

struct CrossValidationResult {
    std::vector<double> lambdas;
    std::vector<double> mean_cindex;  // NaN where every fold was undefined
    std::vector<double> sd_cindex;
    std::vector<std::vector<double>> fold_cindex;  // [fold][lambda]
    std::vector<int> fold_of;                      // fold assigned to each sample
};

// Stratified fold assignment on the event indicator; deterministic in seed.
// Rejects folds < 2 and folds > n / 2 (validation folds need a pair).
std::vector<int> stratified_folds(EventView events, int folds, std::uint64_t seed);

// Per fold: fit the lambda sequence with warm starts on the training part,
// score the held-out part with the C-index.
CrossValidationResult cross_validate(const Eigen::MatrixXd& features,
                                     std::span<const double> durations, EventView events,
                                     std::span<const double> lambdas, const FitOptions& fopts,
                                     int folds, std::uint64_t seed);

}  // namespace fastcox
