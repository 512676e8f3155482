#include "fastcox/model.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "fastcox/concordance.hpp"
#include "fastcox/errors.hpp"

namespace fastcox {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double soft_threshold(double x, double threshold) {
    if (x > threshold) return x - threshold;
    if (x < -threshold) return x + threshold;
    return 0.0;
}

double kkt_from_gradient(const Eigen::VectorXd& beta, const Eigen::VectorXd& grad, double lambda) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double v = beta(j) != 0.0 ? std::abs(grad(j) + lambda * (beta(j) > 0.0 ? 1.0 : -1.0))
                                         : std::max(0.0, std::abs(grad(j)) - lambda);
        worst = std::max(worst, v);
    }
    return worst;
}

std::size_t count_nonzero(const Eigen::VectorXd& beta) {
    return static_cast<std::size_t>((beta.array() != 0.0).count());
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.row(static_cast<Eigen::Index>(k)) = m.row(static_cast<Eigen::Index>(rows[k]));
    }
    return out;
}

void check_fit_inputs(const Eigen::MatrixXd& features, std::span<const double> durations,
                      EventView events) {
    if (static_cast<std::size_t>(features.rows()) != durations.size() ||
        durations.size() != events.size()) {
        throw InvalidInput("fit: features, durations and events disagree on n");
    }
    if (durations.size() < 2) throw InvalidInput("fit: at least two samples are required");
}

RiskOrder checked_order(const Eigen::MatrixXd& features, std::span<const double> durations,
                        EventView events) {
    check_fit_inputs(features, durations, events);
    return RiskOrder(durations, events);
}

}  // namespace

Eigen::MatrixXd Standardization::destandardize(const Eigen::MatrixXd& z) const {
    return (z.array().rowwise() * sds.transpose().array()).rowwise() + means.transpose().array();
}

Standardization standardize(const Eigen::MatrixXd& features) {
    if (features.hasNaN()) throw InvalidInput("standardize: NaN entries in the feature matrix");
    Standardization s;
    const auto n = static_cast<double>(features.rows());
    const Eigen::Index p = features.cols();
    s.means = Eigen::VectorXd::Zero(p);
    s.sds = Eigen::VectorXd::Ones(p);
    s.constant.assign(static_cast<std::size_t>(p), false);
    s.matrix = features;
    if (features.rows() == 0) return s;
    for (Eigen::Index j = 0; j < p; ++j) {
        const double mean = features.col(j).mean();
        s.matrix.col(j).array() -= mean;
        const double var = s.matrix.col(j).squaredNorm() / n;
        s.means(j) = mean;
        if (var > 0.0) {
            s.sds(j) = std::sqrt(var);
            s.matrix.col(j) /= s.sds(j);
        } else {
            s.constant[static_cast<std::size_t>(j)] = true;
            s.matrix.col(j).setZero();
        }
    }
    return s;
}

Eigen::VectorXd predict_risk(const Eigen::VectorXd& beta, const Eigen::MatrixXd& features) {
    if (beta.size() != features.cols()) {
        throw InvalidInput("predict_risk: beta has " + std::to_string(beta.size()) +
                           " entries for " + std::to_string(features.cols()) + " features");
    }
    return features * beta;
}

CoxLassoProblem::CoxLassoProblem(const Eigen::MatrixXd& features, std::span<const double> durations,
                                 EventView events, const FitOptions& opts)
    : order_(checked_order(features, durations, events)), opts_(opts) {
    if (opts_.max_iters < 1) throw InvalidInput("fit: max_iters must be at least 1");
    if (!(opts_.tol > 0.0)) throw InvalidInput("fit: tol must be positive");
    if (!(opts_.step_init > 0.0)) throw InvalidInput("fit: step_init must be positive");
    if (!(opts_.backtrack_factor > 0.0 && opts_.backtrack_factor < 1.0)) {
        throw InvalidInput("fit: backtrack_factor must lie in (0, 1)");
    }
    if (opts_.tie_method == TieMethod::NoTiesAssumed && order_.has_ties()) {
        throw InvalidInput("fit: tied durations present; choose breslow or efron");
    }
    if (order_.event_count() == 0) {
        throw DegenerateObjective("fit: no uncensored events; the partial likelihood is flat");
    }
    if (!features.allFinite()) throw InvalidInput("fit: non-finite feature value");

    if (opts_.standardize) {
        Standardization s = standardize(features);
        design_ = std::move(s.matrix);
        scale_ = std::move(s.sds);
    } else {
        design_ = features;
        scale_ = Eigen::VectorXd::Ones(features.cols());
    }

    Eigen::VectorXd grad;
    nll(Eigen::VectorXd::Zero(design_.cols()), &grad);
    lambda_max_ = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
}

double CoxLassoProblem::nll(const Eigen::VectorXd& beta_standardized, Eigen::VectorXd* grad) const {
    const Eigen::VectorXd g = design_ * beta_standardized;
    LossValue loss = fastcox::nll(order_, std::span<const double>(g.data(), static_cast<std::size_t>(g.size())),
                                  opts_.tie_method, grad != nullptr);
    if (grad) {
        const Eigen::Map<const Eigen::VectorXd> dg(loss.grad->data(), g.size());
        *grad = design_.transpose() * dg;
    }
    return loss.nll;
}

double CoxLassoProblem::kkt_violation(const Eigen::VectorXd& beta_standardized, double lambda) const {
    Eigen::VectorXd grad;
    nll(beta_standardized, &grad);
    return kkt_from_gradient(beta_standardized, grad, lambda);
}

Eigen::VectorXd CoxLassoProblem::to_original(const Eigen::VectorXd& beta_standardized) const {
    return beta_standardized.cwiseQuotient(scale_);
}

Eigen::VectorXd CoxLassoProblem::to_standardized(const Eigen::VectorXd& beta) const {
    return beta.cwiseProduct(scale_);
}

FitResult CoxLassoProblem::solve(double lambda, const Eigen::VectorXd* warm_start) const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw InvalidInput("fit: lambda must be a finite nonnegative number");
    }
    const Eigen::Index p = design_.cols();
    if (warm_start && warm_start->size() != p) throw InvalidInput("fit: warm start has wrong length");

    FitResult r;
    auto finish = [&](const Eigen::VectorXd& beta, double f, double kkt) {
        r.beta_standardized = beta;
        r.beta = to_original(beta);
        r.nll = f;
        r.objective = f + lambda * beta.lpNorm<1>();
        r.kkt_violation = kkt;
        return r;
    };

    // Zero satisfies the subgradient condition exactly; no iteration needed.
    if (lambda >= lambda_max_) {
        const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p);
        const double f = nll(zero);
        r.converged = true;
        r.objective_trace.push_back(f);
        return finish(zero, f, 0.0);
    }

    Eigen::VectorXd beta = warm_start ? *warm_start : Eigen::VectorXd::Zero(p);
    Eigen::VectorXd grad;
    double f = nll(beta, &grad);
    double obj = f + lambda * beta.lpNorm<1>();
    r.objective_trace.push_back(obj);
    double step = opts_.step_init;
    double kkt = kkt_from_gradient(beta, grad, lambda);

    Eigen::VectorXd cand(p);
    Eigen::VectorXd cand_grad;
    while (r.iterations < opts_.max_iters) {
        if (kkt <= opts_.kkt_tol) {
            r.converged = true;
            break;
        }

        bool accepted = false;
        double cand_f = 0.0;
        double cand_obj = 0.0;
        for (int bt = 0; bt < 200 && step > 1e-300; ++bt) {
            for (Eigen::Index j = 0; j < p; ++j) {
                cand(j) = soft_threshold(beta(j) - step * grad(j), step * lambda);
            }
            const Eigen::VectorXd delta = cand - beta;
            if (delta.squaredNorm() == 0.0) break;
            cand_f = nll(cand, &cand_grad);
            cand_obj = cand_f + lambda * cand.lpNorm<1>();
            const double model = f + grad.dot(delta) + delta.squaredNorm() / (2.0 * step);
            // Rounding slack on the upper model; the objective itself must not rise.
            if (cand_f <= model + 1e-13 * std::abs(f) && cand_obj <= obj) {
                accepted = true;
                break;
            }
            step *= opts_.backtrack_factor;
        }
        if (!accepted) break;

        // Barzilai-Borwein proposal for the next trial step.
        const Eigen::VectorXd s = cand - beta;
        const Eigen::VectorXd y = cand_grad - grad;
        const double sy = s.dot(y);
        step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : step / opts_.backtrack_factor;

        const double decrease = obj - cand_obj;
        beta = cand;
        grad = cand_grad;
        f = cand_f;
        obj = cand_obj;
        ++r.iterations;
        r.objective_trace.push_back(obj);
        kkt = kkt_from_gradient(beta, grad, lambda);

        if (decrease <= opts_.tol * std::max(1.0, std::abs(obj))) {
            r.converged = kkt <= opts_.kkt_tol;
            break;
        }
    }
    if (!r.converged && kkt <= opts_.kkt_tol) r.converged = true;
    return finish(beta, f, kkt);
}

FitResult fit(const Eigen::MatrixXd& features, std::span<const double> durations, EventView events,
              double lambda, const FitOptions& opts, const std::optional<Eigen::VectorXd>& warm_start) {
    const CoxLassoProblem problem(features, durations, events, opts);
    if (warm_start) {
        const Eigen::VectorXd w = problem.to_standardized(*warm_start);
        return problem.solve(lambda, &w);
    }
    return problem.solve(lambda);
}

std::vector<int> stratified_folds(EventView events, int folds, std::uint64_t seed) {
    const std::size_t n = events.size();
    if (folds < 2) throw InvalidInput("cross-validation: at least 2 folds are required");
    if (static_cast<std::size_t>(folds) * 2 > n) {
        throw InvalidInput("cross-validation: " + std::to_string(folds) + " folds for " +
                           std::to_string(n) +
                           " samples leaves validation folds without a comparable pair");
    }
    std::vector<std::size_t> deaths;
    std::vector<std::size_t> censored;
    for (std::size_t i = 0; i < n; ++i) (events[i] ? deaths : censored).push_back(i);

    std::mt19937_64 rng(seed);
    std::shuffle(deaths.begin(), deaths.end(), rng);
    std::shuffle(censored.begin(), censored.end(), rng);

    std::vector<int> fold_of(n, 0);
    std::size_t k = 0;
    for (const auto* stratum : {&deaths, &censored}) {
        for (std::size_t i : *stratum) fold_of[i] = static_cast<int>(k++ % static_cast<std::size_t>(folds));
    }
    return fold_of;
}

CrossValidationResult cross_validate(const Eigen::MatrixXd& features,
                                     std::span<const double> durations, EventView events,
                                     std::span<const double> lambdas, const FitOptions& fopts,
                                     int folds, std::uint64_t seed) {
    check_fit_inputs(features, durations, events);
    const std::size_t n = durations.size();

    auto training_deaths_ok = [&](const std::vector<int>& fold_of) {
        std::vector<std::size_t> deaths_in(static_cast<std::size_t>(folds), 0);
        std::size_t total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (events[i]) {
                ++deaths_in[static_cast<std::size_t>(fold_of[i])];
                ++total;
            }
        }
        return std::all_of(deaths_in.begin(), deaths_in.end(),
                           [&](std::size_t d) { return total - d > 0; });
    };

    CrossValidationResult cv;
    cv.lambdas.assign(lambdas.begin(), lambdas.end());
    cv.fold_of = stratified_folds(events, folds, seed);
    if (!training_deaths_ok(cv.fold_of)) {
        cv.fold_of = stratified_folds(events, folds, seed ^ 0x9E3779B97F4A7C15ULL);
        if (!training_deaths_ok(cv.fold_of)) {
            throw DegenerateObjective("cross-validation: a training fold has no uncensored event");
        }
    }

    auto run_fold = [&](int f) {
        std::vector<std::size_t> train;
        std::vector<std::size_t> valid;
        for (std::size_t i = 0; i < n; ++i) (cv.fold_of[i] == f ? valid : train).push_back(i);

        const Eigen::MatrixXd x_train = select_rows(features, train);
        const Eigen::MatrixXd x_valid = select_rows(features, valid);
        std::vector<double> t_train, t_valid;
        EventFlags e_train, e_valid;
        for (std::size_t i : train) {
            t_train.push_back(durations[i]);
            e_train.push_back(events[i]);
        }
        for (std::size_t i : valid) {
            t_valid.push_back(durations[i]);
            e_valid.push_back(events[i]);
        }

        const CoxLassoProblem problem(x_train, t_train, e_train, fopts);
        std::vector<double> scores(lambdas.size(), kNaN);
        Eigen::VectorXd warm = Eigen::VectorXd::Zero(features.cols());
        for (std::size_t k = 0; k < lambdas.size(); ++k) {
            const FitResult r = problem.solve(lambdas[k], &warm);
            warm = r.beta_standardized;
            const Eigen::VectorXd g = predict_risk(r.beta, x_valid);
            try {
                scores[k] = c_index_fast(t_valid, e_valid,
                                         std::span<const double>(g.data(), static_cast<std::size_t>(g.size())));
            } catch (const Undefined&) {
                scores[k] = kNaN;
            }
        }
        return scores;
    };

    // Folds only read shared inputs; results are gathered in fold order.
    std::vector<std::future<std::vector<double>>> pending;
    for (int f = 0; f < folds; ++f) pending.push_back(std::async(std::launch::async, run_fold, f));
    for (auto& fut : pending) cv.fold_cindex.push_back(fut.get());

    cv.mean_cindex.assign(lambdas.size(), kNaN);
    cv.sd_cindex.assign(lambdas.size(), kNaN);
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        double sum = 0.0;
        std::size_t m = 0;
        for (const auto& fold : cv.fold_cindex) {
            if (std::isfinite(fold[k])) {
                sum += fold[k];
                ++m;
            }
        }
        if (m == 0) continue;
        const double mean = sum / static_cast<double>(m);
        double ss = 0.0;
        for (const auto& fold : cv.fold_cindex) {
            if (std::isfinite(fold[k])) ss += (fold[k] - mean) * (fold[k] - mean);
        }
        cv.mean_cindex[k] = mean;
        cv.sd_cindex[k] = m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) : 0.0;
    }
    return cv;
}

PathResult lasso_path(const Eigen::MatrixXd& features, std::span<const double> durations,
                      EventView events, const PathOptions& popts, const FitOptions& fopts) {
    if (!(popts.path_multiplier > 1.0) || !std::isfinite(popts.path_multiplier)) {
        throw InvalidInput("path: multiplier must exceed 1");
    }
    if (popts.max_steps < 1) throw InvalidInput("path: max_steps must be at least 1");

    const CoxLassoProblem problem(features, durations, events, fopts);
    PathResult path;
    path.lambda_max = problem.lambda_max();
    if (popts.lambda_start) {
        path.lambda_start = *popts.lambda_start;
        if (!(path.lambda_start > 0.0) || !std::isfinite(path.lambda_start)) {
            throw InvalidInput("path: lambda_start must be positive");
        }
    } else {
        // With a flat gradient at zero every positive lambda is already sparse.
        path.lambda_start = path.lambda_max > 0.0 ? path.lambda_max / 10.0 : 1.0;
    }

    Eigen::VectorXd warm = Eigen::VectorXd::Zero(features.cols());
    for (std::size_t k = 0; k < popts.max_steps; ++k) {
        PathStep step;
        step.lambda = path.lambda_start * std::pow(popts.path_multiplier, static_cast<double>(k));
        const FitResult r = problem.solve(step.lambda, &warm);
        warm = r.beta_standardized;
        step.beta = r.beta;
        step.beta_standardized = r.beta_standardized;
        step.n_selected = count_nonzero(r.beta_standardized);
        step.nll = r.nll;
        step.iterations = r.iterations;
        step.converged = r.converged;
        step.cv_cindex = kNaN;
        step.cv_cindex_sd = kNaN;
        path.steps.push_back(std::move(step));
        if (path.steps.back().n_selected == 0) {
            path.completed = true;
            break;
        }
    }

    if (popts.cv_folds > 1) {
        std::vector<double> lambdas;
        for (const auto& s : path.steps) lambdas.push_back(s.lambda);
        const CrossValidationResult cv =
            cross_validate(features, durations, events, lambdas, fopts, popts.cv_folds, popts.seed);
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < path.steps.size(); ++k) {
            path.steps[k].cv_cindex = cv.mean_cindex[k];
            path.steps[k].cv_cindex_sd = cv.sd_cindex[k];
            if (std::isfinite(cv.mean_cindex[k]) && cv.mean_cindex[k] >= best) {
                best = cv.mean_cindex[k];
                path.best_index = k;
            }
        }
    }
    path.best_lambda = path.steps[path.best_index].lambda;
    path.best_beta = path.steps[path.best_index].beta;
    return path;
}

PathResult lasso_path(const SurvivalDataset& ds, const PathOptions& popts, const FitOptions& fopts) {
    return lasso_path(ds.features, ds.durations, ds.events, popts, fopts);
}

}  // namespace fastcox
