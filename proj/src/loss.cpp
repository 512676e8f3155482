#include "fastcox/loss.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include "fastcox/errors.hpp"
#include "fastcox/log_space.hpp"

namespace fastcox {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One sweep over the death groups. For each group we need its contribution to
// the loss and, for the gradient, two log-space coefficients:
//   risk_coef  = log sum_k 1 / denom_k         (applies to every member of R_G)
//   death_coef = log sum_k (k/d) / denom_k     (applies to members of D_G only)
// With d == 1 both methods take the same branch, so tie-free inputs give
// bitwise-identical results.
LossValue evaluate(const RiskOrder& order, std::span<const double> g, bool efron, bool want_grad) {
    const std::size_t n = order.size();
    if (g.size() != n) {
        throw InvalidInput("nll: expected " + std::to_string(n) + " scores, got " +
                           std::to_string(g.size()));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(g[i])) {
            throw InvalidInput("nll: non-finite score at index " + std::to_string(i));
        }
    }

    LossValue out;
    const auto& groups = order.groups();
    const auto& events = order.sorted_events();
    const std::vector<double> s = order.to_sorted(g);
    const std::vector<double> log_risk = log_cum_sum_exp(s);

    std::vector<double> risk_coef;
    std::vector<double> death_coef;
    if (want_grad) {
        risk_coef.assign(groups.size(), kNegInf);
        death_coef.assign(groups.size(), kNegInf);
    }

    double nll = 0.0;
    for (std::size_t gi : order.death_groups()) {
        const TieGroup& grp = groups[gi];
        const double log_r = log_risk[grp.last()];
        const auto d = static_cast<double>(grp.deaths);

        if (efron && grp.deaths >= 2) {
            LogSumExpAccumulator death_sum;
            for (std::size_t p = grp.begin; p < grp.end; ++p) {
                if (events[p]) death_sum.add(s[p]);
            }
            const double log_d = death_sum.value();

            LogSumExpAccumulator inv;
            LogSumExpAccumulator inv_weighted;
            for (std::size_t k = 0; k < grp.deaths; ++k) {
                const double w = static_cast<double>(k) / d;
                const double log_denom = log_diff_exp(log_r, w, log_d);
                nll += log_denom;
                if (want_grad) {
                    inv.add(-log_denom);
                    if (k > 0) inv_weighted.add(std::log(w) - log_denom);
                }
            }
            if (want_grad) {
                risk_coef[gi] = inv.value();
                death_coef[gi] = inv_weighted.value();
            }
        } else {
            nll += d * log_r;
            if (want_grad) risk_coef[gi] = std::log(d) - log_r;
        }

        for (std::size_t p = grp.begin; p < grp.end; ++p) {
            if (events[p]) nll -= s[p];
        }
    }
    out.nll = nll;

    if (want_grad) {
        // Sample at position p belongs to the risk set of every group at or
        // after its own, so it collects a reverse cumulative sum of risk_coef.
        std::vector<double> tail(groups.size());
        LogSumExpAccumulator acc;
        for (std::size_t gi = groups.size(); gi-- > 0;) {
            acc.add(risk_coef[gi]);
            tail[gi] = acc.value();
        }
        std::vector<double> grad_sorted(n);
        for (std::size_t p = 0; p < n; ++p) {
            const std::size_t gi = order.group_of(p);
            double v = std::exp(s[p] + tail[gi]);
            if (events[p]) {
                if (death_coef[gi] != kNegInf) v -= std::exp(s[p] + death_coef[gi]);
                v -= 1.0;
            }
            grad_sorted[p] = v;
        }
        out.grad = order.to_original(grad_sorted);
    }
    return out;
}

}  // namespace

TieMethod parse_tie_method(std::string_view name) {
    std::string lower(name);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "breslow") return TieMethod::Breslow;
    if (lower == "efron") return TieMethod::Efron;
    if (lower == "none" || lower == "noties" || lower == "no-ties") return TieMethod::NoTiesAssumed;
    throw InvalidInput("unknown tie method '" + std::string(name) + "'");
}

std::string to_string(TieMethod method) {
    switch (method) {
        case TieMethod::NoTiesAssumed: return "none";
        case TieMethod::Breslow: return "breslow";
        case TieMethod::Efron: return "efron";
    }
    return "unknown";
}

LossValue nll_breslow(const RiskOrder& order, std::span<const double> g, bool want_grad) {
    return evaluate(order, g, false, want_grad);
}

LossValue nll_efron(const RiskOrder& order, std::span<const double> g, bool want_grad) {
    return evaluate(order, g, true, want_grad);
}

LossValue nll(const RiskOrder& order, std::span<const double> g, TieMethod method, bool want_grad) {
    switch (method) {
        case TieMethod::NoTiesAssumed:
            if (order.has_ties()) {
                throw InvalidInput("nll: tied durations present; choose breslow or efron");
            }
            return nll_breslow(order, g, want_grad);
        case TieMethod::Breslow: return nll_breslow(order, g, want_grad);
        case TieMethod::Efron: return nll_efron(order, g, want_grad);
    }
    throw InvalidInput("nll: unknown tie method");
}

}  // namespace fastcox
