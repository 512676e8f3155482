#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fastcox/risk_order.hpp"

namespace fastcox {

enum class TieMethod {
    NoTiesAssumed,  // only legal when every tie group is a singleton
    Breslow,
    Efron,
};

TieMethod parse_tie_method(std::string_view name);
std::string to_string(TieMethod method);

struct LossValue {
    double nll = 0.0;
    // d nll / d g, in original sample order.
    std::optional<std::vector<double>> grad;
};

// Negative log partial likelihood of risk scores g (original sample order).
// Tied deaths share the full risk-set denominator. O(n) given the order.
LossValue nll_breslow(const RiskOrder& order, std::span<const double> g, bool want_grad = false);

// Efron's tie correction: the k-th of d tied deaths sees the risk-set sum
// discounted by k/d of the tied deaths' total. O(n) given the order.
LossValue nll_efron(const RiskOrder& order, std::span<const double> g, bool want_grad = false);

// Dispatch. NoTiesAssumed takes the Breslow path and throws InvalidInput if
// the order contains a tie group of size > 1.
LossValue nll(const RiskOrder& order, std::span<const double> g, TieMethod method,
              bool want_grad = false);

}  // namespace fastcox
