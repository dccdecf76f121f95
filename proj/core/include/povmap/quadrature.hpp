#pragma once

#include <cstddef>
#include <vector>

namespace povmap {

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Nodes are the roots of P_n found by Newton iteration on the three-term
// recurrence. Rules are computed once per n and cached; safe to call from
// several threads.
const GaussLegendreRule& gauss_legendre(std::size_t n);

template <class F>
double integrate(F&& f, double lo, double hi, const GaussLegendreRule& rule) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return half * sum;
}

}  // namespace povmap
