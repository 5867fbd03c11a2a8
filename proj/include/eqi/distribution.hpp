#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqi {

/// Labeled discrete probability distribution over detector outcomes.
///
/// Outcomes carry string labels so that distributions produced at nearby
/// parameter values can be matched outcome-by-outcome when differencing.
struct CountDistribution {
    std::vector<std::pair<std::string, double>> outcomes;

    double total() const {
        double s = 0.0;
        for (const auto& [label, p] : outcomes) s += p;
        return s;
    }

    double probability(const std::string& label) const {
        for (const auto& [l, p] : outcomes)
            if (l == label) return p;
        throw std::invalid_argument("CountDistribution: unknown outcome label '" + label + "'");
    }

    /// Throws if any probability is negative or the total deviates from 1.
    void validate(double tol = 1e-10) const {
        for (const auto& [label, p] : outcomes) {
            if (p < -tol)
                throw std::runtime_error("CountDistribution: negative probability for '" + label + "'");
        }
        const double s = total();
        if (std::abs(s - 1.0) > tol)
            throw std::runtime_error("CountDistribution: probabilities sum to " + std::to_string(s));
    }
};

}  // namespace eqi
