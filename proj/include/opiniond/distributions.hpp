#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "opiniond/rng.hpp"

namespace opiniond {

enum class DistributionKind { Uniform, PowerLaw };

/// Specification of an opinion distribution: either Uniform on [0,1] or a
/// truncated power law with density ∝ x^(-gamma) on [x_min, 1]. The power
/// law needs a lower truncation point because x^(-gamma) diverges at 0;
/// x_min defaults to 0.01 and is exposed in configs.
struct DistributionSpec {
    DistributionKind kind = DistributionKind::Uniform;
    double gamma = 3.0;   // PowerLaw only
    double x_min = 0.01;  // PowerLaw only

    static DistributionSpec uniform() { return {DistributionKind::Uniform, 0.0, 0.0}; }

    static DistributionSpec power_law(double gamma, double x_min = 0.01) {
        return {DistributionKind::PowerLaw, gamma, x_min};
    }

    void validate() const {
        if (kind == DistributionKind::PowerLaw) {
            if (!(gamma > 1.0)) {
                throw std::invalid_argument("DistributionSpec: gamma must be > 1");
            }
            if (!(x_min > 0.0 && x_min < 1.0)) {
                throw std::invalid_argument("DistributionSpec: x_min must be in (0,1)");
            }
        }
    }

    bool operator==(const DistributionSpec& other) const {
        if (kind != other.kind) {
            return false;
        }
        if (kind == DistributionKind::Uniform) {
            return true;
        }
        return gamma == other.gamma && x_min == other.x_min;
    }
};

/// Inverse CDF of the truncated power law: for u in [0,1],
///   x = (x_min^(1-gamma) - u * (x_min^(1-gamma) - 1))^(1/(1-gamma)).
/// u=0 maps to x_min, u=1 maps to 1.
inline double power_law_inverse_cdf(double u, double gamma, double x_min) {
    double a = std::pow(x_min, 1.0 - gamma);
    return std::pow(a - u * (a - 1.0), 1.0 / (1.0 - gamma));
}

/// One opinion drawn from the spec. Uniform covers [0,1); the power law
/// covers [x_min, 1] through the inverse CDF.
inline double sample(const DistributionSpec& spec, Pcg32& rng) {
    spec.validate();
    double u = rng.uniform01();
    if (spec.kind == DistributionKind::Uniform) {
        return u;
    }
    return power_law_inverse_cdf(u, spec.gamma, spec.x_min);
}

/// n independent samples in draw order; the whole vector is a pure function
/// of the RNG state.
inline std::vector<double> sample_vector(const DistributionSpec& spec,
                                         std::size_t n, Pcg32& rng) {
    if (n < 1) {
        throw std::invalid_argument("sample_vector: n must be >= 1");
    }
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(sample(spec, rng));
    }
    return out;
}

/// Analytic CDF, used by goodness-of-fit checks and the analyze tooling.
inline double cdf(const DistributionSpec& spec, double x) {
    spec.validate();
    if (spec.kind == DistributionKind::Uniform) {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        return x;
    }
    if (x <= spec.x_min) return 0.0;
    if (x >= 1.0) return 1.0;
    double a = std::pow(spec.x_min, 1.0 - spec.gamma);
    return (a - std::pow(x, 1.0 - spec.gamma)) / (a - 1.0);
}

inline std::string to_string(DistributionKind kind) {
    return kind == DistributionKind::Uniform ? "uniform" : "powerlaw";
}

}  // namespace opiniond
