#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace risnoma {

struct StepSizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Linear value-function approximation V(s) = <omega, phi(s)>.
struct LinearVfa {
    std::vector<double> omega;

    double value(const std::vector<double>& phi) const {
        double v = 0.0;
        for (std::size_t i = 0; i < omega.size(); ++i) v += omega[i] * phi[i];
        return v;
    }
};

// mean squared error over the sample set
inline double vfa_mse(const std::vector<std::vector<double>>& features,
                      const std::vector<double>& values, const std::vector<double>& omega) {
    double total = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        double v = 0.0;
        for (std::size_t d = 0; d < omega.size(); ++d) v += omega[d] * features[i][d];
        const double e = values[i] - v;
        total += e * e;
    }
    return total / static_cast<double>(features.size());
}

// Gradient iteration omega_{k+1} = omega_k - (alpha/2) * grad MSE(omega_k),
// returning the full iterate trajectory (omega_0 first). Throws StepSizeError
// if the iterates blow up, which signals an inadmissible step size.
inline std::vector<std::vector<double>> sgd_vfa(
    const std::vector<std::vector<double>>& features, const std::vector<double>& values,
    double alpha, std::size_t iters, std::vector<double> omega0 = {},
    double diverge_bound = 1e12) {
    if (features.empty()) throw std::invalid_argument("sgd_vfa: no samples");
    const std::size_t n = features.size();
    const std::size_t d = features.front().size();
    if (omega0.empty()) omega0.assign(d, 0.0);
    if (omega0.size() != d) throw std::invalid_argument("sgd_vfa: omega0 dimension mismatch");

    std::vector<std::vector<double>> trajectory;
    trajectory.reserve(iters + 1);
    trajectory.push_back(omega0);
    std::vector<double> omega = std::move(omega0);
    std::vector<double> residual(n);

    for (std::size_t k = 0; k < iters; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            double v = 0.0;
            for (std::size_t j = 0; j < d; ++j) v += omega[j] * features[i][j];
            residual[i] = values[i] - v;
        }
        // -(alpha/2) * grad = (alpha/n) * Phi^T residual
        const double scale = alpha / static_cast<double>(n);
        for (std::size_t j = 0; j < d; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += features[i][j] * residual[i];
            omega[j] += scale * acc;
            if (!(std::abs(omega[j]) < diverge_bound))
                throw StepSizeError("sgd_vfa: iterates diverged; reduce alpha");
        }
        trajectory.push_back(omega);
    }
    return trajectory;
}

}  // namespace risnoma
