#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "nodseg/tensor.hpp"

namespace nodseg {

struct GradCheckResult {
    double max_rel_err = 0.0;
    size_t checked = 0;
    size_t worst_index = 0;
    std::vector<size_t> skipped; // coordinates flagged as non-differentiable

    bool passed(double tol) const { return checked > 0 && max_rel_err < tol; }
};

// Central-difference check of an analytic gradient, 64-bit only.
// Coordinates where the one-sided slopes disagree (a relu kink within eps of
// the evaluation point, a maxpool tie flip) are skipped and reported instead
// of failing the check.
inline GradCheckResult grad_check(const std::function<double(const TensorD&)>& loss_fn,
                                  const TensorD& input, const TensorD& analytic_grad,
                                  double eps = 1e-5, double kink_tol = 1e-2) {
    if (!input.same_shape(analytic_grad))
        throw std::invalid_argument("grad_check: gradient shape mismatch");
    GradCheckResult res;
    TensorD x = input;
    const double f0 = loss_fn(x);
    for (size_t i = 0; i < x.data.size(); ++i) {
        const double orig = x.data[i];
        x.data[i] = orig + eps;
        const double fp = loss_fn(x);
        x.data[i] = orig - eps;
        const double fm = loss_fn(x);
        x.data[i] = orig;

        const double dplus = (fp - f0) / eps;
        const double dminus = (f0 - fm) / eps;
        if (std::abs(dplus - dminus) > kink_tol * std::max({1.0, std::abs(dplus), std::abs(dminus)})) {
            res.skipped.push_back(i);
            continue;
        }
        const double numeric = (fp - fm) / (2.0 * eps);
        const double a = analytic_grad.data[i];
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-12});
        if (rel > res.max_rel_err) {
            res.max_rel_err = rel;
            res.worst_index = i;
        }
        ++res.checked;
    }
    return res;
}

struct GradSuiteEntry {
    std::string name;
    double max_rel_err = 0.0;
    double tol = 0.0;
    size_t skipped = 0;
    bool ok = false;
};

// Runs the full 64-bit finite-difference suite over every layer the network
// uses plus the dice loss and the end-to-end tiny model. Used by both the
// test suites and the `gradcheck` CLI subcommand.
std::vector<GradSuiteEntry> run_gradient_suite(uint64_t seed);

} // namespace nodseg
