#pragma once

// Finite-difference validation of every differentiable op. Everything runs in
// double: with central differences at eps = 1e-5 the truncation and roundoff
// floors sit far below the 1e-5 acceptance threshold, so a failure means a
// wrong adjoint, not noise.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pppad/tensor.hpp"

namespace pppad {

inline constexpr double kGradEps = 1e-5;
inline constexpr double kGradTol = 1e-5;

// One scalar under test: where it lives and what the tape says dJ/dtheta is.
struct CheckSlot {
    double* value = nullptr;
    double analytic = 0;
};

// Central-difference sweep over the slots. `objective` must re-evaluate J
// from the current contents of the slot storage.
inline double fd_max_rel_err(const std::function<double()>& objective,
                             std::span<const CheckSlot> slots, double eps) {
    double worst = 0;
    for (const CheckSlot& s : slots) {
        const double saved = *s.value;
        *s.value = saved + eps;
        const double jp = objective();
        *s.value = saved - eps;
        const double jm = objective();
        *s.value = saved;
        const double fd = (jp - jm) / (2 * eps);
        const double rel = std::abs(s.analytic - fd) /
                           std::max(1.0, std::abs(s.analytic));
        if (rel > worst) worst = rel;
    }
    return worst;
}

struct GradCheckResult {
    std::string op;
    int instances = 0;
    double max_rel_err = 0;
    bool pass = false;
};

// 20 random instances per op by default; distinct seeds give distinct
// instance streams.
std::vector<GradCheckResult> run_gradcheck_suite(uint64_t seed,
                                                 int instances = 20,
                                                 double eps = kGradEps,
                                                 double tol = kGradTol);

}  // namespace pppad
