#pragma once

#include "gpdmm/types.hpp"

#include <functional>
#include <vector>

namespace gpdmm {

using Objective = std::function<double(const Vector&)>;
using ObjectiveGradient = std::function<Vector(const Vector&)>;

struct AscentOptions {
    int max_iters = 200;
    double rel_tol = 1e-7;   // relative improvement stop
    double armijo_c = 1e-4;
    double init_step = 1.0;
    double min_step = 1e-16;
    bool record_trace = false;
};

struct AscentResult {
    Vector x;
    double value = 0.0;
    int iters = 0;
    bool converged = false;
    std::vector<double> trace; // accepted objective values (when recorded)
};

/// Deterministic gradient ascent with a Barzilai-Borwein trial step and
/// Armijo backtracking. Non-finite trial values are treated as rejected
/// steps. Throws NumericError if the objective is non-finite at x0.
AscentResult maximize(const Objective& f, const ObjectiveGradient& grad, Vector x0,
                      const AscentOptions& options = {});

/// Central-difference gradient, relative step h_rel per coordinate.
Vector finite_difference_gradient(const Objective& f, const Vector& x, double h_rel = 1e-6);

} // namespace gpdmm
