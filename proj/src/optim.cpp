#include "gpdmm/optim.hpp"

#include <cmath>

namespace gpdmm {

AscentResult maximize(const Objective& f, const ObjectiveGradient& grad, Vector x0,
                      const AscentOptions& options) {
    AscentResult result;
    result.x = std::move(x0);
    result.value = f(result.x);
    if (!std::isfinite(result.value))
        throw NumericError("objective is non-finite at the starting point");
    if (options.record_trace)
        result.trace.push_back(result.value);

    Vector g = grad(result.x);
    double step = options.init_step;
    Vector prev_x, prev_g;
    bool have_prev = false;

    for (int iter = 0; iter < options.max_iters; ++iter) {
        const double gnorm2 = g.squaredNorm();
        if (!(gnorm2 > 0.0) || !std::isfinite(gnorm2)) {
            result.converged = std::isfinite(gnorm2);
            break;
        }

        // Barzilai-Borwein trial step from the last accepted pair.
        if (have_prev) {
            const Vector s = result.x - prev_x;
            const double denom = s.dot(prev_g - g);
            if (denom > 0.0) {
                const double bb = s.squaredNorm() / denom;
                if (std::isfinite(bb) && bb > 0.0)
                    step = bb;
            } else {
                step *= 2.0;
            }
        }
        step = std::clamp(step, options.min_step, 1e6);

        double alpha = step;
        double trial_value = -std::numeric_limits<double>::infinity();
        Vector trial;
        bool accepted = false;
        while (alpha >= options.min_step) {
            trial = result.x + alpha * g;
            trial_value = f(trial);
            if (std::isfinite(trial_value) &&
                trial_value >= result.value + options.armijo_c * alpha * gnorm2) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            // No ascent direction step survives; treat as converged.
            result.converged = true;
            break;
        }

        prev_x = result.x;
        prev_g = g;
        have_prev = true;

        const double improvement = trial_value - result.value;
        result.x = std::move(trial);
        result.value = trial_value;
        result.iters = iter + 1;
        step = alpha;
        if (options.record_trace)
            result.trace.push_back(result.value);

        if (improvement <= options.rel_tol * (std::abs(result.value) + 1e-12)) {
            result.converged = true;
            break;
        }
        g = grad(result.x);
    }
    return result;
}

Vector finite_difference_gradient(const Objective& f, const Vector& x, double h_rel) {
    Vector g(x.size());
    Vector xp = x;
    for (Index i = 0; i < x.size(); ++i) {
        const double h = h_rel * std::max(1.0, std::abs(x[i]));
        const double orig = x[i];
        xp[i] = orig + h;
        const double fp = f(xp);
        xp[i] = orig - h;
        const double fm = f(xp);
        xp[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

} // namespace gpdmm
