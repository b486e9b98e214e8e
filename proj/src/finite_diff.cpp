#include "scrawl/finite_diff.hpp"

#include <cmath>

namespace scrawl::num {

double relative_error(double a, double g) {
    return std::fabs(a - g) / std::max({std::fabs(a), std::fabs(g), 1e-8});
}

std::vector<Matrix> finite_difference(const std::function<double()>& f,
                                      const ParamSet& params, double h) {
    if (!(h > 0.0)) throw NumericalError("finite_difference: step must be positive");
    std::vector<Matrix> grads = zeros_like(params);
    for (std::size_t p = 0; p < params.size(); ++p) {
        Matrix& theta = *params[p].value;
        for (int i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + h;
            const double up = f();
            theta[i] = saved - h;
            const double down = f();
            theta[i] = saved;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw NumericalError("finite_difference: non-finite objective at " + params[p].name);
            grads[p][i] = (up - down) / (2.0 * h);
        }
    }
    return grads;
}

double max_relative_error(const std::vector<Matrix>& analytic,
                          const std::vector<Matrix>& numeric) {
    if (analytic.size() != numeric.size())
        throw ShapeError("max_relative_error: parameter count mismatch");
    double worst = 0.0;
    for (std::size_t p = 0; p < analytic.size(); ++p) {
        if (!analytic[p].same_shape(numeric[p]))
            throw ShapeError("max_relative_error: shape mismatch at index " + std::to_string(p));
        for (int i = 0; i < analytic[p].size(); ++i)
            worst = std::max(worst, relative_error(analytic[p][i], numeric[p][i]));
    }
    return worst;
}

} // namespace scrawl::num
