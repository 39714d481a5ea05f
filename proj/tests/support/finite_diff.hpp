#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cinc/networks.hpp"

namespace cinc::testing {

/// Central difference of `eval` with respect to one scalar location.
/// `eval` must recompute the loss from scratch (fresh tape) on every call.
inline double central_diff(const std::function<double()>& eval, double& location,
                           double step = 1e-6) {
    const double original = location;
    location = original + step;
    const double fp = eval();
    location = original - step;
    const double fm = eval();
    location = original;
    return (fp - fm) / (2.0 * step);
}

/// Relative error with an absolute floor for near-zero gradients.
inline double grad_rel_err(double analytic, double numeric) {
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    if (scale < 1e-6) return std::abs(analytic - numeric) < 1e-9 ? 0.0 : 1.0;
    return std::abs(analytic - numeric) / scale;
}

struct GradCheck {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
    std::string worst; // "role layer (r,c)" of the worst entry
};

/// Sweeps every parameter of every net in `bundle`, comparing the analytic
/// gradient to a central finite difference of `eval`.
///
/// `analytic(role, layer) -> (dW, db)` supplies the gradients recorded by one
/// backward pass that ran before the sweep; `eval()` recomputes the scalar
/// loss from the (mutated) bundle.
inline GradCheck sweep_bundle_gradients(
    ModelBundle& bundle,
    const std::function<std::pair<ad::Matrix, ad::Matrix>(const std::string&, std::size_t)>&
        analytic,
    const std::function<double()>& eval, double step = 1e-6) {
    GradCheck result;
    for (auto& [role, net] : bundle.nets) {
        for (std::size_t li = 0; li < net.layers.size(); ++li) {
            const auto [dw, db] = analytic(role, li);
            Layer& layer = net.layers[li];
            auto sweep = [&](ad::Matrix& params, const ad::Matrix& grads, const char* tag) {
                for (Eigen::Index r = 0; r < params.rows(); ++r) {
                    for (Eigen::Index c = 0; c < params.cols(); ++c) {
                        const double numeric = central_diff(eval, params(r, c), step);
                        const double err = grad_rel_err(grads(r, c), numeric);
                        ++result.checked;
                        if (err > result.max_rel_err) {
                            result.max_rel_err = err;
                            result.worst = role + " layer " + std::to_string(li) + " " + tag +
                                           "(" + std::to_string(r) + "," + std::to_string(c) + ")";
                        }
                    }
                }
            };
            sweep(layer.weights, dw, "W");
            sweep(layer.bias, db, "b");
        }
    }
    return result;
}

} // namespace cinc::testing
