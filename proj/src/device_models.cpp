#include "memsim/device_models.hpp"

#include <cmath>

namespace memsim {

const char* validate(const MemristorParams& params) {
    if (!(params.r_on > 0.0)) return "RON must be positive";
    if (!(params.r_on <= params.r_off)) return "RON must not exceed ROFF";
    if (!std::isfinite(params.r_off)) return "ROFF must be finite";
    if (!(params.d > 0.0) || !std::isfinite(params.d)) return "D must be positive";
    if (!(params.mu_v > 0.0) || !std::isfinite(params.mu_v)) return "MU must be positive";
    if (params.eta != 1 && params.eta != -1) return "ETA must be +1 or -1";
    if (params.p < 1) return "P must be a positive integer";
    if (!(params.x0 >= 0.0 && params.x0 <= 1.0)) return "X0 must lie in [0, 1]";
    return "";
}

double biolek_window(double x, double current, int p, WindowKind kind) {
    double step = 0.0;
    switch (kind) {
    case WindowKind::none:
        return 1.0;
    case WindowKind::biolek:
        // stp(-i) with stp(u) = 1 for u >= 0
        step = current <= 0.0 ? 1.0 : 0.0;
        break;
    case WindowKind::printed:
        step = current >= 0.0 ? 1.0 : 0.0;
        break;
    }
    const double base = x - step;
    // (base^2)^p keeps the even power exact for integer p
    double pow2p = 1.0;
    const double sq = base * base;
    for (int k = 0; k < p; ++k) pow2p *= sq;
    return 1.0 - pow2p;
}

double memristance(const MemristorParams& params, double x) {
    return params.r_on * x + params.r_off * (1.0 - x);
}

double state_derivative(const MemristorParams& params, double x, double current) {
    if (current == 0.0) return 0.0;
    return static_cast<double>(params.eta) * params.drift_coefficient() * current *
           biolek_window(x, current, params.p, params.window);
}

LinearDriftState linear_drift_state_of_charge(const MemristorParams& params, double charge) {
    const double raw =
        params.x0 + static_cast<double>(params.eta) * params.drift_coefficient() * charge;
    LinearDriftState out;
    out.x = clamp_state(raw);
    out.saturated = raw != out.x;
    return out;
}

}  // namespace memsim
