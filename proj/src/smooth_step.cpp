// SPDX-License-Identifier: Apache-2.0
#include "ct/smooth_step.hpp"

#include <cmath>

#include "ct/errors.hpp"

namespace ct {

Jet mollifier(double x) {
    if (x <= 0) return {0, 0, 0};
    if (x >= 1) return {1, 0, 0};
    // S = 1 / (1 + e^q), q = 1/x - 1/(1-x)
    const double y = 1 - x;
    const double q = 1 / x - 1 / y;
    const double q1 = -1 / (x * x) - 1 / (y * y);
    const double q2 = 2 / (x * x * x) - 2 / (y * y * y);
    double L, Lm;  // L and 1 - L without cancellation
    if (q > 0) {
        double e = std::exp(-q);
        L = e / (1 + e);
        Lm = 1 / (1 + e);
    } else {
        double e = std::exp(q);
        L = 1 / (1 + e);
        Lm = e / (1 + e);
    }
    const double dL = -L * Lm;
    const double d2L = L * Lm * (Lm - L);
    return {L, dL * q1, d2L * q1 * q1 + dL * q2};
}

Jet smooth_step_jet(StepKind kind, double u) {
    switch (kind) {
        case StepKind::psi: {
            // 1 - S(2|u| - 1), even
            double a = std::abs(u);
            Jet s = mollifier(2 * a - 1);
            double sg = (u < 0) ? -1.0 : 1.0;
            return {1 - s.v, -2 * s.d1 * sg, -4 * s.d2};
        }
        case StepKind::phi: {
            Jet s = mollifier(2 * (u - 1.25));
            return {1 - s.v, -2 * s.d1, -4 * s.d2};
        }
        case StepKind::chi: {
            Jet s = mollifier(4 * (u - 0.5));
            return {s.v, 4 * s.d1, 16 * s.d2};
        }
        case StepKind::g: {
            if (u <= 1 || u >= 4) return {0, 0, 0};
            if (u <= 2) return mollifier(u - 1);
            if (u <= 3) return {1, 0, 0};
            Jet s = mollifier(4 - u);
            return {s.v, -s.d1, s.d2};
        }
    }
    throw DomainError("smooth_step: unknown kind");
}

StepKind step_kind_from_name(const std::string& name) {
    if (name == "psi") return StepKind::psi;
    if (name == "phi" || name == "phi_step") return StepKind::phi;
    if (name == "chi") return StepKind::chi;
    if (name == "g") return StepKind::g;
    throw DomainError("unknown smooth step '" + name + "'");
}

const char* step_kind_name(StepKind kind) {
    switch (kind) {
        case StepKind::psi: return "psi";
        case StepKind::phi: return "phi";
        case StepKind::chi: return "chi";
        case StepKind::g: return "g";
    }
    return "?";
}

}  // namespace ct
