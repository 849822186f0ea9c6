// SPDX-License-Identifier: Apache-2.0
// Smooth cutoffs built from the exp(-1/x) mollifier pair.
#pragma once

#include <string>

#include "ct/jet.hpp"

namespace ct {

enum class StepKind { psi, phi, chi, g };

// S(x) = sigma(x) / (sigma(x) + sigma(1 - x)), sigma(x) = exp(-1/x) for x > 0.
Jet mollifier(double x);

Jet smooth_step_jet(StepKind kind, double u);
inline double smooth_step(StepKind kind, double u) { return smooth_step_jet(kind, u).v; }

StepKind step_kind_from_name(const std::string& name);
const char* step_kind_name(StepKind kind);

}  // namespace ct
