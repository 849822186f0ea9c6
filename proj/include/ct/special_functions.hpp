// SPDX-License-Identifier: Apache-2.0
// Scalar constants: zeta'(-1), Euler gamma, the c_k coefficients, Dedekind eta.
#pragma once

namespace ct {

struct HighPrecReal {
    double value = 0;
    double abs_err = 0;
};

HighPrecReal zeta_prime_minus1();
HighPrecReal euler_gamma();
// zeta'(2), used by the Glaisher route to zeta'(-1).
HighPrecReal zeta_prime_2();
HighPrecReal c_k(int k);
HighPrecReal dedekind_eta(double tau_im);
// ln Z'_P(1) for the thrice-punctured sphere: 4 zeta'(-1) + ln 2pi + (10/9) ln 2.
HighPrecReal log_selberg_prime_P();

}  // namespace ct
