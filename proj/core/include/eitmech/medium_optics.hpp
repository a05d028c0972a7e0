#pragma once

#include "eitmech/floquet.hpp"
#include "eitmech/linalg.hpp"
#include "eitmech/params.hpp"

#include <string>
#include <vector>

namespace eitmech {

enum class TransmissionForm { exact, linear };

// Transmitted probe power for a given Im rho_ge. Exact form is the intensity
// law W_p0 exp(-A rho''); linear is its first-order expansion W_p0 (1 - A rho'').
// A negative linearized result appends a warning to `warnings` if provided.
double probe_power(double rho_ge_imag, const OpticsParams& optics, const DerivedParams& derived,
                   TransmissionForm form, std::vector<std::string>* warnings = nullptr);

// Thin-medium transmitted amplitude, Omega_p0 (1 + i kpL_chi / 2); warns above
// |kpL_chi| = 0.5 where the expansion stops being meaningful.
cplx thin_medium_field(cplx omega_p0, cplx kpl_chi, std::vector<std::string>* warnings = nullptr);

// Harmonic coefficients of the transmitted amplitude when the susceptibility
// oscillates: Omega_pL(t) = c0 + c_plus e^{-i omega_m t} + c_minus e^{i omega_m t}.
struct ModulatedField {
    cplx c0;
    cplx c_plus;
    cplx c_minus;
    cplx at(double omega_m, double t) const;
};
ModulatedField modulated_field(cplx omega_p0, cplx kpl_chi0, cplx kpl_chi_plus, cplx kpl_chi_minus);

// Same, fed directly from a Fourier solution via k_p L chi_k = A rho_{k,ge}.
ModulatedField modulated_field_from_solution(cplx omega_p0, const DerivedParams& derived,
                                             const FourierSolution& solution);

// One regime condition: ratio = lhs/rhs, pass when below threshold.
struct RegimeCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double threshold = 0.1;
    bool pass = true;
    std::string note;
};

// Evaluates every modeling assumption the closed forms rely on: retardation
// L << c/omega_m, weak probe, thin medium |k_p L chi| << 1, and the linearized
// control factor. Reporting only; nothing throws.
std::vector<RegimeCheck> validity_report(const SimConfig& config, const DerivedParams& derived);

} // namespace eitmech
