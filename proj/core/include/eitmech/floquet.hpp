#pragma once

#include "eitmech/lambda_system.hpp"
#include "eitmech/linalg.hpp"
#include "eitmech/params.hpp"

#include <vector>

namespace eitmech {

inline constexpr int kMaxHierarchyOrder = 4;

// Stationary Fourier amplitudes of the density matrix under constant mirror
// sidebands: rho(t) = sum_k rho_k exp(-i k omega_m t), |k| <= order.
struct FourierSolution {
    int order = 1;
    std::vector<Mat3> amplitudes; // index k + order
    double eta = 0.0;
    double omega_m = 0.0; // rad/s
    AtomDriveParams atom;

    const Mat3& rho(int k) const { return amplitudes[static_cast<size_t>(k + order)]; }
};

// Solves the block-tridiagonal system
//   0 = (L0 + i k omega_m) rho_k + L1 rho_{k-1} + L1 rho_{k+1},  rho_{+-(K+1)} = 0,
// with tr rho_0 = 1. L1 carries the sideband perturbation
// (i eta/4)(Omega_c sigma_es - h.c.) inside the +i commutator (half of the
// linearized control modulation per exp(-+ i omega_m t) component).
FourierSolution solve_sideband_hierarchy(const AtomDriveParams& atom, const SidebandDrive& drive,
                                         double omega_m, int order);

// Closed-form first-order coherence amplitude
//   rho_{+,ge} = i eta Wp Wc^2 wm / [(2i Dc + Wc^2)(2i(1 - 2i wm)(Dc - wm) + Wc^2)]
// with every symbol scaled by Gamma_p. Valid for weak probe (Omega_p << Omega_c,
// Gamma_p).
cplx analytic_rho_plus(const AtomDriveParams& atom, double eta, double omega_m, double delta_c);

// First-harmonic content of rho''_ge(t) = offset + amplitude cos(omega_m t + phase).
// `phase` comes from projecting the reconstructed signal onto {1, cos, sin};
// `phase_closed_form` is arg[rho_+(Dc) - rho_+(-Dc)] + pi/2 as printed. The two
// agree on amplitude to 1e-10 (checked) and satisfy phase = pi - phase_closed_form.
struct ModulationResult {
    double offset = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;             // in (-pi, pi]
    double phase_closed_form = 0.0; // in (-pi, pi]
};

ModulationResult modulation(const FourierSolution& solution);
// Same quantities from the closed form at +-delta_c; offset from the exact
// unmodulated steady state.
ModulationResult modulation_analytic(const AtomDriveParams& atom, double eta, double omega_m,
                                     double delta_c);

// Detuning of maximal modulation:
//   Delta_max = omega_m/2 [1 + Wc^2 - sqrt((1 - Wc^2)^2 + Wc^4/wm^2)], tildes = /Gamma_p.
// Signed: positive for omega_m > Omega_c/2, negative below, zero at equality.
double delta_max(const AtomDriveParams& atom, double omega_m);

// Large-Wc simplification |Omega_c^2 - 4 omega_m^2| / (4 omega_m).
double delta_max_approx(double omega_c, double omega_m);

// Numeric argmax of the analytic modulation amplitude over Delta_c in
// [0, 1.2 (Omega_c^2 + 4 omega_m^2)/(4 omega_m)]: 400-point scan plus
// golden-section refinement; ties break toward smaller Delta_c.
double delta_max_argmax(const AtomDriveParams& atom, double omega_m);

// Effective optomechanical rate of the mirror amplitude envelope,
// Zbar(t) = Zbar(0) exp(-Gamma_eff t / 2):
//   Gamma_eff = k_c F0 d Gamma_p / (M omega_m Omega_p) * Re[rho_+(Dc) - rho_+(-Dc)] / eta,
// evaluated through the analytic form, which is exactly linear in eta.
// Positive = damping. Equals the (delta_rho''/eta) sin(alpha) form identically.
double gamma_eff(const AtomDriveParams& atom, double omega_m, const MirrorParams& mirror,
                 const OpticsParams& optics);

} // namespace eitmech
