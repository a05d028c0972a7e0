#pragma once

#include "eitmech/linalg.hpp"
#include "eitmech/params.hpp"

namespace eitmech {

struct MirrorState {
    double z = 0.0; // m
    double p = 0.0; // kg m/s
    double t = 0.0; // s
};

// Newton's equation for the driven harmonic mirror, first-order form.
struct MirrorRhs {
    double dz = 0.0;
    double dp = 0.0;
};
MirrorRhs oscillator_rhs(const MirrorState& state, double force, const MirrorParams& mirror);

// Radiation pressure of two fully reflected beams, 2 (W_p + W_c) / c.
double static_force(double w_p, double w_c);

// Modulated part of the probe radiation pressure, -F0 A (rho''_now - rho''_dc).
// The static part is absorbed into the shifted equilibrium.
double feedback_force(double rho_ge_imag_now, double rho_ge_imag_dc, const OpticsParams& optics,
                      const DerivedParams& derived);

// New equilibrium position under the constant presure components,
// 2 (W_c + W_p0 (1 - A rho''_dc)) / (M omega_m^2 c). Simulations measure z
// from this point.
double equilibrium_shift(const OpticsParams& optics, const DerivedParams& derived,
                         const MirrorParams& mirror, double rho_ge_imag_dc);

// Amplitude envelope Z(t) = Z0 exp(-gamma_eff t / 2); positive rate = damping.
double envelope_predict(double z_amplitude0, double gamma_eff_rate, double t);

double mechanical_energy(const MirrorState& state, const MirrorParams& mirror);

// Complex amplitude b = z + i p / (M omega_m) and the derived envelope numbers.
struct EnvelopeState {
    cplx b_m;
    double amplitude = 0.0; // |b_m|, m
    double energy = 0.0;    // (1/2) M omega_m^2 |b_m|^2, J
};
EnvelopeState envelope_state(const MirrorState& state, const MirrorParams& mirror);

} // namespace eitmech
