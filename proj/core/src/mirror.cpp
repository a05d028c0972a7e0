#include "eitmech/mirror.hpp"
#include "eitmech/constants.hpp"
#include "eitmech/errors.hpp"

#include <cmath>

namespace eitmech {

MirrorRhs oscillator_rhs(const MirrorState& state, double force, const MirrorParams& mirror) {
    MirrorRhs r;
    r.dz = state.p / mirror.mass;
    r.dp = -mirror.mass * mirror.omega_m * mirror.omega_m * state.z + force -
           mirror.intrinsic_damping * state.p;
    return r;
}

double static_force(double w_p, double w_c) {
    if (w_p < 0.0 || w_c < 0.0) throw ValidationError("static_force: powers must be nonnegative");
    return 2.0 * (w_p + w_c) / speed_of_light;
}

double feedback_force(double rho_ge_imag_now, double rho_ge_imag_dc, const OpticsParams& optics,
                      const DerivedParams& derived) {
    (void)optics;
    return -derived.f0 * derived.a_gain * (rho_ge_imag_now - rho_ge_imag_dc);
}

double equilibrium_shift(const OpticsParams& optics, const DerivedParams& derived,
                         const MirrorParams& mirror, double rho_ge_imag_dc) {
    const double w_probe = optics.w_p0 * (1.0 - derived.a_gain * rho_ge_imag_dc);
    return 2.0 * (optics.w_c + w_probe) /
           (mirror.mass * mirror.omega_m * mirror.omega_m * speed_of_light);
}

double envelope_predict(double z_amplitude0, double gamma_eff_rate, double t) {
    return z_amplitude0 * std::exp(-0.5 * gamma_eff_rate * t);
}

double mechanical_energy(const MirrorState& state, const MirrorParams& mirror) {
    return state.p * state.p / (2.0 * mirror.mass) +
           0.5 * mirror.mass * mirror.omega_m * mirror.omega_m * state.z * state.z;
}

EnvelopeState envelope_state(const MirrorState& state, const MirrorParams& mirror) {
    EnvelopeState e;
    e.b_m = cplx(state.z, state.p / (mirror.mass * mirror.omega_m));
    e.amplitude = std::abs(e.b_m);
    e.energy = 0.5 * mirror.mass * mirror.omega_m * mirror.omega_m * e.amplitude * e.amplitude;
    return e;
}

} // namespace eitmech
