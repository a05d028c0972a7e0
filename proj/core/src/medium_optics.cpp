#include "eitmech/medium_optics.hpp"
#include "eitmech/constants.hpp"
#include "eitmech/errors.hpp"

#include <cmath>

namespace eitmech {

double probe_power(double rho_ge_imag, const OpticsParams& optics, const DerivedParams& derived,
                   TransmissionForm form, std::vector<std::string>* warnings) {
    if (!std::isfinite(derived.a_gain))
        throw ValidationError("probe_power: A must be finite");
    const double x = derived.a_gain * rho_ge_imag;
    if (form == TransmissionForm::exact) return optics.w_p0 * std::exp(-x);
    if (x > 1.0 && warnings)
        warnings->push_back("probe_power: linearized transmission negative (A rho'' = " +
                            std::to_string(x) + "); use exact form");
    return optics.w_p0 * (1.0 - x);
}

cplx thin_medium_field(cplx omega_p0, cplx kpl_chi, std::vector<std::string>* warnings) {
    if (std::abs(kpl_chi) > 0.5 && warnings)
        warnings->push_back("thin_medium_field: |k_p L chi| = " + std::to_string(std::abs(kpl_chi)) +
                            " outside the thin-medium regime");
    return omega_p0 * (1.0 + cplx(0.0, 0.5) * kpl_chi);
}

cplx ModulatedField::at(double omega_m, double t) const {
    const cplx ph(std::cos(omega_m * t), -std::sin(omega_m * t));
    return c0 + c_plus * ph + c_minus * std::conj(ph);
}

ModulatedField modulated_field(cplx omega_p0, cplx kpl_chi0, cplx kpl_chi_plus,
                               cplx kpl_chi_minus) {
    const cplx half_i(0.0, 0.5);
    ModulatedField f;
    f.c0 = omega_p0 * (1.0 + half_i * kpl_chi0);
    f.c_plus = omega_p0 * half_i * kpl_chi_plus;
    f.c_minus = omega_p0 * half_i * kpl_chi_minus;
    return f;
}

ModulatedField modulated_field_from_solution(cplx omega_p0, const DerivedParams& derived,
                                             const FourierSolution& solution) {
    // k_p L chi_k = A rho_{k,ge}
    return modulated_field(omega_p0, derived.a_gain * solution.rho(0)(idx_g, idx_e),
                           derived.a_gain * solution.rho(+1)(idx_g, idx_e),
                           derived.a_gain * solution.rho(-1)(idx_g, idx_e));
}

std::vector<RegimeCheck> validity_report(const SimConfig& config, const DerivedParams& derived) {
    std::vector<RegimeCheck> checks;
    auto add = [&](std::string name, double lhs, double rhs, double threshold, std::string note) {
        RegimeCheck c;
        c.name = std::move(name);
        c.lhs = lhs;
        c.rhs = rhs;
        c.ratio = rhs != 0.0 ? lhs / rhs : INFINITY;
        c.threshold = threshold;
        c.pass = c.ratio <= threshold;
        c.note = std::move(note);
        checks.push_back(std::move(c));
    };

    add("retardation L << c/omega_m", config.optics.length,
        speed_of_light / config.mirror.omega_m, 0.1,
        "light must cross the medium well within a mirror period; external path "
        "lengths are assumed comparable to L");
    add("EIT drive Omega_p << Omega_c", config.atom.omega_p, config.atom.omega_c, 0.1,
        "weak probe against the control drive");
    add("weak probe Omega_p << Gamma_p", config.atom.omega_p, config.atom.gamma_p, 0.1,
        "first-order expansion of the coherence in the probe");

    double kplchi = NAN;
    try {
        kplchi = std::abs(derived.a_gain * steady_state(config.atom)(idx_g, idx_e));
    } catch (const std::exception&) {
        // degenerate steady state: leave the check as not evaluable
    }
    add("thin medium |k_p L chi| << 1", kplchi, 1.0, 0.1,
        "steady-state value; control-beam group-velocity corrections at large "
        "optical depth are outside the model");

    add("linearized control factor eta << 1", config.drive.eta, 1.0, 0.3,
        config.drive.mode == ControlFactorMode::linearized
            ? "active mode"
            : "informational (exact-exponential mode selected)");
    return checks;
}

} // namespace eitmech
