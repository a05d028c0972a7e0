#pragma once

#include "eitmech/config.hpp"

#include <string>
#include <vector>

namespace eitmech {

// Probe/control drive of the Lambda system. All angular frequencies in rad/s.
struct AtomDriveParams {
    double omega_p = 0.0; // probe Rabi frequency
    double omega_c = 0.0; // control Rabi frequency
    double delta_c = 0.0; // control detuning (may be negative)
    double gamma_p = 0.0; // |e> -> |g> decay rate

    // Standard EIT operating regime: weak probe below both the control drive
    // and the linewidth.
    bool eit_regime() const { return omega_p < omega_c && omega_p < gamma_p; }
};

struct MirrorParams {
    double mass = 0.0;    // kg
    double omega_m = 0.0; // rad/s
    // Clamping-loss hook: viscous rate on the momentum. Ships disabled (0);
    // no thermal counterpart is modeled.
    double intrinsic_damping = 0.0; // 1/s
};

struct OpticsParams {
    double k_p = 0.0;     // probe wavenumber, 1/m
    double k_c = 0.0;     // control wavenumber, 1/m
    double density = 0.0; // atoms/m^3
    double length = 0.0;  // medium length, m
    double w_p0 = 0.0;    // incoming probe power, W
    double w_c = 0.0;     // control power at the mirror, W
};

enum class ControlFactorMode { linearized, exact_exponential };

// Constant-amplitude mirror sidebands on the control beam. eta is always
// derived as k_c * z0 so the two can never drift apart.
struct SidebandDrive {
    double z0 = 0.0;  // mirror oscillation amplitude, m
    double eta = 0.0; // k_c * z0
    ControlFactorMode mode = ControlFactorMode::linearized;
};

struct RunParams {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int samples_per_period = 64;
    double transient_gammap = 15.0; // analysis windows start at this many 1/Gamma_p
    int lockin_periods = 10;
    int truncation_order = 1; // sideband hierarchy K
    double periods = 200.0;   // coupled-run span in mirror periods
    double wp0_scale = 1.0;   // probe-power scaling for coupled runs
    bool wp0_scale_auto = false; // pick wp0_scale so Gamma_eff ~ 1e-3 * omega_m
    bool feedback = true;     // radiation-pressure feedback on the mirror
};

struct SimConfig {
    AtomDriveParams atom;
    MirrorParams mirror;
    OpticsParams optics;
    SidebandDrive drive;
    RunParams run;
};

// Quantities every module shares, computed once from a validated config.
struct DerivedParams {
    double d = 0.0;      // optical depth, 6 pi N L / k_p^2
    double a_gain = 0.0; // A = d Gamma_p / Omega_p
    double f0 = 0.0;     // F_0 = 2 W_p0 / c
    double eta = 0.0;    // k_c z0
    // Gamma_p-scaled copies
    double omega_p_t = 0.0;
    double omega_c_t = 0.0;
    double delta_c_t = 0.0;
    double omega_m_t = 0.0;
};

struct Violation {
    enum class Severity { error, warning };
    Severity severity;
    std::string message;
};

// Parse + resolve a config document: defaults filled in, units converted to
// rad/s / kg / m / W. Throws ValidationError naming key path and line on any
// unknown key, missing required key, bad number, or hard invariant violation.
SimConfig load_config(const std::string& text);

// Same, but starting from an already parsed (and possibly overridden) document.
SimConfig build_config(const RawDoc& doc);

// Hard invariants as errors, soft regime conditions as warnings. Empty iff all
// hard invariants hold and no regime condition is violated.
std::vector<Violation> validate(const SimConfig& config);

DerivedParams derive_quantities(const SimConfig& config);

// Canonical text form; load_config(render_config(c)) reproduces every numeric
// field bit-exactly.
std::string render_config(const SimConfig& config);

// One line per documented key: "section.key  default  description".
std::string config_key_reference();

} // namespace eitmech
