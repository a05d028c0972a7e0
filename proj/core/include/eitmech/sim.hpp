#pragma once

#include "eitmech/lambda_system.hpp"
#include "eitmech/mirror.hpp"
#include "eitmech/params.hpp"

#include <iosfwd>
#include <vector>

namespace eitmech {

struct TraceMeta {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int samples_per_period = 64;
    double wp0_scale = 1.0; // applied probe-power scaling (resolved if 'auto')
    ControlFactorMode mode = ControlFactorMode::linearized;
    bool feedback = false;
    double rho_dc = 0.0; // DC coherence reference used by the feedback force
    double t_span = 0.0;
    bool deterministic = true; // no stochastic elements anywhere in a run
};

// Uniformly sampled integration record. Columns are parallel arrays; every
// sample has passed the density-matrix invariant checks.
struct SimTrace {
    std::vector<double> t;
    std::vector<double> rho_gg, rho_ss, rho_ee;
    std::vector<double> re_gs, im_gs, re_ge, im_ge, re_se, im_se;
    std::vector<double> z, p;
    std::vector<double> w_p;   // exact transmitted power, W_p0 exp(-A rho'')
    std::vector<double> force; // feedback force (applied in feedback runs)
    TraceMeta meta;

    size_t size() const { return t.size(); }
    Mat3 rho_at(size_t i) const;
};

// Master equation driven by prescribed mirror motion z_m(t) = z0 cos(omega_m t)
// with no back-action on the mirror. rho(0) = |g><g|. The trace's z/p columns
// hold the prescribed motion.
SimTrace integrate_prescribed(const SimConfig& config, double t_span);

// Joint integration of (rho, z, p) with the control factor from the
// instantaneous z and the modulated probe radiation pressure acting on the
// mirror (unless run.feedback is off). Initial mirror state (z0, p = 0).
SimTrace integrate_feedback(const SimConfig& config, double t_span);

struct LockinResult {
    double offset = 0.0;
    double amplitude = 0.0;
    double phase = 0.0; // (-pi, pi]; s ~ offset + amplitude cos(omega t + phase)
    double window_start = 0.0;
    int n_periods = 0;
};

// Projection of a uniformly sampled channel onto {1, cos omega t, sin omega t}
// over an integer number of periods starting at the first sample >= t_start.
LockinResult lockin(const std::vector<double>& t, const std::vector<double>& s, double omega,
                    double t_start, int n_periods);

// Non-overlapping one-period averages of the mirror mechanical energy.
struct EnergySeries {
    std::vector<double> t; // window midpoints
    std::vector<double> energy;
};
EnergySeries energy_per_period(const SimTrace& trace, const MirrorParams& mirror);

struct RateFit {
    double rate = 0.0; // Ebar ~ exp(-rate t); positive = decay
    double stderr_rate = 0.0;
    double r2 = 1.0;
};
// Least-squares slope of ln(Ebar) vs t. All energies must be positive.
RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& energy);

// CSV schema: t_s, rho_gg, rho_ss, rho_ee, re_rho_ge, im_rho_ge, z_m, p_m, W_p, F
// with 17 significant digits, comma separator, LF endings.
void write_trace_csv(const SimTrace& trace, std::ostream& os);

} // namespace eitmech
