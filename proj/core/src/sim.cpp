#include "eitmech/sim.hpp"
#include "eitmech/constants.hpp"
#include "eitmech/errors.hpp"
#include "eitmech/floquet.hpp"
#include "eitmech/ode.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace eitmech {

namespace {

// Real packing of a Hermitian rho:
// [gg, ss, ee, Re gs, Im gs, Re ge, Im ge, Re se, Im se].
// Hermiticity is then exact by construction along the whole integration.
template <typename Arr>
Mat3 unpack_rho(const Arr& y) {
    Mat3 rho;
    rho(idx_g, idx_g) = y[0];
    rho(idx_s, idx_s) = y[1];
    rho(idx_e, idx_e) = y[2];
    rho(idx_g, idx_s) = cplx(y[3], y[4]);
    rho(idx_s, idx_g) = cplx(y[3], -y[4]);
    rho(idx_g, idx_e) = cplx(y[5], y[6]);
    rho(idx_e, idx_g) = cplx(y[5], -y[6]);
    rho(idx_s, idx_e) = cplx(y[7], y[8]);
    rho(idx_e, idx_s) = cplx(y[7], -y[8]);
    return rho;
}

template <typename Arr>
void pack_rhs(const Mat3& drho, Arr& dy) {
    dy[0] = drho(idx_g, idx_g).real();
    dy[1] = drho(idx_s, idx_s).real();
    dy[2] = drho(idx_e, idx_e).real();
    dy[3] = drho(idx_g, idx_s).real();
    dy[4] = drho(idx_g, idx_s).imag();
    dy[5] = drho(idx_g, idx_e).real();
    dy[6] = drho(idx_g, idx_e).imag();
    dy[7] = drho(idx_s, idx_e).real();
    dy[8] = drho(idx_s, idx_e).imag();
}

void check_sample(const Mat3& rho, double t) {
    const StateCheck c = check_density_matrix(rho);
    if (c.trace_defect > 1e-9 || c.herm_defect > 1e-12 || c.min_eigenvalue < -1e-9)
        throw NumericalError("integration: density-matrix invariant drift at t = " +
                             std::to_string(t) + " (trace defect " +
                             std::to_string(c.trace_defect) + ", min eigenvalue " +
                             std::to_string(c.min_eigenvalue) + ")");
}

// DC coherence reference: Im rho_0,ge of the K = 1 Fourier solution at the
// run's drive, computed once up front.
double dc_reference(const SimConfig& config) {
    const FourierSolution sol =
        solve_sideband_hierarchy(config.atom, config.drive, config.mirror.omega_m, 1);
    return sol.rho(0)(idx_g, idx_e).imag();
}

} // namespace

Mat3 SimTrace::rho_at(size_t i) const {
    const std::array<double, 9> y{rho_gg[i], rho_ss[i], rho_ee[i], re_gs[i], im_gs[i],
                                  re_ge[i],  im_ge[i],  re_se[i],  im_se[i]};
    return unpack_rho(y);
}

SimTrace integrate_prescribed(const SimConfig& config, double t_span) {
    const double gamma_p = config.atom.gamma_p;
    if (!(t_span >= 10.0 / gamma_p))
        throw ValidationError("integrate_prescribed: t_span must cover at least 10/Gamma_p");

    const double omega_m = config.mirror.omega_m;
    const double period = two_pi / omega_m;
    const int spp = std::max(64, config.run.samples_per_period);
    const double dt = period / spp;

    const bool have_derived = config.atom.omega_p > 0.0;
    DerivedParams derived;
    double rho_dc = 0.0;
    if (have_derived) {
        derived = derive_quantities(config);
        rho_dc = dc_reference(config);
    }
    const double w_p0 = config.optics.w_p0 * config.run.wp0_scale;

    SimTrace trace;
    trace.meta.rel_tol = config.run.rel_tol;
    trace.meta.abs_tol = config.run.abs_tol;
    trace.meta.samples_per_period = spp;
    trace.meta.wp0_scale = config.run.wp0_scale;
    trace.meta.mode = config.drive.mode;
    trace.meta.feedback = false;
    trace.meta.rho_dc = rho_dc;
    trace.meta.t_span = t_span;

    Dopri5<9> stepper;
    stepper.rel_tol = config.run.rel_tol;
    stepper.abs_tol = config.run.abs_tol;

    const auto rhs = [&](double t, const Dopri5<9>::State& y, Dopri5<9>::State& dy) {
        const double z_m = config.drive.z0 * std::cos(omega_m * t);
        const cplx cf = control_factor(z_m, config.optics.k_c, config.drive.mode);
        pack_rhs(lindblad_apply(unpack_rho(y), config.atom, cf), dy);
    };

    Dopri5<9>::State y0{};
    y0[0] = 1.0; // rho(0) = |g><g|

    stepper.integrate(rhs, 0.0, t_span, y0, dt, [&](double t, const Dopri5<9>::State& y) {
        const Mat3 rho = unpack_rho(y);
        check_sample(rho, t);
        trace.t.push_back(t);
        trace.rho_gg.push_back(y[0]);
        trace.rho_ss.push_back(y[1]);
        trace.rho_ee.push_back(y[2]);
        trace.re_gs.push_back(y[3]);
        trace.im_gs.push_back(y[4]);
        trace.re_ge.push_back(y[5]);
        trace.im_ge.push_back(y[6]);
        trace.re_se.push_back(y[7]);
        trace.im_se.push_back(y[8]);
        const double z_m = config.drive.z0 * std::cos(omega_m * t);
        trace.z.push_back(z_m);
        trace.p.push_back(-config.mirror.mass * config.drive.z0 * omega_m * std::sin(omega_m * t));
        if (have_derived) {
            trace.w_p.push_back(w_p0 * std::exp(-derived.a_gain * y[6]));
            DerivedParams d = derived;
            d.f0 = 2.0 * w_p0 / speed_of_light;
            trace.force.push_back(feedback_force(y[6], rho_dc, config.optics, d));
        } else {
            trace.w_p.push_back(w_p0);
            trace.force.push_back(0.0);
        }
    });
    return trace;
}

SimTrace integrate_feedback(const SimConfig& config, double t_span) {
    const double gamma_p = config.atom.gamma_p;
    if (!(t_span >= 10.0 / gamma_p))
        throw ValidationError("integrate_feedback: t_span must cover at least 10/Gamma_p");

    const double omega_m = config.mirror.omega_m;
    const double period = two_pi / omega_m;
    const int spp = std::max(64, config.run.samples_per_period);
    const double dt = period / spp;

    DerivedParams derived = derive_quantities(config);
    double wp0_scale = config.run.wp0_scale;
    if (config.run.wp0_scale_auto) {
        const double g0 = gamma_eff(config.atom, omega_m, config.mirror, config.optics);
        wp0_scale = (std::abs(g0) > 1e-300) ? 1e-3 * omega_m / std::abs(g0) : 1.0;
    }
    const double w_p0 = config.optics.w_p0 * wp0_scale;
    derived.f0 = 2.0 * w_p0 / speed_of_light;
    const double rho_dc = dc_reference(config);
    const double gain = config.run.feedback ? 1.0 : 0.0;

    SimTrace trace;
    trace.meta.rel_tol = config.run.rel_tol;
    trace.meta.abs_tol = config.run.abs_tol;
    trace.meta.samples_per_period = spp;
    trace.meta.wp0_scale = wp0_scale;
    trace.meta.mode = config.drive.mode;
    trace.meta.feedback = config.run.feedback;
    trace.meta.rho_dc = rho_dc;
    trace.meta.t_span = t_span;

    Dopri5<11> stepper;
    stepper.rel_tol = config.run.rel_tol;
    stepper.abs_tol = config.run.abs_tol;
    const double z_scale = std::max(config.drive.z0, 1e-15);
    stepper.abs_scale[9] = z_scale;
    stepper.abs_scale[10] = config.mirror.mass * omega_m * z_scale;

    const auto rhs = [&](double t, const Dopri5<11>::State& y, Dopri5<11>::State& dy) {
        (void)t;
        const cplx cf = control_factor(y[9], config.optics.k_c, config.drive.mode);
        pack_rhs(lindblad_apply(unpack_rho(y), config.atom, cf), dy);
        const double f = gain * feedback_force(y[6], rho_dc, config.optics, derived);
        MirrorState st{y[9], y[10], t};
        const MirrorRhs mr = oscillator_rhs(st, f, config.mirror);
        dy[9] = mr.dz;
        dy[10] = mr.dp;
    };

    Dopri5<11>::State y0{};
    y0[0] = 1.0;
    y0[9] = config.drive.z0;
    y0[10] = 0.0;

    stepper.integrate(rhs, 0.0, t_span, y0, dt, [&](double t, const Dopri5<11>::State& y) {
        const Mat3 rho = unpack_rho(y);
        check_sample(rho, t);
        trace.t.push_back(t);
        trace.rho_gg.push_back(y[0]);
        trace.rho_ss.push_back(y[1]);
        trace.rho_ee.push_back(y[2]);
        trace.re_gs.push_back(y[3]);
        trace.im_gs.push_back(y[4]);
        trace.re_ge.push_back(y[5]);
        trace.im_ge.push_back(y[6]);
        trace.re_se.push_back(y[7]);
        trace.im_se.push_back(y[8]);
        trace.z.push_back(y[9]);
        trace.p.push_back(y[10]);
        trace.w_p.push_back(w_p0 * std::exp(-derived.a_gain * y[6]));
        trace.force.push_back(gain * feedback_force(y[6], rho_dc, config.optics, derived));
    });
    return trace;
}

LockinResult lockin(const std::vector<double>& t, const std::vector<double>& s, double omega,
                    double t_start, int n_periods) {
    if (t.size() != s.size() || t.size() < 3)
        throw ValidationError("lockin: need a sampled series");
    if (n_periods < 1) throw ValidationError("lockin: n_periods must be >= 1");
    const double period = two_pi / omega;
    const double dt = t[1] - t[0];

    size_t i0 = 0;
    while (i0 < t.size() && t[i0] < t_start - 1e-9 * period) ++i0;
    if (i0 >= t.size()) throw ValidationError("lockin: window start beyond series");

    const double window = n_periods * period;
    const long m = std::lround(window / dt);
    if (std::abs(m * dt - window) > 1e-6 * period)
        throw ValidationError("lockin: sampling not commensurate with the period");
    if (i0 + static_cast<size_t>(m) >= t.size())
        throw ValidationError("lockin: window exceeds series");

    // Trapezoid over exactly n periods; of spectral accuracy for smooth
    // periodic content, and orthogonal to every other harmonic.
    double sum = 0.0, sum_c = 0.0, sum_s = 0.0;
    for (long j = 0; j <= m; ++j) {
        const size_t i = i0 + static_cast<size_t>(j);
        const double w = (j == 0 || j == m) ? 0.5 : 1.0;
        sum += w * s[i];
        sum_c += w * s[i] * std::cos(omega * t[i]);
        sum_s += w * s[i] * std::sin(omega * t[i]);
    }
    LockinResult r;
    r.offset = sum / m;
    const double a = 2.0 * sum_c / m;
    const double b = 2.0 * sum_s / m;
    r.amplitude = std::hypot(a, b);
    r.phase = (r.amplitude > 0.0) ? std::atan2(-b, a) : 0.0;
    if (r.phase <= -pi) r.phase += two_pi;
    r.window_start = t[i0];
    r.n_periods = n_periods;
    return r;
}

EnergySeries energy_per_period(const SimTrace& trace, const MirrorParams& mirror) {
    if (trace.size() < 3) throw ValidationError("energy_per_period: trace too short");
    const double period = two_pi / mirror.omega_m;
    const double dt = trace.t[1] - trace.t[0];
    const long m = std::lround(period / dt);
    if (std::abs(m * dt - period) > 1e-6 * period)
        throw ValidationError("energy_per_period: sampling not commensurate with the period");
    if (trace.t.back() - trace.t.front() < 2.0 * period - 1e-9 * period)
        throw ValidationError("energy_per_period: trace must span at least 2 periods");

    EnergySeries series;
    for (size_t start = 0; start + static_cast<size_t>(m) < trace.size(); start += m) {
        double acc = 0.0;
        for (long j = 0; j <= m; ++j) {
            const size_t i = start + static_cast<size_t>(j);
            const double w = (j == 0 || j == m) ? 0.5 : 1.0;
            acc += w * mechanical_energy(MirrorState{trace.z[i], trace.p[i], trace.t[i]}, mirror);
        }
        series.t.push_back(trace.t[start] + 0.5 * period);
        series.energy.push_back(acc / m);
    }
    return series;
}

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& energy) {
    if (t.size() != energy.size() || t.size() < 2)
        throw ValidationError("fit_rate: need >= 2 energy points");
    std::vector<double> log_e(energy.size());
    for (size_t i = 0; i < energy.size(); ++i) {
        if (!(energy[i] > 0.0)) throw ValidationError("fit_rate: energies must be positive");
        log_e[i] = std::log(energy[i]);
    }
    const LineFit f = fit_line(t, log_e);
    RateFit r;
    r.rate = -f.slope;
    r.stderr_rate = f.slope_stderr;
    r.r2 = f.r2;
    return r;
}

void write_trace_csv(const SimTrace& trace, std::ostream& os) {
    os << "t_s,rho_gg,rho_ss,rho_ee,re_rho_ge,im_rho_ge,z_m,p_m,W_p,F\n";
    char buf[512];
    for (size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof buf,
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      trace.t[i], trace.rho_gg[i], trace.rho_ss[i], trace.rho_ee[i],
                      trace.re_ge[i], trace.im_ge[i], trace.z[i], trace.p[i], trace.w_p[i],
                      trace.force[i]);
        os << buf;
    }
}

} // namespace eitmech
