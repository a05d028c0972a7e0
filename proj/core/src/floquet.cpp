#include "eitmech/floquet.hpp"
#include "eitmech/constants.hpp"
#include "eitmech/errors.hpp"

#include <cmath>

namespace eitmech {

namespace {

constexpr int vec_idx(int r, int c) { return 3 * c + r; }

double wrap_phase(double x) {
    x = std::remainder(x, two_pi); // (-pi, pi] up to the boundary convention
    if (x <= -pi) x += two_pi;
    return x;
}

// First-harmonic complex amplitude D = rho_{+,ge} - conj(rho_{-,ge}); the
// oscillating part of Im rho_ge(t) is Im[D exp(-i omega t)].
ModulationResult modulation_from_pair(cplx rho_plus_ge, cplx rho_minus_ge, double offset,
                                      const std::vector<cplx>* extra_harmonics) {
    const cplx d = rho_plus_ge - std::conj(rho_minus_ge);

    // Projection of the reconstructed signal onto {1, cos, sin} over one
    // period. A uniform grid makes the projection exact for any band-limited
    // reconstruction, so this is the authoritative phase convention.
    const int n = 256;
    double mean = 0.0, ac = 0.0, as = 0.0;
    for (int i = 0; i < n; ++i) {
        const double th = two_pi * i / n;
        // Im[rho_k e^{-ik th} + rho_{-k} e^{ik th}] = Im[D_k e^{-ik th}] with
        // D_k = rho_k - conj(rho_{-k}); k = 1 is d, higher ones are optional.
        double s = offset + (d * cplx(std::cos(th), -std::sin(th))).imag();
        if (extra_harmonics) {
            for (size_t k = 0; k < extra_harmonics->size(); ++k) {
                const double kk = static_cast<double>(k + 2);
                s += ((*extra_harmonics)[k] * cplx(std::cos(kk * th), -std::sin(kk * th))).imag();
            }
        }
        mean += s;
        ac += s * std::cos(th);
        as += s * std::sin(th);
    }
    mean /= n;
    ac *= 2.0 / n;
    as *= 2.0 / n;

    ModulationResult out;
    out.offset = mean;
    out.amplitude = std::hypot(ac, as);
    out.phase = (out.amplitude > 0.0) ? std::atan2(-as, ac) : 0.0;
    out.phase_closed_form = wrap_phase(std::arg(d) + 0.5 * pi);

    const double closed_amplitude = std::abs(d);
    if (std::abs(out.amplitude - closed_amplitude) >
        1e-10 * std::max(1.0, std::max(out.amplitude, closed_amplitude)))
        throw NumericalError("modulation: projection and closed-form amplitudes disagree");
    out.amplitude = closed_amplitude;
    if (out.amplitude == 0.0) out.phase = 0.0;
    return out;
}

} // namespace

FourierSolution solve_sideband_hierarchy(const AtomDriveParams& atom, const SidebandDrive& drive,
                                         double omega_m, int order) {
    if (order < 1 || order > kMaxHierarchyOrder)
        throw ValidationError("solve_sideband_hierarchy: order must be in 1.." +
                              std::to_string(kMaxHierarchyOrder));
    if (!(omega_m > 0.0)) throw ValidationError("solve_sideband_hierarchy: omega_m must be positive");
    if (drive.eta < 0.0) throw ValidationError("solve_sideband_hierarchy: eta must be nonnegative");
    if (!(atom.gamma_p > 0.0)) throw ValidationError("solve_sideband_hierarchy: gamma_p must be positive");

    // Scaled units: rates in Gamma_p, so residuals are meaningful absolutes.
    AtomDriveParams a;
    a.omega_p = atom.omega_p / atom.gamma_p;
    a.omega_c = atom.omega_c / atom.gamma_p;
    a.delta_c = atom.delta_c / atom.gamma_p;
    a.gamma_p = 1.0;
    const double wm = omega_m / atom.gamma_p;

    const CMatrix l0 = liouvillian_matrix(a, cplx(1.0));

    // Sideband perturbation: half of the linearized modulation
    // i eta cos(wm t) Omega_c sigma_es/2 per exp(-+i wm t) component, inside
    // the +i commutator.
    Mat3 g_half;
    g_half(idx_e, idx_s) = cplx(0.0, 0.25 * drive.eta * a.omega_c);
    g_half(idx_s, idx_e) = std::conj(g_half(idx_e, idx_s));
    CMatrix l1(9);
    {
        const cplx iu(0.0, 1.0);
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < 3; ++r)
                for (int k = 0; k < 3; ++k) {
                    l1(vec_idx(r, c), vec_idx(k, c)) += iu * g_half(r, k);
                    l1(vec_idx(r, c), vec_idx(r, k)) -= iu * g_half(k, c);
                }
    }

    const int nb = 2 * order + 1;
    const int n = 9 * nb;
    CMatrix sys(n);
    for (int kb = 0; kb < nb; ++kb) {
        const int k = kb - order;
        const int off = 9 * kb;
        for (int r = 0; r < 9; ++r) {
            for (int c = 0; c < 9; ++c) sys(off + r, off + c) = l0(r, c);
            sys(off + r, off + r) += cplx(0.0, k * wm);
        }
        for (const int nbr : {kb - 1, kb + 1}) {
            if (nbr < 0 || nbr >= nb) continue;
            const int noff = 9 * nbr;
            for (int r = 0; r < 9; ++r)
                for (int c = 0; c < 9; ++c) sys(off + r, noff + c) += l1(r, c);
        }
    }
    // Replace the redundant (g,g) row of the k = 0 block by tr rho_0 = 1.
    const int row0 = 9 * order + vec_idx(0, 0);
    for (int c = 0; c < n; ++c) sys(row0, c) = 0.0;
    sys(row0, 9 * order + vec_idx(0, 0)) = 1.0;
    sys(row0, 9 * order + vec_idx(1, 1)) = 1.0;
    sys(row0, 9 * order + vec_idx(2, 2)) = 1.0;

    std::vector<cplx> rhs(n, cplx(0.0));
    rhs[row0] = 1.0;

    std::vector<cplx> x;
    try {
        x = lu_solve(sys, rhs, "sideband hierarchy");
    } catch (const NumericalError& e) {
        // Identify the resonant block from a pivot probe before giving up.
        std::string which = "unknown";
        for (int kb = 0; kb < nb; ++kb) {
            CMatrix blk(9);
            const int off = 9 * kb;
            for (int r = 0; r < 9; ++r)
                for (int c = 0; c < 9; ++c) blk(r, c) = sys(off + r, off + c);
            if (lu_min_pivot_ratio(blk) <= 1e-12) which = std::to_string(kb - order);
        }
        throw NumericalError(std::string("solve_sideband_hierarchy: singular block system "
                                         "(resonant k = ") + which + "): " + e.what());
    }

    // Residual of the untouched equations; the replaced row is implied by the
    // others (every block of the generator is traceless).
    {
        CMatrix orig(n);
        for (int kb = 0; kb < nb; ++kb) {
            const int k = kb - order;
            const int off = 9 * kb;
            for (int r = 0; r < 9; ++r) {
                for (int c = 0; c < 9; ++c) orig(off + r, off + c) = l0(r, c);
                orig(off + r, off + r) += cplx(0.0, k * wm);
            }
            for (const int nbr : {kb - 1, kb + 1}) {
                if (nbr < 0 || nbr >= nb) continue;
                const int noff = 9 * nbr;
                for (int r = 0; r < 9; ++r)
                    for (int c = 0; c < 9; ++c) orig(off + r, noff + c) += l1(r, c);
            }
        }
        const auto res = orig.apply(x);
        double rmax = 0.0;
        for (int i = 0; i < n; ++i)
            if (i != row0) rmax = std::max(rmax, std::abs(res[i]));
        if (rmax > 1e-10)
            throw NumericalError("solve_sideband_hierarchy: residual " + std::to_string(rmax) +
                                 " exceeds 1e-10 (scaled units)");
    }

    FourierSolution sol;
    sol.order = order;
    sol.eta = drive.eta;
    sol.omega_m = omega_m;
    sol.atom = atom;
    sol.amplitudes.resize(nb);
    for (int kb = 0; kb < nb; ++kb) {
        std::array<cplx, 9> v;
        for (int i = 0; i < 9; ++i) v[i] = x[9 * kb + i];
        sol.amplitudes[kb] = unvectorize(v);
    }
    return sol;
}

cplx analytic_rho_plus(const AtomDriveParams& atom, double eta, double omega_m, double delta_c) {
    if (!(atom.gamma_p > 0.0)) throw ValidationError("analytic_rho_plus: gamma_p must be positive");
    const double wp = atom.omega_p / atom.gamma_p;
    const double wc2 = std::norm(atom.omega_c / atom.gamma_p);
    const double wm = omega_m / atom.gamma_p;
    const double dc = delta_c / atom.gamma_p;

    const cplx iu(0.0, 1.0);
    const cplx numerator = iu * eta * wp * wc2 * wm;
    const cplx f1 = 2.0 * iu * dc + wc2;
    const cplx f2 = 2.0 * iu * (1.0 - 2.0 * iu * wm) * (dc - wm) + wc2;
    const double scale = std::max(1.0, wc2);
    const bool f1_zero = std::abs(f1) < 1e-300 * scale;
    const bool f2_zero = std::abs(f2) < 1e-300 * scale;
    if (f1_zero || f2_zero)
        throw NumericalError(std::string("analytic_rho_plus: pole in denominator factor ") +
                             (f1_zero && f2_zero ? "1 and 2" : (f1_zero ? "1" : "2")));
    return numerator / (f1 * f2);
}

ModulationResult modulation(const FourierSolution& solution) {
    const cplx u = solution.rho(+1)(idx_g, idx_e);
    const cplx v = solution.rho(-1)(idx_g, idx_e);
    const double offset = solution.rho(0)(idx_g, idx_e).imag();
    std::vector<cplx> extra;
    for (int k = 2; k <= solution.order; ++k)
        extra.push_back(solution.rho(k)(idx_g, idx_e) -
                        std::conj(solution.rho(-k)(idx_g, idx_e)));
    return modulation_from_pair(u, v, offset, extra.empty() ? nullptr : &extra);
}

ModulationResult modulation_analytic(const AtomDriveParams& atom, double eta, double omega_m,
                                     double delta_c) {
    const cplx u = analytic_rho_plus(atom, eta, omega_m, delta_c);
    // rho_-^*(Dc) = rho_+(-Dc)
    const cplx v = std::conj(analytic_rho_plus(atom, eta, omega_m, -delta_c));
    const double offset = steady_state(atom)(idx_g, idx_e).imag();
    return modulation_from_pair(u, v, offset, nullptr);
}

double delta_max(const AtomDriveParams& atom, double omega_m) {
    if (!(omega_m > 0.0)) throw ValidationError("delta_max: omega_m must be positive");
    const double wc2 = std::norm(atom.omega_c / atom.gamma_p);
    const double wm = omega_m / atom.gamma_p;
    const double root = std::sqrt((1.0 - wc2) * (1.0 - wc2) + wc2 * wc2 / (wm * wm));
    return 0.5 * omega_m * (1.0 + wc2 - root);
}

double delta_max_approx(double omega_c, double omega_m) {
    if (!(omega_m > 0.0)) throw ValidationError("delta_max_approx: omega_m must be positive");
    return std::abs(omega_c * omega_c - 4.0 * omega_m * omega_m) / (4.0 * omega_m);
}

double delta_max_argmax(const AtomDriveParams& atom, double omega_m) {
    const double hi =
        1.2 * (atom.omega_c * atom.omega_c + 4.0 * omega_m * omega_m) / (4.0 * omega_m);
    const auto amp = [&](double dc) {
        const cplx d = analytic_rho_plus(atom, 1.0, omega_m, dc) -
                       analytic_rho_plus(atom, 1.0, omega_m, -dc);
        return std::abs(d);
    };
    const int n = 400;
    int best = 0;
    double best_val = -1.0;
    for (int i = 0; i < n; ++i) {
        const double dc = hi * i / (n - 1);
        const double v = amp(dc);
        if (v > best_val) { best_val = v; best = i; } // strict: ties keep smaller Delta_c
    }
    const double step = hi / (n - 1);
    const double lo_b = std::max(0.0, best * step - step);
    const double hi_b = std::min(hi, best * step + step);
    return golden_section_max(lo_b, hi_b, 1e-6 * omega_m, amp);
}

double gamma_eff(const AtomDriveParams& atom, double omega_m, const MirrorParams& mirror,
                 const OpticsParams& optics) {
    if (!(mirror.mass > 0.0)) throw ValidationError("gamma_eff: mirror mass must be positive");
    if (!(omega_m > 0.0)) throw ValidationError("gamma_eff: omega_m must be positive");
    if (atom.omega_p == 0.0) return 0.0; // no probe, no feedback
    const double d_opt = 6.0 * pi * optics.density * optics.length / (optics.k_p * optics.k_p);
    const double f0 = 2.0 * optics.w_p0 / speed_of_light;
    const double pref =
        optics.k_c * f0 * d_opt * atom.gamma_p / (mirror.mass * omega_m * atom.omega_p);
    // Analytic rho_+ is exactly linear in eta; evaluate at eta = 1 so the
    // result is the eta-independent rate.
    const cplx d = analytic_rho_plus(atom, 1.0, omega_m, atom.delta_c) -
                   analytic_rho_plus(atom, 1.0, omega_m, -atom.delta_c);
    return pref * d.real();
}

} // namespace eitmech
