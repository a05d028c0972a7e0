#include "eitmech/lambda_system.hpp"
#include "eitmech/errors.hpp"

#include <cmath>

namespace eitmech {

namespace {

// vec index of element (r,c) under column-major stacking
constexpr int vec_idx(int r, int c) { return 3 * c + r; }

// Scaled generator: everything divided by Gamma_p, so solves are O(1)
// conditioned regardless of the absolute frequency scale.
AtomDriveParams scaled(const AtomDriveParams& atom) {
    AtomDriveParams a;
    a.omega_p = atom.omega_p / atom.gamma_p;
    a.omega_c = atom.omega_c / atom.gamma_p;
    a.delta_c = atom.delta_c / atom.gamma_p;
    a.gamma_p = 1.0;
    return a;
}

// L = sqrt(Gamma) |g><e|: dissipator contributes Gamma * (rho_ee |g><g|
// - {|e><e|, rho}/2).
Mat3 dissipator(const Mat3& rho, double gamma) {
    Mat3 d;
    d(idx_g, idx_g) = gamma * rho(idx_e, idx_e);
    for (int k = 0; k < 3; ++k) {
        d(idx_e, k) -= 0.5 * gamma * rho(idx_e, k);
        d(k, idx_e) -= 0.5 * gamma * rho(k, idx_e);
    }
    return d;
}

// Populate into `m` the 9x9 action rho -> +i[h, rho] + gamma * dissipator.
CMatrix build_liouvillian(const Mat3& h, double gamma) {
    CMatrix m(9);
    const cplx iu(0.0, 1.0);
    // vec(H rho) = (I (x) H) vec, vec(rho H) = (H^T (x) I) vec, column-major.
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r)
            for (int k = 0; k < 3; ++k) {
                m(vec_idx(r, c), vec_idx(k, c)) += iu * h(r, k);
                m(vec_idx(r, c), vec_idx(r, k)) -= iu * h(k, c);
            }
    // L rho L^dag with L = |g><e|: picks rho_ee into (g,g)
    m(vec_idx(idx_g, idx_g), vec_idx(idx_e, idx_e)) += gamma;
    // -{|e><e|, rho}/2
    for (int k = 0; k < 3; ++k) {
        m(vec_idx(idx_e, k), vec_idx(idx_e, k)) -= 0.5 * gamma;
        m(vec_idx(k, idx_e), vec_idx(k, idx_e)) -= 0.5 * gamma;
    }
    return m;
}

} // namespace

cplx control_factor(double z_m, double k_c, ControlFactorMode mode) {
    const double phase = k_c * z_m;
    if (mode == ControlFactorMode::exact_exponential)
        return std::polar(1.0, phase);
    return cplx(1.0, phase);
}

Mat3 hamiltonian(const AtomDriveParams& atom, cplx cf) {
    Mat3 h;
    const cplx hes = 0.5 * atom.omega_c * cf;
    h(idx_e, idx_s) = hes;
    h(idx_s, idx_e) = std::conj(hes);
    h(idx_e, idx_g) = -0.5 * atom.omega_p;
    h(idx_g, idx_e) = -0.5 * atom.omega_p;
    h(idx_s, idx_s) = atom.delta_c;
    return h;
}

Mat3 lindblad_apply(const Mat3& rho, const AtomDriveParams& atom, cplx cf) {
    const Mat3 h = hamiltonian(atom, cf);
    return cplx(0.0, 1.0) * commutator(h, rho) + dissipator(rho, atom.gamma_p);
}

CMatrix liouvillian_matrix(const AtomDriveParams& atom, cplx cf) {
    return build_liouvillian(hamiltonian(atom, cf), atom.gamma_p);
}

Mat3 steady_state(const AtomDriveParams& atom) {
    if (!(atom.gamma_p > 0.0)) throw ValidationError("steady_state: gamma_p must be positive");
    if (atom.omega_p == 0.0 && atom.omega_c == 0.0)
        throw NumericalError(
            "steady_state: degenerate steady-state manifold at Omega_p = Omega_c = 0 "
            "(population split between |g> and |s> is arbitrary)");

    const AtomDriveParams a = scaled(atom);

    if (atom.omega_c == 0.0) {
        // |s> is fully decoupled: a second stationary state |s><s| makes the
        // bordered system singular. Resolve on the {g,e} manifold.
        const CMatrix full = liouvillian_matrix(a, cplx(1.0));
        const int sub[4] = {vec_idx(idx_g, idx_g), vec_idx(idx_e, idx_g),
                            vec_idx(idx_g, idx_e), vec_idx(idx_e, idx_e)};
        CMatrix m(4);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) m(r, c) = full(sub[r], sub[c]);
        for (int c = 0; c < 4; ++c) m(0, c) = 0.0;
        m(0, 0) = 1.0;
        m(0, 3) = 1.0; // trace over the manifold
        std::vector<cplx> rhs(4, cplx(0.0));
        rhs[0] = 1.0;
        const auto x = lu_solve(m, rhs, "two-level steady state");
        Mat3 rho;
        rho(idx_g, idx_g) = x[0];
        rho(idx_e, idx_g) = x[1];
        rho(idx_g, idx_e) = x[2];
        rho(idx_e, idx_e) = x[3];
        return rho;
    }

    CMatrix m = build_liouvillian(hamiltonian(a, cplx(1.0)), 1.0);
    // Trace is always a left null vector; replacing one redundant row with the
    // trace constraint leaves a singular system only if the stationary
    // manifold is genuinely degenerate.
    CMatrix bordered = m;
    for (int c = 0; c < 9; ++c) bordered(0, c) = 0.0;
    bordered(0, vec_idx(0, 0)) = 1.0;
    bordered(0, vec_idx(1, 1)) = 1.0;
    bordered(0, vec_idx(2, 2)) = 1.0;
    const double pivot_ratio = lu_min_pivot_ratio(bordered);
    if (pivot_ratio <= 1e-12)
        throw NumericalError("steady_state: bordered system singular (pivot ratio " +
                             std::to_string(pivot_ratio) + "); multiple steady states");
    std::vector<cplx> rhs(9, cplx(0.0));
    rhs[0] = 1.0;
    const auto x = lu_solve(bordered, rhs, "steady state");

    std::array<cplx, 9> v;
    for (int i = 0; i < 9; ++i) v[i] = x[i];
    Mat3 rho = unvectorize(v);

    // Residual of the unreplaced system, in Gamma_p units.
    const auto res = m.apply(x);
    double rmax = 0.0;
    for (int i = 1; i < 9; ++i) rmax = std::max(rmax, std::abs(res[i]));
    if (rmax > 1e-10)
        throw NumericalError("steady_state: residual " + std::to_string(rmax) +
                             " exceeds 1e-10 (scaled units)");
    return rho;
}

DressedSpectrum dressed_gaps(const AtomDriveParams& atom) {
    // Scale by Gamma_p for conditioning, unscale the eigenvalues on return.
    const AtomDriveParams a = scaled(atom);
    const HermitianEigen3 eig = hermitian_eigen3(hamiltonian(a, cplx(1.0)));

    DressedSpectrum out;
    for (int j = 0; j < 3; ++j) out.energies[j] = eig.values[j] * atom.gamma_p;
    out.states = eig.vectors;

    const double norm = std::hypot(atom.omega_c, atom.omega_p);
    std::array<cplx, 3> target{1.0, 0.0, 0.0}; // limit of the dark state at Omega_c > 0
    if (norm > 0.0) {
        target = {atom.omega_c / norm, -atom.omega_p / norm, 0.0};
    }
    double best = -1.0;
    for (int j = 0; j < 3; ++j) {
        cplx ov = 0.0;
        for (int r = 0; r < 3; ++r) ov += std::conj(target[r]) * eig.vectors(r, j);
        const double w = std::abs(ov);
        if (w > best + 1e-12) {
            best = w;
            out.dark_index = j;
            out.overlap_tie = false;
        } else if (std::abs(w - best) <= 1e-12) {
            out.overlap_tie = true; // keep the lower index
        }
    }

    int n = 0;
    for (int j = 0; j < 3; ++j)
        if (j != out.dark_index) out.gaps[n++] = std::abs(out.energies[out.dark_index] - out.energies[j]);
    if (out.gaps[0] > out.gaps[1]) std::swap(out.gaps[0], out.gaps[1]);
    return out;
}

StateCheck check_density_matrix(const Mat3& rho) {
    StateCheck c;
    c.trace_defect = std::abs(rho.trace() - cplx(1.0));
    c.herm_defect = hermiticity_defect(rho);
    const HermitianEigen3 eig = hermitian_eigen3(rho);
    c.min_eigenvalue = eig.values[0];
    return c;
}

} // namespace eitmech
