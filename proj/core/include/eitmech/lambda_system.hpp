#pragma once

#include "eitmech/linalg.hpp"
#include "eitmech/params.hpp"

namespace eitmech {

// Fixed basis order throughout: |g> = 0, |s> = 1, |e> = 2.
inline constexpr int idx_g = 0;
inline constexpr int idx_s = 1;
inline constexpr int idx_e = 2;

// Multiplier on Omega_c from the mirror displacement: exp(i k_c z_m) reflected
// off the moving surface, or its small-displacement linearization 1 + i k_c z_m.
cplx control_factor(double z_m, double k_c, ControlFactorMode mode);

// H/hbar in rad/s: (e,s) = Omega_c*cf/2, (e,g) = -Omega_p/2, (s,s) = Delta_c,
// plus Hermitian conjugates. The probe phase is taken real; all drive phase
// freedom lives in the control factor.
Mat3 hamiltonian(const AtomDriveParams& atom, cplx cf);

// Right-hand side of the master equation, d(rho)/dt in 1/s:
//   +i [H, rho] + L rho L^dag - {L^dag L, rho}/2,   L = sqrt(Gamma_p) |g><e|.
// The +i commutator sign follows the source convention used by every formula
// downstream of it.
Mat3 lindblad_apply(const Mat3& rho, const AtomDriveParams& atom, cplx cf);

// 9x9 matrix acting on the column-major vectorization of rho, in rad/s.
CMatrix liouvillian_matrix(const AtomDriveParams& atom, cplx cf);

// Unmodulated (cf = 1) steady state with trace 1, from a bordered linear solve.
// Omega_c = 0 leaves |s> fully decoupled; that degeneracy is resolved by
// restricting to the {g,e} manifold. Omega_p = Omega_c = 0 is reported as an
// error (population split between |g> and |s> is arbitrary).
Mat3 steady_state(const AtomDriveParams& atom);

struct DressedSpectrum {
    std::array<double, 3> energies{}; // E_j / hbar, ascending, rad/s
    Mat3 states;                      // columns = eigenvectors
    int dark_index = 0;               // eigenvector closest to the EIT dark state
    std::array<double, 2> gaps{};     // |E_dark - E_j| / hbar for j != dark, ascending
    bool overlap_tie = false;         // dark-state identification was ambiguous
};

// Eigen-decomposition of the unmodulated Hamiltonian. The dark-like state is
// the eigenvector of largest overlap with (Omega_c, -Omega_p, 0)/norm; ties
// break toward the lowest eigenvalue index.
DressedSpectrum dressed_gaps(const AtomDriveParams& atom);

// Density-matrix sanity numbers used by integration checks and tests.
struct StateCheck {
    double trace_defect = 0.0;   // |tr(rho) - 1|
    double herm_defect = 0.0;    // max |rho - rho^dag|
    double min_eigenvalue = 0.0; // most negative eigenvalue
};
StateCheck check_density_matrix(const Mat3& rho);

} // namespace eitmech
