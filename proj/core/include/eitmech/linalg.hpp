#pragma once

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace eitmech {

using cplx = std::complex<double>;

// 3x3 complex matrix, row-major. Small enough that everything stays by value.
struct Mat3 {
    std::array<cplx, 9> a{};

    cplx& operator()(int r, int c) { return a[3 * r + c]; }
    const cplx& operator()(int r, int c) const { return a[3 * r + c]; }

    static Mat3 zero() { return Mat3{}; }
    static Mat3 identity();

    Mat3 dagger() const;
    cplx trace() const { return a[0] + a[4] + a[8]; }
    double max_abs() const;
};

Mat3 operator+(const Mat3& x, const Mat3& y);
Mat3 operator-(const Mat3& x, const Mat3& y);
Mat3 operator*(const Mat3& x, const Mat3& y);
Mat3 operator*(cplx s, const Mat3& x);
Mat3 operator*(double s, const Mat3& x);

inline Mat3 commutator(const Mat3& x, const Mat3& y) { return x * y - y * x; }

// max_ij |x_ij - x_ij^dagger|
double hermiticity_defect(const Mat3& x);

// |r><c| in the fixed (g,s,e) basis order
Mat3 ketbra(int r, int c);

// Column-major stacking of a 3x3 matrix; element (r,c) lands at index 3c+r.
std::array<cplx, 9> vectorize(const Mat3& x);
Mat3 unvectorize(const std::array<cplx, 9>& v);

// Dense complex n x n matrix for the vectorized Liouvillian and the sideband
// hierarchy blocks. Row-major.
struct CMatrix {
    int n = 0;
    std::vector<cplx> a;

    CMatrix() = default;
    explicit CMatrix(int size) : n(size), a(static_cast<size_t>(size) * size) {}

    cplx& operator()(int r, int c) { return a[static_cast<size_t>(r) * n + c]; }
    const cplx& operator()(int r, int c) const { return a[static_cast<size_t>(r) * n + c]; }

    std::vector<cplx> apply(const std::vector<cplx>& x) const;
};

// LU solve with partial pivoting, in place on a copy. Throws NumericalError on a
// (near-)singular pivot; `context` goes into the message so callers can name the
// offending block.
std::vector<cplx> lu_solve(CMatrix m, std::vector<cplx> rhs, const std::string& context);

// Smallest pivot magnitude encountered relative to the largest row scale; used to
// detect structural degeneracies before trusting a solution.
double lu_min_pivot_ratio(CMatrix m);

// Eigen-decomposition of a Hermitian 3x3 by cyclic complex Jacobi rotations.
// Eigenvalues ascending; columns of `vectors` are the matching eigenvectors.
struct HermitianEigen3 {
    std::array<double, 3> values{};
    Mat3 vectors; // vectors(:,j) belongs to values[j]
};
HermitianEigen3 hermitian_eigen3(const Mat3& h);

// Straight-line least squares y = a + b x; also reports R^2 and the standard
// error of the slope.
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 1.0;
    double slope_stderr = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Golden-section maximizer on [lo, hi] for a unimodal bracket; tol is the final
// interval width.
double golden_section_max(double lo, double hi, double tol,
                          const std::function<double(double)>& f);

} // namespace eitmech
