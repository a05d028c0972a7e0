#include "eitmech/linalg.hpp"
#include "eitmech/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace eitmech {

Mat3 Mat3::identity() {
    Mat3 m;
    m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
    return m;
}

Mat3 Mat3::dagger() const {
    Mat3 m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            m(r, c) = std::conj((*this)(c, r));
    return m;
}

double Mat3::max_abs() const {
    double v = 0.0;
    for (const auto& z : a) v = std::max(v, std::abs(z));
    return v;
}

Mat3 operator+(const Mat3& x, const Mat3& y) {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m.a[i] = x.a[i] + y.a[i];
    return m;
}

Mat3 operator-(const Mat3& x, const Mat3& y) {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m.a[i] = x.a[i] - y.a[i];
    return m;
}

Mat3 operator*(const Mat3& x, const Mat3& y) {
    Mat3 m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            cplx s = 0.0;
            for (int k = 0; k < 3; ++k) s += x(r, k) * y(k, c);
            m(r, c) = s;
        }
    return m;
}

Mat3 operator*(cplx s, const Mat3& x) {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m.a[i] = s * x.a[i];
    return m;
}

Mat3 operator*(double s, const Mat3& x) { return cplx(s, 0.0) * x; }

double hermiticity_defect(const Mat3& x) {
    double v = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            v = std::max(v, std::abs(x(r, c) - std::conj(x(c, r))));
    return v;
}

Mat3 ketbra(int r, int c) {
    Mat3 m;
    m(r, c) = 1.0;
    return m;
}

std::array<cplx, 9> vectorize(const Mat3& x) {
    std::array<cplx, 9> v;
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r)
            v[3 * c + r] = x(r, c);
    return v;
}

Mat3 unvectorize(const std::array<cplx, 9>& v) {
    Mat3 m;
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < 3; ++r)
            m(r, c) = v[3 * c + r];
    return m;
}

std::vector<cplx> CMatrix::apply(const std::vector<cplx>& x) const {
    std::vector<cplx> y(n, cplx(0.0));
    for (int r = 0; r < n; ++r) {
        cplx s = 0.0;
        const cplx* row = a.data() + static_cast<size_t>(r) * n;
        for (int c = 0; c < n; ++c) s += row[c] * x[c];
        y[r] = s;
    }
    return y;
}

namespace {

// Returns the permutation sign-free LU factorization in place; perm[i] is the
// pivot row chosen at step i. Throws if a pivot falls below rel_tol times the
// matrix scale.
void lu_factor(CMatrix& m, std::vector<int>& perm, const std::string& context,
               double* min_pivot_ratio) {
    const int n = m.n;
    perm.resize(n);
    double scale = 0.0;
    for (const auto& z : m.a) scale = std::max(scale, std::abs(z));
    if (scale == 0.0) throw NumericalError("lu_solve: zero matrix (" + context + ")");
    double min_ratio = 1.0;

    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(m(k, k));
        for (int r = k + 1; r < n; ++r) {
            const double v = std::abs(m(r, k));
            if (v > best) { best = v; piv = r; }
        }
        perm[k] = piv;
        if (piv != k)
            for (int c = 0; c < n; ++c) std::swap(m(k, c), m(piv, c));
        min_ratio = std::min(min_ratio, best / scale);
        if (best <= 1e-13 * scale) {
            if (min_pivot_ratio) { *min_pivot_ratio = min_ratio; return; }
            throw NumericalError("lu_solve: singular system, pivot " + std::to_string(k) +
                                 " ~ " + std::to_string(best / scale) + " of scale (" + context + ")");
        }
        const cplx inv = 1.0 / m(k, k);
        for (int r = k + 1; r < n; ++r) {
            const cplx f = m(r, k) * inv;
            m(r, k) = f;
            if (f != cplx(0.0))
                for (int c = k + 1; c < n; ++c) m(r, c) -= f * m(k, c);
        }
    }
    if (min_pivot_ratio) *min_pivot_ratio = min_ratio;
}

} // namespace

std::vector<cplx> lu_solve(CMatrix m, std::vector<cplx> rhs, const std::string& context) {
    const int n = m.n;
    if (static_cast<int>(rhs.size()) != n)
        throw ValidationError("lu_solve: rhs size mismatch (" + context + ")");
    std::vector<int> perm;
    lu_factor(m, perm, context, nullptr);
    // All interchanges first, then the unit-lower solve with the final L.
    for (int k = 0; k < n; ++k)
        if (perm[k] != k) std::swap(rhs[k], rhs[perm[k]]);
    for (int k = 0; k < n; ++k)
        for (int r = k + 1; r < n; ++r) rhs[r] -= m(r, k) * rhs[k];
    for (int r = n - 1; r >= 0; --r) {
        cplx s = rhs[r];
        for (int c = r + 1; c < n; ++c) s -= m(r, c) * rhs[c];
        rhs[r] = s / m(r, r);
    }
    return rhs;
}

double lu_min_pivot_ratio(CMatrix m) {
    std::vector<int> perm;
    double ratio = 0.0;
    lu_factor(m, perm, "pivot probe", &ratio);
    return ratio;
}

HermitianEigen3 hermitian_eigen3(const Mat3& h) {
    // Cyclic Jacobi with complex rotations; a 3x3 converges in a handful of sweeps.
    Mat3 a = h;
    Mat3 v = Mat3::identity();
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (int r = 0; r < 3; ++r)
            for (int c = r + 1; c < 3; ++c) off = std::max(off, std::abs(a(r, c)));
        const double diag = std::max({std::abs(a(0, 0)), std::abs(a(1, 1)), std::abs(a(2, 2)), 1e-300});
        if (off <= 1e-15 * std::max(diag, off)) break;

        for (int p = 0; p < 3; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                const cplx apq = a(p, q);
                if (std::abs(apq) == 0.0) continue;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                // Diagonalize the 2x2 [[app, apq],[apq*, aqq]] block.
                const double phase = std::arg(apq);
                const double g = std::abs(apq);
                const double tau = (aqq - app) / (2.0 * g);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double cth = 1.0 / std::sqrt(1.0 + t * t);
                const double sth = t * cth;
                const cplx s = sth * std::exp(cplx(0.0, phase));

                // Right-multiply by the rotation R with R(p,p)=c, R(q,q)=c,
                // R(p,q)=s, R(q,p)=-conj(s); then left-multiply by R^dagger.
                for (int k = 0; k < 3; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = cth * akp - std::conj(s) * akq;
                    a(k, q) = s * akp + cth * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = cth * apk - s * aqk;
                    a(q, k) = std::conj(s) * apk + cth * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    const cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = cth * vkp - std::conj(s) * vkq;
                    v(k, q) = s * vkp + cth * vkq;
                }
            }
        }
    }

    HermitianEigen3 out;
    std::array<int, 3> idx{0, 1, 2};
    std::array<double, 3> ev{a(0, 0).real(), a(1, 1).real(), a(2, 2).real()};
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return ev[i] < ev[j]; });
    for (int j = 0; j < 3; ++j) {
        out.values[j] = ev[idx[j]];
        for (int r = 0; r < 3; ++r) out.vectors(r, j) = v(r, idx[j]);
    }
    return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    if (n != y.size() || n < 2) throw ValidationError("fit_line: need >= 2 matched points");
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw ValidationError("fit_line: degenerate abscissa");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += r * r;
    }
    f.r2 = (syy == 0.0) ? 1.0 : 1.0 - ss_res / syy;
    f.slope_stderr = (n > 2) ? std::sqrt(ss_res / ((n - 2) * sxx)) : 0.0;
    return f;
}

double golden_section_max(double lo, double hi, double tol,
                          const std::function<double(double)>& f) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 >= f2) { // ties move left: break toward smaller argument
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

} // namespace eitmech
