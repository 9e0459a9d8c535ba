#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "matrix.hpp"

namespace covkit {

/// Eigenvalues of a real matrix; complex values appear in conjugate pairs.
using Spectrum = std::vector<std::complex<double>>;

namespace detail {

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// In-place partial-pivot LU of `a`; `b` is overwritten with the solution of
/// a X = b. Throws SolveError on an exactly zero pivot.
inline void lu_solve_in_place(Matrix& a, Matrix& b, const char* context) {
    const std::size_t n = a.rows();
    if (!a.is_square())
        throw ShapeError(std::string(context) + ": coefficient matrix " + a.shape_string() +
                         " is not square");
    if (b.rows() != n)
        throw ShapeError(std::string(context) + ": right-hand side " + b.shape_string() +
                         " does not match " + a.shape_string());
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0)
            throw SolveError(std::string(context) + ": singular system, zero pivot at column " +
                             std::to_string(k));
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(piv, j));
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            a(i, k) = f;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
        }
    }
    for (std::size_t kk = n; kk-- > 0;) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = b(kk, j);
            for (std::size_t i = kk + 1; i < n; ++i) s -= a(kk, i) * b(i, j);
            b(kk, j) = s / a(kk, kk);
        }
    }
}

} // namespace detail

/// Solve A X = B for a square real A by LU with partial pivoting.
inline Matrix solve_linear(Matrix a, Matrix b, const char* context = "solve_linear") {
    detail::lu_solve_in_place(a, b, context);
    return b;
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix,
/// or nullopt when a pivot falls below tol_rel times the largest diagonal
/// entry. Callers treat nullopt as "numerically not PD" and fall back.
inline std::optional<Matrix> try_cholesky(const Matrix& a, double tol_rel = 1e-12) {
    if (!a.is_square())
        throw ShapeError("try_cholesky: " + a.shape_string() + " is not square");
    const std::size_t n = a.rows();
    double dmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, a(i, i));
    if (!(dmax > 0.0)) return std::nullopt;
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > tol_rel * dmax)) return std::nullopt;
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

/// Solve L X = B by forward substitution, L lower triangular.
inline Matrix solve_lower_triangular(const Matrix& l, const Matrix& b) {
    if (!l.is_square() || l.rows() != b.rows())
        throw ShapeError("solve_lower_triangular: " + l.shape_string() + " vs " +
                         b.shape_string());
    Matrix x = b;
    const std::size_t n = l.rows();
    for (std::size_t col = 0; col < b.cols(); ++col)
        for (std::size_t i = 0; i < n; ++i) {
            double s = x(i, col);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, col);
            if (l(i, i) == 0.0)
                throw SolveError("solve_lower_triangular: zero pivot at row " +
                                 std::to_string(i));
            x(i, col) = s / l(i, i);
        }
    return x;
}

/// Determinant via LU with partial pivoting; 0 for exactly singular input.
inline double determinant(Matrix a) {
    if (!a.is_square())
        throw ShapeError("determinant: " + a.shape_string() + " is not square");
    const std::size_t n = a.rows();
    double det = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0) return 0.0;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            det = -det;
        }
        det *= a(k, k);
        const double inv = 1.0 / a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a(i, k) * inv;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return det;
}

/// Solve A X = B for square complex A (frequency-response inner solve).
inline ComplexMatrix solve_complex_linear(ComplexMatrix a, ComplexMatrix b) {
    const std::size_t n = a.rows();
    if (!a.is_square())
        throw ShapeError("solve_complex_linear: " + a.shape_string() + " is not square");
    if (b.rows() != n)
        throw ShapeError("solve_complex_linear: rhs " + b.shape_string() + " does not match " +
                         a.shape_string());
    using C = std::complex<double>;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(a(i, k));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (best == 0.0)
            throw SolveError("solve_complex_linear: singular system, zero pivot at column " +
                             std::to_string(k));
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(piv, j));
        }
        const C inv = 1.0 / a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const C f = a(i, k) * inv;
            if (f == C{}) continue;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
        }
    }
    for (std::size_t kk = n; kk-- > 0;) {
        const C inv = 1.0 / a(kk, kk);
        for (std::size_t j = 0; j < b.cols(); ++j) {
            C s = b(kk, j);
            for (std::size_t i = kk + 1; i < n; ++i) s -= a(kk, i) * b(i, j);
            b(kk, j) = s * inv;
        }
    }
    return b;
}

/// @brief Matrix exponential e^{M t} by scaling and squaring with the
/// order-13 Pade approximant.
///
/// The scaling power is chosen from the 1-norm of M t against the standard
/// double-precision order-13 threshold, so the approximant is always
/// evaluated in its accurate range.
inline Matrix expm(const Matrix& m, double t) {
    if (!m.is_square()) throw ShapeError("expm: " + m.shape_string() + " is not square");
    if (!std::isfinite(t)) throw InputError("expm: time argument is not finite");
    const std::size_t n = m.rows();
    if (n == 0) return Matrix();

    Matrix a = m * t;
    a.ensure_finite("expm: scaled input M*t");

    // Backward-error bound threshold for the [13/13] Pade approximant.
    constexpr double theta13 = 5.371920351148152;
    constexpr double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                              1187353796428800.0,  129060195264000.0,   10559470521600.0,
                              670442572800.0,      33522128640.0,       1323241920.0,
                              40840800.0,          960960.0,            16380.0,
                              182.0,               1.0};

    int squarings = 0;
    const double nrm = a.one_norm();
    if (nrm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
        a *= std::ldexp(1.0, -squarings);
    }

    const Matrix ident = Matrix::identity(n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a2 * a4;

    Matrix u = a * (a6 * (a6 * b[13] + a4 * b[11] + a2 * b[9]) + a6 * b[7] + a4 * b[5] +
                    a2 * b[3] + ident * b[1]);
    Matrix v = a6 * (a6 * b[12] + a4 * b[10] + a2 * b[8]) + a6 * b[6] + a4 * b[4] + a2 * b[2] +
               ident * b[0];

    Matrix f = solve_linear(v - u, v + u, "expm: Pade denominator");
    for (int i = 0; i < squarings; ++i) f = f * f;
    for (double x : f.data())
        if (!std::isfinite(x))
            throw NumericError("expm: result overflowed the representable range");
    return f;
}

namespace detail {

/// Parlett-Reinsch balancing with radix-2 scale factors; diagonal similarity
/// only, so eigenvalues are preserved exactly.
inline void balance_in_place(Matrix& a) {
    const std::size_t n = a.rows();
    constexpr double radix = 2.0;
    constexpr double radix2 = radix * radix;
    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0;
            double c = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            double f = 1.0;
            double g = r / radix;
            while (c < g) {
                f *= radix;
                c *= radix2;
            }
            g = r * radix;
            while (c >= g) {
                f /= radix;
                c /= radix2;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                const double ginv = 1.0 / f;
                for (std::size_t j = 0; j < n; ++j) a(i, j) *= ginv;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form (eigenvalues only, no
/// transform accumulation).
inline void hessenberg_in_place(Matrix& a) {
    const std::size_t n = a.rows();
    if (n < 3) return;
    std::vector<double> v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double nrm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) nrm += a(i, k) * a(i, k);
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) continue;
        const double alpha = (a(k + 1, k) >= 0.0) ? -nrm : nrm;
        double beta = 0.0;
        v[k + 1] = a(k + 1, k) - alpha;
        beta += v[k + 1] * v[k + 1];
        for (std::size_t i = k + 2; i < n; ++i) {
            v[i] = a(i, k);
            beta += v[i] * v[i];
        }
        if (beta == 0.0) continue;
        const double tau = 2.0 / beta;
        // Left: A <- (I - tau v v^T) A on rows k+1..n-1.
        for (std::size_t j = k; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a(i, j);
            s *= tau;
            for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= v[i] * s;
        }
        // Right: A <- A (I - tau v v^T) on columns k+1..n-1.
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
            s *= tau;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= s * v[j];
        }
        a(k + 1, k) = alpha;
        for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
}

/// Eigenvalues of a 2x2 block, split stably into a real or conjugate pair.
inline void eig_2x2(double a, double b, double c, double d, Spectrum& out) {
    const double p = 0.5 * (a + d);
    const double det = a * d - b * c;
    const double disc = p * p - det;
    if (disc >= 0.0) {
        const double q = std::sqrt(disc);
        const double l1 = (p >= 0.0) ? p + q : p - q;
        const double l2 = (l1 != 0.0) ? det / l1 : p - q;
        out.emplace_back(l1, 0.0);
        out.emplace_back(l2, 0.0);
    } else {
        const double q = std::sqrt(-disc);
        out.emplace_back(p, q);
        out.emplace_back(p, -q);
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (destroyed).
inline Spectrum eig_hessenberg(Matrix& h) {
    const std::size_t n = h.rows();
    Spectrum eig;
    eig.reserve(n);
    if (n == 0) return eig;

    long hi = static_cast<long>(n) - 1;
    int its = 0;
    auto H = [&h](long i, long j) -> double& {
        return h(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    };

    while (hi >= 0) {
        // Find the active block [lo..hi] by scanning for a negligible
        // subdiagonal entry.
        long lo = hi;
        while (lo > 0) {
            double s = std::abs(H(lo - 1, lo - 1)) + std::abs(H(lo, lo));
            if (s == 0.0) s = 1.0;
            if (std::abs(H(lo, lo - 1)) <= kEps * s) {
                H(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }

        if (lo == hi) {
            eig.emplace_back(H(hi, hi), 0.0);
            --hi;
            its = 0;
            continue;
        }
        if (lo == hi - 1) {
            eig_2x2(H(hi - 1, hi - 1), H(hi - 1, hi), H(hi, hi - 1), H(hi, hi), eig);
            hi -= 2;
            its = 0;
            continue;
        }

        if (++its > 30)
            throw SolveError("eigenvalues: QR iteration failed to converge on a block of size " +
                             std::to_string(hi - lo + 1));

        // Double shift from the trailing 2x2, with the LAPACK-style
        // exceptional shift every 10 stalled iterations.
        double sum, prod;
        if (its == 10 || its == 20) {
            const double e = std::abs(H(hi, hi - 1)) + std::abs(H(hi - 1, hi - 2));
            const double h11 = 0.75 * e + H(hi, hi);
            sum = 2.0 * h11;
            prod = h11 * h11 + 0.4375 * e * e;
        } else {
            sum = H(hi - 1, hi - 1) + H(hi, hi);
            prod = H(hi - 1, hi - 1) * H(hi, hi) - H(hi - 1, hi) * H(hi, hi - 1);
        }

        // First column of (H - s1)(H - s2) e1 restricted to the block.
        double x = H(lo, lo) * H(lo, lo) + H(lo, lo + 1) * H(lo + 1, lo) - sum * H(lo, lo) + prod;
        double y = H(lo + 1, lo) * (H(lo, lo) + H(lo + 1, lo + 1) - sum);
        double z = (lo + 2 <= hi) ? H(lo + 1, lo) * H(lo + 2, lo + 1) : 0.0;

        for (long k = lo; k <= hi - 2; ++k) {
            // Householder reflector annihilating (y, z) under x.
            const double nrm = std::sqrt(x * x + y * y + z * z);
            if (nrm != 0.0) {
                const double alpha = (x >= 0.0) ? -nrm : nrm;
                double v0 = x - alpha;
                double v1 = y;
                double v2 = z;
                const double beta = v0 * v0 + v1 * v1 + v2 * v2;
                if (beta != 0.0) {
                    const double tau = 2.0 / beta;
                    const long cl = (k > lo) ? k - 1 : lo;
                    for (long j = cl; j <= hi; ++j) {
                        const double s = tau * (v0 * H(k, j) + v1 * H(k + 1, j) + v2 * H(k + 2, j));
                        H(k, j) -= v0 * s;
                        H(k + 1, j) -= v1 * s;
                        H(k + 2, j) -= v2 * s;
                    }
                    const long rm = std::min(k + 3, hi);
                    for (long i = lo; i <= rm; ++i) {
                        const double s = tau * (v0 * H(i, k) + v1 * H(i, k + 1) + v2 * H(i, k + 2));
                        H(i, k) -= s * v0;
                        H(i, k + 1) -= s * v1;
                        H(i, k + 2) -= s * v2;
                    }
                }
            }
            x = H(k + 1, k);
            y = H(k + 2, k);
            z = (k + 3 <= hi) ? H(k + 3, k) : 0.0;
        }

        // Final 2-vector reflector on rows hi-1, hi.
        {
            const double nrm = std::sqrt(x * x + y * y);
            if (nrm != 0.0) {
                const double alpha = (x >= 0.0) ? -nrm : nrm;
                double v0 = x - alpha;
                double v1 = y;
                const double beta = v0 * v0 + v1 * v1;
                if (beta != 0.0) {
                    const double tau = 2.0 / beta;
                    for (long j = hi - 2; j <= hi; ++j) {
                        const double s = tau * (v0 * H(hi - 1, j) + v1 * H(hi, j));
                        H(hi - 1, j) -= v0 * s;
                        H(hi, j) -= v1 * s;
                    }
                    for (long i = lo; i <= hi; ++i) {
                        const double s = tau * (v0 * H(i, hi - 1) + v1 * H(i, hi));
                        H(i, hi - 1) -= s * v0;
                        H(i, hi) -= s * v1;
                    }
                }
            }
        }
    }
    return eig;
}

} // namespace detail

/// @brief All eigenvalues of a square real matrix.
///
/// Balancing, Householder Hessenberg reduction, then Francis double-shift QR
/// with deflation. For real input the result is closed under conjugation.
inline Spectrum eigenvalues(const Matrix& a) {
    if (!a.is_square()) throw ShapeError("eigenvalues: " + a.shape_string() + " is not square");
    Matrix work = a;
    work.ensure_finite("eigenvalues input");
    detail::balance_in_place(work);
    detail::hessenberg_in_place(work);
    return detail::eig_hessenberg(work);
}

/// Verdict of the Hurwitz test with the numbers behind it.
struct StabilityReport {
    bool hurwitz = true;
    double max_real = -std::numeric_limits<double>::infinity();
    std::complex<double> dominant{};
    double threshold = 0.0;
};

/// A is declared Hurwitz iff max Re(lambda) < -1e-9 * max(1, ||A||_F).
inline StabilityReport assess_stability(const Matrix& a) {
    StabilityReport rep;
    rep.threshold = 1e-9 * std::max(1.0, a.frobenius_norm());
    if (a.rows() == 0) return rep;
    for (const auto& lambda : eigenvalues(a)) {
        if (lambda.real() > rep.max_real) {
            rep.max_real = lambda.real();
            rep.dominant = lambda;
        }
    }
    rep.hurwitz = rep.max_real < -rep.threshold;
    return rep;
}

inline void require_hurwitz(const Matrix& a, const std::string& context) {
    const StabilityReport rep = assess_stability(a);
    if (!rep.hurwitz)
        throw StabilityError(context + ": dynamics matrix is not Hurwitz, eigenvalue " +
                             std::to_string(rep.dominant.real()) + (rep.dominant.imag() >= 0 ? "+" : "-") +
                             std::to_string(std::abs(rep.dominant.imag())) + "j has real part " +
                             std::to_string(rep.max_real) + " >= -" + std::to_string(rep.threshold));
}

/// @brief Solve A P + P A^T + Q = 0 by the vectorized Kronecker system.
///
/// The n^2 x n^2 linear system (I (x) A + A (x) I) vec(P) = -vec(Q) is dense
/// LU-solved; fine at desk scale. Solvability requires no eigenvalue pair of
/// A summing to zero, which holds whenever A is Hurwitz.
inline Matrix solve_lyapunov(const Matrix& a, const Matrix& q, double tol = 1e-10) {
    if (!a.is_square()) throw ShapeError("solve_lyapunov: A " + a.shape_string() + " is not square");
    const std::size_t n = a.rows();
    if (q.rows() != n || q.cols() != n)
        throw ShapeError("solve_lyapunov: Q " + q.shape_string() + " does not match A " +
                         a.shape_string());
    if (n == 0) return Matrix();

    double asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            asym = std::max(asym, std::abs(q(i, j) - q(j, i)));
    if (asym > tol * std::max(1.0, q.max_abs()))
        throw InputError("solve_lyapunov: Q is asymmetric by " + std::to_string(asym) +
                         ", beyond tolerance");

    // Name the nearly-zero eigenvalue sum up front; it is the honest
    // diagnosis when the vectorized system is singular.
    const Spectrum lam = eigenvalues(a);
    double scale = 1.0;
    for (const auto& l : lam) scale = std::max(scale, std::abs(l));
    double min_sum = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double s = std::abs(lam[i] + lam[j]);
            if (s < min_sum) {
                min_sum = s;
                bi = i;
                bj = j;
            }
        }
    if (min_sum <= 1e-12 * scale)
        throw SolveError("solve_lyapunov: eigenvalue sum lambda_" + std::to_string(bi) +
                         " + lambda_" + std::to_string(bj) + " = " + std::to_string(min_sum) +
                         " is numerically zero; the Lyapunov operator is singular");

    const Matrix ident = Matrix::identity(n);
    Matrix k = kron(ident, a) + kron(a, ident);

    // Column-stacked vec: entry (i, j) lives at index j*n + i.
    Matrix rhs(n * n, 1);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) rhs(j * n + i, 0) = -q(i, j);

    Matrix x = solve_linear(std::move(k), std::move(rhs), "solve_lyapunov: vectorized system");

    Matrix p(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) p(i, j) = x(j * n + i, 0);
    return symmetrize(p);
}

/// Result of a symmetric eigendecomposition; eigenvalues ascending, columns
/// of `vectors` are the matching orthonormal eigenvectors.
struct SymmetricEigen {
    std::vector<double> values;
    Matrix vectors;
};

/// @brief Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Used for PSD checks, eigenvalue clipping, and matrix square roots where
/// guaranteed-orthogonal vectors matter more than speed.
inline SymmetricEigen jacobi_eigen(const Matrix& s_in) {
    if (!s_in.is_square())
        throw ShapeError("jacobi_eigen: " + s_in.shape_string() + " is not square");
    const std::size_t n = s_in.rows();
    Matrix s = symmetrize(s_in);
    Matrix v = Matrix::identity(n);
    const double scale = std::max(s.max_abs(), 1e-300);

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(s(p, q)));
        if (off <= 1e-15 * scale) break;
        if (sweep == 63)
            throw SolveError("jacobi_eigen: failed to converge in 64 sweeps, off-diagonal " +
                             std::to_string(off));
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = s(p, q);
                if (std::abs(apq) <= 1e-18 * scale) continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
                const double t = ((theta >= 0.0) ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double skp = s(k, p);
                    const double skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double spk = s(p, k);
                    const double sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }

    SymmetricEigen out;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = s(i, i);
    // Selection-sort ascending, permuting vector columns alongside.
    out.vectors = v;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t m = i;
        for (std::size_t j = i + 1; j < n; ++j)
            if (out.values[j] < out.values[m]) m = j;
        if (m != i) {
            std::swap(out.values[i], out.values[m]);
            for (std::size_t k = 0; k < n; ++k) std::swap(out.vectors(k, i), out.vectors(k, m));
        }
    }
    return out;
}

/// Symmetric PSD square root via the spectral decomposition. Eigenvalues in
/// (-clip_tol, 0) are treated as exact zeros; anything more negative is a
/// genuine PSD violation and throws.
inline Matrix spectral_sqrt_psd(const Matrix& s, double clip_tol, const std::string& context) {
    SymmetricEigen e = jacobi_eigen(s);
    const std::size_t n = s.rows();
    for (std::size_t i = 0; i < n; ++i) {
        if (e.values[i] < -clip_tol)
            throw NumericError(context + ": matrix is not PSD, eigenvalue " +
                               std::to_string(e.values[i]) + " below -" + std::to_string(clip_tol));
        if (e.values[i] < 0.0) e.values[i] = 0.0;
    }
    Matrix root(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += e.vectors(i, k) * std::sqrt(e.values[k]) * e.vectors(j, k);
            root(i, j) = acc;
        }
    return root;
}

inline double min_eigenvalue_symmetric(const Matrix& s) {
    if (s.rows() == 0) return 0.0;
    return jacobi_eigen(s).values.front();
}

} // namespace covkit
