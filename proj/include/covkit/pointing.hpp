#pragma once

#include <covkit/errors.hpp>
#include <covkit/linalg.hpp>
#include <covkit/matrix.hpp>
#include <covkit/state_space.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

namespace covkit {

/// Exposure window and numerical guard rails for the covariance pipeline.
struct ExposureConfig {
    double T = 0.0;            // exposure duration, s
    double tol_psd = 1e-8;     // jitter eigenvalue clip floor, relative to trace(Sigma_A)
    double tol_balance = 1e-8; // balance-equation residual bound, relative to ||Sigma_A||

    void validate() const {
        if (!(T > 0.0)) throw InputError("exposure duration must be positive, got T = " +
                                         std::to_string(T));
        if (!(tol_psd > 0.0) || !(tol_balance > 0.0))
            throw InputError("exposure tolerances must be positive");
    }
};

/// The four pointing covariances over one exposure of duration T. The balance
/// identity Sigma_A = Sigma_D + Sigma_S/12 + Sigma_J ties them together.
struct PointingCovariances {
    Matrix sigma_A; // accuracy: stationary covariance of p(t)
    Matrix sigma_D; // displacement: covariance of the exposure-mean pbar
    Matrix sigma_S; // smear: covariance of the fitted drift sbar
    Matrix sigma_J; // jitter: covariance of the residual about mean and drift
    double T = 0.0;
};

/// Terminal values of the augmented second-moment blocks at t = T, plus the
/// auxiliary integrals the block form propagates in their place.
struct AugmentedSolution {
    Matrix P;      // stationary state covariance
    Matrix P_xz1;  // state / integrated-output cross moment
    Matrix P_xz2;  // state / doubly-integrated-output cross moment
    Matrix P_z1z1; // integrated-output covariance
    Matrix P_z1z2;
    Matrix P_z2z2;
    Matrix Y_z1z1; // auxiliaries: P_z1z1 = Y_z1z1 + Y_z1z1^T
    Matrix Y_z1z2; // P_z1z2 = Y_z1z2 + Y_z1z2^T + W_z1z2
    Matrix W_z1z2;
    Matrix Y_z2z2; // P_z2z2 = Y_z2z2 + Y_z2z2^T
};

/// Linear map from (z1, z2) to the least-squares drift estimate sbar.
struct SmearMap {
    Matrix L; // n_p x 2 n_p, [ (6/T) I , (-12/T^2) I ]
};

inline SmearMap smear_map(std::size_t n_p, double T) {
    if (!(T > 0.0)) throw InputError("smear_map: T must be positive");
    Matrix l(n_p, 2 * n_p);
    for (std::size_t i = 0; i < n_p; ++i) {
        l(i, i) = 6.0 / T;
        l(i, n_p + i) = -12.0 / (T * T);
    }
    return SmearMap{std::move(l)};
}

namespace detail {

inline std::string num_str(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

/// The covariance pipeline drives the model with white noise; a direct
/// feedthrough would give the output unbounded variance.
inline void require_strictly_proper(const StateSpaceModel& sys, const char* context) {
    if (sys.D.max_abs() != 0.0)
        throw FeedthroughError(std::string(context) +
                               ": model has nonzero feedthrough D on the noise-to-output "
                               "path; white noise through D has unbounded variance");
}

/// Clip eigenvalues in (-floor_abs, 0) to zero; reject anything more negative.
inline Matrix clip_psd_floor(const Matrix& s, double floor_abs, const char* label) {
    SymmetricEigen e = jacobi_eigen(s);
    const std::size_t n = s.rows();
    for (double& v : e.values) {
        if (v < -floor_abs)
            throw ConsistencyError(std::string(label) + ": eigenvalue " + num_str(v) +
                                   " is below the clip floor -" + num_str(floor_abs));
        if (v < 0.0) v = 0.0;
    }
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
            out(i, j) = acc;
        }
    return symmetrize(out);
}

} // namespace detail

/// Stationary state covariance P of x' = Ax + Bu under unit-intensity white
/// noise u: the solution of A P + P A^T + B B^T = 0.
inline Matrix steady_state_covariance(const StateSpaceModel& sys) {
    detail::require_strictly_proper(sys, "steady_state_covariance");
    require_hurwitz(sys.A, "steady_state_covariance");
    if (sys.n_x() == 0) return Matrix();
    return solve_lyapunov(sys.A, symmetrize(sys.B * sys.B.transposed()));
}

/// Accuracy covariance Sigma_A = C P C^T: the stationary covariance of the
/// pointing output itself.
inline Matrix accuracy_covariance(const StateSpaceModel& sys) {
    const Matrix p = steady_state_covariance(sys);
    return symmetrize(sys.C * p * sys.C.transposed());
}

/// Block companion matrix M of the augmented second-moment dynamics
/// X' = M X. Row/column blocks, in order:
///   [Y_z2z2, W_z1z2, P_xz2, Y_z1z2, Y_z1z1, P_xz1, F],
/// sizes [n_p, n_p, n_x, n_p, n_p, n_x, n_p]; F is constant (I at t=0).
inline Matrix build_block_M(const StateSpaceModel& sys, const Matrix& p) {
    const std::size_t n_x = sys.n_x();
    const std::size_t n_p = sys.n_p();
    if (!p.is_square() || p.rows() != n_x)
        throw ShapeError("build_block_M: P " + p.shape_string() + " does not match " +
                         std::to_string(n_x) + " states");

    const std::size_t r0 = 0;              // Y_z2z2
    const std::size_t r1 = r0 + n_p;       // W_z1z2
    const std::size_t r2 = r1 + n_p;       // P_xz2
    const std::size_t r3 = r2 + n_x;       // Y_z1z2
    const std::size_t r4 = r3 + n_p;       // Y_z1z1
    const std::size_t r5 = r4 + n_p;       // P_xz1
    const std::size_t r6 = r5 + n_x;       // F
    const std::size_t dim = r6 + n_p;      // 5 n_p + 2 n_x

    Matrix m(dim, dim);
    const Matrix eye_p = Matrix::identity(n_p);
    m.set_block(r0, r1, eye_p);                       // Y_z2z2' = W_z1z2 + 2 Y_z1z2
    m.set_block(r0, r3, eye_p * 2.0);
    m.set_block(r1, r2, sys.C);                       // W_z1z2' = C P_xz2
    m.set_block(r2, r2, sys.A);                       // P_xz2'  = A P_xz2 + P_xz1
    m.set_block(r2, r5, Matrix::identity(n_x));
    m.set_block(r3, r4, eye_p);                       // Y_z1z2' = Y_z1z1
    m.set_block(r4, r5, sys.C);                       // Y_z1z1' = C P_xz1
    m.set_block(r5, r5, sys.A);                       // P_xz1'  = A P_xz1 + P C^T F
    m.set_block(r5, r6, p * sys.C.transposed());
    return m;                                         // F' = 0
}

/// Reduced companion matrix for the displacement covariance alone: block
/// rows [Y_z1z1, P_xz1, F] of dimension 2 n_p + n_x.
inline Matrix build_reduced_block(const StateSpaceModel& sys, const Matrix& p) {
    const std::size_t n_x = sys.n_x();
    const std::size_t n_p = sys.n_p();
    if (!p.is_square() || p.rows() != n_x)
        throw ShapeError("build_reduced_block: P " + p.shape_string() + " does not match " +
                         std::to_string(n_x) + " states");
    Matrix m(2 * n_p + n_x, 2 * n_p + n_x);
    m.set_block(0, n_p, sys.C);
    m.set_block(n_p, n_p, sys.A);
    m.set_block(n_p, n_p + n_x, p * sys.C.transposed());
    return m;
}

namespace detail {

/// Realization the numerics actually run on. With S the Cholesky factor of
/// the stationary covariance, the input-normal coordinates x = S xhat give a
/// working realization that depends on the caller's state basis only through
/// an orthogonal factor, so ill-conditioned user coordinates cannot leak
/// roundoff into the invariant outputs. p is the stationary covariance of
/// the working realization (the identity to solver accuracy when balanced).
struct WorkingRealization {
    StateSpaceModel sys;
    Matrix p;
    Matrix s; // user state = s * working state; empty when unbalanced
    bool balanced = false;
};

// The working realization is only as good as the change-of-basis products,
// and cond(S) amplifies their roundoff, so accumulate them in extended
// precision before rounding back to double.
inline Matrix mul_extended(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            long double acc = 0.0L;
            for (std::size_t k = 0; k < a.cols(); ++k)
                acc += static_cast<long double>(a(i, k)) * static_cast<long double>(b(k, j));
            out(i, j) = static_cast<double>(acc);
        }
    return out;
}

inline Matrix solve_lower_extended(const Matrix& l, const Matrix& b) {
    Matrix x(b.rows(), b.cols());
    const std::size_t n = l.rows();
    for (std::size_t col = 0; col < b.cols(); ++col)
        for (std::size_t i = 0; i < n; ++i) {
            long double s = b(i, col);
            for (std::size_t k = 0; k < i; ++k)
                s -= static_cast<long double>(l(i, k)) * static_cast<long double>(x(k, col));
            x(i, col) = static_cast<double>(s / static_cast<long double>(l(i, i)));
        }
    return x;
}

inline WorkingRealization balance_input_normal(const StateSpaceModel& sys, Matrix p) {
    WorkingRealization w{sys, std::move(p), Matrix(), false};
    const std::size_t n = sys.n_x();
    if (n == 0) return w;
    const auto l = try_cholesky(w.p);
    if (!l) return w;
    double dmin = (*l)(0, 0), dmax = (*l)(0, 0);
    for (std::size_t i = 1; i < n; ++i) {
        dmin = std::min(dmin, (*l)(i, i));
        dmax = std::max(dmax, (*l)(i, i));
    }
    // normalizing nearly uncontrollable directions would inflate the working
    // dynamics, so keep the caller's coordinates for such systems
    if (dmax > 1e7 * dmin) return w;
    try {
        StateSpaceModel bal(solve_lower_extended(*l, mul_extended(sys.A, *l)),
                            solve_lower_extended(*l, sys.B), mul_extended(sys.C, *l),
                            sys.D);
        Matrix p_bal = steady_state_covariance(bal);
        w.sys = std::move(bal);
        w.p = std::move(p_bal);
        w.s = *l;
        w.balanced = true;
    } catch (const Error&) {
        // balancing is an optimization; on any failure keep the user basis
    }
    return w;
}

/// Inputs shared across exposure durations: P, Sigma_A, and M depend only on
/// the model, so a sweep computes them once.
struct AugmentedContext {
    Matrix p;
    Matrix sigma_A;
    Matrix m;
    Matrix s;
    bool balanced = false;
};

inline AugmentedContext prepare_augmented(const StateSpaceModel& sys) {
    WorkingRealization w = balance_input_normal(sys, steady_state_covariance(sys));
    AugmentedContext ctx;
    ctx.p = std::move(w.p);
    ctx.sigma_A = symmetrize(w.sys.C * ctx.p * w.sys.C.transposed());
    ctx.m = build_block_M(w.sys, ctx.p);
    ctx.s = std::move(w.s);
    ctx.balanced = w.balanced;
    return ctx;
}

inline std::pair<PointingCovariances, AugmentedSolution>
covariances_at(const StateSpaceModel& sys, const AugmentedContext& ctx,
               const ExposureConfig& cfg) {
    cfg.validate();
    const std::size_t n_x = sys.n_x();
    const std::size_t n_p = sys.n_p();
    const double T = cfg.T;

    // X(0) = [0; ...; 0; I], so X(T) is the last n_p columns of e^{MT}.
    const Matrix e = expm(ctx.m, T);
    const std::size_t dim = ctx.m.rows();
    const Matrix x = e.block(0, dim - n_p, dim, n_p);

    AugmentedSolution aug;
    aug.Y_z2z2 = x.block(0, 0, n_p, n_p);
    aug.W_z1z2 = x.block(n_p, 0, n_p, n_p);
    aug.P_xz2 = x.block(2 * n_p, 0, n_x, n_p);
    aug.Y_z1z2 = x.block(2 * n_p + n_x, 0, n_p, n_p);
    aug.Y_z1z1 = x.block(3 * n_p + n_x, 0, n_p, n_p);
    aug.P_xz1 = x.block(4 * n_p + n_x, 0, n_x, n_p);

    // the z-moments are output quantities and realization invariant; only
    // the state-cross blocks live in working coordinates and transform back
    if (ctx.balanced) {
        aug.P = symmetrize(ctx.s * ctx.p * ctx.s.transposed());
        aug.P_xz2 = ctx.s * aug.P_xz2;
        aug.P_xz1 = ctx.s * aug.P_xz1;
    } else {
        aug.P = ctx.p;
    }

    // F is constant along the flow; drift flags a numerical breakdown.
    const Matrix f = x.block(4 * n_p + 2 * n_x, 0, n_p, n_p);
    if (max_abs_diff(f, Matrix::identity(n_p)) > 1e-9)
        throw ConsistencyError("pointing_covariances: constant block drifted by " +
                               num_str(max_abs_diff(f, Matrix::identity(n_p))) +
                               ", matrix exponential is unreliable here");

    aug.P_z1z1 = aug.Y_z1z1 + aug.Y_z1z1.transposed();
    aug.P_z1z2 = aug.Y_z1z2 + aug.Y_z1z2.transposed() + aug.W_z1z2;
    aug.P_z2z2 = aug.Y_z2z2 + aug.Y_z2z2.transposed();

    PointingCovariances pc;
    pc.T = T;
    pc.sigma_A = ctx.sigma_A;
    pc.sigma_D = symmetrize(aug.P_z1z1 * (1.0 / (T * T)));

    const Matrix z = vcat(hcat(aug.P_z1z1, aug.P_z1z2),
                          hcat(aug.P_z1z2.transposed(), aug.P_z2z2));
    const Matrix l = smear_map(n_p, T).L;
    pc.sigma_S = symmetrize(l * z * l.transposed());

    const double clip_floor = cfg.tol_psd * std::max(ctx.sigma_A.trace(), 0.0);
    pc.sigma_J = detail::clip_psd_floor(
        symmetrize(ctx.sigma_A - pc.sigma_D - pc.sigma_S * (1.0 / 12.0)), clip_floor,
        "pointing_covariances: jitter covariance");

    const Matrix residual =
        ctx.sigma_A - pc.sigma_D - pc.sigma_S * (1.0 / 12.0) - pc.sigma_J;
    const double bound = cfg.tol_balance * ctx.sigma_A.frobenius_norm();
    if (residual.frobenius_norm() > bound)
        throw ConsistencyError("pointing_covariances: balance residual " +
                               num_str(residual.frobenius_norm()) + " exceeds " +
                               num_str(bound));
    return {std::move(pc), std::move(aug)};
}

} // namespace detail

/// Full pipeline: stationary covariance, one matrix exponential of the block
/// companion form, reconstruction of the z-moments, and the four covariances.
inline std::pair<PointingCovariances, AugmentedSolution>
pointing_covariances(const StateSpaceModel& sys, const ExposureConfig& cfg) {
    cfg.validate();
    return detail::covariances_at(sys, detail::prepare_augmented(sys), cfg);
}

/// Displacement covariance via the reduced block of dimension 2 n_p + n_x.
inline Matrix displacement_covariance_fast(const StateSpaceModel& sys,
                                           const ExposureConfig& cfg) {
    cfg.validate();
    detail::require_strictly_proper(sys, "displacement_covariance_fast");
    const detail::WorkingRealization w =
        detail::balance_input_normal(sys, steady_state_covariance(sys));
    const Matrix m = build_reduced_block(w.sys, w.p);
    const std::size_t n_p = sys.n_p();
    const std::size_t dim = m.rows();

    const Matrix e = expm(m, cfg.T);
    const Matrix y = e.block(0, dim - n_p, n_p, n_p);
    return symmetrize((y + y.transposed()) * (1.0 / (cfg.T * cfg.T)));
}

namespace detail {

struct NormalizedTriple {
    double d = 0.0, s = 0.0, j = 0.0; // Sigma_D/P, Sigma_S/P, Sigma_J/P
};

/// Series forms of the normalized first-order covariances, safe near
/// theta = 0 where the closed forms cancel catastrophically.
inline NormalizedTriple first_order_series(double theta) {
    NormalizedTriple t;
    double pw = 1.0;    // theta^m
    double fact = 2.0;  // (m+2)!
    for (int m = 0; m <= 40; ++m) {
        t.d += pw / fact;
        pw *= theta;
        fact *= m + 3;
    }
    t.d *= 2.0;

    pw = theta;           // theta^{m-4}
    fact = 120.0;         // m!
    for (int m = 5; m <= 44; ++m) {
        t.s += 72.0 * (m - 1) * (4 - m) / fact * pw;
        t.j += 4.0 * (m - 1) * (m - 6) / fact * pw;
        pw *= theta;
        fact *= m + 1;
    }
    return t;
}

/// Closed forms of the normalized first-order covariances; accurate for
/// |theta| well away from zero.
inline NormalizedTriple first_order_exact(double theta) {
    const double et = std::exp(theta);
    const double t2 = theta * theta;
    const double t3 = t2 * theta;
    const double t4 = t2 * t2;
    NormalizedTriple t;
    t.d = 2.0 * (et - 1.0 - theta) / t2;
    t.s = 24.0 * (12.0 * (theta * et + 1.0 - et) - 3.0 * t2 * (1.0 + et) - t3) / t4;
    t.j = (24.0 * (et - 1.0 - theta * et) + 4.0 * t2 * (2.0 + et) + 4.0 * t3 + t4) / t4;
    return t;
}

inline NormalizedTriple first_order_normalized(double theta) {
    return std::abs(theta) <= 0.5 ? first_order_series(theta) : first_order_exact(theta);
}

} // namespace detail

/// Closed-form pointing covariances for the scalar system x' = a x + b u,
/// p = x, with P = -b^2 / (2a). All four entries are 1x1 matrices.
inline PointingCovariances first_order_closed_form(double a, double b, double T) {
    if (!(a < 0.0))
        throw StabilityError("first_order_closed_form: pole must be strictly stable, got a = " +
                             detail::num_str(a));
    if (!(T > 0.0))
        throw InputError("first_order_closed_form: T must be positive, got " +
                         detail::num_str(T));
    const double p = -b * b / (2.0 * a);
    const detail::NormalizedTriple t = detail::first_order_normalized(a * T);
    PointingCovariances pc;
    pc.T = T;
    pc.sigma_A = Matrix::from_rows({{p}});
    pc.sigma_D = Matrix::from_rows({{p * t.d}});
    pc.sigma_S = Matrix::from_rows({{p * t.s}});
    pc.sigma_J = Matrix::from_rows({{p * t.j}});
    return pc;
}

/// Combined jitter-plus-scaled-smear covariance Sigma_J + Sigma_S/12, equal
/// to Sigma_A - Sigma_D by the balance identity.
inline Matrix smitter_covariance(const PointingCovariances& pc) {
    return pc.sigma_J + pc.sigma_S * (1.0 / 12.0);
}

/// Covariances across many exposure durations; P, Sigma_A, and M are shared
/// across the sweep, leaving one matrix exponential per duration.
inline std::vector<PointingCovariances> exposure_sweep(const StateSpaceModel& sys,
                                                       const std::vector<double>& t_list,
                                                       double tol_psd = 1e-8,
                                                       double tol_balance = 1e-8) {
    const detail::AugmentedContext ctx = detail::prepare_augmented(sys);
    std::vector<PointingCovariances> out;
    out.reserve(t_list.size());
    for (double t : t_list) {
        ExposureConfig cfg;
        cfg.T = t;
        cfg.tol_psd = tol_psd;
        cfg.tol_balance = tol_balance;
        out.push_back(detail::covariances_at(sys, ctx, cfg).first);
    }
    return out;
}

} // namespace covkit
