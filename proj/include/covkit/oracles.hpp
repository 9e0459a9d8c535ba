#pragma once

// Independent verification paths for the covariance pipeline: direct
// integration of the moment ODEs, exact stochastic discretization, and Monte
// Carlo estimation from simulated trajectories.

#include <covkit/errors.hpp>
#include <covkit/linalg.hpp>
#include <covkit/matrix.hpp>
#include <covkit/pointing.hpp>
#include <covkit/rng.hpp>
#include <covkit/state_space.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace covkit {

enum class IntegratorScheme {
    rk4,       // classical 4th order
    trapezoid, // Heun's explicit trapezoid, 2nd order
};

namespace detail {

/// Second moments of the augmented state plus the auxiliary integrals, as one
/// integrable value.
struct LdeState {
    Matrix p_xx, p_xz1, p_xz2;
    Matrix p_z1z1, p_z1z2, p_z2z2;
    Matrix y_z1z1, y_z1z2, w_z1z2, y_z2z2;
};

inline LdeState lde_axpy(const LdeState& s, const LdeState& d, double h) {
    return LdeState{s.p_xx + d.p_xx * h,     s.p_xz1 + d.p_xz1 * h,
                    s.p_xz2 + d.p_xz2 * h,   s.p_z1z1 + d.p_z1z1 * h,
                    s.p_z1z2 + d.p_z1z2 * h, s.p_z2z2 + d.p_z2z2 * h,
                    s.y_z1z1 + d.y_z1z1 * h, s.y_z1z2 + d.y_z1z2 * h,
                    s.w_z1z2 + d.w_z1z2 * h, s.y_z2z2 + d.y_z2z2 * h};
}

inline LdeState lde_derivative(const StateSpaceModel& sys, const Matrix& bbt,
                               const LdeState& s) {
    LdeState d;
    const Matrix c_xz1 = sys.C * s.p_xz1;
    const Matrix c_xz2 = sys.C * s.p_xz2;
    d.p_xx = sys.A * s.p_xx + s.p_xx * sys.A.transposed() + bbt;
    d.p_xz1 = sys.A * s.p_xz1 + s.p_xx * sys.C.transposed();
    d.p_xz2 = sys.A * s.p_xz2 + s.p_xz1;
    d.p_z1z1 = c_xz1 + c_xz1.transposed();
    d.p_z1z2 = c_xz2 + s.p_z1z1;
    d.p_z2z2 = s.p_z1z2 + s.p_z1z2.transposed();
    d.y_z1z1 = c_xz1;
    d.y_z1z2 = s.y_z1z1;
    d.w_z1z2 = c_xz2;
    d.y_z2z2 = s.w_z1z2 + s.y_z1z2 * 2.0;
    return d;
}

} // namespace detail

/// Integrate the moment ODEs of the augmented system from 0 to T starting at
/// the stationary state covariance. This is a deliberately independent route
/// to the same terminal blocks the matrix-exponential pipeline produces.
inline AugmentedSolution lde_integrate(const StateSpaceModel& sys, double T,
                                       std::size_t n_steps,
                                       IntegratorScheme scheme = IntegratorScheme::rk4) {
    if (n_steps < 2)
        throw InputError("lde_integrate: need at least 2 steps, got " +
                         std::to_string(n_steps));
    if (!(T > 0.0)) throw InputError("lde_integrate: T must be positive");
    detail::require_strictly_proper(sys, "lde_integrate");
    const Matrix p = steady_state_covariance(sys);
    const Matrix bbt = symmetrize(sys.B * sys.B.transposed());
    const std::size_t n_x = sys.n_x();
    const std::size_t n_p = sys.n_p();

    detail::LdeState s{p,
                       Matrix(n_x, n_p), Matrix(n_x, n_p), Matrix(n_p, n_p),
                       Matrix(n_p, n_p), Matrix(n_p, n_p), Matrix(n_p, n_p),
                       Matrix(n_p, n_p), Matrix(n_p, n_p), Matrix(n_p, n_p)};

    const double h = T / static_cast<double>(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) {
        const detail::LdeState k1 = detail::lde_derivative(sys, bbt, s);
        if (scheme == IntegratorScheme::trapezoid) {
            const detail::LdeState k2 =
                detail::lde_derivative(sys, bbt, detail::lde_axpy(s, k1, h));
            s = detail::lde_axpy(detail::lde_axpy(s, k1, 0.5 * h), k2, 0.5 * h);
        } else {
            const detail::LdeState k2 =
                detail::lde_derivative(sys, bbt, detail::lde_axpy(s, k1, 0.5 * h));
            const detail::LdeState k3 =
                detail::lde_derivative(sys, bbt, detail::lde_axpy(s, k2, 0.5 * h));
            const detail::LdeState k4 =
                detail::lde_derivative(sys, bbt, detail::lde_axpy(s, k3, h));
            s = detail::lde_axpy(s, k1, h / 6.0);
            s = detail::lde_axpy(s, k2, h / 3.0);
            s = detail::lde_axpy(s, k3, h / 3.0);
            s = detail::lde_axpy(s, k4, h / 6.0);
        }
    }

    AugmentedSolution aug;
    aug.P = s.p_xx;
    aug.P_xz1 = s.p_xz1;
    aug.P_xz2 = s.p_xz2;
    aug.P_z1z1 = s.p_z1z1;
    aug.P_z1z2 = s.p_z1z2;
    aug.P_z2z2 = s.p_z2z2;
    aug.Y_z1z1 = s.y_z1z1;
    aug.Y_z1z2 = s.y_z1z2;
    aug.W_z1z2 = s.w_z1z2;
    aug.Y_z2z2 = s.y_z2z2;
    return aug;
}

/// Exact one-step discretization of x' = Ax + Bu under unit white noise.
struct DiscreteModel {
    Matrix Ad; // e^{Ah}
    Matrix Qd; // integral of e^{At} B B^T e^{A^T t} over one step
    double h = 0.0;
};

/// One matrix exponential of [[-A, BB^T], [0, A^T]] yields both e^{Ah} and
/// the step noise covariance.
inline DiscreteModel van_loan_discretize(const StateSpaceModel& sys, double h) {
    if (!(h > 0.0)) throw InputError("van_loan_discretize: step must be positive");
    const std::size_t n = sys.n_x();
    if (n == 0) return DiscreteModel{Matrix(), Matrix(), h};

    Matrix block(2 * n, 2 * n);
    block.set_block(0, 0, -sys.A);
    block.set_block(0, n, symmetrize(sys.B * sys.B.transposed()));
    block.set_block(n, n, sys.A.transposed());

    const Matrix f = expm(block, h);
    const Matrix f12 = f.block(0, n, n, n);
    const Matrix f22 = f.block(n, n, n, n);

    DiscreteModel dm;
    dm.h = h;
    dm.Ad = f22.transposed();
    dm.Qd = symmetrize(f22.transposed() * f12);
    return dm;
}

/// Empirical pointing metrics from simulated exposures, with per-entry
/// standard errors.
struct MonteCarloReport {
    Matrix est_A, est_D, est_S, est_J;
    Matrix stderr_A, stderr_D, stderr_S, stderr_J;
    std::size_t n_trials = 0;
    std::uint64_t seed = 0;
    double T = 0.0;
    double h = 0.0;
};

namespace detail {

inline double pairwise_sum(const double* v, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

/// Mean and standard error of per-trial samples, entry by entry.
inline void reduce_trials(const std::vector<std::vector<double>>& samples, std::size_t n_p,
                          Matrix& mean, Matrix& stderr_out) {
    const std::size_t n = samples.front().size();
    mean = Matrix(n_p, n_p);
    stderr_out = Matrix(n_p, n_p);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n_p; ++i)
        for (std::size_t j = 0; j < n_p; ++j) {
            const std::vector<double>& v = samples[i * n_p + j];
            const double sum = pairwise_sum(v.data(), n);
            for (std::size_t k = 0; k < n; ++k) sq[k] = v[k] * v[k];
            const double sumsq = pairwise_sum(sq.data(), n);
            mean(i, j) = sum / static_cast<double>(n);
            const double var_num = std::max(0.0, sumsq - sum * sum / static_cast<double>(n));
            stderr_out(i, j) =
                std::sqrt(var_num / (static_cast<double>(n) * static_cast<double>(n - 1)));
        }
}

} // namespace detail

/// Simulate n_trials independent exposures with the exact discretization and
/// estimate the four covariances by trial averaging. Trial t always consumes
/// random stream t of the seed, so the result is reproducible bit for bit.
inline MonteCarloReport monte_carlo_metrics(const StateSpaceModel& sys, double T, double h,
                                            std::size_t n_trials, std::uint64_t seed) {
    if (!(T > 0.0) || !(h > 0.0))
        throw InputError("monte_carlo_metrics: T and h must be positive");
    const double steps_real = T / h;
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(steps_real));
    if (n_steps < 1 || std::abs(static_cast<double>(n_steps) * h - T) > 1e-9 * T)
        throw InputError("monte_carlo_metrics: step h must divide the exposure T");
    if (n_trials < 2)
        throw InputError("monte_carlo_metrics: need at least 2 trials");
    detail::require_strictly_proper(sys, "monte_carlo_metrics");

    const Matrix p = steady_state_covariance(sys);
    const DiscreteModel dm = van_loan_discretize(sys, h);
    const std::size_t n_x = sys.n_x();
    const std::size_t n_p = sys.n_p();
    const Matrix lx = spectral_sqrt_psd(p, 1e-10 * std::max(1.0, p.trace()),
                                        "monte_carlo_metrics: stationary covariance");
    const Matrix lq = spectral_sqrt_psd(dm.Qd, 1e-10 * std::max(1.0, dm.Qd.trace()),
                                        "monte_carlo_metrics: step noise covariance");

    // Per-trial samples for each metric entry, reduced pairwise afterwards.
    std::vector<std::vector<double>> samp_a(n_p * n_p), samp_d(n_p * n_p),
        samp_s(n_p * n_p), samp_j(n_p * n_p);
    for (auto* s : {&samp_a, &samp_d, &samp_s, &samp_j})
        for (auto& v : *s) v.reserve(n_trials);

    std::vector<double> x(n_x), xn(n_x), g(n_x);
    std::vector<double> traj((n_steps + 1) * n_p);
    std::vector<double> pbar(n_p), sbar(n_p), psi(n_p);

    for (std::size_t trial = 0; trial < n_trials; ++trial) {
        rng::Xoshiro256pp gen = rng::stream_for(seed, trial);
        rng::Gaussian gauss;

        // x(0) ~ N(0, P).
        for (std::size_t i = 0; i < n_x; ++i) g[i] = gauss.next(gen);
        for (std::size_t i = 0; i < n_x; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n_x; ++k) acc += lx(i, k) * g[k];
            x[i] = acc;
        }

        for (std::size_t step = 0; step <= n_steps; ++step) {
            for (std::size_t r = 0; r < n_p; ++r) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n_x; ++k) acc += sys.C(r, k) * x[k];
                traj[step * n_p + r] = acc;
            }
            if (step == n_steps) break;
            for (std::size_t i = 0; i < n_x; ++i) g[i] = gauss.next(gen);
            for (std::size_t i = 0; i < n_x; ++i) {
                double acc = 0.0;
                for (std::size_t k = 0; k < n_x; ++k)
                    acc += dm.Ad(i, k) * x[k] + lq(i, k) * g[k];
                xn[i] = acc;
            }
            std::swap(x, xn);
        }

        // Trapezoid quadratures over the sampled trajectory.
        auto trap_weight = [&](std::size_t step) {
            return (step == 0 || step == n_steps) ? 0.5 : 1.0;
        };
        std::fill(pbar.begin(), pbar.end(), 0.0);
        std::fill(sbar.begin(), sbar.end(), 0.0);
        std::vector<double> acc_a(n_p * n_p, 0.0), acc_j(n_p * n_p, 0.0);
        for (std::size_t step = 0; step <= n_steps; ++step) {
            const double w = trap_weight(step) * h;
            const double tau = static_cast<double>(step) * h - T / 2.0;
            const double* pt = &traj[step * n_p];
            for (std::size_t r = 0; r < n_p; ++r) {
                pbar[r] += w * pt[r];
                sbar[r] += w * tau * pt[r];
                for (std::size_t c = 0; c < n_p; ++c) acc_a[r * n_p + c] += w * pt[r] * pt[c];
            }
        }
        for (std::size_t r = 0; r < n_p; ++r) {
            pbar[r] /= T;
            sbar[r] *= 12.0 / (T * T);
        }
        for (std::size_t step = 0; step <= n_steps; ++step) {
            const double w = trap_weight(step) * h;
            const double tau = static_cast<double>(step) * h - T / 2.0;
            const double* pt = &traj[step * n_p];
            for (std::size_t r = 0; r < n_p; ++r) psi[r] = pt[r] - pbar[r] - tau * sbar[r] / T;
            for (std::size_t r = 0; r < n_p; ++r)
                for (std::size_t c = 0; c < n_p; ++c) acc_j[r * n_p + c] += w * psi[r] * psi[c];
        }

        for (std::size_t r = 0; r < n_p; ++r)
            for (std::size_t c = 0; c < n_p; ++c) {
                samp_a[r * n_p + c].push_back(acc_a[r * n_p + c] / T);
                samp_d[r * n_p + c].push_back(pbar[r] * pbar[c]);
                samp_s[r * n_p + c].push_back(sbar[r] * sbar[c]);
                samp_j[r * n_p + c].push_back(acc_j[r * n_p + c] / T);
            }
    }

    MonteCarloReport rep;
    rep.n_trials = n_trials;
    rep.seed = seed;
    rep.T = T;
    rep.h = h;
    detail::reduce_trials(samp_a, n_p, rep.est_A, rep.stderr_A);
    detail::reduce_trials(samp_d, n_p, rep.est_D, rep.stderr_D);
    detail::reduce_trials(samp_s, n_p, rep.est_S, rep.stderr_S);
    detail::reduce_trials(samp_j, n_p, rep.est_J, rep.stderr_J);
    return rep;
}

} // namespace covkit
