// Acceptance suite. Prints one [PASS]/[FAIL] line per criterion with the
// measured numbers underneath; exit code is the number of failed criteria.
// Tolerances are pinned here, not read from anywhere else.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <covkit/errors.hpp>
#include <covkit/linalg.hpp>
#include <covkit/matrix.hpp>
#include <covkit/model_io.hpp>
#include <covkit/oracles.hpp>
#include <covkit/pointing.hpp>
#include <covkit/rng.hpp>
#include <covkit/state_space.hpp>

#include "support/models.hpp"
#include "support/random_systems.hpp"

namespace {

using covkit::Matrix;
using covkit::PointingCovariances;
using covkit::StateSpaceModel;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return std::string(buf);
}

PointingCovariances analyze(const StateSpaceModel& sys, double t) {
    covkit::ExposureConfig cfg;
    cfg.T = t;
    return covkit::pointing_covariances(sys, cfg).first;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    const double l0 = std::log10(lo);
    const double l1 = std::log10(hi);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::pow(10.0, l0 + (l1 - l0) * static_cast<double>(i) /
                                         static_cast<double>(n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

double min_symmetric_eig(const Matrix& m) {
    Matrix s = (m + m.transposed()) * 0.5;
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& lam : covkit::eigenvalues(s)) lo = std::min(lo, lam.real());
    return lo;
}

std::string data_path(const char* rel) {
    return std::string(COVKIT_DATA_DIR) + "/" + rel;
}

// ---- criterion 1: MIMO golden test ------------------------------------

// Printed matrices from the worked 2x2 example, with per-entry tolerance of
// one unit in the last printed digit. The exact Sigma_J(1,1) is 3.24475,
// which rounds to 3.245, not the printed 3.244; the paper's own balance
// identity forces ~3.2447, so 3.244 carries almost a full print-ulp of the
// paper's slop and a half-ulp bound is unattainable by construction.
bool criterion1(std::vector<std::string>& notes) {
    const auto t0 = Clock::now();
    const StateSpaceModel sys = testsup::mimo_example();
    const PointingCovariances cov = analyze(sys, 0.3);
    const double elapsed = seconds_since(t0);

    const double printed[4][2][2] = {
        {{35.86, 2.168}, {2.168, 93.83}}, // Sigma_A
        {{17.24, 0.994}, {0.994, 15.15}}, // Sigma_D
        {{184.5, 9.252}, {9.252, 596.7}}, // Sigma_S
        {{3.244, 0.403}, {0.403, 28.96}}, // Sigma_J
    };
    const double ulp[4][2][2] = {
        {{0.01, 0.001}, {0.001, 0.01}},
        {{0.01, 0.001}, {0.001, 0.01}},
        {{0.1, 0.001}, {0.001, 0.1}},
        {{0.001, 0.001}, {0.001, 0.01}},
    };
    const Matrix* computed[4] = {&cov.sigma_A, &cov.sigma_D, &cov.sigma_S, &cov.sigma_J};
    const char* names[4] = {"Sigma_A", "Sigma_D", "Sigma_S", "Sigma_J"};

    bool ok = true;
    double worst = 0.0;
    for (int m = 0; m < 4; ++m)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const double got = (*computed[m])(i, j);
                const double err = std::abs(got - printed[m][i][j]) / ulp[m][i][j];
                worst = std::max(worst, err);
                if (err > 1.0) {
                    ok = false;
                    notes.push_back(fmt("%s(%d,%d) = %.6f vs printed %.4g (%.2f print ulps)",
                                        names[m], i + 1, j + 1, got, printed[m][i][j], err));
                }
            }
    notes.push_back(fmt("16 entries vs printed values, worst deviation %.2f print ulps", worst));
    notes.push_back(fmt("runtime %.3f s (limit 1 s)", elapsed));
    return ok && elapsed < 1.0;
}

// ---- criterion 2: first-order oracle grid ------------------------------

bool criterion2(std::vector<std::string>& notes) {
    const double a = -1.0;
    const double b = std::sqrt(2.0);
    const StateSpaceModel sys = testsup::scalar_system(a, b);
    const std::vector<double> grid = log_grid(1e-2, 1e2, 50);

    double worst = 0.0;
    std::vector<double> dn(grid.size()), jn(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const PointingCovariances pipe = analyze(sys, grid[k]);
        const PointingCovariances cf = covkit::first_order_closed_form(a, b, grid[k]);
        const double rel[4] = {
            std::abs(pipe.sigma_A(0, 0) - cf.sigma_A(0, 0)) / std::abs(cf.sigma_A(0, 0)),
            std::abs(pipe.sigma_D(0, 0) - cf.sigma_D(0, 0)) / std::abs(cf.sigma_D(0, 0)),
            std::abs(pipe.sigma_S(0, 0) - cf.sigma_S(0, 0)) / std::abs(cf.sigma_S(0, 0)),
            std::abs(pipe.sigma_J(0, 0) - cf.sigma_J(0, 0)) / std::abs(cf.sigma_J(0, 0)),
        };
        for (double r : rel) worst = std::max(worst, r);
        dn[k] = cf.sigma_D(0, 0) / cf.sigma_A(0, 0);
        jn[k] = cf.sigma_J(0, 0) / cf.sigma_A(0, 0);
    }
    const bool agree = worst <= 1e-10;
    notes.push_back(fmt("pipeline vs closed form over 50 points of |aT| in [1e-2, 1e2]: "
                        "worst relative %.3e (bound 1e-10)", worst));

    // Fig.-1 structure on the closed form: Sigma_D/P monotone down,
    // Sigma_J/P monotone up, the two cross where the normalized smear is
    // near its maximum (both land near |aT| ~ 3; brackets pin the shape).
    bool mono = true;
    for (std::size_t k = 1; k < grid.size(); ++k)
        mono = mono && dn[k] < dn[k - 1] && jn[k] > jn[k - 1];

    const std::vector<double> fine = log_grid(0.5, 8.0, 801);
    double cross = 0.0, peak_t = 0.0, peak_s = -1.0, prev_gap = 0.0;
    for (std::size_t k = 0; k < fine.size(); ++k) {
        const PointingCovariances cf = covkit::first_order_closed_form(a, b, fine[k]);
        const double gap = cf.sigma_D(0, 0) - cf.sigma_J(0, 0);
        const double s12 = cf.sigma_S(0, 0) / (12.0 * cf.sigma_A(0, 0));
        if (k > 0 && prev_gap > 0.0 && gap <= 0.0) cross = fine[k];
        if (s12 > peak_s) { peak_s = s12; peak_t = fine[k]; }
        prev_gap = gap;
    }
    const bool shape = mono && cross > 2.5 && cross < 4.5 && peak_t > 2.5 && peak_t < 4.5;
    notes.push_back(fmt("Sigma_D/P decreasing and Sigma_J/P increasing: %s", mono ? "yes" : "NO"));
    notes.push_back(fmt("D/J crossing at |aT| = %.3f, max normalized smear at |aT| = %.3f "
                        "(both required in [2.5, 4.5])", cross, peak_t));
    return agree && shape;
}

// ---- criterion 3: balance property suite --------------------------------

bool criterion3(std::vector<std::string>& notes) {
    const auto t0 = Clock::now();
    auto g = covkit::rng::Xoshiro256pp::from_seed(0xBA1A9CE5u);
    double worst_res = 0.0;
    double worst_eig = 0.0;
    for (int k = 0; k < 200; ++k) {
        const std::size_t n_x = 1 + g.next() % 20;
        const std::size_t n_p = 1 + g.next() % 3;
        const std::size_t n_u = 1 + g.next() % 3;
        const StateSpaceModel sys = testsup::random_stable_model(g, n_x, n_u, n_p);
        const double t = std::pow(10.0, covkit::rng::uniform(g, -2.0, 2.0));
        const PointingCovariances cov = analyze(sys, t);

        const Matrix gap = cov.sigma_A - (cov.sigma_D + cov.sigma_S * (1.0 / 12.0) + cov.sigma_J);
        worst_res = std::max(worst_res, gap.frobenius_norm() / cov.sigma_A.frobenius_norm());
        const double floor = -1e-10 * std::max(1.0, cov.sigma_A.trace());
        worst_eig = std::min(worst_eig, min_symmetric_eig(cov.sigma_J) - floor);
    }
    const double elapsed = seconds_since(t0);
    const bool ok = worst_res <= 1e-8 && worst_eig >= 0.0 && elapsed < 30.0;
    notes.push_back(fmt("200 systems, n_x <= 20, n_p <= 3, T over 4 decades: "
                        "worst balance residual %.3e (bound 1e-8)", worst_res));
    notes.push_back(fmt("Sigma_J PSD after clipping: worst eigenvalue margin %+.3e", worst_eig));
    notes.push_back(fmt("runtime %.2f s (limit 30 s)", elapsed));
    return ok;
}

// ---- criterion 4: LDE-integration oracle --------------------------------

double block_gap(const covkit::AugmentedSolution& sol, const covkit::AugmentedSolution& ref) {
    const Matrix* s[6] = {&sol.P, &sol.P_xz1, &sol.P_xz2, &sol.P_z1z1, &sol.P_z1z2, &sol.P_z2z2};
    const Matrix* r[6] = {&ref.P, &ref.P_xz1, &ref.P_xz2, &ref.P_z1z1, &ref.P_z1z2, &ref.P_z2z2};
    double scale = 1.0;
    for (int i = 0; i < 6; ++i) scale = std::max(scale, r[i]->max_abs());
    double gap = 0.0;
    for (int i = 0; i < 6; ++i) gap = std::max(gap, covkit::max_abs_diff(*s[i], *r[i]));
    return gap / scale;
}

bool criterion4(std::vector<std::string>& notes) {
    auto g = covkit::rng::Xoshiro256pp::from_seed(0x0DE50DE5u);
    const double t = 0.75;
    double min_order = std::numeric_limits<double>::infinity();
    double worst_final = 0.0;
    for (int k = 0; k < 20; ++k) {
        const std::size_t n_x = 1 + g.next() % 5;
        const std::size_t n_u = 1 + g.next() % 2;
        const std::size_t n_p = 1 + g.next() % 2;
        const StateSpaceModel sys = testsup::random_stable_model(g, n_x, n_u, n_p);
        covkit::ExposureConfig cfg;
        cfg.T = t;
        const covkit::AugmentedSolution ref = covkit::pointing_covariances(sys, cfg).second;

        const double e16 = block_gap(covkit::lde_integrate(sys, t, 16), ref);
        const double e32 = block_gap(covkit::lde_integrate(sys, t, 32), ref);
        // converged to roundoff already counts as converged
        const double order = e32 <= 1e-12 ? 4.0 : std::log2(e16 / e32);
        min_order = std::min(min_order, order);
        worst_final = std::max(worst_final, block_gap(covkit::lde_integrate(sys, t, 10000), ref));
    }
    const bool ok = min_order >= 1.9 && worst_final <= 1e-6;
    notes.push_back(fmt("RK4 moment integration vs matrix exponential, 20 systems: "
                        "min observed order %.2f (bound 1.9)", min_order));
    notes.push_back(fmt("worst relative gap at n_steps = 1e4: %.3e (bound 1e-6)", worst_final));
    return ok;
}

// ---- criterion 5: Monte Carlo oracle ------------------------------------

bool criterion5(std::vector<std::string>& notes) {
    const auto t0 = Clock::now();
    const StateSpaceModel sys = testsup::mimo_example();
    const PointingCovariances ref = analyze(sys, 0.3);
    const std::uint64_t seed = 20260825ull;
    const covkit::MonteCarloReport mc = covkit::monte_carlo_metrics(sys, 0.3, 1e-3, 10000, seed);
    const double elapsed = seconds_since(t0);

    const Matrix* est[4] = {&mc.est_A, &mc.est_D, &mc.est_S, &mc.est_J};
    const Matrix* se[4] = {&mc.stderr_A, &mc.stderr_D, &mc.stderr_S, &mc.stderr_J};
    const Matrix* tgt[4] = {&ref.sigma_A, &ref.sigma_D, &ref.sigma_S, &ref.sigma_J};
    const char* names[4] = {"Sigma_A", "Sigma_D", "Sigma_S", "Sigma_J"};
    bool ok = true;
    double max_z = 0.0;
    for (int m = 0; m < 4; ++m)
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                const double s = (*se[m])(i, j);
                const double z = s > 0.0 ? std::abs((*est[m])(i, j) - (*tgt[m])(i, j)) / s
                                         : std::abs((*est[m])(i, j) - (*tgt[m])(i, j));
                max_z = std::max(max_z, z);
                if (z > 3.0) {
                    ok = false;
                    notes.push_back(fmt("%s(%zu,%zu): |z| = %.2f exceeds 3", names[m], i + 1,
                                        j + 1, z));
                }
            }

    const covkit::MonteCarloReport mc2 = covkit::monte_carlo_metrics(sys, 0.3, 1e-3, 10000, seed);
    double rerun = 0.0;
    for (int m = 0; m < 4; ++m) rerun = std::max(rerun, covkit::max_abs_diff(*est[m],
        m == 0 ? mc2.est_A : m == 1 ? mc2.est_D : m == 2 ? mc2.est_S : mc2.est_J));
    const bool identical = rerun == 0.0;

    notes.push_back(fmt("10^4 trials, T = 0.3, h = 1e-3, seed %llu: max |z| = %.2f "
                        "(bound 3 standard errors)", static_cast<unsigned long long>(seed), max_z));
    notes.push_back(fmt("rerun under same seed bit-identical: %s", identical ? "yes" : "NO"));
    notes.push_back(fmt("runtime %.1f s (limit 120 s)", elapsed));
    return ok && identical && elapsed < 120.0;
}

// ---- criterion 6: fast displacement path ---------------------------------

bool criterion6(std::vector<std::string>& notes) {
    std::vector<std::pair<StateSpaceModel, double>> corpus;
    corpus.emplace_back(testsup::mimo_example(), 0.3);
    corpus.emplace_back(testsup::scalar_system(-1.0, std::sqrt(2.0)), 1.0);
    corpus.emplace_back(testsup::scalar_system(-0.5, 2.0), 0.02);
    corpus.emplace_back(covkit::load_model_file(data_path("satellite/nominal_gf1.json")), 5.0);
    auto g = covkit::rng::Xoshiro256pp::from_seed(0xFA57FA57u);
    for (int k = 0; k < 20; ++k) {
        const std::size_t n_x = 1 + g.next() % 8;
        const std::size_t n_u = 1 + g.next() % 3;
        const std::size_t n_p = 1 + g.next() % 3;
        corpus.emplace_back(testsup::random_stable_model(g, n_x, n_u, n_p),
                            std::pow(10.0, covkit::rng::uniform(g, -1.0, 1.0)));
    }

    double worst = 0.0;
    for (const auto& [sys, t] : corpus) {
        covkit::ExposureConfig cfg;
        cfg.T = t;
        const Matrix full = covkit::pointing_covariances(sys, cfg).first.sigma_D;
        const Matrix fast = covkit::displacement_covariance_fast(sys, cfg);
        worst = std::max(worst, covkit::max_abs_diff(full, fast) / full.max_abs());
    }
    const bool agree = worst <= 1e-10;
    notes.push_back(fmt("fast path vs full pipeline Sigma_D over %zu systems: "
                        "worst relative %.3e (bound 1e-10)", corpus.size(), worst));

    const StateSpaceModel mimo = testsup::mimo_example();
    const Matrix p = covkit::steady_state_covariance(mimo);
    const std::size_t full_dim = covkit::build_block_M(mimo, p).rows();
    const std::size_t red_dim = covkit::build_reduced_block(mimo, p).rows();
    const bool dims = full_dim == 26 && red_dim == 12;
    notes.push_back(fmt("block dimensions for the 8-state example: full %zu (expect 26), "
                        "reduced %zu (expect 2 n_p + n_x = 12)", full_dim, red_dim));
    return agree && dims;
}

// ---- criterion 7: realization invariance ---------------------------------

bool criterion7(std::vector<std::string>& notes) {
    const StateSpaceModel sys = testsup::mimo_example();
    const PointingCovariances base = analyze(sys, 0.3);
    auto g = covkit::rng::Xoshiro256pp::from_seed(0x51A11A57u);
    double worst = 0.0;
    double worst_cond = 0.0;
    for (int k = 0; k < 10; ++k) {
        const double cond = std::pow(10.0, 1.0 + 2.0 * k / 9.0); // 10 .. 1e3
        const Matrix t = testsup::random_conditioned(g, sys.n_x(), cond);
        const PointingCovariances cov = analyze(covkit::similarity_transform(sys, t), 0.3);
        const Matrix* b[4] = {&base.sigma_A, &base.sigma_D, &base.sigma_S, &base.sigma_J};
        const Matrix* c[4] = {&cov.sigma_A, &cov.sigma_D, &cov.sigma_S, &cov.sigma_J};
        for (int m = 0; m < 4; ++m)
            for (std::size_t i = 0; i < 2; ++i)
                for (std::size_t j = 0; j < 2; ++j) {
                    const double rel = std::abs((*c[m])(i, j) - (*b[m])(i, j)) /
                                       std::abs((*b[m])(i, j));
                    if (rel > worst) { worst = rel; worst_cond = cond; }
                }
    }
    const bool ok = worst <= 1e-8;
    notes.push_back(fmt("10 similarity transforms, cond up to 1e3: worst entry change "
                        "%.3e relative (bound 1e-8, at cond %.0f)", worst, worst_cond));
    return ok;
}

// ---- criterion 8: satellite scenario, qualitative -------------------------

bool criterion8(std::vector<std::string>& notes) {
    const StateSpaceModel nominal = covkit::load_model_file(data_path("satellite/nominal_gf1.json"));
    const StateSpaceModel slow = covkit::load_model_file(data_path("satellite/slow_gf2.json"));
    const std::vector<double> grid = log_grid(1e-4, 10.0, 30);
    const std::vector<PointingCovariances> sweep = covkit::exposure_sweep(nominal, grid);

    bool d_dominant = true;
    bool j_dominant = true;
    double peak_t = 0.0, peak_s = -1.0;
    for (const auto& cov : sweep) {
        const double d = cov.sigma_D.trace();
        const double s = cov.sigma_S.trace() / 12.0;
        const double j = cov.sigma_J.trace();
        if (cov.T <= 2e-3 && !(d > s && d > j)) d_dominant = false;
        if (cov.T >= 0.1 && !(j > d && j > s)) j_dominant = false;
        if (s > peak_s) { peak_s = s; peak_t = cov.T; }
    }
    const bool peak_ok = peak_t >= 1.5e-3 && peak_t <= 6e-3;
    notes.push_back(fmt("displacement dominant at all grid T <= 2 ms: %s",
                        d_dominant ? "yes" : "NO"));
    notes.push_back(fmt("smear contribution maximal at T = %.3g s (required in [1.5e-3, 6e-3])",
                        peak_t));
    notes.push_back(fmt("jitter dominant at all grid T >= 0.1 s: %s", j_dominant ? "yes" : "NO"));

    const bool hurwitz = covkit::assess_stability(nominal.A).hurwitz &&
                         covkit::assess_stability(slow.A).hurwitz;
    notes.push_back(fmt("closed loops Hurwitz (nominal and slow): %s", hurwitz ? "yes" : "NO"));

    const StateSpaceModel sens_n =
        covkit::load_model_file(data_path("satellite/sensitivity_nominal.json"));
    const StateSpaceModel sens_s =
        covkit::load_model_file(data_path("satellite/sensitivity_slow.json"));
    const covkit::ComplexMatrix gn = covkit::freq_response_at(sens_n, 1.1);
    const covkit::ComplexMatrix gs = covkit::freq_response_at(sens_s, 1.1);
    // Fig. 4 plots the x- and z-axis input sensitivities
    const double nx = std::abs(gn(0, 0)), sx = std::abs(gs(0, 0));
    const double nz = std::abs(gn(2, 2)), sz = std::abs(gs(2, 2));
    const bool sens = nx > sx && nz > sz;
    notes.push_back(fmt("sensitivity at omega_peak = 1.1 rad/s: x-axis %.2f dB vs %.2f dB, "
                        "z-axis %.2f dB vs %.2f dB (nominal must exceed slow)",
                        20.0 * std::log10(nx), 20.0 * std::log10(sx),
                        20.0 * std::log10(nz), 20.0 * std::log10(sz)));
    return d_dominant && peak_ok && j_dominant && hurwitz && sens;
}

// ---- criterion 9: satellite scenario, quantitative ------------------------

struct SatelliteCase {
    const char* label;
    const char* file;
    double printed_diag[4][2]; // Sigma_A, Sigma_D, Sigma_S/12, Sigma_J diagonals
    double baseline[4][2][2];  // frozen full-precision regression values
};

bool criterion9(std::vector<std::string>& notes) {
    const SatelliteCase cases[2] = {
        {"nominal", "satellite/nominal_gf2.json",
         {{634.8, 633.7}, {0.210, 0.177}, {2.004, 1.572}, {632.6, 632.0}},
         {{{6.3550854134567578e+02, -2.6834132191013348e-02},
           {-2.6834132191013348e-02, 6.3373222827846951e+02}},
          {{1.7874696171981455e-01, 8.2833492132594616e-05},
           {8.2833492132594616e-05, 1.7740347670896459e-01}},
          {{2.1366909955720672e+00, -7.1125598002320396e-03},
           {-7.1125598002320396e-03, 1.5709938471596108e+00}},
          {{6.3319310338838363e+02, -1.9804405882913656e-02},
           {-1.9804405882913656e-02, 6.3198383095460065e+02}}}},
        {"slow", "satellite/slow_gf2.json",
         {{632.4, 632.3}, {0.274, 0.226}, {1.149, 1.108}, {630.9, 631.0}},
         {{{6.3243353368345845e+02, -4.1480187146316740e-03},
           {-4.1480187146316740e-03, 6.3227440052643385e+02}},
          {{3.4464239116787881e-01, -8.8630945494731913e-04},
           {-8.8630945494731913e-04, 2.9745847601791453e-01}},
          {{1.1694254179128563e+00, -1.6147156935073276e-03},
           {-1.6147156935073276e-03, 1.1098099960414749e+00}},
          {{6.3091946587437792e+02, -1.6469935661778123e-03},
           {-1.6469935661778123e-03, 6.3086713205437468e+02}}}},
    };
    const char* names[4] = {"Sigma_A", "Sigma_D", "Sigma_S/12", "Sigma_J"};

    bool printed_ok = true;
    bool dominance_ok = true;
    double regression = 0.0;
    for (const auto& sc : cases) {
        const StateSpaceModel sys = covkit::load_model_file(data_path(sc.file));
        const PointingCovariances cov = analyze(sys, 5.0);
        const Matrix s12 = cov.sigma_S * (1.0 / 12.0);
        const Matrix* comp[4] = {&cov.sigma_A, &cov.sigma_D, &s12, &cov.sigma_J};

        for (int m = 0; m < 4; ++m)
            for (int i = 0; i < 2; ++i) {
                const double got = (*comp[m])(i, i);
                const double ref = sc.printed_diag[m][i];
                const double rel = std::abs(got - ref) / ref;
                if (rel > 0.05) {
                    printed_ok = false;
                    notes.push_back(fmt("%s %s(%d,%d) = %.4f vs printed %.4g (%+.1f%%)",
                                        sc.label, names[m], i + 1, i + 1, got, ref,
                                        100.0 * (got - ref) / ref));
                }
            }

        const double dt = cov.sigma_D.trace();
        const double st = s12.trace();
        const double jt = cov.sigma_J.trace();
        if (!(jt > 100.0 * st && st > 2.0 * dt)) dominance_ok = false;
        notes.push_back(fmt("%s dominance: tr J / tr S12 = %.0f (> 100), "
                            "tr S12 / tr D = %.1f (> 2)", sc.label, jt / st, st / dt));

        for (int m = 0; m < 4; ++m) {
            double scale = 0.0, diff = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    scale = std::max(scale, std::abs(sc.baseline[m][i][j]));
                    diff = std::max(diff, std::abs((*comp[m])(i, j) - sc.baseline[m][i][j]));
                }
            regression = std::max(regression, diff / scale);
        }
    }
    const bool regression_ok = regression <= 1e-9;
    notes.push_back(fmt("frozen regression baseline: worst relative drift %.3e (bound 1e-9)",
                        regression));
    if (!printed_ok)
        notes.push_back("diagonal agreement with the printed matrices at 5% NOT met; "
                        "see listed entries");
    return printed_ok && dominance_ok && regression_ok;
}

int g_failures = 0;

void run(int idx, const char* title, bool (*fn)(std::vector<std::string>&)) {
    std::vector<std::string> notes;
    bool ok = false;
    try {
        ok = fn(notes);
    } catch (const std::exception& e) {
        notes.push_back(fmt("exception: %s", e.what()));
    }
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", idx, title);
    for (const auto& n : notes) std::printf("        %s\n", n.c_str());
    if (!ok) ++g_failures;
}

} // namespace

int main() {
    run(1, "MIMO golden test against the printed 2x2 example", &criterion1);
    run(2, "first-order closed form vs pipeline on a 50-point grid", &criterion2);
    run(3, "balance identity and PSD clipping on 200 random systems", &criterion3);
    run(4, "independent LDE integration converges to the pipeline", &criterion4);
    run(5, "Monte Carlo estimates consistent and reproducible", &criterion5);
    run(6, "fast displacement path equals the full pipeline", &criterion6);
    run(7, "covariances invariant under state-space realization", &criterion7);
    run(8, "satellite exposure-time regimes and sensitivity ordering", &criterion8);
    run(9, "satellite T = 5 s values vs printed matrices (weak)", &criterion9);
    std::printf("%d of 9 criteria passed\n", 9 - g_failures);
    return g_failures;
}
