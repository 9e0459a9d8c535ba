// covkit: pointing covariance analysis from state-space disturbance models.
//
// Subcommands: analyze, sweep, freqresp, simulate, validate.
// Exit codes: 0 success, 2 model parse error, 3 stability error,
// 4 feedthrough error, 1 any other analysis failure.

#include <covkit/csv.hpp>
#include <covkit/errors.hpp>
#include <covkit/linalg.hpp>
#include <covkit/matrix.hpp>
#include <covkit/model_io.hpp>
#include <covkit/oracles.hpp>
#include <covkit/pointing.hpp>
#include <covkit/state_space.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace {

double balance_tolerance() {
    const char* env = std::getenv("COVKIT_TOL_BALANCE");
    if (!env) return 1e-8;
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0))
        throw covkit::InputError("COVKIT_TOL_BALANCE must be a positive number, got '" +
                                 std::string(env) + "'");
    return v;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo))
        throw covkit::InputError("grid bounds must satisfy 0 < min < max");
    if (n < 2) throw covkit::InputError("grid needs at least 2 points");
    std::vector<double> out(n);
    const double llo = std::log10(lo);
    const double lhi = std::log10(hi);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) /
                                    static_cast<double>(n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

void print_matrix(const char* name, const covkit::Matrix& m) {
    std::printf("%s =\n", name);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        std::printf("  [");
        for (std::size_t j = 0; j < m.cols(); ++j) std::printf(" %13.6g", m(i, j));
        std::printf(" ]\n");
    }
}

int run_analyze(const std::string& model_path, double exposure, const std::string& out_path) {
    const covkit::StateSpaceModel sys = covkit::load_model_file(model_path);
    covkit::ExposureConfig cfg;
    cfg.T = exposure;
    cfg.tol_balance = balance_tolerance();
    const auto [cov, aug] = covkit::pointing_covariances(sys, cfg);
    (void)aug;

    std::printf("model: %s  (n_x = %zu, n_u = %zu, n_p = %zu)\n", model_path.c_str(),
                sys.n_x(), sys.n_u(), sys.n_p());
    std::printf("exposure T = %g s\n", exposure);
    print_matrix("Sigma_A", cov.sigma_A);
    print_matrix("Sigma_D", cov.sigma_D);
    print_matrix("Sigma_S", cov.sigma_S);
    print_matrix("Sigma_J", cov.sigma_J);

    const covkit::Table table = covkit::covariance_table({cov});
    covkit::write_text_atomic(out_path, covkit::render_csv(table));
    std::printf("balance residual (relative): %s\n", table.rows.front().back().c_str());
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int run_sweep(const std::string& model_path, double tmin, double tmax, std::size_t points,
              const std::string& out_path) {
    const covkit::StateSpaceModel sys = covkit::load_model_file(model_path);
    const std::vector<double> grid = log_spaced(tmin, tmax, points);
    const auto results = covkit::exposure_sweep(sys, grid, 1e-8, balance_tolerance());
    covkit::write_text_atomic(out_path, covkit::render_csv(covkit::covariance_table(results)));
    std::printf("swept %zu exposure times in [%g, %g] s; wrote %s\n", points, tmin, tmax,
                out_path.c_str());
    return 0;
}

int run_freqresp(const std::string& model_path, double wmin, double wmax, std::size_t points,
                 const std::string& out_path) {
    const covkit::StateSpaceModel sys = covkit::load_model_file(model_path);
    const std::vector<double> grid = log_spaced(wmin, wmax, points);
    std::vector<covkit::ComplexMatrix> gains;
    gains.reserve(points);
    std::size_t singular = 0;
    for (double w : grid) {
        try {
            gains.push_back(covkit::freq_response_at(sys, w));
        } catch (const covkit::SolveError&) {
            gains.push_back(covkit::ComplexMatrix());
            ++singular;
        }
    }
    covkit::write_text_atomic(
        out_path, covkit::render_csv(covkit::freqresp_table(grid, gains, sys.n_p(), sys.n_u())));
    std::printf("evaluated %zu frequencies in [%g, %g] rad/s; wrote %s\n", points, wmin, wmax,
                out_path.c_str());
    if (singular > 0) {
        std::fprintf(stderr, "error: resolvent singular at %zu grid frequencies (rows "
                             "flagged nan)\n", singular);
        return 1;
    }
    return 0;
}

int run_simulate(const std::string& model_path, double exposure, double step,
                 std::size_t trials, std::uint64_t seed, const std::string& out_path) {
    const covkit::StateSpaceModel sys = covkit::load_model_file(model_path);
    covkit::ExposureConfig cfg;
    cfg.T = exposure;
    cfg.tol_balance = balance_tolerance();
    const auto [analytic, aug] = covkit::pointing_covariances(sys, cfg);
    (void)aug;
    const covkit::MonteCarloReport mc =
        covkit::monte_carlo_metrics(sys, exposure, step, trials, seed);

    const covkit::Table table = covkit::simulate_table(mc, analytic);
    covkit::write_text_atomic(out_path, covkit::render_csv(table));

    double max_z = 0.0;
    std::size_t beyond = 0;
    for (const auto& row : table.rows) {
        const double z = std::abs(std::strtod(row.back().c_str(), nullptr));
        max_z = std::max(max_z, z);
        if (z > 3.0) ++beyond;
    }
    std::printf("%zu trials, T = %g s, h = %g s, seed = %llu\n", trials, exposure, step,
                static_cast<unsigned long long>(seed));
    std::printf("max |z| = %.3f across %zu entries; %zu beyond 3 standard errors\n", max_z,
                table.rows.size(), beyond);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int run_validate(const std::string& model_path, bool dump) {
    const covkit::StateSpaceModel sys = covkit::load_model_file(model_path);
    std::printf("model: %s\n", model_path.c_str());
    std::printf("states n_x = %zu, inputs n_u = %zu, outputs n_p = %zu\n", sys.n_x(),
                sys.n_u(), sys.n_p());

    if (sys.n_x() > 0) {
        std::printf("eigenvalues of A:\n");
        for (const auto& lambda : covkit::eigenvalues(sys.A))
            std::printf("  % .10e %+.10e j\n", lambda.real(), lambda.imag());
    } else {
        std::printf("static model: no dynamics\n");
    }

    const bool proper = sys.D.max_abs() == 0.0;
    if (proper)
        std::printf("feedthrough: none (D = 0, strictly proper)\n");
    else
        std::printf("warning: direct feedthrough present (max |D| = %g); covariance "
                    "analysis requires a strictly proper noise path\n", sys.D.max_abs());

    const covkit::StabilityReport rep = covkit::assess_stability(sys.A);
    if (rep.hurwitz) {
        std::printf("stability: Hurwitz (max Re lambda = %g)\n", rep.max_real);
    } else {
        std::printf("stability: FAILED, dominant eigenvalue %g%+gj\n", rep.dominant.real(),
                    rep.dominant.imag());
        return 3;
    }

    if (dump) {
        std::printf("%s\n", covkit::dump_model_json(sys).dump(2).c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pointing covariance analysis for LTI disturbance models"};
    app.require_subcommand(1);

    std::string model_path;
    std::string out_path;
    double exposure = 0.0;
    double tmin = 0.0, tmax = 0.0;
    double wmin = 0.0, wmax = 0.0;
    std::size_t points = 0;
    double step = 0.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    bool dump_model = false;

    CLI::App* analyze = app.add_subcommand("analyze", "covariances at one exposure time");
    analyze->add_option("--model", model_path, "model JSON file")->required();
    analyze->add_option("--exposure", exposure, "exposure duration T in s")->required();
    analyze->add_option("--out", out_path, "output CSV path")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "covariances over a log-spaced T grid");
    sweep->add_option("--model", model_path, "model JSON file")->required();
    sweep->add_option("--tmin", tmin, "smallest exposure time, s")->required();
    sweep->add_option("--tmax", tmax, "largest exposure time, s")->required();
    sweep->add_option("--points", points, "number of grid points")->required();
    sweep->add_option("--out", out_path, "output CSV path")->required();

    CLI::App* freqresp = app.add_subcommand("freqresp", "gain magnitudes over a frequency grid");
    freqresp->add_option("--model", model_path, "model JSON file")->required();
    freqresp->add_option("--wmin", wmin, "smallest frequency, rad/s")->required();
    freqresp->add_option("--wmax", wmax, "largest frequency, rad/s")->required();
    freqresp->add_option("--points", points, "number of grid points")->required();
    freqresp->add_option("--out", out_path, "output CSV path")->required();

    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo check of the covariances");
    simulate->add_option("--model", model_path, "model JSON file")->required();
    simulate->add_option("--exposure", exposure, "exposure duration T in s")->required();
    simulate->add_option("--step", step, "integration step h in s (must divide T)")->required();
    simulate->add_option("--trials", trials, "number of Monte Carlo trials")->required();
    simulate->add_option("--seed", seed, "RNG seed")->required();
    simulate->add_option("--out", out_path, "output CSV path")->required();

    CLI::App* validate = app.add_subcommand("validate", "load a model and report diagnostics");
    validate->add_option("--model", model_path, "model JSON file")->required();
    validate->add_flag("--dump-model", dump_model, "print the resolved model as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) return run_analyze(model_path, exposure, out_path);
        if (*sweep) return run_sweep(model_path, tmin, tmax, points, out_path);
        if (*freqresp) return run_freqresp(model_path, wmin, wmax, points, out_path);
        if (*simulate) return run_simulate(model_path, exposure, step, trials, seed, out_path);
        if (*validate) return run_validate(model_path, dump_model);
    } catch (const covkit::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const covkit::StabilityError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const covkit::FeedthroughError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const covkit::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
