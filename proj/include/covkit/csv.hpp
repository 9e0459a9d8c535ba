#pragma once

// CSV rendering for analysis results. Numbers are written with 17 significant
// digits so that a reader parsing the file recovers the exact doubles.

#include <covkit/errors.hpp>
#include <covkit/matrix.hpp>
#include <covkit/oracles.hpp>
#include <covkit/pointing.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace covkit {

/// Shortest representation that round-trips a double: %.16e.
inline std::string sci(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return std::string(buf);
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::string render_csv(const Table& table) {
    std::string out;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (j) out += ',';
        out += table.header[j];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            out += row[j];
        }
        out += '\n';
    }
    return out;
}

/// Write text via a temporary file plus rename so readers never observe a
/// partially written file.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << text;
        out.flush();
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                          ec.message());
}

namespace detail {

inline void append_matrix_cells(std::vector<std::string>& row, const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(sci(m(i, j)));
}

inline void append_matrix_headers(std::vector<std::string>& header, const std::string& name,
                                  std::size_t n_p) {
    for (std::size_t i = 1; i <= n_p; ++i)
        for (std::size_t j = 1; j <= n_p; ++j)
            header.push_back(name + "_" + std::to_string(i) + std::to_string(j));
}

} // namespace detail

/// One row per exposure time; the smear column stores Sigma_S / 12 so that
/// the row satisfies SigmaA = SigmaD + SigmaS12 + SigmaJ entrywise up to the
/// reported balance residual.
inline Table covariance_table(const std::vector<PointingCovariances>& results) {
    Table t;
    if (results.empty()) {
        t.header = {"T", "balance_residual"};
        return t;
    }
    const std::size_t n_p = results.front().sigma_A.rows();
    t.header.push_back("T");
    detail::append_matrix_headers(t.header, "SigmaA", n_p);
    detail::append_matrix_headers(t.header, "SigmaD", n_p);
    detail::append_matrix_headers(t.header, "SigmaS12", n_p);
    detail::append_matrix_headers(t.header, "SigmaJ", n_p);
    t.header.push_back("balance_residual");
    for (const auto& r : results) {
        const Matrix s12 = r.sigma_S * (1.0 / 12.0);
        const Matrix residual = r.sigma_A - (r.sigma_D + s12 + r.sigma_J);
        const double denom = r.sigma_A.frobenius_norm();
        const double rel = denom > 0.0 ? residual.frobenius_norm() / denom
                                       : residual.frobenius_norm();
        std::vector<std::string> row;
        row.push_back(sci(r.T));
        detail::append_matrix_cells(row, r.sigma_A);
        detail::append_matrix_cells(row, r.sigma_D);
        detail::append_matrix_cells(row, s12);
        detail::append_matrix_cells(row, r.sigma_J);
        row.push_back(sci(rel));
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Gain magnitudes in dB per output/input channel pair. A 0x0 gain matrix
/// marks a frequency where the resolvent was singular; its cells read nan.
inline Table freqresp_table(const std::vector<double>& omegas,
                            const std::vector<ComplexMatrix>& gains, std::size_t n_p,
                            std::size_t n_u) {
    if (omegas.size() != gains.size())
        throw ShapeError("freqresp_table: omega and gain counts differ");
    Table t;
    t.header.push_back("omega");
    for (std::size_t i = 1; i <= n_p; ++i)
        for (std::size_t j = 1; j <= n_u; ++j)
            t.header.push_back("gain_db_" + std::to_string(i) + std::to_string(j));
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        std::vector<std::string> row;
        row.push_back(sci(omegas[k]));
        const ComplexMatrix& g = gains[k];
        const bool singular = g.rows() == 0;
        for (std::size_t i = 0; i < n_p; ++i)
            for (std::size_t j = 0; j < n_u; ++j)
                row.push_back(singular ? "nan" : sci(20.0 * std::log10(std::abs(g(i, j)))));
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Long-form comparison of Monte Carlo estimates against analytic values:
/// one row per metric entry with its standard error and z-score.
inline Table simulate_table(const MonteCarloReport& mc, const PointingCovariances& analytic) {
    Table t;
    t.header = {"metric", "i", "j", "estimate", "stderr", "analytic", "z"};
    const struct {
        const char* name;
        const Matrix* est;
        const Matrix* err;
        const Matrix* ref;
    } groups[] = {
        {"SigmaA", &mc.est_A, &mc.stderr_A, &analytic.sigma_A},
        {"SigmaD", &mc.est_D, &mc.stderr_D, &analytic.sigma_D},
        {"SigmaS", &mc.est_S, &mc.stderr_S, &analytic.sigma_S},
        {"SigmaJ", &mc.est_J, &mc.stderr_J, &analytic.sigma_J},
    };
    for (const auto& g : groups) {
        for (std::size_t i = 0; i < g.est->rows(); ++i)
            for (std::size_t j = 0; j < g.est->cols(); ++j) {
                const double est = (*g.est)(i, j);
                const double se = (*g.err)(i, j);
                const double ref = (*g.ref)(i, j);
                const double z = se > 0.0 ? (est - ref) / se : 0.0;
                t.rows.push_back({g.name, std::to_string(i + 1), std::to_string(j + 1),
                                  sci(est), sci(se), sci(ref), sci(z)});
            }
    }
    return t;
}

} // namespace covkit
