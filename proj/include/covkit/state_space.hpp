#pragma once

#include <covkit/errors.hpp>
#include <covkit/linalg.hpp>
#include <covkit/matrix.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace covkit {

/// Continuous-time LTI system x' = Ax + Bu, p = Cx + Du.
/// n_x = 0 is legal and models a static gain (D only).
class StateSpaceModel {
  public:
    Matrix A, B, C, D;
    std::vector<std::string> input_labels;  // empty or size n_u
    std::vector<std::string> output_labels; // empty or size n_p

    StateSpaceModel() : A(0, 0), B(0, 0), C(0, 0), D(0, 0) {}

    StateSpaceModel(Matrix a, Matrix b, Matrix c, Matrix d)
        : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
        validate_shapes();
    }

    StateSpaceModel(Matrix a, Matrix b, Matrix c)
        : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(C.rows(), B.cols()) {
        validate_shapes();
    }

    std::size_t n_x() const { return A.rows(); }
    std::size_t n_u() const { return B.cols(); }
    std::size_t n_p() const { return C.rows(); }

    void validate_shapes() const {
        if (!A.is_square())
            throw ShapeError("state matrix A must be square, got " + A.shape_string());
        if (B.rows() != A.rows())
            throw ShapeError("input matrix B has " + B.shape_string() + ", expected " +
                             std::to_string(A.rows()) + " rows to match A");
        if (C.cols() != A.rows())
            throw ShapeError("output matrix C has " + C.shape_string() + ", expected " +
                             std::to_string(A.rows()) + " cols to match A");
        if (D.rows() != C.rows() || D.cols() != B.cols())
            throw ShapeError("feedthrough D has " + D.shape_string() + ", expected " +
                             std::to_string(C.rows()) + "x" + std::to_string(B.cols()));
        if (!input_labels.empty() && input_labels.size() != n_u())
            throw ShapeError("input label count does not match input count");
        if (!output_labels.empty() && output_labels.size() != n_p())
            throw ShapeError("output label count does not match output count");
        A.ensure_finite("A");
        B.ensure_finite("B");
        C.ensure_finite("C");
        D.ensure_finite("D");
    }
};

/// 2-state controllable-canonical realization of k*wn^2 / (s^2 + 2*zeta*wn*s + wn^2).
inline StateSpaceModel second_order_siso(double k, double wn, double zeta) {
    if (!(wn > 0.0))
        throw InputError("second_order_siso: natural frequency must be positive, got " +
                         std::to_string(wn));
    if (!(zeta >= 0.0))
        throw InputError("second_order_siso: damping ratio must be nonnegative, got " +
                         std::to_string(zeta));
    return StateSpaceModel(Matrix::from_rows({{0.0, 1.0}, {-wn * wn, -2.0 * zeta * wn}}),
                           Matrix::from_rows({{0.0}, {1.0}}),
                           Matrix::from_rows({{k * wn * wn, 0.0}}));
}

/// 1-state realization of k*wc / (s + wc).
inline StateSpaceModel first_order_siso(double k, double wc) {
    if (!(wc > 0.0))
        throw InputError("first_order_siso: corner frequency must be positive, got " +
                         std::to_string(wc));
    return StateSpaceModel(Matrix::from_rows({{-wc}}), Matrix::from_rows({{1.0}}),
                           Matrix::from_rows({{k * wc}}));
}

/// 2-state realization of (b2 s^2 + b1 s + b0) / (s^2 + a1 s + a0).
/// num = (b2, b1, b0), den = (1, a1, a0); the denominator must be monic.
inline StateSpaceModel biquad_siso(const std::array<double, 3>& num,
                                   const std::array<double, 3>& den) {
    if (den[0] != 1.0)
        throw InputError("biquad_siso: denominator must be monic, got leading coefficient " +
                         std::to_string(den[0]));
    const double b2 = num[0], b1 = num[1], b0 = num[2];
    const double a1 = den[1], a0 = den[2];
    return StateSpaceModel(Matrix::from_rows({{0.0, 1.0}, {-a0, -a1}}),
                           Matrix::from_rows({{0.0}, {1.0}}),
                           Matrix::from_rows({{b0 - b2 * a0, b1 - b2 * a1}}),
                           Matrix::from_rows({{b2}}));
}

/// 1-state realization of k_P + k_D s / (T_K s + 1); DC gain k_P, feedthrough
/// k_P + k_D / T_K.
inline StateSpaceModel pd_controller(double kp, double kd, double tk) {
    if (!(tk > 0.0))
        throw InputError("pd_controller: derivative time constant must be positive, got " +
                         std::to_string(tk));
    return StateSpaceModel(Matrix::from_rows({{-1.0 / tk}}), Matrix::from_rows({{1.0}}),
                           Matrix::from_rows({{-kd / (tk * tk)}}),
                           Matrix::from_rows({{kp + kd / tk}}));
}

/// Static (memoryless) gain y = D u, realized with zero states.
inline StateSpaceModel static_gain(Matrix d) {
    const std::size_t n_u = d.cols();
    const std::size_t n_p = d.rows();
    return StateSpaceModel(Matrix(0, 0), Matrix(0, n_u), Matrix(n_p, 0), std::move(d));
}

inline StateSpaceModel identity_static(std::size_t n) { return static_gain(Matrix::identity(n)); }

/// Assemble an n_out x n_in transfer matrix from SISO blocks: output i is the
/// sum over j of block(i, j) driven by input j. States concatenate row-major.
inline StateSpaceModel mimo_from_blocks(const std::vector<std::vector<StateSpaceModel>>& blocks) {
    if (blocks.empty() || blocks.front().empty())
        throw ShapeError("mimo_from_blocks: empty grid");
    const std::size_t n_out = blocks.size();
    const std::size_t n_in = blocks.front().size();
    std::size_t n_x = 0;
    for (const auto& row : blocks) {
        if (row.size() != n_in) throw ShapeError("mimo_from_blocks: ragged grid");
        for (const auto& blk : row) {
            if (blk.n_u() != 1 || blk.n_p() != 1)
                throw ShapeError("mimo_from_blocks: every block must be SISO");
            n_x += blk.n_x();
        }
    }

    Matrix a(n_x, n_x), b(n_x, n_in), c(n_out, n_x), d(n_out, n_in);
    std::size_t off = 0;
    for (std::size_t i = 0; i < n_out; ++i) {
        for (std::size_t j = 0; j < n_in; ++j) {
            const StateSpaceModel& blk = blocks[i][j];
            const std::size_t nb = blk.n_x();
            a.set_block(off, off, blk.A);
            for (std::size_t r = 0; r < nb; ++r) {
                b(off + r, j) = blk.B(r, 0);
                c(i, off + r) = blk.C(0, r);
            }
            d(i, j) += blk.D(0, 0);
            off += nb;
        }
    }
    return StateSpaceModel(std::move(a), std::move(b), std::move(c), std::move(d));
}

/// Cascade second after first: u -> first -> second -> y, G = G2 * G1.
inline StateSpaceModel series(const StateSpaceModel& first, const StateSpaceModel& second) {
    if (first.n_p() != second.n_u())
        throw ShapeError("series: first model has " + std::to_string(first.n_p()) +
                         " outputs but second expects " + std::to_string(second.n_u()) +
                         " inputs");
    const std::size_t n1 = first.n_x();
    const std::size_t n2 = second.n_x();
    Matrix a(n1 + n2, n1 + n2);
    a.set_block(0, 0, first.A);
    a.set_block(n1, 0, second.B * first.C);
    a.set_block(n1, n1, second.A);
    const Matrix b = vcat(first.B, second.B * first.D);
    const Matrix c = hcat(second.D * first.C, second.C);
    StateSpaceModel out(std::move(a), b, c, second.D * first.D);
    out.input_labels = first.input_labels;
    out.output_labels = second.output_labels;
    return out;
}

/// Close the loop u1 = u + sign * G2(y) around plant G1, returning u -> y.
/// sign = -1 gives the conventional negative-feedback interconnection.
inline StateSpaceModel feedback(const StateSpaceModel& plant, const StateSpaceModel& fb,
                                int sign) {
    if (sign != 1 && sign != -1)
        throw InputError("feedback: sign must be +1 or -1, got " + std::to_string(sign));
    if (plant.n_p() != fb.n_u() || fb.n_p() != plant.n_u())
        throw ShapeError("feedback: plant is " + std::to_string(plant.n_u()) + "->" +
                         std::to_string(plant.n_p()) + " but feedback path is " +
                         std::to_string(fb.n_u()) + "->" + std::to_string(fb.n_p()));
    const double s = static_cast<double>(sign);
    const std::size_t np1 = plant.n_p();

    // Algebraic loop: y = C1 x1 + D1 (u + s (C2 x2 + D2 y)).
    const Matrix loop_gain = Matrix::identity(np1) - plant.D * fb.D * s;
    if (std::abs(determinant(loop_gain)) <= 1e-12)
        throw WellPosednessError("feedback: algebraic loop is singular (I - sign*D1*D2 "
                                 "is not invertible)");
    const Matrix delta = solve_linear(loop_gain, Matrix::identity(np1), "feedback loop");

    const std::size_t n1 = plant.n_x();
    const std::size_t n2 = fb.n_x();
    const Matrix d1c2 = plant.D * fb.C;
    const Matrix delta_d1 = delta * plant.D;

    Matrix a(n1 + n2, n1 + n2);
    a.set_block(0, 0, plant.A + plant.B * fb.D * delta * plant.C * s);
    a.set_block(0, n1, plant.B * fb.C * s + plant.B * fb.D * delta * d1c2 * (s * s));
    a.set_block(n1, 0, fb.B * delta * plant.C);
    a.set_block(n1, n1, fb.A + fb.B * delta * d1c2 * s);

    const Matrix b = vcat(plant.B + plant.B * fb.D * delta_d1 * s, fb.B * delta_d1);
    const Matrix c = hcat(delta * plant.C, delta * d1c2 * s);
    StateSpaceModel out(std::move(a), b, c, delta_d1);
    out.input_labels = plant.input_labels;
    out.output_labels = plant.output_labels;
    return out;
}

/// Keep only the listed output rows, in the listed order.
inline StateSpaceModel select_outputs(const StateSpaceModel& model,
                                      const std::vector<std::size_t>& indices) {
    Matrix c(indices.size(), model.n_x());
    Matrix d(indices.size(), model.n_u());
    std::vector<std::string> labels;
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const std::size_t idx = indices[r];
        if (idx >= model.n_p())
            throw InputError("select_outputs: index " + std::to_string(idx) +
                             " out of range for " + std::to_string(model.n_p()) + " outputs");
        for (std::size_t j = 0; j < model.n_x(); ++j) c(r, j) = model.C(idx, j);
        for (std::size_t j = 0; j < model.n_u(); ++j) d(r, j) = model.D(idx, j);
        if (!model.output_labels.empty()) labels.push_back(model.output_labels[idx]);
    }
    StateSpaceModel out(model.A, model.B, std::move(c), std::move(d));
    out.input_labels = model.input_labels;
    out.output_labels = std::move(labels);
    return out;
}

/// Append extra input columns: u' = [u; u_extra] with B' = [B, B_extra].
inline StateSpaceModel append_inputs(const StateSpaceModel& model, const Matrix& b_extra,
                                     const Matrix& d_extra) {
    if (b_extra.rows() != model.n_x() || d_extra.rows() != model.n_p() ||
        b_extra.cols() != d_extra.cols())
        throw ShapeError("append_inputs: extra columns must be " + std::to_string(model.n_x()) +
                         "-row B and " + std::to_string(model.n_p()) +
                         "-row D with equal widths");
    StateSpaceModel out(model.A, hcat(model.B, b_extra), model.C, hcat(model.D, d_extra));
    out.output_labels = model.output_labels;
    return out;
}

/// Sum a disturbance path onto the output: y = G1 u1 + G2 u2, inputs stacked
/// as [u1; u2].
inline StateSpaceModel sum_at_output(const StateSpaceModel& model,
                                     const StateSpaceModel& disturbance) {
    if (model.n_p() != disturbance.n_p())
        throw ShapeError("sum_at_output: output counts differ (" + std::to_string(model.n_p()) +
                         " vs " + std::to_string(disturbance.n_p()) + ")");
    const std::size_t n1 = model.n_x();
    const std::size_t n2 = disturbance.n_x();
    Matrix a(n1 + n2, n1 + n2);
    a.set_block(0, 0, model.A);
    a.set_block(n1, n1, disturbance.A);
    Matrix b(n1 + n2, model.n_u() + disturbance.n_u());
    b.set_block(0, 0, model.B);
    b.set_block(n1, model.n_u(), disturbance.B);
    const Matrix c = hcat(model.C, disturbance.C);
    const Matrix d = hcat(model.D, disturbance.D);
    StateSpaceModel out(std::move(a), std::move(b), c, d);
    out.output_labels = model.output_labels;
    return out;
}

struct FrequencyResponse {
    std::vector<double> frequencies;   // rad/s
    std::vector<ComplexMatrix> gains;  // G(jw), n_p x n_u each
};

/// Evaluate G(jw) = C (jwI - A)^{-1} B + D at each listed frequency.
inline FrequencyResponse freq_response(const StateSpaceModel& model,
                                       const std::vector<double>& omegas) {
    const std::size_t n = model.n_x();
    const ComplexMatrix bc = ComplexMatrix::from_real(model.B);
    const ComplexMatrix cc = ComplexMatrix::from_real(model.C);
    const ComplexMatrix dc = ComplexMatrix::from_real(model.D);

    FrequencyResponse resp;
    resp.frequencies = omegas;
    resp.gains.reserve(omegas.size());
    for (double w : omegas) {
        ComplexMatrix shifted(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) shifted(i, j) = -model.A(i, j);
            shifted(i, i) += std::complex<double>(0.0, w);
        }
        ComplexMatrix x(n, model.n_u());
        try {
            x = solve_complex_linear(shifted, bc);
        } catch (const SolveError&) {
            throw SolveError("freq_response: jwI - A is singular at omega = " +
                             std::to_string(w) + " rad/s");
        }
        resp.gains.push_back(cc * x + dc);
    }
    return resp;
}

/// Convenience: G(jw) at a single frequency.
inline ComplexMatrix freq_response_at(const StateSpaceModel& model, double omega) {
    return freq_response(model, {omega}).gains.front();
}

/// Change of state coordinates z = T x: (T A T^{-1}, T B, C T^{-1}, D).
inline StateSpaceModel similarity_transform(const StateSpaceModel& model, const Matrix& t) {
    if (!t.is_square() || t.rows() != model.n_x())
        throw ShapeError("similarity_transform: T must be " + std::to_string(model.n_x()) +
                         "x" + std::to_string(model.n_x()) + ", got " + t.shape_string());
    const Matrix t_inv = solve_linear(t, Matrix::identity(t.rows()), "similarity transform");
    StateSpaceModel out(t * model.A * t_inv, t * model.B, model.C * t_inv, model.D);
    out.input_labels = model.input_labels;
    out.output_labels = model.output_labels;
    return out;
}

} // namespace covkit
