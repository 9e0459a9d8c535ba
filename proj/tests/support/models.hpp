#pragma once

// Reference systems shared across test suites.

#include <covkit/matrix.hpp>
#include <covkit/state_space.hpp>

namespace testsup {

/// Scalar system x' = a x + b u, p = x.
inline covkit::StateSpaceModel scalar_system(double a, double b) {
    return covkit::StateSpaceModel(covkit::Matrix::from_rows({{a}}),
                                   covkit::Matrix::from_rows({{b}}),
                                   covkit::Matrix::from_rows({{1.0}}));
}

/// Two-input two-output bench model: a grid of four lightly-to-critically
/// damped second-order sections, 8 states total.
inline covkit::StateSpaceModel mimo_example() {
    return covkit::mimo_from_blocks(
        {{covkit::second_order_siso(1.0, 10.0, 0.07), covkit::second_order_siso(0.2, 15.0, 1.0)},
         {covkit::second_order_siso(0.2, 8.0, 1.0), covkit::second_order_siso(1.0, 15.0, 0.04)}});
}

} // namespace testsup
