#pragma once

#include <cstdint>

#include "tpmsvm/conic.hpp"
#include "tpmsvm/dataset.hpp"
#include "tpmsvm/qp_solver.hpp"
#include "tpmsvm/rng.hpp"
#include "tpmsvm/trainer.hpp"

namespace tpmsvm::testing {

/// Box-simplex QP with Q = G'G for a random (m+2) x m Gaussian G.
QpProblem random_box_simplex(SplitMix64& rng, int m);

/// Program with a strictly feasible primal point and a strictly feasible dual
/// point, so an optimum exists. Mixes free, nonnegative and second-order blocks.
ConicProgram random_conic_program(SplitMix64& rng, int num_vars, int num_rows);

/// m samples in n dimensions, labels cycling through 1..C, class c centred at
/// distance `shift` on a circle in (x1, x2), or at `shift * c` on the line when n == 1.
Dataset random_classes(SplitMix64& rng, int m, int n, int C, double shift = 2.0);

/// C Gaussian blobs in the plane around fixed centres, `per` samples each.
Dataset gaussian_blobs(SplitMix64& rng, int per, double spread);

/// Hyperparameters drawn from the experiment grid.
Hyperparams random_hyperparams(SplitMix64& rng);

/// Sum of the absolute values of the objective terms at (w, theta); the scale
/// against which objective agreement is measured.
double linear_term_scale(const Dataset& data, int c, const Hyperparams& h, const VectorRef& w, double theta);
double kernel_term_scale(const Dataset& data, int c, const Hyperparams& h, const Matrix& K, const VectorRef& beta,
                         double theta);

}  // namespace tpmsvm::testing
