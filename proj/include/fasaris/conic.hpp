#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fasaris {

enum class ConstraintSense { LE, EQ, GE };

struct TraceConstraint {
    Eigen::MatrixXcd a;  // Hermitian coefficient matrix
    ConstraintSense sense = ConstraintSense::LE;
    double rhs = 0.0;
};

struct EntryPin {
    int row = 0;
    int col = 0;
    std::complex<double> value{0.0, 0.0};
};

// A small semidefinite program over one Hermitian PSD variable:
// maximize Re Tr(C X) subject to Re Tr(A_k X) {<=,=,>=} b_k and entry pins.
struct ConicProblem {
    int dim = 0;
    Eigen::MatrixXcd objective;  // C, Hermitian
    std::vector<TraceConstraint> constraints;
    std::vector<EntryPin> fixed_entries;
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

struct ConeSolution {
    Eigen::MatrixXcd x;
    double objective_value = 0.0;
    // valid upper bound on the optimum whenever the dual iterate was
    // feasible to ~1e-7 (NaN otherwise); callers can verify near-optimality
    // of reconstructed points against it
    double dual_bound = std::numeric_limits<double>::quiet_NaN();
    SolveStatus status = SolveStatus::NumericalFailure;
    double solver_tolerance = 1e-8;
    int iterations = 0;
};

// Dense primal-dual interior-point solve (HKM direction, Mehrotra
// predictor-corrector) with Ruiz equilibration. Inequalities get slack
// entries appended to the matrix variable. Throws std::invalid_argument on
// malformed input (non-Hermitian data, oversized dimension).
ConeSolution solve_sdp(const ConicProblem& p, double tolerance = 1e-8);

// ---- 2-D concave QP ---------------------------------------------------

struct HalfPlane {
    Eigen::Vector2d a;  // a^T t <= c
    double c = 0.0;
};

struct Disc {
    Eigen::Vector2d center;
    double radius = 0.0;  // ||t - center|| <= radius
};

// maximize 0.5 t^T H t + b^T t, H symmetric negative definite, over the box
// intersected with the half-planes and (optionally) one disc.
struct Qp2dProblem {
    Eigen::Matrix2d h;
    Eigen::Vector2d b;
    std::vector<HalfPlane> cuts;
    Eigen::Vector2d box_lo{-1.0, -1.0};
    Eigen::Vector2d box_hi{1.0, 1.0};
    std::optional<Disc> disc;
};

struct Qp2dResult {
    bool feasible = false;
    Eigen::Vector2d t{0.0, 0.0};
    double objective = 0.0;
    double kkt_residual = 0.0;
};

// Exact active-set enumeration: every candidate active set gets a closed-form
// (or 1-D secular) solve, feasible candidates are compared directly, and the
// winner's KKT residual is reported. Throws on H not negative definite.
Qp2dResult solve_qp2d(const Qp2dProblem& q);

} // namespace fasaris
