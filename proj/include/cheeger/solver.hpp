#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cheeger/geometry.hpp"

namespace cheeger {

class SolverError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Picard: frozen-coefficient steps. Newton: adds the anisotropic part of the
/// Hessian, which keeps the iteration count low as p approaches 1.
enum class SolverMethod { Picard, Newton };

struct SolverConfig {
    double p = 2.0;
    int max_iterations = 400;
    /// Relative energy decrease below which the outer loop counts as stalled.
    double energy_tolerance = 1e-10;
    double regularization_floor = 1e-8;
    /// Reuse a supplied warm start (sweeps pass the previous p's field).
    bool continuation = true;
    SolverMethod method = SolverMethod::Newton;
    int max_linear_iterations = 20000;
    /// Inner solves stop at this residual relative to the load vector.
    double linear_tolerance = 1e-10;
    /// Newton steps may stop earlier, at this fraction of the current residual.
    double newton_forcing = 1e-4;

    /// Throws SolverError when a field is out of range for `grid`.
    void validate(const Grid2D& grid) const;
};

struct TorsionSolveResult {
    explicit TorsionSolveResult(ScalarField f) : field(std::move(f)) {}

    ScalarField field;
    double p = 0.0;
    double l1_norm = 0.0;
    double sup_norm = 0.0;
    double gradient_lp = 0.0;
    double energy = 0.0;
    int iterations = 0;
    int linear_iterations = 0;
    /// Weak-form defect for the test function equal to 1 on the mask.
    double weak_residual = 0.0;
    bool converged = false;
    double final_regularization = 0.0;
    /// Energy after each outer step, regularized with the parameter recorded
    /// at the same position of regularization_history. Non-increasing while
    /// the regularization is unchanged.
    std::vector<double> energy_history;
    std::vector<double> regularization_history;
};

/// Raised when the outer iteration runs out of budget. Carries the last
/// iterate (with its norms) and the energy history.
class SolverNonConvergence : public std::runtime_error {
public:
    SolverNonConvergence(const std::string& what, TorsionSolveResult last)
        : std::runtime_error(what), last_(std::move(last)) {}
    const TorsionSolveResult& last_iterate() const { return last_; }

private:
    TorsionSolveResult last_;
};

/// Minimizes the discrete energy (1/p) sum_c a_c |grad u|_c^p - h^2 sum_n u_n
/// over fields vanishing outside the mask. Cell gradients are built from the
/// cell's four edges; an edge cut by the boundary uses the distance to the
/// boundary crossing, where u = 0.
TorsionSolveResult solve_torsion(const GridPtr& grid, const SolverConfig& config,
                                 const ScalarField* warm_start = nullptr);

/// |sum_c a_c |grad phi|^{p-2} grad phi . grad v - h^2 sum v| / max(1, h^2 sum |v|)
double weak_residual(const ScalarField& phi, double p, const ScalarField& test_field);
double weak_residual(const TorsionSolveResult& result, const ScalarField& test_field);

struct FieldNorms {
    double l1 = 0.0;
    double sup = 0.0;
    double grad_lp = 0.0;
    double lp = 0.0;
};

/// Integrals use the same quadrature as the solver's energy.
FieldNorms field_norms(const ScalarField& field, double p);

/// Discrete total variation int |grad u| restricted to the domain, using the
/// solver's gradients.
double gradient_l1(const ScalarField& field);

}  // namespace cheeger
