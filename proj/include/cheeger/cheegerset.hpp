#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cheeger/geometry.hpp"
#include "cheeger/solver.hpp"

namespace cheeger {

class CheegerSetError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct LevelSetRecord {
    double t = 0.0;
    double area = 0.0;
    double perimeter = 0.0;
    double quotient = 0.0;  // perimeter / area
    bool touches_boundary = false;
    /// Smallest distance from the level contour to the domain boundary.
    double boundary_gap = 0.0;
};

/// L1: u = phi / ||phi||_1. LInfinity: u = phi / ||phi||_inf.
enum class Normalization { L1, LInfinity };

struct CheegerSetResult {
    explicit CheegerSetResult(ScalarField u) : normalized_field(std::move(u)) {}

    ScalarField normalized_field;
    Normalization normalization = Normalization::L1;
    std::vector<LevelSetRecord> levels;
    LevelSetRecord best;
    std::size_t best_index = 0;
    double h_from_set = 0.0;
    /// int |u - chi_E / |E||, E the pixel set {u > best.t}; only meaningful
    /// for the L1 normalization.
    double indicator_deviation = 0.0;
    /// ||u||_1 after normalization.
    double normalized_l1 = 0.0;
    /// bv_objective(u) / int u, independent of the normalization.
    double bv_ratio = 0.0;
};

/// Samples `num_levels` thresholds t_k = k max(u) / (num_levels + 1) and
/// measures every super-level set. The best level has the smallest
/// quotient; quotients within a relative 1e-6 are resolved toward the
/// larger area.
CheegerSetResult extract_cheeger(const ScalarField& field, int num_levels,
                                 Normalization normalization = Normalization::L1);
CheegerSetResult extract_cheeger(const TorsionSolveResult& result, int num_levels,
                                 Normalization normalization = Normalization::L1);

/// Total variation over the plane of the field extended by zero: the
/// variation inside the domain plus the integral of the boundary trace.
double bv_objective(const ScalarField& field);

struct CoareaCheck {
    double tv = 0.0;
    double coarea_sum = 0.0;
    double relative_gap = 0.0;
};

/// Compares bv_objective with a midpoint sum of super-level perimeters.
CoareaCheck coarea_check(const ScalarField& field, int num_levels);

/// Distance from the contour of {u > t} to the domain boundary (infinite
/// when the set is empty).
double contour_boundary_gap(const ScalarField& field, double t);

/// True where a level's contour comes within 1.5 grid spacings of the boundary.
std::vector<bool> boundary_touch_check(const std::vector<LevelSetRecord>& levels, const Grid2D& grid);

double indicator_deviation(const ScalarField& u, const LevelSetRecord& best);

struct RadialSample {
    double radius = 0.0;
    double value = 0.0;
};

/// Decreasing rearrangement: the k-th largest nodal value is placed at the
/// radius enclosing the area of the k nodes above it (midpoint rule).
/// At most `max_samples` evenly spaced samples are returned (0: all).
std::vector<RadialSample> schwarz_symmetrize(const ScalarField& field, std::size_t max_samples = 0);

/// Largest excess of the decreasing rearrangement of `field` over the
/// p-torsion function of the disk with the same (exact) area, relative to
/// that function's maximum.
double talenti_excess(const ScalarField& field, double p);

/// omega_N (N/h)^N <= area * (1 + slack)
bool volume_bound_check(const LevelSetRecord& best, double h_est, int N = 2, double slack = 0.03);

}  // namespace cheeger
