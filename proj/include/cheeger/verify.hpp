#pragma once

#include <string>
#include <vector>

#include "cheeger/geometry.hpp"
#include "cheeger/solver.hpp"
#include "json.hpp"

namespace cheeger {

struct CheckOutcome {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<CheckOutcome> checks;
    bool all_passed() const;
    nlohmann::json to_json() const;
    /// One aligned line per check.
    std::string matrix() const;
};

struct VerifyOptions {
    std::vector<double> schedule{1.6, 1.4, 1.2, 1.1};
    int num_levels = 128;
    bool convex = false;
    double torsgrad_tolerance = 1e-3;
    double coarea_tolerance = 0.03;
    double talenti_slack = 0.03;
};

/// Solves along the schedule (warm-started; an unconverged solve keeps its
/// last iterate) and runs the invariant checks on every field:
/// gradient identity, quotient bound, upper bound on h, coarea, Talenti
/// comparison, boundary touch, Cheeger volume bound and Poincare inequality.
VerifyReport run_verification(const GridPtr& grid, const SolverConfig& base, const VerifyOptions& options = {});

}  // namespace cheeger
