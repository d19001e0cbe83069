#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cheeger/analytic.hpp"
#include "cheeger/geometry.hpp"
#include "cheeger/solver.hpp"
#include "json.hpp"

namespace cheeger {

class EstimatorError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SweepRecord {
    double p = 0.0;
    double l1_norm = 0.0;
    double sup_norm = 0.0;
    double h_l1 = 0.0;     // l1^{1-p}
    double h_sup = 0.0;    // sup^{1-p}
    double h_upper = 0.0;  // (|Omega| / l1)^{(p-1)/p}
    double quotient_lower = 0.0;
    int iterations = 0;
    double gradient_lp = 0.0;
    double weak_residual = 0.0;
    bool converged = true;
};

struct SweepFailure {
    double p = 0.0;
    std::string message;
};

struct SweepResult {
    std::vector<SweepRecord> records;  // decreasing p
    std::vector<SweepFailure> failures;
    /// Solution at the smallest p that converged.
    std::optional<TorsionSolveResult> last_solution;
};

struct SweepOptions {
    /// Warm-start each p from the previous one. Off: every p starts cold and
    /// the solves may run concurrently.
    bool warm_start = true;
    int threads = 1;
};

/// Default schedule 1.6, 1.4, 1.3, 1.2, 1.15, 1.1, 1.05.
std::vector<double> default_schedule();

/// Throws EstimatorError unless the schedule is strictly decreasing with
/// every p in [1.02, 4].
void validate_schedule(const std::vector<double>& schedule);

/// Builds a record from a converged (or last) iterate; `area` is |Omega|.
SweepRecord make_record(const TorsionSolveResult& r, double area, int N = 2);

/// A failed solve is reported in `failures` and the sweep continues.
SweepResult run_sweep(const GridPtr& grid, const std::vector<double>& schedule, const SolverConfig& base,
                      const SweepOptions& options = {});

struct CheegerEstimate {
    std::vector<SweepRecord> records;
    double h_extrapolated_l1 = 0.0;
    double h_extrapolated_sup = 0.0;
    double h_bracket_upper = 0.0;
    double fit_residual = 0.0;
    double slope_l1 = 0.0;
    double slope_sup = 0.0;
    std::vector<double> fit_p;  // p values used by the fit
    bool low_confidence = false;
};

enum class ExtrapolationModel {
    /// h(p) = a + b (p-1)
    Linear,
    /// log h(p) - (p-1) log(p/(p-1)) = a + b (p-1); exact for the sup
    /// estimator on balls.
    LogCorrected,
};

/// Fits each estimator over the four smallest p and evaluates the model at
/// p = 1. fit_residual is the largest deviation (in units of h) between
/// either fitted model and its data.
CheegerEstimate extrapolate(const std::vector<SweepRecord>& records,
                            ExtrapolationModel model = ExtrapolationModel::LogCorrected);

/// Integral of the field over its BV objective: a lower bound for the limit
/// of ||phi_p||_1^{p-1} = 1/h, i.e. its inverse bounds h from above.
double jp_lower_bound_witness(const ScalarField& field);

struct BoundRow {
    double p = 0.0;
    LambdaBounds lambda;
    bool chain_holds = true;
    double quotient_lower = 0.0;
    double l1_over_sup = 0.0;
    std::optional<ConvexEstimates> convex;
};

struct BoundTable {
    std::vector<BoundRow> rows;
    double area = 0.0;
    std::optional<double> perimeter;
    bool convex = false;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

/// Relative slack used when checking the eigenvalue chain on discrete norms.
double discrete_chain_tolerance(double p);

BoundTable bound_table(const std::vector<SweepRecord>& records, double area, std::optional<double> exact_perimeter,
                       bool convex, int N = 2);

nlohmann::json to_json(const SweepRecord& r);
nlohmann::json to_json(const CheegerEstimate& e);
std::string sweep_csv(const std::vector<SweepRecord>& records);

}  // namespace cheeger
