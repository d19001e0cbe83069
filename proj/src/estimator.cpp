#include "cheeger/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "cheeger/cheegerset.hpp"
#include "cheeger/io.hpp"

namespace cheeger {

std::vector<double> default_schedule() { return {1.6, 1.4, 1.3, 1.2, 1.15, 1.1, 1.05}; }

void validate_schedule(const std::vector<double>& schedule) {
    if (schedule.empty()) throw EstimatorError("p schedule is empty");
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const double p = schedule[k];
        if (!(p >= 1.02 && p <= 4.0)) throw EstimatorError("p schedule entries must lie in [1.02, 4]");
        if (k > 0 && !(p < schedule[k - 1])) throw EstimatorError("p schedule must be strictly decreasing");
    }
}

SweepRecord make_record(const TorsionSolveResult& r, double area, int N) {
    if (!(area > 0.0)) throw EstimatorError("area must be positive");
    if (!(r.l1_norm > 0.0) || !(r.sup_norm > 0.0)) throw EstimatorError("torsion function vanishes");
    const double p = r.p;
    SweepRecord rec;
    rec.p = p;
    rec.l1_norm = r.l1_norm;
    rec.sup_norm = r.sup_norm;
    rec.h_l1 = std::exp((1.0 - p) * std::log(r.l1_norm));
    rec.h_sup = std::exp((1.0 - p) * std::log(r.sup_norm));
    rec.h_upper = std::exp((p - 1.0) / p * (std::log(area) - std::log(r.l1_norm)));
    rec.quotient_lower = quotient_lower_bound(N, p, r.sup_norm);
    rec.iterations = r.iterations;
    rec.gradient_lp = r.gradient_lp;
    rec.weak_residual = r.weak_residual;
    rec.converged = r.converged;
    return rec;
}

namespace {

struct Outcome {
    std::optional<TorsionSolveResult> result;
    std::optional<TorsionSolveResult> partial;
    std::string error;
};

Outcome solve_one(const GridPtr& grid, SolverConfig cfg, double p, const ScalarField* warm) {
    cfg.p = p;
    Outcome o;
    try {
        o.result = solve_torsion(grid, cfg, warm);
    } catch (const SolverNonConvergence& e) {
        o.error = e.what();
        o.partial = e.last_iterate();
    }
    return o;
}

}  // namespace

SweepResult run_sweep(const GridPtr& grid, const std::vector<double>& schedule, const SolverConfig& base,
                      const SweepOptions& options) {
    if (!grid) throw EstimatorError("grid is null");
    validate_schedule(schedule);
    const double area = grid->domain().exact_area();

    std::vector<Outcome> outcomes(schedule.size());
    if (options.warm_start) {
        std::optional<ScalarField> warm;
        for (std::size_t k = 0; k < schedule.size(); ++k) {
            outcomes[k] = solve_one(grid, base, schedule[k], warm ? &*warm : nullptr);
            if (outcomes[k].result)
                warm = outcomes[k].result->field;
            else if (outcomes[k].partial && outcomes[k].partial->field.max_value() > 0.0)
                warm = outcomes[k].partial->field;
        }
    } else {
        const int threads = std::clamp(options.threads, 1, static_cast<int>(schedule.size()));
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::exception_ptr error;
        auto worker = [&] {
            for (std::size_t k; (k = next++) < schedule.size();) {
                try {
                    outcomes[k] = solve_one(grid, base, schedule[k], nullptr);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    SweepResult out;
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        auto& o = outcomes[k];
        if (o.result) {
            out.records.push_back(make_record(*o.result, area));
            out.last_solution = std::move(o.result);
        } else {
            out.failures.push_back({schedule[k], o.error});
        }
    }
    return out;
}

namespace {

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw EstimatorError("extrapolation needs distinct p values");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

double correction(double p) { return (p - 1.0) * std::log(p / (p - 1.0)); }

}  // namespace

CheegerEstimate extrapolate(const std::vector<SweepRecord>& records, ExtrapolationModel model) {
    if (records.size() < 3) throw EstimatorError("extrapolation needs at least three p values");
    std::vector<SweepRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.p < b.p; });
    for (std::size_t k = 1; k < sorted.size(); ++k)
        if (sorted[k].p == sorted[k - 1].p) throw EstimatorError("extrapolation needs distinct p values");
    for (const auto& r : sorted)
        if (!(r.p > 1.0) || !(r.h_l1 > 0.0) || !(r.h_sup > 0.0)) throw EstimatorError("invalid sweep record");
    const std::size_t m = std::min<std::size_t>(4, sorted.size());

    CheegerEstimate e;
    e.records = records;
    std::vector<double> x, yl, ys;
    for (std::size_t k = 0; k < m; ++k) {
        const auto& r = sorted[k];
        e.fit_p.push_back(r.p);
        x.push_back(r.p - 1.0);
        if (model == ExtrapolationModel::Linear) {
            yl.push_back(r.h_l1);
            ys.push_back(r.h_sup);
        } else {
            yl.push_back(std::log(r.h_l1) - correction(r.p));
            ys.push_back(std::log(r.h_sup) - correction(r.p));
        }
    }
    const LineFit fl = least_squares(x, yl);
    const LineFit fs = least_squares(x, ys);
    auto eval = [&](const LineFit& f, std::size_t k) {
        const double lin = f.intercept + f.slope * x[k];
        return model == ExtrapolationModel::Linear ? lin : std::exp(lin + correction(sorted[k].p));
    };
    for (std::size_t k = 0; k < m; ++k)
        e.fit_residual = std::max({e.fit_residual, std::abs(eval(fl, k) - sorted[k].h_l1),
                                   std::abs(eval(fs, k) - sorted[k].h_sup)});

    if (model == ExtrapolationModel::Linear) {
        e.h_extrapolated_l1 = fl.intercept;
        e.h_extrapolated_sup = fs.intercept;
    } else {
        e.h_extrapolated_l1 = std::exp(fl.intercept);
        e.h_extrapolated_sup = std::exp(fs.intercept);
    }
    e.slope_l1 = fl.slope;
    e.slope_sup = fs.slope;
    e.h_bracket_upper = std::numeric_limits<double>::infinity();
    for (const auto& r : sorted)
        if (r.h_upper > 0.0) e.h_bracket_upper = std::min(e.h_bracket_upper, r.h_upper);
    const double scale = std::min(std::abs(e.h_extrapolated_l1), std::abs(e.h_extrapolated_sup));
    e.low_confidence = !(e.fit_residual <= 0.2 * scale);
    return e;
}

double jp_lower_bound_witness(const ScalarField& field) {
    const Grid2D& g = field.grid();
    double mass = 0.0;
    for (std::size_t k = 0; k < g.node_count(); ++k)
        if (g.inside(k)) mass += field[k];
    mass *= g.spacing() * g.spacing();
    const double tv = bv_objective(field);
    if (!(tv > 0.0)) throw EstimatorError("field has no variation");
    return mass / tv;
}

double discrete_chain_tolerance(double p) { return 0.1 * (p - 1.0); }

BoundTable bound_table(const std::vector<SweepRecord>& records, double area, std::optional<double> exact_perimeter,
                       bool convex, int N) {
    if (!(area > 0.0)) throw EstimatorError("area must be positive");
    BoundTable t;
    t.area = area;
    t.perimeter = exact_perimeter;
    t.convex = convex;
    const double never = std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        BoundRow row;
        row.p = r.p;
        row.lambda = lambda_bounds(N, r.p, area, r.l1_norm, r.sup_norm, never);
        const double tol = discrete_chain_tolerance(r.p);
        row.chain_holds = row.lambda.lower_geometric <= row.lambda.lower_sup * (1.0 + tol) &&
                          row.lambda.lower_sup <= row.lambda.upper_l1 * (1.0 + tol);
        row.quotient_lower = r.quotient_lower;
        row.l1_over_sup = r.l1_norm / r.sup_norm;
        if (convex) row.convex = convex_estimates(N, r.p, area, r.l1_norm, r.sup_norm);
        t.rows.push_back(row);
    }
    return t;
}

nlohmann::json BoundTable::to_json() const {
    nlohmann::json j;
    j["area"] = round_sig(area);
    if (perimeter) {
        j["perimeter"] = round_sig(*perimeter);
        j["perimeter_over_area"] = round_sig(*perimeter / area);
    }
    j["convex"] = convex;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json row{{"p", round_sig(r.p)},
                           {"lambda_lower_geometric", round_sig(r.lambda.lower_geometric)},
                           {"lambda_lower_sup", round_sig(r.lambda.lower_sup)},
                           {"lambda_upper_l1", round_sig(r.lambda.upper_l1)},
                           {"chain_holds", r.chain_holds},
                           {"quotient_lower", round_sig(r.quotient_lower)},
                           {"l1_over_sup", round_sig(r.l1_over_sup)}};
        if (r.convex) {
            const auto& c = *r.convex;
            row["i_q_n"] = round_sig(c.i_q_n);
            row["est1"] = {round_sig(c.est1.lower), round_sig(c.est1.upper)};
            row["est2"] = {round_sig(c.est2.lower), round_sig(c.est2.upper)};
            row["mean_ratio"] = round_sig(c.mean_ratio);
            row["sandwich_holds"] = c.sandwich_holds(discrete_chain_tolerance(r.p));
        }
        j["rows"].push_back(row);
    }
    return j;
}

std::string BoundTable::to_csv() const {
    std::string out = "p,lambda_lower_geometric,lambda_lower_sup,lambda_upper_l1,chain_holds,quotient_lower,l1_over_sup";
    if (perimeter) out += ",perimeter_over_area";
    if (convex) out += ",i_q_n,est1_lower,est1_upper,est2_lower,est2_upper,mean_ratio,sandwich_holds";
    out += "\n";
    for (const auto& r : rows) {
        out += format_number(r.p) + "," + format_number(r.lambda.lower_geometric) + "," +
               format_number(r.lambda.lower_sup) + "," + format_number(r.lambda.upper_l1) + "," +
               (r.chain_holds ? "1" : "0") + "," + format_number(r.quotient_lower) + "," +
               format_number(r.l1_over_sup);
        if (perimeter) out += "," + format_number(*perimeter / area);
        if (r.convex) {
            const auto& c = *r.convex;
            out += "," + format_number(c.i_q_n) + "," + format_number(c.est1.lower) + "," +
                   format_number(c.est1.upper) + "," + format_number(c.est2.lower) + "," +
                   format_number(c.est2.upper) + "," + format_number(c.mean_ratio) + "," +
                   (c.sandwich_holds(discrete_chain_tolerance(r.p)) ? "1" : "0");
        }
        out += "\n";
    }
    return out;
}

nlohmann::json to_json(const SweepRecord& r) {
    return {{"p", round_sig(r.p)},
            {"l1_norm", round_sig(r.l1_norm)},
            {"sup_norm", round_sig(r.sup_norm)},
            {"h_l1", round_sig(r.h_l1)},
            {"h_sup", round_sig(r.h_sup)},
            {"h_upper", round_sig(r.h_upper)},
            {"quotient_lower", round_sig(r.quotient_lower)},
            {"iterations", r.iterations},
            {"gradient_lp", round_sig(r.gradient_lp)},
            {"weak_residual", round_sig(r.weak_residual)},
            {"converged", r.converged}};
}

nlohmann::json to_json(const CheegerEstimate& e) {
    nlohmann::json j{{"h_extrapolated_l1", round_sig(e.h_extrapolated_l1)},
                     {"h_extrapolated_sup", round_sig(e.h_extrapolated_sup)},
                     {"h_bracket_upper", round_sig(e.h_bracket_upper)},
                     {"fit_residual", round_sig(e.fit_residual)},
                     {"slope_l1", round_sig(e.slope_l1)},
                     {"slope_sup", round_sig(e.slope_sup)},
                     {"low_confidence", e.low_confidence}};
    j["fit_p"] = nlohmann::json::array();
    for (double p : e.fit_p) j["fit_p"].push_back(round_sig(p));
    j["records"] = nlohmann::json::array();
    for (const auto& r : e.records) j["records"].push_back(to_json(r));
    return j;
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
    std::string out = "p,l1_norm,sup_norm,h_l1,h_sup,h_upper,quotient_lower,iterations,gradient_lp,weak_residual,converged\n";
    for (const auto& r : records)
        out += format_number(r.p) + "," + format_number(r.l1_norm) + "," + format_number(r.sup_norm) + "," +
               format_number(r.h_l1) + "," + format_number(r.h_sup) + "," + format_number(r.h_upper) + "," +
               format_number(r.quotient_lower) + "," + std::to_string(r.iterations) + "," +
               format_number(r.gradient_lp) + "," + format_number(r.weak_residual) + "," +
               (r.converged ? "1" : "0") + "\n";
    return out;
}

}  // namespace cheeger
