#include "cheeger/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "cheeger/analytic.hpp"
#include "cheeger/cheegerset.hpp"
#include "cheeger/estimator.hpp"
#include "cheeger/io.hpp"

namespace cheeger {

bool VerifyReport::all_passed() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

nlohmann::json VerifyReport::to_json() const {
    nlohmann::json j;
    j["all_passed"] = all_passed();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return j;
}

std::string VerifyReport::matrix() const {
    std::size_t width = 0;
    for (const auto& c : checks) width = std::max(width, c.name.size());
    std::string out;
    for (const auto& c : checks) {
        out += c.name + std::string(width - c.name.size() + 2, ' ') + (c.passed ? "PASS" : "FAIL");
        out += "  " + c.detail + "\n";
    }
    return out;
}

namespace {

struct Solved {
    double p;
    ScalarField field;
    bool converged;
};

struct Worst {
    double value = -std::numeric_limits<double>::infinity();
    double p = 0.0;
    bool ok = true;

    void add(double v, double at, bool pass) {
        if (v > value) value = v, p = at;
        ok = ok && pass;
    }
    std::string text(const std::string& what) const {
        return "worst " + what + " " + format_number(value) + " at p = " + format_number(p);
    }
};

}  // namespace

VerifyReport run_verification(const GridPtr& grid, const SolverConfig& base, const VerifyOptions& options) {
    validate_schedule(options.schedule);
    if (options.num_levels < 16) throw EstimatorError("verification needs at least 16 levels");
    const double area = grid->domain().exact_area();

    std::vector<Solved> fields;
    std::optional<ScalarField> warm;
    for (double p : options.schedule) {
        SolverConfig cfg = base;
        cfg.p = p;
        std::optional<TorsionSolveResult> r;
        bool converged = true;
        try {
            r = solve_torsion(grid, cfg, warm ? &*warm : nullptr);
        } catch (const SolverNonConvergence& e) {
            r = e.last_iterate();
            converged = false;
        }
        if (r->field.max_value() > 0.0) warm = r->field;
        fields.push_back({p, r->field, converged});
    }

    VerifyReport report;
    Worst torsgrad, aux2, poincare, talenti, sandwich;
    std::vector<SweepRecord> records;
    int unconverged = 0;
    for (const auto& s : fields) {
        const FieldNorms n = field_norms(s.field, s.p);
        if (!s.converged) ++unconverged;
        const double defect = n.l1 > 0.0 ? std::abs(n.grad_lp - n.l1) / n.l1 : INFINITY;
        torsgrad.add(defect, s.p, defect <= options.torsgrad_tolerance);
        if (!(n.l1 > 0.0) || !(n.sup > 0.0)) continue;

        const double ratio = n.l1 / n.sup;
        const double ql = quotient_lower_bound(2, s.p, n.sup);
        aux2.add(ql - ratio, s.p, ql <= ratio + 1e-6);

        const double factor = std::exp((s.p / 2.0) * std::log(area) - std::log(c_np(2, s.p)));
        poincare.add(n.lp / (factor * n.grad_lp), s.p, poincare_bound_check(2, s.p, area, n.lp, n.grad_lp));

        const double excess = talenti_excess(s.field, s.p);
        talenti.add(excess, s.p, excess <= options.talenti_slack);

        if (options.convex) {
            const auto c = convex_estimates(2, s.p, area, n.l1, n.sup);
            sandwich.add(c.i_q_n - c.mean_ratio, s.p, c.sandwich_holds(discrete_chain_tolerance(s.p)));
        }

        SweepRecord rec;
        rec.p = s.p;
        rec.l1_norm = n.l1;
        rec.sup_norm = n.sup;
        rec.h_l1 = std::pow(n.l1, 1.0 - s.p);
        rec.h_sup = std::pow(n.sup, 1.0 - s.p);
        rec.h_upper = std::pow(area / n.l1, (s.p - 1.0) / s.p);
        records.push_back(rec);
    }

    std::string conv = unconverged ? " (" + std::to_string(unconverged) + " unconverged solves)" : "";
    report.checks.push_back({"gradient identity", torsgrad.ok, torsgrad.text("relative defect") + conv});
    report.checks.push_back({"quotient lower bound", aux2.ok, aux2.text("bound minus ratio")});

    std::optional<double> h_est;
    if (records.size() >= 3) {
        const auto e = extrapolate(records);
        h_est = std::min(e.h_extrapolated_l1, e.h_extrapolated_sup);
        bool ok = true;
        double smallest = INFINITY;
        for (const auto& r : records) {
            ok = ok && r.h_upper >= *h_est;
            smallest = std::min(smallest, r.h_upper);
        }
        report.checks.push_back({"upper bound on h", ok,
                                 "min h_upper " + format_number(smallest) + " vs estimate " + format_number(*h_est)});
    } else {
        report.checks.push_back({"upper bound on h", false, "needs three solved p values"});
    }

    const ScalarField& last = fields.back().field;
    if (last.max_value() > 0.0) {
        const auto co = coarea_check(last, options.num_levels);
        report.checks.push_back({"coarea", co.relative_gap <= options.coarea_tolerance,
                                 "relative gap " + format_number(co.relative_gap)});
    } else {
        report.checks.push_back({"coarea", false, "field vanishes"});
    }
    report.checks.push_back({"symmetrization", talenti.ok, talenti.text("excess")});

    if (last.max_value() > 0.0) {
        const auto cs = extract_cheeger(last, options.num_levels);
        report.checks.push_back({"boundary touch", cs.best.touches_boundary,
                                 "best level gap " + format_number(cs.best.boundary_gap)});
        // h of the extracted set; an extrapolated h below the true value
        // breaks the equality case of the disk.
        const double h_set = cs.best.quotient;
        report.checks.push_back({"volume lower bound", volume_bound_check(cs.best, h_set),
                                 format_number(cheeger_volume_bound(2, h_set)) + " vs area " +
                                     format_number(cs.best.area) + " (h = " + format_number(h_set) + ")"});
    } else {
        report.checks.push_back({"boundary touch", false, "field vanishes"});
        report.checks.push_back({"volume lower bound", false, "field vanishes"});
    }
    report.checks.push_back({"poincare", poincare.ok, poincare.text("ratio")});
    if (options.convex) report.checks.push_back({"convex sandwich", sandwich.ok, sandwich.text("I - mean")});
    return report;
}

}  // namespace cheeger
