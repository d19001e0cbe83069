// Command-line front end: torsion solves, Cheeger sweeps, bound tables and
// the verification suite.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cheeger/analytic.hpp"
#include "cheeger/cheegerset.hpp"
#include "cheeger/estimator.hpp"
#include "cheeger/geometry.hpp"
#include "cheeger/io.hpp"
#include "cheeger/solver.hpp"
#include "cheeger/verify.hpp"

namespace fs = std::filesystem;
using namespace cheeger;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string domain;
    int resolution = 128;
    std::string out;
    std::vector<std::string> formats{"json", "csv"};
    int max_iterations = 400;
};

void add_common(CLI::App* cmd, Common& c, bool needs_domain = true) {
    auto* d = cmd->add_option("--domain", c.domain, "domain description (JSON file)");
    if (needs_domain) d->required();
    cmd->add_option("--resolution", c.resolution, "grid cells across the longer side")
        ->check(CLI::Range(16, 4096));
    cmd->add_option("--out", c.out, "output directory");
    cmd->add_option("--format", c.formats, "artifacts to write: csv,json,svg,bin")
        ->delimiter(',')
        ->check(CLI::IsMember({"csv", "json", "svg", "bin"}));
    cmd->add_option("--max-iterations", c.max_iterations, "outer solver iterations per p")
        ->check(CLI::PositiveNumber);
}

bool wants(const Common& c, const std::string& fmt) {
    return !c.out.empty() && std::find(c.formats.begin(), c.formats.end(), fmt) != c.formats.end();
}

void write(const Common& c, const std::string& name, const std::string& content) {
    write_atomic(fs::path(c.out) / name, content);
}

DomainSpec load_domain(const std::string& path) {
    if (!fs::exists(path)) throw UsageError("domain file not found: " + path);
    return DomainSpec::from_file(path);
}

void check_p(double p) {
    if (!(p > 1.0)) throw UsageError("p must be greater than 1 (got " + format_number(p) + ")");
    if (p > 4.0) throw UsageError("p must not exceed 4 (got " + format_number(p) + ")");
}

int threads_from_env() {
    const char* env = std::getenv("CHEEGER_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) throw UsageError("CHEEGER_THREADS must be a positive integer");
    return static_cast<int>(std::min<long>(n, 256));
}

SolverConfig solver_config(const Common& c) {
    SolverConfig cfg;
    cfg.max_iterations = c.max_iterations;
    return cfg;
}

void print(const std::string& key, double value) { std::cout << key << ": " << format_number(value) << "\n"; }

nlohmann::json norms_json(const TorsionSolveResult& r) {
    return {{"p", round_sig(r.p)},
            {"l1_norm", round_sig(r.l1_norm)},
            {"sup_norm", round_sig(r.sup_norm)},
            {"gradient_lp", round_sig(r.gradient_lp)},
            {"energy", round_sig(r.energy)},
            {"weak_residual", round_sig(r.weak_residual)},
            {"iterations", r.iterations},
            {"linear_iterations", r.linear_iterations},
            {"converged", r.converged},
            {"final_regularization", round_sig(r.final_regularization)}};
}

// torsion -------------------------------------------------------------------

struct TorsionArgs {
    Common common;
    double p = 2.0;
    std::string method = "newton";
};

int cmd_torsion(const TorsionArgs& a) {
    check_p(a.p);
    const DomainSpec domain = load_domain(a.common.domain);
    const GridPtr grid = rasterize(domain, a.common.resolution);
    SolverConfig cfg = solver_config(a.common);
    cfg.p = a.p;
    cfg.method = a.method == "picard" ? SolverMethod::Picard : SolverMethod::Newton;

    int status = kOk;
    std::optional<TorsionSolveResult> result;
    std::string error;
    try {
        result = solve_torsion(grid, cfg);
    } catch (const SolverNonConvergence& e) {
        result = e.last_iterate();
        error = e.what();
        status = kFailure;
    }
    const TorsionSolveResult& r = *result;

    print("l1_norm", r.l1_norm);
    print("sup_norm", r.sup_norm);
    print("energy", r.energy);
    print("weak_residual", r.weak_residual);
    print("gradient_lp", r.gradient_lp);
    std::cout << "iterations: " << r.iterations << "\nconverged: " << (r.converged ? "true" : "false") << "\n";
    if (status != kOk) std::cerr << "error: " << error << "\n";

    if (!a.common.out.empty()) {
        nlohmann::json j = norms_json(r);
        j["domain"] = domain.to_json();
        j["resolution"] = a.common.resolution;
        if (!error.empty()) j["error"] = error;
        write(a.common, "torsion.json", j.dump(2) + "\n");
        if (wants(a.common, "csv")) write(a.common, "field.csv", field_csv(r.field));
        if (wants(a.common, "bin")) write(a.common, "field.bin", field_binary(r.field));
        if (wants(a.common, "svg") && r.sup_norm > 0.0)
            write(a.common, "field.svg", contour_svg(r.field, 0.5 * r.sup_norm));
    }
    return status;
}

// cheeger -------------------------------------------------------------------

struct CheegerArgs {
    Common common;
    std::vector<double> schedule;
    int levels = 128;
    bool convex = false;
};

std::string levels_csv(const CheegerSetResult& cs) {
    std::string out = "level_index,t,area,perimeter,quotient,touches_boundary,boundary_gap\n";
    for (std::size_t k = 0; k < cs.levels.size(); ++k) {
        const auto& l = cs.levels[k];
        out += std::to_string(k) + "," + format_number(l.t) + "," + format_number(l.area) + "," +
               format_number(l.perimeter) + "," + format_number(l.quotient) + "," +
               (l.touches_boundary ? "1" : "0") + "," + format_number(l.boundary_gap) + "\n";
    }
    return out;
}

nlohmann::json level_json(const LevelSetRecord& l) {
    return {{"t", round_sig(l.t)},
            {"area", round_sig(l.area)},
            {"perimeter", round_sig(l.perimeter)},
            {"quotient", round_sig(l.quotient)},
            {"touches_boundary", l.touches_boundary},
            {"boundary_gap", round_sig(l.boundary_gap)}};
}

int cmd_cheeger(const CheegerArgs& a) {
    const std::vector<double> schedule = a.schedule.empty() ? default_schedule() : a.schedule;
    for (double p : schedule) check_p(p);
    try {
        validate_schedule(schedule);
    } catch (const EstimatorError& e) {
        throw UsageError(e.what());
    }
    if (a.levels < 16) throw UsageError("--levels must be at least 16");
    const DomainSpec domain = load_domain(a.common.domain);
    const GridPtr grid = rasterize(domain, a.common.resolution);

    SweepOptions opts;
    opts.threads = threads_from_env();
    opts.warm_start = opts.threads == 1;
    const SweepResult sweep = run_sweep(grid, schedule, solver_config(a.common), opts);
    for (const auto& f : sweep.failures) std::cerr << "warning: p = " << format_number(f.p) << ": " << f.message << "\n";
    if (sweep.records.empty() || !sweep.last_solution) {
        std::cerr << "error: no p value converged\n";
        return kFailure;
    }

    nlohmann::json doc;
    doc["domain"] = domain.to_json();
    doc["resolution"] = a.common.resolution;
    doc["failures"] = nlohmann::json::array();
    for (const auto& f : sweep.failures) doc["failures"].push_back({{"p", round_sig(f.p)}, {"message", f.message}});

    bool low_confidence = !sweep.failures.empty();
    if (sweep.records.size() >= 3) {
        const CheegerEstimate est = extrapolate(sweep.records);
        low_confidence = low_confidence || est.low_confidence;
        doc["estimate"] = to_json(est);
        print("h_extrapolated_l1", est.h_extrapolated_l1);
        print("h_extrapolated_sup", est.h_extrapolated_sup);
        print("h_bracket_upper", est.h_bracket_upper);
    } else {
        low_confidence = true;
        double upper = INFINITY;
        for (const auto& r : sweep.records) upper = std::min(upper, r.h_upper);
        doc["estimate"] = {{"h_bracket_upper", round_sig(upper)}};
        print("h_bracket_upper", upper);
        std::cerr << "warning: fewer than three p values converged; no extrapolation\n";
    }
    doc["estimate"]["low_confidence"] = low_confidence;

    const CheegerSetResult cs = extract_cheeger(*sweep.last_solution, a.levels);
    doc["best_level"] = level_json(cs.best);
    doc["best_level"]["p"] = round_sig(sweep.last_solution->p);
    doc["indicator_deviation"] = round_sig(cs.indicator_deviation);
    doc["volume_lower_bound"] = round_sig(cheeger_volume_bound(2, cs.best.quotient));
    print("best_level_quotient", cs.best.quotient);
    print("best_level_area", cs.best.area);
    print("best_level_perimeter", cs.best.perimeter);
    if (low_confidence) std::cout << "low_confidence: true\n";

    const bool convex = a.convex;
    const BoundTable table = bound_table(sweep.records, domain.exact_area(), domain.exact_perimeter(), convex);
    doc["bounds"] = table.to_json();

    if (!a.common.out.empty()) {
        if (wants(a.common, "json")) write(a.common, "estimate.json", doc.dump(2) + "\n");
        if (wants(a.common, "csv")) {
            write(a.common, "sweep.csv", sweep_csv(sweep.records));
            write(a.common, "levels.csv", levels_csv(cs));
            write(a.common, "contour.csv", contours_csv(cs.normalized_field, {cs.best.t}));
            write(a.common, "bounds.csv", table.to_csv());
        }
        if (wants(a.common, "svg")) write(a.common, "contour.svg", contour_svg(cs.normalized_field, cs.best.t));
        if (wants(a.common, "bin")) write(a.common, "field.bin", field_binary(sweep.last_solution->field));
    }
    return kOk;
}

// bounds --------------------------------------------------------------------

struct BoundsArgs {
    Common common;
    int dim = 2;
    std::optional<double> p;
    std::optional<double> area, l1, sup, h;
    bool closed_form = false;
    double radius = 1.0;
    bool square_reference = false;
    bool convex = false;
};

std::string table_row(const std::vector<std::pair<std::string, double>>& cells) {
    std::ostringstream os;
    for (const auto& [name, value] : cells) {
        std::string s = name + " = " + format_number(value);
        os << s << std::string(s.size() < 34 ? 34 - s.size() : 1, ' ');
    }
    std::string line = os.str();
    line.erase(line.find_last_not_of(' ') + 1);
    return line + "\n";
}

int cmd_bounds(const BoundsArgs& a) {
    nlohmann::json doc;
    if (a.square_reference) {
        const SquareReference s = square_reference();
        std::cout << table_row({{"h", s.h}, {"cheeger_area", s.cheeger_area}, {"cheeger_perimeter", s.cheeger_perimeter}});
        std::cout << table_row({{"volume_lower_bound", s.volume_lower_bound},
                                {"perimeter_lower_bound", s.perimeter_lower_bound}});
        doc["square_reference"] = {{"h", round_sig(s.h)},
                                   {"cheeger_area", round_sig(s.cheeger_area)},
                                   {"cheeger_perimeter", round_sig(s.cheeger_perimeter)},
                                   {"volume_lower_bound", round_sig(s.volume_lower_bound)},
                                   {"perimeter_lower_bound", round_sig(s.perimeter_lower_bound)}};
        if (!a.p) {
            std::cout << doc.dump() << "\n";
            if (!a.common.out.empty()) write(a.common, "bounds.json", doc.dump(2) + "\n");
            return kOk;
        }
    }
    if (!a.p) throw UsageError("--p is required");
    const double p = *a.p;
    check_p(p);
    if (a.dim < 1 || a.dim > 64) throw UsageError("--dim must lie in [1, 64]");
    const int N = a.dim;

    double area = 0, l1 = 0, sup = 0;
    if (a.closed_form) {
        const BallTorsionParams ball{N, a.radius, p};
        area = unit_ball_volume(N) * std::pow(a.radius, N);
        l1 = ball_torsion_l1(ball);
        sup = ball_torsion_sup(ball);
    } else if (!a.common.domain.empty()) {
        if (N != 2) throw UsageError("domains are two-dimensional; use --dim 2");
        const DomainSpec domain = load_domain(a.common.domain);
        SolverConfig cfg = solver_config(a.common);
        cfg.p = p;
        const auto r = solve_torsion(rasterize(domain, a.common.resolution), cfg);
        area = domain.exact_area();
        l1 = r.l1_norm;
        sup = r.sup_norm;
    }
    if (a.area) area = *a.area;
    if (a.l1) l1 = *a.l1;
    if (a.sup) sup = *a.sup;
    if (!(area > 0.0) || !(l1 > 0.0) || !(sup > 0.0))
        throw UsageError("need --area, --l1 and --sup, or --closed-form, or --domain");

    LambdaBounds lb;
    try {
        lb = lambda_bounds(N, p, area, l1, sup);
    } catch (const BoundChainViolation& e) {
        std::cerr << "chain violation: " << e.what() << "\n";
        doc["chain_violation"] = e.what();
        std::cout << doc.dump() << "\n";
        return kFailure;
    }
    std::cout << table_row({{"p", p}, {"N", static_cast<double>(N)}, {"area", area}});
    std::cout << table_row({{"lambda_lower_geometric", lb.lower_geometric},
                            {"lambda_lower_sup", lb.lower_sup},
                            {"lambda_upper_l1", lb.upper_l1}});
    std::cout << table_row({{"quotient_lower", quotient_lower_bound(N, p, sup)}, {"l1_over_sup", l1 / sup}});
    doc["p"] = round_sig(p);
    doc["dimension"] = N;
    doc["area"] = round_sig(area);
    doc["l1_norm"] = round_sig(l1);
    doc["sup_norm"] = round_sig(sup);
    doc["lambda"] = {{"lower_geometric", round_sig(lb.lower_geometric)},
                     {"lower_sup", round_sig(lb.lower_sup)},
                     {"upper_l1", round_sig(lb.upper_l1)}};
    doc["quotient_lower"] = round_sig(quotient_lower_bound(N, p, sup));
    if (a.convex) {
        const ConvexEstimates c = convex_estimates(N, p, area, l1, sup);
        std::cout << table_row({{"i_q_n", c.i_q_n}, {"mean_ratio", c.mean_ratio}});
        std::cout << table_row({{"est1_lower", c.est1.lower}, {"est1_upper", c.est1.upper}});
        std::cout << table_row({{"est2_lower", c.est2.lower}, {"est2_upper", c.est2.upper}});
        doc["convex"] = {{"q", round_sig(c.q)},
                         {"i_q_n", round_sig(c.i_q_n)},
                         {"est1", {round_sig(c.est1.lower), round_sig(c.est1.upper)}},
                         {"est2", {round_sig(c.est2.lower), round_sig(c.est2.upper)}},
                         {"mean_ratio", round_sig(c.mean_ratio)},
                         {"sandwich_holds", c.sandwich_holds()}};
    }
    if (a.h) {
        if (!(*a.h > 0.0)) throw UsageError("--cheeger-constant must be positive");
        std::cout << table_row({{"h", *a.h}, {"cheeger_volume_bound", cheeger_volume_bound(N, *a.h)}});
        doc["cheeger_volume_bound"] = round_sig(cheeger_volume_bound(N, *a.h));
    }
    std::cout << doc.dump() << "\n";
    if (!a.common.out.empty()) write(a.common, "bounds.json", doc.dump(2) + "\n");
    return kOk;
}

// verify --------------------------------------------------------------------

struct VerifyArgs {
    Common common;
    std::vector<double> schedule;
    int levels = 128;
    bool convex = false;
};

int cmd_verify(const VerifyArgs& a) {
    VerifyOptions opts;
    if (!a.schedule.empty()) opts.schedule = a.schedule;
    for (double p : opts.schedule) check_p(p);
    try {
        validate_schedule(opts.schedule);
    } catch (const EstimatorError& e) {
        throw UsageError(e.what());
    }
    if (a.levels < 16) throw UsageError("--levels must be at least 16");
    opts.num_levels = a.levels;
    opts.convex = a.convex;
    const DomainSpec domain = load_domain(a.common.domain);
    const VerifyReport report = run_verification(rasterize(domain, a.common.resolution), solver_config(a.common), opts);
    std::cout << report.matrix();
    if (!a.common.out.empty()) write(a.common, "verify.json", report.to_json().dump(2) + "\n");
    return report.all_passed() ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cheeger constants from p-torsion functions"};
    app.require_subcommand(1);

    TorsionArgs ta;
    auto* torsion = app.add_subcommand("torsion", "solve -div(|grad u|^{p-2} grad u) = 1 with zero boundary values");
    add_common(torsion, ta.common);
    torsion->add_option("--p", ta.p, "exponent p > 1");
    torsion->add_option("--method", ta.method, "newton or picard")->check(CLI::IsMember({"newton", "picard"}));

    CheegerArgs ca;
    auto* cheeger = app.add_subcommand("cheeger", "sweep p toward 1 and estimate the Cheeger constant");
    add_common(cheeger, ca.common);
    cheeger->add_option("--schedule", ca.schedule, "strictly decreasing p values")->delimiter(',');
    cheeger->add_option("--levels", ca.levels, "number of level sets sampled");
    cheeger->add_flag("--convex", ca.convex, "include the convex-domain estimates");

    BoundsArgs ba;
    auto* bounds = app.add_subcommand("bounds", "eigenvalue bounds from torsion norms");
    add_common(bounds, ba.common, false);
    bounds->add_option("--p", ba.p, "exponent p > 1");
    bounds->add_option("--dim", ba.dim, "space dimension");
    bounds->add_option("--area", ba.area, "domain measure");
    bounds->add_option("--l1", ba.l1, "L1 norm of the torsion function");
    bounds->add_option("--sup", ba.sup, "sup norm of the torsion function");
    bounds->add_option("--cheeger-constant", ba.h, "Cheeger constant for the volume bound");
    bounds->add_flag("--closed-form", ba.closed_form, "use the exact ball torsion function");
    bounds->add_option("--radius", ba.radius, "ball radius for --closed-form")->check(CLI::PositiveNumber);
    bounds->add_flag("--square-reference", ba.square_reference, "print the reference values for the square");
    bounds->add_flag("--convex", ba.convex, "include the convex-domain estimates");

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "run the invariant checks");
    add_common(verify, va.common);
    verify->add_option("--schedule", va.schedule, "strictly decreasing p values")->delimiter(',');
    verify->add_option("--levels", va.levels, "number of level sets sampled");
    verify->add_flag("--convex", va.convex, "include the convex sandwich check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*torsion) return cmd_torsion(ta);
        if (*cheeger) return cmd_cheeger(ca);
        if (*bounds) return cmd_bounds(ba);
        if (*verify) return cmd_verify(va);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kUsage;
    } catch (const BoundChainViolation& e) {
        std::cerr << "chain violation: " << e.what() << "\n";
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}
