#include "cheeger/analytic.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace cheeger {

namespace {

void require_dimension(int N, int min_n) {
    if (N < min_n) throw AnalyticError("dimension must be at least " + std::to_string(min_n));
}

void require_p(double p) {
    if (!(p > 1.0) || !std::isfinite(p)) throw AnalyticError("p must be a finite real > 1");
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw AnalyticError(std::string(what) + " must be positive and finite");
}

double log_unit_ball_volume(int N) { return 0.5 * N * std::log(std::numbers::pi) - std::lgamma(0.5 * N + 1.0); }

double log_c_np(int N, double p) {
    return std::log(static_cast<double>(N)) + (p / N) * log_unit_ball_volume(N) + (p - 1.0) * std::log(p / (p - 1.0));
}

// log of the centre value of the ball torsion function
double log_ball_sup(const BallTorsionParams& b) {
    const double q = b.p / (b.p - 1.0);
    return std::log((b.p - 1.0) / b.p) - std::log(static_cast<double>(b.dimension)) / (b.p - 1.0) +
           q * std::log(b.radius);
}

void validate(const BallTorsionParams& b) {
    require_dimension(b.dimension, 1);
    require_positive(b.radius, "radius");
    require_p(b.p);
}

}  // namespace

double unit_ball_volume(int N) {
    require_dimension(N, 1);
    return std::exp(log_unit_ball_volume(N));
}

double ball_torsion(const BallTorsionParams& params, double r) {
    validate(params);
    if (!(r >= 0.0) || r > params.radius)
        throw AnalyticError("ball_torsion: r must lie in [0, R]");
    const double q = params.p / (params.p - 1.0);
    const double rel = 1.0 - std::pow(r / params.radius, q);
    return std::exp(log_ball_sup(params)) * rel;
}

double ball_torsion_sup(const BallTorsionParams& params) {
    validate(params);
    return std::exp(log_ball_sup(params));
}

double ball_sup_power(const BallTorsionParams& params) {
    validate(params);
    return std::exp((1.0 - params.p) * log_ball_sup(params));
}

double ball_torsion_l1(const BallTorsionParams& params) {
    validate(params);
    const double q = params.p / (params.p - 1.0);
    const int N = params.dimension;
    return std::exp(log_ball_sup(params) + log_unit_ball_volume(N) + N * std::log(params.radius)) * q / (q + N);
}

double c_np(int N, double p) {
    require_dimension(N, 1);
    require_p(p);
    return std::exp(log_c_np(N, p));
}

double i_beta(double alpha, int N) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw AnalyticError("i_beta: alpha must be positive");
    require_dimension(N, 1);
    if (N <= 256) {
        // N! / prod_{k=1}^N (alpha + k)
        double v = 1.0;
        for (int k = 1; k <= N; ++k) v *= k / (alpha + k);
        return v;
    }
    return std::exp(std::log(static_cast<double>(N)) + std::lgamma(static_cast<double>(N)) + std::lgamma(alpha + 1.0) -
                    std::lgamma(N + alpha + 1.0));
}

LambdaBounds lambda_bounds(int N, double p, double area, double l1_norm, double sup_norm, double rel_tol) {
    require_dimension(N, 1);
    require_p(p);
    require_positive(area, "area");
    require_positive(l1_norm, "l1_norm");
    if (!(sup_norm > 0.0)) throw AnalyticError("sup_norm must be positive");

    LambdaBounds b;
    b.lower_geometric = std::exp(log_c_np(N, p) - (p / N) * std::log(area));
    b.lower_sup = std::isinf(sup_norm) ? 0.0 : std::exp((1.0 - p) * std::log(sup_norm));
    b.upper_l1 = std::exp((p - 1.0) * (std::log(area) - std::log(l1_norm)));

    auto violated = [&](double lo, double hi) { return lo > hi * (1.0 + rel_tol); };
    if (violated(b.lower_geometric, b.lower_sup) || violated(b.lower_sup, b.upper_l1)) {
        std::ostringstream os;
        os.precision(12);
        os << "eigenvalue bound chain violated: C|Omega|^{-p/N} = " << b.lower_geometric
           << ", sup^{1-p} = " << b.lower_sup << ", (|Omega|/l1)^{p-1} = " << b.upper_l1 << " (p = " << p
           << ", tolerance " << rel_tol << ")";
        throw BoundChainViolation(os.str());
    }
    return b;
}

bool ConvexEstimates::sandwich_holds(double rel_tol) const {
    return i_q_n <= mean_ratio * (1.0 + rel_tol) && mean_ratio <= 1.0 + rel_tol;
}

ConvexEstimates convex_estimates(int N, double p, double area, double l1_norm, double sup_norm) {
    require_dimension(N, 1);
    require_p(p);
    require_positive(area, "area");
    require_positive(l1_norm, "l1_norm");
    require_positive(sup_norm, "sup_norm");

    ConvexEstimates e;
    e.q = p / (p - 1.0);
    e.i_q_n = i_beta(e.q, N);
    const double s = std::exp((1.0 - p) * std::log(sup_norm));
    e.est1 = {s, s * std::exp((1.0 - p) * std::log(e.i_q_n))};
    const double ratio = area / l1_norm;
    e.est2 = {std::exp((p - 1.0) * std::log(ratio * e.i_q_n)), std::exp((p - 1.0) * std::log(ratio))};
    e.mean_ratio = l1_norm / (area * sup_norm);
    return e;
}

SquareReference square_reference() {
    const double pi = std::numbers::pi;
    const double a = 4.0 - pi;
    const double b = 4.0 - 2.0 * std::sqrt(pi);
    SquareReference s;
    s.h = a / b;
    s.cheeger_area = 4.0 - b * b / a;
    s.cheeger_perimeter = 8.0 - (8.0 - 2.0 * pi) * b / a;
    s.volume_lower_bound = cheeger_volume_bound(2, s.h);
    s.perimeter_lower_bound = s.h * s.volume_lower_bound;
    return s;
}

double cheeger_volume_bound(int N, double h) {
    require_dimension(N, 1);
    if (!(h > 0.0)) throw AnalyticError("h must be positive");
    if (std::isinf(h)) return 0.0;
    return std::exp(log_unit_ball_volume(N) + N * (std::log(static_cast<double>(N)) - std::log(h)));
}

bool poincare_bound_check(int N, double p, double area, double lp_norm_u, double lp_norm_grad, double rel_tol) {
    require_dimension(N, 1);
    require_p(p);
    require_positive(area, "area");
    if (!(lp_norm_u >= 0.0) || !(lp_norm_grad >= 0.0)) throw AnalyticError("integrals must be nonnegative");
    const double factor = std::exp((p / N) * std::log(area) - log_c_np(N, p));
    return lp_norm_u <= factor * lp_norm_grad * (1.0 + rel_tol);
}

double quotient_lower_bound(int N, double p, double sup_norm) {
    require_dimension(N, 1);
    require_p(p);
    if (!(sup_norm >= 0.0) || !std::isfinite(sup_norm)) throw AnalyticError("sup_norm must be finite and >= 0");
    if (sup_norm == 0.0) return 0.0;
    const double e = (p + N * (p - 1.0)) / p;
    return std::exp((N / p) * log_c_np(N, p) + e * std::log(p / (p + N * (p - 1.0))) +
                    (N * (p - 1.0) / p) * std::log(sup_norm));
}

}  // namespace cheeger
