#pragma once

#include <stdexcept>
#include <string>

namespace cheeger {

class AnalyticError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The three values bracketing the first p-Laplacian eigenvalue are out of order.
class BoundChainViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Volume of the unit ball in R^N.
double unit_ball_volume(int N);

struct BallTorsionParams {
    int dimension = 2;
    double radius = 1.0;
    double p = 2.0;
};

/// Torsion function of the ball B_R at distance r from the centre.
double ball_torsion(const BallTorsionParams& params, double r);
/// Value at the centre, i.e. the sup norm.
double ball_torsion_sup(const BallTorsionParams& params);
/// Integral of the torsion function over B_R.
double ball_torsion_l1(const BallTorsionParams& params);
/// sup^{1-p}, computed in log space so p close to 1 does not underflow.
double ball_sup_power(const BallTorsionParams& params);

/// N * omega_N^{p/N} * (p/(p-1))^{p-1}
double c_np(int N, double p);

/// N * int_0^1 (1-t)^alpha t^{N-1} dt
double i_beta(double alpha, int N);

struct LambdaBounds {
    double lower_geometric = 0.0;  // C_{N,p} |Omega|^{-p/N}
    double lower_sup = 0.0;        // ||phi_p||_inf^{1-p}
    double upper_l1 = 0.0;         // (|Omega| / ||phi_p||_1)^{p-1}
};

/// Throws BoundChainViolation when lower_geometric <= lower_sup <= upper_l1
/// fails by more than `rel_tol` (relative to the larger side).
LambdaBounds lambda_bounds(int N, double p, double area, double l1_norm, double sup_norm, double rel_tol = 1e-10);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
    double width() const { return upper - lower; }
    bool contains(double x) const { return lower <= x && x <= upper; }
};

struct ConvexEstimates {
    double q = 0.0;
    double i_q_n = 0.0;
    Interval est1;  // from the sup norm
    Interval est2;  // from the L1 norm
    double mean_ratio = 0.0;  // (1/|Omega|) int phi_p / ||phi_p||_inf

    /// I(q,N) <= mean_ratio <= 1, with relative slack `rel_tol`.
    bool sandwich_holds(double rel_tol = 1e-12) const;
};

ConvexEstimates convex_estimates(int N, double p, double area, double l1_norm, double sup_norm);

struct SquareReference {
    double h = 0.0;
    double cheeger_area = 0.0;
    double cheeger_perimeter = 0.0;
    double volume_lower_bound = 0.0;
    double perimeter_lower_bound = 0.0;
};

/// Exact Cheeger data of the square [-1,1]^2.
SquareReference square_reference();

/// omega_N (N/h)^N, a lower bound for the volume of any Cheeger set.
double cheeger_volume_bound(int N, double h);

/// int|u|^p <= |Omega|^{p/N} / C_{N,p} * int|grad u|^p
bool poincare_bound_check(int N, double p, double area, double lp_norm_u, double lp_norm_grad,
                          double rel_tol = 1e-10);

/// Lower bound for ||phi_p||_1 / ||phi_p||_inf in terms of the sup norm.
double quotient_lower_bound(int N, double p, double sup_norm);

}  // namespace cheeger
