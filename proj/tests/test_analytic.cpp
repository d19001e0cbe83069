#include <cmath>
#include <limits>
#include <numbers>

#include "cheeger/analytic.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cheeger;
using std::numbers::pi;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// omega_N from the Gamma function, written out here.
double omega(int N) { return std::pow(pi, N / 2.0) / std::tgamma(N / 2.0 + 1.0); }

}  // namespace

TEST_CASE("ball torsion profile") {
    CHECK(ball_torsion({2, 1.0, 2.0}, 0.0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(ball_torsion({3, 2.0, 3.0}, 0.0) ==
          doctest::Approx(2.0 / 3.0 / std::sqrt(3.0) * std::pow(2.0, 1.5)).epsilon(1e-13));
    CHECK(ball_torsion({3, 2.0, 3.0}, 0.0) == doctest::Approx(1.0887).epsilon(1e-4));
    for (double p : {1.1, 1.5, 2.0, 3.5}) {
        BallTorsionParams b{2, 1.3, p};
        CHECK(ball_torsion(b, 1.3) == 0.0);
        CHECK(ball_torsion(b, 0.4) > ball_torsion(b, 0.8));
        CHECK(ball_torsion(b, 0.7) == doctest::Approx(testing::disk_torsion(p, 1.3, 0.7)).epsilon(1e-12));
        CHECK(ball_torsion_l1(b) == doctest::Approx(testing::disk_torsion_l1(p, 1.3)).epsilon(1e-10));
        CHECK(ball_torsion_sup(b) == doctest::Approx(testing::disk_torsion(p, 1.3, 0.0)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(ball_torsion({2, 1.0, 2.0}, 1.5), AnalyticError);
    CHECK_THROWS_AS(ball_torsion({2, 1.0, 2.0}, -0.1), AnalyticError);
    CHECK_THROWS_AS(ball_torsion({2, 1.0, 1.0}, 0.1), AnalyticError);
}

TEST_CASE("the constant C_{N,p}") {
    CHECK(c_np(2, 2.0) == doctest::Approx(4 * pi).epsilon(1e-14));
    CHECK(c_np(3, 2.0) == doctest::Approx(3 * std::pow(4 * pi / 3, 2.0 / 3.0) * 2).epsilon(1e-14));
    CHECK(c_np(3, 2.0) == doctest::Approx(15.59).epsilon(1e-3));
    CHECK(rel(c_np(2, 1.0 + 1e-6), 2 * std::sqrt(pi)) <= 1e-4);
    for (int N : {2, 3, 4}) CHECK(rel(c_np(N, 1.0 + 1e-6), N * std::pow(omega(N), 1.0 / N)) <= 1e-4);
    CHECK_THROWS_AS(c_np(2, 1.0), AnalyticError);
    CHECK(unit_ball_volume(3) == doctest::Approx(4 * pi / 3).epsilon(1e-14));
}

TEST_CASE("I(alpha, N) closed values") {
    for (double a : {0.3, 1.0, 2.0, 7.5}) CHECK(i_beta(a, 1) == doctest::Approx(1 / (a + 1)).epsilon(1e-14));
    CHECK(i_beta(2, 2) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(i_beta(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(i_beta(0.0, 2), AnalyticError);
    CHECK_THROWS_AS(i_beta(-1.0, 2), AnalyticError);
}

TEST_CASE("I(alpha, N) recurrence and quadrature") {
    for (double a : {0.5, 1.0, 2.0, 10.0})
        for (int N = 1; N <= 6; ++N) {
            const double next = (N + 1.0) / (N + a + 1.0) * i_beta(a, N);
            CHECK(rel(i_beta(a, N + 1), next) <= 1e-12);
            const double quad =
                N * testing::integrate([&](double t) { return std::pow(1 - t, a) * std::pow(t, N - 1); }, 0.0, 1.0);
            CHECK(rel(i_beta(a, N), quad) <= 1e-9);
        }
    // integer N: N! / ((a+1)...(a+N))
    for (int N = 1; N <= 4; ++N) {
        double prod = 1.0;
        for (int k = 1; k <= N; ++k) prod *= k / (1e3 + k);
        CHECK(rel(i_beta(1e3, N), prod) <= 1e-12);
    }
    // large N takes the log-Gamma path
    CHECK(rel(i_beta(2.5, 257), 257.0 / 259.5 * i_beta(2.5, 256)) <= 1e-10);
    for (int N : {2, 3, 5}) {
        const double v = i_beta(1.7, N);
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("eigenvalue bound chain for the unit disk at p = 2") {
    auto b = lambda_bounds(2, 2.0, pi, pi / 8, 0.25);
    CHECK(b.lower_geometric == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(b.lower_sup == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(b.upper_l1 == doctest::Approx(8.0).epsilon(1e-13));
}

TEST_CASE("ball inputs make the geometric and sup bounds equal") {
    for (int N : {2, 3})
        for (double p : {1.1, 1.5, 2.0, 3.0, 4.0})
            for (double R : {0.5, 1.0, 2.0}) {
                BallTorsionParams ball{N, R, p};
                const double area = omega(N) * std::pow(R, N);
                auto b = lambda_bounds(N, p, area, ball_torsion_l1(ball), ball_torsion_sup(ball));
                CHECK(rel(b.lower_geometric, b.lower_sup) <= 1e-10);
                CHECK(b.lower_sup <= b.upper_l1);
            }
}

TEST_CASE("degenerate norms violate the chain") {
    CHECK_THROWS_AS(lambda_bounds(2, 2.0, pi, pi / 8, std::numeric_limits<double>::infinity()), BoundChainViolation);
    CHECK_THROWS_AS(lambda_bounds(2, 2.0, pi, 0.5, 0.1), BoundChainViolation);
    CHECK_THROWS_AS(lambda_bounds(2, 2.0, pi, 0.0, 0.1), AnalyticError);
}

TEST_CASE("convex estimates") {
    auto c = convex_estimates(2, 2.0, pi, pi / 8, 0.25);
    CHECK(c.q == doctest::Approx(2.0));
    CHECK(c.i_q_n == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(c.mean_ratio == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(c.sandwich_holds());
    CHECK(c.est1.lower <= c.est1.upper);
    CHECK(c.est2.lower <= c.est2.upper);
    CHECK(c.est1.lower == doctest::Approx(4.0));
    CHECK(c.est2.upper == doctest::Approx(8.0));

    // constant field: sup = l1 / area, mean ratio 1
    auto k = convex_estimates(2, 1.5, 4.0, 2.0, 0.5);
    CHECK(k.mean_ratio == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(k.sandwich_holds());

    // intervals collapse as p -> 1 on exact disk data
    double w1 = INFINITY, w2 = INFINITY;
    for (double p : {1.6, 1.3, 1.1, 1.05, 1.01}) {
        BallTorsionParams ball{2, 1.0, p};
        auto e = convex_estimates(2, p, pi, ball_torsion_l1(ball), ball_torsion_sup(ball));
        CHECK(e.est1.width() < w1);
        CHECK(e.est2.width() < w2);
        w1 = e.est1.width();
        w2 = e.est2.width();
    }
    CHECK_THROWS_AS(convex_estimates(2, 2.0, pi, -1.0, 0.25), AnalyticError);
}

TEST_CASE("square reference values") {
    auto s = square_reference();
    const double sp = std::sqrt(pi);
    CHECK(s.h == doctest::Approx((4 - pi) / (4 - 2 * sp)).epsilon(1e-14));
    CHECK(std::abs(s.h - 1.8863) < 1e-4);
    CHECK(std::abs(s.cheeger_area - 3.7587) < 5e-5);
    CHECK(std::abs(s.cheeger_perimeter - 7.0898) < 5e-5);
    CHECK(std::abs(s.volume_lower_bound - 3.532) < 5e-4);
    CHECK(std::abs(s.perimeter_lower_bound - 6.6622) < 5e-5);
    CHECK(s.volume_lower_bound < s.cheeger_area);
    CHECK(s.perimeter_lower_bound < s.cheeger_perimeter);
    // |dE| = h |E| for the Cheeger set
    CHECK(s.cheeger_perimeter == doctest::Approx(s.h * s.cheeger_area).epsilon(1e-12));
}

TEST_CASE("Cheeger set volume bound") {
    CHECK(cheeger_volume_bound(2, 2.0) == doctest::Approx(pi).epsilon(1e-14));
    CHECK(std::abs(cheeger_volume_bound(2, 1.8863) - 3.532) < 5e-4);
    CHECK(cheeger_volume_bound(2, 1e12) < 1e-20);
    CHECK(cheeger_volume_bound(3, 3.0) == doctest::Approx(4 * pi / 3).epsilon(1e-14));
}

TEST_CASE("Poincare bound") {
    // cone 1 - |x| on the unit disk: int u^2 = pi/6, int |grad u|^2 = pi
    CHECK(poincare_bound_check(2, 2.0, pi, pi / 6, pi));
    CHECK_FALSE(poincare_bound_check(2, 2.0, pi, 1.0, 1.0));
}

TEST_CASE("h of a ball from the sup-norm limit") {
    for (double R : {0.5, 1.0, 3.0}) {
        const double p = 1.001;
        CHECK(rel(ball_sup_power({2, R, p}), 2.0 / R) <= 0.01);
        CHECK(rel(ball_sup_power({3, R, p}), 3.0 / R) <= 0.01);
    }
}

TEST_CASE("quotient lower bound") {
    const double p = 1.0 + 1e-6;
    for (int N : {2, 3}) CHECK(rel(quotient_lower_bound(N, p, 1.0), omega(N) * std::pow(N, N)) <= 1e-4);
    CHECK(quotient_lower_bound(2, 2.0, 0.25) <= pi / 2);
    CHECK(quotient_lower_bound(2, 2.0, 0.0) == 0.0);
    CHECK_THROWS_AS(quotient_lower_bound(2, 0.5, 1.0), AnalyticError);
}
