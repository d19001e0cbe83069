#include <cmath>
#include <numbers>

#include "cheeger/analytic.hpp"
#include "cheeger/cheegerset.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cheeger;
using std::numbers::pi;

TEST_CASE("BV objective of a normalized disk indicator is its Cheeger quotient") {
    auto grid = testing::disk_grid(256);
    auto chi = ScalarField::from_function(grid, [](Point2) { return 1.0 / pi; });
    CHECK(std::abs(bv_objective(chi) - 2.0) / 2.0 <= 0.03);
    CHECK(bv_objective(ScalarField(grid)) == 0.0);
    auto neg = ScalarField::from_function(grid, [](Point2) { return -1.0; });
    CHECK_THROWS_AS(bv_objective(neg), CheegerSetError);
}

TEST_CASE("BV objective is positively homogeneous") {
    auto grid = testing::square_grid(64);
    auto bump = ScalarField::from_function(grid, [](Point2 x) { return (1 - x.x * x.x) * (1 - x.y * x.y); });
    CHECK(bv_objective(bump.scaled(3.5)) == doctest::Approx(3.5 * bv_objective(bump)).epsilon(1e-12));
}

TEST_CASE("coarea identity") {
    auto grid = testing::disk_grid(256);
    auto cone = ScalarField::from_function(grid, [](Point2 x) { return 1.0 - testing::radius(x); });
    auto c = coarea_check(cone, 256);
    CHECK(c.relative_gap <= 0.03);
    CHECK(std::abs(c.tv - pi) / pi <= 0.03);
    CHECK(std::abs(c.coarea_sum - pi) / pi <= 0.03);

    auto chi = ScalarField::from_function(grid, [](Point2) { return 1.0; });
    CHECK(coarea_check(chi, 64).relative_gap <= 0.03);

    auto zero = coarea_check(ScalarField(grid), 16);
    CHECK(zero.relative_gap == 0.0);
    CHECK(zero.tv == 0.0);
}

TEST_CASE("constant field on the square") {
    auto grid = testing::square_grid(64);
    auto one = ScalarField::from_function(grid, [](Point2) { return 1.0; });
    auto cs = extract_cheeger(one, 32);
    CHECK(cs.normalized_l1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cs.best.quotient == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(cs.best.area == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(cs.best.perimeter == doctest::Approx(8.0).epsilon(1e-9));
    CHECK(cs.h_from_set == cs.best.quotient);
    CHECK(cs.indicator_deviation == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cs.best.touches_boundary);
    CHECK(cs.bv_ratio == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("best level is the minimum quotient, ties go to the larger area") {
    auto grid = testing::square_grid(96);
    auto bump = ScalarField::from_function(grid, [](Point2 x) { return (1 - x.x * x.x) * (1 - x.y * x.y); });
    auto cs = extract_cheeger(bump, 48);
    for (const auto& l : cs.levels) CHECK(l.quotient >= cs.best.quotient);
    CHECK(cs.levels[cs.best_index].t == cs.best.t);
    for (std::size_t k = 1; k < cs.levels.size(); ++k) CHECK(cs.levels[k].t > cs.levels[k - 1].t);

    auto linf = extract_cheeger(bump, 48, Normalization::LInfinity);
    CHECK(linf.normalized_field.max_value() == doctest::Approx(1.0));
    CHECK(linf.best.quotient == doctest::Approx(cs.best.quotient).epsilon(1e-9));
    CHECK(linf.bv_ratio == doctest::Approx(cs.bv_ratio).epsilon(1e-12));
}

TEST_CASE("extraction preconditions") {
    auto grid = testing::square_grid(32);
    auto one = ScalarField::from_function(grid, [](Point2) { return 1.0; });
    CHECK_THROWS_AS(extract_cheeger(one, 8), CheegerSetError);
    CHECK_THROWS_AS(extract_cheeger(ScalarField(grid), 32), CheegerSetError);
}

TEST_CASE("indicator deviation of an exact indicator is zero") {
    auto grid = testing::square_grid(64);
    auto inner = [](Point2 x) { return std::max(std::abs(x.x), std::abs(x.y)) < 0.5; };
    auto raw = ScalarField::from_function(grid, [&](Point2 x) { return inner(x) ? 1.0 : 0.0; });
    double area = 0;
    for (std::size_t k = 0; k < grid->node_count(); ++k) area += raw[k];
    area *= grid->spacing() * grid->spacing();
    auto u = raw.scaled(1.0 / area);
    LevelSetRecord best;
    best.t = 0.5 / area;
    best.area = area;
    CHECK(indicator_deviation(u, best) == doctest::Approx(0.0).epsilon(1e-12));
    // the uniform field is chi_Omega / |Omega|
    auto flat = ScalarField::from_function(grid, [](Point2) { return 0.25; });
    LevelSetRecord all;
    all.t = 0.1;
    all.area = 4.0;
    CHECK(indicator_deviation(flat, all) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("boundary touching") {
    auto grid = testing::square_grid(128);
    auto bump = ScalarField::from_function(grid, [](Point2 x) { return std::exp(-40 * (x.x * x.x + x.y * x.y)); });
    const double top = bump.max_value();
    CHECK(contour_boundary_gap(bump, 0.9 * top) > 0.5);
    auto one = ScalarField::from_function(grid, [](Point2) { return 1.0; });
    CHECK(contour_boundary_gap(one, 0.5) == 0.0);

    LevelSetRecord near, far;
    near.area = far.area = 1.0;
    near.boundary_gap = grid->spacing();
    far.boundary_gap = 0.3;
    auto flags = boundary_touch_check({near, far}, *grid);
    CHECK(flags[0]);
    CHECK_FALSE(flags[1]);
}

TEST_CASE("Schwarz symmetrization") {
    auto grid = testing::disk_grid(192);
    auto cone = ScalarField::from_function(grid, [](Point2 x) { return 1.0 - testing::radius(x); });
    auto prof = schwarz_symmetrize(cone, 400);
    REQUIRE(prof.size() > 100);
    CHECK(prof.front().value == cone.max_value());
    for (std::size_t k = 1; k < prof.size(); ++k) {
        CHECK(prof[k].radius > prof[k - 1].radius);
        CHECK(prof[k].value <= prof[k - 1].value);
    }
    for (const auto& s : prof) CHECK(std::abs(s.value - (1.0 - s.radius)) <= 0.02);

    // an indicator rearranges to the indicator of the disk of equal area
    auto sq = testing::square_grid(128);
    auto ind = ScalarField::from_function(sq, [](Point2 x) {
        return std::max(std::abs(x.x), std::abs(x.y)) < 0.5 ? 1.0 : 0.0;
    });
    const double r_star = 1.0 / std::sqrt(pi);
    const double h = sq->spacing();
    for (const auto& s : schwarz_symmetrize(ind)) {
        if (s.radius < r_star - h) CHECK(s.value == 1.0);
        if (s.radius > r_star + h) CHECK(s.value == 0.0);
    }
}

TEST_CASE("Cheeger set volume bound check") {
    LevelSetRecord disk;
    disk.area = pi;
    CHECK(volume_bound_check(disk, 2.0));
    LevelSetRecord square;
    square.area = 3.7587;
    CHECK(volume_bound_check(square, 1.8863));
    LevelSetRecord fake;
    fake.area = 1.0;
    CHECK_FALSE(volume_bound_check(fake, 2.0));
    CHECK_THROWS_AS(volume_bound_check(LevelSetRecord{}, 2.0), CheegerSetError);
}

TEST_CASE("Talenti comparison for solved square fields") {
    auto grid = testing::square_grid(96);
    for (double p : {1.3, 2.0}) {
        SolverConfig cfg;
        cfg.p = p;
        auto r = solve_torsion(grid, cfg);
        CHECK(talenti_excess(r.field, p) <= 0.03);
    }
}
