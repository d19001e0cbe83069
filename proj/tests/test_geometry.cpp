#include <cmath>
#include <numbers>

#include "cheeger/geometry.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cheeger;
using std::numbers::pi;

TEST_CASE("exact measures of the basic shapes") {
    auto d = exact_measures(DomainSpec::disk(1.0));
    CHECK(d.area == doctest::Approx(pi).epsilon(1e-14));
    CHECK(d.perimeter == doctest::Approx(2 * pi).epsilon(1e-14));

    auto s = exact_measures(DomainSpec::rectangle(1.0, 1.0));
    CHECK(s.area == 4.0);
    CHECK(s.perimeter == 8.0);

    auto t = exact_measures(DomainSpec::polygon({{0, 0}, {1, 0}, {0, 1}}));
    CHECK(t.area == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(t.perimeter == doctest::Approx(2 + std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("invalid domains are rejected") {
    CHECK_THROWS_AS(DomainSpec::disk(0.0), GeometryError);
    CHECK_THROWS_AS(DomainSpec::rectangle(1.0, -1.0), GeometryError);
    CHECK_THROWS_AS(DomainSpec::polygon({{0, 0}, {1, 1}, {2, 2}}), GeometryError);
    CHECK_THROWS_AS(DomainSpec::polygon({{0, 0}, {1, 0}}), GeometryError);
    // bow tie
    CHECK_THROWS_AS(DomainSpec::polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), GeometryError);
    CHECK_THROWS_AS(rasterize(DomainSpec::disk(1.0), 8), GeometryError);
}

TEST_CASE("clockwise polygons are accepted with positive area") {
    auto cw = DomainSpec::polygon({{0, 0}, {0, 1}, {1, 1}, {1, 0}});
    CHECK(cw.exact_area() == doctest::Approx(1.0));
    CHECK(cw.is_convex());
    CHECK(cw.contains({0.5, 0.5}));
    CHECK_FALSE(cw.contains({1.5, 0.5}));
    auto ell = DomainSpec::polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
    CHECK_FALSE(ell.is_convex());
    CHECK(ell.exact_area() == doctest::Approx(3.0));
}

TEST_CASE("domain JSON round trip") {
    for (const auto& spec : {DomainSpec::disk(1.5), DomainSpec::rectangle(2.0, 0.5),
                             DomainSpec::polygon({{0, 0}, {2, 0}, {1, 1.5}})}) {
        auto back = DomainSpec::from_json(nlohmann::json::parse(spec.to_json().dump()));
        CHECK(back.exact_area() == doctest::Approx(spec.exact_area()).epsilon(1e-14));
        CHECK(back.exact_perimeter() == doctest::Approx(spec.exact_perimeter()).epsilon(1e-14));
        CHECK(back.kind_name() == spec.kind_name());
    }
    CHECK_THROWS_AS(DomainSpec::from_json(nlohmann::json{{"kind", "ellipse"}}), GeometryError);
    CHECK_THROWS_AS(DomainSpec::from_json(nlohmann::json{{"kind", "disk"}}), GeometryError);
    CHECK_THROWS_AS(DomainSpec::from_file("/nonexistent/domain.json"), GeometryError);
}

TEST_CASE("rasterized mask area") {
    auto disk = testing::disk_grid(256);
    CHECK(std::abs(disk->mask_area() - pi) / pi <= 0.01);

    auto square = testing::square_grid(64);
    CHECK(square->mask_area() == doctest::Approx(4.0).epsilon(1e-12));

    // ghost ring of outside nodes
    for (int i = 0; i < square->nx(); ++i) CHECK_FALSE(square->inside(i, 0));
    for (int j = 0; j < square->ny(); ++j) CHECK_FALSE(square->inside(square->nx() - 1, j));
    for (int j = 0; j < disk->ny(); ++j)
        for (int i = 0; i < disk->nx(); ++i)
            if (disk->inside(i, j)) REQUIRE(disk->domain().contains(disk->node(i, j)));
}

TEST_CASE("polygon perimeter of the contour converges under refinement") {
    auto tri = DomainSpec::polygon({{0, 0}, {2, 0}, {1, 1.7320508075688772}});
    double prev = INFINITY;
    for (int res : {32, 64, 128, 256}) {
        auto grid = rasterize(tri, res);
        auto one = ScalarField::from_function(grid, [](Point2) { return 1.0; });
        auto m = superlevel_measures(one, 0.5);
        const double err = std::abs(m.perimeter - 6.0) + std::abs(m.area - std::sqrt(3.0));
        CHECK(err <= prev);
        prev = err;
    }
    CHECK(prev < 0.02);
}

TEST_CASE("disk mask area error decreases under refinement") {
    // Lattice-point counts fluctuate, so compare over a factor of four.
    auto err = [](int res) { return std::abs(testing::disk_grid(res)->mask_area() - pi); };
    CHECK(err(256) < err(64) / 2);
    CHECK(err(512) < err(128) / 2);
}

TEST_CASE("superlevel measures of an indicator and a cone") {
    auto grid = testing::disk_grid(256);
    auto one = ScalarField::from_function(grid, [](Point2) { return 1.0; });
    auto m = superlevel_measures(one, 0.5);
    CHECK_FALSE(m.empty);
    CHECK(std::abs(m.area - pi) / pi <= 0.02);
    CHECK(std::abs(m.perimeter - 2 * pi) / (2 * pi) <= 0.02);

    auto cone = ScalarField::from_function(grid, [](Point2 x) { return 1.0 - testing::radius(x); });
    auto c = superlevel_measures(cone, 0.5);
    CHECK(std::abs(c.area - pi / 4) / (pi / 4) <= 0.02);
    CHECK(std::abs(c.perimeter - pi) / pi <= 0.02);

    auto empty = superlevel_measures(cone, cone.max_value());
    CHECK(empty.empty);
    CHECK(empty.area == 0.0);
    CHECK(empty.perimeter == 0.0);
}

TEST_CASE("superlevel area is monotone in t; plateau levels are constant") {
    auto grid = testing::square_grid(96);
    auto bump = ScalarField::from_function(grid, [](Point2 x) { return (1 - x.x * x.x) * (1 - x.y * x.y); });
    double prev = INFINITY;
    for (int k = 0; k < 40; ++k) {
        const double a = superlevel_measures(bump, k / 40.0).area;
        CHECK(a <= prev + 1e-12);
        prev = a;
    }

    auto plateau = ScalarField::from_function(grid, [](Point2 x) {
        return std::max(std::abs(x.x), std::abs(x.y)) < 0.5 ? 1.0 : 0.0;
    });
    // a nodal jump spans one cell, so the plateau levels agree up to
    // perimeter * spacing and the spread shrinks with the grid
    auto spread = [](int res) {
        auto g = testing::square_grid(res);
        auto f = ScalarField::from_function(g, [](Point2 x) {
            return std::max(std::abs(x.x), std::abs(x.y)) < 0.5 ? 1.0 : 0.0;
        });
        double lo = INFINITY, hi = 0, plo = INFINITY, phi = 0;
        for (double t : {0.1, 0.2, 0.5, 0.8, 0.9}) {
            auto m = superlevel_measures(f, t);
            lo = std::min(lo, m.area), hi = std::max(hi, m.area);
            plo = std::min(plo, m.perimeter), phi = std::max(phi, m.perimeter);
        }
        CHECK(hi - lo <= 4.0 * g->spacing());
        CHECK(phi - plo <= 0.05 * phi);
        return hi - lo;
    };
    CHECK(spread(192) < 0.6 * spread(96));
}

TEST_CASE("values equal to the threshold are not in the super-level set") {
    auto grid = testing::square_grid(32);
    auto one = ScalarField::from_function(grid, [](Point2) { return 1.0; });
    CHECK(superlevel_measures(one, 1.0).empty);
    CHECK(pixel_area_above(one, 1.0) == 0.0);
}

TEST_CASE("super-level sets touching the boundary are closed along it") {
    auto grid = testing::square_grid(64);
    auto one = ScalarField::from_function(grid, [](Point2) { return 1.0; });
    auto m = superlevel_measures(one, 0.5);
    CHECK(m.area == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(m.perimeter == doctest::Approx(8.0).epsilon(1e-9));
    int boundary = 0;
    for (const auto& s : superlevel_contour(one, 0.5)) boundary += s.kind == EdgeKind::Boundary;
    CHECK(boundary > 0);
}

TEST_CASE("fields reject values outside the mask") {
    auto grid = testing::square_grid(16);
    std::vector<double> v(grid->node_count(), 1.0);
    CHECK_THROWS_AS(ScalarField(grid, v), GeometryError);
    CHECK_THROWS_AS(ScalarField(grid, std::vector<double>(3, 0.0)), GeometryError);
}
