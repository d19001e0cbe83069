#include <cmath>
#include <filesystem>
#include <sstream>

#include "cheeger/io.hpp"
#include "cheeger/verify.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cheeger;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("cheeger_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("numbers carry 12 significant digits") {
    CHECK(format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(format_number(2.0) == "2");
    CHECK(format_number(-1.5e-20) == "-1.5e-20");
    CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(round_sig(std::acos(-1.0)) == 3.14159265359);
    CHECK(round_sig(0.0) == 0.0);
}

TEST_CASE("atomic writes replace the whole file") {
    auto dir = scratch_dir("atomic");
    auto file = dir / "sub" / "out.txt";
    write_atomic(file, "first version, longer\n");
    write_atomic(file, "second\n");
    CHECK(read_text(file) == "second\n");
    int entries = 0;
    for (auto& e : fs::directory_iterator(dir / "sub")) entries += e.is_regular_file();
    CHECK(entries == 1);
    CHECK_THROWS_AS(read_text(dir / "missing.txt"), IoError);
}

TEST_CASE("binary field dump round trip") {
    auto grid = testing::disk_grid(40);
    auto f = ScalarField::from_function(grid, [](Point2 x) { return 1.0 - testing::radius(x) + 1e-17; });
    const std::string bytes = field_binary(f);
    CHECK(bytes.size() == 40 + 8 * grid->node_count());
    // header layout: little-endian nx first
    CHECK(static_cast<unsigned char>(bytes[0]) == (grid->nx() & 0xff));
    auto back = parse_field_binary(bytes);
    CHECK(back.nx == static_cast<std::uint64_t>(grid->nx()));
    CHECK(back.ny == static_cast<std::uint64_t>(grid->ny()));
    CHECK(back.spacing == grid->spacing());
    CHECK(back.origin.x == grid->origin().x);
    CHECK(back.origin.y == grid->origin().y);
    for (std::size_t k = 0; k < grid->node_count(); ++k) REQUIRE(back.values[k] == f[k]);
    CHECK_THROWS_AS(parse_field_binary(bytes.substr(0, bytes.size() - 3)), IoError);
    CHECK_THROWS_AS(parse_field_binary("short"), IoError);
}

TEST_CASE("field CSV is re-parseable") {
    auto grid = testing::square_grid(16);
    auto f = ScalarField::from_function(grid, [](Point2 x) { return x.x + 2 * x.y; });
    std::istringstream in(field_csv(f));
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,y,value");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        double x, y, v;
        char c1, c2;
        std::istringstream row(line);
        REQUIRE(static_cast<bool>(row >> x >> c1 >> y >> c2 >> v));
        CHECK(v == doctest::Approx(x + 2 * y).epsilon(1e-11));
        ++rows;
    }
    CHECK(rows == grid->interior_count());
}

TEST_CASE("contour CSV and SVG") {
    auto grid = testing::disk_grid(48);
    auto cone = ScalarField::from_function(grid, [](Point2 x) { return 1.0 - testing::radius(x); });
    std::istringstream in(contours_csv(cone, {0.25, 0.5}));
    std::string line;
    std::getline(in, line);
    CHECK(line == "level_index,segment_index,x,y");
    double len = 0;
    int rows = 0;
    double ax = 0, ay = 0;
    while (std::getline(in, line)) {
        int l, s;
        double x, y;
        char c;
        std::istringstream row(line);
        REQUIRE(static_cast<bool>(row >> l >> c >> s >> c >> x >> c >> y));
        if (rows % 2 == 1 && l == 1) len += std::hypot(x - ax, y - ay);
        ax = x, ay = y;
        ++rows;
    }
    CHECK(rows % 2 == 0);
    CHECK(len == doctest::Approx(std::acos(-1.0)).epsilon(0.03));

    auto svg = contour_svg(cone, 0.5);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("<path") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("verification report") {
    auto grid = testing::disk_grid(64);
    SolverConfig cfg;
    VerifyOptions opts;
    opts.schedule = {1.6, 1.4, 1.2};
    opts.num_levels = 32;
    opts.convex = true;
    auto rep = run_verification(grid, cfg, opts);
    CHECK(rep.all_passed());
    CHECK(rep.checks.size() == 9);
    auto j = nlohmann::json::parse(rep.to_json().dump());
    CHECK(j["all_passed"] == true);
    CHECK(rep.matrix().find("FAIL") == std::string::npos);

    cfg.max_iterations = 1;
    auto truncated = run_verification(grid, cfg, opts);
    CHECK_FALSE(truncated.all_passed());
    CHECK_FALSE(truncated.checks.front().passed);
}
