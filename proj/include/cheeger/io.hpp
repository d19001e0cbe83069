#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "cheeger/cheegerset.hpp"
#include "cheeger/geometry.hpp"

namespace cheeger {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Decimal text with 12 significant digits.
std::string format_number(double x);
/// x rounded to 12 significant digits, for JSON output.
double round_sig(double x);

/// Writes through a temporary file in the same directory and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// Rows "x,y,value" for every node inside the mask.
std::string field_csv(const ScalarField& field);

struct RawGrid {
    std::uint64_t nx = 0;
    std::uint64_t ny = 0;
    double spacing = 0.0;
    Point2 origin;
    std::vector<double> values;  // row-major, x fastest
};

/// nx, ny (uint64), spacing, origin.x, origin.y (float64), then the values;
/// all little-endian.
std::string field_binary(const ScalarField& field);
RawGrid parse_field_binary(const std::string& bytes);

/// Rows "level_index,segment_index,x,y", two rows per segment.
std::string contours_csv(const ScalarField& field, const std::vector<double>& thresholds);

/// Domain outline plus the contour of {u > t}.
std::string contour_svg(const ScalarField& field, double t);

}  // namespace cheeger
