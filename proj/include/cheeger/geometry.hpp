#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace cheeger {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Raised for malformed domains, grids and fields.
class GeometryError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Disk {
    double radius = 1.0;
};

/// Axis-aligned rectangle centred at the origin.
struct Rectangle {
    double half_width = 1.0;
    double half_height = 1.0;
};

/// Simple polygon, stored counterclockwise without a repeated closing vertex.
struct Polygon {
    std::vector<Point2> vertices;
};

struct BoundingBox {
    Point2 lo;
    Point2 hi;
    double width() const { return hi.x - lo.x; }
    double height() const { return hi.y - lo.y; }
};

/// Declarative planar domain. Construction validates the shape; a
/// DomainSpec that exists is always a valid bounded open set.
class DomainSpec {
public:
    using Shape = std::variant<Disk, Rectangle, Polygon>;

    static DomainSpec disk(double radius);
    static DomainSpec rectangle(double half_width, double half_height);
    /// Accepts either orientation (clockwise input is reversed) and an
    /// optional repeated closing vertex. Rejects fewer than three distinct
    /// vertices, zero area and self-intersections.
    static DomainSpec polygon(std::vector<Point2> vertices);

    /// {"kind":"disk","radius":r} | {"kind":"rectangle","half_width":..,"half_height":..}
    /// | {"kind":"polygon","vertices":[[x,y],...]}
    static DomainSpec from_json(const nlohmann::json& doc);
    static DomainSpec from_file(const std::string& path);
    nlohmann::json to_json() const;

    const Shape& shape() const { return shape_; }
    std::string kind_name() const;

    /// Strict interior test; points on the boundary are outside.
    bool contains(Point2 pt) const;
    double boundary_distance(Point2 pt) const;
    BoundingBox bounds() const;
    double exact_area() const;
    double exact_perimeter() const;
    bool is_convex() const;
    /// Closed outline sampled with roughly `segments` pieces (exact vertices for polygons).
    std::vector<Point2> outline(int segments = 256) const;

private:
    explicit DomainSpec(Shape shape) : shape_(std::move(shape)) {}
    Shape shape_;
};

struct AreaPerimeter {
    double area = 0.0;
    double perimeter = 0.0;
};

AreaPerimeter exact_measures(const DomainSpec& spec);

/// Uniform node raster of a domain. Nodes sit at pixel centres, so a
/// domain whose edges align with pixel edges has mask area equal to its
/// exact area. Every grid edge joining an inside and an outside node
/// carries the fraction (measured from the inside node) at which it
/// crosses the domain boundary.
class Grid2D {
public:
    Grid2D(DomainSpec domain, double spacing, Point2 origin, int nx, int ny);

    const DomainSpec& domain() const { return domain_; }
    double spacing() const { return spacing_; }
    Point2 origin() const { return origin_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t node_count() const { return static_cast<std::size_t>(nx_) * ny_; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
    Point2 node(int i, int j) const { return {origin_.x + i * spacing_, origin_.y + j * spacing_}; }

    bool inside(int i, int j) const { return mask_[index(i, j)] != 0; }
    bool inside(std::size_t k) const { return mask_[k] != 0; }
    std::span<const std::uint8_t> mask() const { return mask_; }
    std::size_t interior_count() const { return interior_count_; }
    double mask_area() const { return interior_count_ * spacing_ * spacing_; }

    /// Edge (i,j)-(i+1,j): 1 if both ends inside, 0 if both outside,
    /// otherwise the boundary-crossing fraction from the inside end.
    double crossing_x(int i, int j) const { return cross_x_[index(i, j)]; }
    /// Edge (i,j)-(i,j+1), same convention as crossing_x.
    double crossing_y(int i, int j) const { return cross_y_[index(i, j)]; }
    /// The domain vertex inside cell (i,j) when there is exactly one, else null.
    const Point2* cell_corner(int i, int j) const;

private:
    DomainSpec domain_;
    double spacing_;
    Point2 origin_;
    int nx_;
    int ny_;
    std::vector<std::uint8_t> mask_;
    std::vector<double> cross_x_;
    std::vector<double> cross_y_;
    std::vector<std::pair<std::size_t, Point2>> corners_;  // sorted by cell index, unique
    std::size_t interior_count_ = 0;
};

using GridPtr = std::shared_ptr<const Grid2D>;

/// `resolution` is the number of pixels across the longest side of the
/// bounding box; one ghost layer of outside nodes is added on every side.
GridPtr rasterize(const DomainSpec& spec, int resolution);

/// Nodal values on a grid; identically zero on nodes outside the mask.
class ScalarField {
public:
    explicit ScalarField(GridPtr grid);
    /// Throws GeometryError on size mismatch, non-finite values, or
    /// nonzero values outside the mask.
    ScalarField(GridPtr grid, std::vector<double> values);

    template <class F>
    static ScalarField from_function(GridPtr grid, F&& f) {
        std::vector<double> v(grid->node_count(), 0.0);
        for (int j = 0; j < grid->ny(); ++j)
            for (int i = 0; i < grid->nx(); ++i)
                if (grid->inside(i, j)) v[grid->index(i, j)] = f(grid->node(i, j));
        return ScalarField(std::move(grid), std::move(v));
    }

    const Grid2D& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t k) const { return values_[k]; }
    double at(int i, int j) const { return values_[grid_->index(i, j)]; }
    double max_value() const;
    double min_value() const;
    ScalarField scaled(double factor) const;

private:
    GridPtr grid_;
    std::vector<double> values_;
};

struct LevelMeasures {
    double area = 0.0;
    double perimeter = 0.0;
    bool empty = true;
};

enum class EdgeKind : std::uint8_t { Cell, Boundary, Contour };

struct ContourSegment {
    Point2 a;
    Point2 b;
    EdgeKind kind = EdgeKind::Contour;
};

/// Measures E_t = {u > t} inside the domain. The field is linearly
/// interpolated along cell edges; the part of each cell outside the domain
/// is clipped away using the boundary crossings, so a set that reaches the
/// domain boundary is closed along that boundary and its perimeter is the
/// perimeter in the plane.
LevelMeasures superlevel_measures(const ScalarField& field, double t);

/// Boundary pieces of E_t: interpolated t-contours and the domain-boundary
/// chords where E_t reaches the boundary.
std::vector<ContourSegment> superlevel_contour(const ScalarField& field, double t);

/// Pixel-count area of {u > t}.
double pixel_area_above(const ScalarField& field, double t);

namespace detail {

struct CellVertex {
    Point2 pt;
    double value = 0.0;
    EdgeKind incoming = EdgeKind::Cell;  // kind of the edge ending at this vertex
};

/// Domain part of the cell with lower-left node (i,j), as a polygon of at
/// most eight vertices. Boundary-crossing vertices carry the value of the
/// inside node on their edge; a domain vertex lying in the cell is kept.
/// Returns an empty polygon when no corner is inside.
struct CellPolygon {
    std::array<CellVertex, 8> v{};
    int n = 0;
};

CellPolygon domain_cell_polygon(const Grid2D& grid, std::span<const double> values, int i, int j);
double polygon_area(std::span<const CellVertex> poly);
double distance(Point2 a, Point2 b);

}  // namespace detail

}  // namespace cheeger
