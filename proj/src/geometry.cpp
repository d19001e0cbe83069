#include "cheeger/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

namespace cheeger {

namespace {

double cross(Point2 o, Point2 a, Point2 b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double signed_area(const std::vector<Point2>& v) {
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const Point2& a = v[k];
        const Point2& b = v[(k + 1) % v.size()];
        s += a.x * b.y - b.x * a.y;
    }
    return 0.5 * s;
}

bool on_segment(Point2 p, Point2 a, Point2 b) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

int sign_of(double v, double tol) { return v > tol ? 1 : (v < -tol ? -1 : 0); }

bool segments_intersect(Point2 p1, Point2 p2, Point2 p3, Point2 p4, double tol) {
    const int d1 = sign_of(cross(p3, p4, p1), tol);
    const int d2 = sign_of(cross(p3, p4, p2), tol);
    const int d3 = sign_of(cross(p1, p2, p3), tol);
    const int d4 = sign_of(cross(p1, p2, p4), tol);
    if (d1 * d2 < 0 && d3 * d4 < 0) return true;
    if (d1 == 0 && on_segment(p1, p3, p4)) return true;
    if (d2 == 0 && on_segment(p2, p3, p4)) return true;
    if (d3 == 0 && on_segment(p3, p1, p2)) return true;
    if (d4 == 0 && on_segment(p4, p1, p2)) return true;
    return false;
}

double segment_distance(Point2 p, Point2 a, Point2 b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double s = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    return std::hypot(p.x - (a.x + s * dx), p.y - (a.y + s * dy));
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw GeometryError(std::string(what) + " must be positive and finite");
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

DomainSpec DomainSpec::disk(double radius) {
    require_positive(radius, "disk radius");
    return DomainSpec(Disk{radius});
}

DomainSpec DomainSpec::rectangle(double half_width, double half_height) {
    require_positive(half_width, "rectangle half_width");
    require_positive(half_height, "rectangle half_height");
    return DomainSpec(Rectangle{half_width, half_height});
}

DomainSpec DomainSpec::polygon(std::vector<Point2> v) {
    for (const auto& p : v)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw GeometryError("polygon vertex is not finite");
    if (v.size() >= 2 && v.front().x == v.back().x && v.front().y == v.back().y) v.pop_back();
    if (v.size() < 3) throw GeometryError("polygon needs at least 3 distinct vertices");

    double scale = 0.0;
    for (const auto& p : v) scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
    const double area = signed_area(v);
    if (std::abs(area) <= 1e-12 * std::max(scale * scale, 1e-300))
        throw GeometryError("degenerate polygon: zero area (collinear or repeated vertices)");
    if (area < 0.0) std::reverse(v.begin(), v.end());

    const std::size_t n = v.size();
    const double tol = 1e-12 * std::max(scale * scale, 1e-300);
    for (std::size_t a = 0; a < n; ++a) {
        const Point2 a0 = v[a];
        const Point2 a1 = v[(a + 1) % n];
        if (a0.x == a1.x && a0.y == a1.y) throw GeometryError("degenerate polygon: repeated vertex");
        // Adjacent edge folding back on this one.
        const Point2 a2 = v[(a + 2) % n];
        if (sign_of(cross(a0, a1, a2), tol) == 0 &&
            (a1.x - a0.x) * (a2.x - a1.x) + (a1.y - a0.y) * (a2.y - a1.y) < 0.0)
            throw GeometryError("degenerate polygon: edge folds back on itself");
        for (std::size_t b = a + 2; b < n; ++b) {
            if (a == 0 && b == n - 1) continue;  // adjacent through the closing edge
            if (segments_intersect(a0, a1, v[b], v[(b + 1) % n], tol))
                throw GeometryError("polygon is self-intersecting (edges " + std::to_string(a) +
                                    " and " + std::to_string(b) + ")");
        }
    }
    return DomainSpec(Polygon{std::move(v)});
}

DomainSpec DomainSpec::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string())
        throw GeometryError("domain JSON needs a string field \"kind\"");
    const std::string kind = doc["kind"].get<std::string>();
    auto number = [&](const char* key) {
        if (!doc.contains(key) || !doc[key].is_number())
            throw GeometryError(std::string("domain JSON: missing numeric field \"") + key + "\"");
        return doc[key].get<double>();
    };
    if (kind == "disk") return disk(number("radius"));
    if (kind == "rectangle") return rectangle(number("half_width"), number("half_height"));
    if (kind == "polygon") {
        if (!doc.contains("vertices") || !doc["vertices"].is_array())
            throw GeometryError("domain JSON: polygon needs a \"vertices\" array");
        std::vector<Point2> v;
        for (const auto& item : doc["vertices"]) {
            if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number())
                throw GeometryError("domain JSON: each vertex must be [x, y]");
            v.push_back({item[0].get<double>(), item[1].get<double>()});
        }
        return polygon(std::move(v));
    }
    throw GeometryError("domain JSON: unknown kind \"" + kind + "\"");
}

DomainSpec DomainSpec::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GeometryError("cannot open domain file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw GeometryError("domain file " + path + " is not valid JSON: " + e.what());
    }
    return from_json(doc);
}

nlohmann::json DomainSpec::to_json() const {
    return std::visit(overloaded{
                          [](const Disk& d) { return nlohmann::json{{"kind", "disk"}, {"radius", d.radius}}; },
                          [](const Rectangle& r) {
                              return nlohmann::json{{"kind", "rectangle"},
                                                    {"half_width", r.half_width},
                                                    {"half_height", r.half_height}};
                          },
                          [](const Polygon& p) {
                              nlohmann::json verts = nlohmann::json::array();
                              for (const auto& q : p.vertices) verts.push_back({q.x, q.y});
                              return nlohmann::json{{"kind", "polygon"}, {"vertices", verts}};
                          }},
                      shape_);
}

std::string DomainSpec::kind_name() const {
    return std::visit(overloaded{[](const Disk&) { return std::string("disk"); },
                                 [](const Rectangle&) { return std::string("rectangle"); },
                                 [](const Polygon&) { return std::string("polygon"); }},
                      shape_);
}

bool DomainSpec::contains(Point2 pt) const {
    return std::visit(overloaded{[&](const Disk& d) { return pt.x * pt.x + pt.y * pt.y < d.radius * d.radius; },
                                 [&](const Rectangle& r) {
                                     return std::abs(pt.x) < r.half_width && std::abs(pt.y) < r.half_height;
                                 },
                                 [&](const Polygon& p) {
                                     const auto& v = p.vertices;
                                     bool in = false;
                                     for (std::size_t a = 0, b = v.size() - 1; a < v.size(); b = a++) {
                                         if (segment_distance(pt, v[b], v[a]) == 0.0) return false;
                                         if ((v[a].y > pt.y) != (v[b].y > pt.y)) {
                                             const double xc =
                                                 v[a].x + (pt.y - v[a].y) * (v[b].x - v[a].x) / (v[b].y - v[a].y);
                                             if (pt.x < xc) in = !in;
                                         }
                                     }
                                     return in;
                                 }},
                      shape_);
}

double DomainSpec::boundary_distance(Point2 pt) const {
    return std::visit(overloaded{[&](const Disk& d) { return std::abs(std::hypot(pt.x, pt.y) - d.radius); },
                                 [&](const Rectangle& r) {
                                     const double dx = std::abs(pt.x) - r.half_width;
                                     const double dy = std::abs(pt.y) - r.half_height;
                                     if (dx < 0.0 && dy < 0.0) return std::min(-dx, -dy);
                                     return std::hypot(std::max(dx, 0.0), std::max(dy, 0.0));
                                 },
                                 [&](const Polygon& p) {
                                     double best = std::numeric_limits<double>::infinity();
                                     const auto& v = p.vertices;
                                     for (std::size_t a = 0; a < v.size(); ++a)
                                         best = std::min(best, segment_distance(pt, v[a], v[(a + 1) % v.size()]));
                                     return best;
                                 }},
                      shape_);
}

BoundingBox DomainSpec::bounds() const {
    return std::visit(overloaded{[](const Disk& d) { return BoundingBox{{-d.radius, -d.radius}, {d.radius, d.radius}}; },
                                 [](const Rectangle& r) {
                                     return BoundingBox{{-r.half_width, -r.half_height}, {r.half_width, r.half_height}};
                                 },
                                 [](const Polygon& p) {
                                     BoundingBox b{p.vertices[0], p.vertices[0]};
                                     for (const auto& q : p.vertices) {
                                         b.lo.x = std::min(b.lo.x, q.x);
                                         b.lo.y = std::min(b.lo.y, q.y);
                                         b.hi.x = std::max(b.hi.x, q.x);
                                         b.hi.y = std::max(b.hi.y, q.y);
                                     }
                                     return b;
                                 }},
                      shape_);
}

double DomainSpec::exact_area() const { return exact_measures(*this).area; }
double DomainSpec::exact_perimeter() const { return exact_measures(*this).perimeter; }

bool DomainSpec::is_convex() const {
    if (const auto* p = std::get_if<Polygon>(&shape_)) {
        const auto& v = p->vertices;
        for (std::size_t a = 0; a < v.size(); ++a)
            if (cross(v[a], v[(a + 1) % v.size()], v[(a + 2) % v.size()]) < 0.0) return false;
    }
    return true;
}

std::vector<Point2> DomainSpec::outline(int segments) const {
    return std::visit(overloaded{[&](const Disk& d) {
                                     std::vector<Point2> out;
                                     const int n = std::max(segments, 8);
                                     for (int k = 0; k < n; ++k) {
                                         const double a = 2.0 * std::numbers::pi * k / n;
                                         out.push_back({d.radius * std::cos(a), d.radius * std::sin(a)});
                                     }
                                     return out;
                                 },
                                 [](const Rectangle& r) {
                                     return std::vector<Point2>{{-r.half_width, -r.half_height},
                                                                {r.half_width, -r.half_height},
                                                                {r.half_width, r.half_height},
                                                                {-r.half_width, r.half_height}};
                                 },
                                 [](const Polygon& p) { return p.vertices; }},
                      shape_);
}

AreaPerimeter exact_measures(const DomainSpec& spec) {
    return std::visit(overloaded{[](const Disk& d) {
                                     return AreaPerimeter{std::numbers::pi * d.radius * d.radius,
                                                          2.0 * std::numbers::pi * d.radius};
                                 },
                                 [](const Rectangle& r) {
                                     return AreaPerimeter{4.0 * r.half_width * r.half_height,
                                                          4.0 * (r.half_width + r.half_height)};
                                 },
                                 [](const Polygon& p) {
                                     double per = 0.0;
                                     const auto& v = p.vertices;
                                     for (std::size_t a = 0; a < v.size(); ++a)
                                         per += detail::distance(v[a], v[(a + 1) % v.size()]);
                                     return AreaPerimeter{std::abs(signed_area(v)), per};
                                 }},
                      spec.shape());
}

// ---------------------------------------------------------------------------
// Grid2D

namespace {

// Fraction along inside->outside at which the segment leaves the domain.
double crossing_fraction(const DomainSpec& d, Point2 in, Point2 out) {
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Point2 m{in.x + mid * (out.x - in.x), in.y + mid * (out.y - in.y)};
        if (d.contains(m))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Grid2D::Grid2D(DomainSpec domain, double spacing, Point2 origin, int nx, int ny)
    : domain_(std::move(domain)), spacing_(spacing), origin_(origin), nx_(nx), ny_(ny) {
    if (!(spacing > 0.0) || !std::isfinite(spacing)) throw GeometryError("grid spacing must be positive");
    if (nx < 4 || ny < 4) throw GeometryError("grid needs at least 4 nodes per direction");

    mask_.assign(node_count(), 0);
    for (int j = 0; j < ny_; ++j)
        for (int i = 0; i < nx_; ++i)
            if (domain_.contains(node(i, j))) {
                if (i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1)
                    throw GeometryError("grid does not leave a ghost layer around the domain");
                mask_[index(i, j)] = 1;
                ++interior_count_;
            }
    if (interior_count_ == 0) throw GeometryError("grid has no interior nodes");

    cross_x_.assign(node_count(), 0.0);
    cross_y_.assign(node_count(), 0.0);
    auto fill = [&](std::vector<double>& dst, int i, int j, int i2, int j2) {
        const bool a = inside(i, j);
        const bool b = inside(i2, j2);
        double& slot = dst[index(i, j)];
        if (a && b)
            slot = 1.0;
        else if (a)
            slot = crossing_fraction(domain_, node(i, j), node(i2, j2));
        else if (b)
            slot = crossing_fraction(domain_, node(i2, j2), node(i, j));
    };
    for (int j = 0; j < ny_; ++j)
        for (int i = 0; i < nx_; ++i) {
            if (i + 1 < nx_) fill(cross_x_, i, j, i + 1, j);
            if (j + 1 < ny_) fill(cross_y_, i, j, i, j + 1);
        }

    if (!std::holds_alternative<Disk>(domain_.shape())) {
        std::vector<std::pair<std::size_t, Point2>> all;
        for (Point2 v : domain_.outline()) {
            const int ci = static_cast<int>(std::floor((v.x - origin_.x) / spacing_));
            const int cj = static_cast<int>(std::floor((v.y - origin_.y) / spacing_));
            if (ci >= 0 && cj >= 0 && ci + 1 < nx_ && cj + 1 < ny_) all.push_back({index(ci, cj), v});
        }
        std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        // cells holding several vertices fall back to the chord
        for (std::size_t k = 0; k < all.size(); ++k) {
            const bool dup = (k > 0 && all[k - 1].first == all[k].first) ||
                             (k + 1 < all.size() && all[k + 1].first == all[k].first);
            if (!dup) corners_.push_back(all[k]);
        }
    }
}

const Point2* Grid2D::cell_corner(int i, int j) const {
    const std::size_t key = index(i, j);
    auto it = std::lower_bound(corners_.begin(), corners_.end(), key,
                               [](const auto& e, std::size_t k) { return e.first < k; });
    return it != corners_.end() && it->first == key ? &it->second : nullptr;
}

GridPtr rasterize(const DomainSpec& spec, int resolution) {
    if (resolution < 16) throw GeometryError("resolution must be at least 16, got " + std::to_string(resolution));
    const BoundingBox box = spec.bounds();
    const double longest = std::max(box.width(), box.height());
    const double h = longest / resolution;
    const int px = static_cast<int>(std::ceil(box.width() / h - 1e-9));
    const int py = static_cast<int>(std::ceil(box.height() / h - 1e-9));
    const int nx = px + 2;
    const int ny = py + 2;
    const Point2 centre{0.5 * (box.lo.x + box.hi.x), 0.5 * (box.lo.y + box.hi.y)};
    const Point2 origin{centre.x - 0.5 * (nx - 1) * h, centre.y - 0.5 * (ny - 1) * h};
    return std::make_shared<const Grid2D>(spec, h, origin, nx, ny);
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(GridPtr grid) : grid_(std::move(grid)) {
    if (!grid_) throw GeometryError("field needs a grid");
    values_.assign(grid_->node_count(), 0.0);
}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw GeometryError("field needs a grid");
    if (values_.size() != grid_->node_count()) throw GeometryError("field size does not match grid");
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k])) throw GeometryError("field has non-finite values");
        if (!grid_->inside(k) && values_[k] != 0.0) throw GeometryError("field is nonzero outside the mask");
    }
}

double ScalarField::max_value() const {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < values_.size(); ++k)
        if (grid_->inside(k)) m = std::max(m, values_[k]);
    return m;
}

double ScalarField::min_value() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < values_.size(); ++k)
        if (grid_->inside(k)) m = std::min(m, values_[k]);
    return m;
}

ScalarField ScalarField::scaled(double factor) const {
    std::vector<double> v(values_);
    for (auto& x : v) x *= factor;
    return ScalarField(grid_, std::move(v));
}

// ---------------------------------------------------------------------------
// Cut cells and super-level sets

namespace detail {

double distance(Point2 a, Point2 b) { return std::hypot(b.x - a.x, b.y - a.y); }

double polygon_area(std::span<const CellVertex> poly) {
    double s = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const Point2& a = poly[k].pt;
        const Point2& b = poly[(k + 1) % poly.size()].pt;
        s += a.x * b.y - b.x * a.y;
    }
    return 0.5 * s;
}

CellPolygon domain_cell_polygon(const Grid2D& grid, std::span<const double> values, int i, int j) {
    CellPolygon poly;
    const std::array<std::array<int, 2>, 4> c{{{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}}};
    std::array<bool, 4> in{};
    int count = 0;
    for (int k = 0; k < 4; ++k) {
        in[k] = grid.inside(c[k][0], c[k][1]);
        count += in[k];
    }
    if (count == 0) return poly;
    int switches = 0;
    for (int k = 0; k < 4; ++k) switches += in[k] != in[(k + 1) % 4];
    const Point2* corner = switches == 2 ? grid.cell_corner(i, j) : nullptr;

    const std::array<double, 4> theta{grid.crossing_x(i, j), grid.crossing_y(i + 1, j), grid.crossing_x(i, j + 1),
                                      grid.crossing_y(i, j)};
    for (int k = 0; k < 4; ++k) {
        const int k2 = (k + 1) % 4;
        const Point2 P = grid.node(c[k][0], c[k][1]);
        const Point2 Q = grid.node(c[k2][0], c[k2][1]);
        if (in[k]) poly.v[poly.n++] = {P, values[grid.index(c[k][0], c[k][1])], EdgeKind::Cell};
        if (in[k] != in[k2]) {
            const double th = theta[k];
            if (in[k]) {
                poly.v[poly.n++] = {{P.x + th * (Q.x - P.x), P.y + th * (Q.y - P.y)},
                                    values[grid.index(c[k][0], c[k][1])],
                                    EdgeKind::Cell};
            } else {
                // Entering the domain: the chord from the previous exit point
                // approximates the domain boundary.
                if (corner)
                    poly.v[poly.n++] = {*corner, values[grid.index(c[k2][0], c[k2][1])], EdgeKind::Boundary};
                poly.v[poly.n++] = {{Q.x + th * (P.x - Q.x), Q.y + th * (P.y - Q.y)},
                                    values[grid.index(c[k2][0], c[k2][1])],
                                    EdgeKind::Boundary};
            }
        }
    }
    return poly;
}

}  // namespace detail

namespace {

struct ClippedCell {
    std::array<detail::CellVertex, 16> v{};
    int n = 0;
};

ClippedCell clip_above(const detail::CellPolygon& poly, double t) {
    ClippedCell out;
    for (int k = 0; k < poly.n; ++k) {
        const auto& P = poly.v[(k + poly.n - 1) % poly.n];
        const auto& Q = poly.v[k];
        const bool pin = P.value > t;
        const bool qin = Q.value > t;
        auto intersection = [&](EdgeKind kind) {
            const double s = (P.value - t) / (P.value - Q.value);
            return detail::CellVertex{{P.pt.x + s * (Q.pt.x - P.pt.x), P.pt.y + s * (Q.pt.y - P.pt.y)}, t, kind};
        };
        if (pin && qin) {
            out.v[out.n++] = Q;
        } else if (pin) {
            out.v[out.n++] = intersection(Q.incoming);
        } else if (qin) {
            out.v[out.n++] = intersection(EdgeKind::Contour);
            out.v[out.n++] = Q;
        }
    }
    return out;
}

template <class Visit>
void for_each_clipped_cell(const ScalarField& field, double t, Visit&& visit) {
    const Grid2D& g = field.grid();
    const auto values = field.values();
    for (int j = 0; j + 1 < g.ny(); ++j)
        for (int i = 0; i + 1 < g.nx(); ++i) {
            const double m = std::max({values[g.index(i, j)], values[g.index(i + 1, j)], values[g.index(i, j + 1)],
                                       values[g.index(i + 1, j + 1)]});
            if (!(m > t)) continue;
            const auto poly = detail::domain_cell_polygon(g, values, i, j);
            if (poly.n == 0) continue;
            const auto clipped = clip_above(poly, t);
            if (clipped.n >= 3) visit(clipped);
        }
}

}  // namespace

LevelMeasures superlevel_measures(const ScalarField& field, double t) {
    LevelMeasures m;
    for_each_clipped_cell(field, t, [&](const ClippedCell& c) {
        m.area += detail::polygon_area(std::span<const detail::CellVertex>(c.v.data(), c.n));
        for (int k = 0; k < c.n; ++k)
            if (c.v[k].incoming != EdgeKind::Cell)
                m.perimeter += detail::distance(c.v[(k + c.n - 1) % c.n].pt, c.v[k].pt);
    });
    m.empty = !(m.area > 0.0);
    if (m.empty) m = LevelMeasures{};
    return m;
}

std::vector<ContourSegment> superlevel_contour(const ScalarField& field, double t) {
    std::vector<ContourSegment> segs;
    for_each_clipped_cell(field, t, [&](const ClippedCell& c) {
        for (int k = 0; k < c.n; ++k)
            if (c.v[k].incoming != EdgeKind::Cell)
                segs.push_back({c.v[(k + c.n - 1) % c.n].pt, c.v[k].pt, c.v[k].incoming});
    });
    return segs;
}

double pixel_area_above(const ScalarField& field, double t) {
    const Grid2D& g = field.grid();
    std::size_t count = 0;
    const auto values = field.values();
    for (std::size_t k = 0; k < values.size(); ++k)
        if (g.inside(k) && values[k] > t) ++count;
    return count * g.spacing() * g.spacing();
}

}  // namespace cheeger
