#include "cheeger/cheegerset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cheeger/analytic.hpp"

namespace cheeger {

namespace {

void require_nonnegative(const ScalarField& field) {
    for (double v : field.values())
        if (v < 0.0) throw CheegerSetError("field must be nonnegative");
}

double mask_integral(const ScalarField& field) {
    const Grid2D& g = field.grid();
    double s = 0.0;
    for (std::size_t k = 0; k < g.node_count(); ++k)
        if (g.inside(k)) s += std::abs(field[k]);
    return s * g.spacing() * g.spacing();
}

}  // namespace

double bv_objective(const ScalarField& field) {
    require_nonnegative(field);
    const Grid2D& g = field.grid();
    const auto values = field.values();
    const double h = g.spacing();
    double interior = 0.0;
    double trace = 0.0;
    for (int j = 0; j + 1 < g.ny(); ++j)
        for (int i = 0; i + 1 < g.nx(); ++i) {
            const std::size_t k0 = g.index(i, j), k1 = g.index(i + 1, j), k2 = g.index(i + 1, j + 1),
                              k3 = g.index(i, j + 1);
            const bool in0 = g.inside(k0), in1 = g.inside(k1), in2 = g.inside(k2), in3 = g.inside(k3);
            if (!(in0 || in1 || in2 || in3)) continue;
            if (in0 && in1 && in2 && in3) {
                const double gx = (values[k1] - values[k0] + values[k2] - values[k3]) / (2.0 * h);
                const double gy = (values[k3] - values[k0] + values[k2] - values[k1]) / (2.0 * h);
                interior += h * h * std::hypot(gx, gy);
                continue;
            }
            // Cut cell: the field is extended by its nearest inside value up to
            // the boundary, so only fully inside edges carry a gradient and
            // the jump to zero sits on the boundary chords.
            double gx = 0.0, gy = 0.0;
            int nx = 0, ny = 0;
            if (in0 && in1) gx += values[k1] - values[k0], ++nx;
            if (in3 && in2) gx += values[k2] - values[k3], ++nx;
            if (in0 && in3) gy += values[k3] - values[k0], ++ny;
            if (in1 && in2) gy += values[k2] - values[k1], ++ny;
            if (nx > 0) gx /= nx * h;
            if (ny > 0) gy /= ny * h;
            const auto poly = detail::domain_cell_polygon(g, values, i, j);
            const double area =
                std::abs(detail::polygon_area(std::span<const detail::CellVertex>(poly.v.data(), poly.n)));
            interior += area * std::hypot(gx, gy);
            for (int m = 0; m < poly.n; ++m)
                if (poly.v[m].incoming == EdgeKind::Boundary) {
                    const auto& a = poly.v[(m + poly.n - 1) % poly.n];
                    const auto& b = poly.v[m];
                    trace += detail::distance(a.pt, b.pt) * 0.5 * (a.value + b.value);
                }
        }
    return interior + trace;
}

CoareaCheck coarea_check(const ScalarField& field, int num_levels) {
    if (num_levels < 1) throw CheegerSetError("coarea_check needs at least one level");
    require_nonnegative(field);
    CoareaCheck c;
    c.tv = bv_objective(field);
    const double top = std::max(field.max_value(), 0.0);
    if (top > 0.0) {
        const double dt = top / num_levels;
        for (int k = 0; k < num_levels; ++k) c.coarea_sum += superlevel_measures(field, (k + 0.5) * dt).perimeter * dt;
    }
    const double scale = std::max(c.tv, 1e-300);
    c.relative_gap = (c.tv == 0.0 && c.coarea_sum == 0.0) ? 0.0 : std::abs(c.tv - c.coarea_sum) / scale;
    return c;
}

double contour_boundary_gap(const ScalarField& field, double t) {
    const auto segments = superlevel_contour(field, t);
    const DomainSpec& d = field.grid().domain();
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& s : segments) {
        if (s.kind == EdgeKind::Boundary) return 0.0;
        gap = std::min({gap, d.boundary_distance(s.a), d.boundary_distance(s.b)});
    }
    return gap;
}

std::vector<bool> boundary_touch_check(const std::vector<LevelSetRecord>& levels, const Grid2D& grid) {
    std::vector<bool> out;
    out.reserve(levels.size());
    for (const auto& l : levels) out.push_back(l.area > 0.0 && l.boundary_gap <= 1.5 * grid.spacing());
    return out;
}

CheegerSetResult extract_cheeger(const ScalarField& field, int num_levels, Normalization normalization) {
    if (num_levels < 16) throw CheegerSetError("extract_cheeger needs at least 16 levels");
    require_nonnegative(field);
    const double mass = mask_integral(field);
    const double top = field.max_value();
    if (!(mass > 0.0) || !(top > 0.0)) throw CheegerSetError("field vanishes identically; no level sets");

    CheegerSetResult r{field.scaled(normalization == Normalization::L1 ? 1.0 / mass : 1.0 / top)};
    r.normalization = normalization;
    r.normalized_l1 = mask_integral(r.normalized_field);
    r.bv_ratio = bv_objective(r.normalized_field) / r.normalized_l1;
    const ScalarField& u = r.normalized_field;
    const double umax = u.max_value();
    const double h = u.grid().spacing();

    for (int k = 1; k <= num_levels; ++k) {
        const double t = umax * k / (num_levels + 1);
        const LevelMeasures m = superlevel_measures(u, t);
        if (m.empty) continue;
        LevelSetRecord rec;
        rec.t = t;
        rec.area = m.area;
        rec.perimeter = m.perimeter;
        rec.quotient = m.perimeter / m.area;
        rec.boundary_gap = contour_boundary_gap(u, t);
        rec.touches_boundary = rec.boundary_gap <= 1.5 * h;
        r.levels.push_back(rec);
    }
    if (r.levels.empty()) throw CheegerSetError("all level sets are empty");

    std::size_t best = 0;
    for (std::size_t k = 1; k < r.levels.size(); ++k) {
        const auto& cand = r.levels[k];
        const auto& cur = r.levels[best];
        const double tie = 1e-6 * std::max(cand.quotient, cur.quotient);
        if (cand.quotient < cur.quotient - tie || (std::abs(cand.quotient - cur.quotient) <= tie && cand.area > cur.area))
            best = k;
    }
    r.best_index = best;
    r.best = r.levels[best];
    r.h_from_set = r.best.quotient;
    if (normalization == Normalization::L1) r.indicator_deviation = indicator_deviation(u, r.best);
    return r;
}

CheegerSetResult extract_cheeger(const TorsionSolveResult& result, int num_levels, Normalization normalization) {
    return extract_cheeger(result.field, num_levels, normalization);
}

double indicator_deviation(const ScalarField& u, const LevelSetRecord& best) {
    const double area = pixel_area_above(u, best.t);
    if (!(area > 0.0)) throw CheegerSetError("indicator_deviation: level set is empty");
    const Grid2D& g = u.grid();
    const double level = 1.0 / area;
    double s = 0.0;
    for (std::size_t k = 0; k < g.node_count(); ++k)
        if (g.inside(k)) s += std::abs(u[k] - (u[k] > best.t ? level : 0.0));
    return s * g.spacing() * g.spacing();
}

std::vector<RadialSample> schwarz_symmetrize(const ScalarField& field, std::size_t max_samples) {
    require_nonnegative(field);
    const Grid2D& g = field.grid();
    std::vector<double> v;
    v.reserve(g.interior_count());
    for (std::size_t k = 0; k < g.node_count(); ++k)
        if (g.inside(k)) v.push_back(field[k]);
    std::sort(v.begin(), v.end(), std::greater<>());
    const double cell = g.spacing() * g.spacing();
    const std::size_t n = v.size();
    const std::size_t stride = (max_samples == 0 || n <= max_samples) ? 1 : (n + max_samples - 1) / max_samples;
    std::vector<RadialSample> out;
    for (std::size_t k = 0; k < n; k += stride)
        out.push_back({std::sqrt((k + 0.5) * cell / std::numbers::pi), v[k]});
    if ((n - 1) % stride != 0) out.push_back({std::sqrt((n - 0.5) * cell / std::numbers::pi), v[n - 1]});
    return out;
}

double talenti_excess(const ScalarField& field, double p) {
    const double area = field.grid().domain().exact_area();
    const BallTorsionParams ball{2, std::sqrt(area / std::numbers::pi), p};
    const double top = ball_torsion_sup(ball);
    double excess = -std::numeric_limits<double>::infinity();
    for (const auto& s : schwarz_symmetrize(field)) {
        const double majorant = s.radius < ball.radius ? ball_torsion(ball, s.radius) : 0.0;
        excess = std::max(excess, (s.value - majorant) / top);
    }
    return excess;
}

bool volume_bound_check(const LevelSetRecord& best, double h_est, int N, double slack) {
    if (!(best.area > 0.0)) throw CheegerSetError("volume_bound_check needs a nonempty set");
    return cheeger_volume_bound(N, h_est) <= best.area * (1.0 + slack);
}

}  // namespace cheeger
