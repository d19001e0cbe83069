#include "cheeger/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "discretization.hpp"

namespace cheeger {

namespace detail {

Discretization::Discretization(const Grid2D& g) : grid(g), h2(g.spacing() * g.spacing()) {
    compact.assign(g.node_count(), -1);
    for (std::size_t k = 0; k < g.node_count(); ++k)
        if (g.inside(k)) {
            compact[k] = static_cast<int>(node_of.size());
            node_of.push_back(k);
        }
    const int n = unknowns();
    for (auto& nb : neighbours) nb.assign(n, -1);
    for (int a = 0; a < n; ++a) {
        const std::size_t k = node_of[a];
        const int i = static_cast<int>(k % g.nx());
        const int j = static_cast<int>(k / g.nx());
        neighbours[East][a] = compact[g.index(i + 1, j)];
        neighbours[North][a] = compact[g.index(i, j + 1)];
        neighbours[NorthEast][a] = compact[g.index(i + 1, j + 1)];
        neighbours[NorthWest][a] = compact[g.index(i - 1, j + 1)];
    }

    const double h2inv = 1.0 / h2;
    for (int j = 0; j + 1 < g.ny(); ++j)
        for (int i = 0; i + 1 < g.nx(); ++i) {
            const double tb = g.crossing_x(i, j);
            const double tt = g.crossing_x(i, j + 1);
            const double tl = g.crossing_y(i, j);
            const double tr = g.crossing_y(i + 1, j);
            if (tb + tt + tl + tr == 0.0) continue;
            Cell c;
            c.area = 0.25 * h2 * (tb + tt + tl + tr);
            c.node = {compact[g.index(i, j)], compact[g.index(i + 1, j)], compact[g.index(i + 1, j + 1)],
                      compact[g.index(i, j + 1)]};
            const double sx = tb + tt;
            const double sy = tl + tr;
            auto add = [&](int la, int lb, double theta, double sum) {
                if (theta == 0.0) return;
                EdgeTerm e;
                e.k = theta / sum * h2inv;
                e.la = la;
                e.lb = lb;
                const int ca = c.node[la];
                const int cb = c.node[lb];
                const double th = std::max(theta, kMinCrossing);
                if (ca >= 0 && cb >= 0) {
                    e.a = ca;
                    e.b = cb;
                    e.ca = -1.0;
                    e.cb = 1.0;
                } else if (ca >= 0) {
                    e.a = ca;
                    e.ca = -1.0 / th;
                } else {
                    e.b = cb;
                    e.cb = 1.0 / th;
                }
                c.e[c.n++] = e;
            };
            add(0, 1, tb, sx);
            add(3, 2, tt, sx);
            add(0, 3, tl, sy);
            add(1, 2, tr, sy);
            cells.push_back(c);
        }
}

std::vector<double> Discretization::gather(std::span<const double> nodal) const {
    std::vector<double> u(unknowns());
    for (int a = 0; a < unknowns(); ++a) u[a] = nodal[node_of[a]];
    return u;
}

std::vector<double> Discretization::scatter(std::span<const double> u) const {
    std::vector<double> nodal(grid.node_count(), 0.0);
    for (int a = 0; a < unknowns(); ++a) nodal[node_of[a]] = u[a];
    return nodal;
}

void Discretization::cell_squares(std::span<const double> u, std::vector<double>& q) const {
    q.resize(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) q[c] = cell_square(cells[c], u);
}

void Discretization::assemble(std::span<const double> weight, std::span<const double> rank_one,
                              std::span<const double> u, LinearSystem& sys) const {
    const int n = unknowns();
    sys.diag.assign(n, 0.0);
    for (auto& o : sys.off) o.assign(n, 0.0);
    sys.neighbours = &neighbours;
    // (local row, local col, owner corner, slot) for the six corner pairs
    static constexpr std::array<std::array<int, 4>, 6> pairs{{{0, 1, 0, East},
                                                              {3, 2, 3, East},
                                                              {0, 3, 0, North},
                                                              {1, 2, 1, North},
                                                              {0, 2, 0, NorthEast},
                                                              {1, 3, 1, NorthWest}}};
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const Cell& cell = cells[c];
        double m[4][4] = {};
        for (int k = 0; k < cell.n; ++k) {
            const EdgeTerm& e = cell.e[k];
            if (e.a >= 0) m[e.la][e.la] += e.k * e.ca * e.ca;
            if (e.b >= 0) m[e.lb][e.lb] += e.k * e.cb * e.cb;
            if (e.a >= 0 && e.b >= 0) {
                m[e.la][e.lb] += e.k * e.ca * e.cb;
                m[e.lb][e.la] += e.k * e.ca * e.cb;
            }
        }
        const double w = cell.area * weight[c];
        double local[4][4];
        for (int r = 0; r < 4; ++r)
            for (int s2 = 0; s2 < 4; ++s2) local[r][s2] = w * m[r][s2];
        if (!rank_one.empty() && rank_one[c] != 0.0) {
            double g[4] = {};
            for (int r = 0; r < 4; ++r)
                for (int s2 = 0; s2 < 4; ++s2)
                    if (cell.node[s2] >= 0) g[r] += m[r][s2] * u[cell.node[s2]];
            const double beta = cell.area * rank_one[c];
            for (int r = 0; r < 4; ++r)
                for (int s2 = 0; s2 < 4; ++s2) local[r][s2] += beta * g[r] * g[s2];
        }
        for (int r = 0; r < 4; ++r)
            if (cell.node[r] >= 0) sys.diag[cell.node[r]] += local[r][r];
        for (const auto& pr : pairs) {
            const int na = cell.node[pr[0]];
            const int nb = cell.node[pr[1]];
            if (na >= 0 && nb >= 0) sys.off[pr[3]][cell.node[pr[2]]] += local[pr[0]][pr[1]];
        }
    }
}

void Discretization::weighted_gradient(std::span<const double> weight, std::span<const double> u,
                                       std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const Cell& cell = cells[c];
        const double w = cell.area * weight[c];
        for (int k = 0; k < cell.n; ++k) {
            const EdgeTerm& e = cell.e[k];
            const double s = w * e.k * diff(e, u);
            if (e.a >= 0) out[e.a] += s * e.ca;
            if (e.b >= 0) out[e.b] += s * e.cb;
        }
    }
}

double Discretization::flux_pairing(std::span<const double> u, std::span<const double> v, double p) const {
    double s = 0.0;
    for (const Cell& cell : cells) {
        const double q = cell_square(cell, u);
        if (q <= 0.0) continue;
        double cross = 0.0;
        for (int m = 0; m < cell.n; ++m) cross += cell.e[m].k * diff(cell.e[m], u) * diff(cell.e[m], v);
        s += cell.area * std::pow(q, 0.5 * (p - 2.0)) * cross;
    }
    return s;
}

double Discretization::gradient_power(std::span<const double> u, double p) const {
    double s = 0.0;
    for (const Cell& cell : cells) {
        const double q = cell_square(cell, u);
        if (q > 0.0) s += cell.area * std::pow(q, 0.5 * p);
    }
    return s;
}

void LinearSystem::apply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = diag.size();
    for (std::size_t a = 0; a < n; ++a) y[a] = diag[a] * x[a];
    for (int slot = 0; slot < 4; ++slot) {
        const auto& nb = (*neighbours)[slot];
        const auto& o = off[slot];
        for (std::size_t a = 0; a < n; ++a) {
            const int e = nb[a];
            if (e >= 0 && o[a] != 0.0) {
                y[a] += o[a] * x[e];
                y[e] += o[a] * x[a];
            }
        }
    }
}

int conjugate_gradient(const LinearSystem& A, std::span<const double> b, std::span<double> x, double tolerance,
                       int max_iterations) {
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), ap(n);
    A.apply(x, r);
    for (std::size_t a = 0; a < n; ++a) r[a] = b[a] - r[a];
    double rz = 0.0;
    double rr = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        z[a] = r[a] / A.diag[a];
        p[a] = z[a];
        rz += r[a] * z[a];
        rr += r[a] * r[a];
    }
    int it = 0;
    while (std::sqrt(rr) > tolerance) {
        if (it >= max_iterations) return -1;
        A.apply(p, ap);
        double pap = 0.0;
        for (std::size_t a = 0; a < n; ++a) pap += p[a] * ap[a];
        if (!(pap > 0.0)) return -1;
        const double alpha = rz / pap;
        double rz_new = 0.0;
        rr = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            x[a] += alpha * p[a];
            r[a] -= alpha * ap[a];
            z[a] = r[a] / A.diag[a];
            rz_new += r[a] * z[a];
            rr += r[a] * r[a];
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t a = 0; a < n; ++a) p[a] = z[a] + beta * p[a];
        ++it;
    }
    return it;
}

}  // namespace detail

namespace {

using detail::Discretization;

// Energy along u + alpha d, from per-cell quadratic coefficients of |grad|^2.
class RayEnergy {
public:
    RayEnergy(const Discretization& disc, std::span<const double> u, std::span<const double> d, double p, double f,
              double eps)
        : p_(p), e2_(eps * eps), floor_(std::pow(eps, p)), area_(disc.cells.size()), q0_(disc.cells.size()), q1_(disc.cells.size()), q2_(disc.cells.size()) {
        for (std::size_t c = 0; c < disc.cells.size(); ++c) {
            const auto& cell = disc.cells[c];
            double a0 = 0.0, a1 = 0.0, a2 = 0.0;
            for (int m = 0; m < cell.n; ++m) {
                const auto& e = cell.e[m];
                const double du = disc.diff(e, u);
                const double dd = disc.diff(e, d);
                a0 += e.k * du * du;
                a1 += e.k * du * dd;
                a2 += e.k * dd * dd;
            }
            area_[c] = cell.area;
            q0_[c] = a0;
            q1_[c] = a1;
            q2_[c] = a2;
        }
        const double su = std::accumulate(u.begin(), u.end(), 0.0);
        const double sd = std::accumulate(d.begin(), d.end(), 0.0);
        lin0_ = f * disc.h2 * su;
        lin1_ = f * disc.h2 * sd;
    }

    double value(double alpha) const {
        double s = 0.0;
        for (std::size_t c = 0; c < area_.size(); ++c) {
            const double q = square(c, alpha) + e2_;
            if (q > 0.0) s += area_[c] * (std::pow(q, 0.5 * p_) - floor_);
        }
        return s / p_ - lin0_ - alpha * lin1_;
    }

    double slope(double alpha) const {
        double s = 0.0;
        for (std::size_t c = 0; c < area_.size(); ++c) {
            const double q = square(c, alpha) + e2_;
            if (q > 0.0) s += area_[c] * std::pow(q, 0.5 * (p_ - 2.0)) * (q1_[c] + alpha * q2_[c]);
        }
        return s - lin1_;
    }

    /// Minimizer over alpha >= 0 of the convex ray energy.
    double minimize() const {
        double lo = 0.0;
        double flo = slope(0.0);
        if (!(flo < 0.0)) return 0.0;
        double hi = 1.0;
        double fhi = slope(hi);
        int expand = 0;
        while (fhi < 0.0 && expand < 40) {
            lo = hi;
            flo = fhi;
            hi *= 2.0;
            fhi = slope(hi);
            ++expand;
        }
        if (fhi < 0.0) return hi;
        // Illinois regula falsi on the monotone slope.
        int side = 0;
        for (int it = 0; it < 60; ++it) {
            double mid = (lo * fhi - hi * flo) / (fhi - flo);
            if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
            const double fm = slope(mid);
            if (fm < 0.0) {
                lo = mid;
                flo = fm;
                if (side == -1) fhi *= 0.5;
                side = -1;
            } else {
                hi = mid;
                fhi = fm;
                if (side == 1) flo *= 0.5;
                side = 1;
            }
            if (hi - lo <= 1e-10 * hi) break;
        }
        return flo == 0.0 ? lo : 0.5 * (lo + hi);
    }

private:
    double square(std::size_t c, double alpha) const {
        return std::max(0.0, q0_[c] + alpha * (2.0 * q1_[c] + alpha * q2_[c]));
    }

    double p_;
    double e2_;
    double floor_;
    std::vector<double> area_, q0_, q1_, q2_;
    double lin0_ = 0.0;
    double lin1_ = 0.0;
};

// Regularized energy sum_c a_c ((|grad u|^2 + eps^2)^{p/2} - eps^p) / p - f h^2 sum u.
double energy_of(const Discretization& disc, std::span<const double> u, double p, double f, double eps) {
    const double lin = std::accumulate(u.begin(), u.end(), 0.0);
    const double e2 = eps * eps;
    const double floor = std::pow(eps, p);
    double s = 0.0;
    for (const auto& cell : disc.cells) s += cell.area * (std::pow(disc.cell_square(cell, u) + e2, 0.5 * p) - floor);
    return s / p - f * disc.h2 * lin;
}

// Picks c so that c*v minimizes J_p along the ray through v (f = 1); returns log c.
double log_optimal_scale(const Discretization& disc, std::span<const double> v, double p) {
    const double g = disc.gradient_power(v, p);
    const double l = disc.h2 * std::accumulate(v.begin(), v.end(), 0.0);
    if (!(g > 0.0) || !(l > 0.0)) throw SolverError("starting field has no gradient or no mass");
    return (std::log(l) - std::log(g)) / (p - 1.0);
}

std::vector<double> poisson_start(const Discretization& disc, const SolverConfig& config, int& linear_iterations) {
    detail::LinearSystem sys;
    std::vector<double> ones(disc.cells.size(), 1.0);
    disc.assemble(ones, {}, {}, sys);
    std::vector<double> b(disc.unknowns(), disc.h2);
    std::vector<double> v(disc.unknowns(), 0.0);
    const double bnorm = disc.h2 * std::sqrt(static_cast<double>(disc.unknowns()));
    const int it =
        detail::conjugate_gradient(sys, b, v, config.linear_tolerance * bnorm, config.max_linear_iterations);
    if (it < 0) throw SolverError("linear solve for the starting field did not converge");
    linear_iterations += it;
    return v;
}

void fill_result(TorsionSolveResult& r, const Discretization& disc, std::span<const double> psi, double log_s,
                 double p) {
    const double s = std::exp(log_s);
    std::vector<double> phi(psi.begin(), psi.end());
    for (double& x : phi) x *= s;
    r.field = ScalarField(r.field.grid_ptr(), disc.scatter(phi));
    r.p = p;
    r.l1_norm = disc.h2 * std::accumulate(phi.begin(), phi.end(), 0.0);
    r.sup_norm = phi.empty() ? 0.0 : *std::max_element(phi.begin(), phi.end());
    r.gradient_lp = disc.gradient_power(phi, p);
    r.energy = r.gradient_lp / p - r.l1_norm;
    const std::vector<double> ones(disc.unknowns(), 1.0);
    const double pairing = disc.flux_pairing(phi, ones, p);
    const double mass = disc.h2 * disc.unknowns();
    r.weak_residual = std::abs(pairing - mass) / std::max(1.0, mass);
}

}  // namespace

void SolverConfig::validate(const Grid2D& grid) const {
    if (!(p > 1.0) || !std::isfinite(p)) throw SolverError("p must be > 1");
    if (p > 4.0) throw SolverError("p above 4 is not supported");
    if (max_iterations < 1) throw SolverError("max_iterations must be positive");
    if (!(energy_tolerance > 0.0) || energy_tolerance > 1e-4)
        throw SolverError("energy_tolerance must lie in (0, 1e-4]");
    if (!(regularization_floor >= 0.0) || !(regularization_floor < grid.spacing()))
        throw SolverError("regularization_floor must lie in [0, grid spacing)");
    if (max_linear_iterations < 1) throw SolverError("max_linear_iterations must be positive");
    if (!(linear_tolerance > 0.0) || linear_tolerance >= 1.0) throw SolverError("linear_tolerance must lie in (0, 1)");
}

TorsionSolveResult solve_torsion(const GridPtr& grid, const SolverConfig& config, const ScalarField* warm_start) {
    if (!grid) throw SolverError("solve_torsion needs a grid");
    config.validate(*grid);
    if (grid->interior_count() == 0) throw SolverError("grid has no interior nodes");
    if (warm_start && warm_start->grid().node_count() != grid->node_count())
        throw SolverError("warm start lives on a different grid");

    const Discretization disc(*grid);
    const double p = config.p;

    TorsionSolveResult result{ScalarField(grid)};
    result.p = p;

    // Work with psi = phi / s, max psi ~ 1, so that -Delta_p psi = f with f = s^{1-p}.
    std::vector<double> v;
    const bool warm = warm_start && config.continuation && warm_start->max_value() > 0.0;
    if (warm) {
        v = disc.gather(warm_start->values());
        for (double& x : v) x = std::max(x, 0.0);
    } else {
        v = poisson_start(disc, config, result.linear_iterations);
    }
    const double vmax = *std::max_element(v.begin(), v.end());
    for (double& x : v) x /= vmax;
    const double log_c = log_optimal_scale(disc, v, p);
    const double log_s = log_c;
    const double f = std::exp((1.0 - p) * log_s);
    std::vector<double>& psi = v;

    double eps = std::max(1e-2 * grid->spacing(), config.regularization_floor);
    double energy = energy_of(disc, psi, p, f, eps);
    const double energy_scale = std::exp(p * log_s);
    result.energy_history.push_back(energy_scale * energy);
    result.regularization_history.push_back(eps);

    detail::LinearSystem sys;
    const std::size_t ncell = disc.cells.size();
    const int n = disc.unknowns();
    std::vector<double> q, weight(ncell), rank_one, grad(n), residual(n), dir(n);
    if (config.method == SolverMethod::Newton) rank_one.resize(ncell);
    const double rhs = f * disc.h2;
    const double bnorm = rhs * std::sqrt(static_cast<double>(n));

    bool converged = false;
    int it = 0;
    for (; it < config.max_iterations; ++it) {
        disc.cell_squares(psi, q);
        const double e2 = eps * eps;
        for (std::size_t c = 0; c < ncell; ++c) {
            weight[c] = std::pow(q[c] + e2, 0.5 * (p - 2.0));
            if (!rank_one.empty()) rank_one[c] = (p - 2.0) * weight[c] / (q[c] + e2);
        }
        disc.assemble(weight, rank_one, psi, sys);
        disc.weighted_gradient(weight, psi, grad);
        double rnorm = 0.0;
        for (int a = 0; a < n; ++a) {
            residual[a] = rhs - grad[a];
            rnorm += residual[a] * residual[a];
        }
        rnorm = std::sqrt(rnorm);
        std::fill(dir.begin(), dir.end(), 0.0);
        const double tol = std::max(config.linear_tolerance * bnorm,
                                    config.method == SolverMethod::Newton ? config.newton_forcing * rnorm : 0.0);
        const int lin = detail::conjugate_gradient(sys, residual, dir, tol, config.max_linear_iterations);
        if (lin > 0) result.linear_iterations += lin;

        const RayEnergy ray(disc, psi, dir, p, f, eps);
        const double alpha = ray.minimize();
        double decrease = 0.0;
        if (alpha > 0.0) {
            const double trial = ray.value(alpha);
            if (trial <= energy) {
                for (int a = 0; a < disc.unknowns(); ++a) psi[a] += alpha * dir[a];
                decrease = energy - trial;
                energy = trial;
            }
        }
        result.energy_history.push_back(energy_scale * energy);
        result.regularization_history.push_back(eps);

        const bool stalled = decrease <= config.energy_tolerance * std::abs(energy);
        if (stalled) {
            if (eps <= config.regularization_floor) {
                converged = true;
                ++it;
                break;
            }
            eps = std::max(eps * 0.1, config.regularization_floor);
            energy = energy_of(disc, psi, p, f, eps);
        }
    }

    result.iterations = it;
    result.final_regularization = eps;
    result.converged = converged;
    fill_result(result, disc, psi, log_s, p);
    if (!converged) {
        std::ostringstream os;
        os << "p-torsion solve did not converge in " << config.max_iterations << " iterations (p = " << p
           << ", regularization " << eps << ")";
        throw SolverNonConvergence(os.str(), std::move(result));
    }
    return result;
}

double weak_residual(const ScalarField& phi, double p, const ScalarField& test_field) {
    if (!(p > 1.0)) throw SolverError("p must be > 1");
    const Grid2D& g = phi.grid();
    const Grid2D& tg = test_field.grid();
    if (&g != &tg && (g.nx() != tg.nx() || g.ny() != tg.ny() || g.spacing() != tg.spacing()))
        throw SolverError("weak_residual: fields live on different grids");
    const Discretization disc(g);
    const auto u = disc.gather(phi.values());
    const auto v = disc.gather(test_field.values());
    for (std::size_t k = 0; k < tg.node_count(); ++k)
        if (!g.inside(k) && test_field[k] != 0.0) throw SolverError("test field must vanish outside the mask");
    const double pairing = disc.flux_pairing(u, v, p);
    double mass = 0.0;
    double abs_mass = 0.0;
    for (double x : v) {
        mass += x;
        abs_mass += std::abs(x);
    }
    return std::abs(pairing - disc.h2 * mass) / std::max(1.0, disc.h2 * abs_mass);
}

double weak_residual(const TorsionSolveResult& result, const ScalarField& test_field) {
    return weak_residual(result.field, result.p, test_field);
}

FieldNorms field_norms(const ScalarField& field, double p) {
    if (!(p >= 1.0)) throw SolverError("field_norms needs p >= 1");
    const Discretization disc(field.grid());
    const auto u = disc.gather(field.values());
    FieldNorms n;
    for (double x : u) {
        n.l1 += std::abs(x);
        n.lp += std::pow(std::abs(x), p);
        n.sup = std::max(n.sup, std::abs(x));
    }
    n.l1 *= disc.h2;
    n.lp *= disc.h2;
    n.grad_lp = disc.gradient_power(u, p);
    return n;
}

double gradient_l1(const ScalarField& field) {
    const Discretization disc(field.grid());
    return disc.gradient_power(disc.gather(field.values()), 1.0);
}

}  // namespace cheeger
