#pragma once

// Cell/edge form of the discrete p-Dirichlet energy shared by the solver and
// the norm routines.

#include <array>
#include <span>
#include <vector>

#include "cheeger/geometry.hpp"

namespace cheeger::detail {

/// Boundary crossings closer than this fraction of h are pushed out to it.
inline constexpr double kMinCrossing = 0.05;

/// One edge difference d = ca*u[a] + cb*u[b] (index -1: absent, i.e. the
/// boundary value 0). k is the weight of d^2 in the cell's |grad u|^2.
struct EdgeTerm {
    int a = -1;
    int b = -1;
    double ca = 0.0;
    double cb = 0.0;
    double k = 0.0;
    int la = 0;  // cell-local corners of a and b
    int lb = 0;
};

/// Corners are numbered (i,j), (i+1,j), (i+1,j+1), (i,j+1).
struct Cell {
    double area = 0.0;
    std::array<int, 4> node{-1, -1, -1, -1};
    std::array<EdgeTerm, 4> e{};
    int n = 0;
};

enum Neighbour { East = 0, North = 1, NorthEast = 2, NorthWest = 3 };

/// Symmetric 9-point system over the unknowns (interior nodes); each
/// coupling is stored once, at the southern/western unknown.
struct LinearSystem {
    std::vector<double> diag;
    std::array<std::vector<double>, 4> off;
    const std::array<std::vector<int>, 4>* neighbours = nullptr;

    void apply(std::span<const double> x, std::span<double> y) const;
};

/// Jacobi-preconditioned CG; x holds the initial guess. Stops once the
/// residual norm is at most `tolerance`. Returns the number of iterations,
/// or -1 on breakdown or when max_iterations is exceeded.
int conjugate_gradient(const LinearSystem& A, std::span<const double> b, std::span<double> x, double tolerance,
                       int max_iterations);

class Discretization {
public:
    explicit Discretization(const Grid2D& g);

    int unknowns() const { return static_cast<int>(node_of.size()); }

    double diff(const EdgeTerm& e, std::span<const double> u) const {
        double d = 0.0;
        if (e.a >= 0) d += e.ca * u[e.a];
        if (e.b >= 0) d += e.cb * u[e.b];
        return d;
    }

    double cell_square(const Cell& c, std::span<const double> u) const {
        double q = 0.0;
        for (int m = 0; m < c.n; ++m) {
            const double d = diff(c.e[m], u);
            q += c.e[m].k * d * d;
        }
        return q;
    }

    std::vector<double> gather(std::span<const double> nodal) const;
    std::vector<double> scatter(std::span<const double> u) const;
    void cell_squares(std::span<const double> u, std::vector<double>& q) const;
    /// Matrix with cell blocks area_c (weight_c M_c + rank_one_c g_c g_c^T),
    /// where u^T M_c u = |grad u|_c^2 and g_c = M_c u. With rank_one empty
    /// this is the 5-point matrix of sum_c area_c weight_c |grad u|_c^2 / 2.
    void assemble(std::span<const double> weight, std::span<const double> rank_one, std::span<const double> u,
                  LinearSystem& sys) const;
    /// out_a = sum_c area_c weight_c d/du_a (|grad u|_c^2 / 2)
    void weighted_gradient(std::span<const double> weight, std::span<const double> u, std::span<double> out) const;
    /// sum_c area_c |grad u|^{p-2} grad u . grad v
    double flux_pairing(std::span<const double> u, std::span<const double> v, double p) const;
    /// sum_c area_c |grad u|^p
    double gradient_power(std::span<const double> u, double p) const;

    const Grid2D& grid;
    double h2;
    std::vector<int> compact;
    std::vector<std::size_t> node_of;
    std::array<std::vector<int>, 4> neighbours;
    std::vector<Cell> cells;
};

}  // namespace cheeger::detail
