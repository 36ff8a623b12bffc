#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "limrsf/error.hpp"
#include "limrsf/reconstruction/grid.hpp"

namespace limrsf::poisson {

/// y = w * L x, where L is the 7-point graph Laplacian on an n^3 cell grid with
/// zero-flux (Neumann) borders: (L x)_c = sum over existing face neighbours of
/// (x_c - x_nb). L is symmetric positive semi-definite; its null space is the
/// constant vector.
template <typename Scalar>
void apply_graph_laplacian(int n, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                           Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y, Scalar w = Scalar(1))
{
    y.resize(x.size());
    const Eigen::Index sy = n, sz = static_cast<Eigen::Index>(n) * n;
    Eigen::Index c = 0;
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i, ++c) {
                const Scalar xc = x[c];
                Scalar acc = 0;
                if (i > 0) acc += xc - x[c - 1];
                if (i + 1 < n) acc += xc - x[c + 1];
                if (j > 0) acc += xc - x[c - sy];
                if (j + 1 < n) acc += xc - x[c + sy];
                if (k > 0) acc += xc - x[c - sz];
                if (k + 1 < n) acc += xc - x[c + sz];
                y[c] = w * acc;
            }
        }
    }
}

/// Number of face neighbours of every cell (the diagonal of L).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> graph_degree(int n)
{
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d(static_cast<Eigen::Index>(n) * n * n);
    Eigen::Index c = 0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i, ++c)
                d[c] = Scalar((i > 0) + (i + 1 < n) + (j > 0) + (j + 1 < n) + (k > 0) + (k + 1 < n));
    return d;
}

/// Discrete Laplacian of a cell grid, -L x / h^2.
template <typename Scalar>
ScalarGrid<Scalar> laplacian(const ScalarGrid<Scalar>& x)
{
    ScalarGrid<Scalar> out(x.geometry);
    const Scalar h = x.geometry.spacing;
    apply_graph_laplacian<Scalar>(x.geometry.resolution, x.values, out.values, Scalar(-1) / (h * h));
    return out;
}

/// Divergence by central differences. Face fluxes average the two adjacent
/// cells; faces on the grid border carry zero flux, so the result sums to zero.
template <typename Scalar>
ScalarGrid<Scalar> divergence(const VectorGrid<Scalar>& field)
{
    const auto& g = field.geometry;
    const int n = g.resolution;
    ScalarGrid<Scalar> div(g);
    const Scalar inv2h = Scalar(1) / (2 * g.spacing);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                const int at[3] = {i, j, k};
                Scalar acc = 0;
                for (int a = 0; a < 3; ++a) {
                    const Scalar here = field(i, j, k)[a];
                    int nb[3] = {i, j, k};
                    if (at[a] + 1 < n) {
                        nb[a] = at[a] + 1;
                        acc += here + field(nb[0], nb[1], nb[2])[a];
                    }
                    if (at[a] > 0) {
                        nb[a] = at[a] - 1;
                        acc -= here + field(nb[0], nb[1], nb[2])[a];
                    }
                }
                div(i, j, k) = acc * inv2h;
            }
        }
    }
    return div;
}

struct SolverOptions
{
    /// Stop when ||b - A x|| <= tolerance * ||b||.
    double tolerance = 1e-6;
    int max_iterations = 3000;
    /// Precondition conjugate gradients with a multigrid V-cycle.
    bool multigrid = true;
};

struct SolveReport
{
    int iterations = 0;
    double relative_residual = 0.0;
};

namespace detail {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
void remove_mean(Vec<Scalar>& v)
{
    if (v.size() > 0)
        v.array() -= v.mean();
}

// Cell-centred hierarchy with piecewise-constant prolongation P and
// restriction P^T. The Galerkin coarse operator P^T (w L_f) P equals
// (4 w) L_c, so level l applies 4^l times the plain graph Laplacian.
template <typename Scalar>
class MultigridPreconditioner
{
public:
    explicit MultigridPreconditioner(int finest)
    {
        Scalar w = 1;
        for (int n = finest; n >= 2; n /= 2) {
            levels_.push_back({n, w, graph_degree<Scalar>(n) * w, {}, {}, {}, {}});
            w *= 4;
            if (n % 2)
                break;
        }
    }

    void apply(const Vec<Scalar>& r, Vec<Scalar>& z) { vcycle(0, r, z); }

private:
    struct Level
    {
        int n;
        Scalar weight;
        Vec<Scalar> diag;
        Vec<Scalar> x, b, tmp, coarse;
    };

    void smooth(const Level& lv, const Vec<Scalar>& b, Vec<Scalar>& x, Vec<Scalar>& tmp, int sweeps) const
    {
        constexpr Scalar omega = Scalar(0.8);
        for (int s = 0; s < sweeps; ++s) {
            apply_graph_laplacian<Scalar>(lv.n, x, tmp, lv.weight);
            x.array() += omega * (b - tmp).array() / lv.diag.array();
        }
    }

    void vcycle(std::size_t l, const Vec<Scalar>& b, Vec<Scalar>& x)
    {
        Level& lv = levels_[l];
        x.setZero(b.size());
        if (l + 1 == levels_.size()) {
            smooth(lv, b, x, lv.tmp, 40);
            return;
        }
        smooth(lv, b, x, lv.tmp, 2);
        apply_graph_laplacian<Scalar>(lv.n, x, lv.tmp, lv.weight);
        lv.tmp = b - lv.tmp;

        const int n = lv.n, m = n / 2;
        Level& next = levels_[l + 1];
        next.b.setZero(static_cast<Eigen::Index>(m) * m * m);
        Eigen::Index c = 0;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i, ++c)
                    next.b[(static_cast<Eigen::Index>(k / 2) * m + j / 2) * m + i / 2] += lv.tmp[c];

        vcycle(l + 1, next.b, next.x);

        c = 0;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i, ++c)
                    x[c] += next.x[(static_cast<Eigen::Index>(k / 2) * m + j / 2) * m + i / 2];
        smooth(lv, b, x, lv.tmp, 2);
    }

    std::vector<Level> levels_;
};

} // namespace detail

/// Solves laplacian(chi) = rho with Neumann borders by preconditioned
/// conjugate gradients. rho is projected onto zero mean (the compatibility
/// condition) and chi is returned with zero mean. Throws NumericError when the
/// iteration cap is reached, quoting the final relative residual.
template <typename Scalar>
SolveReport solve(const ScalarGrid<Scalar>& rho, ScalarGrid<Scalar>& chi, const SolverOptions& options = {})
{
    using V = detail::Vec<Scalar>;
    const int n = rho.geometry.resolution;
    const Scalar h = rho.geometry.spacing;
    chi = ScalarGrid<Scalar>(rho.geometry);

    // L chi = -h^2 rho
    V b = rho.values * (-h * h);
    detail::remove_mean(b);
    const double bnorm = static_cast<double>(b.norm());
    SolveReport report;
    if (bnorm == 0.0)
        return report;

    std::unique_ptr<detail::MultigridPreconditioner<Scalar>> mg;
    if (options.multigrid && n >= 4)
        mg = std::make_unique<detail::MultigridPreconditioner<Scalar>>(n);

    V& x = chi.values;
    V r = b, z, p, ap;
    auto precondition = [&] {
        if (mg)
            mg->apply(r, z);
        else
            z = r;
        detail::remove_mean(z);
    };
    precondition();
    p = z;
    Scalar rz = r.dot(z);
    for (int it = 1; it <= options.max_iterations; ++it) {
        apply_graph_laplacian<Scalar>(n, p, ap);
        const Scalar alpha = rz / p.dot(ap);
        x += alpha * p;
        r -= alpha * ap;
        report.iterations = it;
        report.relative_residual = static_cast<double>(r.norm()) / bnorm;
        if (report.relative_residual <= options.tolerance) {
            detail::remove_mean(x);
            return report;
        }
        precondition();
        const Scalar rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    throw NumericError("Poisson solve did not converge in " + std::to_string(options.max_iterations) +
                       " iterations (relative residual " + std::to_string(report.relative_residual) + ")");
}

} // namespace limrsf::poisson
