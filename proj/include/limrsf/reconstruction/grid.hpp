#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <Eigen/Core>

namespace limrsf {

/// Cubic lattice of `resolution`^3 cells. Samples live at cell centers; cell
/// (i, j, k) is centered at origin + spacing * (i, j, k).
template <typename Scalar>
struct GridGeometry
{
    using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

    Vec3 origin = Vec3::Zero();
    Scalar spacing = Scalar(1);
    int resolution = 0;

    Eigen::Index cell_count() const
    {
        return static_cast<Eigen::Index>(resolution) * resolution * resolution;
    }
    Eigen::Index index(int i, int j, int k) const
    {
        return (static_cast<Eigen::Index>(k) * resolution + j) * resolution + i;
    }
    Vec3 center(int i, int j, int k) const { return origin + spacing * Vec3(Scalar(i), Scalar(j), Scalar(k)); }
    /// Continuous lattice coordinates of a world position.
    Vec3 to_lattice(const Vec3& p) const { return (p - origin) / spacing; }
};

/// One scalar per cell.
template <typename Scalar>
struct ScalarGrid
{
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    GridGeometry<Scalar> geometry;
    Vector values;

    ScalarGrid() = default;
    explicit ScalarGrid(const GridGeometry<Scalar>& g) : geometry(g), values(Vector::Zero(g.cell_count())) {}

    Scalar& operator()(int i, int j, int k) { return values[geometry.index(i, j, k)]; }
    Scalar operator()(int i, int j, int k) const { return values[geometry.index(i, j, k)]; }

    /// Trilinear interpolation between cell centers, clamped at the border.
    Scalar sample(const typename GridGeometry<Scalar>::Vec3& p) const
    {
        const int n = geometry.resolution;
        const auto q = geometry.to_lattice(p);
        int base[3];
        Scalar frac[3];
        for (int a = 0; a < 3; ++a) {
            const Scalar c = std::clamp(q[a], Scalar(0), Scalar(n - 1));
            base[a] = std::min(static_cast<int>(std::floor(c)), n - 2);
            frac[a] = c - Scalar(base[a]);
        }
        Scalar acc = 0;
        for (int corner = 0; corner < 8; ++corner) {
            const int dx = corner & 1, dy = (corner >> 1) & 1, dz = (corner >> 2) & 1;
            const Scalar w = (dx ? frac[0] : 1 - frac[0]) * (dy ? frac[1] : 1 - frac[1]) *
                             (dz ? frac[2] : 1 - frac[2]);
            acc += w * (*this)(base[0] + dx, base[1] + dy, base[2] + dz);
        }
        return acc;
    }
};

/// One 3-vector per cell, stored column-wise.
template <typename Scalar>
struct VectorGrid
{
    GridGeometry<Scalar> geometry;
    Eigen::Matrix<Scalar, 3, Eigen::Dynamic> values;

    VectorGrid() = default;
    explicit VectorGrid(const GridGeometry<Scalar>& g)
        : geometry(g), values(Eigen::Matrix<Scalar, 3, Eigen::Dynamic>::Zero(3, g.cell_count()))
    {
    }

    auto operator()(int i, int j, int k) { return values.col(geometry.index(i, j, k)); }
    auto operator()(int i, int j, int k) const { return values.col(geometry.index(i, j, k)); }
};

} // namespace limrsf
