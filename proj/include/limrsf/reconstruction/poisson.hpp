#pragma once

#include "limrsf/geometry/point_cloud.hpp"
#include "limrsf/reconstruction/grid.hpp"
#include "limrsf/reconstruction/mesh.hpp"
#include "limrsf/reconstruction/poisson_solver.hpp"

namespace limrsf {

struct ReconstructionParams
{
    /// The grid has 2^depth cells per axis.
    int depth = 6;
    /// Standard deviation of the Gaussian used to splat normals, in meters.
    double smoothing_radius = 0.03;
    /// Support radius for vertex densities, in meters.
    double density_radius = 0.15;
    /// Added to the automatically chosen iso-level.
    double iso_offset = 0.0;
    /// Triangles reaching more than this many grid cells outside the bounding
    /// box of the samples are dropped. Negative keeps the whole level set.
    double crop_margin = 0.25;
    poisson::SolverOptions solver{};

    void validate() const;
};

/// Everything the reconstruction produced, for inspection and tests.
struct PoissonSurface
{
    TriangleMesh mesh;
    VectorGrid<double> normal_field;
    ScalarGrid<double> divergence;
    ScalarGrid<double> indicator;
    double iso = 0.0;
    poisson::SolveReport solve;
};

/// Cubic grid around the bounding box of `points`, padded by a sixteenth of
/// the cube on every side (at least one cell).
GridGeometry<double> fit_grid(const std::vector<Point3>& points, int depth);

/// Poisson surface reconstruction on a uniform grid: splat the oriented
/// normals into a vector field, take its divergence, solve the Neumann
/// Poisson problem for the indicator and extract the level set at the mean
/// indicator value over the samples (plus iso_offset), cropped to the sample
/// bounding box grown by crop_margin cells. Points with a zero
/// normal are ignored. The mesh comes back without densities or highlights.
PoissonSurface poisson_reconstruct_detailed(const PointCloud& cloud, const ReconstructionParams& params);

inline TriangleMesh poisson_reconstruct(const PointCloud& cloud, const ReconstructionParams& params)
{
    return poisson_reconstruct_detailed(cloud, params).mesh;
}

} // namespace limrsf
