#include "limrsf/geometry/point_cloud.hpp"

#include <cmath>
#include <string>

#include "limrsf/error.hpp"

namespace limrsf {

void PointCloud::validate() const
{
    if (has_colors() && colors.size() != points.size())
        throw InvalidArgument("color count " + std::to_string(colors.size()) + " != point count " +
                              std::to_string(points.size()));
    if (has_normals() && normals.size() != points.size())
        throw InvalidArgument("normal count " + std::to_string(normals.size()) + " != point count " +
                              std::to_string(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].allFinite())
            throw InvalidArgument("non-finite coordinate at point " + std::to_string(i));
    }
    for (std::size_t i = 0; i < colors.size(); ++i) {
        if ((colors[i].array() < 0.0).any() || (colors[i].array() > 1.0).any())
            throw InvalidArgument("color channel outside [0,1] at point " + std::to_string(i));
    }
    for (std::size_t i = 0; i < normals.size(); ++i) {
        const double n = normals[i].norm();
        if (n != 0.0 && std::abs(n - 1.0) > 1e-6)
            throw InvalidArgument("normal at point " + std::to_string(i) + " is not unit length");
    }
}

PointCloud PointCloud::select(const std::vector<std::size_t>& indices) const
{
    PointCloud out;
    out.points.reserve(indices.size());
    for (std::size_t i : indices)
        out.points.push_back(points[i]);
    if (has_colors()) {
        out.colors.reserve(indices.size());
        for (std::size_t i : indices)
            out.colors.push_back(colors[i]);
    }
    if (has_normals()) {
        out.normals.reserve(indices.size());
        for (std::size_t i : indices)
            out.normals.push_back(normals[i]);
    }
    return out;
}

bool operator==(const PointCloud& a, const PointCloud& b)
{
    return a.points == b.points && a.colors == b.colors && a.normals == b.normals;
}

} // namespace limrsf
