#include "limrsf/reconstruction/marching.hpp"

#include <unordered_map>

namespace limrsf {

namespace {

// Kuhn subdivision: one tetrahedron per axis permutation, each a monotone path
// from corner 0 to corner 7 (corner bit a = offset along axis a).
constexpr int kTets[6][4] = {
    {0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7}, {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7},
};

class Extractor
{
public:
    Extractor(const ScalarGrid<double>& field, double iso) : field_(field), iso_(iso) {}

    TriangleMesh run()
    {
        const int n = field_.geometry.resolution;
        for (int k = 0; k + 1 < n; ++k) {
            for (int j = 0; j + 1 < n; ++j) {
                for (int i = 0; i + 1 < n; ++i) {
                    Eigen::Index id[8];
                    double val[8];
                    bool any_in = false, any_out = false;
                    for (int c = 0; c < 8; ++c) {
                        id[c] = field_.geometry.index(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                        val[c] = field_.values[id[c]];
                        (val[c] >= iso_ ? any_in : any_out) = true;
                    }
                    if (!any_in || !any_out)
                        continue;
                    for (const auto& tet : kTets) {
                        const Eigen::Index tid[4] = {id[tet[0]], id[tet[1]], id[tet[2]], id[tet[3]]};
                        const double tval[4] = {val[tet[0]], val[tet[1]], val[tet[2]], val[tet[3]]};
                        polygonize(tid, tval);
                    }
                }
            }
        }
        mesh_.vertex_colors.assign(mesh_.vertices.size(), Rgba(0.8, 0.8, 0.8, 1.0));
        return std::move(mesh_);
    }

private:
    Point3 position(Eigen::Index id) const
    {
        const int n = field_.geometry.resolution;
        const auto i = static_cast<int>(id % n);
        const auto j = static_cast<int>((id / n) % n);
        const auto k = static_cast<int>(id / (static_cast<Eigen::Index>(n) * n));
        return field_.geometry.center(i, j, k);
    }

    struct EdgeVertex
    {
        std::uint32_t index;
        Point3 midpoint;
    };

    EdgeVertex vertex_on(Eigen::Index a, double fa, Eigen::Index b, double fb)
    {
        if (a > b) {
            std::swap(a, b);
            std::swap(fa, fb);
        }
        const Point3 pa = position(a), pb = position(b);
        const auto key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
        auto [it, inserted] = edges_.try_emplace(key, static_cast<std::uint32_t>(mesh_.vertices.size()));
        if (inserted) {
            const double t = (iso_ - fa) / (fb - fa);
            mesh_.vertices.push_back(pa + t * (pb - pa));
        }
        return {it->second, 0.5 * (pa + pb)};
    }

    // Winding is decided on the edge-midpoint triangle, which is never
    // degenerate, against the direction from outside to inside corners.
    void emit(const EdgeVertex& a, const EdgeVertex& b, const EdgeVertex& c, const Point3& towards_inside)
    {
        const Point3 normal = (b.midpoint - a.midpoint).cross(c.midpoint - a.midpoint);
        if (normal.dot(towards_inside) >= 0.0)
            mesh_.triangles.push_back({a.index, b.index, c.index});
        else
            mesh_.triangles.push_back({a.index, c.index, b.index});
    }

    void polygonize(const Eigen::Index id[4], const double val[4])
    {
        int in[4], out[4];
        int nin = 0, nout = 0;
        for (int v = 0; v < 4; ++v) {
            if (val[v] >= iso_)
                in[nin++] = v;
            else
                out[nout++] = v;
        }
        if (nin == 0 || nout == 0)
            return;
        Point3 cin = Point3::Zero(), cout = Point3::Zero();
        for (int v = 0; v < nin; ++v)
            cin += position(id[in[v]]);
        for (int v = 0; v < nout; ++v)
            cout += position(id[out[v]]);
        const Point3 dir = cin / nin - cout / nout;
        auto edge = [&](int p, int q) { return vertex_on(id[p], val[p], id[q], val[q]); };

        if (nin == 1 || nout == 1) {
            const int lone = nin == 1 ? in[0] : out[0];
            const int* others = nin == 1 ? out : in;
            emit(edge(lone, others[0]), edge(lone, others[1]), edge(lone, others[2]), dir);
            return;
        }
        // Two in, two out: a quad through four edges, split along one diagonal.
        const EdgeVertex e00 = edge(in[0], out[0]);
        const EdgeVertex e01 = edge(in[0], out[1]);
        const EdgeVertex e11 = edge(in[1], out[1]);
        const EdgeVertex e10 = edge(in[1], out[0]);
        emit(e00, e01, e11, dir);
        emit(e00, e11, e10, dir);
    }

    const ScalarGrid<double>& field_;
    double iso_;
    TriangleMesh mesh_;
    std::unordered_map<std::uint64_t, std::uint32_t> edges_;
};

} // namespace

TriangleMesh extract_isosurface(const ScalarGrid<double>& field, double iso)
{
    return Extractor(field, iso).run();
}

} // namespace limrsf
