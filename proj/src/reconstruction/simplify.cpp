#include "limrsf/reconstruction/simplify.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "limrsf/error.hpp"
#include "limrsf/reconstruction/quadric.hpp"

namespace limrsf {

const char* to_string(SimplifyStatus status) noexcept
{
    switch (status) {
    case SimplifyStatus::Reached: return "reached";
    case SimplifyStatus::Exhausted: return "exhausted";
    case SimplifyStatus::NoOp: return "no-op";
    }
    return "unknown";
}

namespace {

using Q = Quadric<double>;

struct Candidate
{
    double cost;
    std::uint32_t u, v; // u < v
    std::uint32_t stamp_u, stamp_v;
    Point3 target;

    // Min-heap on (cost, u, v).
    bool operator<(const Candidate& o) const
    {
        if (cost != o.cost)
            return cost > o.cost;
        if (u != o.u)
            return u > o.u;
        return v > o.v;
    }
};

class Simplifier
{
public:
    explicit Simplifier(const TriangleMesh& mesh)
        : pos_(mesh.vertices),
          faces_(mesh.triangles),
          face_alive_(mesh.triangles.size(), 1),
          vertex_alive_(mesh.vertices.size(), 1),
          stamp_(mesh.vertices.size(), 0),
          quadric_(mesh.vertices.size()),
          vertex_faces_(mesh.vertices.size()),
          parent_(mesh.vertices.size()),
          colors_(mesh.vertex_colors),
          density_(mesh.vertex_density),
          highlight_(mesh.highlight),
          alive_count_(mesh.vertices.size())
    {
        for (std::uint32_t v = 0; v < parent_.size(); ++v)
            parent_[v] = v;
        for (std::uint32_t f = 0; f < faces_.size(); ++f) {
            const auto& t = faces_[f];
            const Q q = Q::from_triangle(pos_[t[0]], pos_[t[1]], pos_[t[2]]);
            for (auto v : t) {
                quadric_[v] += q;
                vertex_faces_[v].push_back(f);
            }
        }
    }

    std::size_t run(std::size_t target)
    {
        std::size_t collapses = 0;
        while (alive_count_ > target) {
            seed_all_edges();
            std::size_t pass = 0;
            while (alive_count_ > target && !heap_.empty()) {
                const Candidate c = heap_.top();
                heap_.pop();
                if (!vertex_alive_[c.u] || !vertex_alive_[c.v] || stamp_[c.u] != c.stamp_u ||
                    stamp_[c.v] != c.stamp_v)
                    continue;
                if (!collapse(c))
                    continue;
                ++pass;
            }
            collapses += pass;
            heap_ = {};
            if (pass == 0)
                break;
        }
        return collapses;
    }

    SimplifyResult finish(SimplifyStatus status, std::size_t collapses)
    {
        SimplifyResult result;
        result.status = status;
        result.collapses = collapses;
        std::vector<std::uint32_t> remap(pos_.size(), 0);
        TriangleMesh& out = result.mesh;
        for (std::uint32_t v = 0; v < pos_.size(); ++v) {
            if (!vertex_alive_[v])
                continue;
            remap[v] = static_cast<std::uint32_t>(out.vertices.size());
            out.vertices.push_back(pos_[v]);
            out.vertex_colors.push_back(colors_[v]);
            if (!density_.empty())
                out.vertex_density.push_back(density_[v]);
            if (!highlight_.empty())
                out.highlight.push_back(highlight_[v]);
        }
        for (std::uint32_t f = 0; f < faces_.size(); ++f) {
            if (face_alive_[f])
                out.triangles.push_back({remap[faces_[f][0]], remap[faces_[f][1]], remap[faces_[f][2]]});
        }
        result.ancestry.resize(pos_.size());
        for (std::uint32_t v = 0; v < pos_.size(); ++v)
            result.ancestry[v] = remap[find(v)];
        return result;
    }

private:
    std::uint32_t find(std::uint32_t v)
    {
        while (parent_[v] != v) {
            parent_[v] = parent_[parent_[v]];
            v = parent_[v];
        }
        return v;
    }

    // Sorted, de-duplicated neighbours over alive faces.
    std::vector<std::uint32_t> neighbours(std::uint32_t v) const
    {
        std::vector<std::uint32_t> out;
        for (auto f : vertex_faces_[v]) {
            if (!face_alive_[f])
                continue;
            for (auto w : faces_[f]) {
                if (w != v)
                    out.push_back(w);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    // Number of alive faces holding edge (v, w).
    int edge_faces(std::uint32_t v, std::uint32_t w) const
    {
        int n = 0;
        for (auto f : vertex_faces_[v]) {
            if (face_alive_[f] && (faces_[f][0] == w || faces_[f][1] == w || faces_[f][2] == w))
                ++n;
        }
        return n;
    }

    bool on_boundary(std::uint32_t v) const
    {
        for (auto w : neighbours(v)) {
            if (edge_faces(v, w) == 1)
                return true;
        }
        return false;
    }

    void push(std::uint32_t a, std::uint32_t b)
    {
        const std::uint32_t u = std::min(a, b), v = std::max(a, b);
        const Q q = quadric_[u] + quadric_[v];
        Point3 target;
        double cost;
        if (auto m = q.minimizer()) {
            target = *m;
            cost = q(target);
        } else {
            const Point3 options[3] = {pos_[u], pos_[v], 0.5 * (pos_[u] + pos_[v])};
            target = options[0];
            cost = q(options[0]);
            for (int i = 1; i < 3; ++i) {
                const double ci = q(options[i]);
                if (ci < cost) {
                    cost = ci;
                    target = options[i];
                }
            }
        }
        heap_.push({cost, u, v, stamp_[u], stamp_[v], target});
    }

    void seed_all_edges()
    {
        for (std::uint32_t f = 0; f < faces_.size(); ++f) {
            if (!face_alive_[f])
                continue;
            const auto& t = faces_[f];
            for (int e = 0; e < 3; ++e) {
                const std::uint32_t a = t[e], b = t[(e + 1) % 3];
                // Each undirected edge once, from the face where it runs a -> b with a < b,
                // or from any face when the edge is a boundary edge running b -> a.
                if (a < b || edge_faces(a, b) == 1)
                    push(a, b);
            }
        }
    }

    bool legal(std::uint32_t u, std::uint32_t v, const Point3& target) const
    {
        const int shared = edge_faces(u, v);
        if (shared == 0 || shared > 2)
            return false;
        // Link condition: common neighbours are exactly the apexes of the shared faces.
        const auto nu = neighbours(u), nv = neighbours(v);
        std::vector<std::uint32_t> common;
        std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(common));
        if (common.size() != static_cast<std::size_t>(shared))
            return false;
        if (shared == 2 && on_boundary(u) && on_boundary(v))
            return false;

        for (std::uint32_t w : {u, v}) {
            for (auto f : vertex_faces_[w]) {
                if (!face_alive_[f])
                    continue;
                const auto& t = faces_[f];
                const bool has_u = t[0] == u || t[1] == u || t[2] == u;
                const bool has_v = t[0] == v || t[1] == v || t[2] == v;
                if (has_u && has_v)
                    continue;
                Point3 p[3], q[3];
                for (int i = 0; i < 3; ++i) {
                    p[i] = pos_[t[i]];
                    q[i] = (t[i] == u || t[i] == v) ? target : p[i];
                }
                const Point3 before = (p[1] - p[0]).cross(p[2] - p[0]);
                const Point3 after = (q[1] - q[0]).cross(q[2] - q[0]);
                if (!(before.dot(after) > 0.0))
                    return false;
            }
        }
        return true;
    }

    bool collapse(const Candidate& c)
    {
        const std::uint32_t u = c.u, v = c.v;
        if (!legal(u, v, c.target))
            return false;

        pos_[u] = c.target;
        quadric_[u] += quadric_[v];
        colors_[u] = 0.5 * (colors_[u] + colors_[v]);
        if (!density_.empty())
            density_[u] = 0.5 * (density_[u] + density_[v]);
        if (!highlight_.empty())
            highlight_[u] = static_cast<std::uint8_t>(highlight_[u] | highlight_[v]);

        for (auto f : vertex_faces_[v]) {
            if (!face_alive_[f])
                continue;
            auto& t = faces_[f];
            if (t[0] == u || t[1] == u || t[2] == u) {
                face_alive_[f] = 0;
                continue;
            }
            for (auto& idx : t) {
                if (idx == v)
                    idx = u;
            }
            vertex_faces_[u].push_back(f);
        }
        auto& fu = vertex_faces_[u];
        fu.erase(std::remove_if(fu.begin(), fu.end(), [&](std::uint32_t f) { return !face_alive_[f]; }), fu.end());
        std::sort(fu.begin(), fu.end());
        fu.erase(std::unique(fu.begin(), fu.end()), fu.end());
        vertex_faces_[v].clear();

        vertex_alive_[v] = 0;
        parent_[v] = u;
        --alive_count_;
        ++stamp_[u];
        ++stamp_[v];
        for (auto w : neighbours(u))
            push(u, w);
        return true;
    }

    std::vector<Point3> pos_;
    std::vector<Triangle> faces_;
    std::vector<std::uint8_t> face_alive_;
    std::vector<std::uint8_t> vertex_alive_;
    std::vector<std::uint32_t> stamp_;
    std::vector<Q> quadric_;
    std::vector<std::vector<std::uint32_t>> vertex_faces_;
    std::vector<std::uint32_t> parent_;
    std::vector<Rgba> colors_;
    std::vector<double> density_;
    std::vector<std::uint8_t> highlight_;
    std::size_t alive_count_;
    std::priority_queue<Candidate> heap_;
};

} // namespace

SimplifyResult simplify_mesh(const TriangleMesh& mesh, std::size_t target_vertex_count)
{
    mesh.validate();
    if (target_vertex_count < 4)
        throw InvalidArgument("simplification target must be at least 4 vertices, got " +
                              std::to_string(target_vertex_count));
    Simplifier s(mesh);
    if (target_vertex_count >= mesh.vertex_count())
        return s.finish(SimplifyStatus::NoOp, 0);
    const std::size_t collapses = s.run(target_vertex_count);
    const bool reached = mesh.vertex_count() - collapses <= target_vertex_count;
    return s.finish(reached ? SimplifyStatus::Reached : SimplifyStatus::Exhausted, collapses);
}

} // namespace limrsf
