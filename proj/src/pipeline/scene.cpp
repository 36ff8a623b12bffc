#include "limrsf/pipeline/scene.hpp"

#include <cmath>
#include <random>

#include "limrsf/error.hpp"

namespace limrsf {
namespace {

constexpr double kSlack = 1e-9;

std::size_t cells(double extent, double spacing)
{
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(extent / spacing + kSlack)));
}

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Color3 hash_color(const Point3& p)
{
    std::uint64_t h = 0;
    for (int a = 0; a < 3; ++a)
        h = splitmix(h ^ static_cast<std::uint64_t>(std::llround(p[a] * 1e4)));
    Color3 c;
    for (int a = 0; a < 3; ++a)
        c[a] = static_cast<double>((h >> (8 * a)) & 0xff) / 255.0;
    return c;
}

// A rectangle on the room boundary: origin plus two spanning axes.
struct Face
{
    Point3 origin;
    Point3 u;
    Point3 v;
};

std::vector<Face> faces(const SceneSpec& s)
{
    const Box r = s.room();
    const Point3 ex(s.width, 0, 0), ey(0, s.depth, 0), ez(0, 0, s.height);
    return {
        {r.lo, ex, ey},                                  // floor
        {Point3(r.lo.x(), r.lo.y(), r.hi.z()), ex, ey},  // ceiling
        {r.lo, ey, ez},                                  // left wall
        {Point3(r.hi.x(), r.lo.y(), r.lo.z()), ey, ez},  // right wall
        {Point3(r.lo.x(), r.hi.y(), r.lo.z()), ex, ez},  // back wall
    };
}

} // namespace

Box SceneSpec::room() const
{
    const Point3 half(width / 2, depth / 2, height / 2);
    return {-half, half};
}

void SceneSpec::validate() const
{
    if (!(width > 0 && depth > 0 && height > 0))
        throw InvalidArgument("room extents must be positive");
    if (!(spacing > 0))
        throw InvalidArgument("scene spacing must be positive");
    if (!(noise_sigma >= 0))
        throw InvalidArgument("noise sigma must be non-negative");
    const Box r = room();
    for (const Box& h : holes) {
        if ((h.lo.array() > h.hi.array()).any())
            throw InvalidArgument("hole box has lo > hi");
        if ((h.lo.array() < r.lo.array() - kSlack).any() || (h.hi.array() > r.hi.array() + kSlack).any())
            throw InvalidArgument("hole box leaves the room");
    }
}

SceneSpec default_scene(std::uint64_t seed)
{
    SceneSpec s;
    s.seed = seed;
    const double y = s.depth / 2;
    s.holes.push_back({Point3(-0.5, y - 0.05, -0.5), Point3(0.5, y, 0.5)});
    return s;
}

std::size_t face_sample_count(const SceneSpec& spec)
{
    std::size_t total = 0;
    for (const Face& f : faces(spec))
        total += cells(f.u.norm(), spec.spacing) * cells(f.v.norm(), spec.spacing);
    return total;
}

PointCloud generate_room_scan(const SceneSpec& spec)
{
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    PointCloud cloud;
    for (const Face& f : faces(spec)) {
        const std::size_t nu = cells(f.u.norm(), spec.spacing), nv = cells(f.v.norm(), spec.spacing);
        for (std::size_t j = 0; j < nv; ++j) {
            for (std::size_t i = 0; i < nu; ++i) {
                const Point3 p = f.origin + f.u * ((static_cast<double>(i) + 0.5) / static_cast<double>(nu)) +
                                 f.v * ((static_cast<double>(j) + 0.5) / static_cast<double>(nv));
                bool cut = false;
                for (const Box& h : spec.holes)
                    cut = cut || h.contains(p);
                if (cut)
                    continue;
                Point3 q = p;
                if (spec.noise_sigma > 0) {
                    for (int a = 0; a < 3; ++a)
                        q[a] += spec.noise_sigma * noise(rng);
                }
                cloud.points.push_back(q);
                cloud.colors.push_back(hash_color(p));
            }
        }
    }
    const Box r = spec.room();
    std::uniform_real_distribution<double> unit(-5.0, 5.0);
    for (std::size_t i = 0; i < spec.outliers; ++i) {
        Point3 p;
        for (int a = 0; a < 3; ++a)
            p[a] = unit(rng) * (r.hi[a] - r.lo[a]);
        cloud.points.push_back(p);
        cloud.colors.push_back(hash_color(p));
    }
    return cloud;
}

} // namespace limrsf
