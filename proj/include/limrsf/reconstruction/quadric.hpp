#pragma once

#include <optional>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace limrsf {

/// Quadric error form Q(v) = v^T A v + 2 b^T v + c.
///
/// Built from planes n.x + d = 0 (unit n) as A = w n n^T, b = w d n,
/// c = w d^2, so Q(v) is the weighted sum of squared plane distances.
template <typename Scalar>
struct Quadric
{
    using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
    using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

    Mat3 A = Mat3::Zero();
    Vec3 b = Vec3::Zero();
    Scalar c = 0;

    static Quadric from_plane(const Vec3& unit_normal, Scalar offset, Scalar weight = Scalar(1))
    {
        Quadric q;
        q.A.noalias() = weight * unit_normal * unit_normal.transpose();
        q.b = weight * offset * unit_normal;
        q.c = weight * offset * offset;
        return q;
    }

    /// Plane of a triangle weighted by its area; zero for degenerate triangles.
    static Quadric from_triangle(const Vec3& p0, const Vec3& p1, const Vec3& p2)
    {
        const Vec3 cross = (p1 - p0).cross(p2 - p0);
        const Scalar len = cross.norm();
        if (!(len > Scalar(0)))
            return {};
        const Vec3 n = cross / len;
        return from_plane(n, -n.dot(p0), len / 2);
    }

    Scalar operator()(const Vec3& v) const { return v.dot(A * v) + 2 * b.dot(v) + c; }

    Quadric& operator+=(const Quadric& o)
    {
        A += o.A;
        b += o.b;
        c += o.c;
        return *this;
    }
    friend Quadric operator+(Quadric a, const Quadric& o) { return a += o; }

    /// argmin Q, i.e. the solution of A v = -b, or nothing when A is singular
    /// or its condition number exceeds `max_condition`.
    std::optional<Vec3> minimizer(Scalar max_condition = Scalar(1e8)) const
    {
        Eigen::SelfAdjointEigenSolver<Mat3> eig(A);
        const Vec3& ev = eig.eigenvalues();
        if (!(ev[0] > Scalar(0)) || ev[2] / ev[0] > max_condition)
            return std::nullopt;
        // A^-1 = V diag(1/ev) V^T
        const Mat3& V = eig.eigenvectors();
        return -(V * (V.transpose() * b).cwiseQuotient(ev));
    }
};

} // namespace limrsf
