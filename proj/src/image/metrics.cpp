#include "limrsf/image/metrics.hpp"

#include <cmath>
#include <limits>

#include "limrsf/error.hpp"

namespace limrsf {
namespace {

using Plane = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::pair<Image, Image> gray_pair(const Image& a, const Image& b)
{
    a.validate();
    b.validate();
    if (a.width != b.width || a.height != b.height)
        throw InvalidArgument("image size mismatch: " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                              " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
    return {to_gray(a), to_gray(b)};
}

double ssim_term(double mu1, double mu2, double var1, double var2, double cov, double c1, double c2)
{
    return ((2 * (mu1 * mu2) + c1) * (2 * cov + c2)) / ((mu1 * mu1 + mu2 * mu2 + c1) * (var1 + var2 + c2));
}

Eigen::ArrayXd gaussian_kernel(int size, double sigma)
{
    Eigen::ArrayXd k(size);
    const double c = (size - 1) / 2.0;
    for (int i = 0; i < size; ++i)
        k[i] = std::exp(-(i - c) * (i - c) / (2 * sigma * sigma));
    return k / k.sum();
}

// Separable correlation keeping only fully covered positions.
Plane filter_valid(const Plane& x, const Eigen::ArrayXd& k)
{
    const Eigen::Index n = k.size();
    const Eigen::Index h = x.rows() - n + 1, w = x.cols() - n + 1;
    Plane rows = Plane::Zero(x.rows(), w);
    for (Eigen::Index t = 0; t < n; ++t)
        rows += k[t] * x.middleCols(t, w);
    Plane out = Plane::Zero(h, w);
    for (Eigen::Index t = 0; t < n; ++t)
        out += k[t] * rows.middleRows(t, h);
    return out;
}

} // namespace

void SsimParams::validate() const
{
    if (!(k1 > 0 && k2 > 0))
        throw InvalidArgument("ssim constants must be positive");
    if (mode == SsimMode::Windowed && (window < 1 || window % 2 == 0 || !(sigma > 0)))
        throw InvalidArgument("ssim window must be odd and positive with positive sigma");
}

double mse(const Image& a, const Image& b)
{
    const auto [ga, gb] = gray_pair(a, b);
    return (ga.pixels - gb.pixels).square().mean();
}

double psnr_from_mse(double m)
{
    if (!(m >= 0))
        throw InvalidArgument("mse must be non-negative");
    if (m == 0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / m);
}

double psnr(const Image& a, const Image& b)
{
    return psnr_from_mse(mse(a, b));
}

double ssim(const Image& a, const Image& b, const SsimParams& params)
{
    params.validate();
    const auto [ga, gb] = gray_pair(a, b);
    const double c1 = params.c1(), c2 = params.c2();
    if (params.mode == SsimMode::Global) {
        const Eigen::ArrayXd& x = ga.pixels;
        const Eigen::ArrayXd& y = gb.pixels;
        const double mx = x.mean(), my = y.mean();
        const double vx = (x - mx).square().mean(), vy = (y - my).square().mean();
        const double cov = ((x - mx) * (y - my)).mean();
        return ssim_term(mx, my, vx, vy, cov, c1, c2);
    }

    if (ga.width < params.window || ga.height < params.window)
        throw InvalidArgument("image smaller than the ssim window");
    const Plane x = ga.plane(), y = gb.plane();
    const Eigen::ArrayXd k = gaussian_kernel(params.window, params.sigma);
    const Plane mx = filter_valid(x, k), my = filter_valid(y, k);
    const Plane vx = filter_valid(x * x, k) - mx * mx;
    const Plane vy = filter_valid(y * y, k) - my * my;
    const Plane cov = filter_valid(x * y, k) - mx * my;
    const Plane map = ((2 * (mx * my) + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    return map.mean();
}

} // namespace limrsf
