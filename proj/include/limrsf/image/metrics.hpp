#pragma once

#include "limrsf/image/image.hpp"

namespace limrsf {

enum class SsimMode
{
    Global,
    Windowed,
};

struct SsimParams
{
    double k1 = 0.01;
    double k2 = 0.03;
    SsimMode mode = SsimMode::Windowed;
    /// Gaussian window, windowed mode only.
    int window = 11;
    double sigma = 1.5;

    double c1() const { return k1 * k1; }
    double c2() const { return k2 * k2; }
    void validate() const;
};

// Both images are converted to gray first and must have the same size.

double mse(const Image& a, const Image& b);
/// 10 log10(1 / mse) with peak value 1; +infinity when the images agree.
double psnr(const Image& a, const Image& b);
double psnr_from_mse(double mse);
/// Global mode uses whole-image means, population variances and covariance.
/// Windowed mode averages over every fully contained window position.
double ssim(const Image& a, const Image& b, const SsimParams& params = {});

} // namespace limrsf
