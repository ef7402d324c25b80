#pragma once

#include "raysamp/image.hpp"

namespace raysamp {

double mse(const Image& a, const Image& b);

/// Peak signal-to-noise ratio for peak 1.0: -10 log10(MSE). Identical images give +infinity.
double psnr(const Image& img, const Image& ref);

/// Mean structural similarity: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// dynamic range 1, population statistics, averaged over windows that lie entirely inside the
/// image and then over the three channels. Requires images of at least 11x11.
double ssim(const Image& img, const Image& ref);

}  // namespace raysamp
