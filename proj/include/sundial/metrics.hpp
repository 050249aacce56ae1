// Image quality metrics for evaluation: PSNR, SSIM, masked MAE, mask IoU.
#pragma once

#include "sundial/image_io.hpp"

namespace sundial {

inline constexpr double kPsnrCap = 99.0;

// 10 log10(1 / MSE) over all channels; identical images report the cap.
double psnr(const Image& a, const Image& b);

// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), standard constants
// K1=0.01 K2=0.03 on unit range, averaged over channels; windows fully inside
// the image only.
double ssim(const Image& a, const Image& b);

// Mean absolute error over pixels where mask != 0 (all pixels if mask empty).
double masked_mae(const Image& a, const Image& b, const Image* mask = nullptr);

// Intersection-over-union of boolean masks (values > 0.5 count as set).
double mask_iou(const Image& a, const Image& b);

}  // namespace sundial
