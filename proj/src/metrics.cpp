#include "sundial/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace sundial {

namespace {

void check_same_shape(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height || a.channels != b.channels)
        throw std::invalid_argument("metric inputs must have identical shapes");
}

}  // namespace

double psnr(const Image& a, const Image& b) {
    check_same_shape(a, b);
    double se = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double d = static_cast<double>(a.data[i]) - b.data[i];
        se += d * d;
    }
    double mse = se / static_cast<double>(a.data.size());
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b) {
    check_same_shape(a, b);
    constexpr int kWin = 11;
    constexpr int kHalf = kWin / 2;
    constexpr double kSigma = 1.5;
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;
    if (a.width < kWin || a.height < kWin)
        throw std::invalid_argument("image too small for 11x11 ssim window");

    double kernel[kWin];
    double ksum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        double d = i - kHalf;
        kernel[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
        ksum += kernel[i];
    }
    for (double& k : kernel) k /= ksum;

    const int w = a.width, h = a.height, ch = a.channels;
    double total = 0.0;
    for (int c = 0; c < ch; ++c) {
        // separable Gaussian: horizontal pass over x, x^2, y, y^2, xy maps
        std::vector<double> hx(static_cast<size_t>(w) * h), hx2(hx.size()), hy(hx.size()),
            hy2(hx.size()), hxy(hx.size());
        for (int row = 0; row < h; ++row) {
            for (int col = kHalf; col < w - kHalf; ++col) {
                double sx = 0, sx2 = 0, sy = 0, sy2 = 0, sxy = 0;
                for (int k = 0; k < kWin; ++k) {
                    double va = a.at(col + k - kHalf, row, c);
                    double vb = b.at(col + k - kHalf, row, c);
                    sx += kernel[k] * va;
                    sx2 += kernel[k] * va * va;
                    sy += kernel[k] * vb;
                    sy2 += kernel[k] * vb * vb;
                    sxy += kernel[k] * va * vb;
                }
                size_t idx = static_cast<size_t>(row) * w + col;
                hx[idx] = sx;
                hx2[idx] = sx2;
                hy[idx] = sy;
                hy2[idx] = sy2;
                hxy[idx] = sxy;
            }
        }
        double sum = 0.0;
        size_t count = 0;
        for (int row = kHalf; row < h - kHalf; ++row) {
            for (int col = kHalf; col < w - kHalf; ++col) {
                double mx = 0, mx2 = 0, my = 0, my2 = 0, mxy = 0;
                for (int k = 0; k < kWin; ++k) {
                    size_t idx = static_cast<size_t>(row + k - kHalf) * w + col;
                    mx += kernel[k] * hx[idx];
                    mx2 += kernel[k] * hx2[idx];
                    my += kernel[k] * hy[idx];
                    my2 += kernel[k] * hy2[idx];
                    mxy += kernel[k] * hxy[idx];
                }
                double var_x = mx2 - mx * mx;
                double var_y = my2 - my * my;
                double cov = mxy - mx * my;
                double v = ((2.0 * mx * my + kC1) * (2.0 * cov + kC2)) /
                           ((mx * mx + my * my + kC1) * (var_x + var_y + kC2));
                sum += v;
                ++count;
            }
        }
        total += sum / static_cast<double>(count);
    }
    return total / ch;
}

double masked_mae(const Image& a, const Image& b, const Image* mask) {
    check_same_shape(a, b);
    double sum = 0.0;
    size_t count = 0;
    for (int y = 0; y < a.height; ++y) {
        for (int x = 0; x < a.width; ++x) {
            if (mask && mask->at(x, y) <= 0.5f) continue;
            for (int c = 0; c < a.channels; ++c) {
                sum += std::abs(static_cast<double>(a.at(x, y, c)) - b.at(x, y, c));
                ++count;
            }
        }
    }
    return count ? sum / static_cast<double>(count) : 0.0;
}

double mask_iou(const Image& a, const Image& b) {
    check_same_shape(a, b);
    size_t inter = 0, uni = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        bool va = a.data[i] > 0.5f;
        bool vb = b.data[i] > 0.5f;
        inter += va && vb;
        uni += va || vb;
    }
    return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 1.0;
}

}  // namespace sundial
