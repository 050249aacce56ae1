#include "sundial/losses.hpp"

#include <stdexcept>

namespace sundial {

void LossWeights::validate() const {
    if (lambda_white < 0 || lambda_blue < 0 || lambda_ci < 0 || lambda_normal < 0 ||
        lambda_orient < 0 || lambda_dist < 0)
        throw std::invalid_argument("loss weights must be non-negative");
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must be in (0,1)");
    if (!(psi > 0.0)) throw std::invalid_argument("psi must be positive");
    if (beta_min < 0.0) throw std::invalid_argument("beta_min must be non-negative");
}

double ambient_white_loss(const Vec3& c_amb, const LossWeights& w) {
    double excess = (c_amb.x + c_amb.y + c_amb.z) / 3.0 - w.tau;
    if (excess <= 0.0) return 0.0;
    return w.lambda_white * excess * excess;
}

double ambient_white_loss_grad(const Vec3& c_amb, const LossWeights& w, Vec3* d_c) {
    double excess = (c_amb.x + c_amb.y + c_amb.z) / 3.0 - w.tau;
    if (excess <= 0.0) {
        *d_c = Vec3{};
        return 0.0;
    }
    double g = w.lambda_white * 2.0 * excess / 3.0;
    *d_c = {g, g, g};
    return w.lambda_white * excess * excess;
}

double ambient_blue_loss(const Vec3& c_amb, const LossWeights& w) {
    double deficit = w.psi * (c_amb.x + c_amb.y) / 2.0 - c_amb.z;
    if (deficit <= 0.0) return 0.0;
    return w.lambda_blue * deficit * deficit;
}

double ambient_blue_loss_grad(const Vec3& c_amb, const LossWeights& w, Vec3* d_c) {
    double deficit = w.psi * (c_amb.x + c_amb.y) / 2.0 - c_amb.z;
    if (deficit <= 0.0) {
        *d_c = Vec3{};
        return 0.0;
    }
    double g = w.lambda_blue * 2.0 * deficit;
    *d_c = {g * w.psi / 2.0, g * w.psi / 2.0, -g};
    return w.lambda_blue * deficit * deficit;
}

double complex_weight_loss(std::span<const double> w_comp, const LossWeights& w) {
    if (w_comp.empty()) return 0.0;
    double s = 0.0;
    for (double v : w_comp) s += v;
    return w.lambda_ci * s / static_cast<double>(w_comp.size());
}

double transient_loss_single(const Vec3& c, const Vec3& c_gt, double beta, const LossWeights& w) {
    Vec3 r = c - c_gt;
    double r2 = dot(r, r);
    double bpl = w.plain_l2 ? 1.0 : beta + w.beta_min;
    return r2 / (2.0 * bpl * bpl) + (std::log(bpl) + w.eta) / 2.0;
}

double transient_loss_single_grad(const Vec3& c, const Vec3& c_gt, double beta,
                                  const LossWeights& w, Vec3* d_c, double* d_beta) {
    Vec3 r = c - c_gt;
    double r2 = dot(r, r);
    double bpl = w.plain_l2 ? 1.0 : beta + w.beta_min;
    *d_c = r / (bpl * bpl);
    *d_beta = w.plain_l2 ? 0.0 : -r2 / (bpl * bpl * bpl) + 0.5 / bpl;
    return r2 / (2.0 * bpl * bpl) + (std::log(bpl) + w.eta) / 2.0;
}

double transient_loss(std::span<const Vec3> c, std::span<const Vec3> c_gt,
                      std::span<const double> beta, const LossWeights& w) {
    if (c.empty()) return 0.0;
    double s = 0.0;
    for (size_t i = 0; i < c.size(); ++i) s += transient_loss_single(c[i], c_gt[i], beta[i], w);
    return s / static_cast<double>(c.size());
}

double normal_consistency_term(std::span<const double> weights, std::span<const Vec3> n_density,
                               std::span<const Vec3> n_predicted,
                               std::span<const uint8_t> skip) {
    double s = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        if (!skip.empty() && skip[i]) continue;
        Vec3 d = n_density[i] - n_predicted[i];
        s += weights[i] * dot(d, d);
    }
    return s;
}

double orientation_term(std::span<const double> weights, std::span<const Vec3> n_predicted,
                        const Vec3& view_dir, std::span<const uint8_t> skip) {
    double s = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        if (!skip.empty() && skip[i]) continue;
        double q = std::max(0.0, dot(n_predicted[i], view_dir));
        s += weights[i] * q * q;
    }
    return s;
}

double distortion_term(std::span<const double> weights, std::span<const double> s,
                       std::span<const double> ds) {
    double pair = 0.0, self = 0.0;
    double acc_w = 0.0, acc_ws = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
        pair += weights[i] * (s[i] * acc_w - acc_ws);
        self += weights[i] * weights[i] * ds[i];
        acc_w += weights[i];
        acc_ws += weights[i] * s[i];
    }
    return 2.0 * pair + self / 3.0;
}

}  // namespace sundial
