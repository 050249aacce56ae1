// Training objectives: photometric/transient, ambient color priors,
// complex-weight penalty, and the geometric regularizers.
#pragma once

#include <cstdint>
#include <span>

#include "sundial/vec.hpp"

namespace sundial {

struct LossWeights {
    double lambda_white = 0.05;
    double lambda_blue = 0.05;
    double lambda_ci = 0.01;
    double lambda_normal = 3e-4;
    double lambda_orient = 0.1;
    double lambda_dist = 0.01;
    double tau = 0.3;   // ambient brightness threshold
    double psi = 1.0;   // blue dominance factor
    double beta_min = 0.05;
    double eta = 3.0;
    bool plain_l2 = false;  // ablation: freeze beta at 1 - beta_min

    void validate() const;
};

// lambda_w * max(0, mean(rgb) - tau)^2; zero iff mean <= tau.
double ambient_white_loss(const Vec3& c_amb, const LossWeights& w);
double ambient_white_loss_grad(const Vec3& c_amb, const LossWeights& w, Vec3* d_c);

// lambda_b * max(0, psi*(r+g)/2 - b)^2; zero iff blue dominates.
double ambient_blue_loss(const Vec3& c_amb, const LossWeights& w);
double ambient_blue_loss_grad(const Vec3& c_amb, const LossWeights& w, Vec3* d_c);

// lambda_ci * mean(W_comp) over the batch.
double complex_weight_loss(std::span<const double> w_comp, const LossWeights& w);

// Per-ray photometric/transient objective:
//   |c - c_gt|^2 / (2 (beta + beta_min)^2) + (log(beta + beta_min) + eta) / 2
double transient_loss_single(const Vec3& c, const Vec3& c_gt, double beta, const LossWeights& w);
double transient_loss_single_grad(const Vec3& c, const Vec3& c_gt, double beta,
                                  const LossWeights& w, Vec3* d_c, double* d_beta);
// Batch mean of the per-ray values.
double transient_loss(std::span<const Vec3> c, std::span<const Vec3> c_gt,
                      std::span<const double> beta, const LossWeights& w);

// Per-ray geometric regularizers (weight-scaled sums over samples; the
// trainer scales them by their lambdas). `skip` marks degenerate samples.
double normal_consistency_term(std::span<const double> weights, std::span<const Vec3> n_density,
                               std::span<const Vec3> n_predicted,
                               std::span<const uint8_t> skip);
double orientation_term(std::span<const double> weights, std::span<const Vec3> n_predicted,
                        const Vec3& view_dir, std::span<const uint8_t> skip);
// s = normalized sample positions (ascending), ds = normalized widths.
double distortion_term(std::span<const double> weights, std::span<const double> s,
                       std::span<const double> ds);

// Scaled per-term contributions; total() is their sum.
struct LossBreakdown {
    double photometric = 0.0;
    double white = 0.0;
    double blue = 0.0;
    double ci = 0.0;
    double normal = 0.0;
    double orient = 0.0;
    double dist = 0.0;

    double total() const { return photometric + white + blue + ci + normal + orient + dist; }
};

}  // namespace sundial
