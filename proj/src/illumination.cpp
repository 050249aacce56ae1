#include "sundial/illumination.hpp"

#include <cassert>

#include "sundial/losses.hpp"
#include "sundial/rng.hpp"

namespace sundial {

void ShadowConfig::validate() const {
    if (kappa <= 0.0 || xi <= 0.0)
        throw std::invalid_argument("shadow config: kappa and xi must be positive");
    if (!(kappa > 2.0 * xi))
        throw std::invalid_argument("shadow config: kappa must exceed 2*xi");
    if (delta0 < 0.0 || decay_k < 0.0)
        throw std::invalid_argument("shadow config: padding terms must be non-negative");
    if (n_shadow_samples < 1)
        throw std::invalid_argument("shadow config: need at least one shadow sample");
}

Vec3 shadow_origin(const Ray& ray, double depth, int iter, const ShadowConfig& cfg) {
    return ray.o + (depth - cfg.padding(iter)) * ray.d;
}

double complex_weight(double p, const ShadowConfig& cfg) {
    double s1 = stable_sigmoid(-((cfg.kappa - cfg.xi) - cfg.kappa * p));
    double s2 = stable_sigmoid(-(cfg.kappa * p - cfg.xi));
    return 1.0 - (s1 + s2);
}

double complex_weight_dp(double p, const ShadowConfig& cfg) {
    double s1 = stable_sigmoid(-((cfg.kappa - cfg.xi) - cfg.kappa * p));
    double s2 = stable_sigmoid(-(cfg.kappa * p - cfg.xi));
    return -cfg.kappa * (s1 * (1.0 - s1) - s2 * (1.0 - s2));
}

void illumination_weights(double p_direct, const ShadowConfig& cfg, double* w_direct,
                          double* w_ambient, double* w_complex) {
    double wc = complex_weight(p_direct, cfg);
    *w_complex = wc;
    *w_direct = (1.0 - wc) * p_direct;
    *w_ambient = (1.0 - wc) * (1.0 - p_direct);
}

Vec3 compose_color(const Vec3& albedo, const Vec3& ambient, const Vec3& complex_color,
                   double w_direct, double w_ambient, double w_complex) {
    return w_direct * albedo + w_ambient * albedo.cwise(ambient) +
           w_complex * albedo.cwise(complex_color);
}

double secondary_march(const SceneField& field, const Vec3& o_s, const Vec3& d_s, int n_samples,
                       SecondaryMarch& rec) {
    rec.origin = o_s;
    rec.dir = d_s;
    rec.miss = false;
    rec.reentry = false;
    rec.cells.clear();
    rec.raw_density.clear();
    rec.sum_sigma = 0.0;
    rec.p = 1.0;

    const Aabb& bb = field.bbox();
    double s0 = 0.0, s1 = 0.0;
    if (bb.contains(o_s)) {
        AabbExit ex = aabb_exit(o_s, d_s, bb);
        s1 = ex.t;
        rec.exit_axis = ex.axis;
        rec.exit_face = ex.face;
    } else {
        double t0, t1;
        if (!intersect_aabb({o_s, d_s}, bb, 0.0, &t0, &t1) || t1 <= t0) {
            rec.miss = true;
            rec.s0 = rec.length = rec.delta = 0.0;
            return 1.0;  // exits immediately
        }
        rec.reentry = true;
        s0 = t0;
        s1 = t1;
    }
    rec.s0 = s0;
    rec.length = s1 - s0;
    const int m = n_samples;
    rec.delta = rec.length / m;
    if (rec.delta <= 0.0) {
        rec.length = rec.delta = 0.0;
        return 1.0;
    }

    const VoxelGrid& grid = field.main_grid();
    rec.cells.resize(m);
    rec.raw_density.resize(m);
    double acc = 0.0;
    double sampled[kMainChannels];
    for (int j = 0; j < m; ++j) {
        Vec3 x = o_s + (s0 + (j + 0.5) * rec.delta) * d_s;
        rec.cells[j] = grid.locate(x);
        grid.sample(rec.cells[j], sampled);
        rec.raw_density[j] = sampled[kChDensity];
        acc += softplus(sampled[kChDensity]);
    }
    rec.sum_sigma = acc;
    rec.p = std::exp(-acc * rec.delta);
    return rec.p;
}

void secondary_march_backward(const SceneField& field, const SecondaryMarch& rec,
                              double d_p_upstream, float* main_grad, Vec3* g_origin, Vec3* g_dir) {
    *g_origin = Vec3{};
    *g_dir = Vec3{};
    if (rec.miss || rec.cells.empty() || rec.delta <= 0.0 || d_p_upstream == 0.0) return;

    const VoxelGrid& grid = field.main_grid();
    const double d_sigma = -rec.p * rec.delta * d_p_upstream;      // same for every sample
    double d_delta = -rec.p * rec.sum_sigma * d_p_upstream;
    double up[kMainChannels] = {0.0};
    for (size_t j = 0; j < rec.cells.size(); ++j) {
        double d_raw = d_sigma * softplus_prime(rec.raw_density[j]);
        up[kChDensity] = d_raw;
        grid.sample_backward(rec.cells[j], up, main_grad);
        // sample position path
        Vec3 gx = d_raw * grid.spatial_grad(rec.cells[j], kChDensity);
        double tj = rec.s0 + (j + 0.5) * rec.delta;
        *g_origin += gx;
        *g_dir += tj * gx;
        d_delta += (j + 0.5) * dot(gx, rec.dir);
    }
    double d_length = d_delta / static_cast<double>(rec.cells.size());
    if (!rec.reentry) {
        // length = (face - origin[axis]) / dir[axis]
        double inv = 1.0 / rec.dir[rec.exit_axis];
        (*g_origin)[rec.exit_axis] += d_length * (-inv);
        (*g_dir)[rec.exit_axis] += d_length * (-rec.length * inv);
    }
}

namespace {

void resize_record(PixelRecord& rec, size_t n, int embed_dim) {
    rec.albedo.resize(n);
    rec.normal_raw.resize(n);
    rec.normal_raw_norm.resize(n);
    rec.normal_pred.resize(n);
    rec.normal_degen.resize(n);
    rec.grad_raw.resize(n);
    rec.grad_raw_norm.resize(n);
    rec.normal_dens.resize(n);
    rec.dens_degen.resize(n);
    rec.cells_transient.resize(n);
    rec.beta_arg.resize(n);
    rec.beta_s.resize(n);
    rec.trans_coeff.resize(n * embed_dim);
}

}  // namespace

const PixelOutputs& render_pixel(const SceneField& field, const Ray& ray,
                                 const PerImageParams& img, const Vec3& sun_dir0,
                                 const ShadowConfig& shadow, const PixelRenderOptions& opt,
                                 PixelRecord& rec) {
    rec.ray = ray;
    rec.opt = opt;
    rec.cfg = shadow;
    rec.img_embedding = img.transient_embedding;
    PixelOutputs& out = rec.out;
    out = PixelOutputs{};

    rec.jitters.clear();
    if (opt.stratified) {
        rec.jitters.resize(opt.primary_samples);
        for (int i = 0; i < opt.primary_samples; ++i)
            rec.jitters[i] = u64_to_unit(hash_u64(opt.jitter_seed, opt.ray_index, i));
    }
    march(field, ray, opt.primary_samples, rec.jitters, rec.march);

    rec.sun = refine_sun_direction(img, sun_dir0);
    out.sun_dir = rec.sun.d_s;
    rec.ambient_color = img.ambient_color();

    if (!rec.march.hit) {
        out.hit = false;
        out.color = opt.background;
        out.depth = 0.0;
        out.depth_background = true;
        out.split.p_direct = 1.0;
        illumination_weights(1.0, shadow, &out.split.w_direct, &out.split.w_ambient,
                             &out.split.w_complex);
        rec.shadow.miss = true;
        return out;
    }

    const size_t n = rec.march.size();
    const int embed = field.embed_dim();
    resize_record(rec, n, embed);

    const VoxelGrid& main_grid = field.main_grid();
    const VoxelGrid& tgrid = field.transient_grid();

    Vec3 c_alb;
    double depth_raw = 0.0;
    double beta = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double* raw = &rec.march.raw[i * kMainChannels];
        const double w = rec.march.weights[i];
        Vec3 a{stable_sigmoid(raw[kChAlbedo]), stable_sigmoid(raw[kChAlbedo + 1]),
               stable_sigmoid(raw[kChAlbedo + 2])};
        rec.albedo[i] = a;

        Vec3 nr{raw[kChNormal], raw[kChNormal + 1], raw[kChNormal + 2]};
        double nn = norm(nr);
        rec.normal_raw[i] = nr;
        rec.normal_raw_norm[i] = nn;
        bool ndeg = nn < 1e-8;
        rec.normal_degen[i] = ndeg;
        rec.normal_pred[i] = ndeg ? Vec3{0.0, 0.0, 1.0} : nr / nn;

        Vec3 g = main_grid.spatial_grad(rec.march.cells[i], kChDensity);
        double gn = norm(g);
        rec.grad_raw[i] = g;
        rec.grad_raw_norm[i] = gn;
        bool gdeg = gn < 1e-12;
        rec.dens_degen[i] = gdeg;
        rec.normal_dens[i] = gdeg ? Vec3{0.0, 0.0, 1.0} : g / (-gn);

        Vec3 x = ray.o + rec.march.t_vals[i] * ray.d;
        rec.cells_transient[i] = tgrid.locate(x);
        tgrid.sample(rec.cells_transient[i], &rec.trans_coeff[i * embed]);
        double barg = field.transient_bias();
        for (int k = 0; k < embed; ++k)
            barg += rec.trans_coeff[i * embed + k] * img.transient_embedding[k];
        rec.beta_arg[i] = barg;
        rec.beta_s[i] = softplus(barg);

        c_alb += w * a;
        depth_raw += w * rec.march.t_vals[i];
        beta += w * rec.beta_s[i];
    }

    out.hit = true;
    out.albedo = c_alb;
    out.beta = beta;
    out.depth_background = rec.march.opacity < opt.opacity_floor;
    out.depth = out.depth_background ? rec.march.t_exit : depth_raw;

    // geometric regularizers (shared formula helpers from the loss module)
    {
        rec.skip_normal.resize(n);
        rec.skip_orient.resize(n);
        for (size_t i = 0; i < n; ++i) {
            rec.skip_normal[i] = rec.dens_degen[i] || rec.normal_degen[i];
            rec.skip_orient[i] = rec.normal_degen[i];
        }
        out.normal_loss = normal_consistency_term(rec.march.weights, rec.normal_dens,
                                                  rec.normal_pred, rec.skip_normal);
        out.orient_loss = orientation_term(rec.march.weights, rec.normal_pred, ray.d,
                                           rec.skip_orient);

        const double span = rec.march.t_exit - rec.march.t_enter;
        auto& s_vals = rec.prefix_w;
        auto& ds_vals = rec.prefix_ws;
        s_vals.resize(n);
        ds_vals.resize(n);
        for (size_t i = 0; i < n; ++i) {
            s_vals[i] = (rec.march.t_vals[i] - rec.march.t_enter) / span;
            ds_vals[i] = rec.march.deltas[i] / span;
        }
        out.distortion_loss = distortion_term(rec.march.weights, s_vals, ds_vals);
    }

    // secondary shadow ray
    Vec3 o_s = shadow_origin(ray, out.depth, opt.iter, shadow);
    double p = secondary_march(field, o_s, rec.sun.d_s, opt.secondary_samples, rec.shadow);

    out.split.p_direct = p;
    illumination_weights(p, shadow, &out.split.w_direct, &out.split.w_ambient,
                         &out.split.w_complex);

    // complex color at the surface estimate
    rec.surface_point = ray.o + out.depth * ray.d;
    const VoxelGrid& cgrid = field.complex_grid();
    rec.cell_complex = cgrid.locate(rec.surface_point);
    rec.complex_coeff.resize(kComplexChannels);
    cgrid.sample(rec.cell_complex, rec.complex_coeff.data());
    for (int k = 0; k < 3; ++k) {
        double logit = rec.complex_coeff[kChComplexBias + k] +
                       rec.complex_coeff[kChComplexDir + 3 * k] * rec.sun.d_s.x +
                       rec.complex_coeff[kChComplexDir + 3 * k + 1] * rec.sun.d_s.y +
                       rec.complex_coeff[kChComplexDir + 3 * k + 2] * rec.sun.d_s.z;
        rec.complex_logits[k] = logit;
        rec.complex_color[k] = stable_sigmoid(logit);
    }

    out.split.term_direct = out.split.w_direct * c_alb;
    out.split.term_ambient = out.split.w_ambient * c_alb.cwise(rec.ambient_color);
    out.split.term_complex = out.split.w_complex * c_alb.cwise(rec.complex_color);
    out.color = out.split.term_direct + out.split.term_ambient + out.split.term_complex +
                rec.march.trans_end() * opt.background;
    return out;
}

void render_pixel_backward(const SceneField& field, PixelRecord& rec, const PixelUpstream& up,
                           const GradSink& sink) {
    const PixelOutputs& out = rec.out;
    if (!out.hit) return;  // background color is constant

    const size_t n = rec.march.size();
    const Vec3 B = up.d_color;
    const Vec3& c_alb = out.albedo;
    const Vec3& camb = rec.ambient_color;
    const Vec3& cci = rec.complex_color;
    const double wdi = out.split.w_direct;
    const double wamb = out.split.w_ambient;
    const double wc = out.split.w_complex;
    const double p = out.split.p_direct;

    // compose_color backward
    double d_wdi = dot(B, c_alb);
    double d_wamb = dot(B, c_alb.cwise(camb));
    double d_wc = dot(B, c_alb.cwise(cci)) + up.d_w_complex;
    Vec3 d_calb = wdi * B + wamb * B.cwise(camb) + wc * B.cwise(cci);
    Vec3 d_camb = wamb * B.cwise(c_alb);
    Vec3 d_cci = wc * B.cwise(c_alb);
    double d_trans_end = dot(B, rec.opt.background);

    if (sink.ambient_raw) {
        for (int k = 0; k < 3; ++k)
            sink.ambient_raw[k] +=
                static_cast<float>(d_camb[k] * sigmoid_prime_from_value(camb[k]));
    }

    // complex color backward: coefficients, sun direction, surface position
    Vec3 d_ds{};
    double d_depth = 0.0;
    {
        const VoxelGrid& cgrid = field.complex_grid();
        double up12[kComplexChannels] = {0.0};
        Vec3 d_xs{};
        for (int k = 0; k < 3; ++k) {
            double dl = d_cci[k] * sigmoid_prime_from_value(cci[k]);
            if (dl == 0.0) continue;
            up12[kChComplexBias + k] += dl;
            Vec3 row{rec.complex_coeff[kChComplexDir + 3 * k],
                     rec.complex_coeff[kChComplexDir + 3 * k + 1],
                     rec.complex_coeff[kChComplexDir + 3 * k + 2]};
            for (int m = 0; m < 3; ++m) up12[kChComplexDir + 3 * k + m] += dl * rec.sun.d_s[m];
            d_ds += dl * row;
            Vec3 gsum = cgrid.spatial_grad(rec.cell_complex, kChComplexBias + k);
            for (int m = 0; m < 3; ++m)
                gsum += rec.sun.d_s[m] * cgrid.spatial_grad(rec.cell_complex, kChComplexDir + 3 * k + m);
            d_xs += dl * gsum;
        }
        if (sink.complex_grid) cgrid.sample_backward(rec.cell_complex, up12, sink.complex_grid);
        d_depth += dot(d_xs, rec.ray.d);  // surface point = o + depth * d
    }

    // weight split backward
    double d_wc_full = d_wc + d_wdi * (-p) + d_wamb * (-(1.0 - p));
    double d_p = d_wdi * (1.0 - wc) - d_wamb * (1.0 - wc) + up.d_p_direct +
                 d_wc_full * complex_weight_dp(p, rec.cfg);

    // secondary march backward (density + origin/direction position paths)
    Vec3 g_os{}, g_ds{};
    if (sink.main_grid) secondary_march_backward(field, rec.shadow, d_p, sink.main_grid, &g_os, &g_ds);
    d_depth += dot(g_os, rec.ray.d);  // o_s = o + (depth - padding) * d

    Vec3 d_ds_total = d_ds + g_ds;
    if (sink.up_raw) refine_sun_backward(rec.sun, d_ds_total, sink.up_raw);

    double d_depth_total = d_depth + up.d_depth;

    // accumulate d(loss)/d(w_i)
    auto& dw = rec.d_weights;
    dw.assign(n, 0.0);
    if (!out.depth_background && d_depth_total != 0.0)
        for (size_t i = 0; i < n; ++i) dw[i] += d_depth_total * rec.march.t_vals[i];
    for (size_t i = 0; i < n; ++i)
        dw[i] += dot(d_calb, rec.albedo[i]) + up.d_beta * rec.beta_s[i];

    if (up.d_normal_loss != 0.0 || up.d_orient_loss != 0.0) {
        for (size_t i = 0; i < n; ++i) {
            if (!rec.dens_degen[i] && !rec.normal_degen[i] && up.d_normal_loss != 0.0) {
                Vec3 diff = rec.normal_dens[i] - rec.normal_pred[i];
                dw[i] += up.d_normal_loss * dot(diff, diff);
            }
            if (!rec.normal_degen[i] && up.d_orient_loss != 0.0) {
                double q = std::max(0.0, dot(rec.normal_pred[i], rec.ray.d));
                dw[i] += up.d_orient_loss * q * q;
            }
        }
    }

    if (up.d_distortion != 0.0) {
        const double span = rec.march.t_exit - rec.march.t_enter;
        auto& pw = rec.prefix_w;
        auto& pws = rec.prefix_ws;
        pw.resize(n + 1);
        pws.resize(n + 1);
        pw[0] = pws[0] = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double s = (rec.march.t_vals[i] - rec.march.t_enter) / span;
            pw[i + 1] = pw[i] + rec.march.weights[i];
            pws[i + 1] = pws[i] + rec.march.weights[i] * s;
        }
        const double w_tot = pw[n], ws_tot = pws[n];
        for (size_t i = 0; i < n; ++i) {
            double s = (rec.march.t_vals[i] - rec.march.t_enter) / span;
            double ds = rec.march.deltas[i] / span;
            double w = rec.march.weights[i];
            double lower = s * pw[i] - pws[i];
            double upper = (ws_tot - pws[i + 1]) - s * (w_tot - pw[i + 1]);
            dw[i] += up.d_distortion * (2.0 * (lower + upper) + (2.0 / 3.0) * w * ds);
        }
    }

    // weight chain -> density raws
    auto& dsig = rec.d_sigmas;
    dsig.resize(n);
    march_weights_backward(rec.march, dw, d_trans_end, dsig);

    // per-sample parameter gradients
    const VoxelGrid& main_grid = field.main_grid();
    const VoxelGrid& tgrid = field.transient_grid();
    const int embed = field.embed_dim();
    std::vector<double> upE(embed);
    double up7[kMainChannels];
    for (size_t i = 0; i < n; ++i) {
        const double w = rec.march.weights[i];
        for (double& v : up7) v = 0.0;
        const double* raw = &rec.march.raw[i * kMainChannels];
        up7[kChDensity] = dsig[i] * softplus_prime(raw[kChDensity]);

        Vec3 da = w * d_calb;
        for (int k = 0; k < 3; ++k)
            up7[kChAlbedo + k] = da[k] * sigmoid_prime_from_value(rec.albedo[i][k]);

        Vec3 d_np{};  // d / d predicted-normal unit vector
        if (!rec.dens_degen[i] && !rec.normal_degen[i] && up.d_normal_loss != 0.0) {
            Vec3 diff = rec.normal_dens[i] - rec.normal_pred[i];
            Vec3 dvec = (2.0 * up.d_normal_loss * w) * diff;
            // density normal path: n = -g/|g|
            Vec3 dn = dvec;
            Vec3 dv = (dn - rec.normal_dens[i] * dot(rec.normal_dens[i], dn)) /
                      rec.grad_raw_norm[i];
            Vec3 dg = -dv;
            if (sink.main_grid)
                main_grid.spatial_grad_backward(rec.march.cells[i], kChDensity, dg,
                                                sink.main_grid);
            d_np -= dvec;
        }
        if (!rec.normal_degen[i] && up.d_orient_loss != 0.0) {
            double q = std::max(0.0, dot(rec.normal_pred[i], rec.ray.d));
            if (q > 0.0) d_np += (2.0 * up.d_orient_loss * w * q) * rec.ray.d;
        }
        if (!rec.normal_degen[i] && (d_np.x != 0.0 || d_np.y != 0.0 || d_np.z != 0.0)) {
            Vec3 dr = (d_np - rec.normal_pred[i] * dot(rec.normal_pred[i], d_np)) /
                      rec.normal_raw_norm[i];
            for (int k = 0; k < 3; ++k) up7[kChNormal + k] += dr[k];
        }
        if (sink.main_grid) main_grid.sample_backward(rec.march.cells[i], up7, sink.main_grid);

        double dbs = up.d_beta * w;
        if (dbs != 0.0) {
            double dbarg = dbs * softplus_prime(rec.beta_arg[i]);
            if (sink.transient_grid) {
                for (int k = 0; k < embed; ++k) upE[k] = dbarg * rec.img_embedding[k];
                tgrid.sample_backward(rec.cells_transient[i], upE.data(), sink.transient_grid);
            }
            if (sink.embedding) {
                for (int k = 0; k < embed; ++k)
                    sink.embedding[k] +=
                        static_cast<float>(dbarg * rec.trans_coeff[i * embed + k]);
            }
        }
    }
}

}  // namespace sundial
