#include <algorithm>
#include <cmath>
#include <cstring>

#include "polaris/kernels.hpp"
#include "polaris/vae.hpp"

namespace polaris {

namespace detail {
Matrix linear_forward(const Matrix& x, const DenseLayer& layer);
}

std::string to_string(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::elbo: return "elbo";
        case ObjectiveKind::beta: return "beta";
        case ObjectiveKind::annealed: return "annealed";
        case ObjectiveKind::dip2: return "dip2";
        case ObjectiveKind::btc: return "btc";
    }
    return "elbo";
}

ObjectiveKind objective_kind_from_string(const std::string& s) {
    if (s == "elbo") return ObjectiveKind::elbo;
    if (s == "beta") return ObjectiveKind::beta;
    if (s == "annealed") return ObjectiveKind::annealed;
    if (s == "dip2") return ObjectiveKind::dip2;
    if (s == "btc") return ObjectiveKind::btc;
    throw DomainError("unknown objective kind: '" + s + "'");
}

void ObjectiveConfig::validate() const {
    switch (kind) {
        case ObjectiveKind::elbo:
            break;
        case ObjectiveKind::beta:
        case ObjectiveKind::btc:
            if (!(beta >= 1.0))
                throw DomainError("objective: beta must be >= 1");
            if (kind == ObjectiveKind::btc && dataset_size < 1)
                throw DomainError("objective: dataset_size must be >= 1");
            break;
        case ObjectiveKind::annealed:
            if (!(gamma >= 0.0))
                throw DomainError("objective: gamma must be >= 0");
            if (!(c_max >= 0.0))
                throw DomainError("objective: c_max must be >= 0");
            if (anneal_steps < 1)
                throw DomainError("objective: anneal_steps must be >= 1");
            break;
        case ObjectiveKind::dip2:
            if (!(lambda_od >= 0.0) || !(lambda_d >= 0.0))
                throw DomainError("objective: lambdas must be >= 0");
            break;
    }
}

double ObjectiveConfig::capacity_at(std::size_t step) const {
    if (kind != ObjectiveKind::annealed) return 0.0;
    const double frac = std::min(
        1.0, static_cast<double>(step) / static_cast<double>(anneal_steps));
    return c_max * frac;
}

std::vector<double> gaussian_kl(const Matrix& mean, const Matrix& variance) {
    if (!mean.same_shape(variance))
        throw DimensionError("gaussian_kl: shape mismatch");
    std::vector<double> kl(mean.rows());
    for (std::size_t i = 0; i < mean.rows(); ++i) {
        const double* mu = mean.row(i);
        const double* v = variance.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < mean.cols(); ++j) {
            if (!(v[j] > 0.0))
                throw DomainError("gaussian_kl: nonpositive variance");
            acc += mu[j] * mu[j] + v[j] - 1.0 - std::log(v[j]);
        }
        kl[i] = 0.5 * acc;
    }
    return kl;
}

std::vector<double> reconstruction_loss(const Matrix& decoded,
                                        const Matrix& batch) {
    if (!decoded.same_shape(batch))
        throw DimensionError("reconstruction_loss: shape mismatch");
    std::vector<double> loss(decoded.rows());
    for (std::size_t i = 0; i < decoded.rows(); ++i)
        loss[i] = kernels::ops().bce_sum(decoded.row(i), batch.row(i),
                                         decoded.cols());
    return loss;
}

namespace {

constexpr double kBceEps = 1e-7;

struct ForwardState {
    std::vector<Matrix> enc_act;  // post-relu, one per encoder layer
    Matrix mean;
    Matrix logvar_raw;
    Matrix logvar;  // clamped
    Matrix variance;
    Matrix z;
    std::vector<Matrix> dec_act;  // post-relu, one per decoder hidden layer
    Matrix p;                     // sigmoid output
    std::vector<double> recon;    // per example
    std::vector<double> kl;       // per example, uses logvar directly
};

ForwardState forward(const VaeModel& model, const Matrix& batch,
                     const Matrix& noise) {
    if (batch.cols() != model.arch.input_dim)
        throw DimensionError("objective: batch width mismatch");
    if (noise.rows() != batch.rows() || noise.cols() != model.arch.latent_dim)
        throw DimensionError("objective: noise must be batch x latent");

    ForwardState st;
    const Matrix* h = &batch;
    for (const DenseLayer& layer : model.encoder) {
        Matrix pre = detail::linear_forward(*h, layer);
        kernels::ops().relu(pre.data(), pre.data(), pre.size());
        st.enc_act.push_back(std::move(pre));
        h = &st.enc_act.back();
    }
    st.mean = detail::linear_forward(*h, model.mean_head);
    st.logvar_raw = detail::linear_forward(*h, model.logvar_head);
    st.logvar = st.logvar_raw;
    for (std::size_t i = 0; i < st.logvar.size(); ++i) {
        double v = st.logvar.data()[i];
        if (v > kLogVarClamp) v = kLogVarClamp;
        if (v < -kLogVarClamp) v = -kLogVarClamp;
        st.logvar.data()[i] = v;
    }
    st.variance = Matrix(st.logvar.rows(), st.logvar.cols());
    kernels::ops().exp(st.logvar.data(), st.variance.data(), st.logvar.size());
    st.z = Matrix(st.mean.rows(), st.mean.cols());
    kernels::ops().reparam(st.mean.data(), st.variance.data(), noise.data(),
                           st.z.data(), st.z.size());

    const Matrix* g = &st.z;
    for (std::size_t l = 0; l + 1 < model.decoder.size(); ++l) {
        Matrix pre = detail::linear_forward(*g, model.decoder[l]);
        kernels::ops().relu(pre.data(), pre.data(), pre.size());
        st.dec_act.push_back(std::move(pre));
        g = &st.dec_act.back();
    }
    st.p = detail::linear_forward(*g, model.decoder.back());
    kernels::ops().sigmoid(st.p.data(), st.p.data(), st.p.size());

    st.recon = reconstruction_loss(st.p, batch);
    // KL with log variance taken straight from the clamped head output.
    const std::size_t d = st.mean.cols();
    st.kl.resize(st.mean.rows());
    for (std::size_t i = 0; i < st.mean.rows(); ++i) {
        const double* mu = st.mean.row(i);
        const double* v = st.variance.row(i);
        const double* lv = st.logvar.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            acc += mu[j] * mu[j] + v[j] - 1.0 - lv[j];
        st.kl[i] = 0.5 * acc;
    }
    return st;
}

void column_sums(const Matrix& m, std::vector<double>& out) {
    out.assign(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i)
        kernels::ops().add(out.data(), m.row(i), out.data(), m.cols());
}

// dW = x^T delta, db = column sums, dx = delta w^T (skipped when null).
void linear_backward(const Matrix& x, const DenseLayer& layer,
                     const Matrix& delta, DenseLayer& grad, Matrix* dx) {
    const std::size_t in = layer.w.rows(), out = layer.w.cols();
    kernels::ops().gemm_tn(in, out, x.rows(), x.data(), in, delta.data(), out,
                           grad.w.data(), out, 0.0);
    column_sums(delta, grad.b);
    if (dx) {
        *dx = Matrix(delta.rows(), in);
        kernels::ops().gemm_nt(delta.rows(), in, out, delta.data(), out,
                               layer.w.data(), out, dx->data(), in, 0.0);
    }
}

struct Dip2Penalty {
    double value = 0.0;
    std::vector<double> cov;     // d x d, Eq-style batch covariance
    std::vector<double> g;       // d x d, dP/dCov
    Matrix centered;             // batch-centered means
};

Dip2Penalty dip2_penalty(const Matrix& mean, const Matrix& variance,
                         double lambda_od, double lambda_d) {
    const std::size_t b = mean.rows(), d = mean.cols();
    Dip2Penalty pen;
    std::vector<double> mu_bar(d, 0.0), v_bar(d, 0.0);
    for (std::size_t i = 0; i < b; ++i) {
        kernels::ops().add(mu_bar.data(), mean.row(i), mu_bar.data(), d);
        kernels::ops().add(v_bar.data(), variance.row(i), v_bar.data(), d);
    }
    const double inv_b = 1.0 / static_cast<double>(b);
    for (std::size_t j = 0; j < d; ++j) {
        mu_bar[j] *= inv_b;
        v_bar[j] *= inv_b;
    }
    pen.centered = Matrix(b, d);
    for (std::size_t i = 0; i < b; ++i)
        kernels::ops().sub(mean.row(i), mu_bar.data(), pen.centered.row(i), d);

    // Biased (1/b) covariance of the means, plus the mean posterior
    // variance on the diagonal.
    pen.cov.assign(d * d, 0.0);
    kernels::ops().gemm_tn(d, d, b, pen.centered.data(), d,
                           pen.centered.data(), d, pen.cov.data(), d, 0.0);
    for (double& v : pen.cov) v *= inv_b;
    for (std::size_t j = 0; j < d; ++j) pen.cov[j * d + j] += v_bar[j];

    pen.g.assign(d * d, 0.0);
    double off = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double c = pen.cov[i * d + j];
            if (i == j) {
                diag += (c - 1.0) * (c - 1.0);
                pen.g[i * d + j] = 2.0 * lambda_d * (c - 1.0);
            } else {
                off += c * c;
                pen.g[i * d + j] = 2.0 * lambda_od * c;
            }
        }
    }
    pen.value = lambda_od * off + lambda_d * diag;
    return pen;
}

struct BtcTerms {
    double tc = 0.0;
    // Stored for the backward pass.
    std::vector<double> g3;      // b*b*d: log-density of z_i dim j under row k
    std::vector<double> lse_i;   // b
    std::vector<double> lse_ij;  // b*d
};

BtcTerms btc_terms(const Matrix& mean, const Matrix& variance,
                   const Matrix& logvar, const Matrix& z,
                   std::size_t dataset_size) {
    const std::size_t b = mean.rows(), d = mean.cols();
    constexpr double kLog2Pi = 1.8378770664093454836;
    BtcTerms t;
    t.g3.resize(b * b * d);
    for (std::size_t i = 0; i < b; ++i) {
        const double* zi = z.row(i);
        for (std::size_t k = 0; k < b; ++k) {
            const double* mk = mean.row(k);
            const double* vk = variance.row(k);
            const double* lk = logvar.row(k);
            double* g = &t.g3[(i * b + k) * d];
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = zi[j] - mk[j];
                g[j] = -0.5 * (kLog2Pi + lk[j] + diff * diff / vk[j]);
            }
        }
    }
    t.lse_i.resize(b);
    t.lse_ij.assign(b * d, 0.0);
    std::vector<double> a(b);
    for (std::size_t i = 0; i < b; ++i) {
        for (std::size_t k = 0; k < b; ++k)
            a[k] = kernels::ops().sum(&t.g3[(i * b + k) * d], d);
        const double amax = *std::max_element(a.begin(), a.end());
        double acc = 0.0;
        for (std::size_t k = 0; k < b; ++k) acc += std::exp(a[k] - amax);
        t.lse_i[i] = amax + std::log(acc);
        for (std::size_t j = 0; j < d; ++j) {
            double gmax = -HUGE_VAL;
            for (std::size_t k = 0; k < b; ++k)
                gmax = std::max(gmax, t.g3[(i * b + k) * d + j]);
            double gacc = 0.0;
            for (std::size_t k = 0; k < b; ++k)
                gacc += std::exp(t.g3[(i * b + k) * d + j] - gmax);
            t.lse_ij[i * d + j] = gmax + std::log(gacc);
        }
    }
    const double log_nm =
        std::log(static_cast<double>(dataset_size) * static_cast<double>(b));
    double tc = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
        double dims_sum = 0.0;
        for (std::size_t j = 0; j < d; ++j) dims_sum += t.lse_ij[i * d + j];
        tc += t.lse_i[i] - dims_sum;
    }
    t.tc = tc / static_cast<double>(b) +
           (static_cast<double>(d) - 1.0) * log_nm;
    return t;
}

LossParts run(const VaeModel& model, const Matrix& batch,
              const ObjectiveConfig& config, std::size_t step,
              const Matrix& noise, ParamGrads* grads) {
    config.validate();
    if ((config.kind == ObjectiveKind::dip2 ||
         config.kind == ObjectiveKind::btc) &&
        batch.rows() < 2)
        throw DomainError("objective: dip2/btc need batch size >= 2");

    const ForwardState st = forward(model, batch, noise);
    const std::size_t b = batch.rows();
    const std::size_t d = model.arch.latent_dim;
    const double inv_b = 1.0 / static_cast<double>(b);

    const double recon_mean = kernels::ops().sum(st.recon.data(), b) * inv_b;
    const double kl_sum = kernels::ops().sum(st.kl.data(), b);
    const double capacity = config.capacity_at(step);

    double reg = 0.0;
    Dip2Penalty dip;
    BtcTerms btc;
    switch (config.kind) {
        case ObjectiveKind::elbo:
            reg = kl_sum * inv_b;
            break;
        case ObjectiveKind::beta:
            reg = config.beta * (kl_sum * inv_b);
            break;
        case ObjectiveKind::annealed: {
            double acc = 0.0;
            for (std::size_t i = 0; i < b; ++i)
                acc += std::abs(st.kl[i] - capacity);
            reg = config.gamma * (acc * inv_b);
            break;
        }
        case ObjectiveKind::dip2:
            dip = dip2_penalty(st.mean, st.variance, config.lambda_od,
                               config.lambda_d);
            reg = kl_sum * inv_b + dip.value;
            break;
        case ObjectiveKind::btc:
            btc = btc_terms(st.mean, st.variance, st.logvar, st.z,
                            config.dataset_size);
            reg = kl_sum * inv_b + (config.beta - 1.0) * btc.tc;
            break;
    }

    LossParts parts;
    parts.recon = recon_mean;
    parts.reg = reg;
    parts.total = recon_mean + reg;
    parts.capacity = capacity;
    if (!grads) return parts;

    // ---------------- backward ----------------
    // Reconstruction path: d(total)/d(output pre-activation).
    Matrix delta(b, batch.cols());
    for (std::size_t i = 0; i < b; ++i) {
        const double* p = st.p.row(i);
        const double* t = batch.row(i);
        double* dst = delta.row(i);
        for (std::size_t j = 0; j < batch.cols(); ++j) {
            const bool inside = p[j] > kBceEps && p[j] < 1.0 - kBceEps;
            dst[j] = inside ? (p[j] - t[j]) * inv_b : 0.0;
        }
    }

    // Decoder backward.
    const std::size_t n_dec = model.decoder.size();
    Matrix dg;
    {
        const Matrix& last_in =
            n_dec >= 2 ? st.dec_act.back() : st.z;
        linear_backward(last_in, model.decoder.back(), delta,
                        grads->decoder.back(), &dg);
    }
    for (std::size_t l = n_dec - 1; l-- > 0;) {
        Matrix masked(dg.rows(), dg.cols());
        kernels::ops().relu_mask_mul(st.dec_act[l].data(), dg.data(),
                                     masked.data(), dg.size());
        const Matrix& in = l == 0 ? st.z : st.dec_act[l - 1];
        linear_backward(in, model.decoder[l], masked, grads->decoder[l], &dg);
    }
    Matrix dz = std::move(dg);  // b x d

    // Objective-specific direct contributions, accumulated before the
    // reparameterisation backward so every dz path is folded exactly once.
    Matrix dmu_extra(b, d), dlv_extra(b, d);
    if (config.kind == ObjectiveKind::btc) {
        const double s = (config.beta - 1.0) * inv_b;
        for (std::size_t i = 0; i < b; ++i) {
            const double* zi = st.z.row(i);
            double* dz_i = dz.row(i);
            for (std::size_t k = 0; k < b; ++k) {
                const double* mk = st.mean.row(k);
                const double* vk = st.variance.row(k);
                const double* g = &btc.g3[(i * b + k) * d];
                double a_ik = 0.0;
                for (std::size_t j = 0; j < d; ++j) a_ik += g[j];
                const double w_ik = std::exp(a_ik - btc.lse_i[i]);
                double* dmu_k = dmu_extra.row(k);
                double* dlv_k = dlv_extra.row(k);
                for (std::size_t j = 0; j < d; ++j) {
                    const double u_ikj =
                        std::exp(g[j] - btc.lse_ij[i * d + j]);
                    const double coeff = s * (w_ik - u_ikj);
                    const double q = (zi[j] - mk[j]) / vk[j];
                    dz_i[j] += coeff * (-q);
                    dmu_k[j] += coeff * q;
                    dlv_k[j] += coeff * (-0.5) * (1.0 - q * q * vk[j]);
                }
            }
        }
    }

    // Per-example weight of the KL term.
    std::vector<double> kl_w(b, inv_b);
    if (config.kind == ObjectiveKind::beta) {
        for (double& w : kl_w) w *= config.beta;
    } else if (config.kind == ObjectiveKind::annealed) {
        for (std::size_t i = 0; i < b; ++i) {
            const double diff = st.kl[i] - capacity;
            const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
            kl_w[i] = config.gamma * sgn * inv_b;
        }
    }

    Matrix dmu(b, d), dv(b, d), dlv_direct(b, d);
    for (std::size_t i = 0; i < b; ++i) {
        const double* mu = st.mean.row(i);
        const double* v = st.variance.row(i);
        const double* eps = noise.row(i);
        const double* dzr = dz.row(i);
        const double* dmu_x = dmu_extra.row(i);
        const double* dlv_x = dlv_extra.row(i);
        double* dmu_r = dmu.row(i);
        double* dv_r = dv.row(i);
        double* dlv_r = dlv_direct.row(i);
        const double w = kl_w[i];
        for (std::size_t j = 0; j < d; ++j) {
            // reparameterisation: z = mu + eps*sqrt(v)
            dmu_r[j] = dzr[j] + w * mu[j] + dmu_x[j];
            dv_r[j] = dzr[j] * eps[j] / (2.0 * std::sqrt(v[j])) + w * 0.5;
            dlv_r[j] = -0.5 * w + dlv_x[j];
        }
    }

    if (config.kind == ObjectiveKind::dip2) {
        // dP/dmu = (2/b) * centered * G ; dP/dv = diag(G)/b.
        Matrix extra(b, d);
        kernels::ops().gemm_nn(b, d, d, dip.centered.data(), d, dip.g.data(),
                               d, extra.data(), d, 0.0);
        kernels::ops().axpy(2.0 * inv_b, extra.data(), dmu.data(),
                            extra.size());
        for (std::size_t i = 0; i < b; ++i) {
            double* dv_r = dv.row(i);
            for (std::size_t j = 0; j < d; ++j)
                dv_r[j] += dip.g[j * d + j] * inv_b;
        }
    }

    // Chain d/dv into d/dlogvar and apply the clamp mask.
    Matrix dlv(b, d);
    for (std::size_t i = 0; i < b; ++i) {
        const double* v = st.variance.row(i);
        const double* raw = st.logvar_raw.row(i);
        const double* dv_r = dv.row(i);
        const double* dir = dlv_direct.row(i);
        double* out = dlv.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const bool inside =
                raw[j] > -kLogVarClamp && raw[j] < kLogVarClamp;
            out[j] = inside ? dv_r[j] * v[j] + dir[j] : 0.0;
        }
    }

    // Heads and encoder backward.
    const Matrix& h_last =
        model.encoder.empty() ? batch : st.enc_act.back();
    Matrix dh_mean, dh_logvar;
    linear_backward(h_last, model.mean_head, dmu, grads->mean_head, &dh_mean);
    linear_backward(h_last, model.logvar_head, dlv, grads->logvar_head,
                    &dh_logvar);
    Matrix dh(dh_mean.rows(), dh_mean.cols());
    kernels::ops().add(dh_mean.data(), dh_logvar.data(), dh.data(),
                       dh.size());

    for (std::size_t l = model.encoder.size(); l-- > 0;) {
        Matrix masked(dh.rows(), dh.cols());
        kernels::ops().relu_mask_mul(st.enc_act[l].data(), dh.data(),
                                     masked.data(), dh.size());
        const Matrix& in = l == 0 ? batch : st.enc_act[l - 1];
        Matrix next;
        linear_backward(in, model.encoder[l], masked, grads->encoder[l],
                        l > 0 ? &next : nullptr);
        if (l > 0) dh = std::move(next);
    }

    return parts;
}

}  // namespace

LossParts objective_loss(const VaeModel& model, const Matrix& batch,
                         const ObjectiveConfig& config, std::size_t step,
                         const Matrix& noise) {
    return run(model, batch, config, step, noise, nullptr);
}

LossParts gradients(const VaeModel& model, const Matrix& batch,
                    const ObjectiveConfig& config, std::size_t step,
                    const Matrix& noise, ParamGrads& grads) {
    return run(model, batch, config, step, noise, &grads);
}

}  // namespace polaris
