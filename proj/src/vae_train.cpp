#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "polaris/kernels.hpp"
#include "polaris/rng.hpp"
#include "polaris/vae.hpp"

namespace polaris {

namespace {

void sgd_step(DenseLayer& param, const DenseLayer& grad, double lr) {
    kernels::ops().axpy(-lr, grad.w.data(), param.w.data(), param.w.size());
    kernels::ops().axpy(-lr, grad.b.data(), param.b.data(), param.b.size());
}

void write_double(std::ofstream& out, double v) {
    char buf[64];
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    out.write(buf, res.ptr - buf);
}

}  // namespace

void TrainLog::save_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "step,total,recon,reg,capacity\n";
    for (const TrainRecord& r : records) {
        out << r.step << ',';
        write_double(out, r.total);
        out << ',';
        write_double(out, r.recon);
        out << ',';
        write_double(out, r.reg);
        out << ',';
        write_double(out, r.capacity);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

TrainResult train(VaeModel model, const ToyDataset& dataset,
                  const TrainOptions& options) {
    options.objective.validate();
    if (options.batch_size < 1 || options.batch_size > dataset.size())
        throw DomainError("train: batch_size must be in [1, dataset size]");
    if (options.snapshot_dir && options.snapshot_every > 0)
        std::filesystem::create_directories(*options.snapshot_dir);

    Rng batch_rng(derive_seed(options.seed, 101));
    Rng noise_rng(derive_seed(options.seed, 102));

    TrainLog log;
    log.records.reserve(options.steps);
    ParamGrads grads = ParamGrads::zeros_like(model);
    Matrix batch(options.batch_size, dataset.images.cols());
    Matrix noise(options.batch_size, model.arch.latent_dim);

    for (std::size_t step = 1; step <= options.steps; ++step) {
        for (std::size_t i = 0; i < options.batch_size; ++i) {
            const auto idx =
                static_cast<std::size_t>(batch_rng.below(dataset.size()));
            std::copy_n(dataset.images.row(idx), dataset.images.cols(),
                        batch.row(i));
        }
        for (std::size_t i = 0; i < noise.size(); ++i)
            noise.data()[i] = noise_rng.normal();

        const LossParts parts =
            gradients(model, batch, options.objective, step, noise, grads);
        if (!std::isfinite(parts.total))
            throw TrainingDivergedError(
                "train: non-finite loss at step " + std::to_string(step),
                step);

        for (std::size_t l = 0; l < model.encoder.size(); ++l)
            sgd_step(model.encoder[l], grads.encoder[l],
                     options.learning_rate);
        sgd_step(model.mean_head, grads.mean_head, options.learning_rate);
        sgd_step(model.logvar_head, grads.logvar_head, options.learning_rate);
        for (std::size_t l = 0; l < model.decoder.size(); ++l)
            sgd_step(model.decoder[l], grads.decoder[l],
                     options.learning_rate);

        log.records.push_back(
            {step, parts.total, parts.recon, parts.reg, parts.capacity});

        if (options.snapshot_every > 0 && step % options.snapshot_every == 0 &&
            options.snapshot_dir) {
            char name[32];
            std::snprintf(name, sizeof(name), "snap_%08zu.vaes", step);
            const std::filesystem::path path = *options.snapshot_dir / name;
            save_model(model, options.objective, step, path);
            log.snapshots.push_back(path);
        }
    }
    return TrainResult{std::move(model), std::move(log)};
}

RepresentationSet extract_representations(const VaeModel& model,
                                          const ToyDataset& dataset,
                                          std::size_t n_examples,
                                          std::uint64_t seed) {
    if (n_examples < 1)
        throw DomainError("extract: n_examples must be >= 1");

    Rng pick_rng(derive_seed(seed, 201));
    std::vector<std::size_t> indices(n_examples);
    if (n_examples <= dataset.size()) {
        // without replacement: seeded partial shuffle
        std::vector<std::size_t> pool(dataset.size());
        std::iota(pool.begin(), pool.end(), 0);
        for (std::size_t i = 0; i < n_examples; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(pick_rng.below(pool.size() - i));
            std::swap(pool[i], pool[j]);
            indices[i] = pool[i];
        }
    } else {
        for (std::size_t i = 0; i < n_examples; ++i)
            indices[i] =
                static_cast<std::size_t>(pick_rng.below(dataset.size()));
    }

    Matrix inputs(n_examples, dataset.images.cols());
    for (std::size_t i = 0; i < n_examples; ++i)
        std::copy_n(dataset.images.row(indices[i]), dataset.images.cols(),
                    inputs.row(i));

    auto [mean, variance] = encode(model, inputs);

    // One noise vector per output row from a per-row substream, so the
    // draw for a row does not depend on how the batch was sharded.
    Matrix noise(n_examples, model.arch.latent_dim);
    for (std::size_t i = 0; i < n_examples; ++i) {
        Rng row_rng(derive_seed(seed ^ 0xabcd1234ULL, 1000 + i));
        for (std::size_t j = 0; j < noise.cols(); ++j)
            noise.at(i, j) = row_rng.normal();
    }

    Matrix sampled = reparameterise(mean, variance, noise);
    return RepresentationSet::create(std::move(mean), std::move(variance),
                                     std::move(sampled), std::move(noise));
}

}  // namespace polaris
