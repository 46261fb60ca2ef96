#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "polaris/matrix.hpp"
#include "polaris/representation.hpp"
#include "polaris/toy_dataset.hpp"

namespace polaris {

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct DenseLayer {
    Matrix w;               // in x out
    std::vector<double> b;  // out
};

struct ModelConfig {
    std::size_t input_dim = ToyDataset::kPixels;
    std::vector<std::size_t> hidden = {256, 256};  // encoder; decoder mirrors
    std::size_t latent_dim = 10;
};

// Dense encoder (ReLU hiddens, linear mean and log-variance heads) and a
// mirrored decoder ending in a sigmoid over pixels. The log-variance head
// output is clamped to [-10, 10] before exponentiation.
struct VaeModel {
    ModelConfig arch;
    std::vector<DenseLayer> encoder;
    DenseLayer mean_head;
    DenseLayer logvar_head;
    std::vector<DenseLayer> decoder;  // hidden... + final output layer
    std::uint64_t seed = 0;

    static VaeModel init(const ModelConfig& arch, std::uint64_t seed);

    std::size_t param_count() const;
    std::vector<double> flatten_params() const;
    void set_params(const std::vector<double>& flat);
};

constexpr double kLogVarClamp = 10.0;

// (mean, variance) of the posterior for each batch row.
std::pair<Matrix, Matrix> encode(const VaeModel& model, const Matrix& batch);
// Sigmoid pixel activations for each latent row.
Matrix decode(const VaeModel& model, const Matrix& z);

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

enum class ObjectiveKind { elbo, beta, annealed, dip2, btc };

std::string to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(const std::string& s);

struct ObjectiveConfig {
    ObjectiveKind kind = ObjectiveKind::elbo;
    double beta = 1.0;                // beta, btc
    double gamma = 1.0;               // annealed
    double c_max = 0.0;               // annealed
    std::size_t anneal_steps = 1;     // annealed
    double lambda_od = 0.0;           // dip2
    double lambda_d = 0.0;            // dip2
    std::size_t dataset_size = ToyDataset::kFullSize;  // btc estimator's n

    void validate() const;
    double capacity_at(std::size_t step) const;
};

// Per-example KL(q(z|x) || N(0, I)) for diagonal Gaussian posteriors.
std::vector<double> gaussian_kl(const Matrix& mean, const Matrix& variance);

// Per-example negative Bernoulli log-likelihood, summed over pixels, with
// the decoded values clamped to [1e-7, 1 - 1e-7].
std::vector<double> reconstruction_loss(const Matrix& decoded,
                                        const Matrix& batch);

struct LossParts {
    double total = 0.0;
    double recon = 0.0;     // batch-mean reconstruction term
    double reg = 0.0;       // total - recon
    double capacity = 0.0;  // annealed C(step), 0 otherwise
};

// Gradient storage mirroring the model's parameter layout.
struct ParamGrads {
    std::vector<DenseLayer> encoder;
    DenseLayer mean_head;
    DenseLayer logvar_head;
    std::vector<DenseLayer> decoder;

    static ParamGrads zeros_like(const VaeModel& model);
    std::vector<double> flatten() const;
};

LossParts objective_loss(const VaeModel& model, const Matrix& batch,
                         const ObjectiveConfig& config, std::size_t step,
                         const Matrix& noise);

// Exact reverse-mode gradients of objective_loss with the noise held fixed.
LossParts gradients(const VaeModel& model, const Matrix& batch,
                    const ObjectiveConfig& config, std::size_t step,
                    const Matrix& noise, ParamGrads& grads);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainOptions {
    ObjectiveConfig objective;
    std::size_t steps = 1000;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    std::size_t snapshot_every = 0;  // 0 disables snapshots
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> snapshot_dir;
};

struct TrainRecord {
    std::size_t step;
    double total, recon, reg, capacity;
};

struct TrainLog {
    std::vector<TrainRecord> records;
    std::vector<std::filesystem::path> snapshots;

    // CSV with header step,total,recon,reg,capacity
    void save_csv(const std::filesystem::path& path) const;
};

struct TrainResult {
    VaeModel model;
    TrainLog log;
};

// Plain SGD with a fixed learning rate; bit-reproducible under
// (seed, config, dataset). Throws TrainingDivergedError when the loss
// stops being finite.
TrainResult train(VaeModel model, const ToyDataset& dataset,
                  const TrainOptions& options);

// Encodes n_examples dataset rows (sampled without replacement when
// n_examples <= dataset size, with replacement otherwise) and draws one
// seeded noise vector per output row from a per-row substream.
RepresentationSet extract_representations(const VaeModel& model,
                                          const ToyDataset& dataset,
                                          std::size_t n_examples,
                                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Snapshots: magic "VAES", u16 version, u32 header length, JSON header
// (architecture, objective, step, seed), raw little-endian doubles in
// declared layer order.
// ---------------------------------------------------------------------------

void save_model(const VaeModel& model, const ObjectiveConfig& objective,
                std::size_t step, const std::filesystem::path& path);

struct LoadedModel {
    VaeModel model;
    ObjectiveConfig objective;
    std::size_t step = 0;
};

LoadedModel load_model(const std::filesystem::path& path);

std::string objective_to_json(const ObjectiveConfig& config);
ObjectiveConfig objective_from_json(const std::string& text);

}  // namespace polaris
