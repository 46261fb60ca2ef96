#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "polaris/kernels.hpp"
#include "polaris/rng.hpp"
#include "polaris/vae.hpp"

namespace polaris {

namespace {

constexpr char kModelMagic[4] = {'V', 'A', 'E', 'S'};
constexpr std::uint16_t kModelVersion = 1;

DenseLayer make_layer(std::size_t in, std::size_t out, double limit,
                      Rng& rng) {
    DenseLayer layer;
    layer.w = Matrix(in, out);
    for (std::size_t i = 0; i < layer.w.size(); ++i)
        layer.w.data()[i] = rng.uniform(-limit, limit);
    layer.b.assign(out, 0.0);
    return layer;
}

DenseLayer make_relu_layer(std::size_t in, std::size_t out, Rng& rng) {
    return make_layer(in, out, std::sqrt(6.0 / static_cast<double>(in)), rng);
}

DenseLayer make_linear_layer(std::size_t in, std::size_t out, Rng& rng) {
    return make_layer(
        in, out, std::sqrt(6.0 / static_cast<double>(in + out)), rng);
}

void flatten_layer(const DenseLayer& layer, std::vector<double>& out) {
    out.insert(out.end(), layer.w.data(), layer.w.data() + layer.w.size());
    out.insert(out.end(), layer.b.begin(), layer.b.end());
}

std::size_t unflatten_layer(DenseLayer& layer, const std::vector<double>& flat,
                            std::size_t offset) {
    std::memcpy(layer.w.data(), flat.data() + offset,
                layer.w.size() * sizeof(double));
    offset += layer.w.size();
    std::memcpy(layer.b.data(), flat.data() + offset,
                layer.b.size() * sizeof(double));
    return offset + layer.b.size();
}

template <typename Fn>
void for_each_layer(VaeModel& model, Fn&& fn) {
    for (DenseLayer& l : model.encoder) fn(l);
    fn(model.mean_head);
    fn(model.logvar_head);
    for (DenseLayer& l : model.decoder) fn(l);
}

template <typename Fn>
void for_each_layer(const VaeModel& model, Fn&& fn) {
    for (const DenseLayer& l : model.encoder) fn(l);
    fn(model.mean_head);
    fn(model.logvar_head);
    for (const DenseLayer& l : model.decoder) fn(l);
}

}  // namespace

VaeModel VaeModel::init(const ModelConfig& arch, std::uint64_t seed) {
    if (arch.input_dim < 1 || arch.latent_dim < 1)
        throw DomainError("vae: input and latent dims must be >= 1");
    for (std::size_t h : arch.hidden)
        if (h < 1) throw DomainError("vae: hidden width must be >= 1");

    VaeModel model;
    model.arch = arch;
    model.seed = seed;
    Rng rng(derive_seed(seed, 7));

    std::size_t in = arch.input_dim;
    for (std::size_t h : arch.hidden) {
        model.encoder.push_back(make_relu_layer(in, h, rng));
        in = h;
    }
    model.mean_head = make_linear_layer(in, arch.latent_dim, rng);
    model.logvar_head = make_linear_layer(in, arch.latent_dim, rng);

    in = arch.latent_dim;
    for (auto it = arch.hidden.rbegin(); it != arch.hidden.rend(); ++it) {
        model.decoder.push_back(make_relu_layer(in, *it, rng));
        in = *it;
    }
    model.decoder.push_back(make_linear_layer(in, arch.input_dim, rng));
    return model;
}

std::size_t VaeModel::param_count() const {
    std::size_t count = 0;
    for_each_layer(*this, [&](const DenseLayer& l) {
        count += l.w.size() + l.b.size();
    });
    return count;
}

std::vector<double> VaeModel::flatten_params() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    for_each_layer(*this,
                   [&](const DenseLayer& l) { flatten_layer(l, flat); });
    return flat;
}

void VaeModel::set_params(const std::vector<double>& flat) {
    if (flat.size() != param_count())
        throw DimensionError("vae: parameter vector length mismatch");
    std::size_t offset = 0;
    for_each_layer(*this, [&](DenseLayer& l) {
        offset = unflatten_layer(l, flat, offset);
    });
}

ParamGrads ParamGrads::zeros_like(const VaeModel& model) {
    ParamGrads g;
    const auto zero_of = [](const DenseLayer& l) {
        DenseLayer z;
        z.w = Matrix(l.w.rows(), l.w.cols());
        z.b.assign(l.b.size(), 0.0);
        return z;
    };
    for (const DenseLayer& l : model.encoder) g.encoder.push_back(zero_of(l));
    g.mean_head = zero_of(model.mean_head);
    g.logvar_head = zero_of(model.logvar_head);
    for (const DenseLayer& l : model.decoder) g.decoder.push_back(zero_of(l));
    return g;
}

std::vector<double> ParamGrads::flatten() const {
    std::vector<double> flat;
    for (const DenseLayer& l : encoder) flatten_layer(l, flat);
    flatten_layer(mean_head, flat);
    flatten_layer(logvar_head, flat);
    for (const DenseLayer& l : decoder) flatten_layer(l, flat);
    return flat;
}

// ---------------------------------------------------------------------------
// Snapshot I/O
// ---------------------------------------------------------------------------

std::string objective_to_json(const ObjectiveConfig& config) {
    nlohmann::json j;
    j["kind"] = to_string(config.kind);
    j["beta"] = config.beta;
    j["gamma"] = config.gamma;
    j["c_max"] = config.c_max;
    j["anneal_steps"] = config.anneal_steps;
    j["lambda_od"] = config.lambda_od;
    j["lambda_d"] = config.lambda_d;
    j["dataset_size"] = config.dataset_size;
    return j.dump();
}

ObjectiveConfig objective_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("objective json: ") + e.what());
    }
    ObjectiveConfig c;
    c.kind = objective_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("beta")) c.beta = j.at("beta").get<double>();
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
    if (j.contains("c_max")) c.c_max = j.at("c_max").get<double>();
    if (j.contains("anneal_steps"))
        c.anneal_steps = j.at("anneal_steps").get<std::size_t>();
    if (j.contains("lambda_od"))
        c.lambda_od = j.at("lambda_od").get<double>();
    if (j.contains("lambda_d")) c.lambda_d = j.at("lambda_d").get<double>();
    if (j.contains("dataset_size"))
        c.dataset_size = j.at("dataset_size").get<std::size_t>();
    return c;
}

void save_model(const VaeModel& model, const ObjectiveConfig& objective,
                std::size_t step, const std::filesystem::path& path) {
    nlohmann::json header;
    header["arch"] = {{"input", model.arch.input_dim},
                      {"hidden", model.arch.hidden},
                      {"latent", model.arch.latent_dim}};
    header["objective"] = nlohmann::json::parse(objective_to_json(objective));
    header["step"] = step;
    header["seed"] = model.seed;
    const std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(kModelMagic, 4);
    const std::uint16_t version = kModelVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::uint32_t len = static_cast<std::uint32_t>(header_text.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header_text.data(),
              static_cast<std::streamsize>(header_text.size()));
    const std::vector<double> params = model.flatten_params();
    out.write(reinterpret_cast<const char*>(params.data()),
              static_cast<std::streamsize>(params.size() * sizeof(double)));
    if (!out) throw IoError("write failed: " + path.string());
}

LoadedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kModelMagic, 4) != 0)
        throw ParseError("model snapshot: bad magic in " + path.string());
    std::uint16_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != kModelVersion)
        throw ParseError("model snapshot: unsupported version");
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (!in) throw ParseError("model snapshot: truncated header length");
    std::string header_text(len, '\0');
    in.read(header_text.data(), len);
    if (!in) throw ParseError("model snapshot: truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model snapshot header: ") + e.what());
    }

    LoadedModel loaded;
    ModelConfig arch;
    arch.input_dim = header.at("arch").at("input").get<std::size_t>();
    arch.hidden =
        header.at("arch").at("hidden").get<std::vector<std::size_t>>();
    arch.latent_dim = header.at("arch").at("latent").get<std::size_t>();
    const auto seed = header.at("seed").get<std::uint64_t>();
    loaded.model = VaeModel::init(arch, seed);
    loaded.objective = objective_from_json(header.at("objective").dump());
    loaded.step = header.at("step").get<std::size_t>();

    std::vector<double> params(loaded.model.param_count());
    in.read(reinterpret_cast<char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
    if (!in) throw ParseError("model snapshot: truncated payload");
    for (double v : params)
        if (!std::isfinite(v))
            throw ParseError("model snapshot: non-finite parameter");
    loaded.model.set_params(params);
    return loaded;
}

// ---------------------------------------------------------------------------
// Forward passes
// ---------------------------------------------------------------------------

namespace detail {

// y = x * w + b (bias broadcast over rows)
Matrix linear_forward(const Matrix& x, const DenseLayer& layer) {
    const std::size_t m = x.rows();
    const std::size_t n = layer.w.cols();
    Matrix y(m, n);
    kernels::ops().gemm_nn(m, n, x.cols(), x.data(), x.cols(),
                           layer.w.data(), n, y.data(), n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        kernels::ops().add(y.row(i), layer.b.data(), y.row(i), n);
    return y;
}

}  // namespace detail

std::pair<Matrix, Matrix> encode(const VaeModel& model, const Matrix& batch) {
    if (batch.cols() != model.arch.input_dim)
        throw DimensionError("encode: batch has " +
                             std::to_string(batch.cols()) +
                             " columns, model expects " +
                             std::to_string(model.arch.input_dim));
    Matrix h = batch;
    for (const DenseLayer& layer : model.encoder) {
        Matrix pre = detail::linear_forward(h, layer);
        kernels::ops().relu(pre.data(), pre.data(), pre.size());
        h = std::move(pre);
    }
    Matrix mean = detail::linear_forward(h, model.mean_head);
    Matrix logvar = detail::linear_forward(h, model.logvar_head);
    for (std::size_t i = 0; i < logvar.size(); ++i) {
        double v = logvar.data()[i];
        if (v > kLogVarClamp) v = kLogVarClamp;
        if (v < -kLogVarClamp) v = -kLogVarClamp;
        logvar.data()[i] = v;
    }
    Matrix variance(logvar.rows(), logvar.cols());
    kernels::ops().exp(logvar.data(), variance.data(), logvar.size());
    return {std::move(mean), std::move(variance)};
}

Matrix decode(const VaeModel& model, const Matrix& z) {
    if (z.cols() != model.arch.latent_dim)
        throw DimensionError("decode: latent dimension mismatch");
    Matrix g = z;
    for (std::size_t l = 0; l + 1 < model.decoder.size(); ++l) {
        Matrix pre = detail::linear_forward(g, model.decoder[l]);
        kernels::ops().relu(pre.data(), pre.data(), pre.size());
        g = std::move(pre);
    }
    Matrix out = detail::linear_forward(g, model.decoder.back());
    kernels::ops().sigmoid(out.data(), out.data(), out.size());
    return out;
}

}  // namespace polaris
