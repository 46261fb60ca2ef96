#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <fstream>

#include "doctest.h"
#include "polaris/rng.hpp"
#include "polaris/vae.hpp"
#include "testutil.hpp"

using namespace polaris;

namespace {

ModelConfig small_arch() {
    ModelConfig arch;
    arch.input_dim = ToyDataset::kPixels;
    arch.hidden = {32};
    arch.latent_dim = 4;
    return arch;
}

TrainOptions smoke_options(std::size_t steps) {
    TrainOptions opt;
    opt.steps = steps;
    opt.batch_size = 32;
    opt.learning_rate = 1e-2;
    opt.seed = 0;
    return opt;
}

}  // namespace

TEST_CASE("zero steps leave the model unchanged") {
    const ToyDataset ds = make_toy_dataset(0, 64);
    const VaeModel model = VaeModel::init(small_arch(), 1);
    const std::vector<double> before = model.flatten_params();
    const TrainResult result = train(model, ds, smoke_options(0));
    const std::vector<double> after = result.model.flatten_params();
    CHECK(std::memcmp(before.data(), after.data(), before.size() * 8) == 0);
    CHECK(result.log.records.empty());
}

TEST_CASE("loss decreases over a short smoke run") {
    const ToyDataset ds = make_toy_dataset(0, 128);
    const VaeModel model = VaeModel::init(small_arch(), 2);
    const TrainResult result = train(model, ds, smoke_options(200));
    REQUIRE(result.log.records.size() == 200);
    double first = 0.0, last = 0.0;
    for (std::size_t i = 0; i < 50; ++i) {
        first += result.log.records[i].total;
        last += result.log.records[150 + i].total;
    }
    CHECK(last / 50.0 < first / 50.0);
    for (const TrainRecord& r : result.log.records) {
        CHECK(std::isfinite(r.total));
        CHECK(r.step >= 1);
    }
}

TEST_CASE("training is bit-reproducible under the seed") {
    const ToyDataset ds = make_toy_dataset(3, 64);
    const VaeModel model = VaeModel::init(small_arch(), 4);
    TrainOptions opt = smoke_options(50);
    opt.seed = 99;
    const TrainResult a = train(model, ds, opt);
    const TrainResult b = train(model, ds, opt);
    const std::vector<double> pa = a.model.flatten_params();
    const std::vector<double> pb = b.model.flatten_params();
    CHECK(std::memcmp(pa.data(), pb.data(), pa.size() * 8) == 0);
    REQUIRE(a.log.records.size() == b.log.records.size());
    for (std::size_t i = 0; i < a.log.records.size(); ++i)
        CHECK(a.log.records[i].total == b.log.records[i].total);
}

TEST_CASE("snapshots land at every multiple of the interval") {
    testutil::TempDir tmp("snaps");
    const ToyDataset ds = make_toy_dataset(0, 64);
    const VaeModel model = VaeModel::init(small_arch(), 5);
    TrainOptions opt = smoke_options(300);
    opt.snapshot_every = 100;
    opt.snapshot_dir = tmp.path();
    const TrainResult result = train(model, ds, opt);
    REQUIRE(result.log.snapshots.size() == 3);
    CHECK(result.log.snapshots[0].filename() == "snap_00000100.vaes");
    CHECK(result.log.snapshots[2].filename() == "snap_00000300.vaes");
    for (const auto& p : result.log.snapshots)
        CHECK(std::filesystem::exists(p));

    const LoadedModel loaded = load_model(result.log.snapshots[1]);
    CHECK(loaded.step == 200);
    CHECK(loaded.model.arch.latent_dim == 4);
}

TEST_CASE("divergence raises with the failing step") {
    const ToyDataset ds = make_toy_dataset(0, 64);
    const VaeModel model = VaeModel::init(small_arch(), 6);
    TrainOptions opt = smoke_options(50);
    opt.learning_rate = 1e6;  // guaranteed blow-up
    CHECK_THROWS_AS(train(model, ds, opt), TrainingDivergedError);
    try {
        train(model, ds, opt);
    } catch (const TrainingDivergedError& e) {
        CHECK(e.step() >= 1);
        CHECK(e.step() <= 50);
    }
}

TEST_CASE("train log csv format") {
    testutil::TempDir tmp("log");
    const ToyDataset ds = make_toy_dataset(0, 64);
    const VaeModel model = VaeModel::init(small_arch(), 7);
    const TrainResult result = train(model, ds, smoke_options(5));
    const auto path = tmp.path() / "trainlog.csv";
    result.log.save_csv(path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "step,total,recon,reg,capacity");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5);
}

TEST_CASE("model snapshot round-trip preserves parameters and config") {
    testutil::TempDir tmp("model");
    const VaeModel model = VaeModel::init(small_arch(), 8);
    ObjectiveConfig objective;
    objective.kind = ObjectiveKind::beta;
    objective.beta = 8.0;
    const auto path = tmp.path() / "model.vaes";
    save_model(model, objective, 1234, path);

    const LoadedModel loaded = load_model(path);
    CHECK(loaded.step == 1234);
    CHECK(loaded.objective.kind == ObjectiveKind::beta);
    CHECK(loaded.objective.beta == 8.0);
    CHECK(loaded.model.seed == 8);
    const std::vector<double> pa = model.flatten_params();
    const std::vector<double> pb = loaded.model.flatten_params();
    REQUIRE(pa.size() == pb.size());
    CHECK(std::memcmp(pa.data(), pb.data(), pa.size() * 8) == 0);

    // magic check
    std::ifstream in(path, std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    CHECK(std::string(magic, 4) == "VAES");
    in.close();

    // corrupted magic is rejected
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("NOPE", 4);
    }
    CHECK_THROWS_AS(load_model(path), ParseError);
}

TEST_CASE("extract_representations") {
    const ToyDataset ds = make_toy_dataset(0, 64);
    const VaeModel model = VaeModel::init(small_arch(), 9);

    SUBCASE("deterministic under seed") {
        const RepresentationSet a = extract_representations(model, ds, 50, 7);
        const RepresentationSet b = extract_representations(model, ds, 50, 7);
        CHECK(std::memcmp(a.sampled().data(), b.sampled().data(),
                          a.sampled().size() * 8) == 0);
    }
    SUBCASE("noise is retained and consistent") {
        const RepresentationSet set =
            extract_representations(model, ds, 30, 1);
        REQUIRE(set.noise().has_value());
        // create() already verified sampled = mean + noise*sqrt(var)
        CHECK(set.examples() == 30);
        CHECK(set.dims() == 4);
    }
    SUBCASE("n equal to dataset size uses each example once") {
        const RepresentationSet set =
            extract_representations(model, ds, 64, 3);
        CHECK(set.examples() == 64);
        // encode the full dataset directly; every row of the extraction
        // must appear among the direct encodings exactly once
        const auto [mean_all, var_all] = encode(model, ds.images);
        std::vector<bool> used(64, false);
        for (std::size_t i = 0; i < 64; ++i) {
            bool found = false;
            for (std::size_t j = 0; j < 64; ++j) {
                if (used[j]) continue;
                if (std::memcmp(set.mean().row(i), mean_all.row(j),
                                4 * sizeof(double)) == 0) {
                    used[j] = true;
                    found = true;
                    break;
                }
            }
            CHECK(found);
        }
    }
    SUBCASE("oversampling with replacement") {
        const RepresentationSet set =
            extract_representations(model, ds, 200, 5);
        CHECK(set.examples() == 200);
    }
}

TEST_CASE("untrained zero-weight model classifies as all passive") {
    const ToyDataset ds = make_toy_dataset(0, 64);
    VaeModel model = VaeModel::init(small_arch(), 10);
    std::vector<double> zeros(model.param_count(), 0.0);
    model.set_params(zeros);
    const RepresentationSet set = extract_representations(model, ds, 64, 0);
    // mu = 0 and sigma = 1 for every input: textbook passive columns
    for (std::size_t j = 0; j < set.dims(); ++j) {
        for (std::size_t i = 0; i < set.examples(); ++i) {
            CHECK(set.mean().at(i, j) == 0.0);
            CHECK(set.variance().at(i, j) == 1.0);
        }
    }
}
