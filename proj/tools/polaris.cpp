// polaris: train desk-scale VAEs, classify latent dimensions into
// active/passive/mixed variables, and measure how passive variables distort
// total correlation, averaged mutual information and effective rank between
// mean and sampled representations.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "polaris/classifier.hpp"
#include "polaris/dynamics.hpp"
#include "polaris/manifest.hpp"
#include "polaris/metrics.hpp"
#include "polaris/probe.hpp"
#include "polaris/synth.hpp"
#include "polaris/toy_dataset.hpp"
#include "polaris/vae.hpp"

namespace fs = std::filesystem;
using namespace polaris;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("POLARIS_SEED")) {
        std::uint64_t v = 0;
        const auto [ptr, ec] =
            std::from_chars(env, env + std::string(env).size(), v);
        if (ec == std::errc() && *ptr == '\0') return v;
        std::cerr << "warning: ignoring non-numeric POLARIS_SEED\n";
    }
    return 0;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<std::string> collect_args(int argc, char** argv) {
    return std::vector<std::string>(argv, argv + argc);
}

RepresentationSet load_set(const fs::path& dir) {
    const Matrix mean = load_matrix(dir / "mean.bin", MatrixFormat::binary);
    const Matrix variance =
        load_matrix(dir / "variance.bin", MatrixFormat::binary);
    const Matrix sampled =
        load_matrix(dir / "sampled.bin", MatrixFormat::binary);
    std::optional<Matrix> noise;
    if (fs::exists(dir / "noise.bin"))
        noise = load_matrix(dir / "noise.bin", MatrixFormat::binary);
    return RepresentationSet::create(mean, variance, sampled, std::move(noise));
}

std::vector<int> load_labels(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("labels: empty file " + path.string());
    std::vector<int> labels;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        int v = 0;
        const auto [ptr, ec] =
            std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc() || ptr != line.data() + line.size())
            throw ParseError("labels: bad value at row " + std::to_string(row));
        labels.push_back(v);
        ++row;
    }
    if (labels.empty()) throw ParseError("labels: no rows");
    return labels;
}

void save_labels(const fs::path& path, const std::vector<int>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "label\n";
    for (int l : labels) out << l << '\n';
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string spec_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

int run_synth(const SynthArgs& args, const std::vector<std::string>& argv) {
    SynthSpec spec = SynthSpec::from_json(read_text(args.spec_path));
    if (args.seed) spec.seed = *args.seed;

    const SynthOutput output = generate(spec);
    const fs::path out(args.out_dir);
    fs::create_directories(out);

    save_matrix(output.set.mean(), out / "mean.bin", MatrixFormat::binary);
    save_matrix(output.set.variance(), out / "variance.bin",
                MatrixFormat::binary);
    save_matrix(output.set.sampled(), out / "sampled.bin",
                MatrixFormat::binary);
    save_matrix(*output.set.noise(), out / "noise.bin", MatrixFormat::binary);

    nlohmann::json meta;
    meta["format_version"] = kFormatVersion;
    meta["seed"] = output.seed;
    meta["n_examples"] = output.set.examples();
    meta["mixture_sampling"] = "iid-bernoulli-per-example";
    meta["planted_types"] = nlohmann::json::array();
    for (VariableType t : output.planted_types)
        meta["planted_types"].push_back(to_string(t));
    nlohmann::json mixture_c = nlohmann::json::object();
    nlohmann::json activity = nlohmann::json::object();
    for (std::size_t j = 0; j < spec.dims.size(); ++j) {
        if (const auto* m = std::get_if<MixedPlan>(&spec.dims[j])) {
            mixture_c[std::to_string(j)] = m->c;
            nlohmann::json flags = nlohmann::json::array();
            for (bool a : output.per_example_activity[j])
                flags.push_back(a ? 1 : 0);
            activity[std::to_string(j)] = std::move(flags);
        }
    }
    meta["mixture_c"] = mixture_c;
    meta["per_example_activity"] = activity;
    write_text(out / "meta.json", meta.dump(2) + "\n");

    if (output.labels) save_labels(out / "labels.csv", *output.labels);

    RunManifest manifest("synth", argv);
    manifest.add_parameter("seed", static_cast<std::uint64_t>(spec.seed));
    manifest.add_parameter("spec", args.spec_path);
    manifest.add_input(args.spec_path);
    for (const char* name :
         {"mean.bin", "variance.bin", "sampled.bin", "noise.bin", "meta.json"})
        manifest.add_output(out / name);
    if (output.labels) manifest.add_output(out / "labels.csv");
    manifest.save(out / "manifest.json");
    std::cout << "synth: wrote " << output.set.examples() << " examples x "
              << output.set.dims() << " dims to " << out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string objective = "elbo";
    double beta = 1.0;
    double gamma = 1.0;
    double c_max = 0.0;
    std::size_t anneal_steps = 1;
    double lambda_od = 0.0;
    double lambda_d = 0.0;
    std::size_t steps = 1000;
    std::size_t batch_size = 64;
    double lr = 1e-3;
    std::size_t snapshot_every = 0;
    std::optional<std::size_t> subsample;
    std::vector<std::size_t> hidden = {256, 256};
    std::size_t latent = 10;
    std::uint64_t seed = 0;
    std::string out_dir;
};

int run_train(const TrainArgs& args, const std::vector<std::string>& argv) {
    ObjectiveConfig objective;
    objective.kind = objective_kind_from_string(args.objective);
    objective.beta = args.beta;
    objective.gamma = args.gamma;
    objective.c_max = args.c_max;
    objective.anneal_steps = args.anneal_steps;
    objective.lambda_od = args.lambda_od;
    objective.lambda_d = args.lambda_d;
    objective.validate();

    const ToyDataset dataset = make_toy_dataset(args.seed, args.subsample);
    objective.dataset_size = dataset.size();

    ModelConfig arch;
    arch.hidden = args.hidden;
    arch.latent_dim = args.latent;
    VaeModel model = VaeModel::init(arch, args.seed);

    const fs::path out(args.out_dir);
    fs::create_directories(out);

    TrainOptions options;
    options.objective = objective;
    options.steps = args.steps;
    options.batch_size = std::min(args.batch_size, dataset.size());
    options.learning_rate = args.lr;
    options.snapshot_every = args.snapshot_every;
    options.seed = args.seed;
    if (args.snapshot_every > 0) options.snapshot_dir = out / "snapshots";

    RunManifest manifest("train", argv);
    manifest.add_parameter("objective", args.objective);
    manifest.add_parameter("beta", args.beta);
    manifest.add_parameter("gamma", args.gamma);
    manifest.add_parameter("c_max", args.c_max);
    manifest.add_parameter("anneal_steps",
                           static_cast<std::uint64_t>(args.anneal_steps));
    manifest.add_parameter("lambda_od", args.lambda_od);
    manifest.add_parameter("lambda_d", args.lambda_d);
    manifest.add_parameter("steps", static_cast<std::uint64_t>(args.steps));
    manifest.add_parameter("batch_size",
                           static_cast<std::uint64_t>(options.batch_size));
    manifest.add_parameter("lr", args.lr);
    manifest.add_parameter("seed", args.seed);
    manifest.add_parameter("snapshot_every",
                           static_cast<std::uint64_t>(args.snapshot_every));

    try {
        TrainResult result = train(std::move(model), dataset, options);
        save_model(result.model, objective, args.steps, out / "model.vaes");
        result.log.save_csv(out / "trainlog.csv");
        manifest.add_output(out / "model.vaes");
        manifest.add_output(out / "trainlog.csv");
        for (const fs::path& snap : result.log.snapshots)
            manifest.add_output(snap);
        manifest.save(out / "manifest.json");
        std::cout << "train: " << args.steps << " steps, final loss "
                  << (result.log.records.empty()
                          ? 0.0
                          : result.log.records.back().total)
                  << ", " << result.log.snapshots.size() << " snapshots\n";
        return 0;
    } catch (const TrainingDivergedError& e) {
        manifest.add_parameter("failed_step",
                               static_cast<std::uint64_t>(e.step()));
        manifest.save(out / "manifest.json");
        throw;
    }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    std::string set_dir;
    std::string model_path;
    std::size_t n_examples = 10000;
    double alpha = 0.1;
    std::size_t bins = kDefaultMiBins;
    std::vector<std::string> kinds = {"mean", "sampled"};
    std::vector<std::string> subsets = {"full",          "active",
                                        "mixed",         "passive",
                                        "active+mixed",  "active+passive",
                                        "mixed+passive"};
    std::uint64_t seed = 0;
    std::string out_dir;
};

int run_analyze(const AnalyzeArgs& args, const std::vector<std::string>& argv) {
    std::optional<RepresentationSet> set;
    std::string source;
    if (!args.set_dir.empty()) {
        set = load_set(args.set_dir);
        source = args.set_dir;
    } else {
        const LoadedModel loaded = load_model(args.model_path);
        const ToyDataset dataset = make_toy_dataset(loaded.model.seed);
        set = extract_representations(loaded.model, dataset, args.n_examples,
                                      args.seed);
        source = args.model_path;
    }

    ClassifierConfig classifier_config;
    classifier_config.alpha = args.alpha;
    const VariableAssignment assignment =
        classify_variables(set->variance(), classifier_config);
    const AssignmentCounts counts = summarise_assignment(assignment);

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    write_text(out / "assignment.json", assignment.to_json() + "\n");

    nlohmann::json report;
    report["format_version"] = kFormatVersion;
    report["source"] = source;
    report["alpha"] = args.alpha;
    report["bins"] = args.bins;
    report["assignment"] = nlohmann::json::parse(assignment.to_json());
    report["reports"] = nlohmann::json::array();
    report["skipped"] = nlohmann::json::array();

    std::ofstream metrics_csv(out / "metrics.csv", std::ios::binary);
    metrics_csv << "kind,subset,tc_nats,mi_avg_nats,erank,n_examples,dims,"
                   "bins,n_passive\n";
    const auto csv_cell = [](const std::optional<double>& v) {
        return v ? nlohmann::json(*v).dump() : std::string();
    };

    std::size_t produced = 0;
    for (const std::string& kind_name : args.kinds) {
        const RepresentationKind kind =
            representation_kind_from_string(kind_name);
        for (const std::string& subset : args.subsets) {
            try {
                const MetricReport r = metric_report(
                    *set, assignment, kind, subset_from_label(subset),
                    args.bins);
                report["reports"].push_back(
                    nlohmann::json::parse(r.to_json()));
                metrics_csv << kind_name << ',' << subset << ','
                            << csv_cell(r.tc_nats) << ','
                            << csv_cell(r.mi_avg_nats) << ','
                            << csv_cell(r.erank) << ',' << r.n_examples << ','
                            << r.dims << ',' << r.bins << ','
                            << counts.n_passive << '\n';
                ++produced;
            } catch (const EmptySubsetError& e) {
                report["skipped"].push_back({{"kind", kind_name},
                                             {"subset", subset},
                                             {"reason", e.what()}});
            }
        }
    }
    metrics_csv.close();
    write_text(out / "report.json", report.dump(2) + "\n");

    std::ofstream counts_csv(out / "counts.csv", std::ios::binary);
    counts_csv << "source,n_active,n_mixed,n_passive\n";
    counts_csv << source << ',' << counts.n_active << ',' << counts.n_mixed
               << ',' << counts.n_passive << '\n';
    counts_csv.close();

    RunManifest manifest("analyze", argv);
    manifest.add_parameter("alpha", args.alpha);
    manifest.add_parameter("bins", static_cast<std::uint64_t>(args.bins));
    manifest.add_parameter("seed", args.seed);
    manifest.add_parameter("source", source);
    if (!args.set_dir.empty())
        for (const char* name : {"mean.bin", "variance.bin", "sampled.bin"})
            manifest.add_input(fs::path(args.set_dir) / name);
    else
        manifest.add_input(args.model_path);
    for (const char* name :
         {"assignment.json", "report.json", "metrics.csv", "counts.csv"})
        manifest.add_output(out / name);
    manifest.save(out / "manifest.json");

    if (produced == 0) {
        std::cerr << "analyze: every requested subset was empty\n";
        return kExitUsage;
    }
    std::cout << "analyze: " << produced << " reports ("
              << counts.n_active << " active, " << counts.n_mixed
              << " mixed, " << counts.n_passive << " passive)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// probe
// ---------------------------------------------------------------------------

struct ProbeArgs {
    std::string set_dir;
    std::string labels_path;
    std::string assignment_path;
    double alpha = 0.1;
    std::vector<std::string> kinds = {"mean", "sampled"};
    std::size_t folds = 5;
    std::size_t max_iterations = 2000;
    double reg_strength = 0.0;  // label for the output CSV
    std::uint64_t seed = 0;
    std::string out_dir;
};

int run_probe(const ProbeArgs& args, const std::vector<std::string>& argv) {
    const RepresentationSet set = load_set(args.set_dir);
    const std::vector<int> labels = load_labels(args.labels_path);
    if (labels.size() != set.examples())
        throw DimensionError("probe: " + std::to_string(labels.size()) +
                             " labels for " + std::to_string(set.examples()) +
                             " examples");

    VariableAssignment assignment;
    if (!args.assignment_path.empty()) {
        assignment =
            VariableAssignment::from_json(read_text(args.assignment_path));
    } else {
        ClassifierConfig config;
        config.alpha = args.alpha;
        assignment = classify_variables(set.variance(), config);
    }

    ProbeConfig config;
    config.folds = args.folds;
    config.max_iterations = args.max_iterations;
    config.seed = args.seed;

    const fs::path out(args.out_dir);
    fs::create_directories(out);

    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["baseline"] = random_baseline(labels);
    j["kinds"] = nlohmann::json::object();

    for (const std::string& kind_name : args.kinds) {
        const RepresentationKind kind =
            representation_kind_from_string(kind_name);
        const std::vector<SubsetProbeOutcome> outcomes =
            probe_all_subsets(set, assignment, kind, labels, config);

        nlohmann::json arr = nlohmann::json::array();
        std::ofstream csv(out / ("probe_" + kind_name + ".csv"),
                          std::ios::binary);
        csv << "subset,regularisation_strength_of_vae,accuracy,baseline\n";
        for (const SubsetProbeOutcome& o : outcomes) {
            nlohmann::json item;
            item["subset"] = o.subset_label;
            if (o.result) {
                item["accuracy"] = o.result->mean_accuracy;
                item["fold_accuracies"] = o.result->fold_accuracies;
                item["chosen_l2"] = o.result->chosen_l2;
                item["baseline"] = o.result->random_baseline;
                item["iterations"] = o.result->iterations;
                csv << o.subset_label << ',' << args.reg_strength << ','
                    << o.result->mean_accuracy << ','
                    << o.result->random_baseline << '\n';
            } else {
                item["skipped"] = o.skip_reason;
            }
            arr.push_back(std::move(item));
        }
        j["kinds"][kind_name] = std::move(arr);
    }
    write_text(out / "probe.json", j.dump(2) + "\n");

    RunManifest manifest("probe", argv);
    manifest.add_parameter("seed", args.seed);
    manifest.add_parameter("folds", static_cast<std::uint64_t>(args.folds));
    manifest.add_parameter("reg_strength", args.reg_strength);
    for (const char* name : {"mean.bin", "variance.bin", "sampled.bin"})
        manifest.add_input(fs::path(args.set_dir) / name);
    manifest.add_input(args.labels_path);
    manifest.add_output(out / "probe.json");
    for (const std::string& kind_name : args.kinds)
        manifest.add_output(out / ("probe_" + kind_name + ".csv"));
    manifest.save(out / "manifest.json");
    std::cout << "probe: wrote results to " << out.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// track
// ---------------------------------------------------------------------------

struct TrackArgs {
    std::string snapshot_dir;
    double threshold = 0.2;
    std::size_t n_examples = ToyDataset::kFullSize;
    std::uint64_t eval_seed = 0;
    std::string out_dir;
};

int run_track(const TrackArgs& args, const std::vector<std::string>& argv) {
    std::vector<fs::path> files;
    if (fs::exists(args.snapshot_dir))
        for (const auto& entry : fs::directory_iterator(args.snapshot_dir))
            if (entry.path().extension() == ".vaes")
                files.push_back(entry.path());
    if (files.size() < 2)
        throw DomainError("track: need at least 2 snapshots, found " +
                          std::to_string(files.size()));
    std::sort(files.begin(), files.end());

    SnapshotSeries series;
    std::optional<ToyDataset> dataset;
    for (const fs::path& file : files) {
        const LoadedModel loaded = load_model(file);
        if (!dataset) dataset = make_toy_dataset(loaded.model.seed);
        // Fixed evaluation batch and fixed noise: the same eval seed across
        // snapshots, so the series reflects parameter changes only.
        series.entries.push_back(
            {loaded.step, extract_representations(loaded.model, *dataset,
                                                  args.n_examples,
                                                  args.eval_seed)});
    }
    std::sort(series.entries.begin(), series.entries.end(),
              [](const SnapshotEntry& a, const SnapshotEntry& b) {
                  return a.step < b.step;
              });

    const CorrelationSeries corr = correlation_series(series, args.threshold);
    const std::vector<std::size_t> counts =
        count_exceedances(corr, args.threshold);

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    corr.save_csv(out / "correlations.csv");

    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["threshold"] = args.threshold;
    j["n_snapshots"] = corr.matrices.size();
    j["exceedance_counts"] = counts;
    write_text(out / "exceedance.json", j.dump(2) + "\n");

    RunManifest manifest("track", argv);
    manifest.add_parameter("threshold", args.threshold);
    manifest.add_parameter("eval_seed", args.eval_seed);
    manifest.add_parameter("n_examples",
                           static_cast<std::uint64_t>(args.n_examples));
    for (const fs::path& file : files) manifest.add_input(file);
    manifest.add_output(out / "correlations.csv");
    manifest.add_output(out / "exceedance.json");
    manifest.save(out / "manifest.json");
    std::cout << "track: " << corr.matrices.size() << " snapshots, "
              << corr.dims() << " dims\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"polaris: passive-variable analysis of VAE representations"};
    app.require_subcommand(1);
    const std::uint64_t env_seed = default_seed();

    SynthArgs synth_args;
    std::uint64_t synth_seed_flag = env_seed;
    auto* synth_cmd =
        app.add_subcommand("synth", "generate an oracle representation set");
    synth_cmd->add_option("--spec", synth_args.spec_path, "synth spec JSON")
        ->required()
        ->check(CLI::ExistingFile);
    synth_cmd->add_option("--out", synth_args.out_dir, "output directory")
        ->required();
    auto* synth_seed_opt =
        synth_cmd->add_option("--seed", synth_seed_flag, "seed override");

    TrainArgs train_args;
    train_args.seed = env_seed;
    auto* train_cmd =
        app.add_subcommand("train", "train a VAE on the toy dataset");
    train_cmd
        ->add_option("--objective", train_args.objective,
                     "elbo|beta|annealed|dip2|btc")
        ->check(CLI::IsMember({"elbo", "beta", "annealed", "dip2", "btc"}));
    train_cmd->add_option("--beta", train_args.beta, "beta weight (>= 1)");
    train_cmd->add_option("--gamma", train_args.gamma, "annealed gamma");
    train_cmd->add_option("--c-max", train_args.c_max, "annealed capacity");
    train_cmd->add_option("--anneal-steps", train_args.anneal_steps,
                          "steps to reach c_max");
    train_cmd->add_option("--lambda-od", train_args.lambda_od,
                          "dip2 off-diagonal weight");
    train_cmd->add_option("--lambda-d", train_args.lambda_d,
                          "dip2 diagonal weight");
    train_cmd->add_option("--steps", train_args.steps, "training steps");
    train_cmd->add_option("--batch-size", train_args.batch_size, "batch size");
    train_cmd->add_option("--lr", train_args.lr, "learning rate");
    train_cmd->add_option("--snapshot-every", train_args.snapshot_every,
                          "snapshot interval (0 = off)");
    train_cmd->add_option("--subsample", train_args.subsample,
                          "use only this many factor combinations");
    train_cmd->add_option("--hidden", train_args.hidden,
                          "hidden layer widths");
    train_cmd->add_option("--latent", train_args.latent, "latent dimension");
    train_cmd->add_option("--seed", train_args.seed, "seed");
    train_cmd->add_option("--out", train_args.out_dir, "output directory")
        ->required();

    AnalyzeArgs analyze_args;
    analyze_args.seed = env_seed;
    auto* analyze_cmd = app.add_subcommand(
        "analyze", "classify variables and compute metric reports");
    auto* set_opt = analyze_cmd->add_option(
        "--set", analyze_args.set_dir, "directory with mean/variance/sampled");
    auto* model_opt = analyze_cmd->add_option(
        "--model", analyze_args.model_path, "model snapshot to evaluate");
    set_opt->excludes(model_opt);
    analyze_cmd->add_option("--n-examples", analyze_args.n_examples,
                            "examples to extract when --model is given");
    analyze_cmd->add_option("--alpha", analyze_args.alpha,
                            "classifier tolerance");
    analyze_cmd->add_option("--bins", analyze_args.bins, "MI histogram bins");
    analyze_cmd
        ->add_option("--kind", analyze_args.kinds, "representation kinds")
        ->check(CLI::IsMember({"mean", "sampled"}));
    analyze_cmd
        ->add_option("--subset", analyze_args.subsets, "variable subsets")
        ->check(CLI::IsMember({"full", "active", "mixed", "passive",
                               "active+mixed", "active+passive",
                               "mixed+passive"}));
    analyze_cmd->add_option("--seed", analyze_args.seed, "extraction seed");
    analyze_cmd->add_option("--out", analyze_args.out_dir, "output directory")
        ->required();

    ProbeArgs probe_args;
    probe_args.seed = env_seed;
    auto* probe_cmd = app.add_subcommand(
        "probe", "logistic-regression probe over variable subsets");
    probe_cmd
        ->add_option("--set", probe_args.set_dir,
                     "directory with mean/variance/sampled")
        ->required();
    probe_cmd->add_option("--labels", probe_args.labels_path, "labels CSV")
        ->required()
        ->check(CLI::ExistingFile);
    probe_cmd->add_option("--assignment", probe_args.assignment_path,
                          "assignment JSON (classified from variance when "
                          "omitted)");
    probe_cmd->add_option("--alpha", probe_args.alpha,
                          "classifier tolerance when classifying here");
    probe_cmd->add_option("--kind", probe_args.kinds, "representation kinds")
        ->check(CLI::IsMember({"mean", "sampled"}));
    probe_cmd->add_option("--folds", probe_args.folds, "cross-validation folds");
    probe_cmd->add_option("--max-iters", probe_args.max_iterations,
                          "gradient-descent iteration cap");
    probe_cmd->add_option("--reg-strength", probe_args.reg_strength,
                          "VAE regularisation label for the CSV");
    probe_cmd->add_option("--seed", probe_args.seed, "seed");
    probe_cmd->add_option("--out", probe_args.out_dir, "output directory")
        ->required();

    TrackArgs track_args;
    track_args.eval_seed = env_seed;
    auto* track_cmd = app.add_subcommand(
        "track", "correlation dynamics over training snapshots");
    track_cmd
        ->add_option("--snapshots", track_args.snapshot_dir,
                     "directory of .vaes snapshots")
        ->required();
    track_cmd->add_option("--threshold", track_args.threshold,
                          "exceedance threshold");
    track_cmd->add_option("--n-examples", track_args.n_examples,
                          "evaluation batch size");
    track_cmd->add_option("--eval-seed", track_args.eval_seed,
                          "evaluation batch/noise seed");
    track_cmd->add_option("--out", track_args.out_dir, "output directory")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    const std::vector<std::string> argv_copy = collect_args(argc, argv);
    try {
        if (synth_cmd->parsed()) {
            if (synth_seed_opt->count() > 0 ||
                std::getenv("POLARIS_SEED") != nullptr)
                synth_args.seed = synth_seed_flag;
            return run_synth(synth_args, argv_copy);
        }
        if (train_cmd->parsed()) return run_train(train_args, argv_copy);
        if (analyze_cmd->parsed()) {
            if (analyze_args.set_dir.empty() &&
                analyze_args.model_path.empty())
                throw DomainError("analyze: give --set or --model");
            return run_analyze(analyze_args, argv_copy);
        }
        if (probe_cmd->parsed()) return run_probe(probe_args, argv_copy);
        if (track_cmd->parsed()) return run_track(track_args, argv_copy);
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
