#include <cstring>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qs/commands.hpp"

namespace {

// Options shared by every subcommand that consumes a RunConfig. The config
// file (if any) is loaded before parsing, so flags override file values.
void add_config_options(CLI::App* cmd, qs::RunConfig& config,
                        std::string& config_path, double& watts) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--data", config.dataset_path, "input CSV path");
    cmd->add_flag("--synthetic", config.use_synthetic,
                  "use the built-in synthetic generator");
    cmd->add_flag("--no-labels{false}", config.csv_has_labels,
                  "treat the CSV as unlabeled");
    cmd->add_flag("--header", config.csv_has_header, "skip a CSV header row");
    cmd->add_option("--scaling", config.scaling, "zscore or minmax");
    cmd->add_option("--hidden", config.hidden, "hidden layer widths");
    cmd->add_option("--epsilon", config.epsilon, "sparsity control");
    cmd->add_option("--zeta", config.zeta, "evolution fraction");
    cmd->add_option("--noise-factor", config.noise_factor,
                    "input corruption scale");
    cmd->add_option("--lr", config.learning_rate, "SGD learning rate");
    cmd->add_option("--epochs", config.epochs, "training epochs");
    cmd->add_option("--snapshot-epoch", config.snapshot_epoch,
                    "extra strength snapshot epoch");
    cmd->add_option("--batch-size", config.batch_size, "minibatch size");
    cmd->add_option("--init-scale", config.init_scale,
                    "initial weight std dev");
    cmd->add_option("--hidden-activation", config.hidden_activation,
                    "sigmoid, tanh or linear");
    cmd->add_option("--output-activation", config.output_activation,
                    "sigmoid, tanh or linear");
    cmd->add_option("--k", config.k_list, "feature counts to select");
    cmd->add_option("--seeds", config.seeds, "RNG seeds");
    cmd->add_option("--test-fraction", config.test_fraction,
                    "held-out fraction");
    cmd->add_option("--kmeans-repeats", config.kmeans_repeats,
                    "K-means restarts for the accuracy mean");
    cmd->add_option("--trees", config.extra_trees, "trees in the classifier");
    cmd->add_option("--clusters", config.n_clusters,
                    "cluster count (0: label cardinality)");
    cmd->add_option("--watts", watts,
                    "device power draw for the energy estimate");
    cmd->add_flag("--full-strength-history", config.full_strength_history,
                  "keep every per-epoch strength snapshot in the report");
    cmd->add_option("--out", config.output_dir, "output directory");
    cmd->add_flag_callback("--qs10", [&config] { config.epochs = 10; },
                           "short schedule: train for 10 epochs");

    // Synthetic generator knobs.
    cmd->add_option("--samples", config.synthetic.n_samples,
                    "synthetic sample count");
    cmd->add_option("--informative", config.synthetic.n_informative,
                    "synthetic informative features");
    cmd->add_option("--redundant", config.synthetic.n_redundant,
                    "synthetic redundant features");
    cmd->add_option("--noise-features", config.synthetic.n_noise,
                    "synthetic noise features");
    cmd->add_option("--classes", config.synthetic.n_classes,
                    "synthetic class count");
    cmd->add_option("--clusters-per-class",
                    config.synthetic.n_clusters_per_class,
                    "synthetic hypercube clusters per class");
    cmd->add_option("--separation", config.synthetic.class_separation,
                    "synthetic class separation");
    cmd->add_option("--data-seed", config.synthetic.rng_seed,
                    "synthetic generator seed");
}

}  // namespace

int main(int argc, char** argv) {
    // Pre-scan for --config so file values act as defaults under the flags.
    qs::RunConfig config;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::strcmp(argv[i], "--config") == 0) {
            try {
                config = qs::load_run_config(argv[i + 1]);
            } catch (const std::exception& e) {
                std::cerr << "error: cannot load config " << argv[i + 1] << ": "
                          << e.what() << "\n";
                return qs::kExitUsage;
            }
            break;
        }
    }

    CLI::App app{"quickselect: sparse autoencoder feature selection"};
    app.require_subcommand(1);

    std::string config_path;
    double watts = -1.0;

    CLI::App* generate = app.add_subcommand(
        "generate", "write a synthetic labeled dataset as CSV");
    add_config_options(generate, config, config_path, watts);

    CLI::App* train = app.add_subcommand(
        "train", "train sparse denoising autoencoders, one per seed");
    add_config_options(train, config, config_path, watts);

    CLI::App* select = app.add_subcommand(
        "select", "rank features from a saved checkpoint");
    std::string checkpoint_path;
    std::vector<std::size_t> select_k = {50};
    std::string select_out = ".";
    select->add_option("--checkpoint", checkpoint_path, "model checkpoint")
        ->required();
    select->add_option("--k", select_k, "feature counts to export");
    select->add_option("--out", select_out, "output directory");

    CLI::App* eval = app.add_subcommand(
        "eval", "clustering and classification metrics on selected features");
    add_config_options(eval, config, config_path, watts);
    std::string selected_path;
    eval->add_option("--selected", selected_path,
                     "JSON file with the selected feature indices");

    CLI::App* grid = app.add_subcommand(
        "grid", "hyperparameter sweep over zeta, epsilon and noise factor");
    add_config_options(grid, config, config_path, watts);
    std::vector<double> zeta_list = {0.1, 0.2, 0.3};
    std::vector<double> epsilon_list = {10, 13, 20};
    std::vector<double> nf_list = {0.1, 0.2};
    std::size_t workers = 0;
    grid->add_option("--zeta-grid", zeta_list, "zeta values");
    grid->add_option("--epsilon-grid", epsilon_list, "epsilon values");
    grid->add_option("--nf-grid", nf_list, "noise factor values");
    grid->add_option("--workers", workers, "parallel cells (0: hardware)");

    CLI::App* bench = app.add_subcommand(
        "bench", "scaling benchmark over feature and hidden sizes");
    add_config_options(bench, config, config_path, watts);
    std::vector<std::size_t> bench_features = {500, 1000, 2000};
    std::vector<std::size_t> bench_hidden = {1000};
    std::size_t bench_epochs = 5;
    std::size_t bench_samples = 5000;
    bench->add_option("--features-grid", bench_features, "input widths");
    bench->add_option("--hidden-grid", bench_hidden, "hidden widths");
    bench->add_option("--bench-epochs", bench_epochs, "epochs per cell");
    bench->add_option("--bench-samples", bench_samples,
                      "rows per generated matrix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return qs::kExitUsage;
    }

    if (watts >= 0.0) config.device_watts = watts;

    try {
        if (generate->parsed()) return qs::cmd_generate(config);
        if (train->parsed()) return qs::cmd_train(config);
        if (select->parsed()) {
            return qs::cmd_select(checkpoint_path, select_k, select_out);
        }
        if (eval->parsed()) {
            std::optional<std::filesystem::path> selected;
            if (!selected_path.empty()) selected = selected_path;
            return qs::cmd_eval(config, selected);
        }
        if (grid->parsed()) {
            return qs::cmd_grid(config, zeta_list, epsilon_list, nf_list,
                                workers);
        }
        if (bench->parsed()) {
            return qs::cmd_bench(config, bench_features, bench_hidden,
                                 bench_epochs, bench_samples);
        }
        return qs::kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qs::kExitUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qs::kExitUsage;
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        const bool numeric = what.find("non-finite") != std::string::npos ||
                             what.find("diverged") != std::string::npos;
        std::cerr << (numeric ? "numeric failure: " : "data error: ") << what
                  << "\n";
        return numeric ? qs::kExitNumericFailure : qs::kExitDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return qs::kExitDataError;
    }
}
