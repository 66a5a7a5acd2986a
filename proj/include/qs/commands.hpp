#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qs/data.hpp"
#include "qs/sparse_dae.hpp"

namespace qs {

// Stable exit-code contract for scripting.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitDataError = 2,
    kExitNumericFailure = 3,
};

struct RunConfig {
    // Data source: a CSV path, or the synthetic generator when use_synthetic.
    std::string dataset_path;
    bool csv_has_labels = true;
    bool csv_has_header = false;
    std::optional<std::size_t> label_column;
    bool use_synthetic = false;
    SyntheticSpec synthetic;

    std::string scaling = "zscore";
    std::vector<std::size_t> hidden = {1000};
    double epsilon = 13.0;
    double zeta = 0.2;
    double noise_factor = 0.2;
    double learning_rate = 0.01;
    std::size_t epochs = 100;
    std::size_t snapshot_epoch = 10;
    std::size_t batch_size = 32;
    double init_scale = 0.1;
    std::string hidden_activation = "sigmoid";
    std::string output_activation = "linear";

    std::vector<std::size_t> k_list = {50};
    std::vector<std::uint64_t> seeds = {0};
    double test_fraction = 0.2;
    std::size_t kmeans_repeats = 10;
    std::size_t extra_trees = 50;
    std::size_t n_clusters = 0;  // 0: use the label cardinality
    std::optional<double> device_watts;
    bool full_strength_history = false;
    std::string output_dir;  // empty: $QS_OUTPUT_DIR or "."
};

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

std::filesystem::path resolve_output_dir(const RunConfig& config);

// Loads or generates the configured dataset (no preprocessing applied).
Dataset load_configured_dataset(const RunConfig& config,
                                SyntheticGroundTruth* ground_truth = nullptr);

int cmd_generate(const RunConfig& config);
int cmd_train(const RunConfig& config);
int cmd_select(const std::filesystem::path& checkpoint,
               const std::vector<std::size_t>& k_list,
               const std::filesystem::path& output_dir);
int cmd_eval(const RunConfig& config,
             const std::optional<std::filesystem::path>& selected_indices);
int cmd_grid(const RunConfig& config, const std::vector<double>& zeta_list,
             const std::vector<double>& epsilon_list,
             const std::vector<double>& nf_list, std::size_t n_workers = 0);
int cmd_bench(const RunConfig& config,
              const std::vector<std::size_t>& n_features_list,
              const std::vector<std::size_t>& hidden_list, std::size_t epochs,
              std::size_t n_samples = 5000);

// Shared by cmd_train and the grid/bench paths: builds the model per config
// and trains it on the (already preprocessed) dataset.
SparseDae build_configured_model(const RunConfig& config, std::size_t n_features,
                                 std::uint64_t seed);

// JSON report helpers. All nondeterministic values (timestamps, wall times,
// memory) live under the top-level "timing" object so reports are otherwise
// byte-reproducible for a fixed config and seed.
nlohmann::json train_report_to_json(const TrainReport& report,
                                    const RunConfig& config,
                                    std::uint64_t seed);

}  // namespace qs
