#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "qs/commands.hpp"
#include "qs/selection.hpp"

using nlohmann::json;
using qs::RunConfig;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("qs_cli_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

RunConfig small_config(const std::filesystem::path& out) {
    RunConfig config;
    config.use_synthetic = true;
    config.synthetic.n_samples = 120;
    config.synthetic.n_informative = 3;
    config.synthetic.n_redundant = 4;
    config.synthetic.n_noise = 13;
    config.synthetic.rng_seed = 2;
    config.hidden = {24};
    config.epochs = 3;
    config.k_list = {5, 10};
    config.seeds = {1};
    config.kmeans_repeats = 3;
    config.extra_trees = 10;
    config.output_dir = out.string();
    return config;
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    REQUIRE(in);
    return json::parse(in);
}

}  // namespace

TEST_CASE("run config json round trips every field") {
    RunConfig config;
    config.dataset_path = "some.csv";
    config.csv_has_labels = false;
    config.csv_has_header = true;
    config.label_column = 3;
    config.use_synthetic = true;
    config.synthetic.n_samples = 77;
    config.synthetic.n_clusters_per_class = 3;
    config.synthetic.class_separation = 2.75;
    config.scaling = "minmax";
    config.hidden = {64, 32};
    config.epsilon = 11.0;
    config.zeta = 0.15;
    config.noise_factor = 0.3;
    config.learning_rate = 0.02;
    config.epochs = 42;
    config.snapshot_epoch = 7;
    config.batch_size = 8;
    config.init_scale = 0.05;
    config.hidden_activation = "tanh";
    config.output_activation = "tanh";
    config.k_list = {10, 20};
    config.seeds = {4, 5, 6};
    config.test_fraction = 0.25;
    config.kmeans_repeats = 4;
    config.extra_trees = 13;
    config.n_clusters = 3;
    config.device_watts = 95.0;
    config.full_strength_history = true;
    config.output_dir = "/tmp/somewhere";

    const RunConfig back = qs::run_config_from_json(qs::to_json(config));
    CHECK(qs::to_json(back) == qs::to_json(config));
    CHECK(back.label_column == config.label_column);
    CHECK(back.device_watts == config.device_watts);
    CHECK(back.hidden == config.hidden);
    CHECK(back.seeds == config.seeds);
}

TEST_CASE("missing json fields fall back to defaults") {
    const RunConfig config = qs::run_config_from_json(json::object());
    const RunConfig defaults;
    CHECK(qs::to_json(config) == qs::to_json(defaults));
    CHECK_FALSE(config.device_watts.has_value());
    CHECK_FALSE(config.label_column.has_value());
}

TEST_CASE("output dir resolution prefers the config") {
    RunConfig config;
    config.output_dir = "/tmp/explicit";
    CHECK(qs::resolve_output_dir(config) == "/tmp/explicit");

    config.output_dir.clear();
    setenv("QS_OUTPUT_DIR", "/tmp/from_env", 1);
    CHECK(qs::resolve_output_dir(config) == "/tmp/from_env");
    unsetenv("QS_OUTPUT_DIR");
    CHECK(qs::resolve_output_dir(config) == ".");
}

TEST_CASE("generate writes a loadable dataset with metadata") {
    TempDir tmp;
    RunConfig config = small_config(tmp.path);
    REQUIRE(qs::cmd_generate(config) == qs::kExitOk);

    qs::CsvOptions opts;
    opts.has_labels = true;
    const qs::Dataset data = qs::load_csv(tmp.path / "dataset.csv", opts);
    CHECK(data.n_samples() == 120);
    CHECK(data.n_features() == 20);
    CHECK(data.n_classes() == 2);

    const json meta = load_json(tmp.path / "dataset_meta.json");
    CHECK(meta.at("n_features") == 20);
    CHECK(meta.at("ground_truth").at("informative").size() == 3);
    CHECK(meta.at("ground_truth").at("redundant").size() == 4);
    CHECK(meta.at("ground_truth").at("noise").size() == 13);
}

TEST_CASE("train select eval pipeline produces consistent artifacts") {
    TempDir tmp;
    RunConfig config = small_config(tmp.path);
    REQUIRE(qs::cmd_train(config) == qs::kExitOk);

    const auto checkpoint = tmp.path / "model_seed1.sdae";
    REQUIRE(std::filesystem::exists(checkpoint));
    REQUIRE(std::filesystem::exists(tmp.path / "train_report_seed1.json"));
    REQUIRE(std::filesystem::exists(tmp.path / "summary_seed1.md"));

    const json report = load_json(tmp.path / "train_report_seed1.json");
    CHECK(report.at("epoch_loss").size() == 3);
    CHECK(report.at("evolution_log").size() == 3);
    CHECK(report.contains("timing"));
    CHECK_FALSE(report.at("epoch_loss").empty());

    REQUIRE(qs::cmd_select(checkpoint, {5, 10}, tmp.path) == qs::kExitOk);
    const auto ranking = qs::read_ranking_csv(tmp.path / "ranking.csv");
    CHECK(ranking.order.size() == 20);

    const json k5 = load_json(tmp.path / "selected_k5.json");
    const json k10 = load_json(tmp.path / "selected_k10.json");
    REQUIRE(k5.at("indices").size() == 5);
    REQUIRE(k10.at("indices").size() == 10);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(k5.at("indices")[i] == k10.at("indices")[i]);
    }

    REQUIRE(qs::cmd_eval(config, tmp.path / "selected_k10.json") == qs::kExitOk);
    const json eval = load_json(tmp.path / "eval_report.json");
    CHECK(eval.at("k_selected") == 10);
    CHECK(eval.at("labels_present") == true);
    CHECK(eval.at("clustering_accuracy").at("repeats") == 3);
    CHECK(eval.at("classification_accuracy").is_number());
    CHECK(eval.at("timing").contains("wall_time_seconds"));
}

TEST_CASE("train reports identical non-timing content across reruns") {
    TempDir tmp_a, tmp_b;
    RunConfig config_a = small_config(tmp_a.path);
    RunConfig config_b = small_config(tmp_b.path);
    REQUIRE(qs::cmd_train(config_a) == qs::kExitOk);
    REQUIRE(qs::cmd_train(config_b) == qs::kExitOk);

    json a = load_json(tmp_a.path / "train_report_seed1.json");
    json b = load_json(tmp_b.path / "train_report_seed1.json");
    a.erase("timing");
    b.erase("timing");
    a["config"].erase("output_dir");
    b["config"].erase("output_dir");
    CHECK(a == b);
}

TEST_CASE("eval without labels reports inertia only") {
    TempDir tmp;
    // Write an unlabeled CSV.
    const qs::Dataset data = qs::generate_gaussian_matrix(60, 6, 3);
    qs::save_csv(tmp.path / "plain.csv", data);

    RunConfig config;
    config.dataset_path = (tmp.path / "plain.csv").string();
    config.csv_has_labels = false;
    config.output_dir = tmp.path.string();
    config.n_clusters = 3;
    REQUIRE(qs::cmd_eval(config, std::nullopt) == qs::kExitOk);

    const json eval = load_json(tmp.path / "eval_report.json");
    CHECK(eval.at("labels_present") == false);
    CHECK(eval.at("clustering_accuracy").is_null());
    CHECK(eval.at("classification_accuracy").is_null());
    CHECK(eval.at("kmeans_inertia").is_number());
    CHECK(eval.at("k_selected") == 6);
}

TEST_CASE("grid sweeps every cell and records failures in place") {
    TempDir tmp;
    RunConfig config = small_config(tmp.path);
    config.epochs = 2;
    config.kmeans_repeats = 2;
    config.k_list = {5};
    REQUIRE(qs::cmd_grid(config, {0.1, 0.3}, {5.0}, {0.2}, 2) == qs::kExitOk);

    const json grid = load_json(tmp.path / "grid.json");
    REQUIRE(grid.at("cells").size() == 2);
    for (const auto& cell : grid.at("cells")) {
        CHECK(cell.at("ok") == true);
        CHECK(cell.at("clustering_mean").is_number());
    }
    CHECK(std::filesystem::exists(tmp.path / "grid.csv"));

    CHECK(qs::cmd_grid(config, {}, {5.0}, {0.2}, 1) == qs::kExitUsage);
}

TEST_CASE("bench reports one row per grid point") {
    TempDir tmp;
    RunConfig config;
    config.output_dir = tmp.path.string();
    REQUIRE(qs::cmd_bench(config, {30, 40}, {20}, 1, 50) == qs::kExitOk);

    const json bench = load_json(tmp.path / "bench.json");
    REQUIRE(bench.at("rows").size() == 2);
    for (const auto& row : bench.at("rows")) {
        CHECK(row.at("status") == "ok");
        CHECK(row.at("parameter_count").is_number());
        // Realized parameters near the Erdos-Renyi expectation.
        const double expected = row.at("expected_parameters").get<double>();
        const double actual = row.at("parameter_count").get<double>();
        CHECK(std::abs(actual - expected) / expected < 0.25);
    }
    CHECK(qs::cmd_bench(config, {}, {20}, 1, 50) == qs::kExitUsage);
}
