#include "qs/commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include "qs/checkpoint.hpp"
#include "qs/eval.hpp"
#include "qs/extra_trees.hpp"
#include "qs/kmeans.hpp"
#include "qs/resource_probe.hpp"
#include "qs/selection.hpp"

namespace qs {

namespace {

using nlohmann::json;

std::string iso_timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return json::parse(in);
}

}  // namespace

json to_json(const RunConfig& c) {
    json j;
    j["dataset_path"] = c.dataset_path;
    j["csv_has_labels"] = c.csv_has_labels;
    j["csv_has_header"] = c.csv_has_header;
    if (c.label_column) j["label_column"] = *c.label_column;
    else j["label_column"] = nullptr;
    j["use_synthetic"] = c.use_synthetic;
    j["synthetic"] = {
        {"n_samples", c.synthetic.n_samples},
        {"n_informative", c.synthetic.n_informative},
        {"n_redundant", c.synthetic.n_redundant},
        {"n_noise", c.synthetic.n_noise},
        {"n_classes", c.synthetic.n_classes},
        {"n_clusters_per_class", c.synthetic.n_clusters_per_class},
        {"class_separation", c.synthetic.class_separation},
        {"rng_seed", c.synthetic.rng_seed},
    };
    j["scaling"] = c.scaling;
    j["hidden"] = c.hidden;
    j["epsilon"] = c.epsilon;
    j["zeta"] = c.zeta;
    j["noise_factor"] = c.noise_factor;
    j["learning_rate"] = c.learning_rate;
    j["epochs"] = c.epochs;
    j["snapshot_epoch"] = c.snapshot_epoch;
    j["batch_size"] = c.batch_size;
    j["init_scale"] = c.init_scale;
    j["hidden_activation"] = c.hidden_activation;
    j["output_activation"] = c.output_activation;
    j["k_list"] = c.k_list;
    j["seeds"] = c.seeds;
    j["test_fraction"] = c.test_fraction;
    j["kmeans_repeats"] = c.kmeans_repeats;
    j["extra_trees"] = c.extra_trees;
    j["n_clusters"] = c.n_clusters;
    if (c.device_watts) j["device_watts"] = *c.device_watts;
    else j["device_watts"] = nullptr;
    j["full_strength_history"] = c.full_strength_history;
    j["output_dir"] = c.output_dir;
    return j;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    c.dataset_path = j.value("dataset_path", c.dataset_path);
    c.csv_has_labels = j.value("csv_has_labels", c.csv_has_labels);
    c.csv_has_header = j.value("csv_has_header", c.csv_has_header);
    if (j.contains("label_column") && !j["label_column"].is_null()) {
        c.label_column = j["label_column"].get<std::size_t>();
    }
    c.use_synthetic = j.value("use_synthetic", c.use_synthetic);
    if (j.contains("synthetic")) {
        const json& s = j["synthetic"];
        c.synthetic.n_samples = s.value("n_samples", c.synthetic.n_samples);
        c.synthetic.n_informative = s.value("n_informative", c.synthetic.n_informative);
        c.synthetic.n_redundant = s.value("n_redundant", c.synthetic.n_redundant);
        c.synthetic.n_noise = s.value("n_noise", c.synthetic.n_noise);
        c.synthetic.n_classes = s.value("n_classes", c.synthetic.n_classes);
        c.synthetic.n_clusters_per_class =
            s.value("n_clusters_per_class", c.synthetic.n_clusters_per_class);
        c.synthetic.class_separation =
            s.value("class_separation", c.synthetic.class_separation);
        c.synthetic.rng_seed = s.value("rng_seed", c.synthetic.rng_seed);
    }
    c.scaling = j.value("scaling", c.scaling);
    c.hidden = j.value("hidden", c.hidden);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.zeta = j.value("zeta", c.zeta);
    c.noise_factor = j.value("noise_factor", c.noise_factor);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.snapshot_epoch = j.value("snapshot_epoch", c.snapshot_epoch);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.init_scale = j.value("init_scale", c.init_scale);
    c.hidden_activation = j.value("hidden_activation", c.hidden_activation);
    c.output_activation = j.value("output_activation", c.output_activation);
    c.k_list = j.value("k_list", c.k_list);
    c.seeds = j.value("seeds", c.seeds);
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.kmeans_repeats = j.value("kmeans_repeats", c.kmeans_repeats);
    c.extra_trees = j.value("extra_trees", c.extra_trees);
    c.n_clusters = j.value("n_clusters", c.n_clusters);
    if (j.contains("device_watts") && !j["device_watts"].is_null()) {
        c.device_watts = j["device_watts"].get<double>();
    }
    c.full_strength_history = j.value("full_strength_history", c.full_strength_history);
    c.output_dir = j.value("output_dir", c.output_dir);
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return run_config_from_json(load_json(path));
}

std::filesystem::path resolve_output_dir(const RunConfig& config) {
    if (!config.output_dir.empty()) return config.output_dir;
    if (const char* env = std::getenv("QS_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

Dataset load_configured_dataset(const RunConfig& config,
                                SyntheticGroundTruth* ground_truth) {
    if (config.use_synthetic) {
        return generate_madelon_like(config.synthetic, ground_truth);
    }
    if (config.dataset_path.empty()) {
        throw std::invalid_argument("no dataset: set dataset_path or use_synthetic");
    }
    CsvOptions opts;
    opts.has_labels = config.csv_has_labels;
    opts.has_header = config.csv_has_header;
    opts.label_column = config.label_column;
    return load_csv(config.dataset_path, opts);
}

SparseDae build_configured_model(const RunConfig& config, std::size_t n_features,
                                 std::uint64_t seed) {
    DaeHyperparams hp;
    hp.learning_rate = config.learning_rate;
    hp.zeta = config.zeta;
    hp.epsilon = config.epsilon;
    hp.noise_factor = config.noise_factor;
    hp.epochs = config.epochs;
    hp.batch_size = config.batch_size;
    hp.rng_seed = seed;
    hp.init_scale = config.init_scale;
    return SparseDae::build(n_features, config.hidden,
                            activation_from_string(config.hidden_activation),
                            activation_from_string(config.output_activation), hp);
}

namespace {

json strength_snapshots_json(const TrainReport& report, const RunConfig& config) {
    json snapshots = json::array();
    const auto& history = report.strength_history.snapshots;
    const std::size_t last_epoch = history.empty() ? 0 : history.back().first;
    for (const auto& [epoch, strengths] : history) {
        const bool keep = config.full_strength_history || epoch == 0 ||
                          epoch == config.snapshot_epoch || epoch == last_epoch;
        if (!keep) continue;
        snapshots.push_back({{"epoch", epoch}, {"strengths", strengths}});
    }
    return snapshots;
}

json evolution_log_json(const TrainReport& report) {
    json log = json::array();
    for (const auto& epoch_entry : report.evolution_log) {
        json layers = json::array();
        for (const auto& le : epoch_entry.layers) {
            layers.push_back({{"removed", le.removed},
                              {"added", le.added},
                              {"density", le.density},
                              {"overlap_with_previous", le.overlap_with_previous},
                              {"collisions", le.collisions}});
        }
        log.push_back({{"epoch", epoch_entry.epoch}, {"layers", layers}});
    }
    return log;
}

}  // namespace

json train_report_to_json(const TrainReport& report, const RunConfig& config,
                          std::uint64_t seed) {
    json j;
    j["seed"] = seed;
    j["config"] = to_json(config);
    j["epoch_loss"] = report.epoch_loss;
    j["parameter_count"] = report.parameter_count;
    j["strength_snapshots"] = strength_snapshots_json(report, config);
    j["evolution_log"] = evolution_log_json(report);
    j["timing"] = {
        {"timestamp", iso_timestamp()},
        {"epoch_seconds", report.epoch_seconds},
        {"total_seconds", report.total_seconds},
        {"peak_memory_bytes", report.peak_memory_bytes},
    };
    return j;
}

int cmd_generate(const RunConfig& config) {
    const auto out_dir = resolve_output_dir(config);
    std::filesystem::create_directories(out_dir);

    SyntheticGroundTruth gt;
    RunConfig effective = config;
    effective.use_synthetic = true;
    Dataset data = load_configured_dataset(effective, &gt);
    save_csv(out_dir / "dataset.csv", data);

    std::map<int, std::size_t> class_counts;
    for (int y : data.labels()) class_counts[y]++;
    json counts = json::object();
    for (const auto& [label, count] : class_counts) {
        counts[std::to_string(label)] = count;
    }
    json meta = {
        {"n_samples", data.n_samples()},
        {"n_features", data.n_features()},
        {"class_counts", counts},
        {"scaling", config.scaling},
        {"ground_truth",
         {{"informative", gt.informative},
          {"redundant", gt.redundant},
          {"noise", gt.noise}}},
        {"config", to_json(effective)},
    };
    write_json(out_dir / "dataset_meta.json", meta);
    std::cout << "wrote " << (out_dir / "dataset.csv").string() << " ("
              << data.n_samples() << " x " << data.n_features() << ")\n";
    return kExitOk;
}

int cmd_train(const RunConfig& config) {
    const auto out_dir = resolve_output_dir(config);
    std::filesystem::create_directories(out_dir);
    write_json(out_dir / "config.json", to_json(config));

    Dataset full = load_configured_dataset(config);

    for (std::uint64_t seed : config.seeds) {
        auto [train_split, test_split] =
            train_test_split(full, config.test_fraction, seed);
        ScalerState scaler =
            fit_transform(train_split, scaling_from_string(config.scaling));
        apply_scaler(test_split, scaler);

        SparseDae model =
            build_configured_model(config, full.n_features(), seed);
        TrainReport report = model.train(train_split);

        const std::string tag = "seed" + std::to_string(seed);
        save_checkpoint(out_dir / ("model_" + tag + ".sdae"), model);
        write_json(out_dir / ("train_report_" + tag + ".json"),
                   train_report_to_json(report, config, seed));

        std::ostringstream md;
        md << "# Training run (" << tag << ")\n\n"
           << "| field | value |\n|---|---|\n"
           << "| features | " << full.n_features() << " |\n"
           << "| train samples | " << train_split.n_samples() << " |\n"
           << "| epochs | " << config.epochs << " |\n"
           << "| parameters | " << report.parameter_count << " |\n"
           << "| first epoch loss | " << report.epoch_loss.front() << " |\n"
           << "| final epoch loss | " << report.epoch_loss.back() << " |\n"
           << "| wall time (s) | " << report.total_seconds << " |\n"
           << "| peak memory (bytes) | " << report.peak_memory_bytes << " |\n";
        write_text(out_dir / ("summary_" + tag + ".md"), md.str());

        std::cout << "trained " << tag << ": final loss "
                  << report.epoch_loss.back() << ", " << report.parameter_count
                  << " parameters, " << report.total_seconds << " s\n";
    }
    return kExitOk;
}

int cmd_select(const std::filesystem::path& checkpoint,
               const std::vector<std::size_t>& k_list,
               const std::filesystem::path& output_dir) {
    if (k_list.empty()) {
        std::cerr << "select: at least one k required\n";
        return kExitUsage;
    }
    std::filesystem::create_directories(output_dir);
    const SparseDae model = load_checkpoint(checkpoint);
    const FeatureRanking ranking = rank_all(model);

    write_ranking_csv(output_dir / "ranking.csv", ranking);
    for (std::size_t k : k_list) {
        const auto selected = select_top_k(ranking, k);
        write_json(output_dir / ("selected_k" + std::to_string(k) + ".json"),
                   json{{"k", k}, {"indices", selected}});
    }
    std::cout << "ranked " << ranking.order.size() << " features from "
              << checkpoint.string() << "\n";
    return kExitOk;
}

namespace {

std::vector<std::size_t> all_feature_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (std::size_t j = 0; j < n; ++j) idx[j] = j;
    return idx;
}

}  // namespace

int cmd_eval(const RunConfig& config,
             const std::optional<std::filesystem::path>& selected_indices) {
    const auto out_dir = resolve_output_dir(config);
    std::filesystem::create_directories(out_dir);

    Dataset full = load_configured_dataset(config);

    std::vector<std::size_t> indices;
    if (selected_indices) {
        const json sel = load_json(*selected_indices);
        indices = sel.at("indices").get<std::vector<std::size_t>>();
        for (std::size_t j : indices) {
            if (j >= full.n_features()) {
                std::cerr << "eval: selected index " << j << " out of range\n";
                return kExitDataError;
            }
        }
    } else {
        indices = all_feature_indices(full.n_features());
    }

    const std::uint64_t seed = config.seeds.empty() ? 0 : config.seeds.front();
    const auto t0 = std::chrono::steady_clock::now();

    auto [train_split, test_split] =
        train_test_split(full, config.test_fraction, seed);
    ScalerState scaler =
        fit_transform(train_split, scaling_from_string(config.scaling));
    apply_scaler(test_split, scaler);
    Dataset scaled_full = full;
    apply_scaler(scaled_full, scaler);

    Dataset selected_full = scaled_full.select_features(indices);
    Dataset selected_train = train_split.select_features(indices);
    Dataset selected_test = test_split.select_features(indices);

    EvalReport report;
    report.k_selected = indices.size();
    report.rng_seed = seed;

    const bool labeled = full.has_labels();
    std::optional<double> kmeans_inertia;
    if (labeled) {
        const std::size_t n_clusters =
            config.n_clusters > 0 ? config.n_clusters : full.n_classes();
        report.clustering = clustering_accuracy_repeated(
            selected_full, n_clusters, config.kmeans_repeats, seed);
        report.classification_accuracy = extra_trees_fit_predict(
            selected_train, selected_test, config.extra_trees, seed);
    } else {
        const std::size_t n_clusters = config.n_clusters > 0 ? config.n_clusters : 2;
        const auto result = kmeans(selected_full, n_clusters,
                                   seed * 0x9e3779b97f4a7c15ull + 1);
        kmeans_inertia = result.inertia;
    }

    const auto t1 = std::chrono::steady_clock::now();
    report.wall_time_seconds = std::chrono::duration<double>(t1 - t0).count();
    report.peak_memory_bytes = peak_resident_bytes();
    if (config.device_watts) {
        report.estimated_energy_kwh =
            estimate_energy_kwh(report.wall_time_seconds, *config.device_watts);
    }

    json j;
    j["k_selected"] = report.k_selected;
    j["seed"] = report.rng_seed;
    j["labels_present"] = labeled;
    if (labeled) {
        j["clustering_accuracy"] = {{"mean", report.clustering.mean},
                                    {"std", report.clustering.std_dev},
                                    {"repeats", report.clustering.repeats}};
        j["classification_accuracy"] = *report.classification_accuracy;
    } else {
        j["clustering_accuracy"] = nullptr;
        j["classification_accuracy"] = nullptr;
        j["kmeans_inertia"] = *kmeans_inertia;
    }
    j["config"] = to_json(config);
    j["timing"] = {
        {"timestamp", iso_timestamp()},
        {"wall_time_seconds", report.wall_time_seconds},
        {"peak_memory_bytes", report.peak_memory_bytes},
    };
    if (report.estimated_energy_kwh) {
        j["timing"]["estimated_energy_kwh"] = *report.estimated_energy_kwh;
    }
    write_json(out_dir / "eval_report.json", j);

    std::cout << "eval: k=" << report.k_selected;
    if (labeled) {
        std::cout << " clustering " << report.clustering.mean << "% classification "
                  << *report.classification_accuracy << "%";
    }
    std::cout << "\n";
    return kExitOk;
}

namespace {

struct GridCell {
    double zeta;
    double epsilon;
    double nf;
    bool ok = false;
    std::string error;
    double clustering_mean = 0.0;
    double clustering_std = 0.0;
    double classification_mean = 0.0;
    double classification_std = 0.0;
};

GridCell run_grid_cell(RunConfig config, double zeta, double epsilon, double nf) {
    GridCell cell{zeta, epsilon, nf};
    try {
        config.zeta = zeta;
        config.epsilon = epsilon;
        config.noise_factor = nf;
        const std::size_t k =
            config.k_list.empty() ? 50 : config.k_list.front();

        std::vector<double> clustering, classification;
        for (std::uint64_t seed : config.seeds) {
            Dataset full = load_configured_dataset(config);
            auto [train_split, test_split] =
                train_test_split(full, config.test_fraction, seed);
            ScalerState scaler =
                fit_transform(train_split, scaling_from_string(config.scaling));
            apply_scaler(test_split, scaler);

            SparseDae model =
                build_configured_model(config, full.n_features(), seed);
            model.train(train_split);

            const FeatureRanking ranking = rank_all(model);
            const auto selected = select_top_k(ranking, k);

            Dataset scaled_full = full;
            apply_scaler(scaled_full, scaler);
            Dataset sel_full = scaled_full.select_features(selected);
            const std::size_t n_clusters =
                config.n_clusters > 0 ? config.n_clusters : full.n_classes();
            clustering.push_back(
                clustering_accuracy_repeated(sel_full, n_clusters,
                                             config.kmeans_repeats, seed)
                    .mean);
            classification.push_back(extra_trees_fit_predict(
                train_split.select_features(selected),
                test_split.select_features(selected), config.extra_trees, seed));
        }

        auto mean_std = [](const std::vector<double>& v) {
            double mean = 0.0;
            for (double x : v) mean += x;
            mean /= static_cast<double>(v.size());
            double var = 0.0;
            for (double x : v) var += (x - mean) * (x - mean);
            return std::pair<double, double>(
                mean, std::sqrt(var / static_cast<double>(v.size())));
        };
        std::tie(cell.clustering_mean, cell.clustering_std) = mean_std(clustering);
        std::tie(cell.classification_mean, cell.classification_std) =
            mean_std(classification);
        cell.ok = true;
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    return cell;
}

}  // namespace

int cmd_grid(const RunConfig& config, const std::vector<double>& zeta_list,
             const std::vector<double>& epsilon_list,
             const std::vector<double>& nf_list, std::size_t n_workers) {
    if (zeta_list.empty() || epsilon_list.empty() || nf_list.empty()) {
        std::cerr << "grid: all grids must be non-empty\n";
        return kExitUsage;
    }
    const auto out_dir = resolve_output_dir(config);
    std::filesystem::create_directories(out_dir);
    write_json(out_dir / "config.json", to_json(config));

    struct CellSpec { double zeta, epsilon, nf; };
    std::vector<CellSpec> specs;
    for (double z : zeta_list)
        for (double e : epsilon_list)
            for (double nf : nf_list) specs.push_back({z, e, nf});

    if (n_workers == 0) {
        n_workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
    std::vector<GridCell> cells(specs.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < std::min(n_workers, specs.size()); ++w) {
        workers.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= specs.size()) break;
                cells[i] = run_grid_cell(config, specs[i].zeta, specs[i].epsilon,
                                         specs[i].nf);
            }
        });
    }
    for (auto& t : workers) t.join();

    json rows = json::array();
    std::ostringstream csv;
    csv << "zeta,epsilon,noise_factor,clustering_mean,clustering_std,"
           "classification_mean,classification_std,status\n";
    csv.precision(17);
    for (const GridCell& cell : cells) {
        rows.push_back({{"zeta", cell.zeta},
                        {"epsilon", cell.epsilon},
                        {"noise_factor", cell.nf},
                        {"ok", cell.ok},
                        {"error", cell.error},
                        {"clustering_mean", cell.clustering_mean},
                        {"clustering_std", cell.clustering_std},
                        {"classification_mean", cell.classification_mean},
                        {"classification_std", cell.classification_std}});
        csv << cell.zeta << ',' << cell.epsilon << ',' << cell.nf << ','
            << cell.clustering_mean << ',' << cell.clustering_std << ','
            << cell.classification_mean << ',' << cell.classification_std << ','
            << (cell.ok ? "ok" : cell.error) << '\n';
    }
    json j = {{"cells", rows},
              {"config", to_json(config)},
              {"timing", {{"timestamp", iso_timestamp()}}}};
    write_json(out_dir / "grid.json", j);
    write_text(out_dir / "grid.csv", csv.str());

    std::size_t failures = 0;
    for (const GridCell& cell : cells) {
        if (!cell.ok) ++failures;
    }
    std::cout << "grid: " << cells.size() << " cells, " << failures
              << " failed\n";
    return kExitOk;
}

int cmd_bench(const RunConfig& config,
              const std::vector<std::size_t>& n_features_list,
              const std::vector<std::size_t>& hidden_list, std::size_t epochs,
              std::size_t n_samples) {
    if (n_features_list.empty() || hidden_list.empty() || epochs == 0) {
        std::cerr << "bench: feature list, hidden list and epochs required\n";
        return kExitUsage;
    }
    const auto out_dir = resolve_output_dir(config);
    std::filesystem::create_directories(out_dir);

    json rows = json::array();
    std::ostringstream csv;
    csv << "n_features,n_hidden,epochs,parameter_count,expected_parameters,"
           "wall_time_seconds,peak_memory_bytes,status\n";

    for (std::size_t n : n_features_list) {
        for (std::size_t h : hidden_list) {
            json row = {{"n_features", n}, {"n_hidden", h}, {"epochs", epochs}};
            std::string status = "ok";
            try {
                const std::uint64_t seed =
                    config.seeds.empty() ? 0 : config.seeds.front();
                Dataset data = generate_gaussian_matrix(n_samples, n, seed);

                RunConfig cell_config = config;
                cell_config.hidden = {h};
                cell_config.epochs = epochs;
                SparseDae model = build_configured_model(cell_config, n, seed);

                // Expectation from the connection probability, both layers,
                // plus biases.
                const double p1 = SparseWeights::connection_probability(
                    n, h, cell_config.epsilon);
                const double p2 = SparseWeights::connection_probability(
                    h, n, cell_config.epsilon);
                const double expected =
                    p1 * static_cast<double>(n) * static_cast<double>(h) +
                    p2 * static_cast<double>(h) * static_cast<double>(n) +
                    static_cast<double>(n + h);

                TrainReport report = model.train(data);
                row["parameter_count"] = report.parameter_count;
                row["expected_parameters"] = expected;
                row["wall_time_seconds"] = report.total_seconds;
                row["peak_memory_bytes"] = report.peak_memory_bytes;
                csv << n << ',' << h << ',' << epochs << ','
                    << report.parameter_count << ',' << expected << ','
                    << report.total_seconds << ',' << report.peak_memory_bytes
                    << ",ok\n";
            } catch (const std::bad_alloc&) {
                status = "memory_exceeded";
                row["error"] = status;
                csv << n << ',' << h << ',' << epochs << ",,,,," << status << '\n';
            } catch (const std::exception& e) {
                status = e.what();
                row["error"] = status;
                csv << n << ',' << h << ',' << epochs << ",,,,,error\n";
            }
            row["status"] = status;
            rows.push_back(row);
            std::cout << "bench n=" << n << " h=" << h << ": " << status << "\n";
        }
    }

    json j = {{"rows", rows},
              {"config", to_json(config)},
              {"timing", {{"timestamp", iso_timestamp()}}}};
    write_json(out_dir / "bench.json", j);
    write_text(out_dir / "bench.csv", csv.str());
    return kExitOk;
}

}  // namespace qs
