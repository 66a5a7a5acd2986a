// Acceptance harness: run with a criterion number 1..9, or no argument for
// the full battery. Prints one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qs/checkpoint.hpp"
#include "qs/commands.hpp"
#include "qs/data.hpp"
#include "qs/eval.hpp"
#include "qs/extra_trees.hpp"
#include "qs/hungarian.hpp"
#include "qs/selection.hpp"
#include "qs/set_evolution.hpp"
#include "qs/sparse_dae.hpp"

using nlohmann::json;
using qs::Activation;
using qs::DaeHyperparams;
using qs::Dataset;
using qs::SparseDae;
using qs::SparseWeights;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               (tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    return json::parse(in);
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// ---------------------------------------------------------------- criterion 1

double batch_loss(const SparseDae& model, const Dataset& data,
                  const std::vector<std::size_t>& rows) {
    double loss = 0.0;
    for (std::size_t r : rows) {
        loss += SparseDae::mse_loss(model.forward(data.row(r)).output(),
                                    data.row(r));
    }
    return loss / static_cast<double>(rows.size());
}

bool criterion1() {
    const Activation acts[] = {Activation::Sigmoid, Activation::Tanh,
                               Activation::Linear};
    std::mt19937_64 meta_rng(101);
    std::uniform_int_distribution<std::size_t> in_dist(5, 30);
    std::uniform_int_distribution<std::size_t> hid_dist(3, 20);
    std::normal_distribution<double> x_dist(0.0, 1.0);

    const double h = 1e-6;
    const double tol = 1e-5;
    double worst = 0.0;
    std::size_t checked = 0;

    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n_in = in_dist(meta_rng);
        const std::size_t n_hid = hid_dist(meta_rng);
        DaeHyperparams hp;
        hp.noise_factor = 0.0;
        hp.learning_rate = 1e-3;
        hp.epsilon = 4.0;
        hp.init_scale = 0.5;
        hp.rng_seed = 1000 + static_cast<std::uint64_t>(trial);
        SparseDae model =
            SparseDae::build(n_in, {n_hid}, acts[trial % 3], acts[(trial / 3) % 3], hp);

        Dataset data(2, n_in);
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < n_in; ++j) data.at(i, j) = x_dist(meta_rng);
        }
        const std::vector<std::size_t> batch = {0, 1};

        SparseDae stepped = model;
        std::mt19937_64 noise_rng(0);
        stepped.sgd_step(data, batch, noise_rng);

        for (std::size_t l = 0; l < model.n_layers(); ++l) {
            for (std::size_t k = 0; k < model.layer(l).weights.nnz(); ++k) {
                SparseDae plus = model, minus = model;
                plus.layer_mut(l).weights.weights_mut()[k] += h;
                minus.layer_mut(l).weights.weights_mut()[k] -= h;
                const double fd = (batch_loss(plus, data, batch) -
                                   batch_loss(minus, data, batch)) /
                                  (2.0 * h);
                const double analytic =
                    (model.layer(l).weights.entry_weight(k) -
                     stepped.layer(l).weights.entry_weight(k)) /
                    hp.learning_rate;
                worst = std::max(worst, std::abs(analytic - fd));
                ++checked;
            }
            for (std::size_t j = 0; j < model.layer(l).bias.size(); ++j) {
                SparseDae plus = model, minus = model;
                plus.layer_mut(l).bias[j] += h;
                minus.layer_mut(l).bias[j] -= h;
                const double fd = (batch_loss(plus, data, batch) -
                                   batch_loss(minus, data, batch)) /
                                  (2.0 * h);
                const double analytic =
                    (model.layer(l).bias[j] - stepped.layer(l).bias[j]) /
                    hp.learning_rate;
                worst = std::max(worst, std::abs(analytic - fd));
                ++checked;
            }
        }
    }
    std::cout << "  gradients checked: " << checked
              << ", worst |analytic - fd|: " << worst << "\n";
    return worst < tol;
}

// ---------------------------------------------------------------- criterion 2

std::vector<std::size_t> full_sort_removal_oracle(const SparseWeights& w,
                                                  double zeta) {
    std::vector<std::size_t> positives, negatives;
    for (std::size_t k = 0; k < w.nnz(); ++k) {
        if (w.entry_weight(k) > 0.0) positives.push_back(k);
        else if (w.entry_weight(k) < 0.0) negatives.push_back(k);
    }
    std::sort(positives.begin(), positives.end(),
              [&](std::size_t a, std::size_t b) {
                  return w.entry_weight(a) != w.entry_weight(b)
                             ? w.entry_weight(a) < w.entry_weight(b)
                             : a < b;
              });
    std::sort(negatives.begin(), negatives.end(),
              [&](std::size_t a, std::size_t b) {
                  return w.entry_weight(a) != w.entry_weight(b)
                             ? w.entry_weight(a) > w.entry_weight(b)
                             : a < b;
              });
    const auto n_pos = static_cast<std::size_t>(
        zeta * static_cast<double>(positives.size()));
    const auto n_neg = static_cast<std::size_t>(
        zeta * static_cast<double>(negatives.size()));
    std::vector<std::size_t> removal(positives.begin(), positives.begin() + n_pos);
    removal.insert(removal.end(), negatives.begin(), negatives.begin() + n_neg);
    std::sort(removal.begin(), removal.end());
    return removal;
}

bool criterion2() {
    DaeHyperparams hp;
    hp.rng_seed = 21;
    SparseDae model = SparseDae::build(80, {120}, Activation::Sigmoid,
                                       Activation::Linear, hp);
    std::vector<std::size_t> nnz_before;
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        nnz_before.push_back(model.layer(l).weights.nnz());
    }

    std::mt19937_64 rng(202);
    for (std::size_t epoch = 1; epoch <= 200; ++epoch) {
        for (std::size_t l = 0; l < model.n_layers(); ++l) {
            const auto oracle =
                full_sort_removal_oracle(model.layer(l).weights, 0.2);
            const auto [removal, survivors] =
                model.layer(l).weights.magnitude_partition(0.2);
            if (removal != oracle) {
                std::cout << "  removal set mismatch at epoch " << epoch
                          << ", layer " << l << "\n";
                return false;
            }
        }
        qs::evolve(model, 0.2, rng, epoch);
        for (std::size_t l = 0; l < model.n_layers(); ++l) {
            if (model.layer(l).weights.nnz() != nnz_before[l]) {
                std::cout << "  nnz drift at epoch " << epoch << ", layer " << l
                          << "\n";
                return false;
            }
        }
    }
    std::cout << "  200 epochs, removal oracle matched, nnz constant ("
              << nnz_before[0] << ", " << nnz_before[1] << ")\n";
    return true;
}

// ------------------------------------------------------------ criteria 3 & 8

struct PipelineResult {
    std::vector<std::size_t> top_k;
    double top_k_accuracy = 0.0;
    double baseline_accuracy = 0.0;
    qs::SyntheticGroundTruth ground_truth;
};

PipelineResult run_pipeline(std::uint64_t seed, double noise_factor,
                            std::size_t k, bool with_baseline) {
    qs::SyntheticSpec spec;
    spec.rng_seed = seed;
    PipelineResult result;
    Dataset full = qs::generate_madelon_like(spec, &result.ground_truth);

    auto [train, test] = qs::train_test_split(full, 0.2, seed);
    const auto scaler = qs::fit_transform(train, qs::Scaling::ZScore);
    qs::apply_scaler(test, scaler);

    DaeHyperparams hp;
    hp.noise_factor = noise_factor;
    hp.rng_seed = seed;
    SparseDae model = SparseDae::build(full.n_features(), {1000},
                                       Activation::Sigmoid, Activation::Tanh, hp);
    model.train(train);

    const auto ranking = qs::rank_all(model);
    result.top_k = qs::select_top_k(ranking, k);
    // A selected subset is a set; evaluate it in canonical column order so
    // equal subsets always score identically.
    std::sort(result.top_k.begin(), result.top_k.end());

    result.top_k_accuracy = qs::extra_trees_fit_predict(
        train.select_features(result.top_k), test.select_features(result.top_k),
        50, seed);
    if (with_baseline) {
        result.baseline_accuracy =
            qs::extra_trees_fit_predict(train, test, 50, seed);
    }
    return result;
}

bool criterion3() {
    std::size_t recovery_hits = 0;
    double mean_top = 0.0, mean_base = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto result = run_pipeline(seed, 0.2, 20, true);
        std::set<std::size_t> planted(result.ground_truth.informative.begin(),
                                      result.ground_truth.informative.end());
        planted.insert(result.ground_truth.redundant.begin(),
                       result.ground_truth.redundant.end());
        std::size_t found = 0;
        for (std::size_t j : result.top_k) found += planted.count(j);
        if (found >= 16) ++recovery_hits;
        mean_top += result.top_k_accuracy;
        mean_base += result.baseline_accuracy;
        std::cout << "  seed " << seed << ": " << found
                  << "/20 planted in top-20, top-20 acc "
                  << result.top_k_accuracy << "%, baseline "
                  << result.baseline_accuracy << "%\n";
    }
    mean_top /= 5.0;
    mean_base /= 5.0;
    std::cout << "  recovery in " << recovery_hits
              << "/5 seeds; mean top-20 " << mean_top << "% vs baseline "
              << mean_base << "%\n";
    return recovery_hits >= 4 && mean_top >= mean_base + 10.0;
}

bool criterion8() {
    const double nfs[] = {0.0, 0.2, 0.4, 0.8};
    std::size_t hits = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::map<double, double> acc;
        for (double nf : nfs) {
            acc[nf] = run_pipeline(seed, nf, 20, false).top_k_accuracy;
        }
        const double best_mid = std::max(acc[0.2], acc[0.4]);
        const bool ok = acc[0.8] <= best_mid;
        if (ok) ++hits;
        std::cout << "  seed " << seed << ": acc(nf) = {0: " << acc[0.0]
                  << ", 0.2: " << acc[0.2] << ", 0.4: " << acc[0.4]
                  << ", 0.8: " << acc[0.8] << "} -> "
                  << (ok ? "ordered" : "inverted") << "\n";
    }
    std::cout << "  nf=0.8 no better than best of {0.2, 0.4} in " << hits
              << "/5 seeds\n";
    return hits >= 4;
}

// ---------------------------------------------------------------- criterion 4

bool criterion4() {
    DaeHyperparams hp;
    hp.rng_seed = 4;
    const SparseDae model = SparseDae::build(784, {1000}, Activation::Sigmoid,
                                             Activation::Linear, hp);
    const double expected = 2.0 * 13.0 * (784.0 + 1000.0) + 784.0 + 1000.0 + 1000.0;
    const double actual = static_cast<double>(model.parameter_count());
    const double rel = std::abs(actual - expected) / expected;
    std::cout << "  parameters: " << actual << " vs expected " << expected
              << " (relative error " << rel * 100.0 << "%)\n";
    return rel < 0.05;
}

// ---------------------------------------------------------------- criterion 5

bool criterion5() {
    struct Config {
        const char* name;
        std::size_t n_in;
        double printed;  // percent
    };
    // First-layer densities, 1000 hidden neurons, epsilon = 13.
    const Config configs[] = {
        {"coil20", 1024, 2.53},  {"isolet", 617, 3.35}, {"har", 561, 2.53},
        {"madelon", 500, 3.82},  {"mnist", 784, 2.91},  {"smk", 19993, 1.35},
        {"gla", 49151, 1.32},    {"pcmac", 3289, 1.69},
    };
    bool all_ok = true;
    for (const Config& c : configs) {
        const auto w = SparseWeights::erdos_renyi(c.n_in, 1000, 13.0, 5);
        const double realized = w.density() * 100.0;
        const double expectation =
            SparseWeights::connection_probability(c.n_in, 1000, 13.0) * 100.0;
        const double gap = std::abs(realized - c.printed);
        const bool ok = gap <= 0.15;
        all_ok = all_ok && ok;
        std::cout << "  " << c.name << " (" << c.n_in
                  << " inputs): realized " << realized << "%, expectation "
                  << expectation << "%, printed " << c.printed << "% -> "
                  << (ok ? "ok" : "off by " + std::to_string(gap) + "pp")
                  << "\n";
    }
    return all_ok;
}

// ---------------------------------------------------------------- criterion 6

std::size_t brute_force_agreement(const std::vector<int>& a,
                                  const std::vector<int>& b) {
    std::map<int, std::size_t> amap, bmap;
    for (int v : a) amap.emplace(v, amap.size());
    for (int v : b) bmap.emplace(v, bmap.size());
    const std::size_t m = std::max(amap.size(), bmap.size());

    std::vector<std::vector<std::size_t>> contingency(
        m, std::vector<std::size_t>(m, 0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        contingency[amap[a[i]]][bmap[b[i]]]++;
    }
    std::vector<std::size_t> perm(m);
    for (std::size_t i = 0; i < m; ++i) perm[i] = i;
    std::size_t best = 0;
    do {
        std::size_t total = 0;
        for (std::size_t i = 0; i < m; ++i) total += contingency[i][perm[i]];
        best = std::max(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

bool criterion6() {
    std::mt19937_64 rng(606);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<std::size_t> n_dist(2, 9);
        std::uniform_int_distribution<int> ka(0, 2), kb(0, 2);
        const std::size_t n = n_dist(rng);
        std::vector<int> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = ka(rng);
            b[i] = kb(rng);
        }
        const double got = qs::clustering_accuracy(a, b);
        const double want = 100.0 *
                            static_cast<double>(brute_force_agreement(a, b)) /
                            static_cast<double>(n);
        if (std::abs(got - want) > 1e-9) {
            std::cout << "  mismatch on trial " << trial << ": got " << got
                      << ", brute force " << want << "\n";
            return false;
        }
    }
    std::cout << "  200 random instances matched the exhaustive oracle\n";
    return true;
}

// ---------------------------------------------------------------- criterion 7

bool criterion7() {
    TempDir tmp("qs_accept_c7");
    DaeHyperparams hp;
    hp.rng_seed = 7;
    const SparseDae model = SparseDae::build(20000, {100}, Activation::Sigmoid,
                                             Activation::Linear, hp);
    const auto checkpoint = tmp.path / "model.sdae";
    qs::save_checkpoint(checkpoint, model);

    const std::vector<std::size_t> ks = {5, 10, 25, 50, 100};
    std::map<std::size_t, double> best_time;
    std::map<std::size_t, std::vector<std::size_t>> selections;
    for (std::size_t k : ks) {
        double best = 1e18;
        for (int rep = 0; rep < 3; ++rep) {
            const double t0 = now_seconds();
            if (qs::cmd_select(checkpoint, {k}, tmp.path) != qs::kExitOk) {
                return false;
            }
            best = std::min(best, now_seconds() - t0);
        }
        best_time[k] = best;
        const json sel =
            load_json(tmp.path / ("selected_k" + std::to_string(k) + ".json"));
        selections[k] = sel.at("indices").get<std::vector<std::size_t>>();
    }

    for (std::size_t i = 1; i < ks.size(); ++i) {
        const auto& small = selections[ks[i - 1]];
        const auto& large = selections[ks[i]];
        if (!std::equal(small.begin(), small.end(), large.begin())) {
            std::cout << "  prefix nesting violated between k=" << ks[i - 1]
                      << " and k=" << ks[i] << "\n";
            return false;
        }
    }

    double mean = 0.0;
    for (std::size_t k : ks) mean += best_time[k];
    mean /= static_cast<double>(ks.size());
    bool flat = true;
    for (std::size_t k : ks) {
        std::cout << "  k=" << k << ": " << best_time[k] * 1000.0 << " ms\n";
        flat = flat && std::abs(best_time[k] - mean) <= 0.2 * mean;
    }
    std::cout << "  mean per-k select time " << mean * 1000.0 << " ms\n";
    return flat;
}

// ---------------------------------------------------------------- criterion 9

json without_timing(json j) {
    j.erase("timing");
    return j;
}

bool criterion9() {
    TempDir tmp("qs_accept_c9");
    qs::RunConfig config;
    config.use_synthetic = true;
    config.synthetic.n_samples = 150;
    config.synthetic.n_noise = 22;  // 42 features total
    config.synthetic.rng_seed = 3;
    config.hidden = {32};
    config.epochs = 4;
    config.k_list = {6};
    config.seeds = {9};
    config.kmeans_repeats = 3;
    config.extra_trees = 10;
    config.output_dir = tmp.path.string();

    if (qs::cmd_generate(config) != qs::kExitOk) return false;
    const std::string dataset_a = file_bytes(tmp.path / "dataset.csv");
    const json meta_a = load_json(tmp.path / "dataset_meta.json");

    if (qs::cmd_train(config) != qs::kExitOk) return false;
    const std::string ckpt_a = file_bytes(tmp.path / "model_seed9.sdae");
    const json train_a = load_json(tmp.path / "train_report_seed9.json");

    if (qs::cmd_select(tmp.path / "model_seed9.sdae", {6}, tmp.path) !=
        qs::kExitOk) {
        return false;
    }
    const std::string ranking_a = file_bytes(tmp.path / "ranking.csv");
    const std::string selected_a = file_bytes(tmp.path / "selected_k6.json");

    if (qs::cmd_eval(config, tmp.path / "selected_k6.json") != qs::kExitOk) {
        return false;
    }
    const json eval_a = load_json(tmp.path / "eval_report.json");

    // Second run of everything into the same directory.
    if (qs::cmd_generate(config) != qs::kExitOk) return false;
    if (qs::cmd_train(config) != qs::kExitOk) return false;
    if (qs::cmd_select(tmp.path / "model_seed9.sdae", {6}, tmp.path) !=
        qs::kExitOk) {
        return false;
    }
    if (qs::cmd_eval(config, tmp.path / "selected_k6.json") != qs::kExitOk) {
        return false;
    }

    bool ok = true;
    if (file_bytes(tmp.path / "dataset.csv") != dataset_a) {
        std::cout << "  dataset.csv differs between runs\n";
        ok = false;
    }
    if (load_json(tmp.path / "dataset_meta.json") != meta_a) {
        std::cout << "  dataset_meta.json differs between runs\n";
        ok = false;
    }
    if (file_bytes(tmp.path / "model_seed9.sdae") != ckpt_a) {
        std::cout << "  checkpoint differs between runs\n";
        ok = false;
    }
    if (without_timing(load_json(tmp.path / "train_report_seed9.json")) !=
        without_timing(train_a)) {
        std::cout << "  train report differs outside timing\n";
        ok = false;
    }
    if (file_bytes(tmp.path / "ranking.csv") != ranking_a ||
        file_bytes(tmp.path / "selected_k6.json") != selected_a) {
        std::cout << "  selection artifacts differ between runs\n";
        ok = false;
    }
    if (without_timing(load_json(tmp.path / "eval_report.json")) !=
        without_timing(eval_a)) {
        std::cout << "  eval report differs outside timing\n";
        ok = false;
    }
    if (ok) {
        std::cout << "  generate/train/select/eval reproduced byte-for-byte "
                     "outside the timing fields\n";
    }
    return ok;
}

struct Criterion {
    int number;
    const char* label;
    bool (*run)();
};

const Criterion kCriteria[] = {
    {1, "gradient oracle", criterion1},
    {2, "topology conservation", criterion2},
    {3, "synthetic feature recovery", criterion3},
    {4, "parameter count", criterion4},
    {5, "initial density table", criterion5},
    {6, "clustering accuracy oracle", criterion6},
    {7, "k-independent selection", criterion7},
    {8, "noise factor sweep shape", criterion8},
    {9, "determinism", criterion9},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc > 1) {
        only = std::atoi(argv[1]);
        if (only < 1 || only > 9) {
            std::cerr << "usage: acceptance [1-9]\n";
            return 2;
        }
    }
    bool all_ok = true;
    for (const Criterion& c : kCriteria) {
        if (only != 0 && c.number != only) continue;
        std::cout << "criterion " << c.number << " (" << c.label << "):\n";
        bool ok = false;
        try {
            ok = c.run();
        } catch (const std::exception& e) {
            std::cout << "  exception: " << e.what() << "\n";
        }
        std::cout << "criterion " << c.number << ": "
                  << (ok ? "PASS" : "FAIL") << "\n";
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
