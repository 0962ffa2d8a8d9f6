#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "spikegrid/config.hpp"
#include "spikegrid/hsi_io.hpp"
#include "spikegrid/parallel.hpp"
#include "spikegrid/train.hpp"

namespace fs = std::filesystem;
using namespace spikegrid;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitTraining = 3;

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Shortest representation that parses back to the same double.
std::string fmt(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct RunStats {
    Metrics test;
    double train_seconds = 0.0;
    double test_seconds = 0.0;
};

struct Aggregate {
    double oa_mean = 0, oa_std = 0, aa_mean = 0, aa_std = 0, kappa_mean = 0, kappa_std = 0;
    double train_seconds = 0, test_seconds = 0;
};

Aggregate aggregate_runs(const std::vector<RunStats>& runs) {
    auto mean_std = [&](auto pick) {
        double m = 0.0;
        for (const auto& r : runs) m += pick(r);
        m /= static_cast<double>(runs.size());
        double var = 0.0;
        for (const auto& r : runs) {
            const double d = pick(r) - m;
            var += d * d;
        }
        const double sd = runs.size() > 1 ? std::sqrt(var / static_cast<double>(runs.size() - 1)) : 0.0;
        return std::make_pair(m, sd);
    };
    Aggregate a;
    std::tie(a.oa_mean, a.oa_std) = mean_std([](const RunStats& r) { return r.test.oa; });
    std::tie(a.aa_mean, a.aa_std) = mean_std([](const RunStats& r) { return r.test.aa; });
    std::tie(a.kappa_mean, a.kappa_std) = mean_std([](const RunStats& r) { return r.test.kappa; });
    double ts = 0, es = 0;
    for (const auto& r : runs) {
        ts += r.train_seconds;
        es += r.test_seconds;
    }
    a.train_seconds = ts / static_cast<double>(runs.size());
    a.test_seconds = es / static_cast<double>(runs.size());
    return a;
}

Network network_from_params(const NetworkSpec& spec, const ParamStore& params) {
    Rng rng(0);
    Network net(spec, rng);
    if (net.params().count() != params.count())
        throw ConfigError("checkpoint holds " + std::to_string(params.count()) + " tensors, network expects " +
                          std::to_string(net.params().count()));
    for (int i = 0; i < params.count(); ++i) {
        const int id = net.params().index_of(params.name(i));
        if (id < 0) throw ConfigError("checkpoint tensor '" + params.name(i) + "' has no place in this network");
        if (net.params().value(id).shape != params.value(i).shape)
            throw ConfigError("checkpoint tensor '" + params.name(i) + "' has shape " + params.value(i).shape_str() +
                              ", network expects " + net.params().value(id).shape_str());
        net.params().value(id) = params.value(i);
    }
    return net;
}

void require_dataset_files(const RunConfig& cfg) {
    if (!fs::exists(cfg.cube_path)) throw IoError("cube file not found: " + cfg.cube_path.string());
    if (!fs::exists(cfg.labels_path)) throw IoError("label file not found: " + cfg.labels_path.string());
}

std::string epoch_log_csv(const std::vector<EpochRecord>& log) {
    std::ostringstream os;
    os << "epoch,lr,mean_loss,oa,aa,kappa\n";
    for (const auto& r : log)
        os << r.epoch << "," << fmt(r.lr) << "," << fmt(r.mean_loss) << "," << fmt(r.validation.oa) << ","
           << fmt(r.validation.aa) << "," << fmt(r.validation.kappa) << "\n";
    return os.str();
}

std::string metrics_csv(int runs, const Aggregate& a) {
    std::ostringstream os;
    os << "runs,oa_mean,oa_std,aa_mean,aa_std,kappa_mean,kappa_std,train_seconds,test_seconds\n";
    os << runs << "," << fmt(a.oa_mean) << "," << fmt(a.oa_std) << "," << fmt(a.aa_mean) << "," << fmt(a.aa_std) << ","
       << fmt(a.kappa_mean) << "," << fmt(a.kappa_std) << "," << fmt(a.train_seconds) << "," << fmt(a.test_seconds)
       << "\n";
    return os.str();
}

std::string pm(double mean, double sd) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << mean * 100.0 << "±" << sd * 100.0;
    return os.str();
}

// One full training run: prepare, fit, time the final test evaluation.
RunStats run_single(const RunConfig& cfg, std::uint64_t run_seed, int jobs, TrainResult* result_out,
                    PreparedData* data_out) {
    HsiCube cube = read_cube(cfg.cube_path);
    LabelMap labels = read_labels(cfg.labels_path);

    SplitSpec split = cfg.split;
    split.seed = cfg.split.seed + (run_seed - cfg.train.seed);
    TrainConfig tc = cfg.train;
    tc.seed = run_seed;

    PreparedData data = prepare_data(cube, labels, split, cfg.pca_components, tc.seed);

    const auto t0 = std::chrono::steady_clock::now();
    TrainResult result = train(cfg.network, data, tc, jobs);
    RunStats stats;
    stats.train_seconds = seconds_since(t0);

    Network best = network_from_params(result.spec, result.best_params);
    const auto t1 = std::chrono::steady_clock::now();
    stats.test = evaluate_pixels(best, data, data.test, tc.patch_size, tc.time_steps, jobs);
    stats.test_seconds = seconds_since(t1);

    if (result_out) *result_out = std::move(result);
    if (data_out) *data_out = std::move(data);
    return stats;
}

int cmd_train(const std::string& config_path, int repeats, int jobs, std::int64_t seed_override) {
    RunConfig cfg = load_run_config(config_path);
    if (seed_override >= 0) {
        cfg.train.seed = static_cast<std::uint64_t>(seed_override);
        cfg.split.seed = static_cast<std::uint64_t>(seed_override);
    }
    require_dataset_files(cfg);
    fs::create_directories(cfg.output_dir);

    std::vector<RunStats> runs;
    for (int r = 0; r < repeats; ++r) {
        TrainResult result;
        RunStats stats = run_single(cfg, cfg.train.seed + static_cast<std::uint64_t>(r), jobs, &result, nullptr);
        runs.push_back(stats);

        const fs::path log_path =
            cfg.output_dir / (repeats == 1 ? std::string("epochs.csv") : "epochs_run" + std::to_string(r) + ".csv");
        atomic_write_text(log_path, epoch_log_csv(result.log));
        if (r == 0) {
            Network best = network_from_params(result.spec, result.best_params);
            write_checkpoint(cfg.output_dir / "model.sgck", result.best_params, best.schema_hash());
        }
        std::cout << "run " << r << ": test OA " << fmt(stats.test.oa) << " AA " << fmt(stats.test.aa) << " Kappa "
                  << fmt(stats.test.kappa) << " (train " << fmt(stats.train_seconds) << "s, test "
                  << fmt(stats.test_seconds) << "s, best epoch " << result.best_epoch << ")\n";
    }

    const Aggregate agg = aggregate_runs(runs);
    atomic_write_text(cfg.output_dir / "metrics.csv", metrics_csv(repeats, agg));
    std::cout << "OA " << pm(agg.oa_mean, agg.oa_std) << "  AA " << pm(agg.aa_mean, agg.aa_std) << "  Kappa "
              << pm(agg.kappa_mean, agg.kappa_std) << "\n";
    return kExitOk;
}

// Rebuilds the deterministic data pipeline and returns the checkpointed net.
std::pair<Network, PreparedData> load_model_and_data(const RunConfig& cfg, const std::string& checkpoint_path) {
    require_dataset_files(cfg);
    if (!fs::exists(checkpoint_path)) throw IoError("checkpoint not found: " + checkpoint_path);
    Checkpoint ck = read_checkpoint(checkpoint_path);

    HsiCube cube = read_cube(cfg.cube_path);
    LabelMap labels = read_labels(cfg.labels_path);
    PreparedData data = prepare_data(cube, labels, cfg.split, cfg.pca_components, cfg.train.seed);

    NetworkSpec spec = cfg.network;
    spec.patch_size = cfg.train.patch_size;
    spec.time_steps = cfg.train.time_steps;
    spec.num_classes = data.num_classes;
    spec.input_channels = data.reduced.dim(2);
    spec.validate();

    Rng probe_rng(0);
    Network probe(spec, probe_rng);
    if (probe.schema_hash() != ck.schema_hash)
        throw ConfigError("checkpoint schema does not match this configuration");
    Network net = network_from_params(spec, ck.params);
    return {std::move(net), std::move(data)};
}

int cmd_eval(const std::string& config_path, const std::string& checkpoint_path, int jobs) {
    RunConfig cfg = load_run_config(config_path);
    auto [net, data] = load_model_and_data(cfg, checkpoint_path);
    fs::create_directories(cfg.output_dir);

    const auto t0 = std::chrono::steady_clock::now();
    Metrics m = evaluate_pixels(net, data, data.test, cfg.train.patch_size, cfg.train.time_steps, jobs);
    const double secs = seconds_since(t0);

    std::ostringstream os;
    os << "oa,aa,kappa,test_seconds\n"
       << fmt(m.oa) << "," << fmt(m.aa) << "," << fmt(m.kappa) << "," << fmt(secs) << "\n";
    atomic_write_text(cfg.output_dir / "eval_metrics.csv", os.str());
    std::cout << "test OA " << fmt(m.oa) << " AA " << fmt(m.aa) << " Kappa " << fmt(m.kappa) << " (" << fmt(secs)
              << "s)\n";
    return kExitOk;
}

int cmd_predict_map(const std::string& config_path, const std::string& checkpoint_path, bool full, int jobs) {
    RunConfig cfg = load_run_config(config_path);
    auto [net, data] = load_model_and_data(cfg, checkpoint_path);
    fs::create_directories(cfg.output_dir);

    const int h = data.labels.height, w = data.labels.width;
    std::vector<PixelCoord> coords;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            if (full || data.labels.at(r, c) != 0) coords.push_back({r, c});

    const std::vector<int> preds =
        predict_labels(net, data.reduced, coords, cfg.train.patch_size, cfg.train.time_steps, jobs);

    const ClassPalette palette = ClassPalette::default_for(data.num_classes);
    std::vector<unsigned char> rgb(static_cast<std::size_t>(h) * w * 3, 0);
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const auto& p = coords[i];
        const auto color = palette.color(preds[i]);
        unsigned char* px = &rgb[(static_cast<std::size_t>(p.row) * w + p.col) * 3];
        px[0] = color[0];
        px[1] = color[1];
        px[2] = color[2];
    }
    std::ostringstream ppm;
    ppm << "P6\n" << w << " " << h << "\n255\n";
    ppm.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
    atomic_write_text(cfg.output_dir / "map.ppm", ppm.str());

    Metrics m = evaluate_pixels(net, data, data.test, cfg.train.patch_size, cfg.train.time_steps, jobs);
    std::ostringstream os;
    os << "oa,aa,kappa\n" << fmt(m.oa) << "," << fmt(m.aa) << "," << fmt(m.kappa) << "\n";
    atomic_write_text(cfg.output_dir / "map_metrics.csv", os.str());
    std::cout << "map written (" << w << "x" << h << "), test OA " << fmt(m.oa) << "\n";
    return kExitOk;
}

enum class SweepAxis { SpatialSize, TimeSteps, Kernels, Width };

SweepAxis parse_axis(const std::string& s) {
    if (s == "spatial_size") return SweepAxis::SpatialSize;
    if (s == "time_steps") return SweepAxis::TimeSteps;
    if (s == "kernels") return SweepAxis::Kernels;
    if (s == "width") return SweepAxis::Width;
    throw ConfigError("unknown sweep axis '" + s + "' (expected spatial_size|time_steps|kernels|width)");
}

std::vector<std::vector<int>> kernel_branches(int width, std::vector<int> pair) {
    return std::vector<std::vector<int>>(static_cast<std::size_t>(std::max(width, 1)), std::move(pair));
}

// Applies one sweep value; throws ConfigError for invalid values so the whole
// sweep is rejected before any run starts.
RunConfig apply_sweep_value(const RunConfig& base, SweepAxis axis, const std::string& value) {
    RunConfig cfg = base;
    switch (axis) {
        case SweepAxis::SpatialSize: {
            const int s = std::stoi(value);
            if (s < 5 || s % 2 == 0) throw ConfigError("spatial size must be odd and >= 5, got '" + value + "'");
            cfg.network.patch_size = s;
            cfg.train.patch_size = s;
            break;
        }
        case SweepAxis::TimeSteps: {
            const int t = std::stoi(value);
            if (t < 1) throw ConfigError("time steps must be >= 1, got '" + value + "'");
            cfg.network.time_steps = t;
            cfg.train.time_steps = t;
            break;
        }
        case SweepAxis::Kernels: {
            if (value == "mix") {
                cfg.network.swmr1_branch_kernels = {{1, 3}, {1, 3}};
                cfg.network.swmr2_branch_kernels = {{1, 3}, {3, 5}};
            } else {
                const auto dash = value.find('-');
                if (dash == std::string::npos)
                    throw ConfigError("kernel value must be 'a-b' or 'mix', got '" + value + "'");
                const int a = std::stoi(value.substr(0, dash));
                const int b = std::stoi(value.substr(dash + 1));
                if (a < 1 || b < 1 || a % 2 == 0 || b % 2 == 0)
                    throw ConfigError("kernel sizes must be odd and positive, got '" + value + "'");
                cfg.network.swmr1_branch_kernels = kernel_branches(cfg.network.width_factor, {a, b});
                cfg.network.swmr2_branch_kernels = kernel_branches(cfg.network.width_factor, {a, b});
            }
            break;
        }
        case SweepAxis::Width: {
            const int wf = std::stoi(value);
            if (wf < 1) throw ConfigError("width factor must be >= 1, got '" + value + "'");
            cfg.network.width_factor = wf;
            break;
        }
    }
    cfg.validate();
    return cfg;
}

int cmd_sweep(const std::string& config_path, const std::string& axis_name, const std::vector<std::string>& values,
              int repeats, int jobs) {
    RunConfig base = load_run_config(config_path);
    require_dataset_files(base);
    const SweepAxis axis = parse_axis(axis_name);
    if (values.empty()) throw ConfigError("sweep needs at least one value");

    // Validate the whole grid before any training run starts.
    std::vector<RunConfig> grid;
    for (const auto& v : values) grid.push_back(apply_sweep_value(base, axis, v));

    fs::create_directories(base.output_dir);
    std::vector<Aggregate> results(grid.size());

    auto run_value = [&](int vi, int inner_jobs) {
        const RunConfig& cfg = grid[static_cast<std::size_t>(vi)];
        std::vector<RunStats> runs;
        for (int r = 0; r < repeats; ++r)
            runs.push_back(run_single(cfg, cfg.train.seed + static_cast<std::uint64_t>(r), inner_jobs, nullptr, nullptr));
        results[static_cast<std::size_t>(vi)] = aggregate_runs(runs);
    };

    if (jobs > 1) {
        parallel_for(static_cast<int>(grid.size()), jobs, [&](int vi) { run_value(vi, 1); });
    } else {
        for (int vi = 0; vi < static_cast<int>(grid.size()); ++vi) run_value(vi, 0);
    }

    std::ostringstream os;
    os << "value,oa_mean,oa_std,aa_mean,aa_std,kappa_mean,kappa_std,train_seconds,test_seconds\n";
    for (std::size_t vi = 0; vi < grid.size(); ++vi) {
        const Aggregate& a = results[vi];
        os << values[vi] << "," << fmt(a.oa_mean) << "," << fmt(a.oa_std) << "," << fmt(a.aa_mean) << ","
           << fmt(a.aa_std) << "," << fmt(a.kappa_mean) << "," << fmt(a.kappa_std) << "," << fmt(a.train_seconds)
           << "," << fmt(a.test_seconds) << "\n";
    }
    const fs::path out = base.output_dir / ("sweep_" + axis_name + ".csv");
    atomic_write_text(out, os.str());
    std::cout << os.str();
    std::cout << "sweep table written to " << out.string() << "\n";
    return kExitOk;
}

int cmd_gen_synthetic(const std::string& cube_path, const std::string& labels_path, int classes, int height, int width,
                      int bands, double separation, double noise, std::uint64_t seed) {
    auto [cube, labels] = generate_synthetic(classes, height, width, bands, static_cast<float>(separation),
                                             static_cast<float>(noise), seed);
    auto ensure_parent = [](const std::string& p) {
        const fs::path parent = fs::path(p).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
    };
    ensure_parent(cube_path);
    write_cube(cube_path, cube);
    ensure_parent(labels_path);
    write_labels(labels_path, labels);
    std::cout << "synthetic scene " << width << "x" << height << "x" << bands << ", " << classes << " classes\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spikegrid: spiking-network hyperspectral classification"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, axis;
    std::vector<std::string> sweep_values;
    int repeats = 1, jobs = 0;
    std::int64_t seed_override = -1;
    bool full_map = false;

    auto* tr = app.add_subcommand("train", "train a model from a config file");
    tr->add_option("--config", config_path, "JSON run configuration")->required();
    tr->add_option("--repeats", repeats, "number of seeds to train");
    tr->add_option("--jobs", jobs, "worker thread cap");
    tr->add_option("--seed", seed_override, "override the config seed");

    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    ev->add_option("--config", config_path, "JSON run configuration")->required();
    ev->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
    ev->add_option("--jobs", jobs, "worker thread cap");

    auto* pm_cmd = app.add_subcommand("predict-map", "write a classification map as PPM");
    pm_cmd->add_option("--config", config_path, "JSON run configuration")->required();
    pm_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
    pm_cmd->add_flag("--full", full_map, "classify unlabeled pixels as well");
    pm_cmd->add_option("--jobs", jobs, "worker thread cap");

    auto* sw = app.add_subcommand("sweep", "train across a parameter grid");
    sw->add_option("--config", config_path, "JSON run configuration")->required();
    sw->add_option("--axis", axis, "spatial_size|time_steps|kernels|width")->required();
    sw->add_option("--values", sweep_values, "axis values")->required();
    sw->add_option("--repeats", repeats, "seeds per value");
    sw->add_option("--jobs", jobs, "parallel configurations");

    std::string out_cube, out_labels;
    int g_classes = 4, g_h = 32, g_w = 32, g_b = 20;
    double g_sep = 1.0, g_noise = 0.1;
    std::uint64_t g_seed = 1;
    auto* gs = app.add_subcommand("gen-synthetic", "write a synthetic cube and label raster");
    gs->add_option("--cube", out_cube, "output .hsic path")->required();
    gs->add_option("--labels", out_labels, "output .hsil path")->required();
    gs->add_option("--classes", g_classes, "number of classes");
    gs->add_option("--height", g_h, "scene height");
    gs->add_option("--width", g_w, "scene width");
    gs->add_option("--bands", g_b, "spectral bands");
    gs->add_option("--separation", g_sep, "class signature separation");
    gs->add_option("--noise", g_noise, "white noise sigma");
    gs->add_option("--seed", g_seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (tr->parsed()) return cmd_train(config_path, repeats, jobs, seed_override);
        if (ev->parsed()) return cmd_eval(config_path, checkpoint_path, jobs);
        if (pm_cmd->parsed()) return cmd_predict_map(config_path, checkpoint_path, full_map, jobs);
        if (sw->parsed()) return cmd_sweep(config_path, axis, sweep_values, repeats, jobs);
        if (gs->parsed()) return cmd_gen_synthetic(out_cube, out_labels, g_classes, g_h, g_w, g_b, g_sep, g_noise, g_seed);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const TrainingError& e) {
        std::cerr << "training error: " << e.what() << "\n";
        return kExitTraining;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTraining;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return kExitTraining;
    }
    return kExitUsage;
}
