#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "flowprobe/bench/config.hpp"
#include "flowprobe/bench/report.hpp"
#include "flowprobe/bench/runner.hpp"
#include "flowprobe/errors.hpp"
#include "flowprobe/training.hpp"
#include "flowprobe/version.hpp"
#include "flowprobe/weights_io.hpp"

namespace {

namespace fb = flowprobe::bench;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeFailure = 2;

struct CommonOptions {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string format = "csv,json";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "experiment config (JSON)")->required();
    cmd->add_option("--out", o.out, "output directory (default: the config's output_dir)");
    cmd->add_option("--seed", o.seed, "overrides the config seed");
    cmd->add_option("--format", o.format, "comma-separated report formats: csv, json");
}

std::filesystem::path output_dir(const CommonOptions& o, const fb::ExperimentConfig& cfg) {
    return o.out.empty() ? cfg.output_dir : std::filesystem::path(o.out);
}

void print_written(const std::vector<std::filesystem::path>& files) {
    for (const auto& f : files) fmt::print("wrote {}\n", f.string());
}

int run_matrix_cmd(const CommonOptions& o, std::size_t jobs, bool serial_timing) {
    const auto formats = fb::parse_formats(o.format);
    const auto cfg = fb::load_config(o.config, o.seed);
    const auto bundle = fb::run_matrix(cfg, {jobs, serial_timing});
    print_written(fb::emit_reports(bundle, output_dir(o, cfg), formats));
    for (const auto& c : bundle.cells) {
        if (c.aggregate) {
            fmt::print("{:<24} {:<16} steps {:>7.3f}  nfe {:>7.3f}  error {:.3e}  success {:.3f}\n",
                       c.field, c.solver, c.aggregate->mean_steps, c.aggregate->mean_nfe,
                       c.aggregate->mean_error, c.aggregate->success_rate);
        } else {
            fmt::print("{:<24} {:<16} every run failed\n", c.field, c.solver);
        }
    }
    const auto failed = bundle.failed_cells();
    if (failed > 0) {
        fmt::print(stderr, "{} cell(s) failed entirely\n", failed);
        return kRuntimeFailure;
    }
    return kOk;
}

int sweep_cmd(const CommonOptions& o, std::vector<double> values, bool epsilon) {
    const auto formats = fb::parse_formats(o.format);
    const auto cfg = fb::load_config(o.config, o.seed);
    if (values.empty()) values = epsilon ? cfg.epsilon_values : cfg.dt_values;
    if (values.empty()) throw flowprobe::ConfigError("no sweep values given or configured");
    if (epsilon && values.size() < 2) {
        throw flowprobe::ConfigError("an epsilon sweep needs at least two values");
    }
    for (double v : values) {
        if (epsilon ? !(v > 0.0) : !(v > 0.0 && v < 1.0)) {
            throw flowprobe::ConfigError(fmt::format("sweep value {} out of range", v));
        }
    }
    auto bundle = fb::make_bundle(cfg);
    bundle.sweeps.push_back(epsilon ? fb::sweep_epsilon(cfg, values)
                                    : fb::sweep_horizon(cfg, values));
    print_written(fb::emit_reports(bundle, output_dir(o, cfg), formats));
    const auto& table = bundle.sweeps.front();
    for (const auto& r : table.rows) {
        fmt::print("{} {:<8g} steps {:>7.3f}  error {:.3e}  success {:.3f}\n", table.parameter,
                   r.value, r.mean_steps, r.mean_error, r.success_rate);
    }
    return kOk;
}

int validate_cmd(const std::string& path) {
    const auto cfg = fb::load_config(path);
    for (const auto& entry : cfg.corpus) fb::build_field(entry);
    fmt::print("ok: {} field(s), {} solver(s), {} run(s) per cell\n", cfg.corpus.size(),
               cfg.solvers.size(), cfg.runs_per_cell);
    return kOk;
}

struct TrainOptions {
    std::string dataset = "two-gaussians";
    std::string optimizer = "sgd";
    std::string out = "weights.bin";
    std::string trace;
    flowprobe::TrainingConfig config;
};

int train_cmd(TrainOptions o) {
    o.config.dataset = flowprobe::parse_dataset(o.dataset);
    o.config.optimizer = flowprobe::parse_optimizer(o.optimizer);
    if (o.config.steps < 1 || o.config.batch_size < 1 || !(o.config.learning_rate > 0.0) ||
        o.config.log_interval < 1) {
        throw flowprobe::ConfigError("steps, batch size and log interval must be positive, lr > 0");
    }
    const auto result = flowprobe::train(o.config);
    flowprobe::save_weights_file(result.field.network(), o.out);
    fmt::print("wrote {}\n", o.out);
    if (!o.trace.empty()) {
        std::ofstream trace(o.trace);
        if (!trace) throw flowprobe::Error(fmt::format("cannot open '{}' for writing", o.trace));
        trace << "step,loss\n";
        for (std::size_t i = 0; i < result.trace.interval_loss.size(); ++i) {
            trace << fmt::format("{},{}\n", (i + 1) * o.config.log_interval,
                                 result.trace.interval_loss[i]);
        }
        fmt::print("wrote {}\n", o.trace);
    }
    if (!result.trace.interval_loss.empty()) {
        fmt::print("final interval loss {:.6f}\n", result.trace.interval_loss.back());
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Curvature-adaptive flow ODE solver bench"};
    app.set_version_flag("--version", std::string(flowprobe::kToolVersion));
    app.require_subcommand(1);

    CommonOptions run_opts;
    std::size_t jobs = 1;
    bool serial_timing = false;
    auto* run = app.add_subcommand("run", "run the solver x field matrix");
    add_common(run, run_opts);
    run->add_option("--jobs", jobs, "cells executed in parallel")->check(CLI::PositiveNumber);
    run->add_flag("--serial-timing", serial_timing, "one cell at a time, for clean wall times");

    CommonOptions eps_opts;
    std::vector<double> eps_values;
    auto* sweep_eps = app.add_subcommand("sweep-epsilon", "adaptive solver across epsilon values");
    add_common(sweep_eps, eps_opts);
    sweep_eps->add_option("--values", eps_values, "epsilon values (default: sweeps.epsilon)")
        ->delimiter(',');

    CommonOptions dt_opts;
    std::vector<double> dt_values;
    auto* sweep_dt = app.add_subcommand("sweep-horizon", "adaptive solver across probe horizons");
    add_common(sweep_dt, dt_opts);
    sweep_dt->add_option("--values", dt_values, "dt_probe values (default: sweeps.dt_probe)")
        ->delimiter(',');

    TrainOptions train_opts;
    auto* train = app.add_subcommand("train", "train a flow-matching MLP and save its weights");
    train->add_option("--dataset", train_opts.dataset, "single-point, two-gaussians, two-moons");
    train->add_option("--steps", train_opts.config.steps);
    train->add_option("--batch-size", train_opts.config.batch_size);
    train->add_option("--lr", train_opts.config.learning_rate);
    train->add_option("--optimizer", train_opts.optimizer, "sgd or adam");
    train->add_option("--hidden", train_opts.config.hidden, "hidden widths")->delimiter(',');
    train->add_option("--seed", train_opts.config.seed);
    train->add_option("--log-interval", train_opts.config.log_interval);
    train->add_option("--out", train_opts.out, "weights file");
    train->add_option("--trace", train_opts.trace, "loss trace CSV");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate-config", "parse and check a config");
    validate->add_option("--config", validate_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*run) return run_matrix_cmd(run_opts, jobs, serial_timing);
        if (*sweep_eps) return sweep_cmd(eps_opts, eps_values, true);
        if (*sweep_dt) return sweep_cmd(dt_opts, dt_values, false);
        if (*train) return train_cmd(train_opts);
        if (*validate) return validate_cmd(validate_path);
    } catch (const flowprobe::ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kConfigError;
    } catch (const flowprobe::ContractViolation& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kRuntimeFailure;
    }
    return kConfigError;
}
