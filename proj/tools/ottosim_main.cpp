#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ottosim/errors.hpp"
#include "ottosim/experiments.hpp"

namespace {

// Exit codes: 0 success, 1 usage, 2 config, 3 compute, 4 I/O.
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;
constexpr int kExitIo = 4;

void print_report_line(const ottosim::MetricReport& report) {
    double worst_mape = 0.0;
    double min_r = 1.0;
    for (const auto& m : report.outputs) {
        worst_mape = std::max(worst_mape, m.mape);
        min_r = std::min(min_r, m.pearson_r);
    }
    std::printf("  %-6s min r %.4f  worst mape %.2f%%\n", report.model.c_str(), min_r,
                worst_mape);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"engine simulation campaigns and surrogate-model experiments"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path = "configs/default.json";
    std::uint64_t seed_override = 0;
    std::string out_override;
    int workers = 1;
    app.add_option("--config", config_path, "experiment config JSON")->capture_default_str();
    app.add_option("--seed", seed_override, "override the master seed");
    app.add_option("--out", out_override, "override the output directory");

    auto* generate = app.add_subcommand("generate", "build traces and run the regime campaigns");
    generate->add_option("--workers", workers, "campaign worker threads")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    const auto& methods = ottosim::method_names();
    std::string method;
    auto* train = app.add_subcommand("train", "fit one method on the training regime");
    train->add_option("--method", method, "dnn | lm | rg | knn | dt")
        ->required()
        ->check(CLI::IsMember(std::vector<std::string>(methods.begin(), methods.end())));

    const auto& regimes = ottosim::regime_names();
    std::string regime;
    std::vector<std::string> model_files;
    auto* evaluate = app.add_subcommand("evaluate", "score saved models on one regime");
    evaluate->add_option("models", model_files, "model JSON files")->required();
    evaluate->add_option("--regime", regime, "dataset regime")
        ->required()
        ->check(CLI::IsMember(std::vector<std::string>(regimes.begin(), regimes.end())));

    std::vector<std::size_t> sizes;
    auto* size_study = app.add_subcommand("size-study", "train across training-set sizes");
    size_study->add_option("sizes", sizes, "row counts, whole cycles (default: config sizes)");

    auto* transfer =
        app.add_subcommand("transfer", "adapt the network to the shifted regime and compare");
    auto* report = app.add_subcommand("report", "evaluate every saved model on every regime");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        ottosim::ExperimentConfig config = ottosim::load_config(config_path);
        if (app.count("--seed") > 0) config.seed = seed_override;
        if (app.count("--out") > 0) config.output_dir = out_override;
        config.validate();

        if (generate->parsed()) {
            const auto result = ottosim::cmd_generate(config, workers);
            for (std::size_t slot = 0; slot < result.regimes.size(); ++slot) {
                const auto& summary = result.regimes[slot];
                std::printf("%-13s %zu cases, %zu rows (%zu flagged), %.1f s\n",
                            regimes[slot].c_str(), summary.cases, summary.rows_written,
                            summary.flagged_rows, summary.wall_seconds);
            }
            std::printf("manifest: %s\n", result.manifest_path.string().c_str());
        } else if (train->parsed()) {
            const auto outcome = ottosim::cmd_train(config, method);
            std::printf("%s: %zu rows in %.1f s -> %s\n", method.c_str(), outcome.rows,
                        outcome.train_seconds, outcome.model_path.string().c_str());
        } else if (evaluate->parsed()) {
            std::vector<std::filesystem::path> files(model_files.begin(), model_files.end());
            const auto result = ottosim::cmd_evaluate(config, files, regime);
            std::printf("%s (%zu models):\n", regime.c_str(), result.reports.size());
            for (const auto& rep : result.reports) print_report_line(rep);
            std::printf("report: %s\n", result.csv_path.string().c_str());
        } else if (size_study->parsed()) {
            if (sizes.empty()) sizes = config.study_sizes;
            for (const auto size : sizes) {
                if (size == 0 || size % config.trace_samples != 0) {
                    std::fprintf(stderr,
                                 "usage: sizes must be positive multiples of %zu (one cycle)\n",
                                 config.trace_samples);
                    return kExitUsage;
                }
            }
            const auto result = ottosim::cmd_size_study(config, sizes);
            for (std::size_t i = 0; i < sizes.size(); ++i) {
                double worst = 0.0;
                for (std::size_t c = 0; c < ottosim::kNumOutputs; ++c)
                    worst = std::max(worst, result.rows[i * ottosim::kNumOutputs + c].mape);
                std::printf("  %6zu rows: worst mape %.2f%%\n", sizes[i], worst);
            }
            std::printf("table: %s\n", result.csv_path.string().c_str());
        } else if (transfer->parsed()) {
            const auto result = ottosim::cmd_transfer(config);
            std::printf("before (on %zu held-out shifted rows):\n", result.eval_rows);
            for (const auto& rep : result.before) print_report_line(rep);
            std::printf("after (%zu adaptation rows):\n", result.adaptation_rows);
            for (const auto& rep : result.after) print_report_line(rep);
            std::printf("frozen layers bit-identical: %s\n",
                        result.frozen_bits_identical ? "yes" : "NO");
        } else if (report->parsed()) {
            const auto result = ottosim::cmd_report(config);
            std::printf("reported %zu regimes -> %s\n", result.regimes.size(),
                        result.summary_path.string().c_str());
        }
        return 0;
    } catch (const ottosim::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ottosim::ParseError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ottosim::SchemaMismatch& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ottosim::VersionMismatch& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ottosim::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCompute;
    }
}
