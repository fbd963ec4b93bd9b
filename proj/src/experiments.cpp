#include "ottosim/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <utility>

#include "json.hpp"
#include "model_io.hpp"
#include "ottosim/baselines.hpp"
#include "ottosim/errors.hpp"
#include "ottosim/prng.hpp"
#include "ottosim/sampling.hpp"
#include "ottosim/table.hpp"

namespace ottosim {

namespace {

using nlohmann::json;
using steady = std::chrono::steady_clock;

double seconds_since(steady::time_point t0) {
    return std::chrono::duration<double>(steady::now() - t0).count();
}

// Unknown keys are config errors, not silent defaults.
void expect_keys(const json& j, const std::string& where,
                 std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& item : j.items()) {
        const bool known = std::any_of(keys.begin(), keys.end(),
                                       [&](const char* key) { return item.key() == key; });
        if (!known) throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
    }
}

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        j.at(key).get_to(out);
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

void read_field(const json& j, const char* key, std::filesystem::path& out,
                const std::string& where) {
    std::string text = out.string();
    read_field(j, key, text, where);
    out = text;
}

void read_engine(const json& j, EngineGeometry& g) {
    expect_keys(j, "engine", {"bore", "stroke", "conrod_length", "compression_ratio",
                              "n_cylinders"});
    read_field(j, "bore", g.bore, "engine");
    read_field(j, "stroke", g.stroke, "engine");
    read_field(j, "conrod_length", g.conrod_length, "engine");
    read_field(j, "compression_ratio", g.compression_ratio, "engine");
    read_field(j, "n_cylinders", g.n_cylinders, "engine");
}

void read_fluid(const json& j, WorkingFluid& f) {
    expect_keys(j, "fluid", {"gamma_unburned", "gamma_burned", "gas_constant", "fuel_lhv",
                             "stoich_afr"});
    read_field(j, "gamma_unburned", f.gamma_unburned, "fluid");
    read_field(j, "gamma_burned", f.gamma_burned, "fluid");
    read_field(j, "gas_constant", f.gas_constant, "fluid");
    read_field(j, "fuel_lhv", f.fuel_lhv, "fluid");
    read_field(j, "stoich_afr", f.stoich_afr, "fluid");
}

void read_vehicle(const json& j, VehicleConfig& v) {
    expect_keys(j, "vehicle", {"gear_ratios", "final_drive", "wheel_radius", "idle_rpm",
                               "upshift_speeds"});
    read_field(j, "gear_ratios", v.gear_ratios, "vehicle");
    read_field(j, "final_drive", v.final_drive, "vehicle");
    read_field(j, "wheel_radius", v.wheel_radius, "vehicle");
    read_field(j, "idle_rpm", v.idle_rpm, "vehicle");
    read_field(j, "upshift_speeds", v.upshift_speeds, "vehicle");
}

void read_grid(const json& j, std::array<std::vector<double>, 6>& grid) {
    expect_keys(j, "campaign.grid",
                {"ambient_temp_k", "humidity", "valve_timing_deg", "compression_ratio",
                 "spark_deg", "gear_ratio"});
    const auto& names = input_names();
    for (std::size_t d = 0; d < grid.size(); ++d)
        read_field(j, names[d].c_str(), grid[d], "campaign.grid");
}

void read_campaign(const json& j, ExperimentConfig& c) {
    expect_keys(j, "campaign", {"dtheta", "trace_samples", "grid"});
    read_field(j, "dtheta", c.dtheta, "campaign");
    read_field(j, "trace_samples", c.trace_samples, "campaign");
    if (j.contains("grid")) read_grid(j.at("grid"), c.grid);
}

void read_regimes(const json& j, ExperimentConfig& c) {
    expect_keys(j, "regimes", {"train_cycles", "test_cycles", "fuel_scale", "rpm_scale"});
    read_field(j, "train_cycles", c.train_cycles, "regimes");
    read_field(j, "test_cycles", c.test_cycles, "regimes");
    read_field(j, "fuel_scale", c.shift.fuel_scale, "regimes");
    read_field(j, "rpm_scale", c.shift.rpm_scale, "regimes");
}

void read_network(const json& j, ExperimentConfig& c) {
    expect_keys(j, "network", {"layer_sizes", "init_seed"});
    read_field(j, "layer_sizes", c.network.layer_sizes, "network");
    read_field(j, "init_seed", c.init_seed, "network");
}

void read_train(const json& j, TrainConfig& t) {
    expect_keys(j, "train", {"epochs", "batch_size", "learning_rate", "beta1", "beta2",
                             "epsilon", "shuffle_seed"});
    read_field(j, "epochs", t.epochs, "train");
    read_field(j, "batch_size", t.batch_size, "train");
    read_field(j, "learning_rate", t.learning_rate, "train");
    read_field(j, "beta1", t.beta1, "train");
    read_field(j, "beta2", t.beta2, "train");
    read_field(j, "epsilon", t.epsilon, "train");
    read_field(j, "shuffle_seed", t.shuffle_seed, "train");
}

void read_transfer(const json& j, ExperimentConfig& c) {
    expect_keys(j, "transfer", {"rows", "epochs"});
    read_field(j, "rows", c.transfer_rows, "transfer");
    read_field(j, "epochs", c.transfer_epochs, "transfer");
}

void read_baselines(const json& j, ExperimentConfig& c) {
    expect_keys(j, "baselines", {"ridge_lambda", "knn_k", "tree_max_depth", "tree_min_leaf"});
    read_field(j, "ridge_lambda", c.ridge_lambda, "baselines");
    read_field(j, "knn_k", c.knn_k, "baselines");
    read_field(j, "tree_max_depth", c.tree_max_depth, "baselines");
    read_field(j, "tree_min_leaf", c.tree_min_leaf, "baselines");
}

void read_size_study(const json& j, ExperimentConfig& c) {
    expect_keys(j, "size_study", {"sizes"});
    read_field(j, "sizes", c.study_sizes, "size_study");
}

// Canonical JSON echo of the effective settings; hashed for manifests.
// nlohmann objects keep keys sorted, so the dump is a stable serialization.
json config_to_json(const ExperimentConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir.string();
    j["engine"] = {{"bore", c.geometry.bore},
                   {"stroke", c.geometry.stroke},
                   {"conrod_length", c.geometry.conrod_length},
                   {"compression_ratio", c.geometry.compression_ratio},
                   {"n_cylinders", c.geometry.n_cylinders}};
    j["fluid"] = {{"gamma_unburned", c.fluid.gamma_unburned},
                  {"gamma_burned", c.fluid.gamma_burned},
                  {"gas_constant", c.fluid.gas_constant},
                  {"fuel_lhv", c.fluid.fuel_lhv},
                  {"stoich_afr", c.fluid.stoich_afr}};
    j["vehicle"] = {{"gear_ratios", c.vehicle.gear_ratios},
                    {"final_drive", c.vehicle.final_drive},
                    {"wheel_radius", c.vehicle.wheel_radius},
                    {"idle_rpm", c.vehicle.idle_rpm},
                    {"upshift_speeds", c.vehicle.upshift_speeds}};
    json grid;
    const auto& names = input_names();
    for (std::size_t d = 0; d < c.grid.size(); ++d) grid[names[d]] = c.grid[d];
    j["campaign"] = {{"dtheta", c.dtheta}, {"trace_samples", c.trace_samples}, {"grid", grid}};
    j["regimes"] = {{"train_cycles", c.train_cycles},
                    {"test_cycles", c.test_cycles},
                    {"fuel_scale", c.shift.fuel_scale},
                    {"rpm_scale", c.shift.rpm_scale}};
    j["network"] = {{"layer_sizes", c.network.layer_sizes}, {"init_seed", c.init_seed}};
    j["train"] = {{"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"learning_rate", c.train.learning_rate},
                  {"beta1", c.train.beta1},
                  {"beta2", c.train.beta2},
                  {"epsilon", c.train.epsilon},
                  {"shuffle_seed", c.train.shuffle_seed}};
    j["transfer"] = {{"rows", c.transfer_rows}, {"epochs", c.transfer_epochs}};
    j["baselines"] = {{"ridge_lambda", c.ridge_lambda},
                      {"knn_k", c.knn_k},
                      {"tree_max_depth", c.tree_max_depth},
                      {"tree_min_leaf", c.tree_min_leaf}};
    j["size_study"] = {{"sizes", c.study_sizes}};
    return j;
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string());
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("failed writing " + path.string());
}

std::filesystem::path regime_csv(const ExperimentConfig& config, const std::string& regime) {
    return config.output_dir / "data" / regime / "campaign.csv";
}

GridPoint point_from_row(const Eigen::MatrixXd& values, Eigen::Index row) {
    GridPoint pt;
    pt.ambient_temp = values(row, 0);
    pt.humidity = values(row, 1);
    pt.valve_timing_deg = values(row, 2);
    pt.compression_ratio = values(row, 3);
    pt.spark_deg = values(row, 4);
    pt.gear_ratio = values(row, 5);
    return pt;
}

std::vector<DimensionMap> envelope_mapping(const ExperimentConfig& config) {
    std::vector<DimensionMap> mapping;
    const auto& names = input_names();
    for (std::size_t d = 0; d < config.grid.size(); ++d)
        mapping.push_back({names[d], config.grid[d].front(), config.grid[d].back()});
    return mapping;
}

BaselineModel fit_baseline(const ExperimentConfig& config, const std::string& method,
                           const Dataset& scaled) {
    if (method == "lm") return fit_linear(scaled);
    if (method == "rg") return fit_ridge(scaled, config.ridge_lambda);
    if (method == "knn") return fit_knn(scaled, config.knn_k);
    return fit_tree(scaled, config.tree_max_depth, config.tree_min_leaf);
}

std::string model_display_name(const std::filesystem::path& file) {
    std::string name = file.stem().string();
    if (name.rfind("model-", 0) == 0) name = name.substr(6);
    return name;
}

double manifest_train_seconds(const ExperimentConfig& config, const std::string& name) {
    std::ifstream in(config.output_dir / "models" / "manifest.json");
    if (!in) return 0.0;
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error&) {
        return 0.0;
    }
    if (!doc.contains("methods") || !doc["methods"].contains(name)) return 0.0;
    return doc["methods"][name].value("train_seconds", 0.0);
}

void update_models_manifest(const ExperimentConfig& config, const std::string& method,
                            const TrainOutcome& outcome) {
    const auto path = config.output_dir / "models" / "manifest.json";
    json doc = json::object();
    if (std::ifstream in(path); in) {
        try {
            doc = json::parse(in);
        } catch (const json::parse_error&) {
            doc = json::object();
        }
    }
    if (!doc.is_object()) doc = json::object();
    doc["config_hash"] = config_hash(config);
    json entry;
    entry["model_file"] = outcome.model_path.filename().string();
    entry["rows"] = outcome.rows;
    entry["train_seconds"] = outcome.train_seconds;
    if (method == "dnn") {
        entry["init_seed"] = config.init_seed;
        entry["shuffle_seed"] = config.train.shuffle_seed;
        entry["epochs"] = config.train.epochs;
    }
    doc["methods"][method] = entry;
    write_json_file(doc, path);
}

Dataset concat_rows(const Dataset& a, const Dataset& b) {
    Dataset out;
    out.inputs.resize(a.inputs.rows() + b.inputs.rows(), a.inputs.cols());
    out.inputs << a.inputs, b.inputs;
    out.outputs.resize(a.outputs.rows() + b.outputs.rows(), a.outputs.cols());
    out.outputs << a.outputs, b.outputs;
    out.trace_id = a.trace_id;
    out.trace_id.insert(out.trace_id.end(), b.trace_id.begin(), b.trace_id.end());
    out.t = a.t;
    out.t.insert(out.t.end(), b.t.begin(), b.t.end());
    return out;
}

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) ==
               0;
}

bool same_bits(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) ==
               0;
}

}  // namespace

void ExperimentConfig::validate() const {
    geometry.validate();
    fluid.validate();
    vehicle.validate();
    if (!(dtheta > 0.0 && dtheta <= 1.0)) throw ConfigError("campaign.dtheta must be in (0, 1] CAD");
    if (trace_samples < 1) throw ConfigError("campaign.trace_samples must be positive");
    const auto& names = input_names();
    for (std::size_t d = 0; d < grid.size(); ++d) {
        const auto& levels = grid[d];
        if (levels.size() < 2)
            throw ConfigError("campaign.grid." + names[d] + " needs at least two levels");
        for (std::size_t i = 1; i < levels.size(); ++i) {
            if (!(levels[i] > levels[i - 1]))
                throw ConfigError("campaign.grid." + names[d] +
                                  " levels must be strictly increasing");
        }
    }
    if (train_cycles < 1) throw ConfigError("regimes.train_cycles must be positive");
    if (test_cycles < 1) throw ConfigError("regimes.test_cycles must be positive");
    if (!(shift.fuel_scale > 0.0) || !(shift.rpm_scale > 0.0))
        throw ConfigError("regime shift scales must be positive");
    network.validate();
    train.validate(network.n_hidden());
    if (transfer_rows < 1 || transfer_rows % trace_samples != 0)
        throw ConfigError("transfer.rows must be a positive whole number of cycles");
    if (transfer_rows >= test_cycles * trace_samples)
        throw ConfigError("transfer.rows must leave held-out rows in the shifted regime");
    if (transfer_epochs < 0) throw ConfigError("transfer.epochs must be >= 0");
    if (ridge_lambda < 0.0) throw ConfigError("baselines.ridge_lambda must be >= 0");
    if (knn_k < 1) throw ConfigError("baselines.knn_k must be >= 1");
    if (tree_min_leaf < 1) throw ConfigError("baselines.tree_min_leaf must be >= 1");
    if (study_sizes.empty()) throw ConfigError("size_study.sizes must not be empty");
    for (const auto size : study_sizes) {
        if (size == 0 || size % trace_samples != 0)
            throw ConfigError("size_study sizes must be positive whole numbers of cycles");
        if (size > train_cycles * trace_samples)
            throw ConfigError("size_study sizes cannot exceed the training regime");
    }
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("config file: " + std::string(e.what()), 0, e.byte);
    }

    ExperimentConfig c;
    expect_keys(doc, "config",
                {"seed", "output_dir", "engine", "fluid", "vehicle", "campaign", "regimes",
                 "network", "train", "transfer", "baselines", "size_study"});
    read_field(doc, "seed", c.seed, "config");
    read_field(doc, "output_dir", c.output_dir, "config");
    if (doc.contains("engine")) read_engine(doc.at("engine"), c.geometry);
    if (doc.contains("fluid")) read_fluid(doc.at("fluid"), c.fluid);
    if (doc.contains("vehicle")) read_vehicle(doc.at("vehicle"), c.vehicle);
    if (doc.contains("campaign")) read_campaign(doc.at("campaign"), c);
    if (doc.contains("regimes")) read_regimes(doc.at("regimes"), c);
    if (doc.contains("network")) read_network(doc.at("network"), c);
    if (doc.contains("train")) read_train(doc.at("train"), c.train);
    if (doc.contains("transfer")) read_transfer(doc.at("transfer"), c);
    if (doc.contains("baselines")) read_baselines(doc.at("baselines"), c);
    if (doc.contains("size_study")) read_size_study(doc.at("size_study"), c);
    c.validate();
    return c;
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string text = config_to_json(config).dump();
    std::uint64_t h = 14695981039346656037ull;  // FNV-1a 64
    for (const unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

const std::array<std::string, 4>& regime_names() {
    static const std::array<std::string, 4> names{"train-data-1", "test-data-1a", "test-data-1b",
                                                  "test-data-2"};
    return names;
}

const std::array<std::string, 5>& method_names() {
    static const std::array<std::string, 5> names{"dnn", "lm", "rg", "knn", "dt"};
    return names;
}

GenerateResult cmd_generate(const ExperimentConfig& config, int workers) {
    config.validate();
    const auto t0 = steady::now();

    // One splitmix64 chain from the master seed, consumed in a fixed order,
    // gives every design and trace its own deterministic stream.
    std::uint64_t state = config.seed;
    const std::uint64_t train_design_seed = splitmix64(state);
    const std::uint64_t test_design_seed = splitmix64(state);
    const std::uint64_t fresh_design_seed = splitmix64(state);

    const auto mapping = envelope_mapping(config);
    auto sampled = [&](std::size_t n, std::uint64_t design_seed) {
        DesignMatrix design = latin_hypercube(n, config.grid.size(), design_seed);
        design.mapping = mapping;
        return design;
    };

    std::vector<DriveCycleTrace> train_traces;
    train_traces.reserve(config.train_cycles);
    for (std::size_t i = 0; i < config.train_cycles; ++i) {
        train_traces.push_back(generate_commute_trace("train-" + std::to_string(i),
                                                      splitmix64(state), config.trace_samples));
    }
    const DriveCycleTrace shared_trace =
        generate_commute_trace("test-shared", splitmix64(state), config.trace_samples);
    std::vector<DriveCycleTrace> fresh_traces;
    fresh_traces.reserve(config.test_cycles);
    for (std::size_t i = 0; i < config.test_cycles; ++i) {
        fresh_traces.push_back(generate_commute_trace("test-1b-" + std::to_string(i),
                                                      splitmix64(state), config.trace_samples));
    }

    const auto data_dir = config.output_dir / "data";
    GenerateResult result;

    auto run_regime = [&](std::size_t slot, CaseListSpec spec, const DesignMatrix& design) {
        spec.dtheta = config.dtheta;
        spec.output_path = data_dir / regime_names()[slot];
        result.regimes[slot] =
            run_cases(spec, config.geometry, config.fluid, config.vehicle, workers);
        write_design(design, spec.output_path / "design.csv");
    };

    {
        // train-data-1: every cycle is its own commute at its own sampled point
        const DesignMatrix design = sampled(config.train_cycles, train_design_seed);
        const Eigen::MatrixXd pts = design.rescaled();
        CaseListSpec spec;
        spec.traces = train_traces;
        for (std::size_t i = 0; i < config.train_cycles; ++i)
            spec.cases.push_back({i, point_from_row(pts, static_cast<Eigen::Index>(i))});
        spec.seed = train_design_seed;
        run_regime(0, std::move(spec), design);
    }

    const DesignMatrix test_design = sampled(config.test_cycles, test_design_seed);
    const Eigen::MatrixXd test_pts = test_design.rescaled();
    {
        // test-data-1a: one shared commute under the sampled test points
        CaseListSpec spec;
        spec.traces = {shared_trace};
        for (std::size_t i = 0; i < config.test_cycles; ++i)
            spec.cases.push_back({0, point_from_row(test_pts, static_cast<Eigen::Index>(i))});
        spec.seed = test_design_seed;
        run_regime(1, std::move(spec), test_design);
    }
    {
        // test-data-1b: fresh commutes at their own sampled points
        const DesignMatrix design = sampled(config.test_cycles, fresh_design_seed);
        const Eigen::MatrixXd pts = design.rescaled();
        CaseListSpec spec;
        spec.traces = fresh_traces;
        for (std::size_t i = 0; i < config.test_cycles; ++i)
            spec.cases.push_back({i, point_from_row(pts, static_cast<Eigen::Index>(i))});
        spec.seed = fresh_design_seed;
        run_regime(2, std::move(spec), design);
    }
    {
        // test-data-2: the 1a cases rerun under the fuel/rpm shift
        CaseListSpec spec;
        spec.traces = {shared_trace};
        for (std::size_t i = 0; i < config.test_cycles; ++i)
            spec.cases.push_back({0, point_from_row(test_pts, static_cast<Eigen::Index>(i))});
        spec.seed = test_design_seed;
        spec.shift = config.shift;
        run_regime(3, std::move(spec), test_design);
    }

    result.wall_seconds = seconds_since(t0);

    json manifest;
    manifest["config_hash"] = config_hash(config);
    manifest["config"] = config_to_json(config);
    manifest["workers"] = workers;
    manifest["design_seeds"] = {{"train", train_design_seed},
                                {"test", test_design_seed},
                                {"fresh", fresh_design_seed}};
    json regimes;
    for (std::size_t slot = 0; slot < result.regimes.size(); ++slot) {
        const auto& summary = result.regimes[slot];
        regimes[regime_names()[slot]] = {{"cases", summary.cases},
                                         {"rows_written", summary.rows_written},
                                         {"flagged_rows", summary.flagged_rows},
                                         {"wall_seconds", summary.wall_seconds}};
    }
    manifest["regimes"] = regimes;
    manifest["wall_seconds"] = result.wall_seconds;
    result.manifest_path = config.output_dir / "manifest.json";
    write_json_file(manifest, result.manifest_path);
    return result;
}

TrainOutcome cmd_train(const ExperimentConfig& config, const std::string& method) {
    config.validate();
    const auto& methods = method_names();
    if (std::find(methods.begin(), methods.end(), method) == methods.end())
        throw ConfigError("unknown method \"" + method + "\"");

    const Dataset raw = read_csv(regime_csv(config, regime_names()[0]));
    const ScalerParams scalers = fit_scalers(raw);
    const Dataset scaled = transform(raw, scalers);

    const auto models_dir = config.output_dir / "models";
    std::filesystem::create_directories(models_dir);

    TrainOutcome outcome;
    outcome.rows = raw.rows();
    outcome.model_path = models_dir / ("model-" + method + ".json");

    const auto t0 = steady::now();
    if (method == "dnn") {
        MlpModel model = init_model(config.network, config.init_seed);
        model.scalers = scalers;
        TrainResult fit = train(model, scaled, config.train);
        outcome.train_seconds = seconds_since(t0);
        outcome.loss_history = std::move(fit.loss_history);
        save_model(fit.model, outcome.model_path);

        csv::Table losses;
        losses.header = {"epoch", "loss"};
        for (std::size_t e = 0; e < outcome.loss_history.size(); ++e) {
            losses.rows.push_back(
                {std::to_string(e + 1), csv::format_double(outcome.loss_history[e])});
        }
        csv::write_table(losses, models_dir / "loss-dnn.csv");
    } else {
        BaselineModel model = fit_baseline(config, method, scaled);
        outcome.train_seconds = seconds_since(t0);
        model.scalers = scalers;
        save_baseline(model, outcome.model_path);
    }
    update_models_manifest(config, method, outcome);
    return outcome;
}

EvaluateResult cmd_evaluate(const ExperimentConfig& config,
                            const std::vector<std::filesystem::path>& model_files,
                            const std::string& regime) {
    config.validate();
    const auto& regimes = regime_names();
    if (std::find(regimes.begin(), regimes.end(), regime) == regimes.end())
        throw ConfigError("unknown regime \"" + regime + "\"");
    if (model_files.empty()) throw ConfigError("evaluate needs at least one model file");

    const Dataset raw = read_csv(regime_csv(config, regime));

    EvaluateResult result;
    json models_meta = json::array();
    for (const auto& file : model_files) {
        const json doc = model_io::load_document(file);
        const std::string name = model_display_name(file);
        Eigen::MatrixXd predicted;
        double inference_seconds = 0.0;
        if (doc.value("kind", std::string()) == "dnn") {
            const MlpModel model = load_model(file);
            const auto t0 = steady::now();
            predicted = predict(model, raw.inputs);
            inference_seconds = seconds_since(t0);
        } else {
            const BaselineModel model = load_baseline(file);
            const auto t0 = steady::now();
            predicted = predict(model, raw.inputs);
            inference_seconds = seconds_since(t0);
        }
        MetricReport report = evaluate_predictions(name, raw.outputs, predicted);
        report.inference_seconds = inference_seconds;
        report.train_seconds = manifest_train_seconds(config, name);
        result.reports.push_back(std::move(report));
        models_meta.push_back(
            {{"name", name}, {"file", file.string()}, {"inference_seconds", inference_seconds}});
    }

    const auto report_dir = config.output_dir / "reports" / regime;
    std::filesystem::create_directories(report_dir);
    result.csv_path = report_dir / "report.csv";
    result.svg_path = report_dir / "report.svg";
    emit_report(result.reports, result.csv_path, result.svg_path);

    json manifest;
    manifest["config_hash"] = config_hash(config);
    manifest["regime"] = regime;
    manifest["points"] = raw.rows();
    manifest["models"] = models_meta;
    write_json_file(manifest, report_dir / "manifest.json");
    return result;
}

SizeStudyResult cmd_size_study(const ExperimentConfig& config,
                               const std::vector<std::size_t>& sizes) {
    config.validate();
    if (sizes.empty()) throw ConfigError("size study needs at least one size");
    for (const auto size : sizes) {
        if (size == 0 || size % config.trace_samples != 0)
            throw ConfigError("size " + std::to_string(size) + " is not a whole number of " +
                              std::to_string(config.trace_samples) + "-row cycles");
    }

    const Dataset raw = read_csv(regime_csv(config, regime_names()[0]));
    for (const auto size : sizes) {
        if (size > raw.rows())
            throw ConfigError("size " + std::to_string(size) + " exceeds the " +
                              std::to_string(raw.rows()) + " training rows");
    }
    const Dataset test_raw = read_csv(regime_csv(config, regime_names()[1]));

    const auto models_dir = config.output_dir / "models";
    const auto report_dir = config.output_dir / "reports" / "size-study";
    std::filesystem::create_directories(models_dir);
    std::filesystem::create_directories(report_dir);

    SizeStudyResult result;
    json timings = json::array();
    for (const auto size : sizes) {
        // whole cycles from the front of the training regime, own scalers
        const Dataset sub = subset(raw, 0, size);
        const ScalerParams scalers = fit_scalers(sub);
        MlpModel model = init_model(config.network, config.init_seed);
        model.scalers = scalers;
        const auto t0 = steady::now();
        const TrainResult fit = train(model, transform(sub, scalers), config.train);
        const double train_seconds = seconds_since(t0);

        const auto path = models_dir / ("model-dnn-" + std::to_string(size) + ".json");
        save_model(fit.model, path);
        result.model_paths.push_back(path);

        const Eigen::MatrixXd predicted = predict(fit.model, test_raw.inputs);
        const MetricReport report = evaluate_predictions("dnn-" + std::to_string(size),
                                                         test_raw.outputs, predicted);
        for (std::size_t c = 0; c < kNumOutputs; ++c)
            result.rows.push_back({size, output_names()[c], report.outputs[c].mape});
        timings.push_back({{"size", size}, {"train_seconds", train_seconds}});
    }

    csv::Table table;
    table.header = {"size", "output", "mape"};
    for (const auto& row : result.rows)
        table.rows.push_back({std::to_string(row.size), row.output, csv::format_double(row.mape)});
    result.csv_path = report_dir / "report.csv";
    csv::write_table(table, result.csv_path);

    json manifest;
    manifest["config_hash"] = config_hash(config);
    manifest["sizes"] = sizes;
    manifest["evaluated_on"] = regime_names()[1];
    manifest["timings"] = timings;
    write_json_file(manifest, report_dir / "manifest.json");
    return result;
}

TransferResult cmd_transfer(const ExperimentConfig& config) {
    config.validate();
    const auto models_dir = config.output_dir / "models";
    const MlpModel base = load_model(models_dir / "model-dnn.json");
    std::vector<BaselineModel> baselines;
    for (std::size_t m = 1; m < method_names().size(); ++m)
        baselines.push_back(load_baseline(models_dir / ("model-" + method_names()[m] + ".json")));

    const Dataset shifted = read_csv(regime_csv(config, regime_names()[3]));
    if (config.transfer_rows >= shifted.rows())
        throw ConfigError("transfer.rows leaves no held-out rows in " + regime_names()[3]);
    const Dataset adapt_raw = subset(shifted, 0, config.transfer_rows);
    const Dataset eval_raw = subset(shifted, config.transfer_rows, shifted.rows());

    TransferResult result;
    result.adaptation_rows = adapt_raw.rows();
    result.eval_rows = eval_raw.rows();

    auto score = [&](const std::string& name, const Eigen::MatrixXd& predicted) {
        return evaluate_predictions(name, eval_raw.outputs, predicted);
    };

    result.before.push_back(score("dnn", predict(base, eval_raw.inputs)));
    for (std::size_t m = 0; m < baselines.size(); ++m)
        result.before.push_back(score(method_names()[m + 1], predict(baselines[m], eval_raw.inputs)));

    // fine-tune the network on the first shifted cycle, early layers frozen
    TrainConfig adapt_config = config.train;
    adapt_config.epochs = config.transfer_epochs;
    const auto t_adapt = steady::now();
    const TrainResult adapted =
        transfer_train(base, transform(adapt_raw, base.scalers), adapt_config);
    const double adapt_seconds = seconds_since(t_adapt);
    save_model(adapted.model, models_dir / "model-dnn-transfer.json");

    result.frozen_bits_identical = true;
    for (std::size_t l = 0; l < 3; ++l) {
        result.frozen_bits_identical = result.frozen_bits_identical &&
                                       same_bits(base.weights[l], adapted.model.weights[l]) &&
                                       same_bits(base.biases[l], adapted.model.biases[l]);
    }

    // baselines have no incremental path: refit from scratch on the training
    // regime plus the same adaptation rows, scalers included
    const Dataset train_raw = read_csv(regime_csv(config, regime_names()[0]));
    const Dataset union_raw = concat_rows(train_raw, adapt_raw);
    const ScalerParams union_scalers = fit_scalers(union_raw);
    const Dataset union_scaled = transform(union_raw, union_scalers);

    result.after.push_back(score("dnn", predict(adapted.model, eval_raw.inputs)));
    json retrain_meta = json::array();
    for (std::size_t m = 1; m < method_names().size(); ++m) {
        const std::string& tag = method_names()[m];
        const auto t0 = steady::now();
        BaselineModel model = fit_baseline(config, tag, union_scaled);
        const double fit_seconds = seconds_since(t0);
        model.scalers = union_scalers;
        save_baseline(model, models_dir / ("model-" + tag + "-retrain.json"));
        result.after.push_back(score(tag, predict(model, eval_raw.inputs)));
        retrain_meta.push_back({{"method", tag}, {"train_seconds", fit_seconds}});
    }

    const auto report_dir = config.output_dir / "reports" / "transfer";
    std::filesystem::create_directories(report_dir);
    result.before_csv = report_dir / "before.csv";
    result.after_csv = report_dir / "after.csv";
    emit_report(result.before, result.before_csv, report_dir / "before.svg");
    emit_report(result.after, result.after_csv, report_dir / "after.svg");

    json manifest;
    manifest["config_hash"] = config_hash(config);
    manifest["adaptation_rows"] = result.adaptation_rows;
    manifest["eval_rows"] = result.eval_rows;
    manifest["frozen_bits_identical"] = result.frozen_bits_identical;
    manifest["adapt_epochs"] = config.transfer_epochs;
    manifest["adapt_seconds"] = adapt_seconds;
    manifest["retrain"] = retrain_meta;
    write_json_file(manifest, report_dir / "manifest.json");
    return result;
}

ReportResult cmd_report(const ExperimentConfig& config) {
    config.validate();
    std::vector<std::filesystem::path> model_files;
    for (const auto& tag : method_names()) {
        const auto path = config.output_dir / "models" / ("model-" + tag + ".json");
        if (std::filesystem::exists(path)) model_files.push_back(path);
    }
    if (model_files.empty())
        throw IoError("no model files under " + (config.output_dir / "models").string());

    ReportResult result;
    csv::Table summary;
    summary.header = {"regime", "model", "output", "metric", "value"};
    for (const auto& regime : regime_names()) {
        if (!std::filesystem::exists(regime_csv(config, regime))) continue;
        const EvaluateResult scored = cmd_evaluate(config, model_files, regime);
        result.regimes.push_back(regime);
        for (const auto& report : scored.reports) {
            for (std::size_t c = 0; c < kNumOutputs; ++c) {
                summary.rows.push_back({regime, report.model, output_names()[c], "pearson_r",
                                        csv::format_double(report.outputs[c].pearson_r)});
                summary.rows.push_back({regime, report.model, output_names()[c], "mape",
                                        csv::format_double(report.outputs[c].mape)});
            }
        }
    }
    if (result.regimes.empty())
        throw IoError("no generated regimes under " + (config.output_dir / "data").string());

    const auto reports_dir = config.output_dir / "reports";
    std::filesystem::create_directories(reports_dir);
    result.summary_path = reports_dir / "summary.csv";
    csv::write_table(summary, result.summary_path);
    return result;
}

}  // namespace ottosim
