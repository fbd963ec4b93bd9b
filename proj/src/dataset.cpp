#include "ottosim/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "ottosim/errors.hpp"
#include "ottosim/table.hpp"

namespace ottosim {

const std::vector<std::string>& input_names() {
    static const std::vector<std::string> names{
        "ambient_temp_k", "humidity",       "valve_timing_deg", "compression_ratio",
        "spark_deg",      "gear_ratio",     "fuel_rate_kg_s",   "afr",
        "inlet_pressure_pa", "intake_air_mass_kg"};
    return names;
}

const std::vector<std::string>& output_names() {
    static const std::vector<std::string> names{
        "exhaust_temp_k", "exhaust_pressure_pa", "no_ppm", "co_ppm", "torque_nm"};
    return names;
}

void Dataset::validate() const {
    const auto n = inputs.rows();
    if (inputs.cols() != static_cast<Eigen::Index>(kNumInputs))
        throw ConfigError("dataset has " + std::to_string(inputs.cols()) + " input columns");
    if (outputs.cols() != static_cast<Eigen::Index>(kNumOutputs))
        throw ConfigError("dataset has " + std::to_string(outputs.cols()) + " output columns");
    if (outputs.rows() != n || trace_id.size() != static_cast<std::size_t>(n) ||
        t.size() != static_cast<std::size_t>(n))
        throw ConfigError("dataset row counts disagree");
    if (!inputs.allFinite() || !outputs.allFinite())
        throw ConfigError("dataset contains non-finite values");
}

Dataset subset(const Dataset& data, std::size_t begin, std::size_t end) {
    if (begin > end || end > data.rows())
        throw ConfigError("dataset subset range out of bounds");
    const auto b = static_cast<Eigen::Index>(begin);
    const auto n = static_cast<Eigen::Index>(end - begin);
    Dataset out;
    out.inputs = data.inputs.middleRows(b, n);
    out.outputs = data.outputs.middleRows(b, n);
    out.trace_id.assign(data.trace_id.begin() + static_cast<std::ptrdiff_t>(begin),
                        data.trace_id.begin() + static_cast<std::ptrdiff_t>(end));
    out.t.assign(data.t.begin() + static_cast<std::ptrdiff_t>(begin),
                 data.t.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

namespace {

std::vector<ColumnScaler> fit_columns(const Eigen::MatrixXd& m,
                                      const std::vector<std::string>& names) {
    std::vector<ColumnScaler> cols(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        ColumnScaler& s = cols[static_cast<std::size_t>(j)];
        s.min = m.col(j).minCoeff();
        s.max = m.col(j).maxCoeff();
        if (s.max <= s.min) throw ConstantColumn(names[static_cast<std::size_t>(j)]);
        Eigen::ArrayXd u = (m.col(j).array() - s.min) / (s.max - s.min);
        s.mean = u.mean();
        s.std = std::sqrt((u - s.mean).square().mean());  // population std
        if (!(s.std > 0.0))
            throw ZeroVariance("zero variance after min-max: " + names[static_cast<std::size_t>(j)]);
    }
    return cols;
}

void apply_forward(Eigen::MatrixXd& m, const std::vector<ColumnScaler>& cols) {
    if (static_cast<std::size_t>(m.cols()) != cols.size())
        throw SchemaMismatch("scaler column count does not match dataset");
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const ColumnScaler& s = cols[static_cast<std::size_t>(j)];
        m.col(j) = (((m.col(j).array() - s.min) / (s.max - s.min)) - s.mean) / s.std;
    }
}

void apply_inverse(Eigen::MatrixXd& m, const std::vector<ColumnScaler>& cols) {
    if (static_cast<std::size_t>(m.cols()) != cols.size())
        throw SchemaMismatch("scaler column count does not match dataset");
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const ColumnScaler& s = cols[static_cast<std::size_t>(j)];
        m.col(j) = ((m.col(j).array() * s.std + s.mean) * (s.max - s.min) + s.min);
    }
}

}  // namespace

ScalerParams fit_scalers(const Dataset& data) {
    data.validate();
    if (data.rows() < 2) throw ConfigError("need at least two rows to fit scalers");
    ScalerParams params;
    params.input_cols = fit_columns(data.inputs, input_names());
    params.output_cols = fit_columns(data.outputs, output_names());
    params.fitted_on = data.rows();
    return params;
}

Dataset transform(const Dataset& data, const ScalerParams& params) {
    Dataset out = data;
    apply_forward(out.inputs, params.input_cols);
    apply_forward(out.outputs, params.output_cols);
    return out;
}

Dataset inverse_transform(const Dataset& data, const ScalerParams& params) {
    Dataset out = data;
    apply_inverse(out.inputs, params.input_cols);
    apply_inverse(out.outputs, params.output_cols);
    return out;
}

Eigen::MatrixXd transform_inputs(const Eigen::MatrixXd& inputs, const ScalerParams& params) {
    Eigen::MatrixXd out = inputs;
    apply_forward(out, params.input_cols);
    return out;
}

Eigen::MatrixXd inverse_transform_outputs(const Eigen::MatrixXd& outputs,
                                          const ScalerParams& params) {
    Eigen::MatrixXd out = outputs;
    apply_inverse(out, params.output_cols);
    return out;
}

namespace {

constexpr std::size_t kNumColumns = 2 + kNumInputs + kNumOutputs;

std::vector<std::string> expected_header() {
    std::vector<std::string> names{"trace_id", "t"};
    names.insert(names.end(), input_names().begin(), input_names().end());
    names.insert(names.end(), output_names().begin(), output_names().end());
    return names;
}

bool data_line(const std::string& line) { return !line.empty() && line[0] != '#'; }

// Splits on commas in place, parsing each cell as a double.
void parse_row(const std::string& line, std::size_t line_no, double* out) {
    const char* p = line.data();
    const char* end = p + line.size();
    for (std::size_t c = 0; c < kNumColumns; ++c) {
        const char* cell_end = p;
        while (cell_end != end && *cell_end != ',') ++cell_end;
        auto res = std::from_chars(p, cell_end, out[c]);
        if (res.ec != std::errc{} || res.ptr != cell_end)
            throw ParseError("not a number: '" + std::string(p, cell_end) + "'", line_no, c + 1);
        if (!std::isfinite(out[c]))
            throw ParseError("non-finite value", line_no, c + 1);
        if (c + 1 < kNumColumns) {
            if (cell_end == end)
                throw ParseError("expected " + std::to_string(kNumColumns) + " cells", line_no,
                                 c + 1);
            p = cell_end + 1;
        } else if (cell_end != end) {
            throw ParseError("more than " + std::to_string(kNumColumns) + " cells", line_no,
                             kNumColumns + 1);
        }
    }
}

}  // namespace

Dataset read_csv(const std::filesystem::path& path) {
    // pass 1: locate the header and count data rows so matrices can be
    // allocated once
    std::size_t n = 0;
    {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path.string());
        std::string line;
        bool saw_header = false;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!data_line(line)) continue;
            if (!saw_header) {
                saw_header = true;
                continue;
            }
            ++n;
        }
        if (!saw_header) throw ParseError("empty file", 1, 1);
    }

    Dataset data;
    data.inputs.resize(static_cast<Eigen::Index>(n), kNumInputs);
    data.outputs.resize(static_cast<Eigen::Index>(n), kNumOutputs);
    data.trace_id.resize(n);
    data.t.resize(n);

    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    bool saw_header = false;
    std::size_t row = 0;
    double cells[kNumColumns];
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!data_line(line)) continue;
        if (!saw_header) {
            saw_header = true;
            const auto expected = expected_header();
            std::vector<std::string> header;
            std::size_t start = 0;
            while (true) {
                std::size_t pos = line.find(',', start);
                header.push_back(line.substr(start, pos - start));
                if (pos == std::string::npos) break;
                start = pos + 1;
            }
            for (const auto& name : expected) {
                if (std::find(header.begin(), header.end(), name) == header.end())
                    throw SchemaMismatch("missing column: " + name);
            }
            if (header != expected)
                throw SchemaMismatch("columns must appear in the canonical order");
            continue;
        }
        parse_row(line, line_no, cells);
        const auto r = static_cast<Eigen::Index>(row);
        data.trace_id[row] = static_cast<std::int64_t>(std::llround(cells[0]));
        data.t[row] = cells[1];
        for (std::size_t c = 0; c < kNumInputs; ++c)
            data.inputs(r, static_cast<Eigen::Index>(c)) = cells[2 + c];
        for (std::size_t c = 0; c < kNumOutputs; ++c)
            data.outputs(r, static_cast<Eigen::Index>(c)) = cells[2 + kNumInputs + c];
        ++row;
    }
    data.validate();
    return data;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
    data.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");

    const auto header = expected_header();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';

    std::string line;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        line.clear();
        line += std::to_string(data.trace_id[i]);
        line += ',';
        line += csv::format_double(data.t[i]);
        const auto r = static_cast<Eigen::Index>(i);
        for (Eigen::Index c = 0; c < data.inputs.cols(); ++c) {
            line += ',';
            line += csv::format_double(data.inputs(r, c));
        }
        for (Eigen::Index c = 0; c < data.outputs.cols(); ++c) {
            line += ',';
            line += csv::format_double(data.outputs(r, c));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ottosim
