#include "ottosim/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ottosim/errors.hpp"
#include "ottosim/table.hpp"

namespace ottosim {

double pearson_r(const std::vector<double>& observed, const std::vector<double>& predicted) {
    if (observed.size() != predicted.size())
        throw ConfigError("pearson_r: series lengths differ");
    const std::size_t n = observed.size();
    if (n < 2) throw ConfigError("pearson_r: need at least two points");

    double mean_o = 0.0, mean_p = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_o += observed[i];
        mean_p += predicted[i];
    }
    mean_o /= static_cast<double>(n);
    mean_p /= static_cast<double>(n);

    double cov = 0.0, var_o = 0.0, var_p = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = observed[i] - mean_o;
        const double b = predicted[i] - mean_p;
        cov += a * b;
        var_o += a * a;
        var_p += b * b;
    }
    if (var_o == 0.0) throw ZeroVariance("pearson_r: observed series is constant");
    if (var_p == 0.0) throw ZeroVariance("pearson_r: predicted series is constant");
    return std::clamp(cov / std::sqrt(var_o * var_p), -1.0, 1.0);
}

double mape(const std::vector<double>& observed, const std::vector<double>& predicted) {
    if (observed.size() != predicted.size()) throw ConfigError("mape: series lengths differ");
    if (observed.empty()) throw ConfigError("mape: empty series");
    double sum = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (observed[i] == 0.0) throw ZeroObserved(i);
        sum += std::fabs(observed[i] - predicted[i]) / std::fabs(observed[i]);
    }
    return 100.0 * sum / static_cast<double>(observed.size());
}

MetricReport evaluate_predictions(const std::string& model, const Eigen::MatrixXd& observed,
                                  const Eigen::MatrixXd& predicted) {
    if (observed.rows() != predicted.rows() || observed.cols() != predicted.cols())
        throw ConfigError("evaluate_predictions: shape mismatch");
    if (observed.cols() != static_cast<Eigen::Index>(kNumOutputs))
        throw ConfigError("evaluate_predictions: expected 5 output columns");

    MetricReport report;
    report.model = model;
    report.points = static_cast<std::size_t>(observed.rows());

    for (std::size_t c = 0; c < kNumOutputs; ++c) {
        const auto col = static_cast<Eigen::Index>(c);
        std::vector<double> obs_all, pred_all, obs_nz, pred_nz;
        obs_all.reserve(report.points);
        pred_all.reserve(report.points);
        for (Eigen::Index r = 0; r < observed.rows(); ++r) {
            obs_all.push_back(observed(r, col));
            pred_all.push_back(predicted(r, col));
            if (observed(r, col) != 0.0) {
                obs_nz.push_back(observed(r, col));
                pred_nz.push_back(predicted(r, col));
            }
        }
        OutputMetrics& m = report.outputs[c];
        m.excluded_zeros = obs_all.size() - obs_nz.size();
        m.pearson_r = pearson_r(obs_all, pred_all);
        m.mape = mape(obs_nz, pred_nz);
    }
    return report;
}

namespace {

constexpr int kSvgWidth = 760;
constexpr int kSvgHeight = 420;
constexpr double kPlotLeft = 70.0;
constexpr double kPlotRight = 590.0;
constexpr double kPlotTop = 50.0;
constexpr double kPlotBottom = 370.0;

const char* palette(std::size_t i) {
    static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    return kColors[i % (sizeof kColors / sizeof kColors[0])];
}

std::string trim_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string svg_parallel_mape(const std::vector<MetricReport>& reports) {
    const std::size_t n_axes = kNumOutputs;
    std::array<double, kNumOutputs> axis_max{};
    for (const auto& rep : reports)
        for (std::size_t c = 0; c < n_axes; ++c)
            axis_max[c] = std::max(axis_max[c], rep.outputs[c].mape);
    for (auto& m : axis_max) m = m > 0.0 ? 1.05 * m : 1.0;

    auto axis_x = [&](std::size_t c) {
        return kPlotLeft + (kPlotRight - kPlotLeft) * static_cast<double>(c) /
                               static_cast<double>(n_axes - 1);
    };
    auto value_y = [&](std::size_t c, double v) {
        return kPlotBottom - (kPlotBottom - kPlotTop) * (v / axis_max[c]);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kSvgWidth) +
           "\" height=\"" + std::to_string(kSvgHeight) + "\" viewBox=\"0 0 " +
           std::to_string(kSvgWidth) + " " + std::to_string(kSvgHeight) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + trim_number((kPlotLeft + kPlotRight) / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
           "MAPE (%) by output</text>\n";

    const auto& names = output_names();
    for (std::size_t c = 0; c < n_axes; ++c) {
        const double x = axis_x(c);
        svg += "<line x1=\"" + trim_number(x) + "\" y1=\"" + trim_number(kPlotTop) + "\" x2=\"" +
               trim_number(x) + "\" y2=\"" + trim_number(kPlotBottom) +
               "\" stroke=\"#888\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + trim_number(x) + "\" y=\"" + trim_number(kPlotBottom + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               names[c] + "</text>\n";
        svg += "<text x=\"" + trim_number(x) + "\" y=\"" + trim_number(kPlotTop - 8) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\" "
               "fill=\"#555\">" +
               trim_number(axis_max[c]) + "</text>\n";
    }

    for (std::size_t i = 0; i < reports.size(); ++i) {
        std::string pts;
        for (std::size_t c = 0; c < n_axes; ++c) {
            if (c) pts += ' ';
            pts += trim_number(axis_x(c)) + "," +
                   trim_number(value_y(c, reports[i].outputs[c].mape));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(palette(i)) +
               "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
        const double ly = kPlotTop + 18.0 * static_cast<double>(i);
        svg += "<line x1=\"610\" y1=\"" + trim_number(ly) + "\" x2=\"640\" y2=\"" +
               trim_number(ly) + "\" stroke=\"" + palette(i) + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"646\" y=\"" + trim_number(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + reports[i].model +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace

void emit_report(const std::vector<MetricReport>& reports, const std::filesystem::path& csv_path,
                 const std::filesystem::path& svg_path) {
    if (reports.empty()) throw ConfigError("emit_report: no reports");

    csv::Table table;
    table.header = {"model", "output", "metric", "value"};
    const auto& names = output_names();
    for (const auto& rep : reports) {
        for (std::size_t c = 0; c < kNumOutputs; ++c) {
            table.rows.push_back(
                {rep.model, names[c], "pearson_r", csv::format_double(rep.outputs[c].pearson_r)});
            table.rows.push_back(
                {rep.model, names[c], "mape", csv::format_double(rep.outputs[c].mape)});
        }
    }
    csv::write_table(table, csv_path);

    std::ofstream svg(svg_path);
    if (!svg) throw IoError("cannot open " + svg_path.string());
    svg << svg_parallel_mape(reports);
    if (!svg) throw IoError("failed writing " + svg_path.string());
}

}  // namespace ottosim
