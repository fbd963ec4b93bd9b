#pragma once

// JSON model-file scaffolding shared by the network and baseline
// serializers: one format tag, one version, common matrix and scaler
// encodings, and uniform error mapping when a file is opened.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "ottosim/dataset.hpp"
#include "ottosim/errors.hpp"

namespace ottosim::model_io {

inline constexpr const char* kFormat = "ottosim-model";
inline constexpr int kVersion = 1;

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows) {
    if (!rows.is_array()) throw SchemaMismatch("matrix field is not an array");
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = r == 0 ? 0 : static_cast<Eigen::Index>(rows.at(0).size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != c)
            throw SchemaMismatch("matrix rows have uneven lengths");
        for (Eigen::Index j = 0; j < c; ++j)
            m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
    return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = arr.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

inline nlohmann::json scaler_list_to_json(const std::vector<ColumnScaler>& cols) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : cols)
        arr.push_back({{"min", c.min}, {"max", c.max}, {"mean", c.mean}, {"std", c.std}});
    return arr;
}

inline std::vector<ColumnScaler> scaler_list_from_json(const nlohmann::json& arr) {
    std::vector<ColumnScaler> cols;
    for (const auto& item : arr) {
        ColumnScaler c;
        c.min = item.at("min").get<double>();
        c.max = item.at("max").get<double>();
        c.mean = item.at("mean").get<double>();
        c.std = item.at("std").get<double>();
        cols.push_back(c);
    }
    return cols;
}

inline nlohmann::json scalers_to_json(const ScalerParams& scalers) {
    return {{"fitted_on", scalers.fitted_on},
            {"inputs", scaler_list_to_json(scalers.input_cols)},
            {"outputs", scaler_list_to_json(scalers.output_cols)}};
}

inline ScalerParams scalers_from_json(const nlohmann::json& node) {
    ScalerParams scalers;
    scalers.fitted_on = node.at("fitted_on").get<std::size_t>();
    scalers.input_cols = scaler_list_from_json(node.at("inputs"));
    scalers.output_cols = scaler_list_from_json(node.at("outputs"));
    return scalers;
}

inline void save_document(const nlohmann::json& doc, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string());
    out << doc.dump(1) << "\n";
    if (!out) throw IoError("failed writing " + path.string());
}

// Opens, parses, and checks the format tag and version. The caller still
// owns the kind check, which differs between networks and baselines.
inline nlohmann::json load_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model file: ") + e.what(), 0, e.byte);
    }
    try {
        if (doc.at("format").get<std::string>() != kFormat)
            throw SchemaMismatch("not a model file: " + path.string());
        if (doc.at("version").get<int>() != kVersion)
            throw VersionMismatch("unsupported model version in " + path.string());
    } catch (const nlohmann::json::exception& e) {
        throw SchemaMismatch(std::string("model file schema: ") + e.what());
    }
    return doc;
}

}  // namespace ottosim::model_io
