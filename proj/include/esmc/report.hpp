#pragma once

// Serialization of results: CSV tables with a '#'-prefixed metadata header,
// JSON estimate reports, and chain traces. Numbers are written in the
// shortest form that round-trips, so reruns are byte-identical.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "esmc/chain.hpp"
#include "esmc/estimators.hpp"

namespace esmc {

inline std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

using CsvCell = std::variant<double, std::int64_t, std::string>;

inline std::string format_cell(const CsvCell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    return std::get<std::string>(cell);
}

/// Ordered key/value pairs written as "# key: value" lines.
class Metadata {
public:
    Metadata& add(std::string key, std::string value) {
        entries_.emplace_back(std::move(key), std::move(value));
        return *this;
    }
    Metadata& add(std::string key, double value) { return add(std::move(key), format_number(value)); }
    Metadata& add(std::string key, std::int64_t value) {
        return add(std::move(key), std::to_string(value));
    }
    Metadata& add(std::string key, int value) {
        return add(std::move(key), static_cast<std::int64_t>(value));
    }
    Metadata& add(std::string key, std::uint64_t value) {
        return add(std::move(key), std::to_string(value));
    }

    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
        return entries_;
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j = nlohmann::ordered_json::object();
        for (const auto& [k, v] : entries_) j[k] = v;
        return j;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

class CsvTable {
public:
    CsvTable(Metadata meta, std::vector<std::string> columns)
        : meta_(std::move(meta)), columns_(std::move(columns)) {}

    void add_row(std::vector<CsvCell> row) {
        if (row.size() != columns_.size()) {
            throw InternalError("CsvTable: row has " + std::to_string(row.size()) +
                                " cells, expected " + std::to_string(columns_.size()));
        }
        rows_.push_back(std::move(row));
    }

    std::size_t size() const noexcept { return rows_.size(); }
    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<CsvCell>>& rows() const noexcept { return rows_; }

    void write(std::ostream& os) const {
        for (const auto& [k, v] : meta_.entries()) os << "# " << k << ": " << v << '\n';
        write_line(os, columns_);
        for (const auto& row : rows_) {
            std::vector<std::string> cells;
            cells.reserve(row.size());
            for (const auto& c : row) cells.push_back(format_cell(c));
            write_line(os, cells);
        }
    }

private:
    static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) os << ',';
            os << cells[i];
        }
        os << '\n';
    }

    Metadata meta_;
    std::vector<std::string> columns_;
    std::vector<std::vector<CsvCell>> rows_;
};

/// The `config` object of a JSON report.
inline nlohmann::ordered_json config_json(const ProblemConfig& cfg,
                                          std::optional<double> sigma,
                                          const CsaConfig* csa = nullptr) {
    nlohmann::ordered_json j;
    j["theta"] = cfg.theta();
    j["lambda"] = cfg.lambda();
    j["n"] = cfg.dim();
    if (sigma) j["sigma"] = *sigma;
    if (csa != nullptr) {
        j["csa"] = {{"c", csa->c()},
                    {"d_sigma", csa->d_sigma()},
                    {"rule", csa->rule() == SigmaRule::squared_norm ? "squared_norm" : "norm"}};
    }
    return j;
}

/// NaN and infinities have no JSON encoding; they become null.
inline nlohmann::ordered_json json_number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

inline nlohmann::ordered_json report_json(const std::string& quantity,
                                          nlohmann::ordered_json config, const EstimateReport& r,
                                          std::uint64_t seed,
                                          std::optional<Verdict> verdict = std::nullopt) {
    nlohmann::ordered_json j;
    j["quantity"] = quantity;
    j["config"] = std::move(config);
    j["value"] = json_number(r.value);
    j["std_error"] = json_number(r.std_error);
    j["n_samples"] = r.n_samples;
    j["burn_in"] = r.burn_in;
    j["batch_count"] = r.batch_count;
    j["seed"] = seed;
    if (verdict) j["verdict"] = to_string(*verdict);
    return j;
}

/// Trace rows as CSV. log_sigma is written for CSA runs, f_value for
/// full-trajectory runs.
inline CsvTable trace_table(Metadata meta, const std::vector<TraceRow>& rows, bool log_sigma,
                            bool f_value) {
    std::vector<std::string> cols = {"t", "delta", "g_dot_n", "g1", "g2"};
    if (log_sigma) cols.emplace_back("log_sigma");
    if (f_value) cols.emplace_back("f_value");
    CsvTable table(std::move(meta), cols);
    for (const TraceRow& r : rows) {
        std::vector<CsvCell> cells = {r.t, r.delta, r.g_dot_n, r.g1, r.g2};
        if (log_sigma) cells.emplace_back(r.log_sigma);
        if (f_value) cells.emplace_back(r.f_value);
        table.add_row(std::move(cells));
    }
    return table;
}

}  // namespace esmc
