#pragma once

// Plain-text serialization: CSV with a header row, 17 significant digits and
// LF line endings, plus key=value sidecar files. Files are written to a
// temporary name in the target directory and renamed into place.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "fracemb/error.hpp"
#include "fracemb/grid.hpp"
#include "fracemb/residual.hpp"
#include "fracemb/stochastic_time.hpp"

namespace fracemb {

/// Shortest round-trip independent rendering: always 17 significant digits.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Writes `content` to `path` through a sibling temporary file and a rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Row-oriented CSV builder.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(const std::vector<double>& row) {
        if (row.size() != header_.size()) throw mismatch_error("CSV row width does not match header");
        rows_.push_back(row);
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_.size(); }

    [[nodiscard]] std::string str() const {
        std::string s;
        for (std::size_t c = 0; c < header_.size(); ++c) {
            if (c) s += ',';
            s += header_[c];
        }
        s += '\n';
        for (const auto& row : rows_) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) s += ',';
                s += format_double(row[c]);
            }
            s += '\n';
        }
        return s;
    }

    void write(const std::filesystem::path& path) const { write_file_atomic(path, str()); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<double>> rows_;
};

/// Ordered key=value text, one pair per line.
class KeyValueFile {
public:
    void set(const std::string& key, const std::string& value) {
        for (auto& kv : entries_)
            if (kv.first == key) {
                kv.second = value;
                return;
            }
        entries_.emplace_back(key, value);
    }
    void set(const std::string& key, double value) { set(key, format_double(value)); }

    [[nodiscard]] std::string str() const {
        std::string s;
        for (const auto& [k, v] : entries_) s += k + "=" + v + "\n";
        return s;
    }

    void write(const std::filesystem::path& path) const { write_file_atomic(path, str()); }

    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// `t,<prefix>0,...` table of a trajectory.
inline CsvTable trajectory_table(const Trajectory& y, const std::string& prefix = "x") {
    std::vector<std::string> header{"t"};
    for (std::size_t c = 0; c < y.dim(); ++c) header.push_back(prefix + std::to_string(c));
    CsvTable t(std::move(header));
    std::vector<double> row(y.dim() + 1);
    for (std::size_t i = 0; i < y.size(); ++i) {
        row[0] = y.grid().node(i);
        for (std::size_t c = 0; c < y.dim(); ++c) row[c + 1] = y(i, c);
        t.add_row(row);
    }
    return t;
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& y) {
    trajectory_table(y).write(path);
}

/// Sidecar metadata for a solution CSV: `<csv>.meta`.
inline std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
    std::filesystem::path p = csv;
    p += ".meta";
    return p;
}

/// `t,path0,path1,...` over an ensemble of internal-time paths.
inline CsvTable ensemble_table(const SubordinatorEnsemble& e) {
    std::vector<std::string> header{"t"};
    for (std::size_t k = 0; k < e.paths; ++k) header.push_back("path" + std::to_string(k));
    CsvTable t(std::move(header));
    std::vector<double> row(e.paths + 1);
    for (std::size_t i = 0; i < e.grid.size(); ++i) {
        row[0] = e.grid.node(i);
        for (std::size_t k = 0; k < e.paths; ++k) row[k + 1] = e.at(k, i);
        t.add_row(row);
    }
    return t;
}

/// `t,mean,stderr`.
inline CsvTable stats_table(const EnsembleStats& s) {
    CsvTable t({"t", "mean", "stderr"});
    for (std::size_t i = 0; i < s.grid.size(); ++i) t.add_row({s.grid.node(i), s.mean[i], s.stderr[i]});
    return t;
}

/// `t,residual0,...` plus the summary text.
inline CsvTable residual_table(const ResidualReport& r) { return trajectory_table(r.residual, "residual"); }

inline std::string residual_summary(const ResidualReport& r) {
    KeyValueFile kv;
    kv.set("kind", std::string(to_string(r.kind)));
    kv.set("max_norm", r.max_norm);
    kv.set("l2_norm", r.l2_norm);
    kv.set("interior_window", std::to_string(r.window));
    kv.set("n", std::to_string(r.grid().steps()));
    return kv.str();
}

}  // namespace fracemb
