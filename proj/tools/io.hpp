#ifndef CHASM_TOOLS_IO_HPP
#define CHASM_TOOLS_IO_HPP

// File formats used by the command-line tool: CSV streams, JSON configs and
// manifests, JSONL detection records.

#include <chasm/chasm.hpp>

#include <json.hpp>

#include <Eigen/Dense>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace chasm::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

/// 17 significant digits: enough to round-trip any double.
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
            field.remove_suffix(1);
        out.push_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::optional<double> parse_number(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

/// Incremental reader for a numeric CSV stream: one observation per row,
/// optional header on the first line, blank lines ignored.
class CsvReader {
public:
    explicit CsvReader(const fs::path& path) : path_(path), in_(path) {
        if (!in_) throw InvalidArgument("cannot open " + path.string());
    }

    /// Next observation, or nullopt at end of file.
    std::optional<Eigen::VectorXd> next() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const auto fields = split_fields(line);
            Eigen::VectorXd x(static_cast<Eigen::Index>(fields.size()));
            bool numeric = true;
            for (std::size_t i = 0; i < fields.size() && numeric; ++i) {
                const auto v = parse_number(fields[i]);
                if (!v) numeric = false;
                else x[static_cast<Eigen::Index>(i)] = *v;
            }
            if (!numeric) {
                if (line_no_ == 1) {
                    width_ = static_cast<Eigen::Index>(fields.size());
                    continue; // header
                }
                throw InvalidArgument(where() + "non-numeric field");
            }
            if (!x.allFinite()) throw InvalidArgument(where() + "non-finite value");
            if (width_ && x.size() != *width_)
                throw InvalidArgument(where() + "expected " + std::to_string(*width_) + " columns, found " +
                                      std::to_string(x.size()));
            width_ = x.size();
            ++rows_;
            return x;
        }
        return std::nullopt;
    }

    [[nodiscard]] std::size_t rows() const { return rows_; }
    [[nodiscard]] std::size_t line() const { return line_no_; }

private:
    std::string where() const { return path_.string() + ":" + std::to_string(line_no_) + ": "; }

    fs::path path_;
    std::ifstream in_;
    std::size_t line_no_ = 0;
    std::size_t rows_ = 0;
    std::optional<Eigen::Index> width_;
};

inline std::vector<Eigen::VectorXd> read_stream(const fs::path& path) {
    CsvReader reader(path);
    std::vector<Eigen::VectorXd> out;
    while (auto x = reader.next()) out.push_back(std::move(*x));
    if (out.empty()) throw InvalidArgument(path.string() + ": no observations");
    return out;
}

inline void write_stream(const fs::path& path, const std::vector<Eigen::VectorXd>& xs) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    const Eigen::Index d = xs.empty() ? 0 : xs.front().size();
    for (Eigen::Index i = 0; i < d; ++i) out << (i ? "," : "") << "x" << i;
    out << '\n';
    for (const auto& x : xs) {
        for (Eigen::Index i = 0; i < d; ++i) out << (i ? "," : "") << fmt(x[i]);
        out << '\n';
    }
}

inline std::string record_line(const DetectionRecord& r, double threshold) {
    std::string s = "{\"t\":" + std::to_string(r.t) + ",\"statistic\":";
    s += r.statistic ? fmt(*r.statistic) : "null";
    s += ",\"threshold\":" + fmt(threshold);
    s += std::string(",\"alarm\":") + (r.alarm ? "true" : "false");
    s += ",\"segment\":" + std::to_string(r.segment) + "}";
    return s;
}

inline json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Configs

inline json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

inline void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& what) {
    if (!j.is_object()) throw InvalidArgument(what + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key)) throw InvalidArgument(what + ": unknown field '" + key + "'");
}

template <class T>
void read_field(const json& j, const char* key, T& out, const std::string& what) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidArgument(what + ": field '" + std::string(key) + "' has the wrong type");
    }
}

inline DetectorConfig detector_config(const json& j) {
    const std::string what = "detector config";
    check_keys(j,
               {"rho", "rank", "alpha", "threshold", "grace", "burn_in", "lag", "epsilon", "ridge", "ridge_rel",
                "moment_forgetting", "restart"},
               what);
    DetectorConfig c;
    read_field(j, "rho", c.rho, what);
    read_field(j, "rank", c.rank, what);
    read_field(j, "alpha", c.alpha, what);
    read_field(j, "threshold", c.threshold, what);
    read_field(j, "grace", c.grace, what);
    read_field(j, "burn_in", c.burn_in, what);
    read_field(j, "lag", c.lag, what);
    if (j.contains("epsilon") && !j.at("epsilon").is_null()) {
        double e = 0.0;
        read_field(j, "epsilon", e, what);
        c.epsilon = e;
    }
    read_field(j, "ridge", c.ridge, what);
    read_field(j, "ridge_rel", c.ridge_rel, what);
    read_field(j, "moment_forgetting", c.moment_forgetting, what);
    read_field(j, "restart", c.restart, what);
    return c;
}

inline json to_json(const DetectorConfig& c) {
    json j;
    j["rho"] = c.rho;
    j["rank"] = c.rank;
    j["alpha"] = c.alpha;
    j["threshold"] = c.threshold;
    j["grace"] = c.grace;
    j["burn_in"] = c.burn_in;
    j["lag"] = c.lag;
    j["epsilon"] = c.epsilon ? json(*c.epsilon) : json(nullptr);
    j["ridge"] = c.ridge;
    j["ridge_rel"] = c.ridge_rel;
    j["moment_forgetting"] = c.moment_forgetting;
    j["restart"] = c.restart;
    return j;
}

inline std::vector<DetectorConfig> detector_grid(const json& j) {
    if (!j.is_array() || j.empty()) throw InvalidArgument("grid: expected a non-empty JSON array of configs");
    std::vector<DetectorConfig> out;
    for (const auto& item : j) out.push_back(detector_config(item));
    return out;
}

inline BiasExperiment bias_experiment(const json& j) {
    const std::string what = "bias config";
    check_keys(j, {"rhos", "checkpoints", "n_mc", "seed", "epsilon"}, what);
    BiasExperiment e;
    read_field(j, "rhos", e.rhos, what);
    read_field(j, "checkpoints", e.checkpoints, what);
    read_field(j, "n_mc", e.n_mc, what);
    read_field(j, "seed", e.seed, what);
    if (j.contains("epsilon") && !j.at("epsilon").is_null()) {
        double eps = 0.0;
        read_field(j, "epsilon", eps, what);
        e.epsilon = eps;
    }
    return e;
}

inline json to_json(const BiasExperiment& e) {
    json j;
    j["rhos"] = e.rhos;
    j["checkpoints"] = e.checkpoints;
    j["n_mc"] = e.n_mc;
    j["seed"] = e.seed;
    j["epsilon"] = e.epsilon ? json(*e.epsilon) : json(nullptr);
    j["model"] = {{"dim", e.model.dim},
                  {"theta", matrix_json(e.model.theta0)},
                  {"noise_covariance", matrix_json(e.model.noise.covariance)}};
    return j;
}

inline json noise_json(const NoiseSpec& n) {
    json j;
    j["kind"] = to_string(n.kind);
    j["covariance"] = matrix_json(n.covariance);
    if (n.kind == NoiseKind::student_t) j["nu"] = n.nu;
    if (n.kind == NoiseKind::huber) {
        j["contamination"] = n.contamination;
        j["outlier_scale"] = n.outlier_scale;
    }
    return j;
}

inline void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace chasm::io

#endif
