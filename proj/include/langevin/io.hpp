#pragma once

/// CSV export and the run manifest written next to every artifact set.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace langevin {

/// FNV-1a 64-bit hash of a file's bytes; manifests record it per output so
/// reruns can be diffed cheaply.
inline std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("fnv1a64_file: cannot open " + path);
    std::uint64_t h = 14695981039346656037ull;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
    }
    return h;
}

/// Write a CSV with a header row and full round-trip precision.
inline void write_csv(const std::string& path, const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    out << std::setprecision(17);
    for (std::size_t j = 0; j < columns.size(); ++j)
        out << columns[j] << (j + 1 < columns.size() ? ',' : '\n');
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw std::invalid_argument("write_csv: row width mismatch");
        for (std::size_t j = 0; j < row.size(); ++j)
            out << row[j] << (j + 1 < row.size() ? ',' : '\n');
    }
    if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

inline std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

inline constexpr const char* kVersion = "0.1.0";

class RunManifest {
  public:
    RunManifest(std::string command, nlohmann::json params)
        : command_(std::move(command)), params_(std::move(params)),
          started_(iso8601_now()) {}

    /// Register an already-written artifact; its hash is taken now.
    void add_output(const std::string& path) {
        outputs_.push_back({{"path", path},
                            {"fnv1a64", fnv1a64_file(path)}});
    }

    void write(const std::string& path) const {
        nlohmann::json doc{{"version", kVersion},
                           {"command", command_},
                           {"params", params_},
                           {"started", started_},
                           {"finished", iso8601_now()},
                           {"outputs", outputs_}};
        std::ofstream out(path);
        if (!out) throw std::runtime_error("RunManifest: cannot open " + path);
        out << doc.dump(2) << "\n";
    }

  private:
    std::string command_;
    nlohmann::json params_;
    std::string started_;
    nlohmann::json outputs_ = nlohmann::json::array();
};

}  // namespace langevin
