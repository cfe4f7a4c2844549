#pragma once

// Deterministic CSV / manifest output: fixed "%.17g" formatting and ordered
// JSON keys so that identical configs reproduce byte-identical files.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hyplab/errors.hpp"
#include "json.hpp"

namespace hyplab::io {

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
        : out_(path) {
        if (!out_.good()) throw ConfigError("cannot open output file " + path.string());
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << (i ? "," : "") << header[i];
        out_ << "\n";
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << format_number(values[i]);
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct RunManifest {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    nlohmann::json tolerances;
    std::vector<std::string> outputs;

    void write(const std::filesystem::path& dir) const {
        nlohmann::json js;
        char hex[20];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(config_hash));
        js["config_hash"] = std::string(hex);
        js["seed"] = seed;
        js["tolerances"] = tolerances;
        js["outputs"] = outputs;
        std::ofstream out(dir / "manifest.json");
        out << js.dump(2) << "\n";
    }
};

}  // namespace hyplab::io
