#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ndwp/units.hpp"

namespace ndwp::io {

inline constexpr const char* kVersion = "0.1.0";

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(const std::string& s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
    return buf;
}

/// Fixed shortest-roundtrip formatting so identical runs emit identical bytes.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::filesystem::path& path, const std::string& columns,
              const std::string& config_hash, const std::string& extra_header = "") {
        std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
        out_.open(path);
        if (!out_) throw ConfigError("cannot open output file " + path.string());
        out_ << "# ndwp " << kVersion << "\n";
        out_ << "# config " << config_hash << "\n";
        if (!extra_header.empty()) out_ << "# " << extra_header << "\n";
        out_ << columns << "\n";
    }

    template <typename... Ts>
    void row(const Ts&... vals) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(vals), first = false), ...);
        out_ << "\n";
    }

  private:
    static std::string cell(double v) { return fmt(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }

    std::ofstream out_;
};

}  // namespace ndwp::io
