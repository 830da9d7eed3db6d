#ifndef TSNELIM_IO_HPP
#define TSNELIM_IO_HPP

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"

namespace tsnelim {

using json = nlohmann::json;

/// Canonical fingerprint of a config object (sorted-key dump, FNV-1a).
inline std::string config_hash(const json& cfg) {
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << fnv1a(cfg.dump());
    return hex.str();
}

/// CSV table with the config hash in a leading comment line.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::initializer_list<double> vals) { rows.emplace_back(vals); }

    std::string render(const std::string& hash) const {
        std::ostringstream out;
        out << "# config_hash=" << hash << "\n";
        for (size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
        out << "\n";
        out << std::setprecision(17);
        for (const auto& r : rows) {
            for (size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
            out << "\n";
        }
        return out.str();
    }
};

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << content;
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace tsnelim

#endif
