#include "rydblock/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "rydblock/errors.hpp"

namespace rydblock {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

// Leading/trailing whitespace is never significant in the text formats here.
std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    auto begin = s.find_first_not_of(ws);
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(ws);
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& token, const std::string& where) {
    errno = 0;
    char* end = nullptr;
    double value = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || token.empty() || errno == ERANGE)
        throw ConfigError(where + ": expected a number, got '" + token + "'");
    return value;
}

long long parse_integer(const std::string& token, const std::string& where) {
    errno = 0;
    char* end = nullptr;
    long long value = std::strtoll(token.c_str(), &end, 10);
    if (end != token.c_str() + token.size() || token.empty() || errno == ERANGE)
        throw ConfigError(where + ": expected an integer, got '" + token + "'");
    return value;
}

bool parse_bool(const std::string& token, const std::string& where) {
    if (token == "true" || token == "1") return true;
    if (token == "false" || token == "0") return false;
    throw ConfigError(where + ": expected true/false, got '" + token + "'");
}

} // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw ConfigError("read failure on '" + path + "'");
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ConfigError("write failure on '" + path + "'");
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::uint64_t fnv1a_file(const std::string& path) {
    return fnv1a(read_text_file(path));
}

std::string format_csv(const CsvTable& table) {
    if (table.columns.empty()) throw ConfigError("csv table has no columns");
    std::string out;
    for (const auto& comment : table.comments) out += "# " + comment + "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ',';
        out += table.columns[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw ConfigError("csv row width does not match the header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += fmt(row[i]);
        }
        out += '\n';
    }
    return out;
}

CsvTable parse_csv(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string where = "csv line " + std::to_string(lineno);
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (have_header) throw ConfigError(where + ": comment after the header");
            table.comments.push_back(trim(line.substr(1)));
            continue;
        }
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            auto comma = line.find(',', start);
            cells.push_back(trim(line.substr(start, comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!have_header) {
            for (const auto& cell : cells)
                if (cell.empty()) throw ConfigError(where + ": empty column name");
            table.columns = cells;
            have_header = true;
            continue;
        }
        if (cells.size() != table.columns.size())
            throw ConfigError(where + ": expected " + std::to_string(table.columns.size()) +
                              " cells, got " + std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& cell : cells) row.push_back(parse_double(cell, where));
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw ConfigError("csv text has no header line");
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    try {
        return parse_csv(read_text_file(path));
    } catch (const ConfigError& err) {
        throw ConfigError(path + ": " + err.what());
    }
}

void write_csv_file(const std::string& path, const CsvTable& table) {
    write_text_file(path, format_csv(table));
}

ExperimentConfig parse_experiment_config(const std::string& text) {
    ExperimentConfig config;
    // One setter per documented key; the table is also what format uses, so
    // the two directions cannot drift apart.
    using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;
    static const std::vector<std::pair<std::string, Setter>> keys = {
#define RYDBLOCK_DOUBLE_KEY(field) \
    {#field, [](ExperimentConfig& c, const std::string& v, const std::string& w) { \
        c.field = parse_double(v, w); }}
#define RYDBLOCK_BOOL_KEY(field) \
    {#field, [](ExperimentConfig& c, const std::string& v, const std::string& w) { \
        c.field = parse_bool(v, w); }}
        RYDBLOCK_DOUBLE_KEY(z_um),
        RYDBLOCK_DOUBLE_KEY(sigma_y_um),
        RYDBLOCK_DOUBLE_KEY(sigma_z_um),
        RYDBLOCK_DOUBLE_KEY(temperature_uk),
        RYDBLOCK_DOUBLE_KEY(omega_mhz),
        RYDBLOCK_DOUBLE_KEY(field_mt),
        RYDBLOCK_DOUBLE_KEY(wavelength_red_nm),
        RYDBLOCK_DOUBLE_KEY(wavelength_blue_nm),
        RYDBLOCK_BOOL_KEY(copropagating),
        RYDBLOCK_DOUBLE_KEY(prep_error),
        RYDBLOCK_DOUBLE_KEY(detection_error),
        RYDBLOCK_DOUBLE_KEY(trap_off_loss),
        RYDBLOCK_DOUBLE_KEY(rydberg_loss_prob),
        RYDBLOCK_DOUBLE_KEY(crosstalk_ratio),
        RYDBLOCK_DOUBLE_KEY(ac_stark_detuning_mhz),
        RYDBLOCK_DOUBLE_KEY(omega_jitter),
        {"principal_n", [](ExperimentConfig& c, const std::string& v, const std::string& w) {
             c.principal_n = static_cast<int>(parse_integer(v, w)); }},
        {"blockade_source", [](ExperimentConfig& c, const std::string& v, const std::string& w) {
             if (v == "spectrum") c.blockade_source = BlockadeSource::spectrum;
             else if (v == "fixed") c.blockade_source = BlockadeSource::fixed;
             else throw ConfigError(w + ": expected spectrum or fixed, got '" + v + "'"); }},
        RYDBLOCK_DOUBLE_KEY(fixed_blockade_mhz),
        RYDBLOCK_BOOL_KEY(full_spectrum_dynamics),
        RYDBLOCK_BOOL_KEY(post_select),
        {"shots", [](ExperimentConfig& c, const std::string& v, const std::string& w) {
             c.shots = static_cast<long>(parse_integer(v, w)); }},
        {"seed", [](ExperimentConfig& c, const std::string& v, const std::string& w) {
             long long s = parse_integer(v, w);
             if (s < 0) throw ConfigError(w + ": seed must be non-negative");
             c.seed = static_cast<std::uint64_t>(s); }},
        {"shards", [](ExperimentConfig& c, const std::string& v, const std::string& w) {
             c.shards = static_cast<int>(parse_integer(v, w)); }},
#undef RYDBLOCK_DOUBLE_KEY
#undef RYDBLOCK_BOOL_KEY
    };

    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string where = "config line " + std::to_string(lineno);
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string key, value, extra;
        fields >> key >> value;
        if (value.empty()) throw ConfigError(where + ": key '" + key + "' has no value");
        if (fields >> extra) throw ConfigError(where + ": trailing text after '" + value + "'");
        auto it = std::find_if(keys.begin(), keys.end(),
                               [&](const auto& entry) { return entry.first == key; });
        if (it == keys.end()) throw ConfigError(where + ": unknown key '" + key + "'");
        if (seen.count(key))
            throw ConfigError(where + ": key '" + key + "' already set on line " +
                              std::to_string(seen[key]));
        seen[key] = lineno;
        it->second(config, value, where + " (" + key + ")");
    }
    config.validate();
    return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    try {
        return parse_experiment_config(read_text_file(path));
    } catch (const ConfigError& err) {
        throw ConfigError(path + ": " + err.what());
    }
}

std::string format_experiment_config(const ExperimentConfig& config) {
    std::string out = "# two-atom blockade experiment configuration\n";
    auto put = [&out](const char* key, const std::string& value) {
        out += key;
        out += ' ';
        out += value;
        out += '\n';
    };
    put("z_um", fmt(config.z_um));
    put("sigma_y_um", fmt(config.sigma_y_um));
    put("sigma_z_um", fmt(config.sigma_z_um));
    put("temperature_uk", fmt(config.temperature_uk));
    put("omega_mhz", fmt(config.omega_mhz));
    put("field_mt", fmt(config.field_mt));
    put("wavelength_red_nm", fmt(config.wavelength_red_nm));
    put("wavelength_blue_nm", fmt(config.wavelength_blue_nm));
    put("copropagating", config.copropagating ? "true" : "false");
    put("prep_error", fmt(config.prep_error));
    put("detection_error", fmt(config.detection_error));
    put("trap_off_loss", fmt(config.trap_off_loss));
    put("rydberg_loss_prob", fmt(config.rydberg_loss_prob));
    put("crosstalk_ratio", fmt(config.crosstalk_ratio));
    put("ac_stark_detuning_mhz", fmt(config.ac_stark_detuning_mhz));
    put("omega_jitter", fmt(config.omega_jitter));
    put("principal_n", std::to_string(config.principal_n));
    put("blockade_source",
        config.blockade_source == BlockadeSource::spectrum ? "spectrum" : "fixed");
    put("fixed_blockade_mhz", fmt(config.fixed_blockade_mhz));
    put("full_spectrum_dynamics", config.full_spectrum_dynamics ? "true" : "false");
    put("post_select", config.post_select ? "true" : "false");
    put("shots", std::to_string(config.shots));
    put("seed", std::to_string(config.seed));
    put("shards", std::to_string(config.shards));
    return out;
}

std::string default_data_dir() {
    if (const char* env = std::getenv("RYDBLOCK_DATA_DIR")) return env;
    std::error_code ec;
    if (std::filesystem::exists("data/physical_constants.txt", ec)) return "data";
    return RYDBLOCK_SOURCE_DATA_DIR;
}

std::string default_cache_dir() {
    if (const char* env = std::getenv("RYDBLOCK_CACHE_DIR")) return env;
    return "cache";
}

} // namespace rydblock
