#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rydblock/expsim.hpp"

namespace rydblock {

inline constexpr const char* kToolVersion = "rydblock 1.0.0";

// Whole-file text helpers. Both throw ConfigError with the path on failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// 64-bit FNV-1a, the content fingerprint used by manifests and cache files.
std::uint64_t fnv1a(const std::string& bytes);
std::uint64_t fnv1a_file(const std::string& path);

// Tabular results. Comments become leading '# ' lines, then one header line
// of column names, then numeric rows printed with %.12g. Formatting is a
// pure function of the table, so identical runs give identical bytes.
struct CsvTable {
    std::vector<std::string> comments;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string format_csv(const CsvTable& table);
// Throws ConfigError on ragged rows, non-numeric cells, or a missing header.
CsvTable parse_csv(const std::string& text);
CsvTable read_csv_file(const std::string& path);
void write_csv_file(const std::string& path, const CsvTable& table);

// Experiment configuration as 'key value' lines with '#' comments. Keys are
// exactly the ExperimentConfig field names; unknown or repeated keys are
// errors so a typo cannot silently keep a default. Absent keys keep their
// defaults. The parsed configuration is validated before it is returned.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
// Emits every key in declaration order; parse(format(c)) reproduces c.
std::string format_experiment_config(const ExperimentConfig& config);

// Directory containing the shipped data tables: RYDBLOCK_DATA_DIR when set,
// else ./data when it holds the constants file, else the source-tree copy.
std::string default_data_dir();
// Matrix-element cache directory: RYDBLOCK_CACHE_DIR when set, else ./cache.
std::string default_cache_dir();

} // namespace rydblock
