#pragma once

// Run configuration, solve records and the CSV/JSON files emitted by the CLI.

#include "she/strategy.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace she {

struct RunConfig {
    InverterConfig plant = InverterConfig::uniform(3, 100.0);
    std::vector<double> pu_grid{0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<Method> methods{Method::classic, Method::proposed};
    PsoParams pso;
    SheOptions she;
    double threshold = kDefaultThreshold;
    std::string output_dir = "out";
    std::vector<std::string> formats{"csv"};

    /// Throws she::Error on inconsistent fields.
    void validate() const;
    bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const InverterConfig& cfg);
nlohmann::json to_json(const PsoParams& params);
nlohmann::json to_json(const SheOptions& options);
InverterConfig inverter_config_from_json(const nlohmann::json& j);

/// Canonical solve record for one operating point.
nlohmann::json solve_record(const InverterConfig& cfg, const SweepRow& row, const SheOptions& she,
                            double threshold);

/// Angles and plant recovered from a solve record, for re-synthesis.
struct RecordedSolution {
    InverterConfig effective;
    SwitchingAngles angles{{kHalfPi / 2.0}};
    double thd_total_pct = 0.0;
};
RecordedSolution read_solve_record(const nlohmann::json& record);

/// Shortest round-trip text for a finite double; throws on NaN or infinity.
std::string format_number(double value);

std::string sweep_csv(const SweepTable& table);
SweepTable parse_sweep_csv(const std::string& text);
std::string comparison_csv(const std::vector<Comparison>& rows);
std::string angles_csv(const std::vector<AnglePoint>& points, int cells);
std::string tracking_csv(const SweepTable& table, double base_voltage);
std::string waveform_csv(const std::vector<double>& samples, double frequency_hz);
std::string spectrum_csv(const HarmonicSpectrum& spectrum);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

} // namespace she
