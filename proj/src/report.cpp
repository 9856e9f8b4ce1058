#include "she/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace she {

using nlohmann::json;

namespace {

std::string_view to_string(BoundPolicy p) {
    return p == BoundPolicy::repair_sort_clamp ? "repair_sort_clamp" : "penalty";
}

BoundPolicy parse_bound_policy(const std::string& s) {
    if (s == "repair_sort_clamp")
        return BoundPolicy::repair_sort_clamp;
    if (s == "penalty")
        return BoundPolicy::penalty;
    throw Error("unknown bound_policy '" + s + "'");
}

std::string_view to_string(InertiaSchedule s) {
    return s == InertiaSchedule::constant ? "constant" : "linear_decay";
}

InertiaSchedule parse_inertia_schedule(const std::string& s) {
    if (s == "constant")
        return InertiaSchedule::constant;
    if (s == "linear_decay")
        return InertiaSchedule::linear_decay;
    throw Error("unknown inertia_schedule '" + s + "'");
}

double finite(double v) {
    if (!std::isfinite(v))
        throw Error("refusing to serialize a non-finite value");
    return v;
}

json finite_array(std::span<const double> values) {
    json a = json::array();
    for (double v : values)
        a.push_back(finite(v));
    return a;
}

// Field access with a default, reporting type errors as she::Error.
template <class T>
T field(const json& j, const char* key, T fallback) {
    if (!j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(std::string("config field '") + key + "': " + e.what());
    }
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep))
        out.push_back(cur);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw Error("not a number: '" + s + "'");
    return v;
}

std::string angle_header(int cells) {
    std::string h;
    for (int k = 1; k <= cells; ++k)
        h += fmt::format(",alpha{}_deg", k);
    return h;
}

} // namespace

std::string format_number(double value) { return fmt::format("{}", finite(value)); }

json to_json(const InverterConfig& cfg) {
    return {{"cells", cfg.cells},
            {"vdc", finite(cfg.vdc)},
            {"dc_sources", cfg.dc_sources},
            {"base_voltage", finite(cfg.base_voltage)}};
}

InverterConfig inverter_config_from_json(const json& j) {
    InverterConfig cfg;
    cfg.cells = field(j, "cells", 3);
    cfg.vdc = field(j, "vdc", 100.0);
    cfg.dc_sources = field(j, "dc_sources", cfg.cells);
    cfg.base_voltage = field(j, "base_voltage", cfg.cells * cfg.vdc);
    cfg.validate();
    return cfg;
}

json to_json(const PsoParams& p) {
    return {{"swarm_size", p.swarm_size},
            {"max_iterations", p.max_iterations},
            {"inertia", finite(p.inertia)},
            {"cognitive", finite(p.cognitive)},
            {"social", finite(p.social)},
            {"seed", p.seed},
            {"velocity_clamp", finite(p.velocity_clamp)},
            {"bound_policy", to_string(p.bound_policy)},
            {"convergence_tol", finite(p.convergence_tol)},
            {"stall_iterations", p.stall_iterations},
            {"inertia_schedule", to_string(p.inertia_schedule)},
            {"inertia_end", finite(p.inertia_end)}};
}

namespace {

PsoParams pso_from_json(const json& j) {
    PsoParams p;
    p.swarm_size = field(j, "swarm_size", p.swarm_size);
    p.max_iterations = field(j, "max_iterations", p.max_iterations);
    p.inertia = field(j, "inertia", p.inertia);
    p.cognitive = field(j, "cognitive", p.cognitive);
    p.social = field(j, "social", p.social);
    p.seed = field(j, "seed", p.seed);
    p.velocity_clamp = field(j, "velocity_clamp", p.velocity_clamp);
    p.bound_policy = parse_bound_policy(field(j, "bound_policy", std::string(to_string(p.bound_policy))));
    p.convergence_tol = field(j, "convergence_tol", p.convergence_tol);
    p.stall_iterations = field(j, "stall_iterations", p.stall_iterations);
    p.inertia_schedule =
        parse_inertia_schedule(field(j, "inertia_schedule", std::string(to_string(p.inertia_schedule))));
    p.inertia_end = field(j, "inertia_end", p.inertia_end);
    p.validate();
    return p;
}

SheOptions she_from_json(const json& j, int cells) {
    SheOptions o;
    o.eliminate_orders = field(j, "eliminate_orders", default_eliminate_orders(cells - 1));
    o.weight_fundamental = field(j, "weight_fundamental", o.weight_fundamental);
    o.weight_harmonics = field(j, "weight_harmonics", o.weight_harmonics);
    o.thd_max_order = field(j, "thd_max_order", o.thd_max_order);
    return o;
}

} // namespace

json to_json(const SheOptions& o) {
    return {{"eliminate_orders", o.eliminate_orders},
            {"weight_fundamental", finite(o.weight_fundamental)},
            {"weight_harmonics", finite(o.weight_harmonics)},
            {"thd_max_order", o.thd_max_order}};
}

void RunConfig::validate() const {
    plant.validate();
    pso.validate();
    // Constructing a problem checks the harmonic options.
    SheProblem probe(plant, 1.0, she);
    if (!(threshold > 0.0) || threshold > 1.0)
        throw Error("threshold must lie in (0, 1]");
    if (pu_grid.empty())
        throw Error("per-unit grid is empty");
    for (std::size_t i = 0; i < pu_grid.size(); ++i) {
        if (!(pu_grid[i] > 0.0) || pu_grid[i] > 1.0)
            throw Error("per-unit grid values must lie in (0, 1]");
        if (i > 0 && !(pu_grid[i] > pu_grid[i - 1]))
            throw Error("per-unit grid must be strictly increasing");
    }
    if (methods.empty())
        throw Error("no methods selected");
    for (const auto& f : formats)
        if (f != "csv" && f != "json")
            throw Error("unknown output format '" + f + "'");
}

json to_json(const RunConfig& cfg) {
    json methods = json::array();
    for (Method m : cfg.methods)
        methods.push_back(to_string(m));
    return {{"plant", to_json(cfg.plant)},
            {"pu_grid", finite_array(cfg.pu_grid)},
            {"methods", methods},
            {"pso", to_json(cfg.pso)},
            {"she", to_json(cfg.she)},
            {"threshold", finite(cfg.threshold)},
            {"output_dir", cfg.output_dir},
            {"formats", cfg.formats}};
}

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object())
        throw Error("run config must be a JSON object");
    RunConfig cfg;
    if (j.contains("plant"))
        cfg.plant = inverter_config_from_json(j.at("plant"));
    cfg.pu_grid = field(j, "pu_grid", cfg.pu_grid);
    if (j.contains("methods")) {
        cfg.methods.clear();
        for (const auto& m : field(j, "methods", std::vector<std::string>{}))
            cfg.methods.push_back(parse_method(m));
    }
    if (j.contains("pso"))
        cfg.pso = pso_from_json(j.at("pso"));
    cfg.she = she_from_json(j.contains("she") ? j.at("she") : json::object(), cfg.plant.cells);
    cfg.threshold = field(j, "threshold", cfg.threshold);
    cfg.output_dir = field(j, "output_dir", cfg.output_dir);
    cfg.formats = field(j, "formats", cfg.formats);
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error("cannot parse config " + path.string() + ": " + e.what());
    }
    return run_config_from_json(j);
}

json solve_record(const InverterConfig& cfg, const SweepRow& row, const SheOptions& she,
                  double threshold) {
    json harmonics = json::array();
    for (std::size_t i = 0; i < she.eliminate_orders.size(); ++i)
        harmonics.push_back({{"order", she.eliminate_orders[i]},
                             {"value_v", finite(row.solve.residuals.harmonic_values.at(i))}});
    json trace = json::array();
    for (const auto& t : row.solve.convergence_trace)
        trace.push_back({t.iteration, finite(t.best_cost)});
    const auto deg = row.angles.degrees();
    return {{"plant", to_json(cfg)},
            {"v_out_pu", finite(row.v_out_pu)},
            {"method", to_string(row.method)},
            {"threshold", finite(threshold)},
            {"effective_vdc", finite(row.effective_vdc)},
            {"effective_target_pu", finite(row.effective_target_pu)},
            {"effective_base_voltage", finite(cfg.base_voltage * (row.effective_vdc / cfg.vdc))},
            {"angles_rad", finite_array(row.angles.radians())},
            {"angles_deg", finite_array(deg)},
            {"residuals",
             {{"fundamental_error_v", finite(row.solve.residuals.fundamental_error)},
              {"harmonics", harmonics}}},
            {"achieved_v1", finite(row.achieved_v1)},
            {"achieved_pu", finite(row.achieved_pu)},
            {"thd_spectral_pct", finite(row.thd_spectral_pct)},
            {"thd_total_pct", finite(row.thd_total_pct)},
            {"best_cost", finite(row.best_cost)},
            {"feasible", row.feasible},
            {"iterations_used", row.solve.iterations_used},
            {"evaluations", row.solve.evaluations},
            {"seed", row.seed},
            {"pso", to_json(row.solve.params)},
            {"she", to_json(she)},
            {"convergence_trace", trace}};
}

RecordedSolution read_solve_record(const json& record) {
    try {
        RecordedSolution out;
        out.effective = inverter_config_from_json(record.at("plant"));
        out.effective.vdc = record.at("effective_vdc").get<double>();
        out.effective.base_voltage = record.at("effective_base_voltage").get<double>();
        out.effective.validate();
        out.angles = SwitchingAngles(record.at("angles_rad").get<std::vector<double>>());
        out.thd_total_pct = record.value("thd_total_pct", 0.0);
        if (static_cast<int>(out.angles.size()) != out.effective.cells)
            throw Error("record angle count does not match its plant");
        return out;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed solve record: ") + e.what());
    }
}

std::string sweep_csv(const SweepTable& table) {
    const int cells = table.empty() ? 0 : static_cast<int>(table.front().angles.size());
    std::string out = "v_out_pu,method" + angle_header(cells) +
                      ",effective_vdc,effective_target_pu,achieved_v1,achieved_pu,"
                      "thd_spectral_pct,thd_total_pct,best_cost,feasible,seed\n";
    for (const auto& r : table) {
        out += format_number(r.v_out_pu) + "," + std::string(to_string(r.method));
        for (double d : r.angles.degrees())
            out += "," + format_number(d);
        out += fmt::format(",{},{},{},{},{},{},{},{},{}\n", format_number(r.effective_vdc),
                           format_number(r.effective_target_pu), format_number(r.achieved_v1),
                           format_number(r.achieved_pu), format_number(r.thd_spectral_pct),
                           format_number(r.thd_total_pct), format_number(r.best_cost),
                           r.feasible ? 1 : 0, r.seed);
    }
    return out;
}

SweepTable parse_sweep_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw Error("sweep CSV is empty");
    const auto header = split(line, ',');
    constexpr std::size_t kFixedColumns = 11;
    if (header.size() < kFixedColumns + 1 || header[0] != "v_out_pu" || header[1] != "method")
        throw Error("not a sweep CSV: unexpected header");
    const std::size_t cells = header.size() - kFixedColumns;
    SweepTable table;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = split(line, ',');
        if (f.size() != header.size())
            throw Error("sweep CSV row has " + std::to_string(f.size()) + " fields, expected " +
                        std::to_string(header.size()));
        SweepRow r;
        r.v_out_pu = parse_double(f[0]);
        r.method = parse_method(f[1]);
        std::vector<double> deg;
        for (std::size_t k = 0; k < cells; ++k)
            deg.push_back(parse_double(f[2 + k]));
        r.angles = SwitchingAngles::from_degrees(deg);
        std::size_t c = 2 + cells;
        r.effective_vdc = parse_double(f[c++]);
        r.effective_target_pu = parse_double(f[c++]);
        r.achieved_v1 = parse_double(f[c++]);
        r.achieved_pu = parse_double(f[c++]);
        r.thd_spectral_pct = parse_double(f[c++]);
        r.thd_total_pct = parse_double(f[c++]);
        r.best_cost = parse_double(f[c++]);
        r.feasible = f[c++] == "1";
        r.seed = std::stoull(f[c++]);
        table.push_back(std::move(r));
    }
    return table;
}

std::string comparison_csv(const std::vector<Comparison>& rows) {
    std::string out = "v_out_pu,thd_classic_pct,thd_proposed_pct,improvement_pct\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{}\n", format_number(r.v_out_pu), format_number(r.thd_classic_pct),
                           format_number(r.thd_proposed_pct), format_number(r.improvement_pct));
    return out;
}

std::string angles_csv(const std::vector<AnglePoint>& points, int cells) {
    std::string out = "v_out_pu" + angle_header(cells) + "\n";
    for (const auto& p : points) {
        out += format_number(p.v_out_pu);
        for (double d : p.degrees)
            out += "," + format_number(d);
        out += "\n";
    }
    return out;
}

std::string tracking_csv(const SweepTable& table, double base_voltage) {
    std::string out = "v_out_pu,method,target_v1,achieved_v1,error_pct\n";
    for (const auto& r : table) {
        const double target = r.v_out_pu * base_voltage;
        out += fmt::format("{},{},{},{},{}\n", format_number(r.v_out_pu), to_string(r.method),
                           format_number(target), format_number(r.achieved_v1),
                           format_number(100.0 * (r.achieved_v1 - target) / target));
    }
    return out;
}

std::string waveform_csv(const std::vector<double>& samples, double frequency_hz) {
    if (!(frequency_hz > 0.0))
        throw Error("frequency must be positive");
    std::string out = "time_s,volts\n";
    const double period = 1.0 / frequency_hz;
    const double n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        out += fmt::format("{},{}\n", format_number(period * static_cast<double>(i) / n),
                           format_number(samples[i]));
    return out;
}

std::string spectrum_csv(const HarmonicSpectrum& spectrum) {
    if (spectrum.size() == 0 || spectrum.orders.front() != 1)
        throw Error("spectrum must start at the fundamental");
    const double v1 = spectrum.magnitude(0);
    std::string out = "order,amplitude_v,percent_of_fundamental\n";
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        const double pct = v1 > 0.0 ? 100.0 * spectrum.magnitude(i) / v1 : 0.0;
        out += fmt::format("{},{},{}\n", spectrum.orders[i], format_number(spectrum.magnitude(i)),
                           format_number(pct));
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out)
            throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace she
