#include "she/cli.hpp"

#include "she/report.hpp"

#include <algorithm>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

namespace she {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

struct Flags {
    std::string pu;
    std::string method;
    int cells = 3;
    double vdc = 100.0;
    double base = 300.0;
    std::uint64_t seed = 0;
    int swarm = 0;
    int iters = 0;
    std::string eliminate;
    int thd_max_order = 49;
    double threshold = kDefaultThreshold;
    std::string config;
    std::string out;
    std::string format;
    // synth
    std::string angles;
    std::string from;
    int samples = 4096;
    double frequency = 50.0;
    // compare
    std::vector<std::string> inputs;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--cells", f.cells, "Number of H-bridge cells (switching angles)");
    sub->add_option("--vdc", f.vdc, "DC voltage per cell [V]");
    sub->add_option("--base", f.base, "Per-unit base voltage [V] (default cells*vdc)");
    sub->add_option("--seed", f.seed, "Base random seed");
    sub->add_option("--swarm", f.swarm, "Swarm size");
    sub->add_option("--iters", f.iters, "Maximum PSO iterations");
    sub->add_option("--eliminate", f.eliminate, "Harmonic orders to eliminate, comma separated");
    sub->add_option("--thd-max-order", f.thd_max_order, "Highest harmonic in the spectral THD window");
    sub->add_option("--threshold", f.threshold, "Per-unit voltage at or below which the DC link is halved");
    sub->add_option("--config", f.config, "JSON run configuration; flags override its values");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--format", f.format, "Output formats: csv, json or csv,json");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

double to_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty())
        throw Error("not a number: '" + s + "'");
    return v;
}

std::vector<double> to_doubles(const std::string& text) {
    std::vector<double> out;
    for (const auto& s : split_list(text))
        out.push_back(to_double(s));
    return out;
}

bool given(const CLI::App& sub, const std::string& name) {
    const CLI::Option* opt = sub.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

RunConfig build_config(const CLI::App& sub, const Flags& f) {
    RunConfig cfg = f.config.empty() ? RunConfig{} : load_run_config(f.config);
    const bool cells_set = given(sub, "--cells");
    if (cells_set || given(sub, "--vdc")) {
        if (cells_set)
            cfg.plant.cells = f.cells;
        if (given(sub, "--vdc"))
            cfg.plant.vdc = f.vdc;
        cfg.plant.dc_sources = cfg.plant.cells;
        cfg.plant.base_voltage = cfg.plant.cells * cfg.plant.vdc;
    }
    if (given(sub, "--base"))
        cfg.plant.base_voltage = f.base;
    if (given(sub, "--eliminate")) {
        cfg.she.eliminate_orders.clear();
        for (const auto& s : split_list(f.eliminate)) {
            const double v = to_double(s);
            if (v != static_cast<int>(v))
                throw Error("harmonic orders must be integers");
            cfg.she.eliminate_orders.push_back(static_cast<int>(v));
        }
    } else if (cells_set) {
        cfg.she.eliminate_orders = default_eliminate_orders(cfg.plant.cells - 1);
    }
    if (given(sub, "--seed"))
        cfg.pso.seed = f.seed;
    if (given(sub, "--swarm"))
        cfg.pso.swarm_size = f.swarm;
    if (given(sub, "--iters"))
        cfg.pso.max_iterations = f.iters;
    if (given(sub, "--thd-max-order"))
        cfg.she.thd_max_order = f.thd_max_order;
    if (given(sub, "--threshold"))
        cfg.threshold = f.threshold;
    if (given(sub, "--out"))
        cfg.output_dir = f.out;
    if (given(sub, "--format"))
        cfg.formats = split_list(f.format);
    if (given(sub, "--pu"))
        cfg.pu_grid = to_doubles(f.pu);
    if (given(sub, "--method")) {
        cfg.methods.clear();
        for (const auto& m : split_list(f.method))
            cfg.methods.push_back(parse_method(m));
    }
    cfg.validate();
    return cfg;
}

bool wants(const RunConfig& cfg, std::string_view format) {
    return std::find(cfg.formats.begin(), cfg.formats.end(), format) != cfg.formats.end();
}

int cmd_solve(const CLI::App& sub, const Flags& f, std::ostream& out) {
    if (!given(sub, "--pu"))
        throw Error("solve needs --pu");
    RunConfig cfg = build_config(sub, f);
    if (!given(sub, "--method"))
        cfg.methods = {Method::classic};
    if (cfg.pu_grid.size() != 1 || cfg.methods.size() != 1)
        throw Error("solve takes a single --pu value and a single --method");
    const OperatingPoint point{cfg.pu_grid.front(), cfg.methods.front()};
    const SweepRow row = solve_operating_point(cfg.plant, point, cfg.pso, cfg.she, cfg.threshold);
    const auto record = solve_record(cfg.plant, row, cfg.she, cfg.threshold);
    const fs::path path = fs::path(cfg.output_dir) / "solve.json";
    write_file_atomic(path, record.dump(2) + "\n");

    const auto deg = row.angles.degrees();
    out << fmt::format("pu {} {}: vdc {} V, angles [", format_number(row.v_out_pu), to_string(row.method),
                       format_number(row.effective_vdc));
    for (std::size_t k = 0; k < deg.size(); ++k)
        out << (k ? ", " : "") << fmt::format("{:.4f}", deg[k]);
    out << fmt::format("] deg, v1 {:.3f} V, THD total {:.2f}%, spectral {:.2f}%, {}\n", row.achieved_v1,
                       row.thd_total_pct, row.thd_spectral_pct, row.feasible ? "feasible" : "infeasible");
    out << "wrote " << path.string() << "\n";
    return row.feasible ? kExitOk : kExitInfeasible;
}

int cmd_sweep(const CLI::App& sub, const Flags& f, std::ostream& out) {
    const RunConfig cfg = build_config(sub, f);
    SweepOptions options;
    options.threshold = cfg.threshold;
    options.threads = std::max(1u, std::thread::hardware_concurrency());
    const SweepTable table = sweep(cfg.plant, cfg.pu_grid, cfg.methods, cfg.pso, cfg.she, options);

    const fs::path dir(cfg.output_dir);
    const bool both = std::find(cfg.methods.begin(), cfg.methods.end(), Method::classic) != cfg.methods.end() &&
                      std::find(cfg.methods.begin(), cfg.methods.end(), Method::proposed) != cfg.methods.end();
    std::vector<Comparison> comparison;
    if (both)
        comparison = compare_methods(table);

    if (wants(cfg, "csv")) {
        write_file_atomic(dir / "sweep.csv", sweep_csv(table));
        write_file_atomic(dir / "tracking.csv", tracking_csv(table, cfg.plant.base_voltage));
        for (Method m : {Method::classic, Method::proposed}) {
            const auto traj = angle_trajectory(table, m);
            if (!traj.empty())
                write_file_atomic(dir / fmt::format("angles_{}.csv", to_string(m)),
                                  angles_csv(traj, cfg.plant.cells));
        }
        if (both)
            write_file_atomic(dir / "comparison.csv", comparison_csv(comparison));
    }
    if (wants(cfg, "json")) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : table)
            rows.push_back(solve_record(cfg.plant, row, cfg.she, cfg.threshold));
        nlohmann::json doc{{"config", to_json(cfg)}, {"rows", rows}};
        write_file_atomic(dir / "sweep.json", doc.dump(2) + "\n");
    }

    out << fmt::format("{:>6}  {:<8}  {:>10}  {:>9}  {:>9}  {}\n", "pu", "method", "v1 [V]", "THD tot%",
                       "THD harm%", "feasible");
    bool all_feasible = true;
    for (const auto& r : table) {
        out << fmt::format("{:>6.3f}  {:<8}  {:>10.3f}  {:>9.2f}  {:>9.2f}  {}\n", r.v_out_pu,
                           to_string(r.method), r.achieved_v1, r.thd_total_pct, r.thd_spectral_pct,
                           r.feasible ? "yes" : "no");
        all_feasible = all_feasible && r.feasible;
    }
    for (const auto& c : comparison)
        out << fmt::format("pu {:.3f}: classic {:.2f}%  proposed {:.2f}%  improvement {:.2f}%\n", c.v_out_pu,
                           c.thd_classic_pct, c.thd_proposed_pct, c.improvement_pct);
    out << "wrote " << dir.string() << "\n";
    return all_feasible ? kExitOk : kExitInfeasible;
}

int cmd_synth(const CLI::App& sub, const Flags& f, std::ostream& out) {
    const bool have_angles = given(sub, "--angles");
    const bool have_from = given(sub, "--from");
    if (have_angles == have_from)
        throw Error("synth needs exactly one of --angles or --from");

    InverterConfig plant;
    std::optional<SwitchingAngles> angles;
    RunConfig cfg = build_config(sub, f);
    if (have_from) {
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(read_file(f.from));
        } catch (const nlohmann::json::exception& e) {
            throw Error("cannot parse " + f.from + ": " + e.what());
        }
        const RecordedSolution rec = read_solve_record(record);
        plant = rec.effective;
        angles = rec.angles;
    } else {
        const auto deg = to_doubles(f.angles);
        angles = SwitchingAngles::from_degrees(deg);
        plant = cfg.plant;
        if (!given(sub, "--cells") && static_cast<int>(deg.size()) != plant.cells) {
            plant.cells = static_cast<int>(deg.size());
            plant.dc_sources = plant.cells;
            plant.base_voltage = plant.cells * plant.vdc;
        }
        if (static_cast<int>(angles->size()) != plant.cells)
            throw Error("number of angles does not match --cells");
    }

    const auto samples = synthesize(plant, *angles, f.samples);
    const auto spec = spectrum(plant, *angles, cfg.she.thd_max_order);
    const fs::path dir(cfg.output_dir);
    write_file_atomic(dir / "waveform.csv", waveform_csv(samples, f.frequency));
    write_file_atomic(dir / "spectrum.csv", spectrum_csv(spec));
    out << fmt::format("v1 {:.3f} V, THD total {:.2f}%, spectral (<= {}) {:.2f}%\n", fundamental(plant, *angles),
                       100.0 * thd_total(plant, *angles), cfg.she.thd_max_order,
                       100.0 * thd_spectral(plant, *angles, cfg.she.thd_max_order));
    out << "wrote " << dir.string() << "\n";
    return kExitOk;
}

int cmd_compare(const CLI::App& sub, const Flags& f, std::ostream& out) {
    if (f.inputs.empty() || f.inputs.size() > 2)
        throw Error("compare takes one or two sweep CSV files");
    const SweepTable first = parse_sweep_csv(read_file(f.inputs.front()));
    const SweepTable second = parse_sweep_csv(read_file(f.inputs.back()));
    // Classic rows from the first file, proposed rows from the second.
    SweepTable merged;
    for (const auto& r : first)
        if (r.method == Method::classic)
            merged.push_back(r);
    for (const auto& r : second)
        if (r.method == Method::proposed)
            merged.push_back(r);
    const auto rows = compare_methods(merged);
    const fs::path dir(given(sub, "--out") ? f.out : std::string("out"));
    write_file_atomic(dir / "comparison.csv", comparison_csv(rows));
    for (const auto& c : rows)
        out << fmt::format("pu {:.3f}: classic {:.2f}%  proposed {:.2f}%  improvement {:.2f}%\n", c.v_out_pu,
                           c.thd_classic_pct, c.thd_proposed_pct, c.improvement_pct);
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Staircase selective harmonic elimination for cascaded H-bridge inverters"};
    app.require_subcommand(1);
    Flags f;

    auto* solve_cmd = app.add_subcommand("solve", "Solve switching angles for one operating point");
    add_common(solve_cmd, f);
    solve_cmd->add_option("--pu", f.pu, "Target per-unit output voltage");
    solve_cmd->add_option("--method", f.method, "classic or proposed")->default_str("classic");

    auto* sweep_cmd = app.add_subcommand("sweep", "Solve a grid of per-unit voltages for each method");
    add_common(sweep_cmd, f);
    sweep_cmd->add_option("--pu", f.pu, "Per-unit grid, comma separated");
    sweep_cmd->add_option("--method", f.method, "Methods, comma separated");

    auto* synth_cmd = app.add_subcommand("synth", "Synthesize the staircase waveform and its spectrum");
    add_common(synth_cmd, f);
    synth_cmd->add_option("--angles", f.angles, "Switching angles in degrees, comma separated");
    synth_cmd->add_option("--from", f.from, "Solve record (solve.json) to take angles from");
    synth_cmd->add_option("--samples", f.samples, "Samples per fundamental period");
    synth_cmd->add_option("--freq", f.frequency, "Fundamental frequency [Hz]");

    auto* compare_cmd = app.add_subcommand("compare", "Improvement table from classic and proposed sweep CSVs");
    compare_cmd->add_option("inputs", f.inputs, "Sweep CSV with classic rows, then one with proposed rows")
        ->required();
    compare_cmd->add_option("--out", f.out, "Output directory");

    std::vector<std::string> argv_store = args;
    std::vector<char*> argv;
    for (auto& a : argv_store)
        argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (solve_cmd->parsed())
            return cmd_solve(*solve_cmd, f, out);
        if (sweep_cmd->parsed())
            return cmd_sweep(*sweep_cmd, f, out);
        if (synth_cmd->parsed())
            return cmd_synth(*synth_cmd, f, out);
        if (compare_cmd->parsed())
            return cmd_compare(*compare_cmd, f, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

int run_cli(int argc, char** argv) {
    return run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

} // namespace she
