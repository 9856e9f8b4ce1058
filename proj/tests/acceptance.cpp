// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "she/cli.hpp"
#include "she/report.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>
#include <thread>

using namespace she;
namespace fs = std::filesystem;

namespace {

const InverterConfig kPlant = InverterConfig::uniform(3, 100.0);
const std::vector<double> kTableGrid{0.1, 0.2, 0.3, 0.4, 0.5};
const double kPaperClassic[] = {158.62, 84.66, 47.29, 31.29, 30.41};
const double kPaperProposed[] = {87.94, 33.23, 29.59, 18.66, 20.61};

constexpr double kRelativeThdTolerance = 0.15;
constexpr double kEliminationRatio = 1e-3;
// Coarse-grid bracket: at 0.5 degree spacing a near-exact solution region shows
// up as 3rd/5th residuals below 5% of the fundamental.
constexpr double kGridBracketRatio = 0.05;
constexpr double kParsevalAbs = 0.005;
constexpr double kSquareWaveTol = 1e-6;
constexpr double kTrackingRel = 0.01;
constexpr double kSweepSeconds = 120.0;
constexpr double kGridSeconds = 60.0;

int failures = 0;

void report(const std::string& id, bool ok, const std::string& what) {
    fmt::print("[{}] {} {}\n", ok ? "PASS" : "FAIL", id, what);
    if (!ok)
        ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const SweepRow& row_of(const SweepTable& t, double pu, Method m) {
    for (const auto& r : t)
        if (r.v_out_pu == pu && r.method == m)
            return r;
    throw Error("row missing");
}

void criterion_table(const SweepTable& table, double elapsed) {
    bool directional = true;
    bool quantitative = true;
    fmt::print("    pu    classic%  (reported) proposed% (reported)\n");
    for (std::size_t i = 0; i < kTableGrid.size(); ++i) {
        const double c = row_of(table, kTableGrid[i], Method::classic).thd_total_pct;
        const double p = row_of(table, kTableGrid[i], Method::proposed).thd_total_pct;
        directional = directional && p < c;
        const bool c_ok = std::abs(c - kPaperClassic[i]) <= kRelativeThdTolerance * kPaperClassic[i];
        const bool p_ok = std::abs(p - kPaperProposed[i]) <= kRelativeThdTolerance * kPaperProposed[i];
        quantitative = quantitative && c_ok && p_ok;
        fmt::print("    {:.1f}  {:8.2f}  ({:6.2f}){}  {:8.2f}  ({:6.2f}){}\n", kTableGrid[i], c, kPaperClassic[i],
                   c_ok ? " " : "!", p, kPaperProposed[i], p_ok ? " " : "!");
    }
    report("C1", directional && elapsed < kSweepSeconds,
           fmt::format("Table 1 direction: proposed THD < classic THD at all five points (sweep {:.2f} s)", elapsed));
    report("C2", quantitative, "Table 1 values within +/-15% relative for both methods");
}

void criterion_elimination(const PsoParams& pso) {
    struct Case {
        double pu;
        Method method;
    };
    for (const Case c : {Case{0.8, Method::classic}, Case{0.3, Method::proposed}}) {
        const auto plant = resolve_plant(kPlant, {c.pu, c.method});
        const SheProblem problem(plant.effective, plant.effective_target_pu, SheOptions{});
        const auto grid = grid_oracle(problem, 0.5 * kPi / 180.0);
        const double gv1 = fundamental(plant.effective, grid.angles);
        const double g3 = std::abs(grid.residuals.harmonic_values[0]) / gv1;
        const double g5 = std::abs(grid.residuals.harmonic_values[1]) / gv1;
        const bool bracket = g3 < kGridBracketRatio && g5 < kGridBracketRatio;

        PsoParams p = pso;
        const auto row = solve_operating_point(kPlant, {c.pu, c.method}, p, SheOptions{});
        const double r3 = std::abs(row.solve.residuals.harmonic_values[0]) / row.achieved_v1;
        const double r5 = std::abs(row.solve.residuals.harmonic_values[1]) / row.achieved_v1;
        const bool eliminated = r3 < kEliminationRatio && r5 < kEliminationRatio;
        report(fmt::format("C3 pu={} {}", c.pu, to_string(c.method)), bracket && eliminated,
               fmt::format("|v3|/v1={:.3g} |v5|/v1={:.3g} (need < 1e-3); grid 0.5deg bracket |v3|/v1={:.3g} "
                           "|v5|/v1={:.3g} (need < {})",
                           r3, r5, g3, g5, kGridBracketRatio));
    }
}

void criterion_oracle(const SweepTable& table) {
    bool ok = true;
    double slowest = 0.0;
    for (const auto& row : table) {
        const auto plant = resolve_plant(kPlant, {row.v_out_pu, row.method});
        const SheProblem problem(plant.effective, plant.effective_target_pu, SheOptions{});
        const auto t0 = std::chrono::steady_clock::now();
        const auto grid = grid_oracle(problem, kPi / 180.0);
        slowest = std::max(slowest, seconds_since(t0));
        const bool dominates = row.best_cost <= grid.best_cost;
        ok = ok && dominates;
        fmt::print("    pu {:.1f} {:<8} pso {:.6g}  grid(1deg) {:.6g}{}\n", row.v_out_pu, to_string(row.method),
                   row.best_cost, grid.best_cost, dominates ? "" : "  <-- worse");
    }
    report("C4", ok && slowest < kGridSeconds,
           fmt::format("PSO cost <= 1-degree grid cost at all Table 1 points (slowest grid {:.3f} s)", slowest));
}

void criterion_identities(const SweepTable& table) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, kHalfPi);

    bool even_zero = true;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> a{u(rng), u(rng), u(rng)};
        std::sort(a.begin(), a.end());
        if (!is_strictly_ordered(a))
            continue;
        for (int n = 2; n <= 100; n += 2)
            even_zero = even_zero && harmonic_amplitude(kPlant, a, n) == 0.0;
    }
    report("C5a", even_zero, "even harmonics are exactly zero");

    bool vmax = true;
    for (int s = 1; s <= 12; ++s)
        for (double vdc : {1.0, 50.0, 100.0, 1234.5}) {
            const auto cfg = InverterConfig::uniform(s, vdc);
            const double expected = 4.0 * s * vdc / kPi;
            vmax = vmax && std::abs(v1_max(cfg) - expected) <= 4.0 * std::numeric_limits<double>::epsilon() * expected;
            const double all_zero = harmonic_amplitude(cfg, std::vector<double>(static_cast<std::size_t>(s), 0.0), 1);
            vmax = vmax && std::abs(all_zero - expected) <= 4.0 * std::numeric_limits<double>::epsilon() * expected;
        }
    report("C5b", vmax, "v1_max = 4 S vdc / pi to machine precision");

    bool preserved = true;
    std::uniform_real_distribution<double> pu(1e-6, kDefaultThreshold);
    for (int i = 0; i < 100000; ++i) {
        const double x = pu(rng);
        const auto r = resolve_plant(kPlant, {x, Method::proposed});
        preserved = preserved && kPlant.cells * r.effective_vdc * r.effective_target_pu == kPlant.cells * kPlant.vdc * x;
    }
    report("C5c", preserved, "halved-link output preservation S*vdc/2*2M = S*vdc*M holds exactly");

    double worst = 0.0;
    for (const auto& row : table) {
        const auto plant = resolve_plant(kPlant, {row.v_out_pu, row.method}).effective;
        worst = std::max(worst, std::abs(thd_total(plant, row.angles) - thd_spectral(plant, row.angles, 10001)));
    }
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a{u(rng), u(rng), u(rng)};
        std::sort(a.begin(), a.end());
        if (!is_strictly_ordered(a) || std::abs(fundamental(kPlant, a)) < 1.0)
            continue;
        const SwitchingAngles angles(a);
        worst = std::max(worst, std::abs(thd_total(kPlant, angles) - thd_spectral(kPlant, angles, 10001)));
    }
    report("C5d", worst <= kParsevalAbs,
           fmt::format("thd_spectral(10001) within 0.5% absolute of thd_total (worst {:.3g}%)", 100.0 * worst));

    const double square = thd_total(InverterConfig::uniform(1, 1.0), SwitchingAngles({1e-12}));
    const double closed = std::sqrt(kPi * kPi / 8.0 - 1.0);
    report("C5e", std::abs(square - closed) <= kSquareWaveTol,
           fmt::format("square-wave THD {:.9f} vs sqrt(pi^2/8 - 1) = {:.9f}", square, closed));
}

int run_quiet(std::vector<std::string> args) {
    args.insert(args.begin(), "she");
    std::ostringstream out, err;
    return run_cli(args, out, err);
}

void criterion_determinism() {
    const auto root = fs::temp_directory_path() / "she_acceptance";
    fs::remove_all(root);
    const int a = run_quiet({"sweep", "--out", (root / "a").string()});
    const int b = run_quiet({"sweep", "--out", (root / "b").string()});
    bool same = a != 1 && a == b;
    int files = 0;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
        if (entry.path().extension() != ".csv")
            continue;
        ++files;
        const auto other = root / "b" / entry.path().filename();
        same = same && fs::exists(other) && read_file(entry.path()) == read_file(other);
    }
    report("C6", same && files == 5, fmt::format("two sweep runs give byte-identical CSVs ({} files)", files));
}

void criterion_tracking(const PsoParams& pso) {
    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i)
        grid.push_back(0.05 * i);
    SweepOptions options;
    options.threads = std::max(1u, std::thread::hardware_concurrency());
    const auto table = sweep(kPlant, grid, {Method::classic, Method::proposed}, pso, SheOptions{}, options);
    int feasible = 0;
    double worst = 0.0;
    for (const auto& r : table) {
        if (!r.feasible)
            continue;
        ++feasible;
        const double target = r.v_out_pu * 300.0;
        worst = std::max(worst, std::abs(r.achieved_v1 - target) / target);
    }
    report("C7", feasible > 0 && worst <= kTrackingRel,
           fmt::format("achieved v1 within 1% of pu*300 V at all {} feasible rows of a 0.05..1.0 sweep "
                       "(worst {:.3g}%)",
                       feasible, 100.0 * worst));
}

} // namespace

int main() {
    try {
        const PsoParams pso;
        fmt::print("reference plant: S=3, vdc=100 V, base 300 V; PSO swarm {} x {} iterations, seed {}\n",
                   pso.swarm_size, pso.max_iterations, pso.seed);

        const auto t0 = std::chrono::steady_clock::now();
        const auto table = sweep(kPlant, kTableGrid, {Method::classic, Method::proposed}, pso, SheOptions{});
        const double elapsed = seconds_since(t0);

        criterion_table(table, elapsed);
        criterion_elimination(pso);
        criterion_oracle(table);
        criterion_identities(table);
        criterion_determinism();
        criterion_tracking(pso);
    } catch (const std::exception& e) {
        fmt::print("[FAIL] acceptance suite aborted: {}\n", e.what());
        return 1;
    }
    fmt::print("{} criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
