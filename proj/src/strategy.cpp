#include "she/strategy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <string>
#include <thread>

namespace she {

std::string_view to_string(Method m) { return m == Method::classic ? "classic" : "proposed"; }

Method parse_method(std::string_view text) {
    if (text == "classic")
        return Method::classic;
    if (text == "proposed")
        return Method::proposed;
    throw Error("unknown method '" + std::string(text) + "' (expected classic or proposed)");
}

ResolvedPlant resolve_plant(const InverterConfig& cfg, const OperatingPoint& point, double threshold) {
    cfg.validate();
    if (!(threshold > 0.0) || threshold > 1.0)
        throw Error("threshold must lie in (0, 1]");
    if (!(point.v_out_pu > 0.0) || point.v_out_pu > 1.0)
        throw Error("output per-unit voltage must lie in (0, 1]");

    ResolvedPlant r;
    r.effective = cfg;
    r.effective_vdc = cfg.vdc;
    r.effective_target_pu = point.v_out_pu;
    if (point.method == Method::proposed && point.v_out_pu <= threshold) {
        r.halved = true;
        r.effective_vdc = cfg.vdc / 2.0;
        r.effective_target_pu = 2.0 * point.v_out_pu;
        r.effective.vdc = r.effective_vdc;
        r.effective.base_voltage = cfg.base_voltage / 2.0;
    }
    constexpr double kTolerance = 1e-12;
    if (r.effective_target_pu > 1.0 + kTolerance)
        throw Error("halved plant would need a per-unit target above 1");
    r.effective_target_pu = std::min(r.effective_target_pu, 1.0);
    return r;
}

SweepRow solve_operating_point(const InverterConfig& cfg, const OperatingPoint& point,
                               const PsoParams& pso, const SheOptions& she, double threshold) {
    const ResolvedPlant plant = resolve_plant(cfg, point, threshold);
    const SheProblem problem(plant.effective, plant.effective_target_pu, she);
    SweepRow row;
    row.v_out_pu = point.v_out_pu;
    row.method = point.method;
    row.solve = solve(problem, pso);
    row.angles = row.solve.angles;
    row.effective_vdc = plant.effective_vdc;
    row.effective_target_pu = plant.effective_target_pu;
    row.achieved_v1 = fundamental(plant.effective, row.angles);
    row.achieved_pu = row.achieved_v1 / cfg.base_voltage;
    row.thd_spectral_pct = 100.0 * thd_spectral(plant.effective, row.angles, she.thd_max_order);
    row.thd_total_pct = 100.0 * thd_total(plant.effective, row.angles);
    row.best_cost = row.solve.best_cost;
    row.feasible = row.solve.feasible;
    row.seed = pso.seed;
    return row;
}

std::uint64_t row_seed(std::uint64_t base_seed, std::size_t pu_index) {
    std::uint64_t z = base_seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(pu_index) + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SweepTable sweep(const InverterConfig& cfg, const std::vector<double>& pu_grid,
                 const std::vector<Method>& methods, const PsoParams& pso, const SheOptions& she,
                 const SweepOptions& options) {
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
    std::vector<Method> ordered = methods;
    std::sort(ordered.begin(), ordered.end());
    ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

    struct Job {
        std::size_t pu_index;
        Method method;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < pu_grid.size(); ++i)
        for (Method m : ordered)
            jobs.push_back({i, m});

    SweepTable table(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    auto run = [&](std::size_t j) {
        try {
            PsoParams params = pso;
            params.seed = row_seed(pso.seed, jobs[j].pu_index);
            table[j] = solve_operating_point(cfg, {pu_grid[jobs[j].pu_index], jobs[j].method}, params,
                                             she, options.threshold);
        } catch (...) {
            errors[j] = std::current_exception();
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(options.threads,
                                                              static_cast<unsigned>(jobs.size())));
    if (workers == 1) {
        for (std::size_t j = 0; j < jobs.size(); ++j)
            run(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t j = next++; j < jobs.size(); j = next++)
                    run(j);
            });
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return table;
}

double improvement_pct(double thd_classic, double thd_proposed) {
    if (!(thd_classic > 0.0))
        throw Error("classic THD must be positive to compute an improvement");
    return (thd_classic - thd_proposed) / thd_classic * 100.0;
}

std::vector<Comparison> compare_methods(const SweepTable& table) {
    std::map<double, std::pair<const SweepRow*, const SweepRow*>> by_pu;
    for (const auto& row : table) {
        auto& slot = by_pu[row.v_out_pu];
        (row.method == Method::classic ? slot.first : slot.second) = &row;
    }
    std::vector<Comparison> out;
    for (const auto& [pu, pair] : by_pu) {
        if (!pair.first || !pair.second)
            throw Error("pu " + std::to_string(pu) + " lacks a classic/proposed pair");
        out.push_back({pu, pair.first->thd_total_pct, pair.second->thd_total_pct,
                       improvement_pct(pair.first->thd_total_pct, pair.second->thd_total_pct)});
    }
    return out;
}

std::vector<AnglePoint> angle_trajectory(const SweepTable& table, Method method) {
    std::vector<AnglePoint> out;
    for (const auto& row : table)
        if (row.method == method)
            out.push_back({row.v_out_pu, row.angles.degrees()});
    return out;
}

} // namespace she
