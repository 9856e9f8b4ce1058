#include "she/problem.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace she {

std::vector<int> default_eliminate_orders(int count, HarmonicSet set) {
    std::vector<int> out;
    for (int n = 3; static_cast<int>(out.size()) < count; n += 2) {
        if (set == HarmonicSet::three_phase && n % 3 == 0)
            continue;
        out.push_back(n);
    }
    return out;
}

SheProblem::SheProblem(InverterConfig cfg, double target_pu, SheOptions options)
    : cfg_(cfg), target_pu_(target_pu), options_(std::move(options)) {
    cfg_.validate();
    if (!(target_pu_ > 0.0) || target_pu_ > 1.0)
        throw Error("target per-unit voltage must lie in (0, 1], got " + std::to_string(target_pu_));
    std::set<int> seen;
    for (int h : options_.eliminate_orders) {
        if (h < 3 || h % 2 == 0)
            throw Error("eliminated harmonic orders must be odd and >= 3, got " + std::to_string(h));
        if (!seen.insert(h).second)
            throw Error("duplicate eliminated harmonic order " + std::to_string(h));
    }
    if (options_.weight_fundamental < 0.0 || options_.weight_harmonics < 0.0)
        throw Error("cost weights must be nonnegative");
    if (options_.thd_max_order < 3)
        throw Error("thd_max_order must be at least 3");
}

Residuals residuals(const SheProblem& problem, const SwitchingAngles& angles) {
    const auto& cfg = problem.config();
    if (static_cast<int>(angles.size()) != cfg.cells)
        throw Error("expected " + std::to_string(cfg.cells) + " angles, got " +
                    std::to_string(angles.size()));
    Residuals r;
    r.fundamental_error = fundamental(cfg, angles) - problem.target_v1();
    r.harmonic_values.reserve(problem.eliminate_orders().size());
    for (int h : problem.eliminate_orders())
        r.harmonic_values.push_back(harmonic_amplitude(cfg, angles, h));
    return r;
}

double cost(const SheProblem& problem, std::span<const double> angles) {
    const auto& cfg = problem.config();
    const double norm = cfg.dc_sources * cfg.vdc;
    double f = problem.weight_fundamental() *
               std::abs(problem.target_pu() - std::abs(fundamental(cfg, angles)) / norm);
    double harmonics = 0.0;
    for (int h : problem.eliminate_orders())
        harmonics += std::abs(harmonic_amplitude(cfg, angles, h)) / (h * norm);
    return f + problem.weight_harmonics() * harmonics;
}

double cost(const SheProblem& problem, const SwitchingAngles& angles) {
    if (static_cast<int>(angles.size()) != problem.config().cells)
        throw Error("angle count does not match the number of cells");
    return cost(problem, angles.radians());
}

bool is_feasible(const SheProblem& problem, const Residuals& r) {
    const double limit = kFeasibleResidualPu * problem.config().base_voltage;
    if (!(std::abs(r.fundamental_error) < limit))
        return false;
    return std::all_of(r.harmonic_values.begin(), r.harmonic_values.end(),
                       [&](double v) { return std::abs(v) < limit; });
}

namespace {

double checked_fundamental(const InverterConfig& cfg, const SwitchingAngles& angles) {
    const double v1 = std::abs(fundamental(cfg, angles));
    if (v1 < 1e-9 * cfg.vdc)
        throw Error("THD undefined: fundamental is zero");
    return v1;
}

} // namespace

double thd_spectral(const InverterConfig& cfg, const SwitchingAngles& angles, int max_order) {
    if (max_order < 3)
        throw Error("thd_spectral needs max_order >= 3");
    const double v1 = checked_fundamental(cfg, angles);
    double acc = 0.0;
    for (int n = 3; n <= max_order; n += 2) {
        const double v = harmonic_amplitude(cfg, angles, n);
        acc += v * v;
    }
    return std::sqrt(acc) / v1;
}

double thd_total(const InverterConfig& cfg, const SwitchingAngles& angles) {
    const double v1 = checked_fundamental(cfg, angles);
    const double rms = rms_closed_form(cfg, angles);
    return std::sqrt(std::max(0.0, 2.0 * rms * rms - v1 * v1)) / v1;
}

} // namespace she
