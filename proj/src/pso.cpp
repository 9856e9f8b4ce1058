#include "she/pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace she {

namespace {

// 53-bit uniform in [0, 1), independent of the standard library's distributions.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

double inertia_at(const PsoParams& params, int iteration) {
    if (params.inertia_schedule == InertiaSchedule::constant || params.max_iterations <= 1)
        return params.inertia;
    const double t = std::min(1.0, static_cast<double>(iteration) / (params.max_iterations - 1));
    return params.inertia + (params.inertia_end - params.inertia) * t;
}

} // namespace

void PsoParams::validate() const {
    if (swarm_size < 2)
        throw Error("swarm_size must be at least 2");
    if (max_iterations < 1)
        throw Error("max_iterations must be positive");
    if (!(inertia >= 0.0 && inertia <= 1.0))
        throw Error("inertia must lie in [0, 1]");
    if (!(inertia_end >= 0.0 && inertia_end <= 1.0))
        throw Error("inertia_end must lie in [0, 1]");
    if (!(cognitive >= 0.0) || !(social >= 0.0))
        throw Error("acceleration coefficients must be nonnegative");
    if (!(velocity_clamp > 0.0))
        throw Error("velocity_clamp must be positive");
    if (!(convergence_tol >= 0.0))
        throw Error("convergence_tol must be nonnegative");
    if (stall_iterations < 1)
        throw Error("stall_iterations must be positive");
}

void repair(std::span<double> position, std::span<double> velocity) {
    const std::size_t n = position.size();
    if (n == 0)
        return;
    if (!velocity.empty()) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return position[a] < position[b]; });
        std::vector<double> p(n), v(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = position[order[i]];
            v[i] = velocity[order[i]];
        }
        std::copy(p.begin(), p.end(), position.begin());
        std::copy(v.begin(), v.end(), velocity.begin());
    } else {
        std::sort(position.begin(), position.end());
    }

    const double lo = kRepairEpsilon;
    const double hi = kHalfPi - kRepairEpsilon;
    for (std::size_t k = 0; k < n; ++k) {
        double& a = position[k];
        const double clamped = std::isfinite(a) ? std::clamp(a, lo, hi) : lo;
        // A particle pushed onto a bound loses its outward momentum.
        if (clamped != a && !velocity.empty())
            velocity[k] = 0.0;
        a = clamped;
    }
    for (std::size_t k = 1; k < n; ++k)
        if (position[k] < position[k - 1] + kRepairEpsilon)
            position[k] = position[k - 1] + kRepairEpsilon;
    // Ties pushed past the top bound are walked back down.
    if (position[n - 1] > hi) {
        position[n - 1] = hi;
        for (std::size_t k = n - 1; k-- > 0;)
            if (position[k] > position[k + 1] - kRepairEpsilon)
                position[k] = position[k + 1] - kRepairEpsilon;
    }
}

double constraint_violation(std::span<const double> position) {
    if (position.empty())
        return 0.0;
    double v = std::max(0.0, kRepairEpsilon - position.front());
    v += std::max(0.0, position.back() - (kHalfPi - kRepairEpsilon));
    for (std::size_t k = 1; k < position.size(); ++k)
        v += std::max(0.0, position[k - 1] + kRepairEpsilon - position[k]);
    return v;
}

double swarm_objective(const SheProblem& problem, const PsoParams& params,
                       std::span<const double> position) {
    if (params.bound_policy == BoundPolicy::repair_sort_clamp)
        return cost(problem, position);
    std::vector<double> fixed(position.begin(), position.end());
    repair(fixed);
    return cost(problem, fixed) + kPenaltyWeight * constraint_violation(position);
}

SwarmState init_swarm(const SheProblem& problem, const PsoParams& params) {
    params.validate();
    SwarmState s;
    s.dimensions = problem.config().cells;
    s.rng.seed(params.seed);
    const auto count = static_cast<std::size_t>(params.swarm_size);
    const auto dims = static_cast<std::size_t>(s.dimensions);
    s.positions.assign(count, std::vector<double>(dims));
    s.velocities.assign(count, std::vector<double>(dims));
    for (std::size_t i = 0; i < count; ++i) {
        for (auto& x : s.positions[i])
            x = uniform(s.rng, 0.0, kHalfPi);
        std::sort(s.positions[i].begin(), s.positions[i].end());
        repair(s.positions[i]);
        for (auto& v : s.velocities[i])
            v = uniform(s.rng, -params.velocity_clamp, params.velocity_clamp);
    }
    s.personal_best = s.positions;
    s.personal_best_cost.resize(count);
    std::size_t best = 0;
    for (std::size_t i = 0; i < count; ++i) {
        s.personal_best_cost[i] = swarm_objective(problem, params, s.positions[i]);
        if (s.personal_best_cost[i] < s.personal_best_cost[best])
            best = i;
    }
    s.global_best = s.personal_best[best];
    s.global_best_cost = s.personal_best_cost[best];
    return s;
}

void step(SwarmState& s, const SheProblem& problem, const PsoParams& params) {
    const double w = inertia_at(params, s.iteration);
    const double clamp = params.velocity_clamp;
    const std::size_t dims = static_cast<std::size_t>(s.dimensions);

    for (std::size_t i = 0; i < s.positions.size(); ++i) {
        auto& x = s.positions[i];
        auto& v = s.velocities[i];
        const auto& p = s.personal_best[i];
        for (std::size_t d = 0; d < dims; ++d) {
            const double r1 = uniform01(s.rng);
            const double r2 = uniform01(s.rng);
            double vel = w * v[d] + params.cognitive * r1 * (p[d] - x[d]) +
                         params.social * r2 * (s.global_best[d] - x[d]);
            v[d] = std::clamp(vel, -clamp, clamp);
            x[d] += v[d];
        }
        if (params.bound_policy == BoundPolicy::repair_sort_clamp)
            repair(x, v);
    }

    // Costs are pure; the reduction below runs in particle order so ties keep
    // the incumbent.
    for (std::size_t i = 0; i < s.positions.size(); ++i) {
        const double c = swarm_objective(problem, params, s.positions[i]);
        if (c < s.personal_best_cost[i]) {
            s.personal_best_cost[i] = c;
            s.personal_best[i] = s.positions[i];
        }
    }
    for (std::size_t i = 0; i < s.positions.size(); ++i) {
        if (s.personal_best_cost[i] < s.global_best_cost) {
            s.global_best_cost = s.personal_best_cost[i];
            s.global_best = s.personal_best[i];
        }
    }
    ++s.iteration;
}

namespace {

SolveResult finish(const SheProblem& problem, std::vector<double> best) {
    repair(best);
    SolveResult r;
    r.angles = SwitchingAngles(std::move(best));
    r.best_cost = cost(problem, r.angles);
    r.residuals = residuals(problem, r.angles);
    r.feasible = is_feasible(problem, r.residuals);
    return r;
}

} // namespace

SolveResult solve(const SheProblem& problem, const PsoParams& params) {
    SwarmState swarm = init_swarm(problem, params);
    std::vector<TracePoint> trace{{0, swarm.global_best_cost}};
    int stall = 0;
    while (swarm.iteration < params.max_iterations &&
           !(swarm.global_best_cost < params.convergence_tol) && stall < params.stall_iterations) {
        const double before = swarm.global_best_cost;
        step(swarm, problem, params);
        trace.push_back({swarm.iteration, swarm.global_best_cost});
        stall = swarm.global_best_cost < before ? 0 : stall + 1;
    }

    SolveResult r = finish(problem, swarm.global_best);
    r.iterations_used = swarm.iteration;
    r.evaluations = static_cast<std::uint64_t>(params.swarm_size) *
                    static_cast<std::uint64_t>(swarm.iteration + 1);
    r.convergence_trace = std::move(trace);
    r.seed = params.seed;
    r.params = params;
    return r;
}

int grid_points(double resolution) {
    if (!(resolution > 0.0))
        throw Error("grid resolution must be positive");
    // k * resolution < pi/2, with slack so 1 degree gives 89 points, not 90.
    const double limit = kHalfPi * (1.0 - 1e-12);
    int m = static_cast<int>(std::floor(limit / resolution));
    while (m > 0 && !(m * resolution < limit))
        --m;
    return m;
}

std::uint64_t grid_evaluation_count(int cells, double resolution) {
    const auto m = static_cast<std::uint64_t>(grid_points(resolution));
    const auto s = static_cast<std::uint64_t>(cells);
    if (s > m)
        return 0;
    // C(m, s) accumulated as a product of exact partial binomials.
    std::uint64_t c = 1;
    for (std::uint64_t i = 1; i <= s; ++i) {
        const std::uint64_t num = m - s + i;
        if (c > std::numeric_limits<std::uint64_t>::max() / num)
            return std::numeric_limits<std::uint64_t>::max();
        c = c * num / i;
    }
    return c;
}

SolveResult grid_oracle(const SheProblem& problem, double resolution, std::uint64_t budget) {
    const int cells = problem.config().cells;
    if (cells > 4)
        throw Error("grid oracle is limited to S <= 4");
    constexpr double kMinResolution = 0.1 * kPi / 180.0;
    if (resolution < kMinResolution * (1.0 - 1e-12))
        throw Error("grid resolution must be at least 0.1 degree");
    const std::uint64_t predicted = grid_evaluation_count(cells, resolution);
    if (predicted > budget)
        throw Error("grid oracle would need " + std::to_string(predicted) +
                    " evaluations, budget is " + std::to_string(budget));
    const int m = grid_points(resolution);
    if (m < cells)
        throw Error("grid too coarse for the number of angles");

    std::vector<int> idx(static_cast<std::size_t>(cells));
    std::iota(idx.begin(), idx.end(), 1);
    std::vector<double> angles(idx.size());
    std::vector<double> best;
    double best_cost = std::numeric_limits<double>::infinity();
    std::uint64_t evaluations = 0;
    for (;;) {
        for (std::size_t k = 0; k < idx.size(); ++k)
            angles[k] = idx[k] * resolution;
        const double c = cost(problem, angles);
        ++evaluations;
        if (c < best_cost) {
            best_cost = c;
            best = angles;
        }
        // Advance to the next strictly increasing index tuple in [1, m].
        int k = cells - 1;
        while (k >= 0 && idx[static_cast<std::size_t>(k)] == m - (cells - 1 - k))
            --k;
        if (k < 0)
            break;
        ++idx[static_cast<std::size_t>(k)];
        for (int j = k + 1; j < cells; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }

    SolveResult r;
    r.angles = SwitchingAngles(best);
    r.best_cost = cost(problem, r.angles);
    r.residuals = residuals(problem, r.angles);
    r.feasible = is_feasible(problem, r.residuals);
    r.evaluations = evaluations;
    return r;
}

} // namespace she
