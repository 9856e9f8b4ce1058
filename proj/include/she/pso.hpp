#pragma once

// Seeded particle swarm optimiser over ordered angle vectors, and an
// exhaustive grid search used to validate it on small instances.

#include "she/problem.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace she {

enum class BoundPolicy { repair_sort_clamp, penalty };
enum class InertiaSchedule { constant, linear_decay };

struct PsoParams {
    int swarm_size = 100;
    int max_iterations = 3000;
    double inertia = 0.72;
    double cognitive = 1.49;
    double social = 1.49;
    std::uint64_t seed = 20230517;
    double velocity_clamp = 0.3; // rad
    BoundPolicy bound_policy = BoundPolicy::repair_sort_clamp;
    double convergence_tol = 1e-6;
    int stall_iterations = 300;
    InertiaSchedule inertia_schedule = InertiaSchedule::constant;
    double inertia_end = 0.4; // only read by linear_decay

    void validate() const;
    bool operator==(const PsoParams&) const = default;
};

/// Margin kept from 0, pi/2 and between neighbouring angles after repair.
inline constexpr double kRepairEpsilon = 1e-4;

/// Weight applied to constraint violation (radians) under BoundPolicy::penalty.
inline constexpr double kPenaltyWeight = 1e3;

/// Sorts ascending, clamps into [eps, pi/2 - eps] and pushes ties apart by eps.
/// When `velocity` is non-empty it is permuted together with `position`.
void repair(std::span<double> position, std::span<double> velocity = {});

/// Total distance (radians) by which `position` leaves the ordered region.
double constraint_violation(std::span<const double> position);

struct SwarmState {
    int dimensions = 0;
    std::vector<std::vector<double>> positions;
    std::vector<std::vector<double>> velocities;
    std::vector<std::vector<double>> personal_best;
    std::vector<double> personal_best_cost;
    std::vector<double> global_best;
    double global_best_cost = 0.0;
    int iteration = 0;
    std::mt19937_64 rng;
};

SwarmState init_swarm(const SheProblem& problem, const PsoParams& params);

/// One velocity/position update of every particle followed by best tracking.
void step(SwarmState& swarm, const SheProblem& problem, const PsoParams& params);

/// Objective the swarm sees for a raw position under the configured policy.
double swarm_objective(const SheProblem& problem, const PsoParams& params,
                       std::span<const double> position);

struct TracePoint {
    int iteration = 0;
    double best_cost = 0.0;
    bool operator==(const TracePoint&) const = default;
};

struct SolveResult {
    SwitchingAngles angles{{kHalfPi / 2.0}};
    double best_cost = 0.0;
    Residuals residuals;
    bool feasible = false;
    int iterations_used = 0;
    std::uint64_t evaluations = 0;
    std::vector<TracePoint> convergence_trace;
    std::uint64_t seed = 0;
    PsoParams params;
};

SolveResult solve(const SheProblem& problem, const PsoParams& params);

inline constexpr std::uint64_t kDefaultGridBudget = 100'000'000;

/// Number of grid points k * resolution strictly inside (0, pi/2).
int grid_points(double resolution);

/// C(grid_points, S), saturating at UINT64_MAX.
std::uint64_t grid_evaluation_count(int cells, double resolution);

/// Exhaustive search over strictly increasing tuples of grid angles.
SolveResult grid_oracle(const SheProblem& problem, double resolution,
                        std::uint64_t budget = kDefaultGridBudget);

} // namespace she
