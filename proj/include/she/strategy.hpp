#pragma once

// Classic fixed-DC operation versus DC-link halving at low output voltage,
// and sweeps over the per-unit output range.

#include "she/pso.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace she {

enum class Method { classic, proposed };

std::string_view to_string(Method m);
Method parse_method(std::string_view text);

inline constexpr double kDefaultThreshold = 0.5;

struct OperatingPoint {
    double v_out_pu = 0.0;
    Method method = Method::classic;
};

struct ResolvedPlant {
    InverterConfig effective; // vdc and base scaled together
    double effective_vdc = 0.0;
    double effective_target_pu = 0.0;
    bool halved = false;
};

/// Proposed method with v_out_pu <= threshold halves the cell voltage and
/// doubles the per-unit target; every other case is the identity.
ResolvedPlant resolve_plant(const InverterConfig& cfg, const OperatingPoint& point,
                            double threshold = kDefaultThreshold);

struct SweepRow {
    double v_out_pu = 0.0;
    Method method = Method::classic;
    SwitchingAngles angles{{kHalfPi / 2.0}};
    double effective_vdc = 0.0;
    double effective_target_pu = 0.0;
    double achieved_v1 = 0.0;
    double achieved_pu = 0.0; // against the original base voltage
    double thd_spectral_pct = 0.0;
    double thd_total_pct = 0.0;
    double best_cost = 0.0;
    bool feasible = false;
    std::uint64_t seed = 0;
    SolveResult solve; // full solver output under the effective plant
};

using SweepTable = std::vector<SweepRow>;

SweepRow solve_operating_point(const InverterConfig& cfg, const OperatingPoint& point,
                               const PsoParams& pso, const SheOptions& she,
                               double threshold = kDefaultThreshold);

/// splitmix64 of base ^ index.
std::uint64_t row_seed(std::uint64_t base_seed, std::size_t pu_index);

struct SweepOptions {
    double threshold = kDefaultThreshold;
    unsigned threads = 1; // rows are independent; output order does not depend on this
};

SweepTable sweep(const InverterConfig& cfg, const std::vector<double>& pu_grid,
                 const std::vector<Method>& methods, const PsoParams& pso, const SheOptions& she,
                 const SweepOptions& options = {});

struct Comparison {
    double v_out_pu = 0.0;
    double thd_classic_pct = 0.0;
    double thd_proposed_pct = 0.0;
    double improvement_pct = 0.0;
};

double improvement_pct(double thd_classic, double thd_proposed);

/// Pairs classic and proposed rows by pu using thd_total. Throws when a pu
/// lacks either method.
std::vector<Comparison> compare_methods(const SweepTable& table);

/// Angle trajectory (pu, angles) of one method, for angle-versus-voltage plots.
struct AnglePoint {
    double v_out_pu = 0.0;
    std::vector<double> degrees;
};
std::vector<AnglePoint> angle_trajectory(const SweepTable& table, Method method);

} // namespace she
