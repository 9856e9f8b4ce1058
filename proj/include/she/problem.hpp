#pragma once

// SHE equation system, the weighted objective minimised by the swarm, and
// distortion metrics.

#include "she/waveform.hpp"

#include <span>
#include <vector>

namespace she {

enum class HarmonicSet {
    single_phase, // 3, 5, 7, ... (triplens included)
    three_phase,  // 5, 7, 11, 13, ... (triplens skipped)
};

/// The first `count` odd orders >= 3 of the chosen set.
std::vector<int> default_eliminate_orders(int count, HarmonicSet set = HarmonicSet::single_phase);

struct SheOptions {
    std::vector<int> eliminate_orders{3, 5};
    double weight_fundamental = 100.0; // A
    double weight_harmonics = 1.0;     // B
    int thd_max_order = 49;

    bool operator==(const SheOptions&) const = default;
};

class SheProblem {
public:
    SheProblem(InverterConfig cfg, double target_pu, SheOptions options = {});

    const InverterConfig& config() const { return cfg_; }
    double target_pu() const { return target_pu_; }
    double target_v1() const { return target_pu_ * cfg_.base_voltage; }
    const std::vector<int>& eliminate_orders() const { return options_.eliminate_orders; }
    double weight_fundamental() const { return options_.weight_fundamental; }
    double weight_harmonics() const { return options_.weight_harmonics; }
    const SheOptions& options() const { return options_; }

    /// One equation per free angle beyond the fundamental.
    bool exact_elimination_intended() const {
        return static_cast<int>(options_.eliminate_orders.size()) == cfg_.cells - 1;
    }

private:
    InverterConfig cfg_;
    double target_pu_;
    SheOptions options_;
};

struct Residuals {
    double fundamental_error = 0.0;     // achieved v1 - target v1, volts
    std::vector<double> harmonic_values; // signed, one per eliminated order
};

Residuals residuals(const SheProblem& problem, const SwitchingAngles& angles);

/// A |target - |v1|/(D vdc)| + B sum_h (1/h) |v_h|/(D vdc).
double cost(const SheProblem& problem, std::span<const double> angles);
double cost(const SheProblem& problem, const SwitchingAngles& angles);

/// Per-unit floor below which a residual counts as eliminated.
inline constexpr double kFeasibleResidualPu = 1e-3;

/// Every residual magnitude below kFeasibleResidualPu of the base voltage.
bool is_feasible(const SheProblem& problem, const Residuals& r);

/// sqrt(sum_{n=3,5..max_order} v_n^2) / |v1|, as a fraction.
double thd_spectral(const InverterConfig& cfg, const SwitchingAngles& angles, int max_order);

/// All-harmonic THD from the closed-form RMS.
double thd_total(const InverterConfig& cfg, const SwitchingAngles& angles);

} // namespace she
