#pragma once

// Fourier model of the quarter-wave symmetric staircase produced by a
// cascaded H-bridge inverter with S equal DC cells.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace she {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfPi = kPi / 2.0;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InverterConfig {
    int cells = 3;             // S, also the number of switching angles
    double vdc = 100.0;        // volts per cell
    int dc_sources = 3;        // D
    double base_voltage = 300; // volts, per-unit base for the output

    /// Plant with D = S and base = S * vdc.
    static InverterConfig uniform(int cells, double vdc);

    int levels() const { return 2 * cells + 1; }

    /// Throws she::Error when a field is out of range.
    void validate() const;

    bool operator==(const InverterConfig&) const = default;
};

/// Strictly increasing angles in (0, pi/2), radians.
class SwitchingAngles {
public:
    explicit SwitchingAngles(std::vector<double> radians);

    static SwitchingAngles from_degrees(std::span<const double> degrees);

    std::span<const double> radians() const { return angles_; }
    std::vector<double> degrees() const;
    std::size_t size() const { return angles_.size(); }
    double operator[](std::size_t k) const { return angles_[k]; }

    bool operator==(const SwitchingAngles&) const = default;

private:
    std::vector<double> angles_;
};

/// True when the values form a valid SwitchingAngles.
bool is_strictly_ordered(std::span<const double> radians);

/// Odd harmonic orders with their signed peak amplitudes.
struct HarmonicSpectrum {
    std::vector<int> orders;
    std::vector<double> amplitudes;

    std::size_t size() const { return orders.size(); }
    double magnitude(std::size_t i) const;
};

// The span overloads skip validation; the solver calls them in its inner
// loop with positions that are already repaired.
double harmonic_amplitude(const InverterConfig& cfg, std::span<const double> angles, int n);
double harmonic_amplitude(const InverterConfig& cfg, const SwitchingAngles& angles, int n);

double fundamental(const InverterConfig& cfg, std::span<const double> angles);
double fundamental(const InverterConfig& cfg, const SwitchingAngles& angles);

/// All-zero-angle fundamental, 4 S vdc / pi.
double v1_max(const InverterConfig& cfg);

/// pi v1 / (4 S vdc). Throws when v1 < 0 or the index exceeds 1 + tolerance.
double modulation_index(const InverterConfig& cfg, double v1, double tolerance = 1e-9);

/// Inverse of modulation_index, valid for 0 < m <= 1.
double target_v1(const InverterConfig& cfg, double modulation);

/// v1 / base_voltage. This is the control variable used by the strategy layer.
double per_unit_voltage(const InverterConfig& cfg, double v1);

/// Odd orders 1, 3, ..., max_order.
HarmonicSpectrum spectrum(const InverterConfig& cfg, const SwitchingAngles& angles, int max_order);

/// One fundamental period sampled at 2 pi i / samples, i = 0 .. samples-1.
/// Steps are left-closed in the first quarter: level k on [alpha_k, alpha_{k+1}).
std::vector<double> synthesize(const InverterConfig& cfg, const SwitchingAngles& angles,
                               int samples_per_period);

/// Exact RMS of the staircase.
double rms_closed_form(const InverterConfig& cfg, std::span<const double> angles);
double rms_closed_form(const InverterConfig& cfg, const SwitchingAngles& angles);

/// Peak sine amplitude of harmonic n estimated from uniformly sampled data
/// covering one period (single-bin DFT).
double sampled_sine_amplitude(std::span<const double> samples, int n);

} // namespace she
