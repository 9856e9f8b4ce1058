#include "she/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace she {

InverterConfig InverterConfig::uniform(int cells, double vdc) {
    InverterConfig cfg;
    cfg.cells = cells;
    cfg.vdc = vdc;
    cfg.dc_sources = cells;
    cfg.base_voltage = cells * vdc;
    return cfg;
}

void InverterConfig::validate() const {
    if (cells < 1)
        throw Error("inverter needs at least one cell, got " + std::to_string(cells));
    if (!(vdc > 0.0) || !std::isfinite(vdc))
        throw Error("cell DC voltage must be positive");
    if (dc_sources < 1)
        throw Error("dc_sources must be at least 1");
    if (!(base_voltage > 0.0) || !std::isfinite(base_voltage))
        throw Error("base voltage must be positive");
}

bool is_strictly_ordered(std::span<const double> radians) {
    if (radians.empty())
        return false;
    double prev = 0.0;
    for (double a : radians) {
        if (!std::isfinite(a) || !(a > prev))
            return false;
        prev = a;
    }
    return prev < kHalfPi;
}

SwitchingAngles::SwitchingAngles(std::vector<double> radians) : angles_(std::move(radians)) {
    if (!is_strictly_ordered(angles_))
        throw Error("switching angles must satisfy 0 < a1 < ... < aS < pi/2");
}

SwitchingAngles SwitchingAngles::from_degrees(std::span<const double> degrees) {
    std::vector<double> rad;
    rad.reserve(degrees.size());
    for (double d : degrees)
        rad.push_back(d * kPi / 180.0);
    return SwitchingAngles(std::move(rad));
}

std::vector<double> SwitchingAngles::degrees() const {
    std::vector<double> out;
    out.reserve(angles_.size());
    for (double a : angles_)
        out.push_back(a * 180.0 / kPi);
    return out;
}

double HarmonicSpectrum::magnitude(std::size_t i) const { return std::abs(amplitudes.at(i)); }

double harmonic_amplitude(const InverterConfig& cfg, std::span<const double> angles, int n) {
    if (n < 1)
        throw Error("harmonic order must be positive");
    if (n % 2 == 0)
        return 0.0;
    double sum = 0.0;
    for (double a : angles)
        sum += std::cos(n * a);
    return 4.0 * cfg.vdc / (n * kPi) * sum;
}

double harmonic_amplitude(const InverterConfig& cfg, const SwitchingAngles& angles, int n) {
    return harmonic_amplitude(cfg, angles.radians(), n);
}

double fundamental(const InverterConfig& cfg, std::span<const double> angles) {
    return harmonic_amplitude(cfg, angles, 1);
}

double fundamental(const InverterConfig& cfg, const SwitchingAngles& angles) {
    return harmonic_amplitude(cfg, angles.radians(), 1);
}

double v1_max(const InverterConfig& cfg) { return 4.0 * cfg.cells * cfg.vdc / kPi; }

double modulation_index(const InverterConfig& cfg, double v1, double tolerance) {
    if (v1 < 0.0)
        throw Error("fundamental amplitude must be nonnegative");
    const double m = kPi * v1 / (4.0 * cfg.cells * cfg.vdc);
    if (m > 1.0 + tolerance)
        throw Error("requested fundamental exceeds the inverter maximum (m = " +
                    std::to_string(m) + ")");
    return m;
}

double target_v1(const InverterConfig& cfg, double modulation) {
    if (!(modulation > 0.0) || modulation > 1.0)
        throw Error("modulation index must lie in (0, 1]");
    return modulation * v1_max(cfg);
}

double per_unit_voltage(const InverterConfig& cfg, double v1) {
    if (v1 < 0.0)
        throw Error("fundamental amplitude must be nonnegative");
    return v1 / cfg.base_voltage;
}

HarmonicSpectrum spectrum(const InverterConfig& cfg, const SwitchingAngles& angles, int max_order) {
    if (max_order < 1)
        throw Error("max_order must be at least 1");
    HarmonicSpectrum out;
    for (int n = 1; n <= max_order; n += 2) {
        out.orders.push_back(n);
        out.amplitudes.push_back(harmonic_amplitude(cfg, angles, n));
    }
    return out;
}

namespace {

// Staircase level (in cells) at phase phi within the first half period.
int level_in_half(std::span<const double> angles, double phi) {
    const double q = phi <= kHalfPi ? phi : kPi - phi;
    const bool rising = phi <= kHalfPi;
    int level = 0;
    for (double a : angles) {
        // [a_k, a_{k+1}) on the rising quarter, its mirror (pi - a_{k+1}, pi - a_k] after.
        if (rising ? q >= a : q > a)
            ++level;
    }
    return level;
}

} // namespace

std::vector<double> synthesize(const InverterConfig& cfg, const SwitchingAngles& angles,
                               int samples_per_period) {
    if (samples_per_period < 4 * static_cast<int>(angles.size()))
        throw Error("need at least 4*S samples per period");
    const auto n = static_cast<long long>(samples_per_period);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        const bool negative = 2 * i >= n;
        const long long twice = negative ? 2 * i - n : 2 * i;
        const double phi = kPi * static_cast<double>(twice) / static_cast<double>(n);
        const double v = level_in_half(angles.radians(), phi) * cfg.vdc;
        out[static_cast<std::size_t>(i)] = negative ? -v : v;
    }
    return out;
}

double rms_closed_form(const InverterConfig& cfg, std::span<const double> angles) {
    double acc = 0.0;
    const std::size_t s = angles.size();
    for (std::size_t k = 0; k < s; ++k) {
        const double next = k + 1 < s ? angles[k + 1] : kHalfPi;
        const double level = static_cast<double>(k + 1) * cfg.vdc;
        acc += level * level * (next - angles[k]);
    }
    return std::sqrt(2.0 / kPi * acc);
}

double rms_closed_form(const InverterConfig& cfg, const SwitchingAngles& angles) {
    return rms_closed_form(cfg, angles.radians());
}

double sampled_sine_amplitude(std::span<const double> samples, int n) {
    if (samples.empty())
        throw Error("no samples");
    const double count = static_cast<double>(samples.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        acc += samples[i] * std::sin(2.0 * kPi * n * static_cast<double>(i) / count);
    return 2.0 * acc / count;
}

} // namespace she
