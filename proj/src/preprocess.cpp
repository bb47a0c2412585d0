#include "llt/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

namespace llt {

namespace {

enum class Band { Low, High };

std::vector<Biquad> butterworth(int order, double cutoff_hz, double fs, Band band) {
    if (order < 2 || order % 2 != 0) throw ParameterError(fmt::format("filter order must be even and >= 2, got {}", order));
    if (!(fs > 0.0)) throw ParameterError("sampling rate must be positive");
    if (!(cutoff_hz > 0.0) || cutoff_hz >= fs / 2.0)
        throw ParameterError(fmt::format("cutoff {} Hz must lie in (0, Nyquist = {} Hz)", cutoff_hz, fs / 2.0));

    const double k = std::tan(std::numbers::pi * cutoff_hz / fs);  // prewarped
    std::vector<Biquad> sections;
    for (int s = 0; s < order / 2; ++s) {
        const double alpha = std::numbers::pi * (2.0 * s + 1.0) / (2.0 * order);
        const double inv_q = 2.0 * std::cos(alpha);
        const double norm = 1.0 / (1.0 + k * inv_q + k * k);
        Biquad q{};
        if (band == Band::Low) {
            q.b0 = k * k * norm;
            q.b1 = 2.0 * q.b0;
            q.b2 = q.b0;
        } else {
            q.b0 = norm;
            q.b1 = -2.0 * norm;
            q.b2 = norm;
        }
        q.a1 = 2.0 * (k * k - 1.0) * norm;
        q.a2 = (1.0 - k * inv_q + k * k) * norm;
        sections.push_back(q);
    }
    return sections;
}

std::size_t pad_length(std::size_t sections) { return 3 * (2 * sections + 1); }

}  // namespace

std::size_t PreprocessConfig::refractory_for(double fs) const {
    if (refractory_samples) return *refractory_samples;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.2 * fs)));
}

void PreprocessConfig::validate(double fs) const {
    if (!(fs > 0.0)) throw ParameterError("sampling rate must be positive");
    if (!(highpass_hz > 0.0 && highpass_hz < lowpass_hz))
        throw ParameterError(fmt::format("need 0 < highpass ({}) < lowpass ({})", highpass_hz, lowpass_hz));
    if (lowpass_hz >= fs / 2.0)
        throw ParameterError(fmt::format("lowpass cutoff {} Hz is at or above Nyquist {} Hz", lowpass_hz, fs / 2.0));
    if (window_len < 2) throw ParameterError("window_len must be at least 2");
    if (!(peak_threshold > 0.0 && peak_threshold < 1.0)) throw ParameterError("peak_threshold must lie in (0, 1)");
    if (refractory_samples && *refractory_samples == 0) throw ParameterError("refractory_samples must be positive");
}

std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double fs) {
    return butterworth(order, cutoff_hz, fs, Band::Low);
}

std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double fs) {
    return butterworth(order, cutoff_hz, fs, Band::High);
}

std::vector<double> sos_filter(std::span<const Biquad> sections, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    if (y.empty()) return y;
    for (const auto& q : sections) {
        const double x0 = y.front();
        const double y0 = q.dc_gain() * x0;
        double z2 = q.b2 * x0 - q.a2 * y0;
        double z1 = q.b1 * x0 - q.a1 * y0 + z2;
        for (double& v : y) {
            const double in = v;
            const double out = q.b0 * in + z1;
            z1 = q.b1 * in - q.a1 * out + z2;
            z2 = q.b2 * in - q.a2 * out;
            v = out;
        }
    }
    return y;
}

std::vector<double> sos_filtfilt(std::span<const Biquad> sections, std::span<const double> x) {
    const std::size_t n = x.size();
    const std::size_t pad = pad_length(sections.size());
    if (n <= pad) throw ParameterError(fmt::format("signal too short for filtering: {} samples, need more than {}", n, pad));

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    auto forward = sos_filter(sections, ext);
    std::reverse(forward.begin(), forward.end());
    auto backward = sos_filter(sections, forward);
    std::reverse(backward.begin(), backward.end());
    return {backward.begin() + static_cast<std::ptrdiff_t>(pad), backward.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

Signal bandpass(const Signal& signal, const PreprocessConfig& cfg) {
    cfg.validate(signal.fs);
    auto sections = butterworth_highpass(cfg.filter_order, cfg.highpass_hz, signal.fs);
    auto low = butterworth_lowpass(cfg.filter_order, cfg.lowpass_hz, signal.fs);
    sections.insert(sections.end(), low.begin(), low.end());
    return {sos_filtfilt(sections, signal.values), signal.fs};
}

std::vector<double> standardize(std::span<const double> window) {
    if (window.empty()) throw NumericalError("degenerate window");
    const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
    if (*lo == *hi) throw NumericalError("degenerate window");

    const double mean = std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(window.size());
    std::vector<double> out(window.size());
    double max_abs = 0.0;
    for (std::size_t i = 0; i < window.size(); ++i) {
        out[i] = window[i] - mean;
        max_abs = std::max(max_abs, std::abs(out[i]));
    }
    if (!(max_abs > 0.0) || !std::isfinite(max_abs)) throw NumericalError("degenerate window");
    for (double& v : out) v /= max_abs;
    return out;
}

std::vector<std::size_t> threshold_peak_detector(std::span<const double> x, const PreprocessConfig& cfg, double fs) {
    if (x.size() < 3) return {};
    const double global_max = *std::max_element(x.begin(), x.end());
    if (!(global_max > 0.0)) return {};
    const double threshold = cfg.peak_threshold * global_max;

    std::vector<std::size_t> candidates;
    for (std::size_t i = 1; i + 1 < x.size(); ++i)
        if (x[i] > threshold && x[i] > x[i - 1] && x[i] >= x[i + 1]) candidates.push_back(i);

    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
    const std::size_t refractory = cfg.refractory_for(fs);
    std::vector<std::size_t> accepted;
    for (std::size_t c : candidates) {
        const bool clear = std::none_of(accepted.begin(), accepted.end(), [&](std::size_t a) {
            return (a > c ? a - c : c - a) < refractory;
        });
        if (clear) accepted.push_back(c);
    }
    std::sort(accepted.begin(), accepted.end());
    return accepted;
}

std::vector<std::size_t> detect_peaks(const Signal& signal, const PreprocessConfig& cfg) {
    return threshold_peak_detector(signal.values, cfg, signal.fs);
}

Beat artifact_beat(std::size_t window_len, Label label) {
    Beat b;
    b.samples.assign(window_len, 0.0);
    b.label = label;
    b.artifact = true;
    return b;
}

Beat extract_beat(const Signal& signal, std::size_t peak, std::size_t window_len) {
    const std::size_t half = window_len / 2;
    if (window_len == 0 || peak < half || peak - half + window_len > signal.values.size())
        return artifact_beat(window_len);
    const auto first = signal.values.begin() + static_cast<std::ptrdiff_t>(peak - half);
    std::span<const double> window(&*first, window_len);
    try {
        Beat b;
        b.samples = standardize(window);
        return b;
    } catch (const NumericalError&) {
        return artifact_beat(window_len);
    }
}

std::vector<Beat> preprocess_record(const Signal& signal, const PreprocessConfig& cfg, Label label,
                                    const PeakDetector& detector) {
    cfg.validate(signal.fs);
    const Signal filtered = bandpass(signal, cfg);
    const auto peaks = detector ? detector(filtered.values, cfg, filtered.fs) : detect_peaks(filtered, cfg);

    std::vector<Beat> beats;
    if (cfg.single_beat) {
        if (peaks.size() == 1)
            beats.push_back(extract_beat(filtered, peaks.front(), cfg.window_len));
        else
            beats.push_back(artifact_beat(cfg.window_len));
    } else {
        for (std::size_t p : peaks) beats.push_back(extract_beat(filtered, p, cfg.window_len));
        if (beats.empty()) beats.push_back(artifact_beat(cfg.window_len));
    }
    for (auto& b : beats) b.label = label;
    return beats;
}

}  // namespace llt
