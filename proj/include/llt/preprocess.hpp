#pragma once

// Raw ECG record -> standardized, peak-centred beats.

#include "llt/beat.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace llt {

struct Signal {
    std::vector<double> values;
    double fs = 360.0;  // Hz
};

struct PreprocessConfig {
    double lowpass_hz = 20.0;
    double highpass_hz = 0.5;
    int filter_order = 4;  // per filter; must be even
    std::size_t window_len = 30;
    /// Unset means 200 ms at the record's sampling rate.
    std::optional<std::size_t> refractory_samples;
    double peak_threshold = 0.5;  // fraction of the global maximum
    /// One labelled beat per record: 0 or >1 peaks turn the record into an artifact.
    bool single_beat = true;

    std::size_t refractory_for(double fs) const;
    void validate(double fs) const;
};

/// One second-order section, transposed direct form II, a0 == 1.
struct Biquad {
    double b0, b1, b2, a1, a2;

    double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

std::vector<Biquad> butterworth_lowpass(int order, double cutoff_hz, double fs);
std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double fs);

/// Causal single pass through a cascade, starting from the steady state for x[0].
std::vector<double> sos_filter(std::span<const Biquad> sections, std::span<const double> x);
/// Forward-backward filtering with odd reflection padding; zero phase, squared magnitude response.
std::vector<double> sos_filtfilt(std::span<const Biquad> sections, std::span<const double> x);

Signal bandpass(const Signal& signal, const PreprocessConfig& cfg);

/// Subtract the mean, then divide by the largest absolute value.
/// Throws NumericalError("degenerate window") for constant input.
std::vector<double> standardize(std::span<const double> window);

using PeakDetector = std::function<std::vector<std::size_t>(std::span<const double>, const PreprocessConfig&, double fs)>;

/// Local maxima above peak_threshold * global max, at least refractory samples apart
/// (larger peaks win). Sorted ascending.
std::vector<std::size_t> detect_peaks(const Signal& signal, const PreprocessConfig& cfg);
std::vector<std::size_t> threshold_peak_detector(std::span<const double> values, const PreprocessConfig& cfg, double fs);

/// Window of window_len samples with the peak at index window_len / 2, standardized.
/// Out-of-range windows and degenerate windows yield an artifact beat.
Beat extract_beat(const Signal& signal, std::size_t peak, std::size_t window_len);

Beat artifact_beat(std::size_t window_len, Label label = Label::Unlabeled);

/// bandpass -> detect peaks -> extract. Never drops a record: it yields at least one beat.
std::vector<Beat> preprocess_record(const Signal& signal, const PreprocessConfig& cfg,
                                    Label label = Label::Unlabeled, const PeakDetector& detector = {});

}  // namespace llt
