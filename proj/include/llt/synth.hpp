#pragma once

// Synthetic two-class corpora whose classes obey known linear recurrences,
// so every fitted law can be checked against an analytic one.

#include "llt/beat.hpp"
#include "llt/linear_law.hpp"

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

namespace llt {

struct RecurrenceSpec {
    enum class Kind { Sinusoid, Autoregressive };

    Kind kind = Kind::Sinusoid;
    double omega = 0.3;               // radians per sample, in (0, pi)
    std::vector<double> ar;           // y_k = sum_i ar[i] * y_{k-1-i}

    static RecurrenceSpec sinusoid(double omega) { return {Kind::Sinusoid, omega, {}}; }
    static RecurrenceSpec autoregressive(std::vector<double> coeffs) { return {Kind::Autoregressive, 0.0, std::move(coeffs)}; }

    std::size_t order() const { return kind == Kind::Sinusoid ? 2 : ar.size(); }
    /// Recurrence coefficients [1, -a_1, ..., -a_p] (not normalized).
    std::vector<double> coefficients() const;
    void validate(std::size_t length) const;
};

struct SynthSpec {
    RecurrenceSpec class_a = RecurrenceSpec::sinusoid(0.3);  // labelled Normal
    RecurrenceSpec class_b = RecurrenceSpec::sinusoid(0.9);  // labelled Ectopic
    std::size_t beats_per_class = 200;
    std::size_t length = 30;
    double noise_sigma = 0.01;
    std::uint64_t seed = 1;
    /// Sinusoid phase is drawn uniformly from [-phase_jitter, phase_jitter] around a
    /// crest at the window centre, mimicking peak-centred beats.
    double phase_jitter = std::numbers::pi / 3.0;
    double amplitude_min = 0.8;
    double amplitude_max = 1.2;

    void validate() const;
};

struct SynthCorpora {
    Corpus train;
    Corpus validation;
    Corpus test;
};

/// Per class: 40 % train, 30 % validation, the rest test; every role uses its own seed stream.
SynthCorpora generate(const SynthSpec& spec);

/// One noiseless-or-noisy beat of `rec` (used by tests to build custom corpora).
std::vector<double> synth_beat(const RecurrenceSpec& rec, std::size_t length, double noise_sigma, double phase_jitter,
                               double amplitude_min, double amplitude_max, std::uint64_t seed);

/// Normalized recurrence coefficients, zero-padded to `law_length`.
LinearLaw exact_law(const RecurrenceSpec& rec, std::size_t law_length, Label class_tag = Label::Normal);

}  // namespace llt
