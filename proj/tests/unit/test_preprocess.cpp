#include "llt/preprocess.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace llt {
namespace {

constexpr double kFs = 360.0;

std::vector<double> sine(double hz, std::size_t n, double fs = kFs) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / fs);
    return v;
}

double max_abs(std::span<const double> v, std::size_t from, std::size_t to) {
    double m = 0.0;
    for (std::size_t i = from; i < to; ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

std::vector<double> pulse_train(std::size_t n, std::initializer_list<std::size_t> centres, double width = 4.0) {
    std::vector<double> v(n, 0.0);
    for (std::size_t c : centres)
        for (std::size_t i = 0; i < n; ++i) {
            const double d = (static_cast<double>(i) - static_cast<double>(c)) / width;
            v[i] += std::exp(-0.5 * d * d);
        }
    return v;
}

std::vector<Biquad> band_sections(const PreprocessConfig& cfg, double fs) {
    auto s = butterworth_highpass(cfg.filter_order, cfg.highpass_hz, fs);
    const auto low = butterworth_lowpass(cfg.filter_order, cfg.lowpass_hz, fs);
    s.insert(s.end(), low.begin(), low.end());
    return s;
}

TEST(Filter, ConstantInputIsRemoved) {
    const auto out = bandpass(Signal{std::vector<double>(2000, 1.0), kFs}, {});
    EXPECT_LT(max_abs(out.values, 200, 1800), 1e-3);
}

TEST(Filter, PassbandAndStopbandGainsMatchImpulseResponseOracle) {
    const PreprocessConfig cfg;
    std::vector<double> impulse(8000, 0.0);
    impulse[10] = 1.0;
    const auto h = sos_filter(band_sections(cfg, kFs), impulse);

    // Zero-phase filtering scales a steady sinusoid by |H|^2 without shifting it. The middle of
    // a long record is far enough from the edges for the 0.5 Hz high-pass transient to have died out.
    for (const double hz : {5.0, 60.0}) {
        const double predicted = std::pow(oracle::dft_gain(h, hz, kFs), 2);
        const auto in = sine(hz, 20000);
        const auto out = bandpass(Signal{in, kFs}, cfg);
        double worst = 0.0;
        for (std::size_t i = 8000; i < 12000; ++i) worst = std::max(worst, std::abs(out.values[i] - predicted * in[i]));
        EXPECT_LT(worst, 1e-3) << hz << " Hz";
        if (hz == 5.0) EXPECT_NEAR(predicted, 1.0, 0.05);
        else EXPECT_LT(predicted, 1e-3);
    }
}

TEST(Filter, SectionsHaveExpectedDcGain) {
    for (const auto& q : butterworth_lowpass(4, 20.0, kFs)) EXPECT_NEAR(q.dc_gain(), 1.0, 1e-12);
    double hp = 1.0;
    for (const auto& q : butterworth_highpass(4, 0.5, kFs)) hp *= q.dc_gain();
    EXPECT_NEAR(hp, 0.0, 1e-12);
    EXPECT_THROW(butterworth_lowpass(3, 20.0, kFs), ParameterError);
    EXPECT_THROW(butterworth_lowpass(4, 200.0, kFs), ParameterError);
}

TEST(FilterProperty, BandpassIsLinear) {
    Rng rng(1);
    for (int trial = 0; trial < 5; ++trial) {
        Signal x{std::vector<double>(1000), kFs}, y{std::vector<double>(1000), kFs}, z{std::vector<double>(1000), kFs};
        const double a = rng.normal(), b = rng.normal();
        for (std::size_t i = 0; i < 1000; ++i) {
            x.values[i] = rng.normal();
            y.values[i] = rng.normal();
            z.values[i] = a * x.values[i] + b * y.values[i];
        }
        const auto fx = bandpass(x, {}), fy = bandpass(y, {}), fz = bandpass(z, {});
        const double scale = max_abs(fz.values, 0, 1000);
        for (std::size_t i = 0; i < 1000; ++i)
            ASSERT_NEAR(fz.values[i], a * fx.values[i] + b * fy.values[i], 1e-9 * scale);
    }
}

TEST(Standardize, Examples) {
    const auto a = standardize(std::vector<double>{2, 4, 2});
    EXPECT_DOUBLE_EQ(a[0], -0.5);
    EXPECT_DOUBLE_EQ(a[1], 1.0);
    EXPECT_DOUBLE_EQ(a[2], -0.5);
    EXPECT_EQ(standardize(std::vector<double>{1, -1}), (std::vector<double>{1, -1}));
    try {
        standardize(std::vector<double>{5, 5, 5});
        FAIL();
    } catch (const NumericalError& e) {
        EXPECT_STREQ(e.what(), "degenerate window");
    }
}

TEST(Peaks, SingleTriangle) {
    std::vector<double> v(300, 0.0);
    for (int d = -10; d <= 10; ++d) v[100 + d] = 10.0 - std::abs(d);
    PreprocessConfig cfg;
    EXPECT_EQ(threshold_peak_detector(v, cfg, kFs), (std::vector<std::size_t>{100}));
}

TEST(Peaks, TwoPulsesOutsideRefractory) {
    const auto v = pulse_train(600, {100, 400});
    PreprocessConfig cfg;
    cfg.refractory_samples = 72;
    EXPECT_EQ(threshold_peak_detector(v, cfg, kFs), (std::vector<std::size_t>{100, 400}));
}

TEST(Peaks, FlatSignalHasNone) {
    EXPECT_TRUE(threshold_peak_detector(std::vector<double>(500, 0.0), {}, kFs).empty());
}

TEST(PeaksProperty, IncreasingAndSeparatedAndAboveThreshold) {
    Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(400);
        for (double& x : v) x = rng.normal();
        PreprocessConfig cfg;
        cfg.refractory_samples = 1 + rng.index(60);
        const auto peaks = threshold_peak_detector(v, cfg, kFs);
        const double gmax = *std::max_element(v.begin(), v.end());
        for (std::size_t i = 0; i < peaks.size(); ++i) {
            ASSERT_GT(v[peaks[i]], cfg.peak_threshold * gmax);
            if (i) {
                ASSERT_GE(peaks[i] - peaks[i - 1], *cfg.refractory_samples);
            }
        }
        // The global maximum is never suppressed.
        const auto top = static_cast<std::size_t>(std::max_element(v.begin() + 1, v.end() - 1) - v.begin());
        if (v[top] == gmax) {
            ASSERT_NE(std::find(peaks.begin(), peaks.end(), top), peaks.end());
        }
    }
}

TEST(Extract, CentresThePeak) {
    Signal s{std::vector<double>(300), kFs};
    Rng rng(3);
    for (double& x : s.values) x = rng.normal();
    const auto beat = extract_beat(s, 100, 30);
    ASSERT_FALSE(beat.artifact);
    const auto ref = standardize(std::span<const double>(s.values).subspan(85, 30));
    EXPECT_EQ(beat.samples, ref);
}

TEST(Extract, OverrunsAndFlatWindowsAreArtifacts) {
    Signal s{std::vector<double>(300, 1.0), kFs};
    EXPECT_TRUE(extract_beat(s, 5, 30).artifact);
    EXPECT_TRUE(extract_beat(s, 290, 30).artifact);
    EXPECT_TRUE(extract_beat(s, 100, 30).artifact);  // constant window
}

TEST(Record, CleanSingleBeat) {
    const auto beats = preprocess_record(Signal{pulse_train(720, {360}), kFs}, {}, Label::Normal);
    ASSERT_EQ(beats.size(), 1u);
    EXPECT_FALSE(beats[0].artifact);
    EXPECT_EQ(beats[0].label, Label::Normal);
    ASSERT_EQ(beats[0].samples.size(), 30u);
}

TEST(Record, NoPeakOrTwoPeaksBecomeOneArtifact) {
    const auto none = preprocess_record(Signal{std::vector<double>(720, 0.0), kFs}, {}, Label::Ectopic);
    ASSERT_EQ(none.size(), 1u);
    EXPECT_TRUE(none[0].artifact);
    EXPECT_EQ(none[0].label, Label::Ectopic);
    const auto two = preprocess_record(Signal{pulse_train(720, {200, 500}), kFs}, {}, Label::Normal);
    ASSERT_EQ(two.size(), 1u);
    EXPECT_TRUE(two[0].artifact);

    PreprocessConfig multi;
    multi.single_beat = false;
    const auto both = preprocess_record(Signal{pulse_train(720, {200, 500}), kFs}, multi, Label::Normal);
    EXPECT_EQ(both.size(), 2u);
}

TEST(RecordProperty, EmittedBeatsAreStandardizedAndCentred) {
    Rng rng(4);
    std::size_t records = 0, beats_out = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t centre = 200 + rng.index(300);
        auto v = pulse_train(720, {centre}, 3.0 + rng.uniform() * 3.0);
        for (double& x : v) x += 0.01 * rng.normal();
        const auto beats = preprocess_record(Signal{v, kFs}, {}, Label::Normal);
        ++records;
        beats_out += beats.size();
        for (const auto& b : beats) {
            if (b.artifact) continue;
            ASSERT_EQ(b.samples.size(), 30u);
            double mean = 0.0, mx = 0.0;
            for (double x : b.samples) {
                mean += x;
                mx = std::max(mx, std::abs(x));
            }
            ASSERT_NEAR(mean / 30.0, 0.0, 1e-12);
            ASSERT_NEAR(mx, 1.0, 1e-12);
            ASSERT_EQ(std::max_element(b.samples.begin(), b.samples.end()) - b.samples.begin(), 15);
        }
    }
    EXPECT_EQ(beats_out, records);
}

TEST(Config, Validation) {
    PreprocessConfig cfg;
    EXPECT_NO_THROW(cfg.validate(kFs));
    EXPECT_EQ(cfg.refractory_for(kFs), 72u);
    cfg.highpass_hz = 30.0;
    EXPECT_THROW(cfg.validate(kFs), ParameterError);
    cfg = {};
    cfg.lowpass_hz = 200.0;
    EXPECT_THROW(cfg.validate(kFs), ParameterError);
    cfg = {};
    cfg.peak_threshold = 1.5;
    EXPECT_THROW(cfg.validate(kFs), ParameterError);
}

}  // namespace
}  // namespace llt
