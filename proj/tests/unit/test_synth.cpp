#include "llt/synth.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace llt {
namespace {

std::vector<double> unit(std::vector<double> v) {
    const double n = norm2(v);
    for (double& x : v) x /= n;
    return v;
}

TEST(Synth, NoiselessSinusoidSatisfiesItsRecurrence) {
    SynthSpec spec;
    spec.noise_sigma = 0.0;
    const auto data = generate(spec);
    const double c = 2.0 * std::cos(0.3);
    for (const auto* part : {&data.train, &data.validation, &data.test})
        for (const auto& b : part->beats) {
            if (b.label != Label::Normal) continue;
            for (std::size_t k = 2; k < b.samples.size(); ++k)
                ASSERT_NEAR(b.samples[k] - c * b.samples[k - 1] + b.samples[k - 2], 0.0, 1e-12);
        }
}

TEST(Synth, SplitSizesRolesAndDeterminism) {
    SynthSpec spec;
    const auto a = generate(spec);
    EXPECT_EQ(a.train.size(), 160u);
    EXPECT_EQ(a.validation.size(), 120u);
    EXPECT_EQ(a.test.size(), 120u);
    EXPECT_EQ(a.train.role, Role::Train);
    EXPECT_EQ(a.test.role, Role::Test);
    EXPECT_EQ(a.train.select(Label::Normal).size(), 80u);
    const auto b = generate(spec);
    EXPECT_EQ(a.train.beats, b.train.beats);
    EXPECT_EQ(a.test.beats, b.test.beats);
    spec.seed = 2;
    EXPECT_NE(generate(spec).train.beats, a.train.beats);
}

TEST(Synth, RolesDoNotShareBeats) {
    const auto data = generate(SynthSpec{});
    for (const auto& t : data.test.beats)
        for (const auto& tr : data.train.beats) ASSERT_NE(t.samples, tr.samples);
}

TEST(Synth, NoisyLawEigenvalueIsBoundedByNoisePower) {
    SynthSpec spec;
    const auto data = generate(spec);
    const auto normal = data.train.select(Label::Normal);
    const auto law = fit_law(normal, 12, Label::Normal);
    EXPECT_GT(law.lambda, 0.0);
    EXPECT_LE(law.lambda, 10.0 * spec.noise_sigma * spec.noise_sigma);
    EXPECT_NEAR(oracle::brute_force_variance(normal, law.w), law.lambda, 1e-10 * law.lambda);
}

TEST(ExactLaw, SinusoidAndAutoregressive) {
    const auto s = exact_law(RecurrenceSpec::sinusoid(0.3), 3);
    const auto ref = unit({1.0, -2.0 * std::cos(0.3), 1.0});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(s.w[i], ref[i], 1e-15);
    const auto ar = exact_law(RecurrenceSpec::autoregressive({0.9}), 2);
    const auto ref_ar = unit({1.0, -0.9});
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(ar.w[i], ref_ar[i], 1e-15);
    const auto padded = exact_law(RecurrenceSpec::sinusoid(0.3), 5);
    EXPECT_EQ(padded.w[3], 0.0);
    EXPECT_EQ(padded.w[4], 0.0);
    EXPECT_THROW(exact_law(RecurrenceSpec::sinusoid(0.3), 2), ParameterError);
}

TEST(ExactLaw, FittedNoiselessLawsAlign) {
    for (const auto& rec : {RecurrenceSpec::sinusoid(0.3), RecurrenceSpec::sinusoid(0.9), RecurrenceSpec::sinusoid(2.0),
                            RecurrenceSpec::autoregressive({0.9}), RecurrenceSpec::autoregressive({0.5, 0.3})}) {
        SynthSpec spec;
        spec.class_a = rec;
        spec.noise_sigma = 0.0;
        const auto beats = generate(spec).train.select(Label::Normal);
        const std::size_t l = rec.order() + 1;
        const auto law = fit_law(beats, l, Label::Normal);
        EXPECT_GT(oracle::abs_cos(law.w, exact_law(rec, l).w), 1.0 - 1e-9);
        double power = 0.0;
        std::size_t n = 0;
        for (const auto& b : beats)
            for (double v : b.samples) {
                power += v * v;
                ++n;
            }
        EXPECT_LE(law.lambda, 1e-18 * power / static_cast<double>(n));
    }
}

TEST(Synth, CrossLawDiscrimination) {
    const auto data = generate(SynthSpec{});
    const auto a = data.train.select(Label::Normal), b = data.train.select(Label::Ectopic);
    const auto law = fit_law(a, 12, Label::Normal);
    EXPECT_GE(law_variance(b, law) / law_variance(a, law), 10.0);
}

TEST(Synth, InvalidSpecs) {
    SynthSpec spec;
    spec.beats_per_class = 3;
    EXPECT_THROW(generate(spec), ParameterError);
    spec = {};
    spec.class_a = RecurrenceSpec::sinusoid(3.5);
    EXPECT_THROW(generate(spec), ParameterError);
    spec = {};
    spec.class_b = RecurrenceSpec::autoregressive(std::vector<double>(30, 0.1));
    EXPECT_THROW(generate(spec), ParameterError);
    spec = {};
    spec.noise_sigma = -1.0;
    EXPECT_THROW(generate(spec), ParameterError);
}

}  // namespace
}  // namespace llt
