#include "llt/synth.hpp"

#include "llt/random.hpp"

#include <cmath>

#include <fmt/format.h>

namespace llt {

std::vector<double> RecurrenceSpec::coefficients() const {
    if (kind == Kind::Sinusoid) return {1.0, -2.0 * std::cos(omega), 1.0};
    std::vector<double> c{1.0};
    for (double a : ar) c.push_back(-a);
    return c;
}

void RecurrenceSpec::validate(std::size_t length) const {
    if (kind == Kind::Sinusoid) {
        if (!(omega > 0.0 && omega < std::numbers::pi))
            throw ParameterError(fmt::format("angular frequency must lie in (0, pi), got {}", omega));
        return;
    }
    if (ar.empty()) throw ParameterError("autoregressive spec needs at least one coefficient");
    if (ar.size() >= length) throw ParameterError("autoregressive order must be shorter than the beat length");
    for (double a : ar)
        if (!std::isfinite(a)) throw ParameterError("autoregressive coefficients must be finite");
}

void SynthSpec::validate() const {
    if (beats_per_class < 4) throw ParameterError("beats_per_class must be at least 4");
    if (length < 3) throw ParameterError("beat length must be at least 3");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ParameterError("noise_sigma must be finite and >= 0");
    if (!(amplitude_min > 0.0 && amplitude_min <= amplitude_max)) throw ParameterError("invalid amplitude range");
    class_a.validate(length);
    class_b.validate(length);
}

std::vector<double> synth_beat(const RecurrenceSpec& rec, std::size_t length, double noise_sigma, double phase_jitter,
                               double amplitude_min, double amplitude_max, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> y(length);
    if (rec.kind == RecurrenceSpec::Kind::Sinusoid) {
        const double amplitude = rng.uniform(amplitude_min, amplitude_max);
        const double phase = rng.uniform(-phase_jitter, phase_jitter);
        const double centre = static_cast<double>(length / 2);
        for (std::size_t k = 0; k < length; ++k)
            y[k] = amplitude * std::cos(rec.omega * (static_cast<double>(k) - centre) + phase);
    } else {
        const std::size_t p = rec.ar.size();
        for (std::size_t k = 0; k < p; ++k) y[k] = rng.normal();
        for (std::size_t k = p; k < length; ++k) {
            double s = 0.0;
            for (std::size_t i = 0; i < p; ++i) s += rec.ar[i] * y[k - 1 - i];
            y[k] = s;
        }
    }
    if (noise_sigma > 0.0)
        for (double& v : y) v += noise_sigma * rng.normal();
    return y;
}

SynthCorpora generate(const SynthSpec& spec) {
    spec.validate();
    const std::size_t n = spec.beats_per_class;
    const std::size_t n_train = n * 4 / 10;
    const std::size_t n_val = n * 3 / 10;

    SynthCorpora out;
    out.train = {{}, spec.length, Role::Train};
    out.validation = {{}, spec.length, Role::Validation};
    out.test = {{}, spec.length, Role::Test};

    const std::pair<const RecurrenceSpec*, Label> classes[] = {{&spec.class_a, Label::Normal},
                                                               {&spec.class_b, Label::Ectopic}};
    for (std::size_t c = 0; c < 2; ++c) {
        const auto& [rec, label] = classes[c];
        for (std::size_t i = 0; i < n; ++i) {
            Corpus& dst = i < n_train ? out.train : (i < n_train + n_val ? out.validation : out.test);
            const std::uint64_t stream = static_cast<std::uint64_t>(&dst == &out.train ? 0 : (&dst == &out.validation ? 1 : 2));
            const std::uint64_t seed = derive_seed(derive_seed(spec.seed, stream), c * n + i);
            Beat b;
            b.samples = synth_beat(*rec, spec.length, spec.noise_sigma, spec.phase_jitter, spec.amplitude_min,
                                   spec.amplitude_max, seed);
            b.label = label;
            b.source_id = fmt::format("synth:{}:{}", label_token(label), i);
            dst.beats.push_back(std::move(b));
        }
    }
    Rng mixer(derive_seed(spec.seed, 99));
    for (Corpus* c : {&out.train, &out.validation, &out.test}) mixer.shuffle(c->beats);
    return out;
}

LinearLaw exact_law(const RecurrenceSpec& rec, std::size_t law_length, Label class_tag) {
    auto coeffs = rec.coefficients();
    if (coeffs.size() > law_length)
        throw ParameterError(fmt::format("recurrence needs {} coefficients but law length is {}", coeffs.size(), law_length));
    coeffs.resize(law_length, 0.0);
    const double n = norm2(coeffs);
    for (double& c : coeffs) c /= n;
    apply_sign_convention(coeffs);
    LinearLaw law;
    law.w = std::move(coeffs);
    law.lambda = 0.0;
    law.class_tag = class_tag;
    return law;
}

}  // namespace llt
