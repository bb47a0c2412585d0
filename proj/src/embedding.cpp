#include "llt/embedding.hpp"

#include "llt/artifact_file.hpp"

#include <fmt/format.h>

namespace llt {

namespace {

void check_law_length(std::size_t length, std::size_t law_length) {
    if (law_length < 2) throw ParameterError(fmt::format("law length must be at least 2, got {}", law_length));
    if (law_length > length)
        throw ParameterError(fmt::format("law length {} exceeds series length {}", law_length, length));
}

void append_rows(EmbeddedMatrix& y, std::size_t& row, std::span<const double> s, std::size_t beat_index) {
    const std::size_t l = y.law_length;
    const std::size_t count = s.size() - l + 1;
    for (std::size_t j = 0; j < count; ++j, ++row) {
        const std::size_t base = j + l - 1;
        for (std::size_t i = 0; i < l; ++i) y.data(row, i) = s[base - i];
        y.provenance.push_back({beat_index, base});
    }
}

}  // namespace

std::size_t embedded_rows(std::size_t length, std::size_t law_length) {
    check_law_length(length, law_length);
    return length - law_length + 1;
}

EmbeddedMatrix embed_series(std::span<const double> samples, std::size_t law_length) {
    const std::size_t rows = embedded_rows(samples.size(), law_length);
    EmbeddedMatrix y{Matrix(rows, law_length), law_length, {}};
    y.provenance.reserve(rows);
    std::size_t row = 0;
    append_rows(y, row, samples, 0);
    return y;
}

EmbeddedMatrix embed_beat(const Beat& beat, std::size_t law_length) { return embed_series(beat.samples, law_length); }

EmbeddedMatrix embed_class(std::span<const Beat> beats, std::size_t law_length) {
    if (beats.empty()) throw ParameterError("cannot fit law on empty class");
    const std::size_t length = beats.front().samples.size();
    const std::size_t per_beat = embedded_rows(length, law_length);
    for (std::size_t m = 0; m < beats.size(); ++m)
        if (beats[m].samples.size() != length)
            throw ParameterError(fmt::format("beat {} has {} samples, expected {}", m, beats[m].samples.size(), length));

    EmbeddedMatrix y{Matrix(per_beat * beats.size(), law_length), law_length, {}};
    y.provenance.reserve(y.data.rows());
    std::size_t row = 0;
    for (std::size_t m = 0; m < beats.size(); ++m) append_rows(y, row, beats[m].samples, m);
    return y;
}

void write_embedding_csv(std::ostream& out, const EmbeddedMatrix& y) {
    out << "beat,base";
    for (std::size_t i = 0; i < y.law_length; ++i) out << ",c" << i;
    out << '\n';
    for (std::size_t r = 0; r < y.rows(); ++r) {
        out << y.provenance[r].beat << ',' << y.provenance[r].base << ',' << join_doubles(y.data.row(r), ',') << '\n';
    }
}

}  // namespace llt
