#pragma once

// Time-delay embedding. Row j of a beat's embedding is the newest-first window
// [s[j+l-1], s[j+l-2], ..., s[j]], so data(r, i) = s[k - i] with k = j + l - 1.

#include "llt/beat.hpp"
#include "llt/core.hpp"

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

namespace llt {

struct RowProvenance {
    std::size_t beat = 0;
    std::size_t base = 0;  // index of the newest sample in the row

    bool operator==(const RowProvenance&) const = default;
};

struct EmbeddedMatrix {
    Matrix data;
    std::size_t law_length = 0;
    std::vector<RowProvenance> provenance;

    std::size_t rows() const { return data.rows(); }
};

/// Number of embedded rows a series of `length` samples yields: length - l + 1.
std::size_t embedded_rows(std::size_t length, std::size_t law_length);

EmbeddedMatrix embed_series(std::span<const double> samples, std::size_t law_length);
EmbeddedMatrix embed_beat(const Beat& beat, std::size_t law_length);

/// Vertical concatenation of per-beat embeddings in input order.
EmbeddedMatrix embed_class(std::span<const Beat> beats, std::size_t law_length);

/// Debug dump: beat,base,c0,...,c{l-1}
void write_embedding_csv(std::ostream& out, const EmbeddedMatrix& y);

}  // namespace llt
