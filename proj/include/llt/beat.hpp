#pragma once

#include "llt/core.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace llt {

/// Fixed-length, peak-centred heartbeat window.
struct Beat {
    std::vector<double> samples;
    Label label = Label::Unlabeled;
    /// Set when peak detection failed; such beats carry zero samples and bypass the classifier.
    bool artifact = false;
    std::string source_id;

    bool operator==(const Beat&) const = default;
};

struct Corpus {
    std::vector<Beat> beats;
    std::size_t length = 0;  // samples per beat
    Role role = Role::Train;

    std::size_t size() const { return beats.size(); }
    bool empty() const { return beats.empty(); }

    /// Checks length >= 2 and that every beat except sample-less artifacts has `length` finite samples.
    void validate() const;

    /// Non-artifact beats carrying `label`, in corpus order.
    std::vector<Beat> select(Label label) const;
};

}  // namespace llt
