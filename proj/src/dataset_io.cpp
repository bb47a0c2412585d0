#include "llt/dataset_io.hpp"

#include "llt/artifact_file.hpp"
#include "llt/random.hpp"
#include "llt/tolerances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace llt {

void Corpus::validate() const {
    if (length < 2) throw ParameterError(fmt::format("beat length must be at least 2, got {}", length));
    for (std::size_t i = 0; i < beats.size(); ++i) {
        if (beats[i].artifact && beats[i].samples.empty()) continue;
        if (beats[i].samples.size() != length)
            throw ParameterError(fmt::format("beat {}: expected {} samples, got {}", i, length, beats[i].samples.size()));
        for (double v : beats[i].samples)
            if (!std::isfinite(v)) throw ParameterError(fmt::format("beat {}: non-finite sample", i));
    }
}

std::vector<Beat> Corpus::select(Label label) const {
    std::vector<Beat> out;
    for (const auto& b : beats)
        if (b.label == label && !b.artifact) out.push_back(b);
    return out;
}

Corpus parse_corpus_csv(std::string_view text, Role role, std::string_view source) {
    Corpus corpus;
    corpus.role = role;
    std::size_t row = 0;
    for (auto line : split(text, '\n')) {
        line = trim(line);
        if (line.empty()) continue;
        ++row;
        const auto fields = split(line, ',');
        auto token = trim(fields.front());
        Beat beat;
        if (!token.empty() && token.back() == '!') {
            beat.artifact = true;
            token.remove_suffix(1);
        }
        try {
            beat.label = parse_label_token(token);
        } catch (const ParseError&) {
            throw ParseError(fmt::format("row {}, column 1: unknown label token '{}'", row, token));
        }
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const auto v = parse_double(fields[c]);
            if (!v) throw ParseError(fmt::format("row {}, column {}: not a finite number: '{}'", row, c + 1, trim(fields[c])));
            beat.samples.push_back(*v);
        }
        if (beat.artifact && beat.samples.empty()) {
            // Artifact beats may carry no samples.
        } else if (corpus.length == 0) {
            if (beat.samples.size() < 2)
                throw ParseError(fmt::format("row {}: expected at least 2 samples, got {}", row, beat.samples.size()));
            corpus.length = beat.samples.size();
        } else if (beat.samples.size() != corpus.length) {
            throw ParseError(fmt::format("row {}: expected {} samples, got {}", row, corpus.length, beat.samples.size()));
        }
        beat.source_id = fmt::format("{}#{}", source, row);
        corpus.beats.push_back(std::move(beat));
    }
    if (corpus.beats.empty()) throw ParseError(fmt::format("{}: corpus is empty", source));
    return corpus;
}

std::string render_corpus_csv(const Corpus& corpus) {
    std::string out;
    for (const auto& b : corpus.beats) {
        out += label_token(b.label);
        if (b.artifact) out += '!';
        for (double v : b.samples) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<LabeledSignal> parse_signals(std::string_view text, std::string_view source) {
    std::vector<LabeledSignal> out;
    std::size_t row = 0;
    for (auto line : split(text, '\n')) {
        line = trim(line);
        if (line.empty()) continue;
        ++row;
        const auto parts = split(line, ';');
        if (parts.size() != 2 && parts.size() != 3)
            throw ParseError(fmt::format("record {}: expected 'fs;values' or 'label;fs;values'", row));
        LabeledSignal s;
        std::size_t p = 0;
        if (parts.size() == 3) {
            try {
                s.label = parse_label_token(trim(parts[p++]));
            } catch (const ParseError&) {
                throw ParseError(fmt::format("record {}: unknown label token '{}'", row, trim(parts[0])));
            }
        }
        s.signal.fs = parse_double_or_throw(parts[p++], fmt::format("record {} sampling rate", row));
        if (!(s.signal.fs > 0.0)) throw ParseError(fmt::format("record {}: sampling rate must be positive", row));
        s.signal.values = split_doubles(parts[p], ',', fmt::format("record {}", row));
        s.source_id = fmt::format("{}#{}", source, row);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<LabeledSignal> load_signals(const std::filesystem::path& path) {
    return parse_signals(read_text_file(path), path.filename().string());
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format, Role role, const PreprocessConfig& cfg) {
    if (!std::filesystem::exists(path)) throw Error("corpus file not found: " + path.string());
    if (format == CorpusFormat::Csv) return parse_corpus_csv(read_text_file(path), role, path.filename().string());

    Corpus corpus;
    corpus.role = role;
    corpus.length = cfg.window_len;
    for (const auto& rec : load_signals(path)) {
        for (auto& beat : preprocess_record(rec.signal, cfg, rec.label)) {
            beat.source_id = rec.source_id;
            corpus.beats.push_back(std::move(beat));
        }
    }
    return corpus;
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) { write_text_file(path, render_corpus_csv(corpus)); }

std::pair<Corpus, Corpus> split_train_validation(const Corpus& corpus, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction <= 1.0))
        throw ParameterError(fmt::format("train fraction must lie in (0, 1], got {}", spec.train_fraction));
    if (corpus.role != Role::Train) throw ParameterError("only a training corpus can be split");

    Rng rng(spec.seed);
    std::vector<bool> to_train(corpus.size(), false);
    auto take = [&](std::vector<std::size_t> idx) {
        rng.shuffle(idx);
        const auto n = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(idx.size())));
        for (std::size_t i = 0; i < n; ++i) to_train[idx[i]] = true;
    };
    if (spec.stratified) {
        for (Label l : {Label::Normal, Label::Ectopic, Label::Unlabeled}) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < corpus.size(); ++i)
                if (corpus.beats[i].label == l) idx.push_back(i);
            take(std::move(idx));
        }
    } else {
        std::vector<std::size_t> idx(corpus.size());
        std::iota(idx.begin(), idx.end(), 0);
        take(std::move(idx));
    }

    Corpus train{{}, corpus.length, Role::Train};
    Corpus val{{}, corpus.length, Role::Validation};
    for (std::size_t i = 0; i < corpus.size(); ++i) (to_train[i] ? train : val).beats.push_back(corpus.beats[i]);
    return {std::move(train), std::move(val)};
}

std::string render_law(const LinearLaw& law) {
    ArtifactText a;
    a.magic = "llt-law";
    a.set("class", std::string(label_name(law.class_tag)));
    a.set("length", std::to_string(law.length()));
    a.set("lambda", format_double(law.lambda));
    a.set("train_rows", std::to_string(law.train_row_count));
    a.set("multiplicity", std::to_string(law.multiplicity));
    a.set("eigen_gap", format_double(law.eigen_gap));
    for (double w : law.w) a.payload.push_back(format_double(w));
    return render_artifact(a);
}

LinearLaw parse_law(std::string_view text) {
    const ArtifactText a = parse_artifact(text, "llt-law");
    LinearLaw law;
    law.class_tag = parse_label_name(a.get("class"));
    const auto length = parse_int_or_throw(a.get("length"), "law length");
    law.lambda = parse_double_or_throw(a.get("lambda"), "law lambda");
    law.train_row_count = static_cast<std::size_t>(parse_int_or_throw(a.get("train_rows"), "law train_rows"));
    if (auto m = a.find("multiplicity")) law.multiplicity = static_cast<std::size_t>(parse_int_or_throw(*m, "multiplicity"));
    if (auto g = a.find("eigen_gap")) law.eigen_gap = parse_double_or_throw(*g, "eigen_gap");
    for (const auto& line : a.payload) {
        if (trim(line).empty()) continue;
        law.w.push_back(parse_double_or_throw(line, "law coefficient"));
    }
    if (length < 2 || static_cast<std::size_t>(length) != law.w.size())
        throw ParseError(fmt::format("law declares length {} but has {} coefficients", length, law.w.size()));
    if (std::abs(norm2(law.w) - 1.0) > tol::kUnitNorm) throw ParseError("coefficients not unit norm");
    if (law.lambda < 0.0) throw ParseError("law eigenvalue is negative");
    a.require_checksum();
    return law;
}

void save_law(const LinearLaw& law, const std::filesystem::path& path) { write_text_file(path, render_law(law)); }

LinearLaw load_law(const std::filesystem::path& path) { return parse_law(read_text_file(path)); }

}  // namespace llt
