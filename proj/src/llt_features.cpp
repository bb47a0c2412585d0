#include "llt/llt_features.hpp"

#include "llt/artifact_file.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace llt {

std::vector<double> apply_law(std::span<const double> samples, std::span<const double> w) {
    const std::size_t l = w.size();
    if (l == 0 || samples.size() < l)
        throw ParameterError(fmt::format("beat of {} samples is shorter than law length {}", samples.size(), l));
    std::vector<double> xi(samples.size() - l + 1);
    for (std::size_t k = 0; k < xi.size(); ++k) {
        const std::size_t base = k + l - 1;
        double s = 0.0;
        for (std::size_t i = 0; i < l; ++i) s += samples[base - i] * w[i];
        xi[k] = s;
    }
    return xi;
}

std::vector<double> transform(const Beat& beat, const LinearLaw& law) { return apply_law(beat.samples, law.w); }

LawSet::LawSet(std::vector<LinearLaw> laws) : laws_(std::move(laws)) {
    if (laws_.empty()) throw ParameterError("law set is empty");
    const std::size_t len = laws_.front().length();
    for (const auto& l : laws_)
        if (l.length() != len) throw ParameterError("all laws in a set must share one law length");
    std::sort(laws_.begin(), laws_.end(),
              [](const LinearLaw& a, const LinearLaw& b) { return label_name(a.class_tag) < label_name(b.class_tag); });
    for (std::size_t i = 1; i < laws_.size(); ++i)
        if (laws_[i].class_tag == laws_[i - 1].class_tag)
            throw ParameterError(fmt::format("duplicate law for class {}", label_name(laws_[i].class_tag)));
}

const LinearLaw& LawSet::at(Label cls) const {
    for (const auto& l : laws_)
        if (l.class_tag == cls) return l;
    throw ParameterError(fmt::format("no law for class {}", label_name(cls)));
}

std::optional<FeatureVector> stack_features(const Beat& beat, const LawSet& laws) {
    if (beat.artifact) return std::nullopt;
    FeatureVector fv;
    fv.mode = FeatureMode::MultiClass;
    for (const auto& law : laws.laws()) {
        auto xi = transform(beat, law);
        fv.layout.push_back({law.class_tag, xi.size()});
        fv.xi.insert(fv.xi.end(), xi.begin(), xi.end());
    }
    return fv;
}

std::optional<FeatureVector> binary_features(const Beat& beat, const LinearLaw& reference_law) {
    if (beat.artifact) return std::nullopt;
    FeatureVector fv;
    fv.mode = FeatureMode::BinaryReference;
    fv.xi = transform(beat, reference_law);
    fv.layout.push_back({reference_law.class_tag, fv.xi.size()});
    return fv;
}

FeatureVector downsample_features(const FeatureVector& fv, std::size_t factor) {
    if (factor == 0) throw ParameterError("downsampling factor must be at least 1");
    FeatureVector out;
    out.mode = fv.mode;
    std::size_t offset = 0;
    for (const auto& seg : fv.layout) {
        if (factor > seg.length)
            throw ParameterError(fmt::format("downsampling factor {} exceeds segment length {}", factor, seg.length));
        std::size_t kept = 0;
        for (std::size_t i = 0; i < seg.length; i += factor, ++kept) out.xi.push_back(fv.xi[offset + i]);
        out.layout.push_back({seg.class_tag, kept});
        offset += seg.length;
    }
    return out;
}

FeatureScaler FeatureScaler::fit(const Matrix& x) {
    FeatureScaler s;
    const std::size_t n = x.rows(), d = x.cols();
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    if (n == 0) return s;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) s.mean[c] += x(r, c);
    for (double& m : s.mean) m /= static_cast<double>(n);
    for (std::size_t c = 0; c < d; ++c) {
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) var += (x(r, c) - s.mean[c]) * (x(r, c) - s.mean[c]);
        var /= static_cast<double>(n);
        s.scale[c] = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    }
    return s;
}

void FeatureScaler::apply(std::span<double> row) const {
    if (empty()) return;
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) * scale[c];
}

Matrix FeatureScaler::apply(const Matrix& x) const {
    Matrix out = x;
    for (std::size_t r = 0; r < out.rows(); ++r) apply(out.row(r));
    return out;
}

namespace {

template <class MakeFeatures>
FeatureTable build_table(const Corpus& corpus, std::size_t downsample, MakeFeatures make) {
    FeatureTable table;
    std::vector<std::vector<double>> rows;
    for (const auto& beat : corpus.beats) {
        auto fv = make(beat);
        if (!fv) {
            ++table.artifact_count;
            continue;
        }
        if (downsample > 1) *fv = downsample_features(*fv, downsample);
        if (table.layout.empty()) table.layout = fv->layout;
        rows.push_back(std::move(fv->xi));
        table.labels.push_back(beat.label);
    }
    const std::size_t d = rows.empty() ? 0 : rows.front().size();
    table.x = Matrix(rows.size(), d);
    for (std::size_t r = 0; r < rows.size(); ++r) std::copy(rows[r].begin(), rows[r].end(), table.x.row(r).begin());
    return table;
}

std::string render_layout(const std::vector<FeatureSegment>& layout) {
    std::string s;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (i) s += ';';
        s += fmt::format("{}:{}", label_name(layout[i].class_tag), layout[i].length);
    }
    return s;
}

}  // namespace

FeatureTable binary_feature_table(const Corpus& corpus, const LinearLaw& reference_law, std::size_t downsample) {
    return build_table(corpus, downsample, [&](const Beat& b) { return binary_features(b, reference_law); });
}

FeatureTable stacked_feature_table(const Corpus& corpus, const LawSet& laws, std::size_t downsample) {
    return build_table(corpus, downsample, [&](const Beat& b) { return stack_features(b, laws); });
}

std::string render_feature_table(const FeatureTable& table) {
    std::string out = "# layout=" + render_layout(table.layout) + "\n";
    for (std::size_t r = 0; r < table.size(); ++r) {
        out += label_token(table.labels[r]);
        for (const double v : table.x.row(r)) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

FeatureTable parse_feature_table(std::string_view text) {
    FeatureTable table;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto eq = line.find("layout=");
            if (eq != std::string_view::npos) {
                for (auto seg : split(line.substr(eq + 7), ';')) {
                    const auto colon = seg.find(':');
                    if (colon == std::string_view::npos) throw ParseError("feature layout: expected class:length");
                    table.layout.push_back({parse_label_name(seg.substr(0, colon)),
                                            static_cast<std::size_t>(parse_int_or_throw(seg.substr(colon + 1), "layout"))});
                }
            }
            continue;
        }
        auto fields = split(line, ',');
        table.labels.push_back(parse_label_token(trim(fields.front())));
        std::vector<double> row;
        for (std::size_t c = 1; c < fields.size(); ++c)
            row.push_back(parse_double_or_throw(fields[c], fmt::format("features line {} column {}", line_no, c + 1)));
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(fmt::format("features line {}: expected {} values, got {}", line_no, rows.front().size(), row.size()));
        rows.push_back(std::move(row));
    }
    const std::size_t d = rows.empty() ? 0 : rows.front().size();
    table.x = Matrix(rows.size(), d);
    for (std::size_t r = 0; r < rows.size(); ++r) std::copy(rows[r].begin(), rows[r].end(), table.x.row(r).begin());
    return table;
}

void save_feature_table(const std::filesystem::path& path, const FeatureTable& table) {
    write_text_file(path, render_feature_table(table));
}

FeatureTable load_feature_table(const std::filesystem::path& path) { return parse_feature_table(read_text_file(path)); }

}  // namespace llt
