#include "llt/evaluation.hpp"

#include "llt/artifact_file.hpp"
#include "llt/llt_features.hpp"

#include <fmt/format.h>

namespace llt {

bool Ratio::operator==(const Ratio& o) const {
    return static_cast<unsigned __int128>(num) * o.den == static_cast<unsigned __int128>(o.num) * den;
}

ConfusionCounts score(std::span<const Label> predictions, std::span<const Label> truth) {
    if (predictions.size() != truth.size())
        throw ParameterError(fmt::format("score: {} predictions but {} truth labels", predictions.size(), truth.size()));
    ConfusionCounts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == Label::Unlabeled || predictions[i] == Label::Unlabeled)
            throw ParameterError(fmt::format("score: item {} is unlabeled", i));
        const bool pred_n = predictions[i] == Label::Normal, true_n = truth[i] == Label::Normal;
        if (pred_n && true_n) ++c.tp;
        else if (!pred_n && !true_n) ++c.tn;
        else if (pred_n) ++c.fp;
        else ++c.fn;
    }
    return c;
}

MetricsReport metrics(const ConfusionCounts& c) {
    if (c.total() == 0) throw ParameterError("metrics: no evaluated items");
    auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<Ratio> {
        if (den == 0) return std::nullopt;
        return Ratio{num, den};
    };
    MetricsReport r;
    r.counts = c;
    r.acc = Ratio{c.tp + c.tn, c.total()};
    r.se_normal = ratio(c.tp, c.tp + c.fn);
    r.pp_normal = ratio(c.tp, c.tp + c.fp);
    r.se_ectopic = ratio(c.tn, c.tn + c.fp);
    r.pp_ectopic = ratio(c.tn, c.tn + c.fn);
    return r;
}

bool ProvenanceLog::audit_ok() const {
    for (const auto& e : entries_)
        if (e.is_fit && e.role == Role::Test) return false;
    return true;
}

std::string ProvenanceLog::render() const {
    std::string out;
    for (const auto& e : entries_)
        out += fmt::format("{} {} {}\n", e.is_fit ? "fit" : "eval", e.stage, role_name(e.role));
    return out;
}

PipelineResult evaluate_pipeline(const Corpus& corpus, const LinearLaw& law, const TrainedModel& model,
                                 const PipelineConfig& cfg, ProvenanceLog* log) {
    if (log) log->record("evaluate", corpus.role, false);
    PipelineResult out;
    std::vector<Label> preds, truth;
    std::size_t artifacts = 0;
    for (const auto& beat : corpus.beats) {
        Label p;
        if (auto fv = binary_features(beat, law)) {
            if (cfg.downsample > 1) *fv = downsample_features(*fv, cfg.downsample);
            p = predict(model, fv->xi);
        } else {
            p = Label::Ectopic;
            ++artifacts;
        }
        out.predictions.push_back(p);
        if (beat.artifact && cfg.exclude_artifacts) continue;
        preds.push_back(p);
        truth.push_back(beat.label);
    }
    out.report = metrics(score(preds, truth));
    out.report.artifact_count = artifacts;
    out.report.role = corpus.role;
    return out;
}

const std::vector<BaselineRow>& published_baselines() {
    using A = std::array<double, 5>;
    static const std::vector<BaselineRow> rows{
        {"RF", A{93.6, 94.3, 93.1, 93.0, 94.2}, A{92.1, 92.9, 91.4, 91.2, 92.8}},
        {"SVM", A{95.0, 96.3, 93.8, 93.6, 96.2}, A{94.3, 94.4, 94.2, 94.2, 94.4}},
        {"SVM (linear)", A{89.4, 89.9, 89.0, 88.9, 89.8}, A{91.8, 93.2, 90.6, 90.4, 93.0}},
        {"NN", A{95.2, 95.7, 94.7, 94.7, 95.6}, A{93.1, 94.0, 92.3, 92.2, 93.9}},
        {"KNN (k=4)", A{96.4, 97.4, 95.5, 95.4, 97.4}, A{91.5, 95.0, 88.8, 88.0, 94.6}},
        {"KNN (k=57)", A{92.7, 90.7, 94.5, 94.7, 91.1}, A{90.9, 88.1, 93.3, 93.7, 88.7}},
        {"VPNet", std::nullopt, A{96.7, 99.4, 94.2, 93.9, 99.3}},
    };
    return rows;
}

const BaselineRow* find_baseline(std::string_view method) {
    for (const auto& row : published_baselines())
        if (row.method == method) return &row;
    return nullptr;
}

std::string percent(const std::optional<Ratio>& r) {
    if (!r) return "n/a";
    return fmt::format("{:.1f}%", 100.0 * r->value());
}

namespace {

std::string block(const std::optional<MetricsReport>& m) {
    if (!m) return "| n/a | n/a | n/a | n/a | n/a ";
    return fmt::format("| {} | {} | {} | {} | {} ", percent(m->acc), percent(m->se_normal), percent(m->pp_normal),
                       percent(m->se_ectopic), percent(m->pp_ectopic));
}

std::string baseline_block(const std::optional<std::array<double, 5>>& b) {
    if (!b) return "| N/A | N/A | N/A | N/A | N/A ";
    return fmt::format("| {:.1f}% | {:.1f}% | {:.1f}% | {:.1f}% | {:.1f}% ", (*b)[0], (*b)[1], (*b)[2], (*b)[3], (*b)[4]);
}

std::string baseline_acc(const std::string& method, bool test) {
    const auto* b = find_baseline(method);
    if (!b) return "N/A";
    const auto& v = test ? b->test : b->validation;
    return v ? fmt::format("{:.1f}%", (*v)[0]) : "N/A";
}

std::string optional_value(const std::optional<Ratio>& r) { return r ? format_double(r->value()) : ""; }

std::string optional_fraction(const std::optional<Ratio>& r) { return r ? fmt::format("{}/{}", r->num, r->den) : ""; }

}  // namespace

std::string compare_markdown(std::span<const MethodResult> results) {
    const std::string header =
        "| Method | Val ACC | Val Se N | Val +P N | Val Se E | Val +P E | Test ACC | Test Se N | Test +P N | Test Se E | Test +P E |";
    const std::string rule = "|---|---|---|---|---|---|---|---|---|---|---|";
    std::string out = "### Measured\n\n" + header + " Published Val ACC | Published Test ACC | Val artifacts | Test artifacts |\n" +
                      rule + "---|---|---|---|\n";
    for (const auto& r : results) {
        out += fmt::format("| {} {}{}| {} | {} | {} | {} |\n", r.method, block(r.validation), block(r.test),
                           baseline_acc(r.baseline, false), baseline_acc(r.baseline, true),
                           r.validation ? std::to_string(r.validation->artifact_count) : "n/a",
                           r.test ? std::to_string(r.test->artifact_count) : "n/a");
    }
    out += "\n### Published baseline\n\n" + header + "\n" + rule + "\n";
    for (const auto& b : published_baselines())
        out += fmt::format("| {} {}{}|\n", b.method, baseline_block(b.validation), baseline_block(b.test));
    return out;
}

std::string compare_csv(std::span<const MethodResult> results) {
    std::string out =
        "method,role,tp,tn,fp,fn,artifacts,acc_fraction,acc,se_normal,pp_normal,se_ectopic,pp_ectopic,published_acc\n";
    for (const auto& r : results) {
        for (const auto* m : {&r.validation, &r.test}) {
            if (!*m) continue;
            const auto& rep = **m;
            const bool is_test = rep.role == Role::Test;
            const auto* b = find_baseline(r.baseline);
            const auto& pub = b ? (is_test ? b->test : b->validation) : std::optional<std::array<double, 5>>{};
            out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.method, role_name(rep.role), rep.counts.tp,
                               rep.counts.tn, rep.counts.fp, rep.counts.fn, rep.artifact_count,
                               optional_fraction(rep.acc), format_double(rep.acc.value()), optional_value(rep.se_normal),
                               optional_value(rep.pp_normal), optional_value(rep.se_ectopic), optional_value(rep.pp_ectopic),
                               pub ? format_double((*pub)[0] / 100.0) : "");
        }
    }
    return out;
}

}  // namespace llt
