#include "llt/reproduce.hpp"

#include "llt/artifact_file.hpp"
#include "llt/llt_features.hpp"
#include "llt/tolerances.hpp"

#include <cmath>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>

namespace llt {

namespace {

struct MethodSpec {
    std::string name;
    std::string baseline;
    std::string slug;
    ModelKind kind;
    Hyperparams hp;
};

std::string xi_distribution_csv(const FeatureTable& table) {
    std::string out = "class,index,mean,std\n";
    for (Label cls : {Label::Normal, Label::Ectopic}) {
        for (std::size_t c = 0; c < table.x.cols(); ++c) {
            double sum = 0.0, sq = 0.0;
            std::size_t n = 0;
            for (std::size_t r = 0; r < table.size(); ++r) {
                if (table.labels[r] != cls) continue;
                sum += table.x(r, c);
                sq += table.x(r, c) * table.x(r, c);
                ++n;
            }
            if (n == 0) continue;
            const double mean = sum / static_cast<double>(n);
            const double var = std::max(0.0, sq / static_cast<double>(n) - mean * mean);
            out += fmt::format("{},{},{},{}\n", label_name(cls), c, format_double(mean), format_double(std::sqrt(var)));
        }
    }
    return out;
}

std::string law_coefficients_csv(const LinearLaw& law) {
    std::string out = "index,w\n";
    for (std::size_t i = 0; i < law.w.size(); ++i) out += fmt::format("{},{}\n", i, format_double(law.w[i]));
    return out;
}

std::string describe_hp(ModelKind kind, const Hyperparams& hp) {
    switch (kind) {
        case ModelKind::Knn: return fmt::format("k={} metric={}", hp.knn_k, metric_name(hp.knn_metric));
        case ModelKind::LinearSvm: return fmt::format("C={} epochs={}", format_double(hp.svm_C), hp.linear_epochs);
        case ModelKind::RbfSvm:
            return fmt::format("C={} gamma={}", format_double(hp.svm_C),
                               hp.rbf_gamma ? format_double(*hp.rbf_gamma) : std::string("default"));
        case ModelKind::RandomForest: return fmt::format("estimators={} depth={}", hp.rf_estimators, hp.rf_depth);
        case ModelKind::Mlp:
            return fmt::format("hidden={} epochs={} lr={} activation=tanh", hp.mlp_hidden, hp.mlp_epochs,
                               format_double(hp.mlp_lr));
    }
    return {};
}

}  // namespace

ReproduceResult run_reproduce(const ReproduceConfig& cfg) {
    ReproduceResult res;
    std::filesystem::create_directories(cfg.out_dir);
    auto log = [&](std::string stage, Role role, bool fit) { res.provenance.record(std::move(stage), role, fit); };

    // Corpora.
    const auto train_path = cfg.data_dir / "train.csv";
    const auto val_path = cfg.data_dir / "validation.csv";
    const auto test_path = cfg.data_dir / "test.csv";
    Corpus train, validation;
    std::string validation_source;
    Corpus full_train = load_corpus(train_path, cfg.format, Role::Train, cfg.preprocess);
    if (std::filesystem::exists(val_path)) {
        train = std::move(full_train);
        validation = load_corpus(val_path, cfg.format, Role::Validation, cfg.preprocess);
        validation_source = "validation.csv";
    } else {
        std::tie(train, validation) = split_train_validation(full_train, cfg.split);
        validation_source = fmt::format("split of train.csv (fraction {}, seed {}, {})", format_double(cfg.split.train_fraction),
                                        cfg.split.seed, cfg.split.stratified ? "stratified" : "unstratified");
    }
    const Corpus test = load_corpus(test_path, cfg.format, Role::Test, cfg.preprocess);
    for (const Corpus* c : std::initializer_list<const Corpus*>{&train, &validation, &test}) c->validate();
    res.train_beats = train.size();
    res.validation_beats = validation.size();
    res.test_beats = test.size();

    // Law.
    const auto normal_train = train.select(Label::Normal);
    const auto ectopic_train = train.select(Label::Ectopic);
    log("fit-law Normal", train.role, true);
    res.law = fit_law(normal_train, cfg.law_length, Label::Normal);
    save_law(res.law, cfg.out_dir / "law_normal.law");
    write_text_file(cfg.out_dir / "law_coefficients.csv", law_coefficients_csv(res.law));
    const double var_normal = law_variance(normal_train, res.law);
    if (!ectopic_train.empty()) {
        const double var_ectopic = law_variance(ectopic_train, res.law);
        res.cross_law_ratio = var_normal > 0.0 ? var_ectopic / var_normal : HUGE_VAL;
    }
    const double identity_gap = std::abs(var_normal - res.law.lambda);
    if (identity_gap > tol::kVarianceIdentity * std::max(res.law.lambda, var_normal) &&
        std::max(res.law.lambda, var_normal) > 0.0)
        res.audit_failures.push_back(fmt::format("variance identity violated: lambda {} vs residual variance {}",
                                                 format_double(res.law.lambda), format_double(var_normal)));

    // Law length diagnostics over the requested range, clipped to the beat length.
    const std::size_t scan_max = std::min(cfg.scan_max, train.length);
    if (cfg.scan_min >= 2 && cfg.scan_min <= scan_max) {
        log("scan-law-length", train.role, true);
        log("scan-law-length", validation.role, false);
        res.scan = scan_law_length(train, validation, cfg.scan_min, scan_max);
        std::ostringstream scan_csv;
        write_scan_csv(scan_csv, res.scan);
        write_text_file(cfg.out_dir / "scan.csv", scan_csv.str());
    }

    // Features.
    const FeatureTable f_train = binary_feature_table(train, res.law, cfg.downsample);
    const FeatureTable f_val = binary_feature_table(validation, res.law, cfg.downsample);
    const FeatureTable f_test = binary_feature_table(test, res.law, cfg.downsample);
    save_feature_table(cfg.out_dir / "features_train.csv", f_train);
    save_feature_table(cfg.out_dir / "features_validation.csv", f_val);
    save_feature_table(cfg.out_dir / "features_test.csv", f_test);
    write_text_file(cfg.out_dir / "xi_distribution.csv", xi_distribution_csv(f_train));

    // Classifier roster.
    std::vector<MethodSpec> roster;
    auto add = [&](std::string name, std::string baseline, std::string slug, ModelKind kind, Hyperparams hp) {
        roster.push_back({std::move(name), std::move(baseline), std::move(slug), kind, std::move(hp)});
    };
    Hyperparams hp = cfg.hp;
    add("RF", "RF", "rf", ModelKind::RandomForest, hp);
    add("SVM", "SVM", "svm", ModelKind::RbfSvm, hp);
    add("SVM (linear)", "SVM (linear)", "svm-linear", ModelKind::LinearSvm, hp);
    add("NN", "NN", "mlp", ModelKind::Mlp, hp);
    Hyperparams knn4 = hp;
    knn4.knn_k = 4;
    add("KNN (k=4)", "KNN (k=4)", "knn-k4", ModelKind::Knn, knn4);
    Hyperparams knn_sqrt = hp;
    knn_sqrt.knn_k = heuristic_k(f_train.size());
    add(fmt::format("KNN (k={})", knn_sqrt.knn_k), "KNN (k=57)", "knn-sqrt", ModelKind::Knn, knn_sqrt);

    std::string tuning_md;
    std::string roster_md;
    for (const auto& spec : roster) {
        TrainedModel model;
        Hyperparams used = spec.hp;
        const bool tunable = spec.kind == ModelKind::RbfSvm || spec.kind == ModelKind::LinearSvm;
        log(fmt::format("train {}", spec.slug), train.role, true);
        if (cfg.tune && tunable) {
            log(fmt::format("tune {}", spec.slug), validation.role, false);
            auto tuned = tune_model(spec.kind, f_train.x, f_train.labels, f_val.x, f_val.labels, spec.hp);
            for (const auto& e : tuned.grid)
                tuning_md += fmt::format("| {} | {} | {:.4f} | {:.4f} |\n", spec.name, describe_hp(spec.kind, e.hp),
                                         e.train_accuracy, e.validation_accuracy);
            model = std::move(tuned.model);
            used = tuned.best;
        } else {
            model = fit_model(spec.kind, f_train.x, f_train.labels, spec.hp);
        }
        model.train_meta.emplace_back("fit_role", std::string(role_name(train.role)));
        save_model(model, cfg.out_dir / fmt::format("model_{}.model", spec.slug));
        roster_md += fmt::format("| {} | {} | {} |\n", spec.name, model_kind_name(spec.kind), describe_hp(spec.kind, used));

        MethodResult mr;
        mr.method = spec.name;
        mr.baseline = spec.baseline;
        PipelineConfig pc{cfg.downsample, cfg.exclude_artifacts};
        for (const Corpus* c : std::initializer_list<const Corpus*>{&validation, &test}) {
            auto r = evaluate_pipeline(*c, res.law, model, pc, &res.provenance);
            std::size_t expected = c->size();
            if (cfg.exclude_artifacts)
                for (const auto& b : c->beats) expected -= b.artifact ? 1 : 0;
            if (r.report.counts.total() != expected)
                res.audit_failures.push_back(fmt::format("{} on {}: tallied {} of {} beats", spec.name, role_name(c->role),
                                                         r.report.counts.total(), expected));
            (c->role == Role::Test ? mr.test : mr.validation) = r.report;
        }
        res.methods.push_back(std::move(mr));
    }

    if (!res.provenance.audit_ok()) res.audit_failures.push_back("a test-role corpus was used by a fit stage");
    res.audit_ok = res.audit_failures.empty();

    // Reports.
    write_text_file(cfg.out_dir / "provenance.log", res.provenance.render());
    write_text_file(cfg.out_dir / "report.csv", compare_csv(res.methods));

    std::string md = "# LLT reproduction report\n\n## Configuration\n\n";
    for (const auto& [k, v] : cfg.resolved) md += fmt::format("- {} = {}\n", k, v);
    md += fmt::format("- validation source = {}\n", validation_source);
    md += fmt::format("\n## Corpora\n\n| Role | Beats | Artifacts |\n|---|---|---|\n");
    for (const Corpus* c : std::initializer_list<const Corpus*>{&train, &validation, &test}) {
        std::size_t art = 0;
        for (const auto& b : c->beats) art += b.artifact;
        md += fmt::format("| {} | {} | {} |\n", role_name(c->role), c->size(), art);
    }
    md += fmt::format("\n## Normal-class law\n\n- length = {}\n- lambda = {}\n- training rows = {}\n- eigenvalue gap = {}\n",
                      res.law.length(), format_double(res.law.lambda), res.law.train_row_count, format_double(res.law.eigen_gap));
    md += fmt::format("- residual variance on the fitting set = {}\n", format_double(var_normal));
    md += fmt::format("- cross-law variance ratio (Ectopic / Normal, training split) = {}\n", format_double(res.cross_law_ratio));
    md += fmt::format("- coefficients = {}\n", join_doubles(res.law.w, ' '));
    if (!res.scan.entries.empty()) {
        md += "\n## Law length scan\n\n| l | lambda train | var validation | gap | features |\n|---|---|---|---|---|\n";
        for (const auto& e : res.scan.entries)
            md += fmt::format("| {} | {:.6e} | {:.6e} | {:.6e} | {} |\n", e.law_length, e.lambda_train, e.var_validation, e.gap,
                              e.feature_count);
    }
    md += "\n## Classifiers\n\n| Method | Kind | Hyperparameters |\n|---|---|---|\n" + roster_md;
    if (!tuning_md.empty())
        md += "\n## Validation tuning grid\n\n| Method | Hyperparameters | Train acc | Validation acc |\n|---|---|---|---|\n" +
              tuning_md;
    md += "\n## Results\n\n" + compare_markdown(res.methods);
    md += "\n## Provenance\n\n```\n" + res.provenance.render() + "```\n";
    md += fmt::format("\n## Audit\n\n{}\n", res.audit_ok ? "passed" : "FAILED");
    for (const auto& f : res.audit_failures) md += fmt::format("- {}\n", f);
    write_text_file(cfg.out_dir / "report.md", md);
    return res;
}

}  // namespace llt
