#include "llt/cli.hpp"

#include "llt/artifact_file.hpp"
#include "llt/classifiers.hpp"
#include "llt/dataset_io.hpp"
#include "llt/evaluation.hpp"
#include "llt/linear_law.hpp"
#include "llt/llt_features.hpp"
#include "llt/parallel.hpp"
#include "llt/reproduce.hpp"
#include "llt/synth.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

namespace llt {

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitAudit = 2;

/// Usage problems detected after parsing (inconsistent flag combinations).
struct UsageError : Error {
    using Error::Error;
};

struct Common {
    std::string config;
    std::size_t threads = 0;
    std::string log_level = "warn";
};

struct PreprocessFlags {
    PreprocessConfig cfg;
    std::optional<double> refractory_ms;
    std::optional<double> fs_override;
    bool multi_beat = false;

    PreprocessConfig resolve(double fs) const {
        PreprocessConfig c = cfg;
        c.single_beat = !multi_beat;
        if (refractory_ms) c.refractory_samples = static_cast<std::size_t>(std::llround(*refractory_ms * fs / 1000.0));
        return c;
    }
};

struct HyperFlags {
    Hyperparams hp;
    std::optional<double> gamma;
    std::string metric = "chebyshev";
    std::string standardize = "auto";

    Hyperparams resolve() const {
        Hyperparams h = hp;
        h.rbf_gamma = gamma;
        h.knn_metric = parse_metric(metric);
        if (standardize == "on") h.standardize = true;
        else if (standardize == "off") h.standardize = false;
        else if (standardize != "auto") throw UsageError("--standardize must be auto, on or off");
        h.validate();
        return h;
    }
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config,
                    fmt::format("key=value config file; keys are long flag names (default from ${})", kConfigEnvVar));
    sub->add_option("--threads", c.threads, "worker threads, 0 = one per hardware thread");
    sub->add_option("--log-level", c.log_level, "trace, debug, info, warn, error or off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
}

void add_preprocess(CLI::App* sub, PreprocessFlags& p) {
    sub->add_option("--lowpass", p.cfg.lowpass_hz, "low-pass cutoff in Hz");
    sub->add_option("--highpass", p.cfg.highpass_hz, "high-pass cutoff in Hz");
    sub->add_option("--window-len", p.cfg.window_len, "beat window length in samples");
    sub->add_option("--peak-threshold", p.cfg.peak_threshold, "peak threshold as a fraction of the record maximum");
    sub->add_option("--refractory-ms", p.refractory_ms, "minimum peak spacing in ms (default 200)");
    sub->add_option("--fs", p.fs_override, "sampling rate in Hz, overriding the per-record value");
    sub->add_flag("--multi-beat", p.multi_beat, "emit every detected beat instead of one per record");
}

void add_hyper(CLI::App* sub, HyperFlags& h) {
    sub->add_option("--k", h.hp.knn_k, "KNN neighbour count");
    sub->add_option("--metric", h.metric, "KNN distance: chebyshev or euclidean")->check(CLI::IsMember({"chebyshev", "euclidean"}));
    sub->add_option("--rf-trees", h.hp.rf_estimators, "random forest estimators");
    sub->add_option("--rf-depth", h.hp.rf_depth, "random forest maximum depth");
    sub->add_option("--C", h.hp.svm_C, "SVM box constraint");
    sub->add_option("--gamma", h.gamma, "RBF width (default 1 / (features * variance))");
    sub->add_option("--linear-epochs", h.hp.linear_epochs, "linear SVM passes over the data");
    sub->add_option("--hidden", h.hp.mlp_hidden, "MLP hidden units");
    sub->add_option("--epochs", h.hp.mlp_epochs, "MLP full-batch epochs");
    sub->add_option("--lr", h.hp.mlp_lr, "MLP learning rate");
    sub->add_option("--standardize", h.standardize, "per-feature scaling inside the model: auto, on or off");
    sub->add_option("--model-seed", h.hp.seed, "seed for classifier training");
}

std::map<std::string, std::string> read_config(const fs::path& path) {
    std::map<std::string, std::string> kv;
    std::size_t line_no = 0;
    const std::string text = read_text_file(path);
    for (auto line : split(text, '\n')) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw UsageError(fmt::format("{}:{}: expected key=value", path.string(), line_no));
        kv[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
    }
    return kv;
}

bool mentions(const std::vector<std::string>& args, const std::string& flag) {
    for (const auto& a : args)
        if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
}

std::optional<std::string> flag_value(const std::vector<std::string>& args, const std::string& flag) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == flag && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind(flag + "=", 0) == 0) return args[i].substr(flag.size() + 1);
    }
    return std::nullopt;
}

/// Flat key=value rendering of every option of `sub` after parsing.
std::vector<std::pair<std::string, std::string>> resolved_options(const CLI::App* sub) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_single_name();
        if (name == "help" || name.empty()) continue;
        std::string value;
        if (opt->get_expected_max() == 0) {
            value = opt->as<bool>() ? "true" : "false";
        } else if (opt->count() > 0) {
            for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
        } else {
            value = opt->get_default_str();
        }
        out.emplace_back(name, value);
    }
    return out;
}

std::string render_resolved(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::string s;
    for (const auto& [k, v] : kv) s += fmt::format("# {}={}\n", k, v);
    return s;
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err, const std::string& level) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err);
    auto logger = std::make_shared<spdlog::logger>("llt", sink);
    logger->set_pattern("level=%l %v");
    logger->set_level(spdlog::level::from_str(level));
    return logger;
}

Label parse_class_flag(const std::string& s) {
    if (s == "N" || s == "Normal") return Label::Normal;
    if (s == "E" || s == "Ectopic") return Label::Ectopic;
    throw UsageError(fmt::format("--class must be N or E, got '{}'", s));
}

std::vector<double> parse_coeff_list(const std::string& s) {
    if (s.empty()) return {};
    return split_doubles(s, ',', "coefficient list");
}

}  // namespace

int run_subcommand(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Linear-law feature transformation for ECG beat classification", "llt"};
    app.require_subcommand(1, 1);
    app.option_defaults()->always_capture_default();
    app.failure_message(CLI::FailureMessage::help);

    Common common;

    // synth
    SynthSpec synth_spec;
    double omega_a = 0.3, omega_b = 0.9;
    std::string ar_a, ar_b;
    std::string synth_out;
    auto* synth = app.add_subcommand("synth", "generate a synthetic two-class corpus with known laws");
    synth->add_option("--omega-a", omega_a, "class A (Normal) angular frequency in rad/sample");
    synth->add_option("--omega-b", omega_b, "class B (Ectopic) angular frequency in rad/sample");
    synth->add_option("--ar-a", ar_a, "class A autoregressive coefficients a1,a2,... (replaces --omega-a)");
    synth->add_option("--ar-b", ar_b, "class B autoregressive coefficients (replaces --omega-b)");
    synth->add_option("--beats", synth_spec.beats_per_class, "beats per class");
    synth->add_option("--length", synth_spec.length, "samples per beat");
    synth->add_option("--noise", synth_spec.noise_sigma, "additive Gaussian noise sigma");
    synth->add_option("--seed", synth_spec.seed, "generator seed");
    synth->add_option("--out-dir", synth_out, "directory for train.csv, validation.csv, test.csv")->required();
    add_common(synth, common);

    // preprocess
    PreprocessFlags pre_flags;
    std::string pre_in, pre_out;
    auto* pre = app.add_subcommand("preprocess", "raw records ('fs;v0,v1,...' or 'label;fs;v0,...' per line) to a beat CSV");
    pre->add_option("--in", pre_in, "raw signal file")->required()->check(CLI::ExistingFile);
    pre->add_option("--out", pre_out, "beat CSV to write")->required();
    add_preprocess(pre, pre_flags);
    add_common(pre, common);

    // fit-law
    std::string fit_train, fit_out, fit_class = "N", fit_coeff_csv;
    std::size_t fit_len = 12;
    bool fit_degenerate = false;
    auto* fit = app.add_subcommand("fit-law", "fit one class's linear law");
    fit->add_option("--train", fit_train, "beat CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("--class", fit_class, "class to fit: N or E");
    fit->add_option("--law-len", fit_len, "number of law coefficients");
    fit->add_option("--out", fit_out, "law file to write")->required();
    fit->add_option("--coefficients-csv", fit_coeff_csv, "also write index,w rows for plotting");
    fit->add_flag("--allow-degenerate", fit_degenerate, "accept a repeated smallest eigenvalue");
    add_common(fit, common);

    // scan-law-length
    std::string scan_train, scan_val, scan_out, scan_class = "N";
    std::size_t scan_min = 4, scan_max = 20;
    SplitSpec scan_split;
    auto* scan = app.add_subcommand("scan-law-length", "fit and validate laws over a range of lengths");
    scan->add_option("--train", scan_train, "training beat CSV")->required()->check(CLI::ExistingFile);
    scan->add_option("--val", scan_val, "validation beat CSV (default: split --train)")->check(CLI::ExistingFile);
    scan->add_option("--min", scan_min, "shortest law length");
    scan->add_option("--max", scan_max, "longest law length");
    scan->add_option("--class", scan_class, "class to fit: N or E");
    scan->add_option("--split-fraction", scan_split.train_fraction, "fit fraction when --val is absent");
    scan->add_option("--seed", scan_split.seed, "split seed");
    scan->add_flag("--stratified", scan_split.stratified, "split within each label");
    scan->add_option("--out", scan_out, "CSV to write (default: standard output)");
    add_common(scan, common);

    // transform
    std::vector<std::string> tr_laws;
    std::string tr_in, tr_out;
    std::size_t tr_down = 1;
    auto* tr = app.add_subcommand("transform", "beats to law-residual feature rows");
    tr->add_option("--law", tr_laws, "law file; repeat for multi-class stacking")->required()->check(CLI::ExistingFile);
    tr->add_option("--in", tr_in, "beat CSV")->required()->check(CLI::ExistingFile);
    tr->add_option("--out", tr_out, "feature CSV to write")->required();
    tr->add_option("--downsample", tr_down, "keep every n-th feature of each segment");
    add_common(tr, common);

    // train
    HyperFlags train_hp;
    std::string train_model = "svm", train_features, train_val, train_out;
    bool train_tune = false, train_k_auto = false;
    auto* train = app.add_subcommand("train", "train a classifier on a feature CSV");
    train->add_option("--model", train_model, "knn, svm, svm-linear, rf or mlp")
        ->check(CLI::IsMember({"knn", "svm", "svm-linear", "rf", "mlp"}));
    train->add_option("--features", train_features, "training feature CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--val", train_val, "validation feature CSV for reporting and --tune")->check(CLI::ExistingFile);
    train->add_option("--out", train_out, "model file to write")->required();
    train->add_flag("--tune", train_tune, "choose hyperparameters on --val");
    train->add_flag("--k-auto", train_k_auto, "KNN k = round(sqrt(training rows))");
    add_hyper(train, train_hp);
    add_common(train, common);

    // evaluate
    std::string ev_law, ev_model, ev_test, ev_report, ev_role = "test", ev_method;
    std::size_t ev_down = 1;
    bool ev_exclude = false;
    auto* ev = app.add_subcommand("evaluate", "score a law + model pair on a beat corpus");
    ev->add_option("--law", ev_law, "reference law file")->required()->check(CLI::ExistingFile);
    ev->add_option("--model", ev_model, "model file")->required()->check(CLI::ExistingFile);
    ev->add_option("--test", ev_test, "beat CSV to score")->required()->check(CLI::ExistingFile);
    ev->add_option("--role", ev_role, "role of the scored corpus")->check(CLI::IsMember({"validation", "test"}));
    ev->add_option("--report", ev_report, "report CSV to write");
    ev->add_option("--method", ev_method, "method name in the report (default: model kind)");
    ev->add_option("--downsample", ev_down, "feature downsampling used at training time");
    ev->add_flag("--exclude-artifacts", ev_exclude, "leave artifact beats out of the tallies");
    add_common(ev, common);

    // reproduce
    ReproduceConfig rep;
    PreprocessFlags rep_pre;
    HyperFlags rep_hp;
    std::string rep_data, rep_out = "results", rep_format = "csv";
    bool rep_no_tune = false;
    auto* repro = app.add_subcommand("reproduce", "full protocol: law, features, five classifier families, report");
    repro->add_option("--data", rep_data, "directory with train.csv, test.csv and optionally validation.csv")
        ->required()
        ->check(CLI::ExistingDirectory);
    repro->add_option("--out-dir", rep_out, "output directory");
    repro->add_option("--format", rep_format, "csv (beats) or raw (signals)")->check(CLI::IsMember({"csv", "raw"}));
    repro->add_option("--law-len", rep.law_length, "Normal law length");
    repro->add_option("--scan-min", rep.scan_min, "shortest law length in the diagnostic scan");
    repro->add_option("--scan-max", rep.scan_max, "longest law length in the diagnostic scan");
    repro->add_option("--split-fraction", rep.split.train_fraction, "fit fraction when validation.csv is absent");
    repro->add_option("--seed", rep.split.seed, "split seed");
    repro->add_flag("--stratified", rep.split.stratified, "split within each label");
    repro->add_option("--downsample", rep.downsample, "keep every n-th feature");
    repro->add_flag("--exclude-artifacts", rep.exclude_artifacts, "leave artifact beats out of the tallies");
    repro->add_flag("--no-tune", rep_no_tune, "use default SVM hyperparameters instead of validation tuning");
    add_preprocess(repro, rep_pre);
    add_hyper(repro, rep_hp);
    add_common(repro, common);

    // Config file entries are appended for options the command line does not set.
    std::vector<std::string> args = args_in;
    try {
        std::string config_path;
        if (auto v = flag_value(args, "--config")) config_path = *v;
        else if (const char* env = std::getenv(kConfigEnvVar)) config_path = env;
        if (!config_path.empty()) {
            std::string sub_name;
            for (const auto& a : args)
                if (!a.empty() && a.front() != '-') {
                    sub_name = a;
                    break;
                }
            CLI::App* target = nullptr;
            for (auto* s : app.get_subcommands({}))
                if (s->get_name() == sub_name) target = s;
            if (target) {
                for (const auto& [k, v] : read_config(config_path)) {
                    const std::string flag = "--" + k;
                    if (k == "config" || mentions(args, flag)) continue;
                    if (target->get_option_no_throw(flag) == nullptr) continue;
                    args.push_back(flag + "=" + v);
                }
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    for (const auto& a : args) {
        if (a.empty() || a.front() == '-') continue;
        bool known = false;
        for (auto* s : app.get_subcommands({})) known = known || s->get_name() == a;
        if (!known) {
            err << "error: unknown subcommand '" << a << "'\n\n" << app.help();
            return kExitUsage;
        }
        break;
    }

    std::vector<const char*> argv{"llt"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    auto log = make_logger(err, common.log_level);
    set_worker_count(common.threads);
    const auto resolved = resolved_options(sub);

    try {
        if (sub == synth) {
            synth_spec.class_a = ar_a.empty() ? RecurrenceSpec::sinusoid(omega_a) : RecurrenceSpec::autoregressive(parse_coeff_list(ar_a));
            synth_spec.class_b = ar_b.empty() ? RecurrenceSpec::sinusoid(omega_b) : RecurrenceSpec::autoregressive(parse_coeff_list(ar_b));
            const auto corpora = generate(synth_spec);
            fs::create_directories(synth_out);
            save_corpus(fs::path(synth_out) / "train.csv", corpora.train);
            save_corpus(fs::path(synth_out) / "validation.csv", corpora.validation);
            save_corpus(fs::path(synth_out) / "test.csv", corpora.test);
            write_text_file(fs::path(synth_out) / "synth_config.txt", render_resolved(resolved));
            out << fmt::format("wrote {} train, {} validation, {} test beats to {}\n", corpora.train.size(),
                               corpora.validation.size(), corpora.test.size(), synth_out);
            log->info("stage=synth beats_per_class={} length={} noise={}", synth_spec.beats_per_class, synth_spec.length,
                      synth_spec.noise_sigma);
            return kExitOk;
        }

        if (sub == pre) {
            Corpus corpus{{}, pre_flags.cfg.window_len, Role::Train};
            std::size_t records = 0, artifacts = 0;
            for (auto rec : load_signals(pre_in)) {
                if (pre_flags.fs_override) rec.signal.fs = *pre_flags.fs_override;
                const auto cfg = pre_flags.resolve(rec.signal.fs);
                ++records;
                for (auto& b : preprocess_record(rec.signal, cfg, rec.label)) {
                    b.source_id = rec.source_id;
                    artifacts += b.artifact;
                    corpus.beats.push_back(std::move(b));
                }
            }
            save_corpus(pre_out, corpus);
            out << fmt::format("{} records -> {} beats ({} artifacts)\n", records, corpus.size(), artifacts);
            log->info("stage=preprocess records={} beats={} artifacts={}", records, corpus.size(), artifacts);
            return kExitOk;
        }

        if (sub == fit) {
            const Corpus corpus = load_corpus(fit_train, CorpusFormat::Csv, Role::Train);
            const Label cls = parse_class_flag(fit_class);
            const auto beats = corpus.select(cls);
            FitOptions opts;
            opts.allow_degenerate = fit_degenerate;
            const LinearLaw law = fit_law(beats, fit_len, cls, opts);
            save_law(law, fit_out);
            if (!fit_coeff_csv.empty()) {
                std::string csv = "index,w\n";
                for (std::size_t i = 0; i < law.w.size(); ++i) csv += fmt::format("{},{}\n", i, format_double(law.w[i]));
                write_text_file(fit_coeff_csv, csv);
            }
            out << fmt::format("class={} l={} lambda={} rows={} multiplicity={} gap={}\n", label_name(cls), law.length(),
                               format_double(law.lambda), law.train_row_count, law.multiplicity, format_double(law.eigen_gap));
            log->info("stage=fit-law class={} l={} lambda={}", label_name(cls), law.length(), law.lambda);
            return kExitOk;
        }

        if (sub == scan) {
            Corpus train_c = load_corpus(scan_train, CorpusFormat::Csv, Role::Train);
            Corpus val_c;
            if (!scan_val.empty()) {
                val_c = load_corpus(scan_val, CorpusFormat::Csv, Role::Validation);
            } else {
                std::tie(train_c, val_c) = split_train_validation(train_c, scan_split);
            }
            const auto report = scan_law_length(train_c, val_c, scan_min, scan_max, parse_class_flag(scan_class));
            std::ostringstream csv;
            write_scan_csv(csv, report);
            if (scan_out.empty()) out << csv.str();
            else write_text_file(scan_out, csv.str());
            return kExitOk;
        }

        if (sub == tr) {
            std::vector<LinearLaw> laws;
            for (const auto& p : tr_laws) laws.push_back(load_law(p));
            const Corpus corpus = load_corpus(tr_in, CorpusFormat::Csv, Role::Train);
            const FeatureTable table = laws.size() == 1 ? binary_feature_table(corpus, laws.front(), tr_down)
                                                        : stacked_feature_table(corpus, LawSet(laws), tr_down);
            save_feature_table(tr_out, table);
            out << fmt::format("{} feature rows of width {} ({} artifact beats skipped)\n", table.size(), table.x.cols(),
                               table.artifact_count);
            return kExitOk;
        }

        if (sub == train) {
            const FeatureTable ft = load_feature_table(train_features);
            Hyperparams hp = train_hp.resolve();
            if (train_k_auto) hp.knn_k = heuristic_k(ft.size());
            const ModelKind kind = parse_model_kind(train_model);
            std::optional<FeatureTable> fv;
            if (!train_val.empty()) fv = load_feature_table(train_val);
            if (train_tune && !fv) throw UsageError("--tune needs --val");
            TrainedModel model;
            if (train_tune) {
                auto tuned = tune_model(kind, ft.x, ft.labels, fv->x, fv->labels, hp);
                for (const auto& e : tuned.grid)
                    log->info("stage=tune model={} train_acc={} val_acc={} score={}", train_model, e.train_accuracy,
                              e.validation_accuracy, e.selection_score);
                model = std::move(tuned.model);
            } else {
                model = fit_model(kind, ft.x, ft.labels, hp);
            }
            model.train_meta.emplace_back("fit_role", "train");
            save_model(model, train_out);
            out << fmt::format("model={} train_accuracy={:.4f}", train_model, accuracy(model, ft.x, ft.labels));
            if (fv) out << fmt::format(" validation_accuracy={:.4f}", accuracy(model, fv->x, fv->labels));
            out << "\n";
            return kExitOk;
        }

        if (sub == ev) {
            const LinearLaw law = load_law(ev_law);
            const TrainedModel model = load_model(ev_model);
            const Role role = parse_role_name(ev_role);
            const Corpus corpus = load_corpus(ev_test, CorpusFormat::Csv, role);
            std::vector<std::string> failures;
            for (const auto& [k, v] : model.train_meta)
                if (k == "fit_role" && v == "test") failures.push_back("model was fitted on a test-role corpus");
            PipelineConfig pc{ev_down, ev_exclude};
            auto result = evaluate_pipeline(corpus, law, model, pc);
            std::size_t expected = corpus.size();
            if (ev_exclude)
                for (const auto& b : corpus.beats) expected -= b.artifact ? 1 : 0;
            if (result.report.counts.total() != expected)
                failures.push_back(fmt::format("tallied {} of {} beats", result.report.counts.total(), expected));

            MethodResult mr;
            mr.method = ev_method.empty() ? std::string(model_kind_name(model.kind)) : ev_method;
            (role == Role::Test ? mr.test : mr.validation) = result.report;
            const std::vector<MethodResult> rows{mr};
            if (!ev_report.empty()) write_text_file(ev_report, render_resolved(resolved) + compare_csv(rows));
            const auto& r = result.report;
            out << fmt::format("role={} beats={} artifacts={} ACC={} Se_N={} +P_N={} Se_E={} +P_E={}\n", ev_role,
                               corpus.size(), r.artifact_count, percent(r.acc), percent(r.se_normal), percent(r.pp_normal),
                               percent(r.se_ectopic), percent(r.pp_ectopic));
            for (const auto& f : failures) err << "audit failure: " << f << "\n";
            return failures.empty() ? kExitOk : kExitAudit;
        }

        if (sub == repro) {
            rep.data_dir = rep_data;
            rep.out_dir = rep_out;
            rep.format = rep_format == "raw" ? CorpusFormat::RawSignalCsv : CorpusFormat::Csv;
            rep.preprocess = rep_pre.resolve(rep_pre.fs_override.value_or(360.0));
            rep.hp = rep_hp.resolve();
            rep.tune = !rep_no_tune;
            rep.resolved = resolved;
            log->info("stage=reproduce data={} out={}", rep_data, rep_out);
            const auto result = run_reproduce(rep);
            for (const auto& m : result.methods)
                out << fmt::format("{}: validation ACC {}, test ACC {}\n", m.method,
                                   m.validation ? percent(m.validation->acc) : "n/a", m.test ? percent(m.test->acc) : "n/a");
            out << fmt::format("cross-law variance ratio {:.3f}; report written to {}\n", result.cross_law_ratio,
                               (fs::path(rep_out) / "report.md").string());
            for (const auto& f : result.audit_failures) err << "audit failure: " << f << "\n";
            return result.audit_ok ? kExitOk : kExitAudit;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << sub->help();
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

int run_subcommand(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_subcommand(args, out, err);
}

}  // namespace llt
