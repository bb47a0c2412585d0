#include "llt/artifact_file.hpp"
#include "llt/dataset_io.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>

namespace llt {
namespace {

namespace fs = std::filesystem;

std::string error_of(auto&& fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

Corpus numbered_corpus(std::size_t n) {
    Corpus c{{}, 2, Role::Train};
    for (std::size_t i = 0; i < n; ++i)
        c.beats.push_back(Beat{{static_cast<double>(i), 0.5}, i % 3 == 0 ? Label::Ectopic : Label::Normal, false, ""});
    return c;
}

TEST(CorpusCsv, ParsesOneRow) {
    const auto c = parse_corpus_csv("N,0.1,0.2,0.3\n");
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c.length, 3u);
    EXPECT_EQ(c.beats[0].label, Label::Normal);
    EXPECT_EQ(c.beats[0].samples, (std::vector<double>{0.1, 0.2, 0.3}));
    EXPECT_FALSE(c.beats[0].artifact);
}

TEST(CorpusCsv, ShortRowNamesRowAndCounts) {
    EXPECT_EQ(error_of([] { parse_corpus_csv("N,0.1,0.2,0.3\nE,0.1,0.2\n"); }), "row 2: expected 3 samples, got 2");
    EXPECT_NE(error_of([] { parse_corpus_csv("X,1,2\n"); }).find("unknown label token 'X'"), std::string::npos);
    EXPECT_NE(error_of([] { parse_corpus_csv("N,1,abc\n"); }).find("row 1, column 3"), std::string::npos);
    EXPECT_THROW(parse_corpus_csv("\n\n"), ParseError);
}

TEST(CorpusCsv, ArtifactMarkerAndEmptyArtifactRows) {
    const auto c = parse_corpus_csv("N,1,2\nE!\n?!,0,0\n");
    ASSERT_EQ(c.size(), 3u);
    EXPECT_TRUE(c.beats[1].artifact);
    EXPECT_TRUE(c.beats[1].samples.empty());
    EXPECT_TRUE(c.beats[2].artifact);
    EXPECT_EQ(c.beats[2].label, Label::Unlabeled);
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.select(Label::Ectopic).size(), 0u);
}

TEST(CorpusCsv, LargeFileKeepsEveryRow) {
    std::string text;
    for (int i = 0; i < 8520; ++i) text += (i % 2 ? "N" : "E") + std::string(",1,2,3\n");
    EXPECT_EQ(parse_corpus_csv(text).size(), 8520u);
}

TEST(CorpusCsv, RoundTripIsExact) {
    Rng rng(1);
    Corpus c{oracle::random_beats(rng, 20, 30), 30, Role::Train};
    c.beats[3].label = Label::Ectopic;
    c.beats[4].artifact = true;
    c.beats[5].label = Label::Unlabeled;
    const auto back = parse_corpus_csv(render_corpus_csv(c));
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_EQ(back.beats[i].samples, c.beats[i].samples);
        EXPECT_EQ(back.beats[i].label, c.beats[i].label);
        EXPECT_EQ(back.beats[i].artifact, c.beats[i].artifact);
    }
    const auto path = fs::temp_directory_path() / "llt_corpus_roundtrip.csv";
    save_corpus(path, c);
    EXPECT_EQ(load_corpus(path, CorpusFormat::Csv).size(), 20u);
    fs::remove(path);
    EXPECT_THROW(load_corpus(path, CorpusFormat::Csv), Error);
}

TEST(Signals, ParseWithAndWithoutLabels) {
    const auto s = parse_signals("360;1,2,3\nE;250;4,5\n");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].label, Label::Unlabeled);
    EXPECT_EQ(s[0].signal.fs, 360.0);
    EXPECT_EQ(s[1].label, Label::Ectopic);
    EXPECT_EQ(s[1].signal.values, (std::vector<double>{4, 5}));
    EXPECT_THROW(parse_signals("1;2;3;4\n"), ParseError);
    EXPECT_THROW(parse_signals("-5;1,2\n"), ParseError);
}

TEST(Split, SizesAndDisjointness) {
    const auto c = numbered_corpus(10);
    const auto [train, val] = split_train_validation(c, {0.4, 7, false});
    EXPECT_EQ(train.size(), 4u);
    EXPECT_EQ(val.size(), 6u);
    EXPECT_EQ(val.role, Role::Validation);
    std::set<double> ids;
    for (const auto* part : {&train, &val})
        for (const auto& b : part->beats) ids.insert(b.samples[0]);
    EXPECT_EQ(ids.size(), 10u);
}

TEST(Split, ClinicalSizesAndBoundary) {
    const auto c = numbered_corpus(8520);
    const auto [train, val] = split_train_validation(c, {0.40, 0, false});
    EXPECT_EQ(train.size(), 3408u);
    EXPECT_EQ(val.size(), 5112u);
    const auto [all, none] = split_train_validation(numbered_corpus(10), {1.0, 3, false});
    EXPECT_EQ(all.size(), 10u);
    EXPECT_TRUE(none.empty());
    EXPECT_THROW(split_train_validation(c, {0.0, 0, false}), ParameterError);
    Corpus test = c;
    test.role = Role::Test;
    EXPECT_THROW(split_train_validation(test, {0.4, 0, false}), ParameterError);
}

TEST(SplitProperty, DeterministicOrderPreservingAndStratified) {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = numbered_corpus(5 + rng.index(200));
        const SplitSpec spec{rng.uniform(0.1, 1.0), rng.next(), trial % 2 == 0};
        const auto a = split_train_validation(c, spec);
        const auto b = split_train_validation(c, spec);
        ASSERT_EQ(a.first.beats, b.first.beats);
        ASSERT_EQ(a.second.beats, b.second.beats);
        ASSERT_EQ(a.first.size() + a.second.size(), c.size());
        for (const auto* part : {&a.first, &a.second})
            for (std::size_t i = 1; i < part->size(); ++i) ASSERT_LT(part->beats[i - 1].samples[0], part->beats[i].samples[0]);
        if (spec.stratified) {
            const auto n = c.select(Label::Normal).size();
            ASSERT_EQ(a.first.select(Label::Normal).size(),
                      static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n))));
        }
    }
}

TEST(LawFile, RoundTrip) {
    LinearLaw law;
    law.w = {1.0, 0.0};
    law.lambda = 0.125;
    law.train_row_count = 7;
    const auto back = parse_law(render_law(law));
    EXPECT_EQ(back.w, law.w);
    EXPECT_EQ(back.lambda, law.lambda);
    EXPECT_EQ(back.length(), 2u);
    EXPECT_EQ(back.class_tag, Label::Normal);
}

TEST(LawFile, RealCoefficientsSurviveExactly) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        LinearLaw law;
        law.w = oracle::random_unit(rng, 12);
        law.lambda = rng.uniform() * 1e-3;
        law.class_tag = trial % 2 ? Label::Ectopic : Label::Normal;
        law.eigen_gap = rng.uniform();
        const auto path = fs::temp_directory_path() / "llt_law_roundtrip.law";
        save_law(law, path);
        const auto back = load_law(path);
        ASSERT_EQ(back.w, law.w);
        ASSERT_EQ(back.lambda, law.lambda);
        ASSERT_EQ(back.eigen_gap, law.eigen_gap);
        ASSERT_EQ(back.class_tag, law.class_tag);
        ASSERT_EQ(back.length(), 12u);
        fs::remove(path);
    }
}

TEST(LawFile, TamperingIsDetected) {
    LinearLaw half;
    half.w = {0.5, 0.0};
    EXPECT_EQ(error_of([&] { parse_law(render_law(half)); }), "coefficients not unit norm");

    LinearLaw law;
    law.w = {0.6, 0.8};
    auto text = render_law(law);
    const auto pos = text.find("0.80000000000000004");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 19, "0.80000000000000000");  // still unit norm to 1e-9
    EXPECT_NE(error_of([&] { parse_law(text); }).find("checksum mismatch"), std::string::npos);
}

TEST(ArtifactFile, FormatDoubleRoundTripsEveryBitPattern) {
    Rng rng(4);
    for (int i = 0; i < 2000; ++i) {
        const double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.index(200)) - 100);
        ASSERT_EQ(*parse_double(format_double(v)), v);
    }
    EXPECT_FALSE(parse_double("nan"));
    EXPECT_FALSE(parse_double("1e400"));
    EXPECT_FALSE(parse_double("1.5x"));
}

TEST(ArtifactFile, HeaderAccessAndVersionCheck) {
    ArtifactText a;
    a.magic = "demo";
    a.set("alpha", "1");
    a.payload = {"x", "y"};
    const auto text = render_artifact(a);
    const auto back = parse_artifact(text, "demo");
    EXPECT_TRUE(back.checksum_ok);
    EXPECT_EQ(back.get("alpha"), "1");
    EXPECT_FALSE(back.find("beta"));
    EXPECT_EQ(back.payload, a.payload);
    EXPECT_THROW(parse_artifact(text, "other"), ParseError);
    std::string bumped = text;
    bumped.replace(bumped.find("version=1"), 9, "version=9");
    EXPECT_THROW(parse_artifact(bumped, "demo"), ParseError);
}

TEST(Labels, TokensAndNames) {
    for (Label l : {Label::Normal, Label::Ectopic, Label::Unlabeled}) {
        EXPECT_EQ(parse_label_token(label_token(l)), l);
        EXPECT_EQ(parse_label_name(label_name(l)), l);
    }
    for (Role r : {Role::Train, Role::Validation, Role::Test}) EXPECT_EQ(parse_role_name(role_name(r)), r);
}

}  // namespace
}  // namespace llt
