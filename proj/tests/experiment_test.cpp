// Copyright 2026 The tgt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tgt/experiment.hpp"

#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

namespace fs = std::filesystem;
namespace ex = tgt::experiment;

namespace {

ex::ExperimentConfig small_config(std::size_t e = 1) {
    ex::ExperimentConfig cfg;
    cfg.params = {16, 3, 2, e, 0};
    cfg.trials = 40;
    cfg.seed = 9;
    cfg.timings = false;
    return cfg;
}

const ex::Bundle& small_bundle() {
    static const ex::Bundle b = ex::generate_bundle(small_config());
    return b;
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("tgt_experiment_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) { return tgt::io::read_file(p.string()); }

}  // namespace

TEST(Bundle, MetadataDescribesScheme) {
    const auto& b = small_bundle();
    EXPECT_EQ(b.meta["format"], "tgt-scheme v1");
    EXPECT_EQ(b.meta["dimensions"]["t"].get<std::size_t>(), b.scheme.tests());
    EXPECT_EQ(b.scheme.tests(), (2 * b.scheme.k() + 1) * b.scheme.h());
    EXPECT_TRUE(b.meta["certificates"]["M"]["verified"].get<bool>());
    EXPECT_EQ(b.meta["certificates"]["M"]["order"].get<std::size_t>(), 4u);
    EXPECT_EQ(b.meta["certificates"]["G"]["budget"].get<std::size_t>(), 2u);
    EXPECT_EQ(b.certified_e(), 1u);
}

TEST(Bundle, WriteReadRoundTrip) {
    const auto dir = scratch("roundtrip");
    ex::write_bundle(dir, small_bundle());
    for (auto f : {"G.mat", "M.mat", "T.mat", "scheme.json"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto back = ex::read_bundle(dir);
    EXPECT_EQ(back.scheme.g, small_bundle().scheme.g);
    EXPECT_EQ(back.scheme.m, small_bundle().scheme.m);
    EXPECT_EQ(back.scheme.t, small_bundle().scheme.t);
    EXPECT_EQ(back.meta, small_bundle().meta);
    EXPECT_EQ(tgt::io::deserialize_matrix(slurp(dir / "T.mat")).kind, tgt::io::MatrixKind::final_);
    fs::remove_all(dir);
}

TEST(Bundle, SameSeedSameBytes) {
    const auto a = scratch("bytes_a");
    const auto b = scratch("bytes_b");
    ex::write_bundle(a, ex::generate_bundle(small_config()));
    ex::write_bundle(b, ex::generate_bundle(small_config()));
    for (auto f : {"G.mat", "M.mat", "T.mat", "scheme.json"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Bundle, TamperedTestMatrixIsRejected) {
    const auto dir = scratch("tamper");
    const auto& b = small_bundle();
    ex::write_bundle(dir, b);
    const auto flipped = tgt::complement(b.scheme.t);
    tgt::io::write_file((dir / "T.mat").string(), tgt::io::serialize(flipped, tgt::io::MatrixKind::final_, {}));
    EXPECT_THROW(ex::read_bundle(dir), tgt::ParseError);
    tgt::io::write_file((dir / "scheme.json").string(), "{not json");
    EXPECT_THROW(ex::read_bundle(dir), tgt::ParseError);
    fs::remove_all(dir);
}

TEST(Flips, UniformAreDistinct) {
    const auto& s = small_bundle().scheme;
    tgt::Rng rng(1);
    for (int t = 0; t < 100; ++t) {
        const auto f = ex::choose_flips(s, tgt::DefectiveSet{0, 1}, 5, ex::Placement::uniform, rng);
        ASSERT_EQ(f.size(), 5u);
        EXPECT_EQ(std::set<std::size_t>(f.begin(), f.end()).size(), 5u);
        for (auto p : f) EXPECT_LT(p, s.tests());
    }
    EXPECT_THROW(ex::choose_flips(s, tgt::DefectiveSet{0, 1}, s.tests() + 1, ex::Placement::uniform, rng),
                 tgt::ParameterError);
}

TEST(Flips, StarveHitsIndicatorsOfQualifyingBlocks) {
    const auto& s = small_bundle().scheme;
    tgt::Rng rng(2);
    const tgt::DefectiveSet D{3, 7, 11};
    const auto x = D.to_vector(s.n());
    const auto f = ex::choose_flips(s, D, 2, ex::Placement::starve, rng);
    ASSERT_EQ(f.size(), 2u);
    for (auto p : f) {
        ASSERT_EQ(p % s.block_size(), 0u);
        EXPECT_EQ(tgt::intersect_count(s.g.row(p / s.block_size()), x.words()), s.params.u);
    }
}

TEST(Flips, SpoofHitsNegativeBlocks) {
    const auto& s = small_bundle().scheme;
    tgt::Rng rng(3);
    const tgt::DefectiveSet D{0, 5, 9};
    const auto x = D.to_vector(s.n());
    for (auto p : ex::choose_flips(s, D, 2, ex::Placement::spoof, rng)) {
        ASSERT_EQ(p % s.block_size(), 0u);
        EXPECT_LT(tgt::intersect_count(s.g.row(p / s.block_size()), x.words()), s.params.u);
    }
}

TEST(Simulate, RecoversEveryTrialForEachPlacement) {
    for (auto where : {ex::Placement::uniform, ex::Placement::starve, ex::Placement::spoof}) {
        auto cfg = small_config();
        cfg.placement = where;
        const auto recs = ex::simulate(small_bundle(), cfg);
        const auto sum = ex::summarize(small_bundle(), cfg, recs);
        EXPECT_EQ(sum.trials, 40u);
        EXPECT_EQ(sum.exact, 40u) << ex::to_string(where);
        EXPECT_EQ(sum.certified, 40u);
        for (const auto& r : recs) {
            EXPECT_EQ(r.flips.size(), 1u);
            EXPECT_GE(r.min_true_count, 2u);
            EXPECT_LE(r.max_false_count, 1u);
            EXPECT_LE(r.rstar_size, small_bundle().scheme.params.u * small_bundle().scheme.h());
        }
    }
}

TEST(Simulate, BelowThresholdSetsAreReportedNotCertified) {
    auto cfg = small_config();
    cfg.allow_below_u = true;
    cfg.trials = 60;
    const auto recs = ex::simulate(small_bundle(), cfg);
    const auto sum = ex::summarize(small_bundle(), cfg, recs);
    EXPECT_GT(sum.below_threshold, 0u);
    for (const auto& r : recs)
        if (r.truth.size() < 2) {
            EXPECT_FALSE(r.certified);
        }
}

TEST(Simulate, Errors) {
    auto cfg = small_config();
    cfg.trials = 0;
    EXPECT_THROW(ex::simulate(small_bundle(), cfg), tgt::ParameterError);
    EXPECT_THROW(ex::generate_bundle(cfg), tgt::ParameterError);
}

TEST(Output, CsvShapeAndDeterminism) {
    const auto cfg = small_config();
    const auto recs = ex::simulate(small_bundle(), cfg);
    const auto csv = ex::to_csv(recs, ex::summarize(small_bundle(), cfg, recs));
    EXPECT_EQ(csv, ex::to_csv(ex::simulate(small_bundle(), cfg), ex::summarize(small_bundle(), cfg, recs)));
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, ex::kCsvHeader);
    std::size_t rows = 0;
    std::string last;
    while (std::getline(in, line)) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 20);
        last = line;
        ++rows;
    }
    EXPECT_EQ(rows, 41u);
    EXPECT_EQ(last.rfind("summary,40,", 0), 0u);
}

TEST(Output, JsonlHasOneObjectPerTrialPlusSummary) {
    const auto cfg = small_config();
    const auto recs = ex::simulate(small_bundle(), cfg);
    std::istringstream in(ex::to_jsonl(recs, ex::summarize(small_bundle(), cfg, recs)));
    std::string line;
    std::size_t n = 0;
    nlohmann::json last;
    while (std::getline(in, line)) {
        last = nlohmann::json::parse(line);
        ++n;
    }
    EXPECT_EQ(n, 41u);
    EXPECT_EQ(last["recovery_rate"], 1.0);
}

TEST(Environment, BudgetVariable) {
    ::unsetenv("TGT_BUDGET");
    EXPECT_EQ(ex::budget_from_env(17), 17u);
    ::setenv("TGT_BUDGET", "1234", 1);
    EXPECT_EQ(ex::budget_from_env(), 1234u);
    ::setenv("TGT_BUDGET", "lots", 1);
    EXPECT_THROW(ex::budget_from_env(), tgt::ParameterError);
    ::unsetenv("TGT_BUDGET");
}

TEST(Placement, Names) {
    for (auto p : {ex::Placement::uniform, ex::Placement::starve, ex::Placement::spoof})
        EXPECT_EQ(ex::placement_from_string(ex::to_string(p)), p);
    EXPECT_THROW(ex::placement_from_string("sideways"), tgt::ParameterError);
}

TEST(Bench, GridRowsAndEmptyGrid) {
    auto cfg = small_config(0);
    cfg.trials = 5;
    const auto rows = ex::bench({{12, 2, 2, 0}, {16, 3, 2, 0}}, cfg);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].t, (2 * rows[1].k + 1) * rows[1].h);
    EXPECT_EQ(rows[0].recovery_rate, 1.0);
    const auto csv = ex::bench_csv(rows);
    EXPECT_EQ(csv.rfind("# measured values only", 0), 0u);
    EXPECT_EQ(csv, ex::bench_csv(ex::bench({{12, 2, 2, 0}, {16, 3, 2, 0}}, cfg)));
    EXPECT_THROW(ex::bench({}, cfg), tgt::ParameterError);
}
