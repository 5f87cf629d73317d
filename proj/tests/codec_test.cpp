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

#include "tgt/codec.hpp"
#include "tgt/constructions.hpp"

#include <algorithm>
#include <vector>

#include <gtest/gtest.h>

namespace {

using tgt::BitMatrix;
using tgt::BitVector;
using tgt::DefectiveSet;

tgt::Scheme worked_scheme() {
    const auto m = BitMatrix::from_rows({BitVector{1, 1, 0, 0}, BitVector{1, 0, 0, 0}, BitVector{0, 0, 1, 1}});
    const auto g = BitMatrix::from_rows({BitVector::ones(4)});
    return tgt::build_scheme(g, m, {4, 2, 2, 0, 0});
}

// Scheme from the real constructions, shared by the decoding tests.
const tgt::Scheme& real_scheme() {
    static const tgt::Scheme s = [] {
        const tgt::SchemeParams params{24, 3, 2, 1, 0};
        tgt::GoodOptions opt;
        opt.exhaustive_limit = 1'000'000;
        const auto good = tgt::construct_good_auto(params, 21, opt);
        auto p = params;
        p.p = good.p;
        const auto m = tgt::construct_disjunct(p.n, p.d, 22);
        return tgt::build_scheme(good.good.matrix, m.matrix, p);
    }();
    return s;
}

DefectiveSet random_set(std::size_t n, std::size_t lo, std::size_t hi, tgt::Rng& rng) {
    const std::size_t s = lo + rng.uniform_below(hi - lo + 1);
    return DefectiveSet(rng.sample_without_replacement(n, s));
}

}  // namespace

TEST(BuildScheme, Dimensions) {
    tgt::Rng rng(3);
    const auto m = BitMatrix::generate(3, 10, [&](std::size_t, std::size_t) { return rng.bernoulli(0.5); });
    const auto g = BitMatrix::generate(2, 10, [&](std::size_t, std::size_t) { return rng.bernoulli(0.5); });
    const auto s = tgt::build_scheme(g, m, {10, 3, 2, 0, 0});
    EXPECT_EQ(s.tests(), 14u);
    EXPECT_EQ(s.block_size(), 7u);
    EXPECT_EQ(s.m_bar, tgt::complement(m));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t l = 0; l < 3; ++l)
            for (std::size_t c = 0; c < 10; ++c) {
                EXPECT_EQ(s.t.get(7 * i, c), g.get(i, c));
                EXPECT_EQ(s.t.get(7 * i + 1 + l, c), m.get(l, c) && g.get(i, c));
                EXPECT_EQ(s.t.get(7 * i + 4 + l, c), !m.get(l, c) && g.get(i, c));
            }
}

TEST(BuildScheme, AllOnesIndicatorRowCopiesMatrices) {
    const auto s = worked_scheme();
    for (std::size_t l = 0; l < 3; ++l) {
        EXPECT_EQ(s.t.row_vector(1 + l), s.m.row_vector(l));
        EXPECT_EQ(s.t.row_vector(4 + l), s.m_bar.row_vector(l));
    }
}

TEST(BuildScheme, Errors) {
    EXPECT_THROW(tgt::build_scheme(BitMatrix(2, 5), BitMatrix(3, 6), {6, 3, 2, 0, 0}), tgt::DimensionError);
    EXPECT_THROW(tgt::build_scheme(BitMatrix(2, 6), BitMatrix(3, 6), {7, 3, 2, 0, 0}), tgt::DimensionError);
}

TEST(Encode, WorkedExample) {
    const auto s = worked_scheme();
    const BitVector x{1, 1, 0, 0};
    const auto out = tgt::encode(s, x);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_TRUE(out[0].y);
    EXPECT_EQ(out[0].y_block, (BitVector{1, 0, 0}));
    EXPECT_EQ(out[0].y_bar_block, (BitVector{0, 0, 1}));
    EXPECT_EQ(tgt::recover_yprime(out[0]), (BitVector{1, 1, 0}));
    EXPECT_EQ(tgt::recover_yprime(out[0]), tgt::apply_or(s.m, x));
    EXPECT_EQ(tgt::flatten(out), tgt::apply_threshold(s.t, x, 2));
}

TEST(Encode, FlatOutcomeEqualsTestMatrix) {
    const auto& s = real_scheme();
    tgt::Rng rng(8);
    for (int t = 0; t < 200; ++t) {
        const auto D = random_set(s.n(), 0, 6, rng);
        const BitVector x = D.to_vector(s.n());
        const auto blocks = tgt::encode(s, x);
        const auto flat = tgt::flatten(blocks);
        ASSERT_EQ(flat, tgt::apply_threshold(s.t, x, s.params.u));
        ASSERT_EQ(tgt::split_outcomes(s, flat), blocks);
    }
}

TEST(Encode, Errors) {
    EXPECT_THROW(tgt::encode(worked_scheme(), BitVector(5)), tgt::DimensionError);
    EXPECT_THROW(tgt::split_outcomes(worked_scheme(), BitVector(8)), tgt::DimensionError);
}

TEST(RecoverYprime, ExactWhenBlockHoldsUDefectives) {
    const auto& s = real_scheme();
    tgt::Rng rng(12);
    for (int t = 0; t < 300; ++t) {
        const auto D = DefectiveSet(rng.sample_without_replacement(s.n(), s.params.u));
        const BitVector x = D.to_vector(s.n());
        EXPECT_EQ(tgt::recover_yprime({true, tgt::apply_threshold(s.m, x, s.params.u),
                                       tgt::apply_threshold(s.m_bar, x, s.params.u)}),
                  tgt::apply_or(s.m, x));
    }
}

TEST(RecoverYprime, PaddingStaysClear) {
    const auto yp = tgt::recover_yprime({true, BitVector(70), BitVector(70)});
    EXPECT_EQ(yp.weight(), 70u);
}

TEST(CoverDecode, Examples) {
    const auto m = BitMatrix::from_rows({BitVector{1, 1, 0, 0}, BitVector{1, 0, 0, 0}, BitVector{0, 0, 1, 1}});
    EXPECT_EQ(tgt::cover_decode(m, BitVector{1, 1, 0}, 4), (DefectiveSet{0, 1}));
    EXPECT_EQ(tgt::cover_decode(m, BitVector{0, 0, 0}, 4), DefectiveSet{});
    EXPECT_EQ(tgt::cover_decode(m, BitVector{1, 1, 1}, 4), (DefectiveSet{0, 1, 2, 3}));
    EXPECT_FALSE(tgt::cover_decode(m, BitVector{1, 1, 1}, 3).has_value());
    EXPECT_THROW(tgt::cover_decode(m, BitVector(4), 4), tgt::DimensionError);
}

TEST(CoverDecode, RecoversSmallSetsThroughDisjunctMatrix) {
    const auto& s = real_scheme();
    tgt::Rng rng(13);
    for (int t = 0; t < 300; ++t) {
        const auto D = random_set(s.n(), 0, s.params.d + 1, rng);
        EXPECT_EQ(tgt::cover_decode(s.m, tgt::apply_or(s.m, D.to_vector(s.n())), s.params.d + 1), D);
    }
}

TEST(FindDefectives, WorkedExampleAcceptedDespiteOrMismatch) {
    const auto s = worked_scheme();
    const auto out = tgt::encode(s, BitVector{1, 1, 0, 0});
    const auto res = tgt::find_defectives(s, out);
    EXPECT_EQ(res.defectives, (DefectiveSet{0, 1}));
    EXPECT_EQ(res.status, tgt::DecodeStatus::ok);
    ASSERT_EQ(res.trace.size(), 1u);
    EXPECT_EQ(res.trace[0].status, tgt::BlockStatus::accepted);
    // The raw OR of the decoded columns is (1,1,0); only rows with >= u hits fire.
    EXPECT_FALSE(res.trace[0].or_matches_threshold_block);
}

TEST(FindDefectives, StatusValues) {
    const auto s = worked_scheme();
    const auto none = tgt::find_defectives(s, tgt::encode(s, BitVector{1, 0, 0, 0}));
    EXPECT_EQ(none.status, tgt::DecodeStatus::no_positive_tests);
    EXPECT_TRUE(none.defectives.empty());
    const auto three = tgt::find_defectives(s, tgt::encode(s, BitVector{1, 1, 1, 0}));
    EXPECT_EQ(three.status, tgt::DecodeStatus::all_rejected);
    EXPECT_TRUE(three.defectives.empty());
    EXPECT_THROW(tgt::find_defectives(s, std::vector<tgt::BlockOutcome>{}), tgt::DimensionError);
}

TEST(FindDefectives, BlockStatusFollowsRestrictedWeight) {
    const auto& s = real_scheme();
    const std::size_t u = s.params.u;
    tgt::Rng rng(14);
    std::size_t above = 0;
    for (int t = 0; t < 300; ++t) {
        const auto D = random_set(s.n(), u, s.params.d, rng);
        const BitVector x = D.to_vector(s.n());
        const auto res = tgt::find_defectives(s, tgt::encode(s, x));
        for (std::size_t i = 0; i < s.h(); ++i) {
            const auto xi = tgt::restrict_row(x, s.g.row_vector(i));
            const auto& tr = res.trace[i];
            if (xi.weight() < u) {
                EXPECT_EQ(tr.status, tgt::BlockStatus::negative);
            } else if (xi.weight() == u) {
                EXPECT_EQ(tr.status, tgt::BlockStatus::accepted);
                EXPECT_EQ(tr.candidate, xi.support());
            } else {
                ++above;
                EXPECT_NE(tr.status, tgt::BlockStatus::accepted);
            }
        }
    }
    EXPECT_GT(above, 0u);
}

TEST(FindDefectives, ExactRecoveryWithoutErrors) {
    const auto& s = real_scheme();
    tgt::Rng rng(15);
    for (int t = 0; t < 500; ++t) {
        const auto D = random_set(s.n(), s.params.u, s.params.d, rng);
        const auto blocks = tgt::encode(s, D.to_vector(s.n()));
        const auto res = tgt::find_defectives(s, blocks);
        ASSERT_EQ(res.defectives, D);
        EXPECT_LE(res.candidates.total(), s.params.u * s.h());
        for (auto j : D.indices()) EXPECT_GT(res.candidates.count(j), 2 * s.params.e);
        EXPECT_EQ(tgt::dec_natgt(s, blocks, s.params.e).defectives, D);
    }
}

TEST(DecNatgt, UniformErrors) {
    const auto& s = real_scheme();
    const std::size_t e = s.params.e;
    tgt::Rng rng(16);
    for (int t = 0; t < 500; ++t) {
        const auto D = random_set(s.n(), s.params.u, s.params.d, rng);
        const auto flat = tgt::flatten(tgt::encode(s, D.to_vector(s.n())));
        const auto noisy = tgt::inject_errors(flat, e, rng);
        ASSERT_EQ(tgt::dec_natgt(s, tgt::split_outcomes(s, noisy.y), e).defectives, D);
    }
}

TEST(DecNatgt, StarvingTheWeakestDefective) {
    const auto& s = real_scheme();
    const std::size_t e = s.params.e;
    tgt::Rng rng(17);
    for (int t = 0; t < 300; ++t) {
        const auto D = random_set(s.n(), s.params.u, s.params.d, rng);
        auto blocks = tgt::encode(s, D.to_vector(s.n()));
        const auto clean = tgt::find_defectives(s, blocks);
        std::size_t weakest = D.indices().front();
        for (auto j : D.indices())
            if (clean.candidates.count(j) < clean.candidates.count(weakest)) weakest = j;
        std::size_t flips = 0;
        for (const auto& tr : clean.trace) {
            if (flips == e) break;
            if (tr.status == tgt::BlockStatus::accepted &&
                std::find(tr.candidate.begin(), tr.candidate.end(), weakest) != tr.candidate.end()) {
                blocks[tr.block].y = false;
                ++flips;
            }
        }
        const auto res = tgt::dec_natgt(s, blocks, e);
        ASSERT_EQ(res.defectives, D);
        EXPECT_GE(res.candidates.count(weakest), e + 1);
    }
}

TEST(DecNatgt, SpoofedBlocksStayBelowThreshold) {
    // Corrupting up to e bits of arbitrary blocks never lets an outsider reach e+1 votes.
    const auto& s = real_scheme();
    const std::size_t e = s.params.e;
    tgt::Rng rng(18);
    for (int t = 0; t < 300; ++t) {
        const auto D = random_set(s.n(), s.params.u, s.params.d, rng);
        auto blocks = tgt::encode(s, D.to_vector(s.n()));
        for (std::size_t f = 0; f < e; ++f) {
            auto& b = blocks[rng.uniform_below(s.h())];
            const auto pos = rng.uniform_below(2 * s.k() + 1);
            if (pos == 0)
                b.y = !b.y;
            else if (pos <= s.k())
                b.y_block.flip(pos - 1);
            else
                b.y_bar_block.flip(pos - 1 - s.k());
        }
        const auto res = tgt::dec_natgt(s, blocks, e);
        ASSERT_EQ(res.defectives, D);
        for (auto [j, c] : res.candidates.counts) {
            if (!D.contains(j)) {
                EXPECT_LE(c, e);
            }
        }
    }
}

TEST(DecNatgt, AcceptedBlocksReencodeExactly) {
    const auto& s = real_scheme();
    tgt::Rng rng(19);
    for (int t = 0; t < 300; ++t) {
        BitVector flat(s.tests());
        for (std::size_t i = 0; i < flat.size(); ++i) flat.set(i, rng.bernoulli(0.4));
        const auto blocks = tgt::split_outcomes(s, flat);
        const auto res = tgt::dec_natgt(s, blocks, 0);
        for (const auto& tr : res.trace) {
            if (tr.status != tgt::BlockStatus::accepted) continue;
            const auto cand = DefectiveSet(tr.candidate).to_vector(s.n());
            EXPECT_EQ(tr.candidate.size(), s.params.u);
            EXPECT_EQ(tgt::apply_threshold(s.m, cand, s.params.u), blocks[tr.block].y_block);
            EXPECT_EQ(tgt::apply_threshold(s.m_bar, cand, s.params.u), blocks[tr.block].y_bar_block);
        }
    }
}

TEST(CandidateMultiset, Counting) {
    tgt::CandidateMultiset a;
    a.add(DefectiveSet{1, 2});
    a.add(DefectiveSet{2, 5});
    tgt::CandidateMultiset b;
    b.add(DefectiveSet{5});
    a.merge(b);
    EXPECT_EQ(a.total(), 5u);
    EXPECT_EQ(a.count(2), 2u);
    EXPECT_EQ(a.count(9), 0u);
    EXPECT_EQ(a.at_least(2), (DefectiveSet{2, 5}));
}
