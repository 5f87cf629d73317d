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

#include "tgt/semantics.hpp"

#include <algorithm>
#include <iterator>
#include <vector>

#include <gtest/gtest.h>

namespace {

tgt::BitVector random_vector(std::size_t len, double density, tgt::Rng& rng) {
    tgt::BitVector v(len);
    for (std::size_t j = 0; j < len; ++j) v.set(j, rng.bernoulli(density));
    return v;
}

// Naive set-intersection semantics, independent of the word kernels.
bool naive_threshold(const tgt::BitMatrix& m, std::size_t r, const tgt::BitVector& x, std::size_t u) {
    std::vector<std::size_t> pool;
    for (std::size_t c = 0; c < m.cols(); ++c)
        if (m.get(r, c)) pool.push_back(c);
    const auto def = x.support();
    std::vector<std::size_t> both;
    std::set_intersection(pool.begin(), pool.end(), def.begin(), def.end(), std::back_inserter(both));
    return both.size() >= u;
}

}  // namespace

TEST(ThresholdTest, Examples) {
    const tgt::BitVector row{1, 1, 1, 0};
    const tgt::BitVector x{1, 1, 0, 0};
    EXPECT_TRUE(tgt::threshold_test(row, x, 2));
    EXPECT_FALSE(tgt::threshold_test(row, x, 3));
    for (std::size_t u = 1; u <= 4; ++u) EXPECT_FALSE(tgt::threshold_test(row, tgt::BitVector(4), u));
}

TEST(ThresholdTest, Errors) {
    EXPECT_THROW(tgt::threshold_test(tgt::BitVector(3), tgt::BitVector(4), 1), tgt::DimensionError);
    EXPECT_THROW(tgt::threshold_test(tgt::BitVector(3), tgt::BitVector(3), 0), tgt::ParameterError);
}

TEST(OrTest, Examples) {
    EXPECT_TRUE(tgt::or_test(tgt::BitVector{1, 0, 1}, tgt::BitVector{0, 0, 1}));
    EXPECT_FALSE(tgt::or_test(tgt::BitVector{1, 1, 0}, tgt::BitVector{0, 0, 1}));
    EXPECT_THROW(tgt::or_test(tgt::BitVector(2), tgt::BitVector(3)), tgt::DimensionError);
}

TEST(OrTest, EqualsThresholdOne) {
    tgt::Rng rng(2);
    for (int t = 0; t < 500; ++t) {
        const std::size_t len = 1 + rng.uniform_below(100);
        const auto a = random_vector(len, rng.uniform01(), rng);
        const auto b = random_vector(len, rng.uniform01() * 0.3, rng);
        EXPECT_EQ(tgt::or_test(a, b), tgt::threshold_test(a, b, 1));
    }
}

TEST(ApplyThreshold, IdentityHasSingletonRows) {
    EXPECT_EQ(tgt::apply_threshold(tgt::BitMatrix::identity(4), tgt::BitVector{1, 1, 0, 0}, 2).weight(), 0u);
}

TEST(ApplyThreshold, AllOnesRowFires) {
    const auto m = tgt::BitMatrix::from_rows({tgt::BitVector{1, 0, 0, 0, 0}, tgt::BitVector::ones(5)});
    const auto y = tgt::apply_threshold(m, tgt::BitVector{0, 1, 1, 1, 0}, 3);
    EXPECT_FALSE(y[0]);
    EXPECT_TRUE(y[1]);
}

TEST(ApplyThreshold, DimensionError) {
    EXPECT_THROW(tgt::apply_threshold(tgt::BitMatrix(2, 3), tgt::BitVector(4), 1), tgt::DimensionError);
}

TEST(ApplyThreshold, RandomSixByEightAgainstRowLoop) {
    tgt::Rng rng(68);
    const auto m = tgt::BitMatrix::generate(6, 8, [&](std::size_t, std::size_t) { return rng.bernoulli(0.5); });
    const auto x = random_vector(8, 0.5, rng);
    for (std::size_t u = 1; u <= 4; ++u) {
        const auto y = tgt::apply_threshold(m, x, u);
        for (std::size_t r = 0; r < 6; ++r) EXPECT_EQ(y[r], naive_threshold(m, r, x, u));
    }
}

TEST(ApplyThreshold, AgreesWithNaiveOnThousandTriples) {
    tgt::Rng rng(1000);
    for (int t = 0; t < 1000; ++t) {
        const std::size_t rows = 1 + rng.uniform_below(12);
        const std::size_t cols = 1 + rng.uniform_below(150);
        const double density = rng.uniform01();
        const auto m =
            tgt::BitMatrix::generate(rows, cols, [&](std::size_t, std::size_t) { return rng.bernoulli(density); });
        const auto x = random_vector(cols, rng.uniform01() * 0.5, rng);
        const std::size_t u = 1 + rng.uniform_below(6);
        const auto y = tgt::apply_threshold(m, x, u);
        for (std::size_t r = 0; r < rows; ++r) ASSERT_EQ(y[r], naive_threshold(m, r, x, u));
    }
}

TEST(ThresholdSemantics, MonotoneInDefectivesAndThreshold) {
    tgt::Rng rng(31);
    for (int t = 0; t < 300; ++t) {
        const std::size_t len = 2 + rng.uniform_below(80);
        const auto row = random_vector(len, 0.5, rng);
        auto x = random_vector(len, 0.2, rng);
        const std::size_t u = 1 + rng.uniform_below(5);
        const bool before = tgt::threshold_test(row, x, u);
        if (before) {
            for (std::size_t lower = 1; lower <= u; ++lower) EXPECT_TRUE(tgt::threshold_test(row, x, lower));
        }
        x.set(rng.uniform_below(len));
        if (before) {
            EXPECT_TRUE(tgt::threshold_test(row, x, u));
        }
    }
}

TEST(InjectErrors, ZeroFlips) {
    tgt::Rng rng(1);
    const tgt::BitVector y{1, 0, 1, 1};
    const auto out = tgt::inject_errors(y, 0, rng);
    EXPECT_EQ(out.y, y);
    EXPECT_TRUE(out.flipped.empty());
}

TEST(InjectErrors, FlipEverything) {
    tgt::Rng rng(1);
    const tgt::BitVector y{1, 0, 1, 1, 0};
    const auto out = tgt::inject_errors(y, 5, rng);
    EXPECT_EQ(out.y, (tgt::BitVector{0, 1, 0, 0, 1}));
    EXPECT_EQ(out.flipped.size(), 5u);
}

TEST(InjectErrors, ExactHammingDistance) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        tgt::Rng rng(seed);
        const auto y = random_vector(10, 0.5, rng);
        const auto out = tgt::inject_errors(y, 2, rng);
        EXPECT_EQ(y.hamming(out.y), 2u);
        ASSERT_EQ(out.flipped.size(), 2u);
        EXPECT_LT(out.flipped[0], out.flipped[1]);
        for (auto i : out.flipped) EXPECT_NE(y[i], out.y[i]);
    }
}

TEST(InjectErrors, UpToModeStaysWithinBudget) {
    tgt::Rng rng(4);
    const tgt::BitVector y(20);
    std::vector<int> seen(4, 0);
    for (int t = 0; t < 400; ++t) {
        const auto out = tgt::inject_errors(y, 3, rng, tgt::FlipCount::up_to);
        ASSERT_LE(out.flipped.size(), 3u);
        ++seen[out.flipped.size()];
    }
    for (int c : seen) EXPECT_GT(c, 0);
}

TEST(InjectErrors, BudgetLargerThanVector) {
    tgt::Rng rng(1);
    EXPECT_THROW(tgt::inject_errors(tgt::BitVector(3), 4, rng), tgt::ParameterError);
}

TEST(InjectErrors, SeededReproducibility) {
    const tgt::BitVector y(50);
    tgt::Rng a(99), b(99);
    EXPECT_EQ(tgt::inject_errors(y, 7, a).flipped, tgt::inject_errors(y, 7, b).flipped);
}

TEST(SchemeParams, DerivedValuesAndValidation) {
    const tgt::SchemeParams p{32, 7, 2, 1, 0.5};
    EXPECT_EQ(p.d0(), 5u);
    EXPECT_EQ(p.ell(), 1u);
    EXPECT_EQ(p.gap(), 0u);
    EXPECT_NO_THROW(p.validate());
    EXPECT_EQ((tgt::SchemeParams{32, 4, 3, 0, 0}.d0()), 3u);
    EXPECT_THROW((tgt::SchemeParams{32, 4, 5, 0, 0}.validate()), tgt::ParameterError);
    EXPECT_THROW((tgt::SchemeParams{32, 4, 1, 0, 0}.validate()), tgt::ParameterError);
    EXPECT_THROW((tgt::SchemeParams{4, 4, 2, 0, 0}.validate()), tgt::ParameterError);
    EXPECT_THROW((tgt::SchemeParams{32, 4, 2, 0, 1.0}.validate()), tgt::ParameterError);
}
