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

#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "tgt/bits.hpp"
#include "tgt/errors.hpp"
#include "tgt/random.hpp"

namespace tgt {

/// Scheme parameters. Only the no-gap case is supported: the negative
/// threshold is u-1, so a pool tests positive iff it holds at least u
/// defectives.
struct SchemeParams {
    std::size_t n = 0;  ///< items
    std::size_t d = 0;  ///< maximum number of defectives
    std::size_t u = 0;  ///< threshold
    std::size_t e = 0;  ///< tolerated erroneous outcomes
    double p = 0.0;     ///< construction parameter in [0, 1); scales the size of G

    std::size_t d0() const { return d > u ? std::max(u, d - u) : u; }
    std::size_t ell() const { return u - 1; }
    std::size_t gap() const { return u - ell() - 1; }

    /// Throws ParameterError unless 2 <= u <= d < n and 0 <= p < 1.
    void validate() const {
        if (u < 2) throw ParameterError("threshold u must be at least 2");
        if (u > d) throw ParameterError("threshold u must not exceed d");
        if (d >= n) throw ParameterError("d must be smaller than n");
        if (!(p >= 0.0 && p < 1.0)) throw ParameterError("p must lie in [0, 1)");
    }

    friend bool operator==(const SchemeParams&, const SchemeParams&) = default;
};

inline void to_json(nlohmann::json& j, const SchemeParams& s) {
    j = nlohmann::json{{"n", s.n}, {"d", s.d}, {"u", s.u}, {"e", s.e}, {"p", s.p}, {"d0", s.d0()}};
}

inline void from_json(const nlohmann::json& j, SchemeParams& s) {
    s.n = j.at("n").get<std::size_t>();
    s.d = j.at("d").get<std::size_t>();
    s.u = j.at("u").get<std::size_t>();
    s.e = j.at("e").get<std::size_t>();
    s.p = j.at("p").get<double>();
}

namespace detail {

inline void require_lengths(std::span<const Word> a, std::span<const Word> b, const char* what) {
    if (a.size() != b.size()) throw DimensionError(std::string(what) + ": length mismatch");
}

}  // namespace detail

/// Threshold test: positive iff the pool holds at least u defectives.
inline bool threshold_test(const BitVector& row, const BitVector& x, std::size_t u) {
    row.require_same_size(x, "threshold_test");
    if (u == 0) throw ParameterError("threshold must be at least 1");
    return intersect_count(row.words(), x.words()) >= u;
}

/// Classical (OR) test: positive iff the pool holds any defective.
inline bool or_test(const BitVector& row, const BitVector& x) {
    row.require_same_size(x, "or_test");
    return intersects(row.words(), x.words());
}

/// Outcome vector of every row of m against x.
inline BitVector apply_threshold(const BitMatrix& m, const BitVector& x, std::size_t u) {
    if (m.cols() != x.size())
        throw DimensionError("apply_threshold: matrix has " + std::to_string(m.cols()) + " columns, vector has " +
                             std::to_string(x.size()) + " entries");
    if (u == 0) throw ParameterError("threshold must be at least 1");
    BitVector y(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r)
        if (intersect_count(m.row(r), x.words()) >= u) y.set(r);
    return y;
}

/// OR-semantics counterpart of apply_threshold.
inline BitVector apply_or(const BitMatrix& m, const BitVector& x) { return apply_threshold(m, x, 1); }

struct InjectedErrors {
    BitVector y;
    std::vector<std::size_t> flipped;  ///< sorted 0-based positions
};

enum class FlipCount { exact, up_to };

/// Flips e distinct positions of y chosen uniformly without replacement
/// (or e' ~ U{0..e} positions in up_to mode).
inline InjectedErrors inject_errors(const BitVector& y, std::size_t e, Rng& rng,
                                    FlipCount mode = FlipCount::exact) {
    if (e > y.size())
        throw ParameterError("cannot flip " + std::to_string(e) + " bits of a length-" + std::to_string(y.size()) +
                             " vector");
    const std::size_t count = mode == FlipCount::exact ? e : static_cast<std::size_t>(rng.uniform_below(e + 1));
    InjectedErrors out{y, rng.sample_without_replacement(y.size(), count)};
    for (auto i : out.flipped) out.y.flip(i);
    return out;
}

/// Flips exactly the given positions.
inline InjectedErrors flip_positions(const BitVector& y, std::vector<std::size_t> positions) {
    std::sort(positions.begin(), positions.end());
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
    InjectedErrors out{y, std::move(positions)};
    for (auto i : out.flipped) {
        if (i >= y.size()) throw DimensionError("flip position out of range");
        out.y.flip(i);
    }
    return out;
}

}  // namespace tgt
