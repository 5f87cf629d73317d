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

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tgt/bits.hpp"
#include "tgt/errors.hpp"
#include "tgt/semantics.hpp"

namespace tgt {

/// Measurement design: indicator matrix G (h x n), disjunct matrix M (k x n),
/// its complement, and the stacked test matrix T. Block i of T is
/// [G_i; M AND G_i; complement(M) AND G_i], 2k+1 rows.
struct Scheme {
    SchemeParams params;
    BitMatrix g;
    BitMatrix m;
    BitMatrix m_bar;
    BitMatrix t;
    BitMatrix m_cols;  ///< transpose of M, one row per item

    std::size_t h() const { return g.rows(); }
    std::size_t k() const { return m.rows(); }
    std::size_t n() const { return m.cols(); }
    std::size_t tests() const { return t.rows(); }
    std::size_t block_size() const { return 2 * k() + 1; }
};

inline Scheme build_scheme(const BitMatrix& g, const BitMatrix& m, const SchemeParams& params) {
    if (g.cols() != m.cols())
        throw DimensionError("build_scheme: G has " + std::to_string(g.cols()) + " columns, M has " +
                             std::to_string(m.cols()));
    if (params.n != m.cols()) throw DimensionError("build_scheme: params.n does not match the matrices");
    BitMatrix m_bar = complement(m);
    const std::size_t k = m.rows();
    const std::size_t block = 2 * k + 1;
    BitMatrix t = assemble_rows(block * g.rows(), m.cols(), [&](std::size_t r, std::span<Word> dst) {
        const std::size_t i = r / block;
        const std::size_t off = r % block;
        auto gi = g.row(i);
        if (off == 0) {
            std::copy(gi.begin(), gi.end(), dst.begin());
            return;
        }
        auto src = off <= k ? m.row(off - 1) : m_bar.row(off - 1 - k);
        for (std::size_t w = 0; w < dst.size(); ++w) dst[w] = src[w] & gi[w];
    });
    return Scheme{params, g, m, std::move(m_bar), std::move(t), m.transpose()};
}

/// Outcomes of one block: the indicator test y_i and the threshold outcomes
/// of M and complement(M) on the items of row G_i.
struct BlockOutcome {
    bool y = false;
    BitVector y_block;
    BitVector y_bar_block;

    friend bool operator==(const BlockOutcome&, const BlockOutcome&) = default;
};

inline std::vector<BlockOutcome> encode(const Scheme& s, const BitVector& x) {
    if (x.size() != s.n()) throw DimensionError("encode: item vector length does not match n");
    std::vector<BlockOutcome> out;
    out.reserve(s.h());
    for (std::size_t i = 0; i < s.h(); ++i) {
        const BitVector gi = s.g.row_vector(i);
        const BitVector xi = restrict_row(x, gi);
        out.push_back({threshold_test(gi, x, s.params.u), apply_threshold(s.m, xi, s.params.u),
                       apply_threshold(s.m_bar, xi, s.params.u)});
    }
    return out;
}

/// Concatenates blocks in test-matrix row order.
inline BitVector flatten(std::span<const BlockOutcome> blocks) {
    if (blocks.empty()) return BitVector();
    const std::size_t k = blocks.front().y_block.size();
    BitVector flat(blocks.size() * (2 * k + 1));
    std::size_t pos = 0;
    for (const auto& b : blocks) {
        if (b.y_block.size() != k || b.y_bar_block.size() != k) throw DimensionError("flatten: ragged blocks");
        flat.set(pos++, b.y);
        for (std::size_t l = 0; l < k; ++l) flat.set(pos++, b.y_block[l]);
        for (std::size_t l = 0; l < k; ++l) flat.set(pos++, b.y_bar_block[l]);
    }
    return flat;
}

inline std::vector<BlockOutcome> split_outcomes(const Scheme& s, const BitVector& flat) {
    if (flat.size() != s.tests())
        throw DimensionError("outcome vector has length " + std::to_string(flat.size()) + ", expected " +
                             std::to_string(s.tests()));
    const std::size_t k = s.k();
    std::vector<BlockOutcome> out(s.h(), BlockOutcome{false, BitVector(k), BitVector(k)});
    std::size_t pos = 0;
    for (auto& b : out) {
        b.y = flat[pos++];
        for (std::size_t l = 0; l < k; ++l) b.y_block.set(l, flat[pos++]);
        for (std::size_t l = 0; l < k; ++l) b.y_bar_block.set(l, flat[pos++]);
    }
    return out;
}

/// OR-outcome estimate from a block: 1 where y=1, 0 where (y, y_bar) = (0, 1),
/// 1 where both are 0. Exact whenever the block holds exactly u defectives.
inline BitVector recover_yprime(const BlockOutcome& block) {
    block.y_block.require_same_size(block.y_bar_block, "recover_yprime");
    BitVector out(block.y_block.size());
    auto dst = out.mutable_words();
    auto y = block.y_block.words();
    auto yb = block.y_bar_block.words();
    for (std::size_t w = 0; w < dst.size(); ++w) dst[w] = y[w] | ~yb[w];
    // Clear padding introduced by the negation.
    const std::size_t k = out.size();
    if (k % kWordBits != 0 && !dst.empty()) dst.back() &= (Word{1} << (k % kWordBits)) - 1;
    return out;
}

/// Cover decoding against a precomputed column view (n rows of k bits):
/// item j is kept iff every test containing j is positive. Returns nullopt
/// when more than `cap` items survive.
inline std::optional<DefectiveSet> cover_decode_columns(const BitMatrix& m_cols, const BitVector& yprime,
                                                        std::size_t cap) {
    if (m_cols.cols() != yprime.size())
        throw DimensionError("cover_decode: matrix has " + std::to_string(m_cols.cols()) + " rows, outcome has " +
                             std::to_string(yprime.size()));
    std::vector<std::size_t> kept;
    auto y = yprime.words();
    for (std::size_t j = 0; j < m_cols.rows(); ++j) {
        auto col = m_cols.row(j);
        bool inside = true;
        for (std::size_t w = 0; w < col.size() && inside; ++w) inside = (col[w] & ~y[w]) == 0;
        if (!inside) continue;
        kept.push_back(j);
        if (kept.size() > cap) return std::nullopt;
    }
    return DefectiveSet(std::move(kept));
}

inline std::optional<DefectiveSet> cover_decode(const BitMatrix& m, const BitVector& yprime, std::size_t cap) {
    if (m.rows() != yprime.size())
        throw DimensionError("cover_decode: matrix has " + std::to_string(m.rows()) + " rows, outcome has " +
                             std::to_string(yprime.size()));
    return cover_decode_columns(m.transpose(), yprime, cap);
}

enum class BlockStatus { negative, accepted, overflow, wrong_size, inconsistent };

inline std::string to_string(BlockStatus s) {
    switch (s) {
        case BlockStatus::negative: return "negative";
        case BlockStatus::accepted: return "accepted";
        case BlockStatus::overflow: return "overflow";
        case BlockStatus::wrong_size: return "wrong_size";
        case BlockStatus::inconsistent: return "inconsistent";
    }
    return "inconsistent";
}

struct BlockTrace {
    std::size_t block = 0;
    bool y = false;
    BlockStatus status = BlockStatus::negative;
    std::vector<std::size_t> candidate;  ///< G_i when the cover decode did not overflow
    bool or_matches_threshold_block = false;  ///< OR of candidate columns equals y_block
};

inline void to_json(nlohmann::json& j, const BlockTrace& t) {
    std::vector<std::size_t> cand = t.candidate;
    for (auto& c : cand) ++c;
    j = nlohmann::json{{"block", t.block + 1},
                       {"y", t.y ? 1 : 0},
                       {"status", to_string(t.status)},
                       {"candidate", cand},
                       {"or_matches_threshold_block", t.or_matches_threshold_block}};
}

/// Why a decode produced the set it did.
enum class DecodeStatus { ok, no_positive_tests, all_rejected };

inline std::string to_string(DecodeStatus s) {
    switch (s) {
        case DecodeStatus::ok: return "ok";
        case DecodeStatus::no_positive_tests: return "no_positive_tests";
        case DecodeStatus::all_rejected: return "all_rejected";
    }
    return "ok";
}

/// Candidate defectives with multiplicity.
struct CandidateMultiset {
    std::map<std::size_t, std::size_t> counts;

    void add(const DefectiveSet& s) {
        for (auto j : s.indices()) ++counts[j];
    }
    void merge(const CandidateMultiset& other) {
        for (auto [j, c] : other.counts) counts[j] += c;
    }
    std::size_t total() const {
        std::size_t t = 0;
        for (auto [j, c] : counts) t += c;
        return t;
    }
    std::size_t count(std::size_t j) const {
        auto it = counts.find(j);
        return it == counts.end() ? 0 : it->second;
    }
    DefectiveSet at_least(std::size_t threshold) const {
        std::vector<std::size_t> out;
        for (auto [j, c] : counts)
            if (c >= threshold) out.push_back(j);
        return DefectiveSet(std::move(out));
    }
};

struct DecodeResult {
    DefectiveSet defectives;
    CandidateMultiset candidates;
    DecodeStatus status = DecodeStatus::ok;
    std::vector<BlockTrace> trace;

    std::size_t accepted_blocks() const {
        std::size_t a = 0;
        for (const auto& t : trace) a += t.status == BlockStatus::accepted;
        return a;
    }
};

/// Decodes one block. A positive block is accepted iff the cover decode of
/// its OR-estimate yields exactly u items and those items, pushed back through
/// M and complement(M) under threshold semantics, reproduce the observed
/// block bit for bit.
inline BlockTrace decode_block(const Scheme& s, const BlockOutcome& b, std::size_t index, std::size_t cap) {
    BlockTrace tr{index, b.y, BlockStatus::negative, {}, false};
    if (!b.y) return tr;
    const std::size_t u = s.params.u;
    const auto found = cover_decode_columns(s.m_cols, recover_yprime(b), cap);
    if (!found) {
        tr.status = BlockStatus::overflow;
        return tr;
    }
    tr.candidate = found->indices();
    const BitVector cand = found->to_vector(s.n());
    const BitVector or_cols = apply_or(s.m, cand);
    tr.or_matches_threshold_block = or_cols == b.y_block;
    if (found->size() != u) {
        tr.status = BlockStatus::wrong_size;
        return tr;
    }
    for (std::size_t l = 0; l < s.k(); ++l) {
        const std::size_t c = intersect_count(s.m.row(l), cand.words());
        if ((c >= u) != b.y_block[l] || (u - c >= u) != b.y_bar_block[l]) {
            tr.status = BlockStatus::inconsistent;
            return tr;
        }
    }
    tr.status = BlockStatus::accepted;
    return tr;
}

/// Runs the per-block decoder over every block and collects accepted sets
/// with multiplicity. `cap` bounds the cover decoder (default d+1).
inline DecodeResult find_defectives_multiset(const Scheme& s, std::span<const BlockOutcome> outcomes,
                                             std::optional<std::size_t> cap = std::nullopt) {
    if (outcomes.size() != s.h())
        throw DimensionError("expected " + std::to_string(s.h()) + " blocks, got " + std::to_string(outcomes.size()));
    for (const auto& b : outcomes)
        if (b.y_block.size() != s.k() || b.y_bar_block.size() != s.k())
            throw DimensionError("block outcome length does not match k");
    const std::size_t limit = cap.value_or(s.params.d + 1);
    DecodeResult res;
    bool any_positive = false;
    res.trace.reserve(outcomes.size());
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        auto tr = decode_block(s, outcomes[i], i, limit);
        any_positive = any_positive || tr.y;
        if (tr.status == BlockStatus::accepted) res.candidates.add(DefectiveSet(tr.candidate));
        res.trace.push_back(std::move(tr));
    }
    res.defectives = res.candidates.at_least(1);
    if (!any_positive)
        res.status = DecodeStatus::no_positive_tests;
    else if (res.candidates.counts.empty())
        res.status = DecodeStatus::all_rejected;
    return res;
}

/// Error-free decoder: union of all accepted blocks.
inline DecodeResult find_defectives(const Scheme& s, std::span<const BlockOutcome> outcomes,
                                    std::optional<std::size_t> cap = std::nullopt) {
    return find_defectives_multiset(s, outcomes, cap);
}

/// Error-tolerant decoder: keeps items appearing in at least e+1 accepted
/// blocks.
inline DecodeResult dec_natgt(const Scheme& s, std::span<const BlockOutcome> outcomes, std::size_t e,
                              std::optional<std::size_t> cap = std::nullopt) {
    auto res = find_defectives_multiset(s, outcomes, cap);
    res.defectives = res.candidates.at_least(e + 1);
    return res;
}

}  // namespace tgt
