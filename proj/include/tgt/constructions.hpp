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
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tgt/bits.hpp"
#include "tgt/errors.hpp"
#include "tgt/random.hpp"
#include "tgt/semantics.hpp"

namespace tgt {

/// Default cap on exhaustive-verifier work units (search nodes or (S, Z) pairs).
inline constexpr std::uint64_t kDefaultBudget = 200'000'000;

namespace detail {

inline double binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

inline std::vector<std::size_t> to_one_based(std::vector<std::size_t> v) {
    for (auto& j : v) ++j;
    return v;
}

/// Advances a sorted k-combination of [0, n) in lexicographic order.
inline bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
    const std::size_t k = c.size();
    for (std::size_t i = k; i-- > 0;) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

inline std::vector<std::size_t> first_combination(std::size_t k) {
    std::vector<std::size_t> c(k);
    for (std::size_t i = 0; i < k; ++i) c[i] = i;
    return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// d-disjunct matrices
// ---------------------------------------------------------------------------

enum class VerifyMode { exhaustive, sampled };

inline std::string to_string(VerifyMode m) { return m == VerifyMode::exhaustive ? "exhaustive" : "sampled"; }

/// A column j together with `order` other columns whose union covers it.
struct DisjunctWitness {
    std::size_t column = 0;
    std::vector<std::size_t> cover;
};

struct DisjunctCertificate {
    std::size_t order = 0;
    bool verified = false;
    VerifyMode method = VerifyMode::exhaustive;
    std::uint64_t trials = 0;  ///< search nodes (exhaustive) or sampled draws
    std::optional<DisjunctWitness> witness;
};

inline void to_json(nlohmann::json& j, const DisjunctCertificate& c) {
    j = nlohmann::json{{"order", c.order},
                       {"verified", c.verified},
                       {"method", to_string(c.method)},
                       {"trials", c.trials}};
    if (c.witness)
        j["witness"] = {{"column", c.witness->column + 1}, {"cover", detail::to_one_based(c.witness->cover)}};
    else
        j["witness"] = nullptr;
}

namespace detail {

/// Exact search for `order` columns (other than `target`) whose supports cover
/// the support of column `target`. Branches on the first uncovered row, so
/// every cover is found if one exists.
class CoverSearch {
  public:
    CoverSearch(const BitMatrix& cols, std::uint64_t budget, std::uint64_t& nodes)
        : cols_(cols), budget_(budget), nodes_(nodes), words_(cols.row_words()) {}

    std::optional<std::vector<std::size_t>> find(std::size_t target, std::size_t order) {
        target_ = target;
        chosen_.clear();
        std::vector<Word> remaining(cols_.row(target).begin(), cols_.row(target).end());
        if (search(remaining, order)) return chosen_;
        return std::nullopt;
    }

  private:
    bool search(const std::vector<Word>& remaining, std::size_t depth_left) {
        if (++nodes_ > budget_) throw BudgetError("exhaustive disjunct verification exceeded budget");
        std::size_t first = SIZE_MAX;
        for (std::size_t w = 0; w < words_; ++w)
            if (remaining[w]) {
                first = w * kWordBits + static_cast<std::size_t>(std::countr_zero(remaining[w]));
                break;
            }
        if (first == SIZE_MAX) return true;
        if (depth_left == 0) return false;
        std::vector<Word> next(words_);
        for (std::size_t c = 0; c < cols_.rows(); ++c) {
            if (c == target_ || !cols_.get(c, first)) continue;
            auto col = cols_.row(c);
            for (std::size_t w = 0; w < words_; ++w) next[w] = remaining[w] & ~col[w];
            chosen_.push_back(c);
            if (search(next, depth_left - 1)) return true;
            chosen_.pop_back();
        }
        return false;
    }

    const BitMatrix& cols_;
    std::uint64_t budget_;
    std::uint64_t& nodes_;
    std::size_t words_;
    std::size_t target_ = 0;
    std::vector<std::size_t> chosen_;
};

inline void pad_cover(std::vector<std::size_t>& cover, std::size_t column, std::size_t order, std::size_t n) {
    for (std::size_t c = 0; c < n && cover.size() < order; ++c)
        if (c != column && std::find(cover.begin(), cover.end(), c) == cover.end()) cover.push_back(c);
    std::sort(cover.begin(), cover.end());
}

}  // namespace detail

/// Checks that for every column j and every set S of `order` other columns some
/// row has a 1 in column j and 0 in all of S.
///
/// Exhaustive mode runs an exact cover search per column and throws BudgetError
/// once more than `budget` search nodes are needed. Sampled mode draws `trials`
/// uniform (j, S) pairs.
inline DisjunctCertificate verify_disjunct(const BitMatrix& m, std::size_t order, VerifyMode mode,
                                           std::uint64_t trials = 0, std::uint64_t budget = kDefaultBudget,
                                           std::uint64_t seed = 0) {
    const std::size_t n = m.cols();
    if (order >= n) throw ParameterError("disjunct order must be smaller than the number of columns");
    const BitMatrix cols = m.transpose();
    DisjunctCertificate cert{order, true, mode, 0, std::nullopt};

    if (mode == VerifyMode::exhaustive) {
        std::uint64_t nodes = 0;
        detail::CoverSearch search(cols, budget, nodes);
        for (std::size_t j = 0; j < n; ++j) {
            if (auto cover = search.find(j, order)) {
                detail::pad_cover(*cover, j, order, n);
                cert.verified = false;
                cert.witness = DisjunctWitness{j, std::move(*cover)};
                break;
            }
        }
        cert.trials = nodes;
        return cert;
    }

    Rng rng(seed);
    std::vector<Word> uncovered(cols.row_words());
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto j = static_cast<std::size_t>(rng.uniform_below(n));
        auto others = rng.sample_without_replacement(n - 1, order);
        for (auto& c : others)
            if (c >= j) ++c;
        auto col = cols.row(j);
        std::copy(col.begin(), col.end(), uncovered.begin());
        for (auto c : others) {
            auto oc = cols.row(c);
            for (std::size_t w = 0; w < uncovered.size(); ++w) uncovered[w] &= ~oc[w];
        }
        cert.trials = t + 1;
        if (std::all_of(uncovered.begin(), uncovered.end(), [](Word w) { return w == 0; })) {
            cert.verified = false;
            cert.witness = DisjunctWitness{j, std::move(others)};
            break;
        }
    }
    return cert;
}

/// Row count used for a disjunct matrix of order d+1 on n items.
inline std::size_t disjunct_rows(std::size_t n, std::size_t d, double c) {
    const double dd = static_cast<double>(d + 2);
    return static_cast<std::size_t>(std::ceil(c * dd * dd * std::log(static_cast<double>(n))));
}

struct DisjunctOptions {
    double c = 3.0;
    std::size_t max_attempts = 50;
    std::uint64_t budget = kDefaultBudget;
    std::uint64_t sampled_trials = 200'000;
};

struct DisjunctConstruction {
    BitMatrix matrix;
    DisjunctCertificate certificate;
    std::size_t attempts = 0;
};

/// Random (d+1)-disjunct matrix: i.i.d. Bernoulli(1/(d+2)) entries on
/// ceil(c (d+2)^2 ln n) rows, verified exhaustively when the search fits the
/// budget and by sampling otherwise. Retries with fresh randomness.
inline DisjunctConstruction construct_disjunct(std::size_t n, std::size_t d, std::uint64_t seed,
                                               const DisjunctOptions& opt = {}) {
    if (d + 1 >= n) throw ParameterError("construct_disjunct needs d + 1 < n");
    if (opt.max_attempts == 0) throw ParameterError("max_attempts must be positive");
    const std::size_t k = std::max<std::size_t>(1, disjunct_rows(n, d, opt.c));
    const double density = 1.0 / static_cast<double>(d + 2);
    for (std::size_t attempt = 0; attempt < opt.max_attempts; ++attempt) {
        const std::uint64_t attempt_seed = mix_seed(seed ^ (0x6d6174726978ULL + attempt));
        Rng rng(attempt_seed);
        auto m = BitMatrix::generate(k, n, [&](std::size_t, std::size_t) { return rng.bernoulli(density); });
        DisjunctCertificate cert;
        try {
            cert = verify_disjunct(m, d + 1, VerifyMode::exhaustive, 0, opt.budget);
        } catch (const BudgetError&) {
            cert = verify_disjunct(m, d + 1, VerifyMode::sampled, opt.sampled_trials, opt.budget, attempt_seed);
        }
        if (cert.verified) return DisjunctConstruction{std::move(m), std::move(cert), attempt + 1};
    }
    throw ConstructionError("no verified " + std::to_string(d + 1) + "-disjunct matrix after " +
                            std::to_string(opt.max_attempts) + " attempts");
}

// ---------------------------------------------------------------------------
// Threshold disjunct matrices
// ---------------------------------------------------------------------------

struct ThresholdWitness {
    std::vector<std::size_t> critical;
    std::vector<std::size_t> zero;
    std::size_t distinguished = 0;
    std::size_t count = 0;
};

struct ThresholdDisjunctReport {
    std::size_t d = 0;
    std::size_t u = 0;
    std::size_t e = 0;
    bool passed = false;
    std::size_t min_count = 0;  ///< fewest rows satisfying any (S, Z, j)
    std::uint64_t pairs_checked = 0;
    std::optional<ThresholdWitness> witness;  ///< the minimizing triple when !passed
};

inline void to_json(nlohmann::json& j, const ThresholdDisjunctReport& r) {
    j = nlohmann::json{{"d", r.d},
                       {"u", r.u},
                       {"e", r.e},
                       {"passed", r.passed},
                       {"min_count", r.min_count},
                       {"pairs_checked", r.pairs_checked}};
    if (r.witness)
        j["witness"] = {{"critical", detail::to_one_based(r.witness->critical)},
                        {"zero", detail::to_one_based(r.witness->zero)},
                        {"distinguished", r.witness->distinguished + 1},
                        {"count", r.witness->count}};
    else
        j["witness"] = nullptr;
}

/// Work units for verify_threshold_disjunct: number of (S, Z) pairs visited.
inline double threshold_disjunct_work(std::size_t n, std::size_t d, std::size_t u) {
    double total = 0;
    for (std::size_t s = u; s <= std::min(d, n); ++s)
        total += detail::binomial(n, s) * detail::binomial(n - s, std::min(s, n - s));
    return total;
}

/// Exhaustive check that every critical set S (u <= |S| <= d), zero set Z
/// (|Z| <= |S|, disjoint from S) and column j in S admit more than e rows with
/// weight exactly u on S, weight zero on Z and a 1 at j.
///
/// Enlarging Z only removes satisfying rows, so only zero sets of the maximal
/// size min(|S|, n - |S|) are enumerated.
inline ThresholdDisjunctReport verify_threshold_disjunct(const BitMatrix& g, std::size_t d, std::size_t u,
                                                         std::size_t e, std::uint64_t budget = kDefaultBudget) {
    const std::size_t n = g.cols();
    if (u == 0 || u > d || d > n) throw ParameterError("verify_threshold_disjunct needs 1 <= u <= d <= n");
    const double work = threshold_disjunct_work(n, d, u);
    if (work > static_cast<double>(budget))
        throw BudgetError("threshold-disjunct enumeration needs " + std::to_string(static_cast<std::uint64_t>(work)) +
                          " (S, Z) pairs, budget is " + std::to_string(budget));

    const BitMatrix cols = g.transpose();
    const std::size_t rw = cols.row_words();
    ThresholdDisjunctReport rep{d, u, e, false, SIZE_MAX, 0, std::nullopt};
    std::vector<Word> rows_s(rw), zero_ok(rw), tmp(rw);

    for (std::size_t s = u; s <= d; ++s) {
        auto S = detail::first_combination(s);
        do {
            // Rows meeting S in exactly u columns.
            const BitVector sv = BitVector::from_indices(n, S);
            std::fill(rows_s.begin(), rows_s.end(), 0);
            for (std::size_t r = 0; r < g.rows(); ++r)
                if (intersect_count(g.row(r), sv.words()) == u) rows_s[r / kWordBits] |= Word{1} << (r % kWordBits);

            std::vector<std::size_t> rest;
            for (std::size_t c = 0; c < n; ++c)
                if (!sv.get(c)) rest.push_back(c);
            const std::size_t zsize = std::min(s, rest.size());
            auto zi = detail::first_combination(zsize);
            do {
                ++rep.pairs_checked;
                zero_ok = rows_s;
                for (auto idx : zi) {
                    auto col = cols.row(rest[idx]);
                    for (std::size_t w = 0; w < rw; ++w) zero_ok[w] &= ~col[w];
                }
                for (auto j : S) {
                    const std::size_t count = intersect_count(zero_ok, cols.row(j));
                    if (count < rep.min_count) {
                        rep.min_count = count;
                        std::vector<std::size_t> Z;
                        for (auto idx : zi) Z.push_back(rest[idx]);
                        rep.witness = ThresholdWitness{S, std::move(Z), j, count};
                    }
                }
            } while (detail::next_combination(zi, rest.size()));
        } while (detail::next_combination(S, n));
    }
    rep.passed = rep.min_count > e;
    if (rep.passed) rep.witness.reset();
    return rep;
}

// ---------------------------------------------------------------------------
// Good measurement matrices
// ---------------------------------------------------------------------------

struct GoodnessReport {
    DefectiveSet defective_set;
    std::size_t u = 0;
    std::size_t e = 0;
    std::vector<std::size_t> qualifying_rows;          ///< rows meeting D in exactly u items
    std::map<std::size_t, std::size_t> per_item_counts;  ///< item -> number of qualifying rows holding it
    bool covers_all = false;
    bool is_good = false;

    std::size_t min_count() const {
        std::size_t m = SIZE_MAX;
        for (auto j : defective_set.indices()) {
            auto it = per_item_counts.find(j);
            m = std::min(m, it == per_item_counts.end() ? std::size_t{0} : it->second);
        }
        return defective_set.empty() ? 0 : m;
    }
};

inline void to_json(nlohmann::json& j, const GoodnessReport& r) {
    nlohmann::json counts = nlohmann::json::object();
    for (auto [item, c] : r.per_item_counts) counts[std::to_string(item + 1)] = c;
    j = nlohmann::json{{"defective_set", r.defective_set.one_based()},
                       {"u", r.u},
                       {"e", r.e},
                       {"qualifying_rows", detail::to_one_based(r.qualifying_rows)},
                       {"per_item_counts", counts},
                       {"covers_all", r.covers_all},
                       {"is_good", r.is_good}};
}

/// Goodness of g for one fixed defective set: collects the rows meeting D in
/// exactly u items and requires them to cover D with every defective appearing
/// more than e times.
inline GoodnessReport is_good_for(const BitMatrix& g, const DefectiveSet& dset, std::size_t u, std::size_t e) {
    if (dset.size() > g.cols()) throw DimensionError("defective set larger than the number of columns");
    if (!dset.empty() && dset.indices().back() >= g.cols()) throw DimensionError("defective index out of range");
    GoodnessReport rep;
    rep.defective_set = dset;
    rep.u = u;
    rep.e = e;
    const BitVector x = dset.to_vector(g.cols());
    for (std::size_t r = 0; r < g.rows(); ++r) {
        if (intersect_count(g.row(r), x.words()) != u) continue;
        rep.qualifying_rows.push_back(r);
        for (auto j : dset.indices())
            if (g.get(r, j)) ++rep.per_item_counts[j];
    }
    rep.covers_all = rep.per_item_counts.size() == dset.size();
    rep.is_good = !rep.qualifying_rows.empty() && rep.covers_all && rep.min_count() > e;
    return rep;
}

/// Row count of G: ceil(c_g d0^2 ln(n/d0) / (1-p)^2).
inline std::size_t good_rows(const SchemeParams& params, double c_g) {
    const double d0 = static_cast<double>(params.d0());
    const double h = c_g * d0 * d0 * std::log(static_cast<double>(params.n) / d0) / ((1.0 - params.p) * (1.0 - params.p));
    return static_cast<std::size_t>(std::ceil(h));
}

struct GoodOptions {
    double c_g = 2.0;
    std::size_t max_attempts = 50;
    std::size_t validation_sets = 200;  ///< per cardinality; all sets are checked when fewer exist
    /// Validate against every D with u <= |D| <= d when there are at most this
    /// many such sets; 0 disables exhaustive validation.
    std::uint64_t exhaustive_limit = 0;
};

struct GoodConstruction {
    BitMatrix matrix;
    std::size_t attempts = 0;
    std::uint64_t validated_sets = 0;
    bool exhaustive = false;    ///< every D with u <= |D| <= d was validated
    std::size_t min_count = 0;  ///< smallest per-defective count seen during validation
};

inline void to_json(nlohmann::json& j, const GoodConstruction& g) {
    j = nlohmann::json{{"attempts", g.attempts},
                       {"validated_sets", g.validated_sets},
                       {"method", g.exhaustive ? "exhaustive" : "sampled"},
                       {"min_count", g.min_count}};
}

namespace detail {

/// Sizes of the equal layers, one per cardinality s in [u, d].
inline std::vector<std::size_t> layer_sizes(std::size_t h, std::size_t layers) {
    std::vector<std::size_t> sizes(layers, h / layers);
    for (std::size_t i = 0; i < h % layers; ++i) ++sizes[i];
    return sizes;
}

/// Defective sets used to validate a candidate G at cardinality s.
inline std::vector<DefectiveSet> validation_family(std::size_t n, std::size_t s, std::size_t count, Rng& rng) {
    std::vector<DefectiveSet> out;
    if (binomial(n, s) <= static_cast<double>(count)) {
        auto c = first_combination(s);
        do out.emplace_back(c);
        while (next_combination(c, n));
    } else {
        for (std::size_t i = 0; i < count; ++i) out.emplace_back(rng.sample_without_replacement(n, s));
    }
    return out;
}

/// Number of sets with u <= |D| <= d.
inline double sets_between(std::size_t n, std::size_t lo, std::size_t hi) {
    double total = 0;
    for (std::size_t s = lo; s <= hi; ++s) total += binomial(n, s);
    return total;
}

/// Smallest per-defective count over the rows of g meeting D in exactly u
/// items (0 if some defective is never covered). Same predicate as
/// is_good_for, without building the report.
class GoodnessScanner {
  public:
    GoodnessScanner(const BitMatrix& g, std::size_t u) : g_(g), u_(u), x_(g.cols()) {}

    std::size_t min_count(std::span<const std::size_t> D) {
        auto xw = x_.mutable_words();
        std::fill(xw.begin(), xw.end(), 0);
        for (auto j : D) x_.set(j);
        counts_.assign(D.size(), 0);
        for (std::size_t r = 0; r < g_.rows(); ++r) {
            if (intersect_count(g_.row(r), x_.words()) != u_) continue;
            for (std::size_t q = 0; q < D.size(); ++q) counts_[q] += g_.get(r, D[q]);
        }
        return *std::min_element(counts_.begin(), counts_.end());
    }

  private:
    const BitMatrix& g_;
    std::size_t u_;
    BitVector x_;
    std::vector<std::size_t> counts_;
};

/// Depth-first enumeration of every D with lo <= |D| <= hi, in lexicographic
/// tuple order. Rows are kept bit-sliced by how many items of the current D
/// they hold (levels 0..u), so extending D by one item costs O(u h / 64) and
/// the rows meeting D in exactly u items are available directly.
class ExhaustiveGoodness {
  public:
    ExhaustiveGoodness(const BitMatrix& g, std::size_t u, std::size_t lo, std::size_t hi, std::size_t budget)
        : cols_(g.transpose()), u_(u), lo_(lo), hi_(hi), budget_(budget), words_(cols_.row_words()) {
        levels_.assign(hi + 1, std::vector<Word>((u + 1) * words_, 0));
        for (std::size_t r = 0; r < g.rows(); ++r) levels_[0][r / kWordBits] |= Word{1} << (r % kWordBits);
    }

    /// True if every set passes; otherwise `failure` holds the first failing set.
    bool run() { return visit(0, 0); }

    std::uint64_t checked = 0;
    std::size_t min_count = SIZE_MAX;
    std::vector<std::size_t> failure;

  private:
    bool visit(std::size_t depth, std::size_t start) {
        if (depth >= lo_ && !evaluate(depth)) return false;
        if (depth == hi_) return true;
        const auto& cur = levels_[depth];
        auto& nxt = levels_[depth + 1];
        for (std::size_t j = start; j < cols_.rows(); ++j) {
            auto col = cols_.row(j);
            for (std::size_t w = 0; w < words_; ++w) {
                nxt[w] = cur[w] & ~col[w];
                for (std::size_t c = 1; c <= u_; ++c)
                    nxt[c * words_ + w] = (cur[c * words_ + w] & ~col[w]) | (cur[(c - 1) * words_ + w] & col[w]);
            }
            chosen_.push_back(j);
            if (!visit(depth + 1, j + 1)) return false;
            chosen_.pop_back();
        }
        return true;
    }

    bool evaluate(std::size_t depth) {
        ++checked;
        std::span<const Word> exact(levels_[depth].data() + u_ * words_, words_);
        for (auto q : chosen_) {
            const std::size_t c = intersect_count(exact, cols_.row(q));
            min_count = std::min(min_count, c);
            if (c <= budget_) {
                failure = chosen_;
                return false;
            }
        }
        return true;
    }

    BitMatrix cols_;
    std::size_t u_, lo_, hi_, budget_, words_;
    std::vector<std::vector<Word>> levels_;
    std::vector<std::size_t> chosen_;
};

}  // namespace detail

/// Layered random G. Layer s (for s = u..d) holds rows whose entries are 1 with
/// probability u/s, so a row meets an s-subset in exactly u items with
/// constant probability. Each candidate must pass is_good_for at budget 2e on
/// every validation set of every cardinality in [u, d].
inline GoodConstruction construct_good(const SchemeParams& params, std::uint64_t seed, const GoodOptions& opt = {}) {
    params.validate();
    if (opt.max_attempts == 0) throw ParameterError("max_attempts must be positive");
    const std::size_t layers = params.d - params.u + 1;
    const std::size_t h = std::max(good_rows(params, opt.c_g), layers);
    const auto sizes = detail::layer_sizes(h, layers);
    const std::size_t budget = 2 * params.e;
    const bool exhaustive =
        detail::sets_between(params.n, params.u, params.d) <= static_cast<double>(opt.exhaustive_limit);

    std::string last_failure;
    for (std::size_t attempt = 0; attempt < opt.max_attempts; ++attempt) {
        const std::uint64_t attempt_seed = mix_seed(seed ^ (0x676f6f64ULL + attempt));
        Rng rng(attempt_seed);
        std::vector<double> row_density;
        for (std::size_t l = 0; l < layers; ++l)
            row_density.insert(row_density.end(), sizes[l],
                               static_cast<double>(params.u) / static_cast<double>(params.u + l));
        auto g = BitMatrix::generate(h, params.n, [&](std::size_t r, std::size_t) { return rng.bernoulli(row_density[r]); });

        Rng vrng(mix_seed(attempt_seed));
        detail::GoodnessScanner scanner(g, params.u);
        std::uint64_t checked = 0;
        std::size_t min_count = SIZE_MAX;
        bool ok = true;
        auto check = [&](std::span<const std::size_t> D) {
            ++checked;
            const std::size_t c = scanner.min_count(D);
            min_count = std::min(min_count, c);
            if (c > budget) return true;
            nlohmann::json w = detail::to_one_based(std::vector<std::size_t>(D.begin(), D.end()));
            last_failure = "cardinality " + std::to_string(D.size()) + ", D=" + w.dump();
            return false;
        };
        if (exhaustive) {
            detail::ExhaustiveGoodness all(g, params.u, params.u, params.d, budget);
            ok = all.run();
            checked = all.checked;
            min_count = all.min_count;
            if (!ok) {
                nlohmann::json w = detail::to_one_based(all.failure);
                last_failure = "cardinality " + std::to_string(all.failure.size()) + ", D=" + w.dump();
            }
        } else {
            for (std::size_t s = params.u; s <= params.d && ok; ++s)
                for (const auto& D : detail::validation_family(params.n, s, opt.validation_sets, vrng))
                    if (!(ok = check(D.indices()))) break;
        }
        if (ok) return GoodConstruction{std::move(g), attempt + 1, checked, exhaustive, min_count};
    }
    throw ConstructionError("no good measurement matrix after " + std::to_string(opt.max_attempts) +
                            " attempts; last failing set: " + last_failure);
}

/// p values tried, in order, when the caller lets the construction pick p.
inline constexpr std::array<double, 9> kPLadder{0.0, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

struct AutoGoodConstruction {
    GoodConstruction good;
    double p = 0.0;
};

/// Smallest p on kPLadder for which construct_good succeeds within
/// `attempts_per_p` attempts. params.p is ignored.
inline AutoGoodConstruction construct_good_auto(SchemeParams params, std::uint64_t seed, GoodOptions opt = {},
                                                std::size_t attempts_per_p = 5) {
    std::string last;
    opt.max_attempts = attempts_per_p;
    for (double p : kPLadder) {
        params.p = p;
        try {
            return AutoGoodConstruction{construct_good(params, seed, opt), p};
        } catch (const ConstructionError& e) {
            last = e.what();
        }
    }
    throw ConstructionError("no p on the ladder produced a good matrix; at p=0.9: " + last);
}

// ---------------------------------------------------------------------------
// Reduction from threshold-disjunct to good matrices
// ---------------------------------------------------------------------------

struct CriticalZeroPair {
    std::vector<std::size_t> critical;
    std::vector<std::size_t> zero;
    std::optional<std::size_t> distinguished;
};

inline void to_json(nlohmann::json& j, const CriticalZeroPair& p) {
    j = nlohmann::json{{"critical", detail::to_one_based(p.critical)}, {"zero", detail::to_one_based(p.zero)}};
    j["distinguished"] = p.distinguished ? nlohmann::json(*p.distinguished + 1) : nlohmann::json(nullptr);
}

/// Critical/zero sets whose u-satisfying rows certify goodness for D.
///
/// d <= 2u: two u-subsets D1, D2 covering D, each paired with the rest of D as
/// zero set. d >= 2u+1 and |D| >= d-u: one pair per defective j with
/// S = {j} plus d-u-1 further defectives and Z = (D \ S) padded with the
/// lowest-indexed non-defectives to u+1 items. d >= 2u+1 and |D| < d-u: S = D
/// itself, Z empty, one pair per distinguished defective.
inline std::vector<CriticalZeroPair> lemma1_partition(const DefectiveSet& dset, std::size_t n, std::size_t d,
                                                      std::size_t u) {
    const auto& D = dset.indices();
    if (D.size() < u) throw ParameterError("defective set smaller than the threshold");
    if (D.size() > d) throw ParameterError("defective set larger than d");
    if (!D.empty() && D.back() >= n) throw DimensionError("defective index out of range");

    std::vector<CriticalZeroPair> out;
    auto minus = [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
        std::vector<std::size_t> r;
        std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
        return r;
    };

    if (d <= 2 * u) {
        std::vector<std::size_t> d1(D.begin(), D.begin() + static_cast<std::ptrdiff_t>(u));
        std::vector<std::size_t> d2(D.end() - static_cast<std::ptrdiff_t>(u), D.end());
        out.push_back({d1, minus(D, d1), std::nullopt});
        out.push_back({d2, minus(D, d2), std::nullopt});
        return out;
    }

    if (D.size() < d - u) {
        for (auto j : D) out.push_back({D, {}, j});
        return out;
    }

    const std::size_t k = D.size();
    for (std::size_t l = 0; l < k; ++l) {
        std::vector<std::size_t> S{D[l]};
        for (std::size_t step = 1; S.size() < d - u; ++step) S.push_back(D[(l + step) % k]);
        std::sort(S.begin(), S.end());
        auto Z = minus(D, S);
        for (std::size_t c = 0; c < n && Z.size() < u + 1; ++c)
            if (!dset.contains(c)) Z.push_back(c);
        std::sort(Z.begin(), Z.end());
        out.push_back({std::move(S), std::move(Z), D[l]});
    }
    return out;
}

struct PartitionCheck {
    bool certifies = false;          ///< every pair has > e satisfying rows, each meeting D in exactly u
    std::size_t min_rows = SIZE_MAX;  ///< fewest satisfying rows over pairs
    bool rows_exact = true;           ///< every satisfying row met D in exactly u items
    bool covers = false;              ///< union of critical sets contains D
};

/// Evaluates a lemma1_partition against g: collects, per pair, the rows with
/// weight exactly u on S, zero on Z and (if set) a 1 at the distinguished
/// column.
inline PartitionCheck check_partition(const BitMatrix& g, const DefectiveSet& dset, std::size_t u, std::size_t e,
                                      const std::vector<CriticalZeroPair>& pairs) {
    PartitionCheck out;
    const std::size_t n = g.cols();
    const BitVector x = dset.to_vector(n);
    BitVector united(n);
    for (const auto& pr : pairs) {
        const BitVector sv = BitVector::from_indices(n, pr.critical);
        const BitVector zv = BitVector::from_indices(n, pr.zero);
        for (auto j : pr.critical) united.set(j);
        std::size_t rows = 0;
        for (std::size_t r = 0; r < g.rows(); ++r) {
            if (intersect_count(g.row(r), sv.words()) != u || intersects(g.row(r), zv.words())) continue;
            if (pr.distinguished && !g.get(r, *pr.distinguished)) continue;
            ++rows;
            if (intersect_count(g.row(r), x.words()) != u) out.rows_exact = false;
        }
        out.min_rows = std::min(out.min_rows, rows);
    }
    out.covers = restrict_row(x, united) == x;
    out.certifies = out.covers && out.rows_exact && !pairs.empty() && out.min_rows > e;
    return out;
}

}  // namespace tgt
