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
#include <cstdint>
#include <iterator>
#include <vector>

#include <json.hpp>

#include "tgt/bits.hpp"
#include "tgt/errors.hpp"

// Ground truth by exhaustive enumeration. Nothing here may depend on the block
// structure of the test matrix or on the decoders in codec.hpp.

namespace tgt::oracle {

inline constexpr std::uint64_t kDefaultEnumerationLimit = 2'000'000;

struct ConsistencySet {
    std::vector<DefectiveSet> candidates;  ///< lexicographic by sorted index tuple
    std::size_t mismatch_budget = 0;
    std::uint64_t enumerated = 0;

    bool contains(const DefectiveSet& s) const {
        return std::find(candidates.begin(), candidates.end(), s) != candidates.end();
    }
};

inline std::uint64_t sets_up_to(std::size_t n, std::size_t d) {
    double total = 0, term = 1;
    for (std::size_t s = 0; s <= std::min(d, n); ++s) {
        total += term;
        term = term * static_cast<double>(n - s) / static_cast<double>(s + 1);
    }
    return total > 1e18 ? UINT64_MAX : static_cast<std::uint64_t>(total);
}

namespace detail {

class Enumerator {
  public:
    Enumerator(const BitMatrix& t, const BitVector& y, std::size_t d, std::size_t u, std::size_t budget,
               ConsistencySet& out)
        : t_(t), y_(y), d_(d), u_(u), budget_(budget), out_(out), x_(t.cols()) {}

    void run() { visit(0); }

  private:
    void visit(std::size_t next) {
        ++out_.enumerated;
        if (within_budget()) out_.candidates.emplace_back(chosen_);
        if (chosen_.size() == d_) return;
        for (std::size_t j = next; j < t_.cols(); ++j) {
            chosen_.push_back(j);
            x_.set(j);
            visit(j + 1);
            x_.set(j, false);
            chosen_.pop_back();
        }
    }

    // Stops counting once the budget is exceeded; the verdict is unaffected.
    bool within_budget() const {
        std::size_t mismatches = 0;
        for (std::size_t r = 0; r < t_.rows(); ++r) {
            const bool positive = intersect_count(t_.row(r), x_.words()) >= u_;
            if (positive != y_[r] && ++mismatches > budget_) return false;
        }
        return true;
    }

    const BitMatrix& t_;
    const BitVector& y_;
    std::size_t d_;
    std::size_t u_;
    std::size_t budget_;
    ConsistencySet& out_;
    BitVector x_;
    std::vector<std::size_t> chosen_;
};

}  // namespace detail

/// Every set of at most d items whose threshold outcomes under t lie within
/// `budget` flips of y.
inline ConsistencySet brute_force_decode(const BitMatrix& t, const BitVector& y, std::size_t d, std::size_t u,
                                         std::size_t budget,
                                         std::uint64_t enumeration_limit = kDefaultEnumerationLimit) {
    if (t.rows() != y.size()) throw DimensionError("brute_force_decode: outcome length does not match rows");
    if (u == 0) throw ParameterError("threshold must be at least 1");
    const auto work = sets_up_to(t.cols(), d);
    if (work > enumeration_limit)
        throw BudgetError("brute-force enumeration of " + std::to_string(work) + " sets exceeds limit " +
                          std::to_string(enumeration_limit));
    ConsistencySet out;
    out.mismatch_budget = budget;
    detail::Enumerator(t, y, d, u, budget, out).run();
    return out;
}

struct CrossCheck {
    std::vector<std::size_t> false_positives;
    std::vector<std::size_t> false_negatives;
    bool exact = false;
};

inline CrossCheck cross_check(const DefectiveSet& decoded, const DefectiveSet& truth) {
    CrossCheck c;
    const auto& a = decoded.indices();
    const auto& b = truth.indices();
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(c.false_positives));
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(c.false_negatives));
    c.exact = c.false_positives.empty() && c.false_negatives.empty();
    return c;
}

inline void to_json(nlohmann::json& j, const CrossCheck& c) {
    auto one = [](std::vector<std::size_t> v) {
        for (auto& x : v) ++x;
        return v;
    };
    j = nlohmann::json{
        {"false_positives", one(c.false_positives)}, {"false_negatives", one(c.false_negatives)}, {"exact", c.exact}};
}

}  // namespace tgt::oracle
