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
#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tgt/errors.hpp"

namespace tgt {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }

/// Number of positions set in both word spans. Spans must have equal length.
inline std::size_t intersect_count(std::span<const Word> a, std::span<const Word> b) {
    std::size_t total = 0;
    for (std::size_t w = 0; w < a.size(); ++w) total += static_cast<std::size_t>(std::popcount(a[w] & b[w]));
    return total;
}

inline bool intersects(std::span<const Word> a, std::span<const Word> b) {
    for (std::size_t w = 0; w < a.size(); ++w)
        if (a[w] & b[w]) return true;
    return false;
}

/// Packed binary vector. Bit j lives in word j/64 at position j%64; bits past
/// size() are always zero.
class BitVector {
  public:
    BitVector() = default;
    explicit BitVector(std::size_t len) : len_(len), words_(words_for(len), 0) {}

    /// From a 0/1 literal such as {1, 0, 1}.
    BitVector(std::initializer_list<int> bits) : BitVector(bits.size()) {
        std::size_t j = 0;
        for (int b : bits) set(j++, b != 0);
    }

    static BitVector from_string(std::string_view s) {
        BitVector v(s.size());
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (s[j] != '0' && s[j] != '1') throw ParseError("bit string must contain only 0/1");
            v.set(j, s[j] == '1');
        }
        return v;
    }

    static BitVector from_indices(std::size_t len, std::span<const std::size_t> indices) {
        BitVector v(len);
        for (auto j : indices) {
            if (j >= len) throw DimensionError("index out of range for vector");
            v.set(j);
        }
        return v;
    }

    static BitVector ones(std::size_t len) {
        BitVector v(len);
        for (auto& w : v.words_) w = ~Word{0};
        v.clear_padding();
        return v;
    }

    std::size_t size() const { return len_; }
    bool empty() const { return len_ == 0; }

    bool get(std::size_t j) const { return (words_[j / kWordBits] >> (j % kWordBits)) & 1U; }
    bool operator[](std::size_t j) const { return get(j); }

    void set(std::size_t j, bool value = true) {
        const Word mask = Word{1} << (j % kWordBits);
        if (value)
            words_[j / kWordBits] |= mask;
        else
            words_[j / kWordBits] &= ~mask;
    }
    void flip(std::size_t j) { words_[j / kWordBits] ^= Word{1} << (j % kWordBits); }

    std::size_t weight() const {
        std::size_t total = 0;
        for (auto w : words_) total += static_cast<std::size_t>(std::popcount(w));
        return total;
    }

    /// Strictly increasing 0-based indices of the set bits.
    std::vector<std::size_t> support() const {
        std::vector<std::size_t> out;
        for (std::size_t w = 0; w < words_.size(); ++w) {
            Word bits = words_[w];
            while (bits) {
                out.push_back(w * kWordBits + static_cast<std::size_t>(std::countr_zero(bits)));
                bits &= bits - 1;
            }
        }
        return out;
    }

    std::span<const Word> words() const { return words_; }
    std::span<Word> mutable_words() { return words_; }

    std::string to_string() const {
        std::string s(len_, '0');
        for (std::size_t j = 0; j < len_; ++j)
            if (get(j)) s[j] = '1';
        return s;
    }

    std::size_t hamming(const BitVector& other) const {
        require_same_size(other, "hamming");
        std::size_t total = 0;
        for (std::size_t w = 0; w < words_.size(); ++w)
            total += static_cast<std::size_t>(std::popcount(words_[w] ^ other.words_[w]));
        return total;
    }

    void require_same_size(const BitVector& other, const char* what) const {
        if (len_ != other.len_)
            throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(len_) + " vs " +
                                 std::to_string(other.len_) + ")");
    }

    friend bool operator==(const BitVector&, const BitVector&) = default;

  private:
    friend class BitMatrix;

    void clear_padding() {
        if (len_ % kWordBits != 0 && !words_.empty()) words_.back() &= (Word{1} << (len_ % kWordBits)) - 1;
    }

    std::size_t len_ = 0;
    std::vector<Word> words_;
};

/// Elementwise AND: the items of x that participate in the pool g_row.
inline BitVector restrict_row(const BitVector& x, const BitVector& g_row) {
    x.require_same_size(g_row, "restrict_row");
    BitVector out(x.size());
    auto dst = out.mutable_words();
    auto a = x.words();
    auto b = g_row.words();
    for (std::size_t w = 0; w < dst.size(); ++w) dst[w] = a[w] & b[w];
    return out;
}

/// Immutable row-major binary matrix. Each row occupies a whole number of words
/// so row views can be fed straight to the word-level kernels above.
class BitMatrix {
  public:
    BitMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), stride_(words_for(cols)) {
        if (rows == 0 || cols == 0) throw DimensionError("matrix must have at least one row and one column");
        data_.assign(rows_ * stride_, 0);
    }

    static BitMatrix from_rows(std::span<const BitVector> rows) {
        if (rows.empty()) throw DimensionError("matrix must have at least one row");
        BitMatrix m(rows.size(), rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != m.cols_) throw DimensionError("ragged rows");
            std::copy(rows[r].words_.begin(), rows[r].words_.end(), m.data_.begin() + r * m.stride_);
        }
        return m;
    }
    static BitMatrix from_rows(std::initializer_list<BitVector> rows) {
        return from_rows(std::span<const BitVector>(rows.begin(), rows.size()));
    }

    /// Fill from a predicate f(row, col) -> bool, evaluated in row-major order.
    template <typename F>
    static BitMatrix generate(std::size_t rows, std::size_t cols, F&& f) {
        BitMatrix m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                if (f(r, c)) m.data_[r * m.stride_ + c / kWordBits] |= Word{1} << (c % kWordBits);
        return m;
    }

    static BitMatrix identity(std::size_t n) {
        return generate(n, n, [](std::size_t r, std::size_t c) { return r == c; });
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t row_words() const { return stride_; }

    bool get(std::size_t r, std::size_t c) const {
        return (data_[r * stride_ + c / kWordBits] >> (c % kWordBits)) & 1U;
    }

    std::span<const Word> row(std::size_t r) const { return {data_.data() + r * stride_, stride_}; }

    BitVector row_vector(std::size_t r) const {
        BitVector v(cols_);
        std::copy_n(data_.begin() + r * stride_, stride_, v.words_.begin());
        return v;
    }

    BitVector column(std::size_t c) const {
        BitVector v(rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            if (get(r, c)) v.set(r);
        return v;
    }

    BitMatrix transpose() const {
        BitMatrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r) {
            auto rw = row(r);
            for (std::size_t w = 0; w < stride_; ++w) {
                Word bits = rw[w];
                while (bits) {
                    const std::size_t c = w * kWordBits + static_cast<std::size_t>(std::countr_zero(bits));
                    t.data_[c * t.stride_ + r / kWordBits] |= Word{1} << (r % kWordBits);
                    bits &= bits - 1;
                }
            }
        }
        return t;
    }

    std::size_t row_weight(std::size_t r) const {
        std::size_t total = 0;
        for (auto w : row(r)) total += static_cast<std::size_t>(std::popcount(w));
        return total;
    }

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

  private:
    friend BitMatrix complement(const BitMatrix& m);
    friend BitMatrix stack(const BitMatrix& top, const BitMatrix& bottom);
    template <typename RowFn>
    friend BitMatrix assemble_rows(std::size_t rows, std::size_t cols, RowFn&& fn);

    std::size_t rows_;
    std::size_t cols_;
    std::size_t stride_;
    std::vector<Word> data_;
};

/// Builds a matrix row by row; fn(r, dst) writes row r into a zeroed word span.
template <typename RowFn>
BitMatrix assemble_rows(std::size_t rows, std::size_t cols, RowFn&& fn) {
    BitMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        std::span<Word> dst(m.data_.data() + r * m.stride_, m.stride_);
        fn(r, dst);
        if (cols % kWordBits != 0) dst.back() &= (Word{1} << (cols % kWordBits)) - 1;
    }
    return m;
}

/// Every bit flipped; same shape.
inline BitMatrix complement(const BitMatrix& m) {
    BitMatrix out = m;
    for (auto& w : out.data_) w = ~w;
    if (m.cols_ % kWordBits != 0) {
        const Word keep = (Word{1} << (m.cols_ % kWordBits)) - 1;
        for (std::size_t r = 0; r < out.rows_; ++r) out.data_[r * out.stride_ + out.stride_ - 1] &= keep;
    }
    return out;
}

/// Rows of `top` followed by rows of `bottom`.
inline BitMatrix stack(const BitMatrix& top, const BitMatrix& bottom) {
    if (top.cols_ != bottom.cols_)
        throw DimensionError("stack: column mismatch (" + std::to_string(top.cols_) + " vs " +
                             std::to_string(bottom.cols_) + ")");
    BitMatrix out(top.rows_ + bottom.rows_, top.cols_);
    std::copy(top.data_.begin(), top.data_.end(), out.data_.begin());
    std::copy(bottom.data_.begin(), bottom.data_.end(), out.data_.begin() + static_cast<std::ptrdiff_t>(top.data_.size()));
    return out;
}

/// Sorted set of defective item indices (0-based internally, printed 1-based).
class DefectiveSet {
  public:
    DefectiveSet() = default;
    explicit DefectiveSet(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
        std::sort(indices_.begin(), indices_.end());
        indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
    }
    DefectiveSet(std::initializer_list<std::size_t> indices) : DefectiveSet(std::vector<std::size_t>(indices)) {}

    static DefectiveSet from_vector(const BitVector& x) { return DefectiveSet(x.support()); }

    BitVector to_vector(std::size_t n) const { return BitVector::from_indices(n, indices_); }

    const std::vector<std::size_t>& indices() const { return indices_; }
    std::size_t size() const { return indices_.size(); }
    bool empty() const { return indices_.empty(); }
    bool contains(std::size_t j) const { return std::binary_search(indices_.begin(), indices_.end(), j); }

    /// 1-based indices, for user-facing output.
    std::vector<std::size_t> one_based() const {
        std::vector<std::size_t> out(indices_);
        for (auto& j : out) ++j;
        return out;
    }

    friend bool operator==(const DefectiveSet&, const DefectiveSet&) = default;

  private:
    std::vector<std::size_t> indices_;
};

}  // namespace tgt
