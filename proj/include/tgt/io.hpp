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

#include <array>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tgt/bits.hpp"
#include "tgt/errors.hpp"

// Text container for matrices and vectors:
//
//   TGTMAT v1 rows=<r> cols=<c> kind=<disjunct|good|augmented|final> params=<json>
//   <base64 payload>
//
//   TGTVEC v1 len=<n>
//   <base64 payload>
//
// The payload is the row-major bit sequence packed into ceil(bits/64) 64-bit
// words, each written little-endian, bit i of the sequence at position i%64 of
// word i/64. Bits past rows*cols must be zero.

namespace tgt::io {

namespace detail {

inline constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline int decode_char(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

}  // namespace detail

inline std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
        out += detail::kAlphabet[(v >> 18) & 63];
        out += detail::kAlphabet[(v >> 12) & 63];
        out += detail::kAlphabet[(v >> 6) & 63];
        out += detail::kAlphabet[v & 63];
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t v = std::uint32_t{bytes[i]} << 16;
        out += detail::kAlphabet[(v >> 18) & 63];
        out += detail::kAlphabet[(v >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8);
        out += detail::kAlphabet[(v >> 18) & 63];
        out += detail::kAlphabet[(v >> 12) & 63];
        out += detail::kAlphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

inline std::vector<std::uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw ParseError("base64 payload length is not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        std::array<int, 4> v{};
        int pad = 0;
        for (int q = 0; q < 4; ++q) {
            const char c = text[i + q];
            if (c == '=') {
                if (i + 4 != text.size() || q < 2) throw ParseError("misplaced base64 padding");
                v[q] = 0;
                ++pad;
            } else {
                if (pad) throw ParseError("misplaced base64 padding");
                v[q] = detail::decode_char(c);
                if (v[q] < 0) throw ParseError("invalid base64 character");
            }
        }
        const std::uint32_t n = (std::uint32_t(v[0]) << 18) | (std::uint32_t(v[1]) << 12) | (std::uint32_t(v[2]) << 6) |
                                std::uint32_t(v[3]);
        out.push_back(static_cast<std::uint8_t>(n >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(n >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(n));
    }
    return out;
}

enum class MatrixKind { disjunct, good, augmented, final_ };

inline std::string to_string(MatrixKind k) {
    switch (k) {
        case MatrixKind::disjunct: return "disjunct";
        case MatrixKind::good: return "good";
        case MatrixKind::augmented: return "augmented";
        case MatrixKind::final_: return "final";
    }
    return "final";
}

inline MatrixKind kind_from_string(std::string_view s) {
    if (s == "disjunct") return MatrixKind::disjunct;
    if (s == "good") return MatrixKind::good;
    if (s == "augmented") return MatrixKind::augmented;
    if (s == "final") return MatrixKind::final_;
    throw ParseError("unknown matrix kind '" + std::string(s) + "'");
}

struct MatrixFile {
    BitMatrix matrix;
    MatrixKind kind = MatrixKind::final_;
    nlohmann::json params = nlohmann::json::object();
};

namespace detail {

// Bit sequence -> little-endian word bytes.
template <typename BitAt>
std::vector<std::uint8_t> pack_bits(std::size_t nbits, BitAt&& bit_at) {
    std::vector<Word> words(words_for(nbits), 0);
    for (std::size_t i = 0; i < nbits; ++i)
        if (bit_at(i)) words[i / kWordBits] |= Word{1} << (i % kWordBits);
    std::vector<std::uint8_t> bytes;
    bytes.reserve(words.size() * 8);
    for (Word w : words)
        for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<std::uint8_t>(w >> (8 * b)));
    return bytes;
}

inline std::vector<Word> unpack_words(std::string_view payload, std::size_t nbits) {
    if (payload.empty()) throw ParseError("empty payload");
    const auto bytes = base64_decode(payload);
    const std::size_t nwords = words_for(nbits);
    if (bytes.size() != nwords * 8)
        throw ParseError("payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                         std::to_string(nwords * 8));
    std::vector<Word> words(nwords, 0);
    for (std::size_t w = 0; w < nwords; ++w)
        for (int b = 0; b < 8; ++b) words[w] |= Word{bytes[w * 8 + b]} << (8 * b);
    if (nbits % kWordBits != 0 && (words.back() >> (nbits % kWordBits)) != 0)
        throw ParseError("nonzero padding bits");
    return words;
}

inline std::size_t parse_count(std::string_view token, std::string_view key) {
    if (token.substr(0, key.size()) != key) throw ParseError("expected '" + std::string(key) + "' in header");
    const auto digits = token.substr(key.size());
    if (digits.empty() || digits.size() > 18) throw ParseError("bad count in header");
    std::size_t v = 0;
    for (char c : digits) {
        if (c < '0' || c > '9') throw ParseError("bad count in header");
        v = v * 10 + static_cast<std::size_t>(c - '0');
    }
    return v;
}

inline std::pair<std::string_view, std::string_view> split_lines(std::string_view text) {
    const auto nl = text.find('\n');
    if (nl == std::string_view::npos) throw ParseError("missing payload line");
    auto payload = text.substr(nl + 1);
    while (!payload.empty() && (payload.back() == '\n' || payload.back() == '\r')) payload.remove_suffix(1);
    auto header = text.substr(0, nl);
    if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
    return {header, payload};
}

inline std::vector<std::string_view> split_spaces(std::string_view s, std::size_t max_tokens) {
    std::vector<std::string_view> out;
    while (!s.empty() && out.size() + 1 < max_tokens) {
        const auto sp = s.find(' ');
        if (sp == std::string_view::npos) break;
        out.push_back(s.substr(0, sp));
        s.remove_prefix(sp + 1);
    }
    out.push_back(s);
    return out;
}

}  // namespace detail

inline std::string serialize(const BitMatrix& m, MatrixKind kind = MatrixKind::final_,
                             const nlohmann::json& params = nlohmann::json::object()) {
    const std::size_t cols = m.cols();
    auto bytes =
        detail::pack_bits(m.rows() * cols, [&](std::size_t i) { return m.get(i / cols, i % cols); });
    std::string out = "TGTMAT v1 rows=" + std::to_string(m.rows()) + " cols=" + std::to_string(cols) +
                      " kind=" + to_string(kind) + " params=" + params.dump() + "\n";
    out += base64_encode(bytes);
    out += '\n';
    return out;
}

inline MatrixFile deserialize_matrix(std::string_view text) {
    if (text.empty()) throw ParseError("empty input");
    const auto [header, payload] = detail::split_lines(text);
    const auto tok = detail::split_spaces(header, 6);
    if (tok.size() != 6 || tok[0] != "TGTMAT" || tok[1] != "v1") throw ParseError("corrupt matrix header");
    const std::size_t rows = detail::parse_count(tok[2], "rows=");
    const std::size_t cols = detail::parse_count(tok[3], "cols=");
    if (rows == 0 || cols == 0) throw ParseError("matrix header has zero dimension");
    if (tok[4].substr(0, 5) != "kind=") throw ParseError("expected 'kind=' in header");
    const MatrixKind kind = kind_from_string(tok[4].substr(5));
    if (tok[5].substr(0, 7) != "params=") throw ParseError("expected 'params=' in header");
    nlohmann::json params;
    try {
        params = nlohmann::json::parse(tok[5].substr(7));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("params is not valid JSON: ") + e.what());
    }
    const auto words = detail::unpack_words(payload, rows * cols);
    auto m = BitMatrix::generate(rows, cols, [&](std::size_t r, std::size_t c) {
        const std::size_t i = r * cols + c;
        return (words[i / kWordBits] >> (i % kWordBits)) & 1U;
    });
    return MatrixFile{std::move(m), kind, std::move(params)};
}

inline std::string serialize(const BitVector& v) {
    auto bytes = detail::pack_bits(v.size(), [&](std::size_t i) { return v.get(i); });
    return "TGTVEC v1 len=" + std::to_string(v.size()) + "\n" + base64_encode(bytes) + "\n";
}

inline BitVector deserialize_vector(std::string_view text) {
    if (text.empty()) throw ParseError("empty input");
    const auto [header, payload] = detail::split_lines(text);
    const auto tok = detail::split_spaces(header, 3);
    if (tok.size() != 3 || tok[0] != "TGTVEC" || tok[1] != "v1") throw ParseError("corrupt vector header");
    const std::size_t len = detail::parse_count(tok[2], "len=");
    if (len == 0) throw ParseError("vector header has zero length");
    const auto words = detail::unpack_words(payload, len);
    BitVector v(len);
    std::copy(words.begin(), words.end(), v.mutable_words().begin());
    return v;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace tgt::io
