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
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tgt/bits.hpp"
#include "tgt/codec.hpp"
#include "tgt/constructions.hpp"
#include "tgt/errors.hpp"
#include "tgt/io.hpp"
#include "tgt/oracle.hpp"
#include "tgt/random.hpp"
#include "tgt/semantics.hpp"

// Bundles on disk, randomized trials and their CSV/JSONL records.

namespace tgt::experiment {

/// Where injected flips land.
///  uniform - distinct positions uniformly over the whole outcome vector
///  starve  - indicator bits of the blocks that certify the least-covered
///            defective, removing as many of its votes as possible
///  spoof   - indicator bits of negative blocks holding the most defectives
enum class Placement { uniform, starve, spoof };

inline std::string to_string(Placement p) {
    switch (p) {
        case Placement::uniform: return "uniform";
        case Placement::starve: return "starve";
        case Placement::spoof: return "spoof";
    }
    return "uniform";
}

inline Placement placement_from_string(const std::string& s) {
    if (s == "uniform") return Placement::uniform;
    if (s == "starve") return Placement::starve;
    if (s == "spoof") return Placement::spoof;
    throw ParameterError("unknown placement '" + s + "'");
}

struct ExperimentConfig {
    SchemeParams params;
    bool auto_p = true;  ///< pick p from kPLadder instead of params.p
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    double c = 3.0;
    double c_g = 2.0;
    std::size_t max_attempts = 50;
    std::size_t validation_sets = 200;
    std::uint64_t exhaustive_limit = 20'000'000;  ///< exhaustive goodness validation up to this many sets
    std::uint64_t budget = kDefaultBudget;        ///< exhaustive disjunct-verifier work cap
    bool allow_below_u = false;                   ///< sample |D| from [1, d] instead of [u, d]
    FlipCount flip_count = FlipCount::exact;
    Placement placement = Placement::uniform;
    bool timings = true;  ///< false writes 0 for every duration

    void validate() const {
        params.validate();
        if (trials == 0) throw ParameterError("trials must be at least 1");
        if (c <= 0 || c_g <= 0) throw ParameterError("constants c and c_g must be positive");
    }
};

/// Reads TGT_BUDGET if set.
inline std::uint64_t budget_from_env(std::uint64_t fallback = kDefaultBudget) {
    if (const char* v = std::getenv("TGT_BUDGET")) {
        char* end = nullptr;
        const auto parsed = std::strtoull(v, &end, 10);
        if (end != v && *end == '\0' && parsed > 0) return parsed;
        throw ParameterError("TGT_BUDGET must be a positive integer");
    }
    return fallback;
}

struct Bundle {
    Scheme scheme;
    nlohmann::json meta;  ///< contents of scheme.json

    std::size_t certified_e() const { return meta.at("params").at("e").get<std::size_t>(); }
};

inline std::uint64_t matrix_seed(std::uint64_t seed, char which) { return mix_seed(seed ^ (std::uint64_t(which) << 56)); }

/// Builds M (verified (d+1)-disjunct) and G (validated good at budget 2e) and
/// assembles the scheme. Deterministic in config.seed.
inline Bundle generate_bundle(const ExperimentConfig& cfg) {
    cfg.validate();
    SchemeParams params = cfg.params;
    const std::uint64_t seed_m = matrix_seed(cfg.seed, 'M');
    const std::uint64_t seed_g = matrix_seed(cfg.seed, 'G');

    DisjunctOptions dopt;
    dopt.c = cfg.c;
    dopt.max_attempts = cfg.max_attempts;
    dopt.budget = cfg.budget;
    auto disjunct = construct_disjunct(params.n, params.d, seed_m, dopt);

    GoodOptions gopt;
    gopt.c_g = cfg.c_g;
    gopt.max_attempts = cfg.max_attempts;
    gopt.validation_sets = cfg.validation_sets;
    gopt.exhaustive_limit = cfg.exhaustive_limit;
    std::optional<GoodConstruction> good;
    if (cfg.auto_p) {
        auto chosen = construct_good_auto(params, seed_g, gopt);
        params.p = chosen.p;
        good = std::move(chosen.good);
    } else {
        good = construct_good(params, seed_g, gopt);
    }

    Scheme scheme = build_scheme(good->matrix, disjunct.matrix, params);
    nlohmann::json cert_m = disjunct.certificate;
    cert_m["attempts"] = disjunct.attempts;
    nlohmann::json cert_g = *good;
    cert_g["budget"] = 2 * params.e;

    nlohmann::json meta = {
        {"format", "tgt-scheme v1"},
        {"params", params},
        {"p_selection", cfg.auto_p ? "auto" : "fixed"},
        {"seed", cfg.seed},
        {"seeds", {{"M", seed_m}, {"G", seed_g}}},
        {"constants", {{"c", cfg.c}, {"c_g", cfg.c_g}}},
        {"dimensions", {{"h", scheme.h()}, {"k", scheme.k()}, {"block", scheme.block_size()}, {"t", scheme.tests()}}},
        {"certificates", {{"M", cert_m}, {"G", cert_g}}},
    };
    return Bundle{std::move(scheme), std::move(meta)};
}

inline nlohmann::json header_params(const Bundle& b, const char* which) {
    const auto& p = b.meta.at("params");
    nlohmann::json j = {{"n", p.at("n")},         {"d", p.at("d")},     {"u", p.at("u")},
                        {"e", p.at("e")},         {"p", p.at("p")},     {"seed", b.meta.at("seed")},
                        {"c", b.meta.at("constants").at("c")}, {"c_g", b.meta.at("constants").at("c_g")}};
    if (std::string(which) == "M") j["order"] = p.at("d").get<std::size_t>() + 1;
    return j;
}

inline void write_bundle(const std::filesystem::path& dir, const Bundle& b) {
    std::filesystem::create_directories(dir);
    io::write_file((dir / "G.mat").string(), io::serialize(b.scheme.g, io::MatrixKind::good, header_params(b, "G")));
    io::write_file((dir / "M.mat").string(),
                   io::serialize(b.scheme.m, io::MatrixKind::disjunct, header_params(b, "M")));
    io::write_file((dir / "T.mat").string(), io::serialize(b.scheme.t, io::MatrixKind::final_, header_params(b, "T")));
    io::write_file((dir / "scheme.json").string(), b.meta.dump(2) + "\n");
}

/// Loads a bundle and checks that T.mat is the test matrix assembled from
/// G.mat and M.mat.
inline Bundle read_bundle(const std::filesystem::path& dir) {
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(io::read_file((dir / "scheme.json").string()));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scheme.json: ") + e.what());
    }
    SchemeParams params;
    try {
        params = meta.at("params").get<SchemeParams>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scheme.json params: ") + e.what());
    }
    auto g = io::deserialize_matrix(io::read_file((dir / "G.mat").string()));
    auto m = io::deserialize_matrix(io::read_file((dir / "M.mat").string()));
    Scheme scheme = build_scheme(g.matrix, m.matrix, params);
    const auto tfile = dir / "T.mat";
    if (std::filesystem::exists(tfile)) {
        auto t = io::deserialize_matrix(io::read_file(tfile.string()));
        if (!(t.matrix == scheme.t)) throw ParseError("T.mat does not match the matrix assembled from G.mat and M.mat");
    }
    return Bundle{std::move(scheme), std::move(meta)};
}

/// Uniform cardinality in [lo, d], then a uniform set of that size.
inline DefectiveSet sample_defectives(std::size_t n, std::size_t lo, std::size_t d, Rng& rng) {
    const std::size_t size = lo + static_cast<std::size_t>(rng.uniform_below(d - lo + 1));
    return DefectiveSet(rng.sample_without_replacement(n, size));
}

/// Flat outcome positions to flip for the given placement.
inline std::vector<std::size_t> choose_flips(const Scheme& s, const DefectiveSet& truth, std::size_t e, Placement where,
                                             Rng& rng) {
    const std::size_t total = s.tests();
    if (e > total) throw ParameterError("more flips than tests");
    std::vector<std::size_t> picked;
    if (where != Placement::uniform && e > 0) {
        const BitVector x = truth.to_vector(s.n());
        std::vector<std::size_t> meet(s.h());
        for (std::size_t i = 0; i < s.h(); ++i) meet[i] = intersect_count(s.g.row(i), x.words());
        if (where == Placement::starve) {
            const std::size_t u = s.params.u;
            std::optional<std::size_t> weakest;
            std::vector<std::size_t> weakest_blocks;
            for (auto j : truth.indices()) {
                std::vector<std::size_t> blocks;
                for (std::size_t i = 0; i < s.h(); ++i)
                    if (meet[i] == u && s.g.get(i, j)) blocks.push_back(i);
                if (!weakest || blocks.size() < weakest_blocks.size()) {
                    weakest = j;
                    weakest_blocks = std::move(blocks);
                }
            }
            for (std::size_t q = 0; q < weakest_blocks.size() && picked.size() < e; ++q)
                picked.push_back(weakest_blocks[q] * s.block_size());
        } else {
            std::vector<std::size_t> negative;
            for (std::size_t i = 0; i < s.h(); ++i)
                if (meet[i] < s.params.u) negative.push_back(i);
            std::stable_sort(negative.begin(), negative.end(),
                             [&](std::size_t a, std::size_t b) { return meet[a] > meet[b]; });
            for (std::size_t q = 0; q < negative.size() && picked.size() < e; ++q)
                picked.push_back(negative[q] * s.block_size());
        }
    }
    // Top up with uniform positions not already chosen.
    while (picked.size() < e) {
        const auto pos = static_cast<std::size_t>(rng.uniform_below(total));
        if (std::find(picked.begin(), picked.end(), pos) == picked.end()) picked.push_back(pos);
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

struct TrialRecord {
    std::size_t trial = 0;
    DefectiveSet truth;
    std::vector<std::size_t> flips;
    DefectiveSet decoded;
    oracle::CrossCheck check;
    std::size_t positive_blocks = 0;
    std::size_t accepted_blocks = 0;
    std::size_t rstar_size = 0;
    std::size_t min_true_count = 0;   ///< smallest multiplicity of a true defective in R*
    std::size_t max_false_count = 0;  ///< largest multiplicity of a non-defective in R*
    bool g_good = false;              ///< G passes is_good_for(D, u, 2e) for this D
    bool certified = false;           ///< g_good and flips within the bundle's budget
    std::string status;
    std::int64_t encode_ns = 0;
    std::int64_t decode_ns = 0;
    std::size_t t = 0, h = 0, k = 0;
};

inline std::int64_t elapsed_ns(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - since).count();
}

/// One randomized trial: sample D, encode, inject cfg.params.e flips, decode
/// with the error-tolerant decoder at budget cfg.params.e, cross-check.
inline TrialRecord run_trial(const Bundle& b, const ExperimentConfig& cfg, std::size_t trial_id) {
    const Scheme& s = b.scheme;
    Rng rng(cfg.seed ^ static_cast<std::uint64_t>(trial_id));
    TrialRecord rec;
    rec.trial = trial_id;
    rec.t = s.tests();
    rec.h = s.h();
    rec.k = s.k();
    const std::size_t lo = cfg.allow_below_u ? 1 : s.params.u;
    rec.truth = sample_defectives(s.n(), lo, s.params.d, rng);

    auto t0 = std::chrono::steady_clock::now();
    const auto blocks = encode(s, rec.truth.to_vector(s.n()));
    BitVector flat = flatten(blocks);
    rec.encode_ns = cfg.timings ? elapsed_ns(t0) : 0;

    const std::size_t e = cfg.params.e;
    std::size_t flips = e;
    if (cfg.flip_count == FlipCount::up_to) flips = static_cast<std::size_t>(rng.uniform_below(e + 1));
    rec.flips = choose_flips(s, rec.truth, flips, cfg.placement, rng);
    flat = flip_positions(flat, rec.flips).y;
    const auto observed = split_outcomes(s, flat);

    t0 = std::chrono::steady_clock::now();
    const auto res = dec_natgt(s, observed, e);
    rec.decode_ns = cfg.timings ? elapsed_ns(t0) : 0;

    rec.decoded = res.defectives;
    rec.check = oracle::cross_check(rec.decoded, rec.truth);
    rec.status = to_string(res.status);
    for (const auto& tr : res.trace) rec.positive_blocks += tr.y;
    rec.accepted_blocks = res.accepted_blocks();
    rec.rstar_size = res.candidates.total();
    rec.min_true_count = SIZE_MAX;
    for (auto j : rec.truth.indices()) rec.min_true_count = std::min(rec.min_true_count, res.candidates.count(j));
    if (rec.truth.empty()) rec.min_true_count = 0;
    for (auto [j, c] : res.candidates.counts)
        if (!rec.truth.contains(j)) rec.max_false_count = std::max(rec.max_false_count, c);
    rec.g_good = rec.truth.size() >= s.params.u && is_good_for(s.g, rec.truth, s.params.u, 2 * e).is_good;
    rec.certified = rec.g_good && e <= b.certified_e();
    return rec;
}

struct Summary {
    std::size_t trials = 0;
    std::size_t exact = 0;
    std::size_t certified = 0;
    std::size_t certified_exact = 0;
    std::size_t below_threshold = 0;  ///< trials with |D| < u
    double mean_encode_ns = 0;
    double mean_decode_ns = 0;
    bool within_certified_budget = true;

    double recovery_rate() const { return trials ? static_cast<double>(exact) / static_cast<double>(trials) : 0.0; }
};

inline Summary summarize(const Bundle& b, const ExperimentConfig& cfg, const std::vector<TrialRecord>& recs) {
    Summary s;
    s.trials = recs.size();
    s.within_certified_budget = cfg.params.e <= b.certified_e();
    double enc = 0, dec = 0;
    for (const auto& r : recs) {
        s.exact += r.check.exact;
        s.certified += r.certified;
        s.certified_exact += r.certified && r.check.exact;
        s.below_threshold += r.truth.size() < b.scheme.params.u;
        enc += static_cast<double>(r.encode_ns);
        dec += static_cast<double>(r.decode_ns);
    }
    if (!recs.empty()) {
        s.mean_encode_ns = enc / static_cast<double>(recs.size());
        s.mean_decode_ns = dec / static_cast<double>(recs.size());
    }
    return s;
}

inline std::vector<TrialRecord> simulate(const Bundle& b, const ExperimentConfig& cfg) {
    if (cfg.trials == 0) throw ParameterError("trials must be at least 1");
    if (cfg.params.e > b.scheme.tests()) throw ParameterError("more flips than tests");
    std::vector<TrialRecord> out;
    out.reserve(cfg.trials);
    for (std::size_t i = 0; i < cfg.trials; ++i) out.push_back(run_trial(b, cfg, i));
    return out;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline std::string join_one_based(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(v[i] + 1);
    }
    return s;
}

inline constexpr const char* kCsvHeader =
    "trial,d_size,defectives,flips,decoded,exact,false_positives,false_negatives,positive_blocks,accepted_blocks,"
    "rstar_size,min_true_count,max_false_count,g_good,certified,status,encode_ns,decode_ns,t,h,k";

inline std::string format_double(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << std::fixed << v;
    return ss.str();
}

/// Per-trial rows followed by a summary row (trial = "summary", exact =
/// recovery rate, encode_ns/decode_ns = means).
inline std::string to_csv(const std::vector<TrialRecord>& recs, const Summary& sum) {
    std::ostringstream out;
    out << kCsvHeader << "\n";
    for (const auto& r : recs) {
        out << r.trial + 1 << ',' << r.truth.size() << ',' << join_one_based(r.truth.indices()) << ','
            << join_one_based(r.flips) << ',' << join_one_based(r.decoded.indices()) << ',' << (r.check.exact ? 1 : 0)
            << ',' << join_one_based(r.check.false_positives) << ',' << join_one_based(r.check.false_negatives) << ','
            << r.positive_blocks << ',' << r.accepted_blocks << ',' << r.rstar_size << ',' << r.min_true_count << ','
            << r.max_false_count << ',' << (r.g_good ? 1 : 0) << ',' << (r.certified ? 1 : 0) << ',' << r.status << ','
            << r.encode_ns << ',' << r.decode_ns << ',' << r.t << ',' << r.h << ',' << r.k << "\n";
    }
    const auto& f = recs.empty() ? TrialRecord{} : recs.front();
    out << "summary," << sum.trials << ",,,," << format_double(sum.recovery_rate()) << ",,,,,,,,," << sum.certified
        << ',' << (sum.within_certified_budget ? "certified_budget" : "uncertified_budget") << ','
        << format_double(sum.mean_encode_ns) << ',' << format_double(sum.mean_decode_ns) << ',' << f.t << ',' << f.h
        << ',' << f.k << "\n";
    return out.str();
}

inline nlohmann::json to_json(const TrialRecord& r) {
    auto one = [](const std::vector<std::size_t>& v) {
        std::vector<std::size_t> o(v);
        for (auto& x : o) ++x;
        return o;
    };
    return {{"trial", r.trial + 1},
            {"d_size", r.truth.size()},
            {"defectives", r.truth.one_based()},
            {"flips", one(r.flips)},
            {"decoded", r.decoded.one_based()},
            {"exact", r.check.exact},
            {"false_positives", one(r.check.false_positives)},
            {"false_negatives", one(r.check.false_negatives)},
            {"positive_blocks", r.positive_blocks},
            {"accepted_blocks", r.accepted_blocks},
            {"rstar_size", r.rstar_size},
            {"min_true_count", r.min_true_count},
            {"max_false_count", r.max_false_count},
            {"g_good", r.g_good},
            {"certified", r.certified},
            {"status", r.status},
            {"encode_ns", r.encode_ns},
            {"decode_ns", r.decode_ns},
            {"t", r.t},
            {"h", r.h},
            {"k", r.k}};
}

inline nlohmann::json to_json(const Summary& s) {
    return {{"summary", true},
            {"trials", s.trials},
            {"exact", s.exact},
            {"recovery_rate", s.recovery_rate()},
            {"certified_trials", s.certified},
            {"certified_exact", s.certified_exact},
            {"below_threshold_trials", s.below_threshold},
            {"within_certified_budget", s.within_certified_budget},
            {"mean_encode_ns", s.mean_encode_ns},
            {"mean_decode_ns", s.mean_decode_ns}};
}

inline std::string to_jsonl(const std::vector<TrialRecord>& recs, const Summary& sum) {
    std::string out;
    for (const auto& r : recs) out += to_json(r).dump() + "\n";
    out += to_json(sum).dump() + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Benchmark grid
// ---------------------------------------------------------------------------

struct GridPoint {
    std::size_t n, d, u, e;
};

struct BenchRow {
    GridPoint point;
    double p = 0;
    std::size_t h = 0, k = 0, t = 0;
    std::int64_t gen_ns = 0;
    double mean_encode_ns = 0, mean_decode_ns = 0, recovery_rate = 0;
    std::size_t trials = 0;
};

inline std::vector<BenchRow> bench(const std::vector<GridPoint>& grid, const ExperimentConfig& base) {
    if (grid.empty()) throw ParameterError("benchmark grid is empty");
    std::vector<BenchRow> rows;
    for (const auto& pt : grid) {
        ExperimentConfig cfg = base;
        cfg.params.n = pt.n;
        cfg.params.d = pt.d;
        cfg.params.u = pt.u;
        cfg.params.e = pt.e;
        const auto t0 = std::chrono::steady_clock::now();
        const Bundle b = generate_bundle(cfg);
        BenchRow row{pt};
        row.gen_ns = cfg.timings ? elapsed_ns(t0) : 0;
        const auto recs = simulate(b, cfg);
        const auto sum = summarize(b, cfg, recs);
        row.p = b.scheme.params.p;
        row.h = b.scheme.h();
        row.k = b.scheme.k();
        row.t = b.scheme.tests();
        row.mean_encode_ns = sum.mean_encode_ns;
        row.mean_decode_ns = sum.mean_decode_ns;
        row.recovery_rate = sum.recovery_rate();
        row.trials = sum.trials;
        rows.push_back(row);
    }
    return rows;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "# measured values only; asymptotic test-count and decoding-complexity bounds are not reproduced\n";
    out << "n,d,u,e,p,h,k,t,gen_ns,mean_encode_ns,mean_decode_ns,recovery_rate,trials\n";
    for (const auto& r : rows)
        out << r.point.n << ',' << r.point.d << ',' << r.point.u << ',' << r.point.e << ',' << format_double(r.p) << ','
            << r.h << ',' << r.k << ',' << r.t << ',' << r.gen_ns << ',' << format_double(r.mean_encode_ns) << ','
            << format_double(r.mean_decode_ns) << ',' << format_double(r.recovery_rate) << ',' << r.trials << "\n";
    return out.str();
}

}  // namespace tgt::experiment
