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

// Command-line front end: gen, verify, encode, decode, simulate, bench.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tgt/tgt.hpp"

namespace {

enum Exit : int {
    kOk = 0,
    kUsage = 2,
    kConstruction = 3,
    kVerification = 4,
    kBudget = 5,
};

namespace fs = std::filesystem;
using tgt::experiment::ExperimentConfig;

struct SchemeFlags {
    std::size_t n = 0, d = 0, u = 0, e = 0;
    std::string p = "auto";
    std::uint64_t seed = 1;
    double c = 3.0, c_g = 2.0;
    std::size_t max_attempts = 50;
    std::size_t validation_sets = 200;
    std::uint64_t exhaustive_limit = 20'000'000;

    void attach(CLI::App* app, bool required) {
        auto* on = app->add_option("--n", n, "number of items");
        auto* od = app->add_option("--d", d, "maximum number of defectives");
        auto* ou = app->add_option("--u", u, "threshold");
        if (required) {
            on->required();
            od->required();
            ou->required();
        }
        app->add_option("--e", e, "error budget (flips)");
        app->add_option("--p", p, "construction parameter in [0,1), or 'auto'");
        app->add_option("--seed", seed, "64-bit seed");
        app->add_option("--c", c, "row constant for the disjunct matrix");
        app->add_option("--c-g", c_g, "row constant for the good matrix");
        app->add_option("--max-attempts", max_attempts, "construction retries");
        app->add_option("--validation-sets", validation_sets, "sampled sets per cardinality when validating G");
        app->add_option("--exhaustive-limit", exhaustive_limit, "validate G on every D when at most this many exist");
    }

    ExperimentConfig config() const {
        ExperimentConfig cfg;
        cfg.params = {n, d, u, e, 0.0};
        if (p == "auto") {
            cfg.auto_p = true;
        } else {
            cfg.auto_p = false;
            try {
                std::size_t used = 0;
                cfg.params.p = std::stod(p, &used);
                if (used != p.size()) throw std::invalid_argument(p);
            } catch (const std::exception&) {
                throw tgt::ParameterError("--p must be a number in [0,1) or 'auto'");
            }
        }
        cfg.seed = seed;
        cfg.c = c;
        cfg.c_g = c_g;
        cfg.max_attempts = max_attempts;
        cfg.validation_sets = validation_sets;
        cfg.exhaustive_limit = exhaustive_limit;
        cfg.budget = tgt::experiment::budget_from_env();
        return cfg;
    }
};

std::vector<std::size_t> parse_index_list(const std::string& text, std::size_t n) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t v = 0;
        try {
            std::size_t used = 0;
            v = std::stoul(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw tgt::ParameterError("bad index '" + item + "'");
        }
        if (v < 1 || v > n) throw tgt::ParameterError("index " + item + " outside [1, " + std::to_string(n) + "]");
        out.push_back(v - 1);
    }
    return out;
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty() || out_path == "-")
        std::cout << text;
    else
        tgt::io::write_file(out_path, text);
}

int cmd_gen(const SchemeFlags& flags, const std::string& out) {
    if (out.empty()) throw tgt::ParameterError("gen needs --out <directory>");
    const auto bundle = tgt::experiment::generate_bundle(flags.config());
    tgt::experiment::write_bundle(out, bundle);
    std::cout << bundle.meta.at("dimensions").dump() << "\n";
    return kOk;
}

struct VerifyFlags {
    std::string in;
    std::string mode = "exhaustive";
    std::optional<std::size_t> d;
    std::optional<std::size_t> u;
    std::size_t e = 0;
    std::uint64_t trials = 100'000;
    std::uint64_t seed = 1;
    std::string defectives;
    std::string out;
};

int cmd_verify(const VerifyFlags& f) {
    const auto file = tgt::io::deserialize_matrix(tgt::io::read_file(f.in));
    const auto& m = file.matrix;
    const std::uint64_t budget = tgt::experiment::budget_from_env();
    auto from_header = [&](const char* key) -> std::optional<std::size_t> {
        if (file.params.contains(key)) return file.params.at(key).get<std::size_t>();
        return std::nullopt;
    };
    nlohmann::json report;
    bool ok = false;
    if (f.mode == "exhaustive" || f.mode == "sampled") {
        const auto order = f.d ? f.d : from_header("order");
        if (!order) throw tgt::ParameterError("verify needs --d (disjunct order)");
        const auto mode = f.mode == "exhaustive" ? tgt::VerifyMode::exhaustive : tgt::VerifyMode::sampled;
        const auto cert = tgt::verify_disjunct(m, *order, mode, f.trials, budget, f.seed);
        report = cert;
        ok = cert.verified;
    } else if (f.mode == "threshold") {
        const auto d = f.d ? f.d : from_header("d");
        const auto u = f.u ? f.u : from_header("u");
        if (!d || !u) throw tgt::ParameterError("threshold mode needs --d and --u");
        const auto rep = tgt::verify_threshold_disjunct(m, *d, *u, f.e, budget);
        report = rep;
        ok = rep.passed;
    } else if (f.mode == "good") {
        const auto u = f.u ? f.u : from_header("u");
        if (!u) throw tgt::ParameterError("good mode needs --u");
        const tgt::DefectiveSet D(parse_index_list(f.defectives, m.cols()));
        const auto rep = tgt::is_good_for(m, D, *u, f.e);
        report = rep;
        ok = rep.is_good;
    } else {
        throw tgt::ParameterError("unknown mode '" + f.mode + "'");
    }
    report["mode"] = f.mode;
    report["file"] = f.in;
    emit(f.out, report.dump(2) + "\n");
    return ok ? kOk : kVerification;
}

int cmd_encode(const std::string& bundle_dir, const std::string& defectives, std::size_t e, std::uint64_t seed,
               const std::string& out) {
    const auto b = tgt::experiment::read_bundle(bundle_dir);
    const tgt::DefectiveSet D(parse_index_list(defectives, b.scheme.n()));
    auto y = tgt::flatten(tgt::encode(b.scheme, D.to_vector(b.scheme.n())));
    if (e > 0) {
        tgt::Rng rng(seed);
        auto inj = tgt::inject_errors(y, e, rng);
        y = inj.y;
        nlohmann::json flips = tgt::DefectiveSet(inj.flipped).one_based();
        std::cerr << "flipped positions: " << flips.dump() << "\n";
    }
    emit(out, tgt::io::serialize(y));
    return kOk;
}

int cmd_decode(const std::string& bundle_dir, const std::string& in, std::optional<std::size_t> e,
               const std::string& trace_path, const std::string& out) {
    const auto b = tgt::experiment::read_bundle(bundle_dir);
    const auto y = tgt::io::deserialize_vector(tgt::io::read_file(in));
    const auto blocks = tgt::split_outcomes(b.scheme, y);
    const std::size_t budget = e.value_or(b.certified_e());
    const auto res = tgt::dec_natgt(b.scheme, blocks, budget);
    if (!trace_path.empty()) {
        std::string lines;
        for (const auto& tr : res.trace) lines += nlohmann::json(tr).dump() + "\n";
        tgt::io::write_file(trace_path, lines);
    }
    nlohmann::json counts = nlohmann::json::object();
    for (auto [j, c] : res.candidates.counts) counts[std::to_string(j + 1)] = c;
    nlohmann::json report = {{"defectives", res.defectives.one_based()},
                             {"status", tgt::to_string(res.status)},
                             {"e", budget},
                             {"accepted_blocks", res.accepted_blocks()},
                             {"candidate_counts", counts}};
    emit(out, report.dump() + "\n");
    return kOk;
}

struct SimFlags {
    std::string bundle;
    std::size_t trials = 100;
    std::string placement = "uniform";
    bool up_to = false;
    bool allow_below_u = false;
    bool no_timings = false;
    std::string out;
};

ExperimentConfig sim_config(const SchemeFlags& sf, const SimFlags& f) {
    ExperimentConfig cfg = sf.config();
    cfg.trials = f.trials;
    cfg.placement = tgt::experiment::placement_from_string(f.placement);
    cfg.flip_count = f.up_to ? tgt::FlipCount::up_to : tgt::FlipCount::exact;
    cfg.allow_below_u = f.allow_below_u;
    cfg.timings = !f.no_timings;
    if (cfg.trials == 0) throw tgt::ParameterError("--trials must be at least 1");
    return cfg;
}

int cmd_simulate(const SchemeFlags& sf, const SimFlags& f) {
    ExperimentConfig cfg = sim_config(sf, f);
    tgt::experiment::Bundle b = [&] {
        if (!f.bundle.empty()) return tgt::experiment::read_bundle(f.bundle);
        cfg.validate();
        return tgt::experiment::generate_bundle(cfg);
    }();
    if (!f.bundle.empty()) {
        // Scheme parameters come from the bundle; --e sets the injected flips.
        const std::size_t e = cfg.params.e;
        cfg.params = b.scheme.params;
        cfg.params.e = e;
    }
    const auto recs = tgt::experiment::simulate(b, cfg);
    const auto sum = tgt::experiment::summarize(b, cfg, recs);
    if (!f.out.empty()) {
        tgt::io::write_file(f.out + ".csv", tgt::experiment::to_csv(recs, sum));
        tgt::io::write_file(f.out + ".jsonl", tgt::experiment::to_jsonl(recs, sum));
    }
    std::cout << tgt::experiment::to_json(sum).dump() << "\n";
    if (!sum.within_certified_budget)
        std::cerr << "warning: " << cfg.params.e << " flips exceed the bundle's certified budget of "
                  << b.certified_e() << "; results are uncertified\n";
    return kOk;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stoul(item));
        } catch (const std::exception&) {
            throw tgt::ParameterError("bad grid value '" + item + "'");
        }
    }
    return out;
}

int cmd_bench(const SchemeFlags& sf, const std::string& grid_n, const std::string& grid_d, const std::string& grid_u,
              const std::string& grid_e, std::size_t trials, bool no_timings, const std::string& out) {
    ExperimentConfig cfg = sf.config();
    cfg.trials = trials;
    cfg.timings = !no_timings;
    if (trials == 0) throw tgt::ParameterError("--trials must be at least 1");
    auto or_single = [](const std::string& list, std::size_t fallback) {
        auto v = parse_size_list(list);
        if (list.empty() && fallback) v.push_back(fallback);
        return v;
    };
    const auto ns = or_single(grid_n, sf.n);
    const auto ds = or_single(grid_d, sf.d);
    const auto us = or_single(grid_u, sf.u);
    auto es = parse_size_list(grid_e);
    if (grid_e.empty()) es.push_back(sf.e);
    std::vector<tgt::experiment::GridPoint> grid;
    for (auto n : ns)
        for (auto d : ds)
            for (auto u : us)
                for (auto e : es) grid.push_back({n, d, u, e});
    const auto rows = tgt::experiment::bench(grid, cfg);
    emit(out, tgt::experiment::bench_csv(rows));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Threshold group testing: constructions, encoding, decoding and experiments"};
    app.require_subcommand(1);

    SchemeFlags gen_flags;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "construct and certify a scheme bundle");
    gen_flags.attach(gen, true);
    gen->add_option("--out", gen_out, "bundle directory")->required();

    VerifyFlags vf;
    auto* verify = app.add_subcommand("verify", "check a matrix file against a disjunctness definition");
    verify->add_option("path,--in", vf.in, "matrix file")->required();
    verify->add_option("--mode", vf.mode, "exhaustive | sampled | threshold | good");
    verify->add_option("--d", vf.d, "disjunct order (exhaustive/sampled) or max critical-set size (threshold)");
    verify->add_option("--u", vf.u, "threshold (threshold/good modes)");
    verify->add_option("--e", vf.e, "error budget (threshold/good modes)");
    verify->add_option("--trials", vf.trials, "draws in sampled mode");
    verify->add_option("--seed", vf.seed, "seed for sampled mode");
    verify->add_option("--defectives", vf.defectives, "comma-separated 1-based items (good mode)");
    verify->add_option("--out", vf.out, "certificate JSON path (default stdout)");

    std::string enc_bundle, enc_def, enc_out;
    std::size_t enc_e = 0;
    std::uint64_t enc_seed = 1;
    auto* enc = app.add_subcommand("encode", "outcome vector for a defective set");
    enc->add_option("--bundle", enc_bundle, "bundle directory")->required();
    enc->add_option("--defectives", enc_def, "comma-separated 1-based items");
    enc->add_option("--e", enc_e, "flip this many uniformly chosen outcomes");
    enc->add_option("--seed", enc_seed, "seed for flips");
    enc->add_option("--out", enc_out, "vector file (default stdout)");

    std::string dec_bundle, dec_in, dec_trace, dec_out;
    std::optional<std::size_t> dec_e;
    auto* dec = app.add_subcommand("decode", "recover the defective set from an outcome vector");
    dec->add_option("--bundle", dec_bundle, "bundle directory")->required();
    dec->add_option("--in", dec_in, "outcome vector file")->required();
    dec->add_option("--e", dec_e, "error budget (default: the bundle's)");
    dec->add_option("--trace", dec_trace, "per-block JSONL trace output");
    dec->add_option("--out", dec_out, "result JSON (default stdout)");

    SchemeFlags sim_flags;
    SimFlags sf;
    auto* sim = app.add_subcommand("simulate", "randomized encode/flip/decode trials");
    sim_flags.attach(sim, false);
    sim->add_option("--bundle", sf.bundle, "existing bundle (otherwise one is generated from the flags)");
    sim->add_option("--trials", sf.trials, "number of trials");
    sim->add_option("--placement", sf.placement, "uniform | starve | spoof");
    sim->add_flag("--up-to", sf.up_to, "flip a uniform number of outcomes in [0, e]");
    sim->add_flag("--allow-below-u", sf.allow_below_u, "sample |D| from [1, d]");
    sim->add_flag("--no-timings", sf.no_timings, "write 0 for durations");
    sim->add_option("--out", sf.out, "output prefix for .csv and .jsonl");

    SchemeFlags bench_flags;
    std::string grid_n, grid_d, grid_u, grid_e, bench_out;
    std::size_t bench_trials = 50;
    bool bench_no_timings = false;
    auto* bench = app.add_subcommand("bench", "measure dimensions, timings and recovery over a grid");
    bench_flags.attach(bench, false);
    bench->add_option("--grid-n", grid_n, "comma-separated n values");
    bench->add_option("--grid-d", grid_d, "comma-separated d values");
    bench->add_option("--grid-u", grid_u, "comma-separated u values");
    bench->add_option("--grid-e", grid_e, "comma-separated e values");
    bench->add_option("--trials", bench_trials, "trials per grid point");
    bench->add_flag("--no-timings", bench_no_timings, "write 0 for durations");
    bench->add_option("--out", bench_out, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*gen) return cmd_gen(gen_flags, gen_out);
        if (*verify) return cmd_verify(vf);
        if (*enc) return cmd_encode(enc_bundle, enc_def, enc_e, enc_seed, enc_out);
        if (*dec) return cmd_decode(dec_bundle, dec_in, dec_e, dec_trace, dec_out);
        if (*sim) return cmd_simulate(sim_flags, sf);
        if (*bench) return cmd_bench(bench_flags, grid_n, grid_d, grid_u, grid_e, bench_trials, bench_no_timings, bench_out);
    } catch (const tgt::ConstructionError& e) {
        std::cerr << "construction failed: " << e.what() << "\n";
        return kConstruction;
    } catch (const tgt::BudgetError& e) {
        std::cerr << "budget exceeded: " << e.what() << "\n"
                  << "hint: use --mode sampled or raise TGT_BUDGET\n";
        return kBudget;
    } catch (const tgt::ParameterError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const tgt::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kUsage;
    } catch (const tgt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
