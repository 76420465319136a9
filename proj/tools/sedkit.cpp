// Batch command-line surface for the library: parameter audit, latency
// benchmark, weight init, feature extraction, inference, synthetic data,
// gradient checks, and metric evaluation. Exit codes: 0 ok, 1 usage or
// runtime error, 2 validation failure (audit mismatch, gradcheck failure,
// benchmark ordering violation).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "sedkit/events.hpp"
#include "sedkit/features.hpp"
#include "sedkit/gradcheck.hpp"
#include "sedkit/metrics.hpp"
#include "sedkit/model.hpp"
#include "sedkit/rng.hpp"
#include "sedkit/synth.hpp"
#include "sedkit/tensor.hpp"
#include "sedkit/tnsr_io.hpp"

namespace fs = std::filesystem;
using namespace sedkit;

namespace {

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// Every run emits one of these; identical manifests (ignoring elapsed_ms)
// mean identical outputs.
struct Manifest {
    std::vector<std::pair<std::string, std::string>> kv;
    double t0 = now_ms();

    void add(const std::string& k, const std::string& v) { kv.emplace_back(k, v); }
    void add(const std::string& k, long long v) { kv.emplace_back(k, std::to_string(v)); }
    void add(const std::string& k, double v) { kv.emplace_back(k, fmt_g(v)); }

    void finish(const std::string& out_dir) {
        add("elapsed_ms", fmt_g(now_ms() - t0));
        for (const auto& [k, v] : kv) std::cout << "manifest." << k << '=' << v << '\n';
        if (!out_dir.empty()) {
            std::ofstream os(fs::path(out_dir) / "run_manifest.txt");
            if (!os) throw std::runtime_error("cannot write run manifest in " + out_dir);
            for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
        }
    }
};

std::string stem_of(const std::string& path) {
    fs::path p(path);
    std::string s = p.filename().string();
    const auto dot = s.rfind('.');
    return dot == std::string::npos ? s : s.substr(0, dot);
}

ModelConfig load_config(const std::string& path) {
    return path.empty() ? ModelConfig{} : parse_config_file(path);
}

bool is_default_config(const ModelConfig& cfg) {
    ModelConfig base = cfg;
    ModelConfig def;
    base.attention = def.attention;
    return config_to_text(base) == config_to_text(def);
}

// The nine comparison rows on top of a base config.
std::vector<std::pair<std::string, ModelConfig>> comparison_rows(const ModelConfig& base) {
    std::vector<std::pair<std::string, ModelConfig>> rows;
    for (AttentionVariant v :
         {AttentionVariant::none, AttentionVariant::se, AttentionVariant::tse,
          AttentionVariant::fwse, AttentionVariant::tfwse, AttentionVariant::se_tfwse,
          AttentionVariant::tfwse_se, AttentionVariant::c2datt, AttentionVariant::fdy}) {
        ModelConfig cfg = base;
        cfg.attention = v;
        rows.emplace_back(v == AttentionVariant::none ? "baseline" : variant_name(v), cfg);
    }
    return rows;
}

std::vector<double> threshold_grid(int n) {
    if (n < 1) throw std::invalid_argument("threshold grid needs at least one point");
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) g.push_back(static_cast<double>(i) / (n + 1));
    return g;
}

double median_value(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct CheckSet {
    bool ok = true;
    void expect(const std::string& label, bool cond, const std::string& detail) {
        std::cout << "check." << label << '=' << (cond ? "ok" : "FAIL");
        if (!detail.empty()) std::cout << "  # " << detail;
        std::cout << '\n';
        ok = ok && cond;
    }
};

// ---------------------------------------------------------------- audit

int run_audit(const std::string& config_path, std::uint64_t seed) {
    Manifest man;
    man.add("command", std::string("audit"));
    man.add("config", config_path.empty() ? std::string("default") : config_path);
    man.add("seed", static_cast<long long>(seed));

    const ModelConfig base = load_config(config_path);
    const auto rows = comparison_rows(base);

    struct Row {
        std::string name;
        long long total = 0, counted = 0, delta = 0;
    };
    std::vector<Row> table;
    long long base_total = 0;
    for (const auto& [name, cfg] : rows) {
        const CostReport rep = param_audit(cfg);
        ModelParams mp = build(cfg, seed);
        Row r;
        r.name = name;
        r.total = rep.total;
        r.counted = count_params(mp);
        if (name == "baseline") base_total = r.total;
        r.delta = r.total - base_total;
        table.push_back(r);
    }

    std::printf("%-10s %12s %12s %10s\n", "variant", "params", "enumerated", "delta");
    for (const auto& r : table)
        std::printf("%-10s %12lld %12lld %+10lld\n", r.name.c_str(), r.total, r.counted, r.delta);

    for (const auto& r : table) {
        std::cout << "audit." << r.name << ".params=" << r.total << '\n';
        std::cout << "audit." << r.name << ".enumerated=" << r.counted << '\n';
        std::cout << "audit." << r.name << ".delta=" << r.delta << '\n';
    }
    const auto find = [&](const std::string& n) -> const Row& {
        for (const auto& r : table)
            if (r.name == n) return r;
        throw std::logic_error("missing audit row " + n);
    };
    const double ratio = static_cast<double>(find("fdy").total) / base_total;
    std::cout << "audit.fdy.ratio=" << fmt_g(ratio) << '\n';

    CheckSet checks;
    for (const auto& r : table)
        checks.expect("enumeration." + r.name, r.total == r.counted,
                      std::to_string(r.total) + " vs " + std::to_string(r.counted));
    if (is_default_config(base)) {
        checks.expect("delta.se", find("se").delta == 109056, std::to_string(find("se").delta));
        checks.expect("delta.tse", find("tse").delta == 109056, std::to_string(find("tse").delta));
        checks.expect("delta.fwse", find("fwse").delta == 10920, std::to_string(find("fwse").delta));
        checks.expect("delta.tfwse", find("tfwse").delta == 10920,
                      std::to_string(find("tfwse").delta));
        checks.expect("delta.se+tfwse", find("se+tfwse").delta == 119976,
                      std::to_string(find("se+tfwse").delta));
        checks.expect("delta.tfwse+se", find("tfwse+se").delta == 119976,
                      std::to_string(find("tfwse+se").delta));
        checks.expect("delta.c2datt",
                      find("c2datt").delta >= 900 && find("c2datt").delta <= 1500,
                      std::to_string(find("c2datt").delta));
        checks.expect("total.baseline",
                      std::llabs(base_total - 4428000) <= 4428000 / 20,
                      std::to_string(base_total));
        checks.expect("total.fdy",
                      std::llabs(find("fdy").total - 11061000) <=
                          static_cast<long long>(11061000 * 0.03),
                      std::to_string(find("fdy").total));
        checks.expect("ratio.fdy", ratio - 1.0 >= 1.40 && ratio - 1.0 <= 1.60, fmt_g(ratio));
    }
    man.add("checks", std::string(checks.ok ? "pass" : "fail"));
    man.finish("");
    return checks.ok ? 0 : 2;
}

// ---------------------------------------------------------------- bench

int run_bench(const std::string& config_path, int frames, int repeats, std::uint64_t seed) {
    Manifest man;
    man.add("command", std::string("bench"));
    man.add("config", config_path.empty() ? std::string("default") : config_path);
    man.add("frames", static_cast<long long>(frames));
    man.add("repeats", static_cast<long long>(repeats));
    man.add("seed", static_cast<long long>(seed));

    const ModelConfig base = load_config(config_path);
    int pool_t = 1;
    for (const auto& [pf, pt] : base.pooling) pool_t *= pt;
    if (frames < pool_t)
        throw std::invalid_argument("bench: frames must be >= total time pooling (" +
                                    std::to_string(pool_t) + ")");

    Rng rng(seed);
    const TensorF mel = TensorF::random_uniform({1, 1, base.mel_bins, frames}, rng, -1.0, 1.0);

    struct Row {
        std::string name;
        double median_ms = 0.0;
    };
    std::vector<Row> table;
    for (const auto& [name, cfg] : comparison_rows(base)) {
        const ModelParams mp = build(cfg, seed);
        (void)forward(mp, mel);  // warmup
        std::vector<double> times;
        times.reserve(static_cast<std::size_t>(repeats));
        for (int r = 0; r < repeats; ++r) {
            const double t0 = now_ms();
            const ForwardResult fr = forward(mp, mel);
            const double t1 = now_ms();
            ensure_finite(fr.strong, "bench forward output");
            times.push_back(t1 - t0);
        }
        table.push_back({name, median_value(times)});
    }

    const double base_ms = table.front().median_ms;
    std::printf("%-10s %12s %8s\n", "variant", "median_ms", "ratio");
    for (const auto& r : table)
        std::printf("%-10s %12.3f %8.3f\n", r.name.c_str(), r.median_ms, r.median_ms / base_ms);
    for (const auto& r : table) {
        std::cout << "bench." << r.name << ".median_ms=" << fmt_g(r.median_ms) << '\n';
        std::cout << "bench." << r.name << ".ratio=" << fmt_g(r.median_ms / base_ms) << '\n';
    }

    const auto median_of = [&](const std::string& n) {
        for (const auto& r : table)
            if (r.name == n) return r.median_ms;
        throw std::logic_error("missing bench row " + n);
    };
    const double fdy_overhead = median_of("fdy") - base_ms;
    CheckSet checks;
    checks.expect("order.fdy_slower_than_baseline", median_of("fdy") > base_ms,
                  fmt_g(median_of("fdy")) + " vs " + fmt_g(base_ms));
    for (const std::string n : {"se", "tse", "fwse", "tfwse", "se+tfwse", "tfwse+se", "c2datt"})
        checks.expect("order.overhead." + n, median_of(n) - base_ms < fdy_overhead,
                      fmt_g(median_of(n) - base_ms) + " vs " + fmt_g(fdy_overhead));
    man.add("checks", std::string(checks.ok ? "pass" : "fail"));
    man.finish("");
    return checks.ok ? 0 : 2;
}

// ---------------------------------------------------------------- init

int run_init(const std::string& config_path, std::uint64_t seed, const std::string& out) {
    Manifest man;
    man.add("command", std::string("init"));
    man.add("config", config_path.empty() ? std::string("default") : config_path);
    man.add("seed", static_cast<long long>(seed));
    man.add("out", out);

    const ModelConfig cfg = load_config(config_path);
    ModelParams mp = build(cfg, seed);
    save_weights(mp, out);
    {
        std::ofstream os(fs::path(out) / "config.txt");
        if (!os) throw std::runtime_error("cannot write config in " + out);
        os << config_to_text(cfg);
    }
    std::cout << "init.params=" << count_params(mp) << '\n';
    std::cout << "init.variant=" << variant_name(cfg.attention) << '\n';
    man.finish(out);
    return 0;
}

// ---------------------------------------------------------------- features

int run_features(const std::vector<std::string>& inputs, const std::string& out) {
    Manifest man;
    man.add("command", std::string("features"));
    for (const auto& p : inputs) man.add("input", p);
    man.add("out", out);

    std::vector<std::pair<std::string, TensorF>> mels;
    for (const auto& path : inputs) {
        const AudioClip clip = read_wav(path);
        MelSpec ms = compute_melspec(clip);
        std::cout << "features." << stem_of(path) << ".frames=" << ms.values.dim(1) << '\n';
        mels.emplace_back(stem_of(path) + ".mel", std::move(ms.values));
    }
    std::vector<std::pair<std::string, const TensorF*>> named;
    named.reserve(mels.size());
    for (const auto& [name, t] : mels) named.emplace_back(name, &t);
    save_tensors(out, named);
    man.finish(out);
    return 0;
}

// ---------------------------------------------------------------- infer

int run_infer(const std::vector<std::string>& inputs, const std::string& weights,
              const std::string& config_path, std::uint64_t seed, double threshold,
              int median_window, const std::string& out) {
    Manifest man;
    man.add("command", std::string("infer"));
    for (const auto& p : inputs) man.add("input", p);
    man.add("weights", weights.empty() ? std::string("random-init") : weights);
    man.add("config", config_path.empty() ? std::string("default") : config_path);
    man.add("seed", static_cast<long long>(seed));
    man.add("threshold", threshold);
    man.add("median_window", static_cast<long long>(median_window));
    man.add("out", out);

    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("infer: threshold must be in (0,1)");
    if (median_window < 1 || median_window % 2 == 0)
        throw std::invalid_argument("infer: median window must be odd and >= 1");

    std::string cfg_path = config_path;
    if (cfg_path.empty() && !weights.empty()) {
        const fs::path stored = fs::path(weights) / "config.txt";
        if (fs::exists(stored)) cfg_path = stored.string();
    }
    const ModelConfig cfg = load_config(cfg_path);
    ModelParams mp = build(cfg, seed);
    if (!weights.empty()) load_weights(mp, weights);

    int pool_t = 1;
    for (const auto& [pf, pt] : cfg.pooling) pool_t *= pt;
    const double frame_dur = static_cast<double>(kHopLength) / kSampleRate * pool_t;

    std::vector<std::pair<std::string, TensorF>> probs_named;
    std::vector<ClipEvents> decoded;
    for (const auto& path : inputs) {
        TensorF mel;
        if (path.size() >= 5 && path.substr(path.size() - 5) == ".tnsr") {
            const TensorF t = read_tnsr(path);
            if (t.ndim() != 2 || t.dim(0) != cfg.mel_bins)
                throw std::runtime_error("infer: " + path + " is not a [" +
                                         std::to_string(cfg.mel_bins) + ", T] feature tensor");
            mel = t;
        } else {
            mel = compute_melspec(read_wav(path)).values;
        }
        TensorF x({1, 1, mel.dim(0), mel.dim(1)});
        std::copy(mel.data(), mel.data() + mel.numel(), x.data());

        const ForwardResult fr = forward(mp, x);
        const int tp = fr.strong.dim(1), nc = fr.strong.dim(2);
        TensorF probs({tp, nc});
        std::copy(fr.strong.data(), fr.strong.data() + fr.strong.numel(), probs.data());

        std::string id = stem_of(path);
        if (id.size() > 4 && id.substr(id.size() - 4) == ".mel") id = id.substr(0, id.size() - 4);
        const TensorF filtered = median_window > 1 ? median_filter(probs, median_window) : probs;
        ClipEvents ev = decode_events(filtered, threshold, frame_dur, id, tp * frame_dur);
        std::cout << "infer." << id << ".frames=" << tp << '\n';
        std::cout << "infer." << id << ".events=" << ev.events.size() << '\n';
        decoded.push_back(std::move(ev));
        probs_named.emplace_back(id + ".probs", std::move(probs));
    }

    std::vector<std::pair<std::string, const TensorF*>> named;
    named.reserve(probs_named.size());
    for (const auto& [name, t] : probs_named) named.emplace_back(name, &t);
    save_tensors(out, named);
    write_events_tsv((fs::path(out) / "events.tsv").string(), decoded);
    std::cout << "infer.events_file=" << (fs::path(out) / "events.tsv").string() << '\n';
    man.finish(out);
    return 0;
}

// ---------------------------------------------------------------- synth

int run_synth(std::uint64_t seed, int n_clips, const std::string& out) {
    Manifest man;
    man.add("command", std::string("synth"));
    man.add("seed", static_cast<long long>(seed));
    man.add("n_clips", static_cast<long long>(n_clips));
    man.add("out", out);

    const std::vector<SynthClip> corpus = synth_corpus(seed, n_clips);
    const std::string ref = write_corpus(out, corpus);
    std::size_t n_events = 0;
    for (const auto& c : corpus) n_events += c.labels.events.size();
    std::cout << "synth.clips=" << corpus.size() << '\n';
    std::cout << "synth.events=" << n_events << '\n';
    std::cout << "synth.ref=" << ref << '\n';
    man.finish(out);
    return 0;
}

// ---------------------------------------------------------------- gradcheck

int run_gradcheck_cmd(const std::string& variant, std::uint64_t seed, int instances, double tol) {
    Manifest man;
    man.add("command", std::string("gradcheck"));
    man.add("variant", variant);
    man.add("seed", static_cast<long long>(seed));
    man.add("instances", static_cast<long long>(instances));
    man.add("tol", tol);

    const auto results = run_gradcheck(variant, seed, instances, tol);
    bool ok = true;
    for (const auto& r : results) {
        std::printf("%-12s instances=%d max_rel_err=%.3e %s\n", r.name.c_str(), r.instances,
                    r.max_rel_err, r.pass ? "pass" : "FAIL");
        ok = ok && r.pass;
    }
    for (const auto& r : results) {
        std::cout << "gradcheck." << r.name << ".max_rel_err=" << fmt_g(r.max_rel_err) << '\n';
        std::cout << "gradcheck." << r.name << ".pass=" << (r.pass ? 1 : 0) << '\n';
    }
    man.add("checks", std::string(ok ? "pass" : "fail"));
    man.finish("");
    return ok ? 0 : 2;
}

// ---------------------------------------------------------------- eval

int run_eval(const std::string& ref_path, const std::string& est_path,
             const std::string& probs_dir, double collar, int grid, int median_window,
             double threshold, double frame_dur, const std::string& out) {
    Manifest man;
    man.add("command", std::string("eval"));
    man.add("ref", ref_path);
    if (!est_path.empty()) man.add("est", est_path);
    if (!probs_dir.empty()) man.add("probs", probs_dir);
    man.add("collar", collar);
    man.add("grid", static_cast<long long>(grid));
    man.add("median_window", static_cast<long long>(median_window));
    man.add("threshold", threshold);
    man.add("frame_dur", frame_dur);
    if (!out.empty()) man.add("out", out);

    if (est_path.empty() == probs_dir.empty())
        throw std::invalid_argument("eval: exactly one of --est / --probs is required");
    if (median_window < 0 || (median_window > 1 && median_window % 2 == 0))
        throw std::invalid_argument("eval: median window must be odd (or 0/1 to disable)");

    const std::vector<ClipEvents> ref = read_events_tsv(ref_path);

    F1Result f1;
    std::vector<std::pair<ClipEvents, TensorF>> dataset;
    std::vector<int> windows;

    if (!est_path.empty()) {
        // Event-list route: CB-F1 on the lists, detection score on indicator
        // rasterizations (no filtering; the lists are already discrete).
        const std::vector<ClipEvents> est = read_events_tsv(est_path);
        f1 = collar_f1(ref, est, collar);

        std::map<std::string, const ClipEvents*> by_id;
        std::vector<std::string> order;
        for (const auto& c : ref)
            if (by_id.emplace(c.clip_id, nullptr).second) order.push_back(c.clip_id);
        for (const auto& c : est)
            if (by_id.emplace(c.clip_id, &c).second) order.push_back(c.clip_id);
            else by_id[c.clip_id] = &c;
        std::map<std::string, const ClipEvents*> ref_by_id;
        for (const auto& c : ref) ref_by_id[c.clip_id] = &c;
        for (const auto& id : order) {
            const ClipEvents* r = ref_by_id.count(id) ? ref_by_id.at(id) : nullptr;
            ClipEvents rc = r ? *r : ClipEvents{id, 10.0, {}};
            const ClipEvents* e = by_id.at(id);
            const ClipEvents ec = e ? *e : ClipEvents{id, rc.duration, {}};
            const int frames = static_cast<int>(std::ceil(rc.duration / frame_dur));
            dataset.emplace_back(std::move(rc), rasterize(ec, frames, frame_dur));
        }
    } else {
        const auto named = load_tensors(probs_dir);
        std::map<std::string, const TensorF*> by_name;
        for (const auto& [name, t] : named) {
            std::string id = name;
            if (id.size() > 6 && id.substr(id.size() - 6) == ".probs")
                id = id.substr(0, id.size() - 6);
            by_name[id] = &t;
        }
        if (median_window > 1) windows.push_back(median_window);
        std::vector<ClipEvents> est;
        for (const auto& rc : ref) {
            const auto it = by_name.find(rc.clip_id);
            if (it == by_name.end())
                throw std::runtime_error("eval: no probability tensor for clip " + rc.clip_id);
            const TensorF& probs = *it->second;
            const TensorF filtered =
                median_window > 1 ? median_filter(probs, median_window) : probs;
            est.push_back(decode_events(filtered, threshold, frame_dur, rc.clip_id,
                                        probs.dim(0) * frame_dur));
            dataset.emplace_back(rc, probs);
        }
        f1 = collar_f1(ref, est, collar);
    }

    PsdsConfig s1 = PsdsConfig::scenario1();
    PsdsConfig s2 = PsdsConfig::scenario2();
    s1.thresholds = threshold_grid(grid);
    s2.thresholds = threshold_grid(grid);
    const PsdsResult p1 = psds(dataset, s1, frame_dur, windows);
    const PsdsResult p2 = psds(dataset, s2, frame_dur, windows);

    const auto& names = class_names();
    std::printf("%-28s %10s %6s %6s %6s\n", "class", "f1", "tp", "fp", "fn");
    for (std::size_t k = 0; k < names.size(); ++k)
        std::printf("%-28s %10.4f %6lld %6lld %6lld\n", names[k].c_str(), f1.per_class[k],
                    f1.tp[k], f1.fp[k], f1.fn[k]);
    std::printf("%-28s %10.4f\n", "macro", f1.macro);
    std::printf("psds scenario1 %.6f\n", p1.score);
    std::printf("psds scenario2 %.6f\n", p2.score);
    for (const auto& w : p1.warnings) std::cout << "eval.warning=" << w << '\n';

    std::vector<std::string> lines;
    for (std::size_t k = 0; k < names.size(); ++k)
        lines.push_back("eval.f1." + names[k] + "=" + fmt_g(f1.per_class[k]));
    lines.push_back("eval.f1.macro=" + fmt_g(f1.macro));
    lines.push_back("eval.psds1=" + fmt_g(p1.score));
    lines.push_back("eval.psds2=" + fmt_g(p2.score));
    for (const auto& l : lines) std::cout << l << '\n';
    if (!out.empty()) {
        fs::create_directories(out);
        std::ofstream os(fs::path(out) / "scores.txt");
        if (!os) throw std::runtime_error("cannot write scores in " + out);
        for (const auto& l : lines) os << l << '\n';
    }
    man.finish(out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sound event detection toolkit"};
    app.require_subcommand(1);
    int rc = 0;

    std::string config_path, out, weights, variant = "all";
    std::string ref_path, est_path, probs_dir;
    std::vector<std::string> inputs;
    std::uint64_t seed = 1;
    int frames = 64, repeats = 5, n_clips = 10, instances = 20;
    int median_window = 7, grid = 50;
    double threshold = 0.5, tol = 1e-4, collar = 0.2, frame_dur = 0.064;

    auto* audit = app.add_subcommand("audit", "parameter cost table for the nine variants");
    audit->add_option("--config", config_path, "base model config file");
    audit->add_option("--seed", seed, "init seed for the enumeration cross-check");
    audit->callback([&] { rc = run_audit(config_path, seed); });

    auto* bench = app.add_subcommand("bench", "median forward latency per variant");
    bench->add_option("--config", config_path, "base model config file");
    bench->add_option("--frames", frames, "input frame count")->check(CLI::Range(1, 1 << 20));
    bench->add_option("--repeats", repeats, "timed repeats (>= 3)")->check(CLI::Range(3, 10000));
    bench->add_option("--seed", seed, "init and input seed");
    bench->callback([&] { rc = run_bench(config_path, frames, repeats, seed); });

    auto* init = app.add_subcommand("init", "build a seeded model and save its weights");
    init->add_option("--config", config_path, "model config file");
    init->add_option("--seed", seed, "init seed");
    init->add_option("--out", out, "output directory")->required();
    init->callback([&] { rc = run_init(config_path, seed, out); });

    auto* features = app.add_subcommand("features", "log-mel features for WAV inputs");
    features->add_option("inputs", inputs, "16 kHz mono PCM WAV files")
        ->required()
        ->check(CLI::ExistingFile);
    features->add_option("--out", out, "output directory")->required();
    features->callback([&] { rc = run_features(inputs, out); });

    auto* infer = app.add_subcommand("infer", "event detection over WAV or feature inputs");
    infer->add_option("inputs", inputs, "WAV or .tnsr feature files")
        ->required()
        ->check(CLI::ExistingFile);
    infer->add_option("--weights", weights, "weight directory from init")
        ->check(CLI::ExistingDirectory);
    infer->add_option("--config", config_path, "model config file");
    infer->add_option("--seed", seed, "init seed when no weights are given");
    infer->add_option("--threshold", threshold, "decision threshold (default 0.5)");
    infer->add_option("--median-window", median_window, "odd median filter window (default 7)");
    infer->add_option("--out", out, "output directory")->required();
    infer->callback([&] {
        rc = run_infer(inputs, weights, config_path, seed, threshold, median_window, out);
    });

    auto* synth = app.add_subcommand("synth", "labeled synthetic 10 s clips");
    synth->add_option("--seed", seed, "corpus seed");
    synth->add_option("--n-clips", n_clips, "clip count")->check(CLI::Range(1, 100000));
    synth->add_option("--out", out, "output directory")->required();
    synth->callback([&] { rc = run_synth(seed, n_clips, out); });

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
    gradcheck->add_option("--variant", variant,
                          "all, or one of: conv linear activations pool se tse fwse tfwse c2datt fdy");
    gradcheck->add_option("--seed", seed, "instance seed");
    gradcheck->add_option("--instances", instances, "instances per check")
        ->check(CLI::Range(1, 10000));
    gradcheck->add_option("--tol", tol, "max relative error");
    gradcheck->callback([&] { rc = run_gradcheck_cmd(variant, seed, instances, tol); });

    auto* eval = app.add_subcommand("eval", "collar F1 and detection scores");
    eval->add_option("--ref", ref_path, "reference event TSV")->required()->check(CLI::ExistingFile);
    eval->add_option("--est", est_path, "estimated event TSV")->check(CLI::ExistingFile);
    eval->add_option("--probs", probs_dir, "probability tensor directory from infer")
        ->check(CLI::ExistingDirectory);
    eval->add_option("--collar", collar, "onset collar in seconds (default 0.2)");
    eval->add_option("--grid", grid, "operating point count (default 50)")
        ->check(CLI::Range(1, 1000));
    eval->add_option("--median-window", median_window,
                     "odd median window for --probs (default 7, 0 disables)");
    eval->add_option("--threshold", threshold, "decision threshold for --probs F1");
    eval->add_option("--frame-dur", frame_dur, "probability frame duration in seconds");
    eval->add_option("--out", out, "directory for scores.txt and the run manifest");
    eval->callback([&] {
        rc = run_eval(ref_path, est_path, probs_dir, collar, grid, median_window, threshold,
                      frame_dur, out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return rc;
}
