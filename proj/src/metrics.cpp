#include "sedkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace sedkit {

TensorF median_filter(const TensorF& probs, const std::vector<int>& windows) {
    if (probs.ndim() != 2) throw std::invalid_argument("median_filter: input must be [T,K]");
    const int T = probs.dim(0), K = probs.dim(1);
    if (static_cast<int>(windows.size()) != K)
        throw std::invalid_argument("median_filter: need one window length per class");
    for (int w : windows)
        if (w < 1 || w % 2 == 0) throw std::invalid_argument("median_filter: windows must be odd and >= 1");
    TensorF out({T, K});
    std::vector<float> buf;
    for (int k = 0; k < K; ++k) {
        const int h = windows[static_cast<std::size_t>(k)] / 2;
        buf.resize(static_cast<std::size_t>(windows[static_cast<std::size_t>(k)]));
        for (int t = 0; t < T; ++t) {
            for (int j = -h; j <= h; ++j) {
                const int src = std::clamp(t + j, 0, T - 1);  // edge replication
                buf[static_cast<std::size_t>(j + h)] = probs.at(src, k);
            }
            auto mid = buf.begin() + h;
            std::nth_element(buf.begin(), mid, buf.end());
            out.at(t, k) = *mid;
        }
    }
    return out;
}

TensorF median_filter(const TensorF& probs, int window) {
    if (probs.ndim() != 2) throw std::invalid_argument("median_filter: input must be [T,K]");
    return median_filter(probs, std::vector<int>(static_cast<std::size_t>(probs.dim(1)), window));
}

ClipEvents decode_events(const TensorF& probs, double threshold, double frame_dur_s,
                         const std::string& clip_id, double duration_s) {
    if (probs.ndim() != 2) throw std::invalid_argument("decode_events: input must be [T,K]");
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("decode_events: threshold must be in (0,1)");
    if (frame_dur_s <= 0.0) throw std::invalid_argument("decode_events: frame duration must be > 0");
    const int T = probs.dim(0), K = probs.dim(1);
    ClipEvents out;
    out.clip_id = clip_id;
    out.duration = duration_s;
    for (int k = 0; k < K; ++k) {
        int t = 0;
        while (t < T) {
            if (probs.at(t, k) >= threshold) {
                int j = t;
                while (j + 1 < T && probs.at(j + 1, k) >= threshold) ++j;
                out.events.push_back({k, t * frame_dur_s, (j + 1) * frame_dur_s});
                t = j + 1;
            } else {
                ++t;
            }
        }
    }
    return out;
}

namespace {

struct ClipPair {
    const ClipEvents* ref = nullptr;
    const ClipEvents* est = nullptr;
};

std::vector<ClipPair> pair_clips(const std::vector<ClipEvents>& ref,
                                 const std::vector<ClipEvents>& est) {
    std::map<std::string, ClipPair> by_id;
    std::vector<std::string> order;
    for (const auto& c : ref) {
        if (by_id.count(c.clip_id)) throw std::invalid_argument("duplicate reference clip id '" + c.clip_id + "'");
        by_id[c.clip_id].ref = &c;
        order.push_back(c.clip_id);
    }
    for (const auto& c : est) {
        auto& slot = by_id[c.clip_id];
        if (slot.est) throw std::invalid_argument("duplicate estimate clip id '" + c.clip_id + "'");
        if (!slot.ref) order.push_back(c.clip_id);
        slot.est = &c;
    }
    std::vector<ClipPair> out;
    out.reserve(order.size());
    for (const auto& id : order) out.push_back(by_id[id]);
    return out;
}

std::vector<const Event*> class_events(const ClipEvents* clip, int k) {
    std::vector<const Event*> out;
    if (clip)
        for (const auto& e : clip->events)
            if (e.class_id == k) out.push_back(&e);
    std::sort(out.begin(), out.end(),
              [](const Event* a, const Event* b) { return a->onset < b->onset; });
    return out;
}

double overlap(const Event& a, const Event& b) {
    return std::max(0.0, std::min(a.offset, b.offset) - std::max(a.onset, b.onset));
}

}  // namespace

F1Result collar_f1(const std::vector<ClipEvents>& ref, const std::vector<ClipEvents>& est,
                   double collar_s) {
    if (collar_s < 0.0) throw std::invalid_argument("collar_f1: collar must be >= 0");
    F1Result res;
    res.tp.assign(kNumClasses, 0);
    res.fp.assign(kNumClasses, 0);
    res.fn.assign(kNumClasses, 0);
    for (const auto& pair : pair_clips(ref, est)) {
        for (int k = 0; k < kNumClasses; ++k) {
            const auto refs = class_events(pair.ref, k);
            const auto ests = class_events(pair.est, k);
            std::vector<bool> est_used(ests.size(), false);
            long long matched = 0;
            for (const Event* r : refs) {
                const double off_tol = std::max(collar_s, 0.2 * (r->offset - r->onset));
                for (std::size_t j = 0; j < ests.size(); ++j) {
                    if (est_used[j]) continue;
                    if (std::fabs(ests[j]->onset - r->onset) <= collar_s &&
                        std::fabs(ests[j]->offset - r->offset) <= off_tol) {
                        est_used[j] = true;
                        ++matched;
                        break;
                    }
                }
            }
            res.tp[static_cast<std::size_t>(k)] += matched;
            res.fn[static_cast<std::size_t>(k)] += static_cast<long long>(refs.size()) - matched;
            res.fp[static_cast<std::size_t>(k)] +=
                static_cast<long long>(ests.size()) - matched;
        }
    }
    res.per_class.assign(kNumClasses, std::numeric_limits<double>::quiet_NaN());
    double sum = 0.0;
    int active = 0;
    for (int k = 0; k < kNumClasses; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const long long denom = 2 * res.tp[i] + res.fp[i] + res.fn[i];
        if (denom == 0) continue;
        res.per_class[i] = 2.0 * static_cast<double>(res.tp[i]) / static_cast<double>(denom);
        sum += res.per_class[i];
        ++active;
    }
    res.macro = active > 0 ? sum / active : 0.0;
    return res;
}

void PsdsConfig::validate() const {
    for (double v : {dtc, gtc, cttc})
        if (!(v > 0.0 && v <= 1.0)) throw std::invalid_argument("PsdsConfig: criteria must be in (0,1]");
    if (alpha_ct < 0.0 || alpha_st < 0.0)
        throw std::invalid_argument("PsdsConfig: weights must be non-negative");
    if (e_max <= 0.0) throw std::invalid_argument("PsdsConfig: e_max must be > 0");
    if (thresholds.empty()) throw std::invalid_argument("PsdsConfig: threshold grid is empty");
    double prev = 0.0;
    for (double t : thresholds) {
        if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("PsdsConfig: thresholds must be in (0,1)");
        if (t <= prev) throw std::invalid_argument("PsdsConfig: thresholds must be strictly increasing");
        prev = t;
    }
}

namespace {

std::vector<double> default_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 50; ++i) g.push_back(static_cast<double>(i) / 51.0);
    return g;
}

}  // namespace

PsdsConfig PsdsConfig::scenario1() {
    PsdsConfig c;
    c.dtc = c.gtc = 0.7;
    c.cttc = 0.3;
    c.alpha_ct = 0.0;
    c.alpha_st = 1.0;
    c.e_max = 100.0;
    c.thresholds = default_grid();
    return c;
}

PsdsConfig PsdsConfig::scenario2() {
    PsdsConfig c;
    c.dtc = c.gtc = 0.1;
    c.cttc = 0.3;
    c.alpha_ct = 0.5;
    c.alpha_st = 1.0;
    c.e_max = 100.0;
    c.thresholds = default_grid();
    return c;
}

MatchCounts intersection_match(const ClipEvents& ref, const ClipEvents& est,
                               const PsdsConfig& cfg) {
    MatchCounts out;
    out.tp.assign(kNumClasses, 0);
    out.fp.assign(kNumClasses, 0);
    out.ct.assign(kNumClasses, std::vector<long long>(kNumClasses, 0));
    for (int k = 0; k < kNumClasses; ++k) {
        const auto refs = class_events(&ref, k);
        const auto ests = class_events(&est, k);
        std::vector<bool> dtc_pass(ests.size(), false);
        for (std::size_t j = 0; j < ests.size(); ++j) {
            double inter = 0.0;
            for (const Event* r : refs) inter += overlap(*ests[j], *r);
            const double dur = ests[j]->offset - ests[j]->onset;
            dtc_pass[j] = dur > 0.0 && inter / dur >= cfg.dtc;
        }
        for (const Event* r : refs) {
            double inter = 0.0;
            for (std::size_t j = 0; j < ests.size(); ++j)
                if (dtc_pass[j]) inter += overlap(*r, *ests[j]);
            const double dur = r->offset - r->onset;
            if (dur > 0.0 && inter / dur >= cfg.gtc) ++out.tp[static_cast<std::size_t>(k)];
        }
        for (std::size_t j = 0; j < ests.size(); ++j) {
            if (dtc_pass[j]) continue;
            ++out.fp[static_cast<std::size_t>(k)];
            const double dur = ests[j]->offset - ests[j]->onset;
            if (dur <= 0.0) continue;
            for (int k2 = 0; k2 < kNumClasses; ++k2) {
                if (k2 == k) continue;
                double inter = 0.0;
                for (const auto& r : ref.events)
                    if (r.class_id == k2) inter += overlap(*ests[j], r);
                if (inter / dur >= cfg.cttc) ++out.ct[static_cast<std::size_t>(k)][static_cast<std::size_t>(k2)];
            }
        }
    }
    return out;
}

PsdsResult psds(const std::vector<std::pair<ClipEvents, TensorF>>& dataset, const PsdsConfig& cfg,
                double frame_dur_s, const std::vector<int>& median_windows) {
    cfg.validate();
    if (dataset.empty()) throw std::invalid_argument("psds: empty dataset");
    if (frame_dur_s <= 0.0) throw std::invalid_argument("psds: frame duration must be > 0");

    PsdsResult result;
    double dataset_hours = 0.0;
    std::vector<long long> n_ref(kNumClasses, 0);
    std::vector<double> gt_hours(kNumClasses, 0.0);
    for (const auto& [ref, probs] : dataset) {
        validate_events(ref);
        dataset_hours += ref.duration / 3600.0;
        for (const auto& e : ref.events) {
            ++n_ref[static_cast<std::size_t>(e.class_id)];
            gt_hours[static_cast<std::size_t>(e.class_id)] += (e.offset - e.onset) / 3600.0;
        }
    }
    std::vector<int> active;
    for (int k = 0; k < kNumClasses; ++k) {
        if (n_ref[static_cast<std::size_t>(k)] > 0)
            active.push_back(k);
        else
            result.warnings.push_back("psds: class '" + class_names()[static_cast<std::size_t>(k)] +
                                      "' has no reference events; excluded");
    }
    if (active.empty()) {
        result.warnings.push_back("psds: no class has reference events; score is 0");
        return result;
    }

    // Operating points per active class: (eFPR, TPR) per threshold.
    const std::size_t n_thr = cfg.thresholds.size();
    std::vector<std::vector<double>> tpr(active.size(), std::vector<double>(n_thr, 0.0));
    std::vector<std::vector<double>> efpr(active.size(), std::vector<double>(n_thr, 0.0));
    for (std::size_t ti = 0; ti < n_thr; ++ti) {
        std::vector<long long> tp(kNumClasses, 0), fp(kNumClasses, 0);
        std::vector<std::vector<long long>> ct(kNumClasses, std::vector<long long>(kNumClasses, 0));
        for (const auto& [ref, probs] : dataset) {
            // one window broadcasts to every class; otherwise one per class
            const TensorF filtered = median_windows.empty() ? probs
                                     : median_windows.size() == 1
                                         ? median_filter(probs, median_windows[0])
                                         : median_filter(probs, median_windows);
            const ClipEvents decoded = decode_events(filtered, cfg.thresholds[ti], frame_dur_s,
                                                     ref.clip_id, ref.duration);
            const MatchCounts m = intersection_match(ref, decoded, cfg);
            for (int k = 0; k < kNumClasses; ++k) {
                tp[static_cast<std::size_t>(k)] += m.tp[static_cast<std::size_t>(k)];
                fp[static_cast<std::size_t>(k)] += m.fp[static_cast<std::size_t>(k)];
                for (int k2 = 0; k2 < kNumClasses; ++k2)
                    ct[static_cast<std::size_t>(k)][static_cast<std::size_t>(k2)] +=
                        m.ct[static_cast<std::size_t>(k)][static_cast<std::size_t>(k2)];
            }
        }
        for (std::size_t a = 0; a < active.size(); ++a) {
            const int k = active[a];
            tpr[a][ti] = static_cast<double>(tp[static_cast<std::size_t>(k)]) /
                         static_cast<double>(n_ref[static_cast<std::size_t>(k)]);
            double rate = static_cast<double>(fp[static_cast<std::size_t>(k)]) / dataset_hours;
            if (cfg.alpha_ct > 0.0 && active.size() > 1) {
                double ct_rate = 0.0;
                for (std::size_t a2 = 0; a2 < active.size(); ++a2) {
                    if (a2 == a) continue;
                    const int k2 = active[a2];
                    ct_rate += static_cast<double>(
                                   ct[static_cast<std::size_t>(k)][static_cast<std::size_t>(k2)]) /
                               gt_hours[static_cast<std::size_t>(k2)];
                }
                rate += cfg.alpha_ct * ct_rate / static_cast<double>(active.size() - 1);
            }
            efpr[a][ti] = rate;
        }
    }

    // Step-function ROC per class; integrate the aggregate over breakpoints.
    std::set<double> break_set{0.0, cfg.e_max};
    for (const auto& row : efpr)
        for (double e : row)
            if (e < cfg.e_max) break_set.insert(e);
    const std::vector<double> breaks(break_set.begin(), break_set.end());

    auto tpr_at = [&](std::size_t a, double e) {
        double best = 0.0;
        for (std::size_t ti = 0; ti < n_thr; ++ti)
            if (efpr[a][ti] <= e) best = std::max(best, tpr[a][ti]);
        return best;
    };

    double area = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        const double e = breaks[i];
        double mean = 0.0, sq = 0.0;
        for (std::size_t a = 0; a < active.size(); ++a) {
            const double v = tpr_at(a, e);
            mean += v;
            sq += v * v;
        }
        mean /= static_cast<double>(active.size());
        const double var = std::max(0.0, sq / static_cast<double>(active.size()) - mean * mean);
        const double f = std::max(0.0, mean - cfg.alpha_st * std::sqrt(var));
        area += f * (breaks[i + 1] - e);
    }
    result.score = area / cfg.e_max;
    return result;
}

}  // namespace sedkit
