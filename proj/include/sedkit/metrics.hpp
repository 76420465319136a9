#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sedkit/events.hpp"
#include "sedkit/tensor.hpp"

namespace sedkit {

// Per-class sliding median over [T, K] frame probabilities with edge
// replication. Window lengths must be odd; a window of 1 is the identity.
TensorF median_filter(const TensorF& probs, const std::vector<int>& windows);
TensorF median_filter(const TensorF& probs, int window);

// Maximal runs of probs[:, k] >= threshold become events spanning
// [first_frame * frame_dur, (last_frame + 1) * frame_dur].
ClipEvents decode_events(const TensorF& probs, double threshold, double frame_dur_s,
                         const std::string& clip_id = "", double duration_s = 10.0);

struct F1Result {
    std::vector<double> per_class;        // NaN for classes with no activity
    std::vector<long long> tp, fp, fn;    // per class, pooled over clips
    double macro = 0.0;                   // mean over classes with any activity
};

// Collar-based event F1. An estimate matches a same-class reference when the
// onset difference is within the collar and the offset difference is within
// max(collar, 0.2 * reference duration); matching is greedy in onset order,
// one-to-one. Clips pair by clip_id; ids present on one side only still count
// (all-FN or all-FP).
F1Result collar_f1(const std::vector<ClipEvents>& ref, const std::vector<ClipEvents>& est,
                   double collar_s = 0.2);

struct PsdsConfig {
    double dtc = 0.7;
    double gtc = 0.7;
    double cttc = 0.3;
    double alpha_ct = 0.0;
    double alpha_st = 1.0;
    double e_max = 100.0;               // effective FPs per hour
    std::vector<double> thresholds;     // strictly increasing, in (0,1)

    void validate() const;
    static PsdsConfig scenario1();      // dtc=gtc=0.7, alpha_ct=0, alpha_st=1
    static PsdsConfig scenario2();      // dtc=gtc=0.1, cttc=0.3, alpha_ct=0.5, alpha_st=1
};

struct MatchCounts {
    std::vector<long long> tp;              // references detected (ground-truth criterion)
    std::vector<long long> fp;              // estimates failing the detection-tolerance criterion
    std::vector<std::vector<long long>> ct; // ct[k][k']: DTC-failing class-k estimates
                                            // whose overlap with class-k' references
                                            // passes the cross-trigger criterion
};

// Intersection-based matching for one clip:
//  - detection tolerance: sum of intersections of an estimate with same-class
//    references, divided by the estimate's duration, >= dtc;
//  - ground truth: fraction of a reference covered by DTC-passing same-class
//    estimates >= gtc (counts one TP);
//  - cross-trigger: DTC-failing estimates tested with the cttc threshold
//    against each other class's references.
MatchCounts intersection_match(const ClipEvents& ref, const ClipEvents& est,
                               const PsdsConfig& cfg);

struct PsdsResult {
    double score = 0.0;
    std::vector<std::string> warnings;
};

// Polyphonic detection score over a dataset of (reference, frame probability)
// pairs. Per threshold: median-filter (a single window broadcasts to every
// class; a length-K vector is per-class), decode, match;
// per class k: TPR = TP/N_ref, eFPR = FP per dataset hour + alpha_ct * mean
// over other classes of cross-trigger counts per hour of that class's ground
// truth. The class ROC TPR(e) = max TPR over operating points with eFPR <= e;
// the aggregate max(0, mean - alpha_st * std) (population std over classes)
// integrates exactly over its breakpoints up to e_max and normalizes by
// e_max. Classes with zero reference events are excluded with a warning.
PsdsResult psds(const std::vector<std::pair<ClipEvents, TensorF>>& dataset, const PsdsConfig& cfg,
                double frame_dur_s, const std::vector<int>& median_windows = {});

}  // namespace sedkit
