#ifndef CHASM_METRICS_HPP
#define CHASM_METRICS_HPP

/** @file
 * Detection speed (average run lengths) and margin-based detection accuracy
 * (precision, recall, F1).
 */

#include <chasm/errors.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chasm {

struct EvalConfig {
    std::int64_t margin_left = 0;
    std::int64_t margin_right = 50;
    std::int64_t censor_at = 10000;

    void validate() const {
        detail::require(margin_left >= 0 && margin_right >= 0, "metrics: margins must be non-negative");
    }
};

enum class Outcome { TP, FP, FN_late, FN_none };

inline std::string to_string(Outcome o) {
    switch (o) {
    case Outcome::TP: return "TP";
    case Outcome::FP: return "FP";
    case Outcome::FN_late: return "FN_late";
    case Outcome::FN_none: return "FN_none";
    }
    return "?";
}

/// Outcome of a single-changepoint sequence given its first detection.
inline Outcome classify_single(std::int64_t tau, std::optional<std::int64_t> tau_hat, const EvalConfig& cfg) {
    cfg.validate();
    if (!tau_hat) return Outcome::FN_none;
    if (*tau_hat < tau - cfg.margin_left) return Outcome::FP;
    if (*tau_hat > tau + cfg.margin_right) return Outcome::FN_late;
    return Outcome::TP;
}

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline double f1_score(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

struct OutcomeCounts {
    std::size_t tp = 0, fp = 0, fn_late = 0, fn_none = 0;

    void add(Outcome o) {
        switch (o) {
        case Outcome::TP: ++tp; break;
        case Outcome::FP: ++fp; break;
        case Outcome::FN_late: ++fn_late; break;
        case Outcome::FN_none: ++fn_none; break;
        }
    }
    [[nodiscard]] std::size_t total() const { return tp + fp + fn_late + fn_none; }
    /// Sequences that produced a detection.
    [[nodiscard]] std::size_t detections() const { return tp + fp + fn_late; }
};

/// P = TP / n_d with n_d the sequences that alarmed at all; R = TP / N.
inline Prf prf_single(std::span<const Outcome> outcomes, std::size_t n_sequences) {
    detail::require(outcomes.size() <= n_sequences, "prf_single: more outcomes than sequences");
    OutcomeCounts c;
    for (auto o : outcomes) c.add(o);
    Prf out;
    if (c.detections() > 0) out.precision = static_cast<double>(c.tp) / static_cast<double>(c.detections());
    if (n_sequences > 0) out.recall = static_cast<double>(c.tp) / static_cast<double>(n_sequences);
    out.f1 = f1_score(out.precision, out.recall);
    return out;
}

/// Multi-changepoint scoring: a true change counts as found when any
/// detection falls in [tau - margin_left, tau + margin_right].
inline Prf prf_multi(std::span<const std::int64_t> true_cps, std::span<const std::int64_t> detections,
                     const EvalConfig& cfg) {
    cfg.validate();
    detail::require(std::is_sorted(true_cps.begin(), true_cps.end()), "prf_multi: true changepoints must be sorted");
    detail::require(std::is_sorted(detections.begin(), detections.end()), "prf_multi: detections must be sorted");
    std::size_t tp = 0;
    for (auto tau : true_cps) {
        auto it = std::lower_bound(detections.begin(), detections.end(), tau - cfg.margin_left);
        if (it != detections.end() && *it <= tau + cfg.margin_right) ++tp;
    }
    Prf out;
    if (!detections.empty()) out.precision = static_cast<double>(tp) / static_cast<double>(detections.size());
    if (!true_cps.empty()) out.recall = static_cast<double>(tp) / static_cast<double>(true_cps.size());
    out.f1 = f1_score(out.precision, out.recall);
    return out;
}

/// First-alarm time of one run, or nullopt when it never alarmed.
struct RunLength {
    std::optional<std::int64_t> first_alarm;
    std::optional<std::int64_t> tau; ///< needed for delays
};

enum class ArlMode { in_control, delay };

struct ArlEstimate {
    double value = 0.0;
    std::size_t used = 0;            ///< runs entering the average
    double censored_fraction = 0.0;  ///< in_control only
    [[nodiscard]] bool censored() const { return censored_fraction > 0.0; }
};

/// in_control: mean first-alarm time with silent runs counted at censor_at
/// (a lower bound whenever anything was censored).  delay: mean of
/// tau_hat - tau over true-positive runs only.
inline ArlEstimate arl(std::span<const RunLength> runs, ArlMode mode, const EvalConfig& cfg = {}) {
    ArlEstimate out;
    double sum = 0.0;
    std::size_t censored = 0;
    for (const auto& r : runs) {
        if (mode == ArlMode::in_control) {
            if (r.first_alarm) {
                sum += static_cast<double>(*r.first_alarm);
            } else {
                sum += static_cast<double>(cfg.censor_at);
                ++censored;
            }
            ++out.used;
        } else {
            detail::require(r.tau.has_value(), "arl: delay mode needs the true changepoint");
            if (classify_single(*r.tau, r.first_alarm, cfg) != Outcome::TP) continue;
            sum += static_cast<double>(*r.first_alarm - *r.tau);
            ++out.used;
        }
    }
    if (out.used == 0) {
        detail::require(mode == ArlMode::delay, "arl: no runs to average");
        out.value = std::numeric_limits<double>::quiet_NaN(); // no true positives
        return out;
    }
    out.value = sum / static_cast<double>(out.used);
    if (mode == ArlMode::in_control) out.censored_fraction = static_cast<double>(censored) / static_cast<double>(out.used);
    return out;
}

} // namespace chasm

#endif
