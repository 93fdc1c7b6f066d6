#ifndef CHASM_PIPELINE_HPP
#define CHASM_PIPELINE_HPP

/** @file
 * The streaming detector: operator update, truncated spectrum, alignment,
 * spectral velocity, MEWMA statistic and thresholding, one observation at a
 * time.
 */

#include <chasm/dynamics.hpp>
#include <chasm/errors.hpp>
#include <chasm/mewma.hpp>
#include <chasm/spectrum.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace chasm {

struct DetectorConfig {
    double rho = 1.0;
    Eigen::Index rank = 2;
    double alpha = 0.18;
    double threshold = 15.0;
    std::int64_t grace = 100;
    std::int64_t burn_in = 50; ///< observations after (re)start whose velocities skip the moment estimates
    Eigen::Index lag = 1;
    std::optional<double> epsilon; ///< defaults to default_epsilon(lag * d)
    double ridge = 1e-8;
    double ridge_rel = 1e-6;
    double moment_forgetting = 1.0;
    bool restart = false;

    /// Throws InvalidArgument on any out-of-range field.  `dim` is the raw
    /// observation dimension (before lag stacking).
    void validate(Eigen::Index dim) const {
        detail::require(rho > 0.0 && rho <= 1.0, "config: rho must lie in (0, 1]");
        detail::require(alpha > 0.0 && alpha < 1.0, "config: alpha must lie in (0, 1)");
        detail::require(std::isfinite(threshold) && threshold > 0.0, "config: threshold must be finite and positive");
        detail::require(grace >= 0, "config: grace must be non-negative");
        detail::require(burn_in >= 0, "config: burn_in must be non-negative");
        detail::require(lag >= 1, "config: lag must be positive");
        detail::require(dim >= 1, "config: dimension must be positive");
        detail::require(rank >= 1 && rank <= lag * dim, "config: rank must lie in [1, lag * d]");
        detail::require(!epsilon || (*epsilon > 0.0 && std::isfinite(*epsilon)), "config: epsilon must be positive");
        detail::require(ridge > 0.0 && std::isfinite(ridge), "config: ridge must be positive");
        detail::require(ridge_rel >= 0.0, "config: relative ridge must be non-negative");
        detail::require(moment_forgetting > 0.0 && moment_forgetting <= 1.0,
                        "config: moment forgetting must lie in (0, 1]");
    }
};

/// The synthetic-data search grid: rho in {0.95, 0.98, 0.99, 1}, r = 2 and
/// twenty (alpha, h) pairs.
inline std::vector<DetectorConfig> synthetic_grid() {
    static constexpr std::pair<double, double> pairs[] = {
        {0.08, 8},  {0.08, 10}, {0.09, 10}, {0.09, 12}, {0.10, 10}, {0.10, 12}, {0.12, 12},
        {0.12, 14}, {0.15, 14}, {0.15, 15}, {0.18, 15}, {0.18, 18}, {0.20, 18}, {0.20, 20},
        {0.25, 20}, {0.25, 22}, {0.30, 25}, {0.30, 28}, {0.35, 25}, {0.35, 28}};
    std::vector<DetectorConfig> grid;
    for (double rho : {0.95, 0.98, 0.99, 1.0})
        for (auto [alpha, h] : pairs) {
            DetectorConfig c;
            c.rho = rho;
            c.rank = 2;
            c.alpha = alpha;
            c.threshold = h;
            grid.push_back(c);
        }
    return grid;
}

struct DetectionRecord {
    std::int64_t t = 0;
    std::optional<double> statistic; ///< absent while warming up
    bool alarm = false;
    std::int64_t segment = 0;
    friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

/// Companion-form stacking: emits (x_t, x_{t-1}, ..., x_{t-p+1}) once p
/// inputs have been seen.
class LagStacker {
public:
    explicit LagStacker(Eigen::Index lag) : lag_(lag) { detail::require(lag >= 1, "stack_lags: lag must be positive"); }

    std::optional<Eigen::VectorXd> push(const Eigen::Ref<const Eigen::VectorXd>& x) {
        if (!window_.empty() && window_.front().size() != x.size())
            throw InvalidArgument("stack_lags: inconsistent vector lengths");
        window_.emplace_front(x);
        if (static_cast<Eigen::Index>(window_.size()) > lag_) window_.pop_back();
        if (static_cast<Eigen::Index>(window_.size()) < lag_) return std::nullopt;
        const Eigen::Index d = x.size();
        Eigen::VectorXd out(lag_ * d);
        for (Eigen::Index k = 0; k < lag_; ++k) out.segment(k * d, d) = window_[static_cast<std::size_t>(k)];
        return out;
    }
    void clear() { window_.clear(); }

private:
    Eigen::Index lag_;
    std::deque<Eigen::VectorXd> window_;
};

inline std::vector<Eigen::VectorXd> stack_lags(std::span<const Eigen::VectorXd> stream, Eigen::Index lag) {
    LagStacker stacker(lag);
    std::vector<Eigen::VectorXd> out;
    for (const auto& x : stream)
        if (auto y = stacker.push(x)) out.push_back(std::move(*y));
    return out;
}

class Detector {
public:
    /// Optional sink for soft failures (retained spectra, dropped alarms).
    using Logger = std::function<void(const std::string&)>;

    Detector(DetectorConfig cfg, Eigen::Index dim, Logger log = {})
        : cfg_(std::move(cfg)), dim_(dim), stacked_dim_(cfg_.lag * dim), stacker_(cfg_.lag), log_(std::move(log)) {
        cfg_.validate(dim);
        restart_state();
    }

    [[nodiscard]] const DetectorConfig& config() const { return cfg_; }
    [[nodiscard]] const DynamicsState& dynamics() const { return dyn_; }
    [[nodiscard]] const MewmaState& mewma() const { return mewma_; }
    [[nodiscard]] const std::optional<AlignedSpectrum>& spectrum() const { return spectrum_; }
    [[nodiscard]] std::int64_t segment() const { return segment_; }
    /// True once a detector without restart has raised its alarm; later
    /// steps still report the statistic but never alarm again.
    [[nodiscard]] bool stopped() const { return stopped_; }

    DetectionRecord step(const Eigen::Ref<const Eigen::VectorXd>& x) {
        if (x.size() != dim_)
            throw InvalidArgument("detector: expected " + std::to_string(dim_) + " values, got " +
                                  std::to_string(x.size()));
        if (!x.allFinite()) throw InvalidArgument("detector: non-finite observation at t=" + std::to_string(t_));

        DetectionRecord rec;
        rec.t = t_;
        rec.segment = segment_;
        const std::int64_t t = t_++;

        const auto stacked = stacker_.push(x);
        if (!stacked) return rec;
        update(dyn_, *stacked);
        if (dyn_.step == 0) return rec;

        Eigen::VectorXcd raw;
        try {
            raw = dominant_eigenvalues(dyn_.theta, cfg_.rank);
        } catch (const NumericalError& e) {
            if (log_) log_("t=" + std::to_string(t) + ": " + e.what() + "; keeping previous spectrum");
            return rec;
        }
        if (!spectrum_) {
            spectrum_ = AlignedSpectrum{std::move(raw)};
            return rec;
        }
        AlignedSpectrum next = align(*spectrum_, raw);
        const Eigen::VectorXcd velocity = next.values - spectrum_->values;
        spectrum_ = std::move(next);

        if (t < segment_start_ + cfg_.burn_in) return rec;
        ingest_velocity(mewma_, velocity);
        rec.statistic = statistic(mewma_);

        if (*rec.statistic > cfg_.threshold && !stopped_) {
            if (t > segment_start_ + cfg_.grace) {
                rec.alarm = true;
            } else if (log_) {
                log_("t=" + std::to_string(t) + ": exceedance inside grace window dropped");
            }
        }
        if (rec.alarm) {
            if (cfg_.restart) {
                ++segment_;
                segment_start_ = t + 1;
                restart_state();
            } else {
                stopped_ = true;
            }
        }
        return rec;
    }

private:
    void restart_state() {
        dyn_ = init_dynamics(stacked_dim_, cfg_.rho, cfg_.epsilon.value_or(default_epsilon(stacked_dim_)));
        mewma_ = make_mewma(cfg_.rank, cfg_.alpha, cfg_.ridge, cfg_.ridge_rel, cfg_.moment_forgetting);
        spectrum_.reset();
        stacker_.clear();
    }

    DetectorConfig cfg_;
    Eigen::Index dim_;
    Eigen::Index stacked_dim_;
    LagStacker stacker_;
    Logger log_;
    DynamicsState dyn_;
    MewmaState mewma_;
    std::optional<AlignedSpectrum> spectrum_;
    std::int64_t t_ = 0;
    std::int64_t segment_ = 0;
    std::int64_t segment_start_ = 0;
    bool stopped_ = false; // single-change mode has already fired
};

struct RunResult {
    std::vector<DetectionRecord> records;
    std::vector<std::int64_t> alarms;
    std::optional<std::string> error; ///< set when a hard error aborted the run
};

/// Folds step over the stream.  A hard error ends the run and keeps the
/// partial records.
inline RunResult run(const DetectorConfig& cfg, std::span<const Eigen::VectorXd> stream,
                     Detector::Logger log = {}) {
    RunResult out;
    if (stream.empty()) return out;
    Detector det(cfg, stream.front().size(), std::move(log));
    for (const auto& x : stream) {
        try {
            out.records.push_back(det.step(x));
        } catch (const std::exception& e) {
            out.error = e.what();
            return out;
        }
        if (out.records.back().alarm) out.alarms.push_back(out.records.back().t);
    }
    return out;
}

/// First alarm time, or nullopt if the stream never triggers.
inline std::optional<std::int64_t> first_alarm(const DetectorConfig& cfg, std::span<const Eigen::VectorXd> stream) {
    if (stream.empty()) return std::nullopt;
    DetectorConfig single = cfg;
    single.restart = false;
    Detector det(single, stream.front().size());
    for (const auto& x : stream)
        if (const auto rec = det.step(x); rec.alarm) return rec.t;
    return std::nullopt;
}

} // namespace chasm

#endif
