#ifndef CHASM_SYNTHETIC_HPP
#define CHASM_SYNTHETIC_HPP

/** @file
 * Seeded generators for the synthetic VAR(1) benchmark data sets: bivariate
 * rotation dynamics under Gaussian, Laplace-copula, Student-t and
 * Huber-contaminated noise, plus sparse and full-rank high-dimensional
 * variants.  Every replication owns an RNG derived from (master seed,
 * replication index), so data sets can be generated in parallel and still
 * be bit-identical run to run.
 */

#include <chasm/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace chasm {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream for replication `index` under `master_seed`.
inline Rng replication_rng(std::uint64_t master_seed, std::uint64_t index) {
    return Rng(splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

// ---------------------------------------------------------------------------
// Transition matrices

/// Point of the unit disk from (u, phi): radius sqrt(u), angle phi.
inline std::pair<double, double> disk_point(double u, double phi) {
    const double r = std::sqrt(u);
    return {r * std::cos(phi), r * std::sin(phi)};
}

/// Uniform draw from the unit disk.
inline std::pair<double, double> sample_unit_disk(Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    return disk_point(u, phi);
}

/// Real canonical form [[a, -b], [b, a]] of multiplication by a + bi.
inline Eigen::Matrix2d rotation_transition(double a, double b) {
    detail::require(a * a + b * b < 1.0, "rotation_transition: a^2 + b^2 must be < 1");
    Eigen::Matrix2d m;
    m << a, -b, b, a;
    return m;
}

inline double spectral_radius(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::EigenSolver<Eigen::MatrixXd>(m, false).eigenvalues().cwiseAbs().maxCoeff();
}

/// Sigma = S^T S with S_ij ~ U(-1, 1), loaded by 1e-9 I.
inline Eigen::MatrixXd random_noise_covariance(Eigen::Index dim, Rng& rng) {
    detail::require(dim >= 1, "random_noise_covariance: dimension must be positive");
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Eigen::MatrixXd s(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) s(i, j) = unif(rng);
    Eigen::MatrixXd sigma = s.transpose() * s;
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    sigma.diagonal().array() += 1e-9;
    return sigma;
}

/// Stationary covariance Gamma = Theta Gamma Theta^T + Sigma, by the
/// doubling (Smith) iteration until successive iterates agree to 1e-12.
inline Eigen::MatrixXd stationary_covariance(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                             const Eigen::Ref<const Eigen::MatrixXd>& sigma) {
    detail::require(spectral_radius(theta) < 1.0, "stationary_covariance: unstable transition");
    Eigen::MatrixXd gamma = sigma;
    Eigen::MatrixXd a = theta;
    for (int it = 0; it < 200; ++it) {
        const Eigen::MatrixXd inc = a * gamma * a.transpose();
        gamma += inc;
        a = (a * a).eval();
        if (inc.norm() <= 1e-12 * (1.0 + gamma.norm())) break;
    }
    return 0.5 * (gamma + gamma.transpose());
}

/// Factor L with L L^T = m for a symmetric PSD m (Cholesky, falling back to
/// an eigen square root when m is singular).
inline Eigen::MatrixXd psd_factor(const Eigen::Ref<const Eigen::MatrixXd>& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

// ---------------------------------------------------------------------------
// Noise

/// Phi(z) through erfc; accurate to roughly machine precision.
inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Laplace(0, s) quantile: -s sign(u - 1/2) ln(1 - 2|u - 1/2|).
inline double laplace_quantile(double u, double s) {
    const double c = u - 0.5;
    const double sgn = (c > 0.0) - (c < 0.0);
    return -s * sgn * std::log1p(-2.0 * std::abs(c));
}

/// Laplace(0, s) value at u = Phi(z), evaluated from the tail so that
/// |z| > 8 does not saturate u to 1.  Equal to laplace_quantile(Phi(z), s).
inline double log_erfc(double x) {
    if (x < 25.0) return std::log(std::erfc(x));
    // erfc underflows near x = 26.5; asymptotic series instead.
    const double x2 = x * x;
    return -x2 - std::log(x * std::sqrt(std::numbers::pi)) + std::log1p(-0.5 / x2 + 0.75 / (x2 * x2));
}

inline double laplace_from_normal(double z, double s) {
    // 1 - 2|Phi(z) - 1/2| = erfc(|z| / sqrt 2)
    const double sgn = (z > 0.0) - (z < 0.0);
    return -s * sgn * log_erfc(std::abs(z) / std::numbers::sqrt2);
}

enum class NoiseKind { gaussian, laplace_copula, student_t, huber, custom };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    Eigen::MatrixXd covariance;   ///< Sigma (nominal covariance for huber)
    double nu = 5.0;              ///< student_t degrees of freedom
    double contamination = 0.0;   ///< huber epsilon
    double outlier_scale = 3.0;   ///< huber outlier standard-deviation multiplier
    std::function<Eigen::VectorXd(Rng&)> custom;

    [[nodiscard]] Eigen::Index dim() const { return covariance.rows(); }

    void validate() const {
        if (kind == NoiseKind::custom) {
            detail::require(static_cast<bool>(custom), "noise: custom kind needs a sampler");
            return;
        }
        detail::require(covariance.rows() >= 1 && covariance.rows() == covariance.cols(),
                        "noise: covariance must be square and non-empty");
        detail::require(covariance.allFinite(), "noise: covariance must be finite");
        detail::require((covariance - covariance.transpose()).norm() <= 1e-10 * (1.0 + covariance.norm()),
                        "noise: covariance must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance, Eigen::EigenvaluesOnly);
        detail::require(eig.eigenvalues().minCoeff() >= -1e-9 * (1.0 + covariance.norm()),
                        "noise: covariance must be positive semi-definite");
        if (kind == NoiseKind::student_t) detail::require(nu >= 3.0, "noise: student_t needs nu >= 3");
        if (kind == NoiseKind::huber)
            detail::require(contamination >= 0.0 && contamination < 1.0, "noise: huber epsilon must lie in [0, 1)");
        if (kind == NoiseKind::laplace_copula)
            detail::require((covariance.diagonal().array() > 0.0).all(), "noise: laplace needs positive variances");
    }
};

inline std::string to_string(NoiseKind k) {
    switch (k) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::laplace_copula: return "laplace_copula";
    case NoiseKind::student_t: return "student_t";
    case NoiseKind::huber: return "huber";
    case NoiseKind::custom: return "custom";
    }
    return "unknown";
}

/// Draws from a NoiseSpec with the factorisations computed once.
class NoiseSampler {
public:
    explicit NoiseSampler(NoiseSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        if (spec_.kind == NoiseKind::custom) return;
        if (spec_.kind == NoiseKind::laplace_copula) {
            const Eigen::VectorXd sd = spec_.covariance.diagonal().cwiseSqrt();
            const Eigen::MatrixXd corr = sd.cwiseInverse().asDiagonal() * spec_.covariance * sd.cwiseInverse().asDiagonal();
            factor_ = psd_factor(corr);
            scale_ = sd / std::numbers::sqrt2;
        } else {
            factor_ = psd_factor(spec_.covariance);
        }
    }

    [[nodiscard]] const NoiseSpec& spec() const { return spec_; }

    Eigen::VectorXd operator()(Rng& rng) const {
        if (spec_.kind == NoiseKind::custom) return spec_.custom(rng);
        const Eigen::Index d = spec_.dim();
        std::normal_distribution<double> gauss(0.0, 1.0);
        Eigen::VectorXd w(d);
        for (Eigen::Index i = 0; i < d; ++i) w[i] = gauss(rng);
        switch (spec_.kind) {
        case NoiseKind::gaussian: return factor_ * w;
        case NoiseKind::laplace_copula: {
            const Eigen::VectorXd z = factor_ * w;
            Eigen::VectorXd x(d);
            for (Eigen::Index i = 0; i < d; ++i) x[i] = laplace_from_normal(z[i], scale_[i]);
            return x;
        }
        case NoiseKind::student_t: {
            std::chi_squared_distribution<double> chi2(spec_.nu);
            const Eigen::VectorXd y = factor_ * w;
            return y * std::sqrt(spec_.nu / chi2(rng));
        }
        case NoiseKind::huber: {
            std::bernoulli_distribution outlier(spec_.contamination);
            const Eigen::VectorXd y = factor_ * w;
            return outlier(rng) ? Eigen::VectorXd(spec_.outlier_scale * y) : y;
        }
        case NoiseKind::custom: break;
        }
        throw InvalidArgument("noise: unknown kind");
    }

private:
    NoiseSpec spec_;
    Eigen::MatrixXd factor_;
    Eigen::VectorXd scale_;
};

inline Eigen::VectorXd draw_noise(const NoiseSpec& spec, Rng& rng) { return NoiseSampler(spec)(rng); }

// ---------------------------------------------------------------------------
// Models and streams

struct VarModel {
    Eigen::Index dim = 2;
    Eigen::MatrixXd theta0, theta1;
    NoiseSpec noise;
    std::optional<std::int64_t> tau; ///< absent under no change
    std::int64_t length = 400;

    void validate() const {
        detail::require(dim >= 1, "model: dimension must be positive");
        detail::require(theta0.rows() == dim && theta0.cols() == dim && theta1.rows() == dim && theta1.cols() == dim,
                        "model: transition shape mismatch");
        detail::require(spectral_radius(theta0) <= 1.0 - 1e-9 && spectral_radius(theta1) <= 1.0 - 1e-9,
                        "model: transitions must have spectral radius < 1");
        detail::require(length >= 2, "model: length must be at least 2");
        if (noise.kind != NoiseKind::custom) detail::require(noise.dim() == dim, "model: noise dimension mismatch");
        noise.validate();
        if (tau) {
            const auto lo = static_cast<std::int64_t>(std::floor(0.3 * static_cast<double>(length)));
            const auto hi = static_cast<std::int64_t>(std::floor(0.7 * static_cast<double>(length)));
            detail::require(*tau >= lo && *tau <= hi, "model: tau must lie in [floor(0.3 T), floor(0.7 T)]");
        }
    }
};

/// Draws the stream lazily: x_0 from the stationary law of theta0, then
/// x_t = Theta_t x_{t-1} + e_t with Theta_t = theta1 from tau on.
class VarStream {
public:
    VarStream(const VarModel& model, Rng& rng) : model_(model), sampler_(model.noise), rng_(rng) {
        model_.validate();
        Eigen::MatrixXd base = model_.noise.kind == NoiseKind::custom
                                   ? Eigen::MatrixXd::Identity(model_.dim, model_.dim)
                                   : Eigen::MatrixXd(model_.noise.covariance);
        if (model_.noise.kind == NoiseKind::student_t) base *= model_.noise.nu / (model_.noise.nu - 2.0);
        if (model_.noise.kind == NoiseKind::huber) {
            const double e = model_.noise.contamination, k = model_.noise.outlier_scale;
            base *= (1.0 - e) + e * k * k;
        }
        start_factor_ = psd_factor(stationary_covariance(model_.theta0, base));
    }

    [[nodiscard]] bool done() const { return t_ >= model_.length; }
    [[nodiscard]] std::int64_t index() const { return t_; }

    Eigen::VectorXd next() {
        if (t_ == 0) {
            std::normal_distribution<double> gauss(0.0, 1.0);
            Eigen::VectorXd w(model_.dim);
            for (Eigen::Index i = 0; i < model_.dim; ++i) w[i] = gauss(rng_);
            x_ = start_factor_ * w;
        } else {
            const bool changed = model_.tau && t_ >= *model_.tau;
            x_ = (changed ? model_.theta1 : model_.theta0) * x_ + sampler_(rng_);
        }
        ++t_;
        return x_;
    }

private:
    VarModel model_;
    NoiseSampler sampler_;
    Rng& rng_;
    Eigen::MatrixXd start_factor_;
    Eigen::VectorXd x_;
    std::int64_t t_ = 0;
};

inline std::vector<Eigen::VectorXd> simulate(const VarModel& model, Rng& rng) {
    VarStream gen(model, rng);
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(model.length));
    while (!gen.done()) out.push_back(gen.next());
    return out;
}

// ---------------------------------------------------------------------------
// Benchmark data sets

enum class DatasetKind { gaussian, student_t, laplace, huber, sparse, fullrank };
enum class Variant { arl1, arl0 };

inline constexpr std::array<DatasetKind, 6> all_datasets{DatasetKind::gaussian, DatasetKind::student_t,
                                                        DatasetKind::laplace,  DatasetKind::huber,
                                                        DatasetKind::sparse,   DatasetKind::fullrank};

inline constexpr std::array<double, 10> student_bins{3, 4, 5, 6, 8, 10, 12, 15, 20, 30};
inline constexpr std::array<double, 10> huber_bins{0.0, 0.01, 0.02, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.40};
inline constexpr std::array<int, 10> dimension_bins{2, 4, 6, 10, 15, 20, 25, 30, 35, 40};

inline constexpr std::int64_t arl1_length = 400;
inline constexpr std::int64_t arl0_length = 10000;
inline constexpr double max_condition_number = 15.0;

inline std::string to_string(DatasetKind k) {
    switch (k) {
    case DatasetKind::gaussian: return "gaussian";
    case DatasetKind::student_t: return "student_t";
    case DatasetKind::laplace: return "laplace";
    case DatasetKind::huber: return "huber";
    case DatasetKind::sparse: return "sparse";
    case DatasetKind::fullrank: return "fullrank";
    }
    return "unknown";
}

inline DatasetKind parse_dataset(const std::string& name) {
    for (auto k : all_datasets)
        if (to_string(k) == name) return k;
    throw InvalidArgument("unknown dataset '" + name +
                          "' (expected gaussian, student_t, laplace, huber, sparse or fullrank)");
}

inline std::string to_string(Variant v) { return v == Variant::arl1 ? "arl1" : "arl0"; }

inline Variant parse_variant(const std::string& name) {
    if (name == "arl1") return Variant::arl1;
    if (name == "arl0") return Variant::arl0;
    throw InvalidArgument("unknown variant '" + name + "' (expected arl1 or arl0)");
}

/// Bin index of replication `rep` when `n_reps` are split into 10 equal bins.
inline std::size_t bin_index(std::size_t rep, std::size_t n_reps) {
    detail::require(rep < n_reps, "bin_index: replication out of range");
    return std::min<std::size_t>(9, rep * 10 / n_reps);
}

inline std::int64_t draw_changepoint(std::int64_t length, Rng& rng) {
    const auto lo = static_cast<std::int64_t>(std::floor(0.3 * static_cast<double>(length)));
    const auto hi = static_cast<std::int64_t>(std::floor(0.7 * static_cast<double>(length)));
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

/// 90th percentile of |z1 - z0| for z0, z1 uniform on the unit disk,
/// estimated once per process from 10^6 seeded draws.
inline double sparse_min_distance() {
    static const double value = [] {
        Rng rng(20240917ULL);
        std::vector<double> dist(1'000'000);
        for (auto& d : dist) {
            const auto [a0, b0] = sample_unit_disk(rng);
            const auto [a1, b1] = sample_unit_disk(rng);
            d = std::hypot(a1 - a0, b1 - b0);
        }
        const auto k = static_cast<std::ptrdiff_t>(0.9 * static_cast<double>(dist.size()));
        std::nth_element(dist.begin(), dist.begin() + k, dist.end());
        return dist[static_cast<std::size_t>(k)];
    }();
    return value;
}

/// Rotation block for eigenvalue pair (a, b) embedded at a random coordinate
/// pair of a d x d zero matrix; both regimes share the coordinates, and the
/// pre/post pairs are redrawn until they are at least sparse_min_distance() apart.
inline VarModel make_sparse_highdim(Eigen::Index dim, Rng& rng, Variant variant = Variant::arl1) {
    detail::require(dim >= 2, "make_sparse_highdim: dimension must be at least 2");
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(dim));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const Eigen::Index i = perm[0], j = perm[1];

    const double d_low = sparse_min_distance();
    std::pair<double, double> z0, z1;
    do {
        z0 = sample_unit_disk(rng);
        z1 = sample_unit_disk(rng);
    } while (std::hypot(z1.first - z0.first, z1.second - z0.second) < d_low);

    auto embed = [&](std::pair<double, double> z) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
        m(i, i) = z.first;
        m(j, j) = z.first;
        m(i, j) = -z.second;
        m(j, i) = z.second;
        return m;
    };
    VarModel model;
    model.dim = dim;
    model.theta0 = embed(z0);
    model.theta1 = variant == Variant::arl1 ? embed(z1) : model.theta0;
    model.noise.kind = NoiseKind::gaussian;
    model.noise.covariance = random_noise_covariance(dim, rng);
    model.length = variant == Variant::arl1 ? arl1_length : arl0_length;
    if (variant == Variant::arl1) model.tau = draw_changepoint(model.length, rng);
    return model;
}

/// Conjugate-closed random spectrum of size dim with every |lambda| < 1.
struct CanonicalSpectrum {
    std::vector<double> reals;
    std::vector<std::pair<double, double>> pairs; ///< (a, b) with b > 0
};

inline CanonicalSpectrum random_canonical_spectrum(Eigen::Index dim, Rng& rng) {
    const auto n_pairs = std::uniform_int_distribution<Eigen::Index>(0, dim / 2)(rng);
    CanonicalSpectrum s;
    for (Eigen::Index k = 0; k < dim - 2 * n_pairs; ++k) s.reals.push_back(sample_unit_disk(rng).first);
    for (Eigen::Index k = 0; k < n_pairs; ++k) {
        auto [a, b] = sample_unit_disk(rng);
        s.pairs.emplace_back(a, std::abs(b));
    }
    return s;
}

/// Block-diagonal real canonical form: real eigenvalues, then 2x2 rotation blocks.
inline Eigen::MatrixXd real_canonical_form(const CanonicalSpectrum& s) {
    const auto dim = static_cast<Eigen::Index>(s.reals.size() + 2 * s.pairs.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::Index k = 0;
    for (double r : s.reals) {
        d(k, k) = r;
        ++k;
    }
    for (auto [a, b] : s.pairs) {
        d.block(k, k, 2, 2) << a, -b, b, a;
        k += 2;
    }
    return d;
}

/// U diag(s_clipped) V^T from the SVD of a standard Gaussian matrix, with
/// singular values clipped below s_1 / kappa_max.
inline Eigen::MatrixXd bounded_condition_matrix(Eigen::Index dim, Rng& rng, double kappa_max = max_condition_number) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd g(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c)
        for (Eigen::Index r = 0; r < dim; ++r) g(r, c) = gauss(rng);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::VectorXd s = svd.singularValues();
    s = s.cwiseMax(s[0] / kappa_max);
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

inline Eigen::MatrixXd random_fullrank_transition(Eigen::Index dim, Rng& rng) {
    const Eigen::MatrixXd dc = real_canonical_form(random_canonical_spectrum(dim, rng));
    const Eigen::MatrixXd p = bounded_condition_matrix(dim, rng);
    return p * dc * p.partialPivLu().inverse();
}

inline VarModel make_fullrank_highdim(Eigen::Index dim, Rng& rng, Variant variant = Variant::arl1) {
    detail::require(dim >= 1, "make_fullrank_highdim: dimension must be positive");
    VarModel model;
    model.dim = dim;
    model.theta0 = random_fullrank_transition(dim, rng);
    model.theta1 = variant == Variant::arl1 ? random_fullrank_transition(dim, rng) : model.theta0;
    model.noise.kind = NoiseKind::gaussian;
    model.noise.covariance = random_noise_covariance(dim, rng);
    model.length = variant == Variant::arl1 ? arl1_length : arl0_length;
    if (variant == Variant::arl1) model.tau = draw_changepoint(model.length, rng);
    return model;
}

/// One replication: its model, the bin parameter (nu, epsilon or d) when
/// the data set is binned, and the generated stream.
struct Replication {
    VarModel model;
    std::optional<double> bin;
    std::vector<Eigen::VectorXd> stream;
};

/// Model for replication `rep` of `n_reps` in the given data set.
inline std::pair<VarModel, std::optional<double>> make_replication_model(DatasetKind kind, Variant variant,
                                                                         std::size_t rep, std::size_t n_reps,
                                                                         Rng& rng) {
    const std::size_t bin = bin_index(rep, n_reps);
    if (kind == DatasetKind::sparse) {
        const int d = dimension_bins[bin];
        return {make_sparse_highdim(d, rng, variant), d};
    }
    if (kind == DatasetKind::fullrank) {
        const int d = dimension_bins[bin];
        return {make_fullrank_highdim(d, rng, variant), d};
    }

    VarModel model;
    model.dim = 2;
    const auto [a0, b0] = sample_unit_disk(rng);
    const auto [a1, b1] = sample_unit_disk(rng);
    model.theta0 = rotation_transition(a0, b0);
    model.theta1 = variant == Variant::arl1 ? Eigen::MatrixXd(rotation_transition(a1, b1)) : model.theta0;
    std::optional<double> bin_value;
    switch (kind) {
    case DatasetKind::gaussian:
        model.noise.kind = NoiseKind::gaussian;
        model.noise.covariance = random_noise_covariance(2, rng);
        break;
    case DatasetKind::laplace:
        model.noise.kind = NoiseKind::laplace_copula;
        model.noise.covariance = random_noise_covariance(2, rng);
        break;
    case DatasetKind::student_t:
        model.noise.kind = NoiseKind::student_t;
        model.noise.covariance = random_noise_covariance(2, rng);
        model.noise.nu = student_bins[bin];
        bin_value = model.noise.nu;
        break;
    case DatasetKind::huber:
        model.noise.kind = NoiseKind::huber;
        model.noise.covariance = Eigen::MatrixXd::Identity(2, 2);
        model.noise.contamination = huber_bins[bin];
        bin_value = model.noise.contamination;
        break;
    default: break;
    }
    model.length = variant == Variant::arl1 ? arl1_length : arl0_length;
    if (variant == Variant::arl1) model.tau = draw_changepoint(model.length, rng);
    return {std::move(model), bin_value};
}

inline Replication make_replication(DatasetKind kind, Variant variant, std::size_t rep, std::size_t n_reps,
                                    std::uint64_t master_seed) {
    Rng rng = replication_rng(master_seed, rep);
    auto [model, bin] = make_replication_model(kind, variant, rep, n_reps, rng);
    Replication out{std::move(model), bin, {}};
    out.stream = simulate(out.model, rng);
    return out;
}

/// All replications of a data set, generated sequentially.
inline std::vector<Replication> make_dataset(DatasetKind kind, std::size_t n_reps, Variant variant,
                                             std::uint64_t master_seed) {
    detail::require(n_reps >= 1, "make_dataset: need at least one replication");
    std::vector<Replication> out;
    out.reserve(n_reps);
    for (std::size_t i = 0; i < n_reps; ++i) out.push_back(make_replication(kind, variant, i, n_reps, master_seed));
    return out;
}

/// The four bivariate data sets.
inline std::vector<Replication> make_bivariate_dataset(DatasetKind kind, std::size_t n_reps, Variant variant,
                                                       std::uint64_t master_seed) {
    detail::require(kind != DatasetKind::sparse && kind != DatasetKind::fullrank,
                    "make_bivariate_dataset: not a bivariate data set");
    return make_dataset(kind, n_reps, variant, master_seed);
}

} // namespace chasm

#endif
