// dynamics.hpp — time evolution, two-point correlations and decay fits

#pragma once

#include "liouvillian.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace dicke {

struct Trajectory {
    std::vector<double> times;
    std::vector<Operator> states;
};

namespace detail {

inline void check_times(const std::vector<double>& times) {
    if (times.empty()) throw std::invalid_argument("time grid is empty");
    if (times.front() < 0.0) throw std::invalid_argument("time grid must start at t >= 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("time grid must be strictly increasing");
}

} // namespace detail

inline std::vector<double> linspace(double a, double b, int count) {
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) v[i] = count == 1 ? a : a + (b - a) * i / (count - 1);
    return v;
}

inline std::vector<double> logspace(double a, double b, int count) {
    if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("logspace bounds must be positive");
    std::vector<double> v = linspace(std::log(a), std::log(b), count);
    for (double& x : v) x = std::exp(x);
    if (count > 1) {
        v.front() = a;
        v.back() = b;
    }
    return v;
}

/// Initial density matrices: "ground" (all |g>), "excited" (all |e>), "mixed" (I/2^N).
inline Operator initial_state(const std::string& name, int atom_count) {
    const int dim = hilbert_dim(atom_count);
    Operator rho = Operator::Zero(dim, dim);
    if (name == "ground") rho(dim - 1, dim - 1) = 1.0;
    else if (name == "excited") rho(0, 0) = 1.0;
    else if (name == "mixed") rho = Operator::Identity(dim, dim) / static_cast<double>(dim);
    else throw std::invalid_argument("unknown initial state '" + name + "' (expected ground|excited|mixed)");
    return rho;
}

/// ρ(t) = Σ c_i ρ_i e^{λ_i t}
inline Trajectory propagate_spectral(const LiouvillianSpectrum& spec, const Operator& rho0,
                                     const std::vector<double>& times) {
    detail::check_times(times);
    const Vector c = decompose_initial(spec, rho0);
    Trajectory traj;
    traj.times = times;
    traj.states.reserve(times.size());
    for (double t : times) {
        Vector w = c.array() * (spec.eigenvalues.array() * t).exp();
        traj.states.push_back(unvectorize(spec.right * w));
    }
    return traj;
}

struct OdeOptions {
    double tolerance = 1e-9; // local error per step, relative to max(1, |ρ|∞)
    double initial_step = 1e-3;
    double min_step = 1e-14;
    long max_steps = 20'000'000;
};

/// Adaptive Dormand–Prince 5(4) integration of dρ/dt = 𝓛ρ from t = 0,
/// landing exactly on every requested time.
inline Trajectory propagate_ode(const Superoperator& L, const Operator& rho0, const std::vector<double>& times,
                                const OdeOptions& opt = {}) {
    detail::check_times(times);
    if (rho0.size() != L.dim()) throw std::invalid_argument("initial state dimension mismatch");

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2, (void)c3, (void)c4, (void)c5; // autonomous system

    const Operator& A = L.matrix;
    Vector y = vectorize(rho0);
    double t = 0.0;
    double h = opt.initial_step;
    long steps = 0;
    Vector k1 = A * y, k2, k3, k4, k5, k6, k7, ytmp, ynew;

    Trajectory traj;
    traj.times = times;
    traj.states.reserve(times.size());
    for (double target : times) {
        while (t < target) {
            if (++steps > opt.max_steps) throw NumericalError("ODE integration exceeded max_steps");
            const bool last = t + h >= target;
            const double step = last ? target - t : h;
            ytmp = y + step * a21 * k1;
            k2 = A * ytmp;
            ytmp = y + step * (a31 * k1 + a32 * k2);
            k3 = A * ytmp;
            ytmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
            k4 = A * ytmp;
            ytmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
            k5 = A * ytmp;
            ytmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
            k6 = A * ytmp;
            ynew = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            k7 = A * ynew;
            const Vector err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double scale = opt.tolerance * std::max(1.0, y.cwiseAbs().maxCoeff());
            const double ratio = err.cwiseAbs().maxCoeff() / scale;
            if (ratio <= 1.0) {
                t = last ? target : t + step;
                y.swap(ynew);
                k1.swap(k7);
            }
            const double grow = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
            if (ratio <= 1.0 && last) {
                // keep h: the clipped final step says nothing about the natural step size
            } else {
                h = step * grow;
            }
            if (h < opt.min_step) throw NumericalError("ODE step size underflow at t = " + std::to_string(t));
        }
        traj.states.push_back(unvectorize(y));
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Correlations
// ---------------------------------------------------------------------------

struct PairLabel {
    int n = 1; // 1-based atom indices
    int m = 1;

    auto operator<=>(const PairLabel&) const = default;

    std::string str() const { return std::to_string(n) + "_" + std::to_string(m); }
};

inline std::vector<PairLabel> all_pairs(int atom_count) {
    std::vector<PairLabel> p;
    for (int n = 1; n <= atom_count; ++n)
        for (int m = n + 1; m <= atom_count; ++m) p.push_back({n, m});
    return p;
}

/// σ_n† σ_m
inline Operator pair_operator(PairLabel p, int atom_count) {
    return single_atom_op(p.n, SpinKind::raise, atom_count) * single_atom_op(p.m, SpinKind::lower, atom_count);
}

struct TimeTrace {
    std::vector<double> times;
    std::vector<PairLabel> pairs;
    std::vector<std::vector<cplx>> values; // values[pair][time]

    std::vector<double> magnitudes(std::size_t pair) const {
        std::vector<double> out(values.at(pair).size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(values[pair][i]);
        return out;
    }

    std::size_t index_of(PairLabel p) const {
        for (std::size_t i = 0; i < pairs.size(); ++i)
            if (pairs[i] == p) return i;
        throw std::invalid_argument("pair " + p.str() + " not in trace");
    }
};

/// <σ_n† σ_m>(t) = tr(σ_n^+ σ_m^- ρ(t))
inline TimeTrace correlations(const Trajectory& traj, const std::vector<PairLabel>& pairs) {
    if (traj.states.empty()) throw std::invalid_argument("empty trajectory");
    const int atom_count = static_cast<int>(std::lround(std::log2(static_cast<double>(traj.states.front().rows()))));
    TimeTrace trace;
    trace.times = traj.times;
    trace.pairs = pairs;
    for (PairLabel p : pairs) {
        const Operator op = pair_operator(p, atom_count);
        std::vector<cplx> series;
        series.reserve(traj.states.size());
        for (const auto& rho : traj.states) series.push_back((op * rho).trace());
        trace.values.push_back(std::move(series));
    }
    return trace;
}

/// Same observables evaluated mode by mode, Σ_i c_i tr(Oρ_i) e^{λ_i t}.
inline TimeTrace correlations_spectral(const LiouvillianSpectrum& spec, const Operator& rho0,
                                       const std::vector<double>& times, const std::vector<PairLabel>& pairs) {
    detail::check_times(times);
    const Vector c = decompose_initial(spec, rho0);
    TimeTrace trace;
    trace.times = times;
    trace.pairs = pairs;
    for (PairLabel p : pairs) {
        const Operator op = pair_operator(p, spec.atom_count);
        // tr(O ρ_i) = Σ_ab O_ab (ρ_i)_ba = vec(Oᵀ) · vec(ρ_i)
        const Vector ot = vectorize(op.transpose());
        const Vector weight = (ot.transpose() * spec.right).transpose().cwiseProduct(c);
        std::vector<cplx> series;
        series.reserve(times.size());
        for (double t : times) series.push_back((weight.array() * (spec.eigenvalues.array() * t).exp()).sum());
        trace.values.push_back(std::move(series));
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Exponential fits
// ---------------------------------------------------------------------------

struct FitWindow {
    double t_min = 20.0;
    double t_max = 500.0;
};

struct FitOptions {
    bool envelope = false; // fit through local maxima (oscillating traces)
    int max_iterations = 500;
};

/// A e^{−B t} fitted to |values| by nonlinear least squares, started from the
/// log-linear fit of log|value| against t.
struct ExpFit {
    double amplitude = 0.0;
    double rate = 0.0;
    FitWindow window;
    double residual_rms = 0.0;
    int samples = 0;
    bool envelope = false;
    double loglinear_amplitude = 0.0; // starting point from the log-linear fit
    double loglinear_rate = 0.0;
};

inline ExpFit fit_exponential(const std::vector<double>& times, const std::vector<double>& magnitudes,
                              FitWindow window = {}, FitOptions opt = {}) {
    if (times.size() != magnitudes.size()) throw std::invalid_argument("times and values differ in length");
    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < window.t_min || times[i] > window.t_max) continue;
        if (opt.envelope) {
            if (i == 0 || i + 1 >= times.size()) continue;
            if (!(magnitudes[i] >= magnitudes[i - 1] && magnitudes[i] >= magnitudes[i + 1])) continue;
        }
        ts.push_back(times[i]);
        ys.push_back(magnitudes[i]);
    }
    if (ts.size() < 10)
        throw std::invalid_argument("fit window [" + std::to_string(window.t_min) + ", " +
                                    std::to_string(window.t_max) + "] holds " + std::to_string(ts.size()) +
                                    " samples; at least 10 are required");
    for (double y : ys)
        if (!(y > 0.0)) throw std::invalid_argument("non-positive magnitude inside the fit window");

    const auto n = static_cast<Eigen::Index>(ts.size());
    const RealVector t = Eigen::Map<const RealVector>(ts.data(), n);
    const RealVector y = Eigen::Map<const RealVector>(ys.data(), n);

    // log-linear start: log y = a − B t
    RealMatrix design(n, 2);
    design.col(0).setOnes();
    design.col(1) = -t;
    const RealVector coef = design.colPivHouseholderQr().solve(y.array().log().matrix());
    double A = std::exp(coef(0));
    double B = coef(1);

    ExpFit fit;
    fit.window = window;
    fit.samples = static_cast<int>(n);
    fit.envelope = opt.envelope;
    fit.loglinear_amplitude = A;
    fit.loglinear_rate = B;

    // Levenberg–Marquardt on Σ (A e^{−Bt} − y)²
    auto cost = [&](double a, double b) { return (a * (-b * t.array()).exp() - y.array()).matrix().squaredNorm(); };
    double current = cost(A, B);
    double damping = 1e-3;
    for (int it = 0; it < opt.max_iterations; ++it) {
        const RealVector e = (-B * t.array()).exp().matrix();
        const RealVector r = A * e - y;
        RealMatrix jac(n, 2);
        jac.col(0) = e;
        jac.col(1) = (-A * t.array() * e.array()).matrix();
        const Eigen::Matrix2d jtj = jac.transpose() * jac;
        const Eigen::Vector2d g = jac.transpose() * r;
        bool accepted = false;
        Eigen::Vector2d step = Eigen::Vector2d::Zero();
        while (damping < 1e12) {
            Eigen::Matrix2d lhs = jtj;
            lhs.diagonal() += damping * jtj.diagonal().cwiseMax(1e-300);
            step = lhs.ldlt().solve(-g);
            const double trial = cost(A + step(0), B + step(1));
            if (std::isfinite(trial) && trial < current) {
                A += step(0);
                B += step(1);
                current = trial;
                damping = std::max(damping / 10.0, 1e-12);
                accepted = true;
                break;
            }
            damping *= 10.0;
        }
        if (!accepted) break;
        if (std::abs(step(0)) <= 1e-14 * std::max(std::abs(A), 1e-300) &&
            std::abs(step(1)) <= 1e-14 * std::max(std::abs(B), 1e-300))
            break;
    }
    fit.amplitude = A;
    fit.rate = B;
    fit.residual_rms = std::sqrt(current / static_cast<double>(n));
    return fit;
}

inline ExpFit fit_exponential(const TimeTrace& trace, PairLabel pair, FitWindow window = {}, FitOptions opt = {}) {
    return fit_exponential(trace.times, trace.magnitudes(trace.index_of(pair)), window, opt);
}

// ---------------------------------------------------------------------------
// Eigenvector contributions
// ---------------------------------------------------------------------------

struct EigenvectorObservables {
    std::vector<PairLabel> pairs;
    std::vector<cplx> eigenvalues; // first K, spectral order
    RealMatrix values;             // values(i, p) = |tr(σ_n†σ_m ρ_i)|

    /// Non-stationary eigenvector with the largest contribution to a pair.
    Eigen::Index dominant(std::size_t pair) const {
        Eigen::Index best = 1;
        for (Eigen::Index i = 1; i < values.rows(); ++i)
            if (values(i, static_cast<Eigen::Index>(pair)) > values(best, static_cast<Eigen::Index>(pair))) best = i;
        return best;
    }
};

/// Steady state (index 0) is trace-normalized; every other eigenmatrix is
/// traceless and taken at unit Frobenius norm.
inline EigenvectorObservables eigenvector_observables(const LiouvillianSpectrum& spec,
                                                      const std::vector<PairLabel>& pairs, Eigen::Index k = 14) {
    k = std::min(k, spec.size());
    EigenvectorObservables out;
    out.pairs = pairs;
    out.values.resize(k, static_cast<Eigen::Index>(pairs.size()));
    std::vector<Operator> ops;
    for (PairLabel p : pairs) ops.push_back(pair_operator(p, spec.atom_count));
    for (Eigen::Index i = 0; i < k; ++i) {
        out.eigenvalues.push_back(spec.eigenvalues(i));
        Operator rho = spec.eigenmatrix(i);
        if (i == 0) rho /= rho.trace();
        else rho /= rho.norm();
        for (std::size_t p = 0; p < pairs.size(); ++p)
            out.values(i, static_cast<Eigen::Index>(p)) = std::abs((ops[p] * rho).trace());
    }
    return out;
}

} // namespace dicke
