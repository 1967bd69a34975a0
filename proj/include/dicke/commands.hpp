// commands.hpp — CLI subcommands: compute, then persist CSV/JSON artifacts

#pragma once

#include "config.hpp"
#include "dynamics.hpp"
#include "io.hpp"
#include "liouvillian.hpp"
#include "rateq.hpp"
#include "symmetry.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

namespace dicke {

namespace fs = std::filesystem;

namespace detail {

inline io::Json complex_json(cplx z) { return io::Json::array({io::json_number(z.real()), io::json_number(z.imag())}); }

inline io::Json number_list(const std::vector<double>& v) {
    io::Json a = io::Json::array();
    for (double x : v) a.push_back(io::json_number(x));
    return a;
}

inline io::Json document(const std::string& schema, const RunConfig& c) {
    io::Json j;
    j["schema"] = schema;
    j["config_hash"] = config_hash(c);
    j["config"] = config_json(c);
    j["config"]["output"].erase("directory");
    j["units"] = {{"rates", "gamma"}, {"gamma", io::json_number(c.gamma_label)}};
    return j;
}

/// Left-justify to `width` columns, counting UTF-8 code points.
inline std::string pad(const std::string& s, std::size_t width) {
    std::size_t cols = 0;
    for (unsigned char ch : s) cols += (ch & 0xC0) != 0x80;
    return s + std::string(cols < width ? width - cols : 1, ' ');
}

inline int worker_count(int requested, std::size_t jobs) {
    int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(jobs, 1)));
}

/// Runs job(i) for i in [0, count) on `threads` workers; results are written
/// by index, so output order never depends on scheduling.
template <class Job>
void parallel_for(std::size_t count, int threads, Job job) {
    const int workers = worker_count(threads, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) job(i);
        });
    for (auto& t : pool) t.join();
}

} // namespace detail

// ---- spectrum ----

struct SpectrumResult {
    LiouvillianSpectrum spectrum;
    SubradiantReport report;
    std::optional<DriveLimitCount> drive_limit;
    double gap_ratio = 0.0;
    io::Json json;
};

inline SpectrumResult run_spectrum(const RunConfig& c) {
    const ModelParams params = c.model();
    SpectrumResult r;
    r.spectrum = spectrum(build_liouvillian(params));
    const auto& s = r.spectrum;
    const auto& t = c.thresholds;
    r.report = classify_subradiant(s, t.subradiant, t.frequency, t.dedup);
    const Eigen::Index k = std::min<Eigen::Index>(c.eigen_count(), s.size());
    if (k < s.size()) r.gap_ratio = cluster_gap_ratio(s, k);
    if (c.drive_limit_factor > 1.0 && params.drive > 0.0)
        r.drive_limit = drive_limit_dark_count(params, c.drive_limit_factor, t.subradiant);

    io::Json j = detail::document("dicke.spectrum/1", c);
    j["atom_count"] = c.atom_count;
    j["dimension"] = s.size();
    j["vectorization"] = "column-stacking";
    j["diagnostics"] = {{"norm", io::json_number(s.norm)},
                        {"biorth_error", io::json_number(s.biorth_error)},
                        {"condition_estimate", io::json_number(s.condition_estimate)},
                        {"max_residual", io::json_number(s.residuals.maxCoeff())},
                        {"zero_eigenvalues", zero_eigenvalue_count(s)}};
    io::Json ev = io::Json::array(), res = io::Json::array();
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        ev.push_back(detail::complex_json(s.eigenvalues(i) / s.decay_rate));
        res.push_back(io::json_number(s.residuals(i)));
    }
    io::Json cls;
    cls["threshold"] = io::json_number(t.subradiant);
    cls["lambda1"] = detail::complex_json(r.report.lambda1);
    cls["count_inclusive"] = r.report.count_inclusive;
    cls["count_exclusive"] = r.report.count_exclusive;
    cls["frequencies"] = detail::number_list(r.report.frequencies);
    cls["frequency_tol"] = io::json_number(t.frequency);
    cls["dedup_tol"] = io::json_number(t.dedup);
    cls["cluster"] = {{"size", k},
                      {"gap_ratio", io::json_number(r.gap_ratio)},
                      {"frequencies", detail::number_list(cluster_frequencies(s, k, t.frequency, t.dedup))}};
    if (r.drive_limit)
        cls["drive_limit"] = {{"drive_factor", io::json_number(r.drive_limit->drive_factor)},
                              {"threshold", io::json_number(r.drive_limit->threshold / r.drive_limit->drive_factor)},
                              {"count_inclusive", r.drive_limit->inclusive},
                              {"count_exclusive", r.drive_limit->exclusive}};
    j["classification"] = cls;
    j["eigenvalues"] = ev;
    j["residuals"] = res;
    r.json = std::move(j);
    return r;
}

inline void write_spectrum(const RunConfig& c, const SpectrumResult& r, const fs::path& dir) {
    if (c.wants("json")) io::write_json(dir / "spectrum.json", r.json);
    if (c.wants("csv")) {
        io::CsvTable t({"re", "im"});
        for (Eigen::Index i = 0; i < r.spectrum.size(); ++i) {
            const cplx z = r.spectrum.eigenvalues(i) / r.spectrum.decay_rate;
            t.add_row({io::format_number(z.real()), io::format_number(z.imag())});
        }
        io::atomic_write(dir / "spectrum.csv", t.str());
    }
}

// ---- sweep ----

struct SweepPoint {
    double drive = 0.0;
    double spread = 0.0;
    cplx lambda1{std::nan(""), std::nan("")};
    int subradiant_count = -1;
    std::vector<cplx> eigenvalues; // first K
    std::string error;
    double seconds = 0.0;
};

struct SweepResult {
    std::vector<double> drives;
    std::vector<double> spreads;
    std::vector<SweepPoint> points; // row-major: spread outer, drive inner
    int eigen_count = 0;
};

inline SweepPoint sweep_point(const RunConfig& c, double drive, double spread) {
    SweepPoint p;
    p.drive = drive;
    p.spread = spread;
    const auto start = std::chrono::steady_clock::now();
    try {
        ModelParams params = c.model();
        params.drive = drive;
        params.detunings = c.disorder.materialize(c.atom_count, spread);
        const auto s = spectrum(build_liouvillian(params));
        const auto rep = classify_subradiant(s, c.thresholds.subradiant, c.thresholds.frequency, c.thresholds.dedup);
        p.lambda1 = rep.lambda1;
        p.subradiant_count = rep.count_inclusive;
        for (Eigen::Index i = 0; i < std::min<Eigen::Index>(c.eigen_count(), s.size()); ++i)
            p.eigenvalues.push_back(s.eigenvalues(i) / s.decay_rate);
    } catch (const std::exception& e) {
        p.error = e.what();
    }
    p.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return p;
}

inline SweepResult run_sweep(const RunConfig& c) {
    if (c.disorder.kind == DisorderSpec::Kind::explicit_list)
        throw ConfigError("sweep needs equidistant or gaussian disorder (explicit values cannot be rescaled)");
    SweepResult r;
    r.drives = c.sweep_drive.points();
    r.spreads = c.sweep_spread.points();
    r.eigen_count = c.eigen_count();
    const std::size_t nd = r.drives.size();
    r.points.resize(nd * r.spreads.size());
    detail::parallel_for(r.points.size(), c.threads,
                         [&](std::size_t i) { r.points[i] = sweep_point(c, r.drives[i % nd], r.spreads[i / nd]); });
    return r;
}

inline void write_sweep(const RunConfig& c, const SweepResult& r, const fs::path& dir) {
    using io::format_number;
    io::CsvTable main({"omega_drive", "delta_omega", "re_lambda1", "im_lambda1", "subradiant_count", "errors"});
    io::CsvTable eig({"omega_drive", "delta_omega", "index", "re", "im"});
    io::CsvTable timing({"omega_drive", "delta_omega", "seconds"});
    for (const auto& p : r.points) {
        const bool ok = p.error.empty();
        main.add_row({format_number(p.drive), format_number(p.spread), ok ? format_number(p.lambda1.real()) : "",
                      ok ? format_number(p.lambda1.imag()) : "", ok ? std::to_string(p.subradiant_count) : "",
                      p.error});
        for (std::size_t k = 0; k < p.eigenvalues.size(); ++k)
            eig.add_row({format_number(p.drive), format_number(p.spread), std::to_string(k),
                         format_number(p.eigenvalues[k].real()), format_number(p.eigenvalues[k].imag())});
        timing.add_row({format_number(p.drive), format_number(p.spread), format_number(p.seconds)});
    }
    if (c.wants("csv")) {
        io::atomic_write(dir / "sweep.csv", main.str());
        io::atomic_write(dir / "sweep_eigenvalues.csv", eig.str());
    }
    if (c.wants("json")) {
        io::Json j = detail::document("dicke.sweep/1", c);
        j["order"] = "row-major: delta_omega outer, omega_drive inner";
        j["omega_drive"] = detail::number_list(r.drives);
        j["delta_omega"] = detail::number_list(r.spreads);
        j["eigenvalues_per_point"] = r.eigen_count;
        int failures = 0;
        for (const auto& p : r.points) failures += !p.error.empty();
        j["failed_points"] = failures;
        io::write_json(dir / "sweep.json", j);
    }
    io::atomic_write(dir / "sweep_timing.csv", timing.str());
}

// ---- dynamics ----

struct PairFit {
    PairLabel pair;
    std::optional<ExpFit> fit;
    std::string error;
    Eigen::Index dominant = -1;
};

struct DynamicsResult {
    TimeTrace trace;
    std::vector<PairFit> fits;
    EigenvectorObservables contributions;
    LiouvillianSpectrum spectrum;
    bool envelope = false;
};

inline DynamicsResult run_dynamics(const RunConfig& c) {
    const ModelParams params = c.model();
    const auto pairs = c.pair_list();
    const auto times = c.dynamics.times.points();
    const Operator rho0 = initial_state(c.dynamics.initial_state, c.atom_count);
    const Superoperator L = build_liouvillian(params);
    DynamicsResult r;
    r.spectrum = spectrum(L);
    if (c.dynamics.method == "ode") r.trace = correlations(propagate_ode(L, rho0, times), pairs);
    else r.trace = correlations_spectral(r.spectrum, rho0, times, pairs);
    r.contributions = eigenvector_observables(r.spectrum, pairs, c.dynamics.contributions);
    r.envelope = c.dynamics.envelope == "on" || (c.dynamics.envelope == "auto" && params.dd_strength != 0.0);
    FitOptions opt;
    opt.envelope = r.envelope;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        PairFit f;
        f.pair = pairs[i];
        try {
            f.fit = fit_exponential(r.trace.times, r.trace.magnitudes(i), c.dynamics.fit_window, opt);
        } catch (const std::exception& e) {
            f.error = e.what();
        }
        if (r.contributions.values.rows() > 1) f.dominant = r.contributions.dominant(i);
        r.fits.push_back(std::move(f));
    }
    return r;
}

inline void write_dynamics(const RunConfig& c, const DynamicsResult& r, const fs::path& dir) {
    using io::format_number;
    if (c.wants("csv")) {
        std::vector<std::string> header{"t"};
        for (auto p : r.trace.pairs) {
            header.push_back("re_" + p.str());
            header.push_back("im_" + p.str());
        }
        io::CsvTable t(header);
        for (std::size_t k = 0; k < r.trace.times.size(); ++k) {
            std::vector<std::string> row{format_number(r.trace.times[k])};
            for (std::size_t p = 0; p < r.trace.pairs.size(); ++p) {
                row.push_back(format_number(r.trace.values[p][k].real()));
                row.push_back(format_number(r.trace.values[p][k].imag()));
            }
            t.add_row(std::move(row));
        }
        io::atomic_write(dir / "trace.csv", t.str());

        std::vector<std::string> ch{"index", "re_lambda", "im_lambda"};
        for (auto p : r.contributions.pairs) ch.push_back("abs_" + p.str());
        io::CsvTable ct(ch);
        for (Eigen::Index i = 0; i < r.contributions.values.rows(); ++i) {
            std::vector<std::string> row{std::to_string(i), format_number(r.contributions.eigenvalues[i].real()),
                                         format_number(r.contributions.eigenvalues[i].imag())};
            for (Eigen::Index p = 0; p < r.contributions.values.cols(); ++p)
                row.push_back(format_number(r.contributions.values(i, p)));
            ct.add_row(std::move(row));
        }
        io::atomic_write(dir / "contributions.csv", ct.str());
    }
    io::Json j = detail::document("dicke.fits/1", c);
    j["model"] = "A*exp(-B*t) on |<sigma_n^+ sigma_m^->|";
    j["method"] = "levenberg-marquardt, log-linear start";
    j["envelope"] = r.envelope;
    io::Json fits = io::Json::array();
    for (const auto& f : r.fits) {
        io::Json e;
        e["pair"] = {f.pair.n, f.pair.m};
        if (f.fit) {
            e["A"] = io::json_number(f.fit->amplitude);
            e["B"] = io::json_number(f.fit->rate);
            e["window"] = {io::json_number(f.fit->window.t_min), io::json_number(f.fit->window.t_max)};
            e["residual_rms"] = io::json_number(f.fit->residual_rms);
            e["samples"] = f.fit->samples;
            e["loglinear"] = {{"A", io::json_number(f.fit->loglinear_amplitude)},
                              {"B", io::json_number(f.fit->loglinear_rate)}};
        } else {
            e["error"] = f.error;
        }
        if (f.dominant >= 0) {
            const cplx z = r.contributions.eigenvalues[static_cast<std::size_t>(f.dominant)];
            e["dominant_eigenvector"] = {{"index", f.dominant}, {"lambda", detail::complex_json(z)},
                                         {"decay", io::json_number(-z.real())}};
        }
        fits.push_back(e);
    }
    j["fits"] = fits;
    io::write_json(dir / "fits.json", j);
}

// ---- symmetry ----

struct SymmetryResult {
    std::vector<LadderDecomposition> ladders;
    io::Json json;
    std::string table;
};

inline SymmetryResult run_symmetry(const RunConfig& c) {
    SymmetryResult r;
    io::Json j = detail::document("dicke.symmetry/1", c);
    io::Json entries = io::Json::array();
    std::ostringstream s1, t1;
    s1 << "Decomposition of the multiplicity spaces\n";
    s1 << "N    j     d_j  S_N              D_N              C_s\n";
    t1 << "Oscillation frequencies (D_N / C_s) and stationary counts (S_N / D_N / C_s)\n";
    t1 << "N    freq D_N  freq C_s  strong-drive  stat S_N  stat D_N  stat C_s\n";
    for (int n : c.symmetry_atoms) {
        io::Json per_n;
        per_n["atoms"] = n;
        per_n["strong_drive_count"] = count_strong_drive(n);
        io::Json groups = io::Json::array();
        std::vector<LadderDecomposition> ds;
        for (GroupKind k : {GroupKind::S, GroupKind::D, GroupKind::Cs}) {
            const PermGroup g = build_group(k, n);
            LadderDecomposition d = decompose_ladder(g);
            io::Json gj;
            gj["group"] = g.name();
            gj["order"] = g.order();
            io::Json classes = io::Json::array();
            for (const auto& cl : g.classes)
                classes.push_back({{"name", cl.name}, {"size", cl.members.size()}});
            gj["classes"] = classes;
            io::Json irreps = io::Json::array();
            for (const auto& ir : g.irreps)
                irreps.push_back({{"name", ir.name}, {"dim", ir.dim}, {"characters", detail::number_list(ir.characters)}});
            gj["irreps"] = irreps;
            io::Json rows = io::Json::array();
            for (const auto& row : d.rows) {
                io::Json terms = io::Json::array();
                for (const auto& t : row.terms)
                    terms.push_back({{"irrep", t.name}, {"dim", t.dim}, {"multiplicity", t.multiplicity}});
                rows.push_back({{"j", row.j.str()},
                                {"d_j", row.degeneracy},
                                {"label", row.label()},
                                {"blocks", row.blocks()},
                                {"terms", terms}});
            }
            gj["decomposition"] = rows;
            gj["stationary_count"] = count_stationary(d);
            gj["oscillation_frequencies"] = count_oscillation_frequencies(d);
            groups.push_back(gj);
            ds.push_back(d);
            r.ladders.push_back(d);
        }
        per_n["groups"] = groups;
        entries.push_back(per_n);

        for (std::size_t i = 0; i < ds[0].rows.size(); ++i) {
            const auto& row = ds[0].rows[i];
            s1 << detail::pad(std::to_string(n), 5) << detail::pad(row.j.str(), 6)
               << detail::pad(std::to_string(row.degeneracy), 5) << detail::pad(row.label(), 17)
               << detail::pad(ds[1].rows[i].label(), 17) << ds[2].rows[i].label() << "\n";
        }
        t1 << detail::pad(std::to_string(n), 5) << detail::pad(std::to_string(count_oscillation_frequencies(ds[1])), 10)
           << detail::pad(std::to_string(count_oscillation_frequencies(ds[2])), 10)
           << detail::pad(std::to_string(count_strong_drive(n)), 14)
           << detail::pad(std::to_string(count_stationary(ds[0])), 10)
           << detail::pad(std::to_string(count_stationary(ds[1])), 10) << count_stationary(ds[2]) << "\n";
    }
    j["entries"] = entries;
    r.json = std::move(j);
    r.table = t1.str() + "\n" + s1.str();
    return r;
}

inline void write_symmetry(const RunConfig&, const SymmetryResult& r, const fs::path& dir) {
    io::write_json(dir / "symmetry.json", r.json);
    io::atomic_write(dir / "symmetry.txt", r.table);
}

// ---- rates ----

struct RatesResult {
    RateMatrix rates;
    NullSpace null_space;
    double max_column_sum = 0.0;
    std::optional<FrequencyPrediction> prediction;
    std::optional<FrequencyComparison> comparison;
    std::vector<double> liouvillian_frequencies;
    io::Json json;

    bool conservation_ok() const { return max_column_sum < 1e-10; }
};

inline RatesResult run_rates(const RunConfig& c) {
    const ModelParams params = c.model();
    RatesResult r;
    r.rates = build_rate_matrix(params);
    r.null_space = stationary_count(r.rates);
    r.max_column_sum = r.rates.matrix.colwise().sum().cwiseAbs().maxCoeff();

    io::Json j = detail::document("dicke.rates/1", c);
    io::Json states = io::Json::array();
    for (Eigen::Index a = 0; a < r.rates.energies.size(); ++a)
        states.push_back({{"energy", io::json_number(r.rates.energies(a))},
                          {"j", r.rates.j_defined[static_cast<std::size_t>(a)] ? io::Json(r.rates.j_labels[a].str())
                                                                                 : io::Json(nullptr)}});
    j["states"] = states;
    io::Json deg = io::Json::array();
    for (const auto& d : r.rates.degeneracies)
        deg.push_back({{"energy", io::json_number(d.energy)},
                       {"dim", d.dim},
                       {"j", d.j_defined ? io::Json(d.j.str()) : io::Json(nullptr)},
                       {"method", d.method}});
    j["degenerate_subspaces"] = deg;
    j["fully_resolved"] = r.rates.fully_resolved();
    j["conservation"] = {{"max_column_sum", io::json_number(r.max_column_sum)}, {"pass", r.conservation_ok()}};
    j["null_space"] = {{"dimension", r.null_space.dimension},
                       {"threshold", io::json_number(r.null_space.threshold)},
                       {"largest_below", io::json_number(r.null_space.largest_below)},
                       {"smallest_above", io::json_number(r.null_space.smallest_above)},
                       {"ambiguous", r.null_space.ambiguous}};

    if (c.atom_count >= 2 && c.atom_count <= 5) {
        const PermGroup g = build_group(group_for_boundary(params.boundary), params.atom_count);
        r.prediction = predicted_frequencies(params, g, c.thresholds.dedup);
        const auto s = spectrum(build_liouvillian(params));
        r.liouvillian_frequencies =
            cluster_frequencies(s, static_cast<Eigen::Index>(count_strong_drive(c.atom_count)), c.thresholds.frequency,
                                c.thresholds.dedup);
        std::vector<double> pf;
        for (const auto& p : r.prediction->pairs) pf.push_back(p.frequency);
        r.comparison = compare_frequencies(pf, r.liouvillian_frequencies);
        io::Json blocks = io::Json::array();
        for (const auto& b : r.prediction->blocks)
            blocks.push_back({{"j", b.j.str()},
                              {"irrep", b.irrep},
                              {"copy", b.copy},
                              {"dim", b.dim},
                              {"energy", io::json_number(b.energy)}});
        io::Json pairs = io::Json::array();
        for (const auto& p : r.prediction->pairs)
            pairs.push_back({{"blocks", {p.a, p.b}}, {"frequency", io::json_number(p.frequency)}});
        io::Json fwd = io::Json::array(), bwd = io::Json::array();
        for (const auto& m : r.comparison->forward)
            fwd.push_back({{"predicted", io::json_number(m.predicted)},
                           {"observed", io::json_number(m.observed)},
                           {"relative_error", io::json_number(m.relative_error)},
                           {"matched", m.matched}});
        for (const auto& m : r.comparison->backward)
            bwd.push_back({{"observed", io::json_number(m.observed)},
                           {"predicted", io::json_number(m.predicted)},
                           {"relative_error", io::json_number(m.relative_error)},
                           {"matched", m.matched}});
        j["predicted_frequencies"] = {{"group", g.name()},
                                      {"blocks", blocks},
                                      {"pairs", pairs},
                                      {"count", r.prediction->pairs.size()},
                                      {"distinct", detail::number_list(r.prediction->distinct)}};
        j["liouvillian_check"] = {{"cluster_size", count_strong_drive(c.atom_count)},
                                  {"frequencies", detail::number_list(r.liouvillian_frequencies)},
                                  {"relative_tolerance", io::json_number(r.comparison->rel_tol)},
                                  {"reverse_floor", io::json_number(r.comparison->floor)},
                                  {"forward", fwd},
                                  {"reverse", bwd},
                                  {"pass", r.comparison->ok()}};
    }
    r.json = std::move(j);
    return r;
}

inline void write_rates(const RunConfig&, const RatesResult& r, const fs::path& dir) {
    io::write_json(dir / "rates.json", r.json);
}

} // namespace dicke
