// config.hpp — run configuration, disorder materialization and validation

#pragma once

#include "dynamics.hpp"
#include "io.hpp"
#include "symmetry.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace dicke {

/// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kGaussianGenerator = "mt19937_64+box-muller/v1";

/// Standard normal draws; the sequence is fixed for a given seed.
inline std::vector<double> gaussian_draws(std::uint64_t seed, std::size_t count) {
    std::mt19937_64 gen(seed);
    constexpr double scale = 1.0 / 9007199254740992.0; // 2^-53
    std::vector<double> out;
    out.reserve(count + 1);
    while (out.size() < count) {
        const double u1 = (static_cast<double>(gen() >> 11) + 1.0) * scale; // (0, 1]
        const double u2 = static_cast<double>(gen() >> 11) * scale;         // [0, 1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        out.push_back(r * std::cos(2.0 * std::numbers::pi * u2));
        out.push_back(r * std::sin(2.0 * std::numbers::pi * u2));
    }
    out.resize(count);
    return out;
}

struct DisorderSpec {
    enum class Kind { explicit_list, equidistant, gaussian };
    Kind kind = Kind::equidistant;
    std::vector<double> values; // explicit
    double spread = 0.0;        // equidistant: ω_n spans [−spread, spread]
    double scale = 0.0;         // gaussian standard deviation
    std::uint64_t seed = 0;

    std::string kind_name() const {
        switch (kind) {
        case Kind::explicit_list: return "explicit";
        case Kind::equidistant: return "equidistant";
        case Kind::gaussian: return "gaussian";
        }
        return "?";
    }

    /// Detunings for N atoms; `spread_override` replaces spread/scale (sweeps).
    std::vector<double> materialize(int atom_count, std::optional<double> spread_override = {}) const {
        switch (kind) {
        case Kind::explicit_list:
            if (spread_override) throw ConfigError("explicit disorder cannot be swept over delta_omega");
            return values;
        case Kind::equidistant: return equidistant_detunings(atom_count, spread_override.value_or(spread));
        case Kind::gaussian: {
            auto w = gaussian_draws(seed, static_cast<std::size_t>(atom_count));
            const double s = spread_override.value_or(scale);
            for (double& x : w) x *= s;
            return w;
        }
        }
        return {};
    }
};

struct GridSpec {
    std::string spacing = "linear"; // linear | log | values
    double start = 0.0;
    double stop = 0.0;
    int count = 1;
    std::vector<double> values;

    std::vector<double> points() const {
        if (spacing == "values") return values;
        if (spacing == "log") return logspace(start, stop, count);
        return linspace(start, stop, count);
    }
};

struct DynamicsSpec {
    GridSpec times{"log", 20.0, 500.0, 500, {}};
    FitWindow fit_window{20.0, 500.0};
    std::string initial_state = "ground";
    std::vector<PairLabel> pairs; // empty: all n < m
    std::string method = "spectral"; // spectral | ode
    std::string envelope = "auto";   // auto | on | off
    int contributions = 14;
};

struct Thresholds {
    double subradiant = 0.05;
    double frequency = 1e-6; // |Im λ| counted as oscillating above this
    double dedup = 1e-6;
};

struct RunConfig {
    int atom_count = 4;
    double drive = 1.0;
    double dd_strength = 0.0;
    Boundary boundary = Boundary::none;
    double gamma_label = 1.0; // output labeling only; dynamics use γ = 1
    DisorderSpec disorder;
    GridSpec sweep_drive{"log", 0.1, 100.0, 20, {}};
    GridSpec sweep_spread{"linear", 0.0, 3.0, 20, {}};
    int sweep_eigenvalues = 0; // 0: Σ_j d_j²
    DynamicsSpec dynamics;
    std::vector<int> symmetry_atoms{2, 3, 4, 5};
    double drive_limit_factor = 10.0; // 0 disables the strong-drive recount
    Thresholds thresholds;
    std::string output_dir = "out";
    std::vector<std::string> formats{"json", "csv"};
    int threads = 0; // 0: hardware concurrency

    ModelParams model() const {
        ModelParams p;
        p.atom_count = atom_count;
        p.decay_rate = 1.0;
        p.drive = drive;
        p.detunings = disorder.materialize(atom_count);
        p.dd_strength = dd_strength;
        p.boundary = boundary;
        return p;
    }

    bool wants(const std::string& format) const {
        for (const auto& f : formats)
            if (f == format) return true;
        return false;
    }

    int eigen_count() const {
        return sweep_eigenvalues > 0 ? sweep_eigenvalues : static_cast<int>(count_strong_drive(atom_count));
    }

    std::vector<PairLabel> pair_list() const { return dynamics.pairs.empty() ? all_pairs(atom_count) : dynamics.pairs; }
};

namespace detail {

inline void check_keys(const io::Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError("unknown key '" + where + "." + it.key() + "'");
    }
}

template <class T>
T get_or(const io::Json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("'" + where + "." + key + "' has the wrong type");
    }
}

inline GridSpec parse_grid(const io::Json& j, const std::string& where, GridSpec g) {
    check_keys(j, where, {"spacing", "start", "stop", "count", "values"});
    g.spacing = get_or<std::string>(j, "spacing", j.contains("values") ? "values" : g.spacing, where);
    if (g.spacing != "linear" && g.spacing != "log" && g.spacing != "values")
        throw ConfigError("'" + where + ".spacing' must be linear, log or values");
    g.start = get_or<double>(j, "start", g.start, where);
    g.stop = get_or<double>(j, "stop", g.stop, where);
    g.count = get_or<int>(j, "count", g.count, where);
    g.values = get_or<std::vector<double>>(j, "values", g.values, where);
    return g;
}

inline void validate_grid(const GridSpec& g, const std::string& where) {
    if (g.spacing == "values") {
        if (g.values.empty()) throw ConfigError("'" + where + "' has no values");
        for (double v : g.values)
            if (!std::isfinite(v) || v < 0.0) throw ConfigError("'" + where + "' values must be finite and >= 0");
        return;
    }
    if (g.count < 1) throw ConfigError("'" + where + ".count' must be > 0");
    if (!std::isfinite(g.start) || !std::isfinite(g.stop) || g.start < 0.0 || g.stop < 0.0)
        throw ConfigError("'" + where + "' bounds must be finite and >= 0");
    if (g.spacing == "log" && (g.start <= 0.0 || g.stop <= 0.0))
        throw ConfigError("'" + where + "' log spacing needs positive bounds");
}

} // namespace detail

inline void validate(const RunConfig& c) {
    if (c.atom_count < 1 || c.atom_count > kMaxDenseAtoms)
        throw ConfigError("model.atoms must be in 1.." + std::to_string(kMaxDenseAtoms) + ", got " +
                          std::to_string(c.atom_count));
    if (!std::isfinite(c.drive) || c.drive < 0.0) throw ConfigError("model.drive must be finite and >= 0");
    if (!std::isfinite(c.dd_strength)) throw ConfigError("model.dd_strength must be finite");
    if (!(c.gamma_label > 0.0)) throw ConfigError("model.gamma must be > 0");
    if (c.disorder.kind == DisorderSpec::Kind::explicit_list &&
        static_cast<int>(c.disorder.values.size()) != c.atom_count)
        throw ConfigError("disorder.values has " + std::to_string(c.disorder.values.size()) + " entries, expected " +
                          std::to_string(c.atom_count));
    if (c.disorder.spread < 0.0 || c.disorder.scale < 0.0) throw ConfigError("disorder spread/scale must be >= 0");
    try {
        c.model().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    detail::validate_grid(c.sweep_drive, "sweep.drive");
    detail::validate_grid(c.sweep_spread, "sweep.spread");
    if (c.sweep_eigenvalues < 0) throw ConfigError("sweep.eigenvalues must be >= 0");
    const auto& d = c.dynamics;
    detail::validate_grid(d.times, "dynamics.times");
    try {
        const auto ts = d.times.points();
        detail::check_times(ts);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("dynamics.times: ") + e.what());
    }
    if (!(d.fit_window.t_max > d.fit_window.t_min)) throw ConfigError("dynamics.fit_window must have t_max > t_min");
    if (d.initial_state != "ground" && d.initial_state != "excited" && d.initial_state != "mixed")
        throw ConfigError("dynamics.initial_state must be ground, excited or mixed");
    if (d.method != "spectral" && d.method != "ode") throw ConfigError("dynamics.method must be spectral or ode");
    if (d.envelope != "auto" && d.envelope != "on" && d.envelope != "off")
        throw ConfigError("dynamics.envelope must be auto, on or off");
    if (d.contributions < 1) throw ConfigError("dynamics.contributions must be >= 1");
    for (auto p : d.pairs)
        if (p.n < 1 || p.m < 1 || p.n > c.atom_count || p.m > c.atom_count)
            throw ConfigError("dynamics pair (" + std::to_string(p.n) + "," + std::to_string(p.m) + ") out of range");
    for (int n : c.symmetry_atoms)
        if (n < 2 || n > 5) throw ConfigError("symmetry.atoms entries must be in 2..5");
    if (c.drive_limit_factor < 0.0) throw ConfigError("classification.drive_limit_factor must be >= 0");
    if (!(c.thresholds.subradiant > 0.0) || !(c.thresholds.frequency >= 0.0) || !(c.thresholds.dedup >= 0.0))
        throw ConfigError("thresholds must be non-negative (subradiant > 0)");
    if (c.output_dir.empty()) throw ConfigError("output.directory must not be empty");
    for (const auto& f : c.formats)
        if (f != "json" && f != "csv") throw ConfigError("output.formats entries must be json or csv");
    if (c.threads < 0) throw ConfigError("threads must be >= 0");
}

inline RunConfig parse_config(const io::Json& root) {
    using detail::check_keys;
    using detail::get_or;
    RunConfig c;
    check_keys(root, "config",
               {"model", "disorder", "sweep", "dynamics", "symmetry", "classification", "thresholds", "output",
                "threads"});
    if (root.contains("model")) {
        const auto& m = root["model"];
        check_keys(m, "model", {"atoms", "drive", "dd_strength", "boundary", "gamma"});
        c.atom_count = get_or<int>(m, "atoms", c.atom_count, "model");
        c.drive = get_or<double>(m, "drive", c.drive, "model");
        c.dd_strength = get_or<double>(m, "dd_strength", c.dd_strength, "model");
        c.gamma_label = get_or<double>(m, "gamma", c.gamma_label, "model");
        try {
            c.boundary = boundary_from_string(get_or<std::string>(m, "boundary", to_string(c.boundary), "model"));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (root.contains("disorder")) {
        const auto& d = root["disorder"];
        check_keys(d, "disorder", {"kind", "values", "spread", "scale", "seed"});
        const auto kind = get_or<std::string>(d, "kind", "", "disorder");
        if (kind == "explicit") {
            if (!d.contains("values") || d.contains("spread") || d.contains("scale") || d.contains("seed"))
                throw ConfigError("explicit disorder takes exactly 'values'");
            c.disorder.kind = DisorderSpec::Kind::explicit_list;
            c.disorder.values = get_or<std::vector<double>>(d, "values", {}, "disorder");
        } else if (kind == "equidistant") {
            if (d.contains("values") || d.contains("scale") || d.contains("seed"))
                throw ConfigError("equidistant disorder takes exactly 'spread'");
            c.disorder.kind = DisorderSpec::Kind::equidistant;
            c.disorder.spread = get_or<double>(d, "spread", 0.0, "disorder");
        } else if (kind == "gaussian") {
            if (d.contains("values") || d.contains("spread"))
                throw ConfigError("gaussian disorder takes 'scale' and 'seed'");
            c.disorder.kind = DisorderSpec::Kind::gaussian;
            c.disorder.scale = get_or<double>(d, "scale", 0.0, "disorder");
            c.disorder.seed = get_or<std::uint64_t>(d, "seed", 0, "disorder");
        } else {
            throw ConfigError("disorder.kind must be explicit, equidistant or gaussian");
        }
    }
    if (root.contains("sweep")) {
        const auto& s = root["sweep"];
        check_keys(s, "sweep", {"drive", "spread", "eigenvalues"});
        if (s.contains("drive")) c.sweep_drive = detail::parse_grid(s["drive"], "sweep.drive", c.sweep_drive);
        if (s.contains("spread")) c.sweep_spread = detail::parse_grid(s["spread"], "sweep.spread", c.sweep_spread);
        c.sweep_eigenvalues = get_or<int>(s, "eigenvalues", c.sweep_eigenvalues, "sweep");
    }
    if (root.contains("dynamics")) {
        const auto& d = root["dynamics"];
        check_keys(d, "dynamics",
                   {"times", "fit_window", "initial_state", "pairs", "method", "envelope", "contributions"});
        auto& dyn = c.dynamics;
        if (d.contains("times")) dyn.times = detail::parse_grid(d["times"], "dynamics.times", dyn.times);
        if (d.contains("fit_window")) {
            const auto w = get_or<std::vector<double>>(d, "fit_window", {}, "dynamics");
            if (w.size() != 2) throw ConfigError("dynamics.fit_window must be [t_min, t_max]");
            dyn.fit_window = {w[0], w[1]};
        }
        dyn.initial_state = get_or<std::string>(d, "initial_state", dyn.initial_state, "dynamics");
        dyn.method = get_or<std::string>(d, "method", dyn.method, "dynamics");
        dyn.envelope = get_or<std::string>(d, "envelope", dyn.envelope, "dynamics");
        dyn.contributions = get_or<int>(d, "contributions", dyn.contributions, "dynamics");
        if (d.contains("pairs")) {
            const auto raw = get_or<std::vector<std::vector<int>>>(d, "pairs", {}, "dynamics");
            for (const auto& p : raw) {
                if (p.size() != 2) throw ConfigError("dynamics.pairs entries must be [n, m]");
                dyn.pairs.push_back({p[0], p[1]});
            }
        }
    }
    if (root.contains("symmetry")) {
        const auto& s = root["symmetry"];
        check_keys(s, "symmetry", {"atoms"});
        c.symmetry_atoms = get_or<std::vector<int>>(s, "atoms", c.symmetry_atoms, "symmetry");
    }
    if (root.contains("classification")) {
        const auto& s = root["classification"];
        check_keys(s, "classification", {"drive_limit_factor"});
        c.drive_limit_factor = get_or<double>(s, "drive_limit_factor", c.drive_limit_factor, "classification");
    }
    if (root.contains("thresholds")) {
        const auto& t = root["thresholds"];
        check_keys(t, "thresholds", {"subradiant", "frequency", "dedup"});
        c.thresholds.subradiant = get_or<double>(t, "subradiant", c.thresholds.subradiant, "thresholds");
        c.thresholds.frequency = get_or<double>(t, "frequency", c.thresholds.frequency, "thresholds");
        c.thresholds.dedup = get_or<double>(t, "dedup", c.thresholds.dedup, "thresholds");
    }
    if (root.contains("output")) {
        const auto& o = root["output"];
        check_keys(o, "output", {"directory", "formats"});
        c.output_dir = get_or<std::string>(o, "directory", c.output_dir, "output");
        c.formats = get_or<std::vector<std::string>>(o, "formats", c.formats, "output");
    }
    c.threads = get_or<int>(root, "threads", c.threads, "config");
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = io::read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    io::Json root;
    try {
        root = io::Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("malformed config " + path.string() + ": " + e.what());
    }
    return parse_config(root);
}

namespace detail {

inline io::Json grid_json(const GridSpec& g) {
    io::Json j;
    j["spacing"] = g.spacing;
    if (g.spacing == "values") {
        io::Json v = io::Json::array();
        for (double x : g.values) v.push_back(io::json_number(x));
        j["values"] = v;
    } else {
        j["start"] = io::json_number(g.start);
        j["stop"] = io::json_number(g.stop);
        j["count"] = g.count;
    }
    return j;
}

} // namespace detail

/// Resolved configuration, disorder values materialized.
inline io::Json config_json(const RunConfig& c) {
    io::Json j;
    j["model"] = {{"atoms", c.atom_count},
                  {"drive", io::json_number(c.drive)},
                  {"dd_strength", io::json_number(c.dd_strength)},
                  {"boundary", to_string(c.boundary)},
                  {"gamma", io::json_number(c.gamma_label)}};
    io::Json d;
    d["kind"] = c.disorder.kind_name();
    switch (c.disorder.kind) {
    case DisorderSpec::Kind::explicit_list: break;
    case DisorderSpec::Kind::equidistant: d["spread"] = io::json_number(c.disorder.spread); break;
    case DisorderSpec::Kind::gaussian:
        d["scale"] = io::json_number(c.disorder.scale);
        d["seed"] = c.disorder.seed;
        d["generator"] = kGaussianGenerator;
        break;
    }
    io::Json det = io::Json::array();
    for (double w : c.disorder.materialize(c.atom_count)) det.push_back(io::json_number(w));
    d["detunings"] = det;
    j["disorder"] = d;
    j["sweep"] = {{"drive", detail::grid_json(c.sweep_drive)},
                  {"spread", detail::grid_json(c.sweep_spread)},
                  {"eigenvalues", c.eigen_count()}};
    io::Json pairs = io::Json::array();
    for (auto p : c.pair_list()) pairs.push_back({p.n, p.m});
    j["dynamics"] = {{"times", detail::grid_json(c.dynamics.times)},
                     {"fit_window", {io::json_number(c.dynamics.fit_window.t_min),
                                     io::json_number(c.dynamics.fit_window.t_max)}},
                     {"initial_state", c.dynamics.initial_state},
                     {"pairs", pairs},
                     {"method", c.dynamics.method},
                     {"envelope", c.dynamics.envelope},
                     {"contributions", c.dynamics.contributions}};
    j["symmetry"] = {{"atoms", c.symmetry_atoms}};
    j["classification"] = {{"drive_limit_factor", io::json_number(c.drive_limit_factor)}};
    j["thresholds"] = {{"subradiant", io::json_number(c.thresholds.subradiant)},
                       {"frequency", io::json_number(c.thresholds.frequency)},
                       {"dedup", io::json_number(c.thresholds.dedup)}};
    j["output"] = {{"directory", c.output_dir}, {"formats", c.formats}};
    return j;
}

inline std::string config_hash(const RunConfig& c) {
    io::Json j = config_json(c);
    j["output"].erase("directory");
    return io::content_hash(j.dump());
}

} // namespace dicke
