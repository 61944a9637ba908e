#include "flowprobe/bench/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

#include <fmt/format.h>

#include "flowprobe/errors.hpp"

namespace flowprobe::bench {

namespace {

using nlohmann::json;

void require_keys(const json& j, std::initializer_list<std::string_view> allowed,
                  std::string_view where) {
    if (!j.is_object()) throw ConfigError(fmt::format("{}: expected an object", where));
    for (const auto& item : j.items()) {
        bool known = false;
        for (auto k : allowed) known = known || item.key() == k;
        if (!known) throw ConfigError(fmt::format("{}: unknown key '{}'", where, item.key()));
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

void read_range(const json& j, const char* key, double& lo, double& hi) {
    if (!j.contains(key)) return;
    const auto r = j.at(key).get<std::vector<double>>();
    if (r.size() != 2) throw ConfigError(fmt::format("'{}' must be a [lo, hi] pair", key));
    lo = r[0];
    hi = r[1];
}

ScheduleParams read_schedule(const json& j, ScheduleParams p) {
    p.epsilon = get_or(j, "epsilon", p.epsilon);
    p.dt_probe = get_or(j, "dt_probe", p.dt_probe);
    p.n_min = get_or(j, "n_min", p.n_min);
    p.n_max = get_or(j, "n_max", p.n_max);
    p.delta_n = get_or(j, "delta_n", p.delta_n);
    return p;
}

SolverConfig read_solver(const json& j, std::size_t index) {
    const auto where = fmt::format("solvers[{}]", index);
    SolverConfig s;
    s.kind = parse_solver_kind(j.at("name").get<std::string>());
    switch (s.kind) {
        case SolverKind::euler:
        case SolverKind::ab2:
            require_keys(j, {"name", "label", "steps"}, where);
            s.steps = j.at("steps").get<std::size_t>();
            break;
        case SolverKind::rk45:
            require_keys(j, {"name", "label", "atol", "rtol", "initial_step", "min_step",
                             "max_step"},
                         where);
            s.rk45.atol = get_or(j, "atol", s.rk45.atol);
            s.rk45.rtol = get_or(j, "rtol", s.rk45.rtol);
            s.rk45.initial_step = get_or(j, "initial_step", s.rk45.initial_step);
            s.rk45.min_step = get_or(j, "min_step", s.rk45.min_step);
            s.rk45.max_step = get_or(j, "max_step", s.rk45.max_step);
            break;
        case SolverKind::adaptive:
            require_keys(j, {"name", "label", "epsilon", "dt_probe", "n_min", "n_max", "delta_n"},
                         where);
            s.schedule = read_schedule(j, s.schedule);
            break;
    }
    s.label = j.contains("label") ? j.at("label").get<std::string>() : default_label(s);
    return s;
}

std::vector<CorpusEntry> read_generated(const json& j, std::size_t index, std::uint64_t seed) {
    const auto where = fmt::format("corpus[{}]", index);
    require_keys(j,
                 {"generate", "count", "prefix", "seed", "omega", "turn_start", "turn_length",
                  "speed", "curved_fraction"},
                 where);
    const auto kind = j.at("generate").get<std::string>();
    const auto count = j.at("count").get<std::size_t>();
    const auto family_seed = get_or<std::uint64_t>(j, "seed", seed + index);
    if (kind == "mixed") {
        return mixed_corpus(count, get_or(j, "curved_fraction", 0.3), family_seed);
    }
    PiecewiseFamily family;
    if (kind == "piecewise") {
        family = curved_family(count);
    } else if (kind == "near-straight") {
        family = near_straight_family(count);
    } else {
        throw ConfigError(fmt::format("{}: unknown generator '{}'", where, kind));
    }
    read_range(j, "omega", family.omega_lo, family.omega_hi);
    read_range(j, "turn_start", family.start_lo, family.start_hi);
    read_range(j, "turn_length", family.length_lo, family.length_hi);
    read_range(j, "speed", family.speed_lo, family.speed_hi);
    return generate_piecewise(family, family_seed, get_or<std::string>(j, "prefix", kind));
}

CorpusEntry read_entry(const json& j, std::size_t index,
                       const std::filesystem::path& base_dir) {
    const auto where = fmt::format("corpus[{}]", index);
    require_keys(j, {"name", "field", "condition"}, where);
    CorpusEntry e;
    e.name = j.at("name").get<std::string>();
    e.spec = j.at("field").get<FieldSpec>();
    if (e.spec.kind == FieldKind::learned) {
        const std::filesystem::path p = e.spec.weights;
        e.spec.weights = (p.is_absolute() ? p : base_dir / p).lexically_normal().string();
    }
    e.condition.embedding = get_or(j, "condition", std::vector<double>{});
    return e;
}

}  // namespace

std::string_view to_string(SolverKind kind) noexcept {
    switch (kind) {
        case SolverKind::euler: return "euler";
        case SolverKind::ab2: return "ab2";
        case SolverKind::rk45: return "rk45";
        case SolverKind::adaptive: return "adaptive";
    }
    return "?";
}

SolverKind parse_solver_kind(std::string_view name) {
    for (auto k : {SolverKind::euler, SolverKind::ab2, SolverKind::rk45, SolverKind::adaptive}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError(fmt::format("unknown solver '{}'", name));
}

std::string default_label(const SolverConfig& solver) {
    switch (solver.kind) {
        case SolverKind::euler:
        case SolverKind::ab2: return fmt::format("{}-{}", to_string(solver.kind), solver.steps);
        case SolverKind::rk45:
        case SolverKind::adaptive: return std::string(to_string(solver.kind));
    }
    return "?";
}

void validate(const ExperimentConfig& config) {
    if (config.corpus.empty()) throw ConfigError("config needs at least one field");
    if (config.solvers.empty()) throw ConfigError("config needs at least one solver");
    if (config.runs_per_cell < 1) throw ConfigError("runs_per_cell must be at least 1");
    if (config.timing_repeats < 1) throw ConfigError("timing_repeats must be at least 1");
    if (!(config.success_threshold > 0.0)) throw ConfigError("success_threshold must be positive");

    std::set<std::string> names;
    for (const auto& e : config.corpus) {
        if (!names.insert(e.name).second) {
            throw ConfigError(fmt::format("duplicate field name '{}'", e.name));
        }
        try {
            flowprobe::validate(e.spec);
        } catch (const ContractViolation& err) {
            throw ConfigError(fmt::format("field '{}': {}", e.name, err.what()));
        }
    }
    std::set<std::string> labels;
    for (const auto& s : config.solvers) {
        if (!labels.insert(s.label).second) {
            throw ConfigError(fmt::format("duplicate solver label '{}'", s.label));
        }
        try {
            switch (s.kind) {
                case SolverKind::euler:
                    if (s.steps < 1) throw ContractViolation("steps must be at least 1");
                    break;
                case SolverKind::ab2:
                    if (s.steps < 2) throw ContractViolation("ab2 needs at least 2 steps");
                    break;
                case SolverKind::rk45: flowprobe::validate(s.rk45); break;
                case SolverKind::adaptive: flowprobe::validate(s.schedule); break;
            }
        } catch (const ContractViolation& err) {
            throw ConfigError(fmt::format("solver '{}': {}", s.label, err.what()));
        }
    }
    try {
        flowprobe::validate(config.sweep_schedule);
    } catch (const ContractViolation& err) {
        throw ConfigError(fmt::format("sweeps.schedule: {}", err.what()));
    }
    for (double e : config.epsilon_values) {
        if (!(e > 0.0)) throw ConfigError("sweep epsilon values must be positive");
    }
    for (double dt : config.dt_values) {
        if (!(dt > 0.0 && dt < 1.0)) throw ConfigError("sweep dt_probe values must lie in (0, 1)");
    }
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    try {
        require_keys(doc,
                     {"seed", "runs_per_cell", "success_threshold", "output_dir", "timing_repeats",
                      "corpus", "solvers", "sweeps"},
                     "config");
        cfg.seed = get_or<std::uint64_t>(doc, "seed", cfg.seed);
        cfg.runs_per_cell = get_or(doc, "runs_per_cell", cfg.runs_per_cell);
        cfg.success_threshold = get_or(doc, "success_threshold", cfg.success_threshold);
        cfg.timing_repeats = get_or(doc, "timing_repeats", cfg.timing_repeats);
        if (doc.contains("output_dir")) {
            const std::filesystem::path p = doc.at("output_dir").get<std::string>();
            cfg.output_dir = p.is_absolute() ? p : base_dir / p;
        }
        const auto& corpus = doc.at("corpus");
        if (!corpus.is_array()) throw ConfigError("'corpus' must be a list");
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (corpus[i].contains("generate")) {
                auto generated = read_generated(corpus[i], i, cfg.seed);
                for (auto& e : generated) cfg.corpus.push_back(std::move(e));
            } else {
                cfg.corpus.push_back(read_entry(corpus[i], i, base_dir));
            }
        }
        const auto& solvers = doc.at("solvers");
        if (!solvers.is_array()) throw ConfigError("'solvers' must be a list");
        for (std::size_t i = 0; i < solvers.size(); ++i) {
            cfg.solvers.push_back(read_solver(solvers[i], i));
        }
        if (doc.contains("sweeps")) {
            const auto& sw = doc.at("sweeps");
            require_keys(sw, {"epsilon", "dt_probe", "schedule"}, "sweeps");
            cfg.epsilon_values = get_or(sw, "epsilon", std::vector<double>{});
            cfg.dt_values = get_or(sw, "dt_probe", std::vector<double>{});
            if (sw.contains("schedule")) {
                require_keys(sw.at("schedule"), {"epsilon", "dt_probe", "n_min", "n_max", "delta_n"},
                             "sweeps.schedule");
                cfg.sweep_schedule = read_schedule(sw.at("schedule"), cfg.sweep_schedule);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("malformed config: {}", e.what()));
    } catch (const ContractViolation& e) {
        throw ConfigError(e.what());
    }
    cfg.source = doc;
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    if (seed_override && doc.is_object()) doc["seed"] = *seed_override;
    return parse_config(doc, path.parent_path());
}

}  // namespace flowprobe::bench
