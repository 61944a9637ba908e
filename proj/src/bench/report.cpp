#include "flowprobe/bench/report.hpp"

#include <fstream>

#include <fmt/format.h>

#include "flowprobe/errors.hpp"

namespace flowprobe::bench {

namespace {

using nlohmann::json;

template <class T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> read_opt(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (v.is_null()) return std::nullopt;
    return v.get<T>();
}

template <class T>
std::string cell(const std::optional<T>& v) {
    return v ? fmt::format("{}", *v) : std::string();
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

json aggregate_json(const RunAggregate& a) {
    return {{"solver_name", a.solver_name},       {"runs", a.runs},
            {"mean_steps", a.mean_steps},         {"stddev_steps", opt(a.stddev_steps)},
            {"mean_nfe", a.mean_nfe},             {"stddev_nfe", opt(a.stddev_nfe)},
            {"mean_wall_time", a.mean_wall_time}, {"p95_wall_time", a.p95_wall_time},
            {"mean_error", a.mean_error},         {"success_rate", a.success_rate}};
}

RunAggregate aggregate_from(const json& j) {
    RunAggregate a;
    a.solver_name = j.at("solver_name").get<std::string>();
    a.runs = j.at("runs").get<std::size_t>();
    a.mean_steps = j.at("mean_steps").get<double>();
    a.stddev_steps = read_opt<double>(j, "stddev_steps");
    a.mean_nfe = j.at("mean_nfe").get<double>();
    a.stddev_nfe = read_opt<double>(j, "stddev_nfe");
    a.mean_wall_time = j.at("mean_wall_time").get<double>();
    a.p95_wall_time = j.at("p95_wall_time").get<double>();
    a.mean_error = j.at("mean_error").get<double>();
    a.success_rate = j.at("success_rate").get<double>();
    return a;
}

json run_json(const RunRecord& r) {
    return {{"run_id", r.run_id},
            {"solver", r.solver},
            {"field", r.field},
            {"x0_hash", r.x0_hash},
            {"steps", opt(r.steps)},
            {"nfe", opt(r.nfe)},
            {"solver_time_s", opt(r.solver_time_s)},
            {"error", opt(r.error)},
            {"success", r.success},
            {"probe_similarity", opt(r.probe_similarity)},
            {"scheduled_N", opt(r.scheduled_n)},
            {"failure", opt(r.failure)}};
}

RunRecord run_from(const json& j) {
    RunRecord r;
    r.run_id = j.at("run_id").get<std::size_t>();
    r.solver = j.at("solver").get<std::string>();
    r.field = j.at("field").get<std::string>();
    r.x0_hash = j.at("x0_hash").get<std::string>();
    r.steps = read_opt<std::size_t>(j, "steps");
    r.nfe = read_opt<std::uint64_t>(j, "nfe");
    r.solver_time_s = read_opt<double>(j, "solver_time_s");
    r.error = read_opt<double>(j, "error");
    r.success = j.at("success").get<bool>();
    r.probe_similarity = read_opt<double>(j, "probe_similarity");
    r.scheduled_n = read_opt<std::size_t>(j, "scheduled_N");
    r.failure = read_opt<std::string>(j, "failure");
    return r;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
    out << text;
    out.flush();
    if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

void strip(json& j) {
    static const char* const kVolatile[] = {"timestamp",      "solver_time_s",
                                            "oracle_time_s",  "field_setup_time_s",
                                            "mean_wall_time", "p95_wall_time",
                                            "mean_solver_time_s"};
    if (j.is_object()) {
        for (const char* key : kVolatile) j.erase(key);
        for (auto& item : j.items()) strip(item.value());
    } else if (j.is_array()) {
        for (auto& v : j) strip(v);
    }
}

}  // namespace

ReportFormats parse_formats(std::string_view list) {
    ReportFormats f{false, false};
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const auto comma = std::min(list.find(',', pos), list.size());
        const auto item = list.substr(pos, comma - pos);
        if (item == "csv") {
            f.csv = true;
        } else if (item == "json") {
            f.json = true;
        } else {
            throw ConfigError(fmt::format("unknown report format '{}'", item));
        }
        pos = comma + 1;
    }
    return f;
}

std::string to_csv(const ReportBundle& bundle) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& c : bundle.cells) {
        for (const auto& r : c.runs) {
            out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.run_id, csv_escape(r.solver),
                               csv_escape(r.field), cell(r.steps), cell(r.nfe),
                               cell(r.solver_time_s), cell(r.error), r.success ? 1 : 0,
                               cell(r.probe_similarity), cell(r.scheduled_n));
        }
    }
    return out;
}

void to_json(json& j, const ReportBundle& b) {
    json cells = json::array();
    for (const auto& c : b.cells) {
        json runs = json::array();
        for (const auto& r : c.runs) runs.push_back(run_json(r));
        cells.push_back({{"field", c.field},
                         {"solver", c.solver},
                         {"aggregate", c.aggregate ? aggregate_json(*c.aggregate) : json(nullptr)},
                         {"failed_runs", c.failed_runs},
                         {"field_setup_time_s", c.field_setup_time_s},
                         {"oracle_time_s", c.oracle_time_s},
                         {"runs", std::move(runs)}});
    }
    json sweeps = json::array();
    for (const auto& t : b.sweeps) {
        json rows = json::array();
        for (const auto& r : t.rows) {
            rows.push_back({{"value", r.value},
                            {"mean_steps", r.mean_steps},
                            {"mean_solver_time_s", opt(r.mean_solver_time_s)},
                            {"mean_error", r.mean_error},
                            {"success_rate", r.success_rate},
                            {"failure_rate", r.failure_rate}});
        }
        sweeps.push_back({{"parameter", t.parameter}, {"rows", std::move(rows)}});
    }
    json schedule = json::array();
    for (const auto& p : b.schedule_vs_curvature) {
        schedule.push_back({{"field", p.field},
                            {"solver", p.solver},
                            {"curvature", p.curvature},
                            {"mean_scheduled_N", p.mean_scheduled_n}});
    }
    j = {{"tool_version", b.tool_version},
         {"timestamp", b.timestamp},
         {"config", b.config},
         {"cells", std::move(cells)},
         {"sweeps", std::move(sweeps)},
         {"schedule_vs_curvature", std::move(schedule)}};
}

void from_json(const json& j, ReportBundle& b) {
    try {
        ReportBundle out;
        out.tool_version = j.at("tool_version").get<std::string>();
        out.timestamp = j.at("timestamp").get<std::string>();
        out.config = j.at("config");
        for (const auto& c : j.at("cells")) {
            CellResult cell;
            cell.field = c.at("field").get<std::string>();
            cell.solver = c.at("solver").get<std::string>();
            if (!c.at("aggregate").is_null()) cell.aggregate = aggregate_from(c.at("aggregate"));
            cell.failed_runs = c.at("failed_runs").get<std::size_t>();
            cell.field_setup_time_s = c.at("field_setup_time_s").get<double>();
            cell.oracle_time_s = c.at("oracle_time_s").get<double>();
            for (const auto& r : c.at("runs")) cell.runs.push_back(run_from(r));
            out.cells.push_back(std::move(cell));
        }
        for (const auto& t : j.at("sweeps")) {
            SweepTable table;
            table.parameter = t.at("parameter").get<std::string>();
            for (const auto& r : t.at("rows")) {
                SweepRow row;
                row.value = r.at("value").get<double>();
                row.mean_steps = r.at("mean_steps").get<double>();
                row.mean_solver_time_s = read_opt<double>(r, "mean_solver_time_s");
                row.mean_error = r.at("mean_error").get<double>();
                row.success_rate = r.at("success_rate").get<double>();
                row.failure_rate = r.at("failure_rate").get<double>();
                table.rows.push_back(row);
            }
            out.sweeps.push_back(std::move(table));
        }
        for (const auto& p : j.at("schedule_vs_curvature")) {
            out.schedule_vs_curvature.push_back(
                {p.at("field").get<std::string>(), p.at("solver").get<std::string>(),
                 p.at("curvature").get<double>(), p.at("mean_scheduled_N").get<double>()});
        }
        b = std::move(out);
    } catch (const json::exception& e) {
        throw SchemaError(fmt::format("not a report bundle: {}", e.what()));
    }
}

json without_volatile_fields(json j) {
    strip(j);
    return j;
}

std::vector<std::pair<std::string, std::string>> plot_data(const ReportBundle& bundle) {
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& t : bundle.sweeps) {
        if (t.rows.empty()) continue;
        auto curve = [&](const char* name, auto member) {
            std::string text;
            for (const auto& r : t.rows) text += fmt::format("{} {}\n", r.value, r.*member);
            files.emplace_back(fmt::format("sweep_{}_{}.dat", t.parameter, name), std::move(text));
        };
        curve("steps", &SweepRow::mean_steps);
        curve("success", &SweepRow::success_rate);
        curve("failure", &SweepRow::failure_rate);
        curve("error", &SweepRow::mean_error);
    }
    if (!bundle.schedule_vs_curvature.empty()) {
        std::string text;
        for (const auto& p : bundle.schedule_vs_curvature) {
            text += fmt::format("{} {}\n", p.curvature, p.mean_scheduled_n);
        }
        files.emplace_back("schedule_vs_curvature.dat", std::move(text));
    }
    return files;
}

std::vector<std::filesystem::path> emit_reports(const ReportBundle& bundle,
                                                const std::filesystem::path& dir,
                                                const ReportFormats& formats) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& text) {
        const auto path = dir / name;
        write_file(path, text);
        written.push_back(path);
    };
    if (formats.csv) emit("results.csv", to_csv(bundle));
    if (formats.json) emit("bundle.json", json(bundle).dump(2) + "\n");
    for (const auto& [name, text] : plot_data(bundle)) emit(name, text);
    return written;
}

}  // namespace flowprobe::bench
