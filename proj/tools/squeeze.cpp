// squeeze: command-line front end.
//
// Exit codes: 0 ok, 2 configuration or input error, 3 solver failure,
// 4 certificate failure.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "squeeze/annulus.hpp"
#include "squeeze/cantor.hpp"
#include "squeeze/config.hpp"
#include "squeeze/domain_json.hpp"
#include "squeeze/hyperbolic.hpp"
#include "squeeze/julia.hpp"
#include "squeeze/report.hpp"
#include "squeeze/slit_solver.hpp"

using namespace squeeze;

namespace {

constexpr int exit_ok = 0, exit_config = 2, exit_solver = 3, exit_certificate = 4;

int exit_code_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::ill_conditioned:
    case ErrorCode::residual_above_tol:
    case ErrorCode::truncation_not_converged:
    case ErrorCode::no_escape:
    case ErrorCode::unresolved_topology:
    case ErrorCode::branch_merge:
        return exit_solver;
    case ErrorCode::certification_failed:
    case ErrorCode::measure_bound_violated:
        return exit_certificate;
    default:
        return exit_config;
    }
}

// Flags map onto config keys; only flags given on the command line override
// the config file.
struct Flag {
    std::string name;
    std::string section; // "solver", "params" or "outputs"
    std::string key;
    char type;           // d double, i int, s string, c complex, I int list, L levels, g grid, B box, b bool
    std::string help;
    std::string value;
    CLI::Option* option = nullptr;
};

std::vector<double> split_numbers(const std::string& text, const std::string& what)
{
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw Error(ErrorCode::config_error, what + ": cannot parse '" + part + "' as a number");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

json flag_json(const Flag& f)
{
    const std::string what = "--" + f.name;
    switch (f.type) {
    case 'd': return split_numbers(f.value, what).at(0);
    case 'i': {
        const auto v = split_numbers(f.value, what);
        if (v.size() != 1 || v[0] != std::floor(v[0])) throw Error(ErrorCode::config_error, what + ": expected an integer");
        return static_cast<long long>(v[0]);
    }
    case 'c': {
        const cplx z = parse_complex_flag(f.value, what);
        return json::array({z.real(), z.imag()});
    }
    case 'I': {
        json arr = json::array();
        for (double v : split_numbers(f.value, what)) arr.push_back(static_cast<long long>(v));
        return arr;
    }
    case 'L': {
        if (f.value == "auto") return "auto";
        json arr = json::array();
        for (double v : split_numbers(f.value, what)) arr.push_back(v);
        return arr;
    }
    case 'g': {
        const auto v = split_numbers(f.value, what);
        if (v.size() != 6) throw Error(ErrorCode::config_error, what + ": expected xmin,xmax,ymin,ymax,nx,ny");
        return {{"xmin", v[0]}, {"xmax", v[1]}, {"ymin", v[2]}, {"ymax", v[3]},
                {"nx", static_cast<long long>(v[4])}, {"ny", static_cast<long long>(v[5])}};
    }
    case 'B': {
        const auto v = split_numbers(f.value, what);
        if (v.size() != 4) throw Error(ErrorCode::config_error, what + ": expected xmin,xmax,ymin,ymax");
        return json::array({v[0], v[1], v[2], v[3]});
    }
    case 'b':
        if (f.value == "true" || f.value == "1") return true;
        if (f.value == "false" || f.value == "0") return false;
        throw Error(ErrorCode::config_error, what + ": expected true or false");
    default: return f.value;
    }
}

struct Command {
    std::string name;
    CLI::App* app = nullptr;
    std::vector<Flag> flags;
    std::string config_file;
};

std::vector<Flag> solver_flags()
{
    return {{"M", "solver", "M", 'i', "series order per component"},
            {"N", "solver", "N", 'i', "boundary samples per component"},
            {"tol", "solver", "tol", 'd', "accepted boundary residual"},
            {"max-refinements", "solver", "max_refinements", 'i', "refinement levels after the first solve"}};
}

std::vector<Flag> flags_for(const std::string& cmd)
{
    std::vector<Flag> f;
    auto add = [&f](std::vector<Flag> more) { f.insert(f.end(), more.begin(), more.end()); };
    if (cmd == "slit") {
        add({{"domain", "params", "domain", 's', "domain JSON file"},
             {"x", "params", "x", 'c', "base point re,im"},
             {"base", "params", "base", 'i', "index of the base component"},
             {"out", "outputs", "out", 's', "solution JSON (stdout when absent)"}});
    } else if (cmd == "rmap") {
        add({{"domain", "params", "domain", 's', "domain JSON file"},
             {"grid", "params", "grid", 'g', "xmin,xmax,ymin,ymax,nx,ny"},
             {"csv", "outputs", "csv", 's', "table (stdout when absent)"},
             {"svg", "outputs", "svg", 's', "heatmap figure"}});
    } else if (cmd == "loopbound") {
        add({{"domain", "params", "domain", 's', "domain JSON file"},
             {"loop", "params", "loop", 's', "loop JSON file: [[x, y], ...]"},
             {"out", "outputs", "out", 's', "estimate JSON (stdout when absent)"}});
    } else if (cmd == "sublemma") {
        add({{"delta", "params", "delta", 'd', "delta in (0, 1)"}, {"out", "outputs", "out", 's', "result JSON"}});
    } else if (cmd == "thm1") {
        add({{"eps", "params", "eps", 'd', "measure budget epsilon"},
             {"depth", "params", "depth", 'i', "number of stages"},
             {"schedule", "params", "schedule", 'I', "k per stage, comma separated (auto when absent)"},
             {"resume", "params", "resume", 's', "state JSON to continue from"},
             {"delta", "params", "delta", 'd', "offset of the sampled cube boundaries"},
             {"samples", "params", "samples", 'i', "samples per cube boundary"},
             {"threshold", "params", "threshold", 'd', "certificate threshold (1 - eps when absent)"},
             {"certify", "params", "certify", 'b', "run the certificate (true/false)"},
             {"out", "outputs", "out", 's', "state JSON"},
             {"report", "outputs", "report", 's', "certificate CSV"},
             {"svg", "outputs", "svg", 's', "figure of the final stage"}});
    } else if (cmd == "thm2") {
        add({{"stages", "params", "stages", 'i', "number of stages"},
             {"resume", "params", "resume", 's', "state JSON to continue from"},
             {"local-components", "params", "local_components", 'i', "components kept around each loop"},
             {"out", "outputs", "out", 's', "state JSON"},
             {"report", "outputs", "report", 's', "certificate CSV"},
             {"svg", "outputs", "svg", 's', "figure of the final stage"}});
    } else if (cmd == "julia") {
        add({{"c", "params", "c", 'c', "parameter re,im outside the Mandelbrot set"},
             {"levels", "params", "levels", 'L', "auto or comma separated levels"},
             {"bands", "params", "bands", 'i', "bands used by --levels auto"},
             {"resolution", "params", "resolution", 'i', "grid cells per side"},
             {"box", "params", "box", 'B', "xmin,xmax,ymin,ymax"},
             {"out", "outputs", "out", 's', "SVG of the level curves"},
             {"csv", "outputs", "csv", 's', "vertices of the level curves"}});
    } else if (cmd == "julia-rdecay") {
        add({{"c", "params", "c", 'c', "parameter re,im outside the Mandelbrot set"},
             {"bands", "params", "bands", 'i', "number of bands"},
             {"x", "params", "x", 'c', "fixed point re,im"},
             {"resolution", "params", "resolution", 'i', "grid cells per side"},
             {"vertices", "params", "vertices", 'i', "vertices per approximating loop"},
             {"report", "outputs", "report", 's', "decay CSV (stdout when absent)"}});
    } else if (cmd == "verify") {
        add({{"state", "params", "state", 's', "theorem1 or theorem2 state JSON"},
             {"delta", "params", "delta", 'd', "theorem1 boundary offset"},
             {"samples", "params", "samples", 'i', "theorem1 samples per cube"},
             {"threshold", "params", "threshold", 'd', "theorem1 threshold"},
             {"report", "outputs", "report", 's', "certificate CSV (stdout when absent)"}});
    }
    if (cmd != "sublemma") add(solver_flags());
    f.push_back({"manifest", "outputs", "manifest", 's', "where the effective config is written"});
    return f;
}

RunConfig effective_config(const Command& c)
{
    json j = c.config_file.empty() ? json::object() : read_json_file(c.config_file);
    if (!j.is_object()) throw Error(ErrorCode::config_error, c.config_file + ": expected an object");
    if (j.contains("command") && j["command"] != c.name) {
        throw Error(ErrorCode::config_error, c.config_file + ": config is for '" + j["command"].dump() + "'");
    }
    j["command"] = c.name;
    for (const auto& f : c.flags) {
        if (!f.option || f.option->count() == 0) continue;
        if (!j.contains(f.section)) j[f.section] = json::object();
        j[f.section][f.key] = flag_json(f);
    }
    return parse_config(j);
}

void write_or_print(const std::optional<std::string>& path, const std::string& text)
{
    if (path) {
        write_text_file(*path, text);
    } else {
        std::cout << text;
    }
}

Domain domain_param(const RunConfig& cfg) { return load_domain(param_string(cfg, "domain")); }

Table certificate_table() { return Table{{"stage", "kind", "x_re", "x_im", "value", "threshold", "witness", "pass"}, {}}; }

void add_rows(Table& t, std::span<const CertificateRow> rows)
{
    for (const auto& r : rows) {
        t.add({static_cast<long long>(r.stage), r.kind, r.x.real(), r.x.imag(), r.value, r.threshold, r.witness, r.pass});
    }
}

void add_rows(Table& t, const Theorem1Certificate& cert)
{
    for (const auto& r : cert.rows) {
        t.add({static_cast<long long>(r.stage), std::string("lower"), r.x.real(), r.x.imag(), r.lower, cert.threshold,
               r.error.empty() ? std::string("slit-map") : r.error, r.pass});
    }
}

/// 4 when a solved row misses its threshold, else 3 when a row hit a solver
/// failure.
int certificate_exit(std::size_t violated, std::size_t failed)
{
    if (violated) return exit_certificate;
    if (failed) return exit_solver;
    return exit_ok;
}

Theorem1Options theorem1_options(const RunConfig& cfg)
{
    Theorem1Options o;
    o.delta = param_number(cfg, "delta");
    o.samples = std::size_t(param_int(cfg, "samples"));
    if (!cfg.params["threshold"].is_null()) o.threshold = param_number(cfg, "threshold");
    o.params = cfg.solver;
    return o;
}

int run_theorem1_certificate(const RunConfig& cfg, const Theorem1State& st)
{
    const Theorem1Certificate cert = certify_theorem1(st, theorem1_options(cfg));
    Table t = certificate_table();
    add_rows(t, cert);
    if (auto p = output_path(cfg, "report")) emit_csv(t, *p);
    std::size_t violated = 0;
    for (const auto& r : cert.rows) violated += r.error.empty() && !r.pass;
    std::cout << "rows " << cert.rows.size() << " failures " << cert.failures << " skipped " << cert.skipped
              << " threshold " << format_real(cert.threshold) << "\n";
    for (const auto& [stage, v] : cert.min_lower) std::cout << "stage " << stage << " min lower " << format_real(v) << "\n";
    if (cert.trend) std::cout << "trend " << format_real(*cert.trend) << "\n";
    return certificate_exit(violated, cert.failures);
}

Theorem2Options theorem2_options(const RunConfig& cfg)
{
    Theorem2Options o;
    auto num = [&](const char* k) { return param_number(cfg, k); };
    auto in = [&](const char* k) { return param_int(cfg, k); };
    if (cfg.command == "thm2") {
        o.slack = num("slack");
        o.max_halvings = in("max_halvings");
        o.small_side = num("small_side");
        o.split_gap = num("split_gap");
        o.failure_budget = num("failure_budget");
    }
    o.loop_vertices = std::size_t(in("loop_vertices"));
    o.loop_samples = std::size_t(in("loop_samples"));
    o.verify.params = cfg.solver;
    o.verify.local_components = std::size_t(in("local_components"));
    o.verify.circle_vertices = std::size_t(in("circle_vertices"));
    o.verify.removed_samples = std::size_t(in("removed_samples"));
    return o;
}

int theorem2_report(const RunConfig& cfg, std::span<const CertificateRow> rows)
{
    Table t = certificate_table();
    add_rows(t, rows);
    if (auto p = output_path(cfg, "report")) {
        emit_csv(t, *p);
    } else if (cfg.command == "verify") {
        std::cout << to_csv(t);
    }
    std::size_t violated = 0, failed = 0;
    for (const auto& r : rows) {
        failed += r.solver_failure;
        violated += !r.solver_failure && !r.pass;
    }
    std::cerr << "rows " << rows.size() << " violated " << violated << " solver failures " << failed << "\n";
    return certificate_exit(violated, failed);
}

Figure cube_figure(const Domain& dom, std::vector<std::vector<cplx>> loops)
{
    Figure f = figure_of(dom);
    f.loops = std::move(loops);
    return f;
}

int run(const RunConfig& cfg)
{
    const std::string& cmd = cfg.command;

    if (cmd == "sublemma") {
        const double delta = param_number(cfg, "delta");
        const double gap = sublemma_gap(delta);
        std::cout << format_real(gap) << "\n";
        if (auto p = output_path(cfg, "out")) {
            write_text_file(*p, json({{"delta", delta}, {"gap", gap}, {"limit", std::log(2.0)}}).dump(2) + "\n");
        }
        return exit_ok;
    }

    if (cmd == "slit") {
        const Domain dom = domain_param(cfg);
        const SlitEvaluator eval(dom, cfg.solver);
        const int base = param_int(cfg, "base");
        if (base < 0 || std::size_t(base) >= dom.size()) {
            throw Error(ErrorCode::config_error, "params.base: no component " + std::to_string(base));
        }
        const SlitSolution sol = eval.solve(param_complex(cfg, "x"), std::size_t(base));
        write_or_print(output_path(cfg, "out"), to_json(sol).dump(2) + "\n");
        return exit_ok;
    }

    if (cmd == "rmap") {
        const Domain dom = domain_param(cfg);
        const json& g = cfg.params["grid"];
        GridSpec grid;
        grid.box = {g["xmin"].get<double>(), g["xmax"].get<double>(), g["ymin"].get<double>(), g["ymax"].get<double>()};
        if (!g["nx"].is_number_integer() || !g["ny"].is_number_integer() || g["nx"].get<long long>() < 1 ||
            g["ny"].get<long long>() < 1) {
            throw Error(ErrorCode::config_error, "params.grid: nx and ny must be positive integers");
        }
        grid.nx = g["nx"].get<std::size_t>();
        grid.ny = g["ny"].get<std::size_t>();
        const auto rows = r_field(dom, grid, cfg.solver);
        write_or_print(output_path(cfg, "csv"), to_csv(field_table(rows)));
        if (auto p = output_path(cfg, "svg")) {
            Figure f = figure_of(dom);
            f.heat = field_heat(grid, rows);
            emit_svg(f, *p);
        }
        std::size_t failed = 0;
        for (const auto& r : rows) {
            if (!r.bracket) {
                ++failed;
                std::cerr << "x=" << format_real(r.x.real()) << "," << format_real(r.x.imag()) << ": " << r.error << "\n";
            }
        }
        return failed ? exit_solver : exit_ok;
    }

    if (cmd == "loopbound") {
        const Domain dom = domain_param(cfg);
        const json lj = read_json_file(param_string(cfg, "loop"));
        std::vector<cplx> loop;
        if (!lj.is_array()) throw Error(ErrorCode::config_error, "loop: expected an array of [x, y]");
        for (std::size_t i = 0; i < lj.size(); ++i) {
            const auto& q = lj[i];
            if (!q.is_array() || q.size() != 2 || !q[0].is_number() || !q[1].is_number()) {
                throw Error(ErrorCode::config_error, "loop[" + std::to_string(i) + "]: expected [x, y]");
            }
            loop.emplace_back(q[0].get<double>(), q[1].get<double>());
        }
        const LoopEstimate est = kobayashi_length_upper(dom, loop, std::size_t(param_int(cfg, "verify_samples")));
        write_or_print(output_path(cfg, "out"), to_json(est).dump(2) + "\n");
        return exit_ok;
    }

    if (cmd == "thm1") {
        const double eps = param_number(cfg, "eps");
        const int depth = param_int(cfg, "depth");
        std::vector<int> schedule;
        if (cfg.params["schedule"].is_null()) {
            schedule = auto_schedule(eps, depth);
        } else {
            schedule = cfg.params["schedule"].get<std::vector<int>>();
            if (int(schedule.size()) != depth) throw Error(ErrorCode::config_error, "params.schedule: needs one k per stage");
        }
        Theorem1State st;
        if (!cfg.params["resume"].is_null()) {
            const std::string path = param_string(cfg, "resume");
            st = theorem1_from_json(read_json_file(path), path);
            if (st.epsilon != eps) throw Error(ErrorCode::config_error, path + ": state was built with another eps");
            if (st.stage > depth) throw Error(ErrorCode::config_error, path + ": state is deeper than params.depth");
            for (int s = 0; s < st.stage; ++s) {
                if (st.k_schedule[std::size_t(s)] != schedule[std::size_t(s)]) {
                    throw Error(ErrorCode::config_error, path + ": state schedule differs from params.schedule");
                }
            }
            while (st.stage < depth) advance_theorem1(st, schedule[std::size_t(st.stage)]);
            if (st.measure < 1 - rational(eps)) {
                throw Error(ErrorCode::measure_bound_violated, "measure is below 1 - eps");
            }
        } else {
            st = build_theorem1(eps, depth, schedule);
        }
        std::cout << "measure " << format_real(st.measure.convert_to<double>()) << " cubes " << st.cubes.size() << "\n";
        if (auto p = output_path(cfg, "out")) write_text_file(*p, to_json(st).dump(2) + "\n");
        if (auto p = output_path(cfg, "svg")) {
            std::vector<std::vector<cplx>> loops;
            for (const auto& c : st.cubes) loops.push_back(rounded_rect(c.rect.to_rect(), param_number(cfg, "delta"), 64));
            emit_svg(cube_figure(st.domain(), loops), *p);
        }
        if (!cfg.params["certify"].get<bool>()) return exit_ok;
        return run_theorem1_certificate(cfg, st);
    }

    if (cmd == "thm2") {
        const Theorem2Options opt = theorem2_options(cfg);
        Theorem2State st;
        if (!cfg.params["resume"].is_null()) {
            const std::string path = param_string(cfg, "resume");
            st = theorem2_from_json(read_json_file(path), path);
        }
        st = build_theorem2(param_int(cfg, "stages"), opt, std::move(st));
        if (auto p = output_path(cfg, "out")) write_text_file(*p, to_json(st).dump(2) + "\n");
        if (auto p = output_path(cfg, "svg")) {
            std::vector<std::vector<cplx>> loops;
            for (const auto& stage : st.stages) {
                for (const auto& l : stage.loops) loops.push_back(rounded_rect(l.rect, l.offset, opt.loop_vertices));
                for (const auto& q : stage.points) loops.push_back(circle_points(q.p, q.delta, 64));
            }
            emit_svg(cube_figure(st.domain(), loops), *p);
        }
        std::cout << "stages " << st.stages.size() << " cubes " << st.cubes.size() << "\n";
        return theorem2_report(cfg, st.certificates);
    }

    if (cmd == "julia" || cmd == "julia-rdecay") {
        const cplx c = param_complex(cfg, "c");
        if (!mandelbrot_escape(c, 1000).escaped) {
            throw Error(ErrorCode::invalid_argument, "params.c: critical orbit stays bounded, so the Julia set is connected");
        }
        LevelGrid grid;
        grid.resolution = std::size_t(param_int(cfg, "resolution"));
        grid.check_doubling = cfg.params["check_doubling"].get<bool>();
        const int bands = param_int(cfg, "bands");
        if (bands < 1) throw Error(ErrorCode::config_error, "params.bands: must be at least 1");

        if (cmd == "julia-rdecay") {
            const auto rows = julia_rdecay(c, bands, param_complex(cfg, "x"), grid, cfg.solver,
                                           std::size_t(param_int(cfg, "vertices")));
            Table t{{"band", "t", "components", "lower", "upper", "residual", "error"}, {}};
            const double nan = std::numeric_limits<double>::quiet_NaN();
            std::size_t failed = 0;
            for (const auto& r : rows) {
                failed += !r.bracket;
                t.add({static_cast<long long>(r.band), r.t, static_cast<long long>(r.components),
                       r.bracket ? r.bracket->lower : nan, r.bracket ? r.bracket->upper : nan,
                       r.bracket ? r.bracket->residual : nan, r.error});
            }
            write_or_print(output_path(cfg, "report"), to_csv(t));
            return failed ? exit_solver : exit_ok;
        }

        const json& box = cfg.params["box"];
        if (!box.is_null()) {
            if (!box.is_array() || box.size() != 4) throw Error(ErrorCode::config_error, "params.box: expected 4 numbers");
            grid.box = Box{box[0].get<double>(), box[1].get<double>(), box[2].get<double>(), box[3].get<double>()};
        }
        std::vector<double> levels;
        const json& lv = cfg.params["levels"];
        if (lv == "auto") {
            const double t0 = critical_level(c);
            for (int n = 0; n < bands; ++n) levels.push_back(band_level(t0, n));
        } else if (lv.is_array()) {
            for (const auto& v : lv) {
                if (!v.is_number()) throw Error(ErrorCode::config_error, "params.levels: expected numbers");
                levels.push_back(v.get<double>());
            }
        } else {
            throw Error(ErrorCode::config_error, "params.levels: expected \"auto\" or an array");
        }
        Table t{{"level", "t", "component", "parent", "vertex", "x", "y"}, {}};
        Figure fig;
        fig.title = "level curves";
        for (std::size_t li = 0; li < levels.size(); ++li) {
            const LevelCurveSet set = level_curve(c, levels[li], grid);
            std::cout << "t " << format_real(levels[li]) << " components " << set.components.size() << "\n";
            for (std::size_t k = 0; k < set.components.size(); ++k) {
                const auto& loop = set.components[k];
                for (std::size_t v = 0; v < loop.size(); ++v) {
                    t.add({static_cast<long long>(li), levels[li], static_cast<long long>(k),
                           static_cast<long long>(set.nesting[k]), static_cast<long long>(v), loop[v].real(),
                           loop[v].imag()});
                }
                fig.level_curves.push_back(loop);
            }
        }
        if (auto p = output_path(cfg, "csv")) emit_csv(t, *p);
        if (auto p = output_path(cfg, "out")) emit_svg(fig, *p);
        return exit_ok;
    }

    if (cmd == "verify") {
        const std::string path = param_string(cfg, "state");
        const json j = read_json_file(path);
        const std::string kind = j.value("kind", "");
        if (kind == "theorem1") {
            const Theorem1State st = theorem1_from_json(j, path);
            const Theorem1Certificate cert = certify_theorem1(st, theorem1_options(cfg));
            Table t = certificate_table();
            add_rows(t, cert);
            write_or_print(output_path(cfg, "report"), to_csv(t));
            std::size_t violated = 0;
            for (const auto& r : cert.rows) violated += r.error.empty() && !r.pass;
            return certificate_exit(violated, cert.failures);
        }
        if (kind == "theorem2") {
            const Theorem2State st = theorem2_from_json(j, path);
            const auto rows = theorem2_checks(st, st.domain(), theorem2_options(cfg));
            return theorem2_report(cfg, rows);
        }
        throw Error(ErrorCode::config_error, path + ".kind: expected theorem1 or theorem2");
    }
    throw Error(ErrorCode::config_error, "command: unknown command '" + cmd + "'");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Squeezing-function bounds for finitely connected plane domains"};
    app.require_subcommand(1);
    std::vector<Command> commands;
    commands.reserve(command_names().size());
    for (const auto& name : command_names()) {
        // options bind to the stored object, so construct it in place first
        Command& c = commands.emplace_back();
        c.name = name;
        c.app = app.add_subcommand(name);
        c.flags = flags_for(name);
        c.app->add_option("--config", c.config_file, "config JSON; flags override its values");
        for (auto& f : c.flags) f.option = c.app->add_option("--" + f.name, f.value, f.help);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }
    for (auto& c : commands) {
        if (!c.app->parsed()) continue;
        try {
            const RunConfig cfg = effective_config(c);
            if (auto p = output_path(cfg, "manifest")) write_text_file(*p, manifest_text(cfg));
            return run(cfg);
        } catch (const Error& e) {
            std::cerr << "squeeze " << c.name << ": " << e.what() << "\n";
            return exit_code_for(e.code());
        } catch (const json::exception& e) {
            std::cerr << "squeeze " << c.name << ": config-error: " << e.what() << "\n";
            return exit_config;
        }
    }
    return exit_config;
}
