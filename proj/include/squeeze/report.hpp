#pragma once

// CSV tables, SVG figures and JSON views of solver results.

#include <charconv>
#include <cstdio>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "squeeze/domain_json.hpp"
#include "squeeze/error.hpp"
#include "squeeze/geometry.hpp"
#include "squeeze/hyperbolic.hpp"
#include "squeeze/slit_solver.hpp"

namespace squeeze {

// ---------------------------------------------------------------------------
// CSV

using Cell = std::variant<std::string, double, long long, bool>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row)
    {
        if (row.size() != columns.size()) {
            throw Error(ErrorCode::invalid_argument, "row has " + std::to_string(row.size()) + " cells for " +
                                                         std::to_string(columns.size()) + " columns");
        }
        rows.push_back(std::move(row));
    }
};

/// 17 significant digits, enough to read back every double exactly.
inline std::string format_real(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

inline std::string cell_text(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) return v;
            else if constexpr (std::is_same_v<T, double>) return format_real(v);
            else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
            else return std::to_string(v);
        },
        c);
}

/// RFC 4180: CRLF line breaks, fields quoted only when needed.
inline std::string to_csv(const Table& t)
{
    if (t.columns.empty()) throw Error(ErrorCode::invalid_argument, "table has no columns");
    std::string out;
    auto line = [&out](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += csv_field(fields[i]);
        }
        out += "\r\n";
    };
    line(t.columns);
    for (const auto& row : t.rows) {
        std::vector<std::string> fields;
        for (const auto& c : row) fields.push_back(cell_text(c));
        line(fields);
    }
    return out;
}

inline void emit_csv(const Table& t, const std::string& path) { write_text_file(path, to_csv(t)); }

/// Header plus records as strings.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text)
{
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> rec;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
            continue;
        }
        if (ch == '"') {
            quoted = true;
            any = true;
        } else if (ch == ',') {
            rec.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (ch == '\r' || ch == '\n') {
            if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            rec.push_back(std::move(field));
            field.clear();
            records.push_back(std::move(rec));
            rec.clear();
            any = false;
        } else {
            field += ch;
            any = true;
        }
    }
    if (quoted) throw Error(ErrorCode::config_error, "unterminated quoted CSV field");
    if (any) {
        rec.push_back(std::move(field));
        records.push_back(std::move(rec));
    }
    return records;
}

// ---------------------------------------------------------------------------
// SVG

struct HeatCell {
    Box box;
    double value = 0; // 0..1 maps to the colour ramp; NaN draws grey
};

/// Layers are written in this order: components, loops, level curves,
/// heatmap cells.
struct Figure {
    std::vector<Component> components;
    std::vector<std::vector<cplx>> loops;
    std::vector<std::vector<cplx>> level_curves;
    std::vector<HeatCell> heat;
    std::string title;
};

inline Figure figure_of(const Domain& d)
{
    Figure f;
    f.components = d.components;
    f.title = d.label;
    return f;
}

namespace detail {

inline std::string svg_num(double v)
{
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "non-finite coordinate in figure");
    if (v == 0) v = 0; // no "-0"
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string svg_points(std::span<const cplx> pts)
{
    std::string s;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) s += ' ';
        s += svg_num(pts[i].real()) + "," + svg_num(-pts[i].imag());
    }
    return s;
}

inline std::string ramp(double v)
{
    if (std::isnan(v)) return "#bbbbbb";
    v = std::clamp(v, 0.0, 1.0);
    // dark blue to yellow
    const int r = int(std::lround(20 + 235 * v)), g = int(std::lround(30 + 200 * v)), b = int(std::lround(120 - 100 * v));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

inline void grow(Box& b, cplx z)
{
    b.xmin = std::min(b.xmin, z.real());
    b.xmax = std::max(b.xmax, z.real());
    b.ymin = std::min(b.ymin, z.imag());
    b.ymax = std::max(b.ymax, z.imag());
}

} // namespace detail

inline Box figure_extent(const Figure& f)
{
    const double inf = std::numeric_limits<double>::infinity();
    Box b{inf, -inf, inf, -inf};
    for (const auto& k : f.components) {
        if (auto bb = bounding_box(k)) {
            detail::grow(b, {bb->xmin, bb->ymin});
            detail::grow(b, {bb->xmax, bb->ymax});
        } else if (auto o = std::get_if<OuterDisk>(&k)) {
            detail::grow(b, o->center - cplx(o->radius, o->radius));
            detail::grow(b, o->center + cplx(o->radius, o->radius));
        }
    }
    for (const auto* layer : {&f.loops, &f.level_curves}) {
        for (const auto& l : *layer) {
            for (cplx z : l) detail::grow(b, z);
        }
    }
    for (const auto& h : f.heat) {
        detail::grow(b, {h.box.xmin, h.box.ymin});
        detail::grow(b, {h.box.xmax, h.box.ymax});
    }
    if (!(b.xmin <= b.xmax)) b = {-1, 1, -1, 1};
    return b;
}

inline std::string to_svg(const Figure& f)
{
    Box b = figure_extent(f);
    const double span = std::max({b.xmax - b.xmin, b.ymax - b.ymin, 1e-9});
    const double pad = 0.05 * span;
    b = {b.xmin - pad, b.xmax + pad, b.ymin - pad, b.ymax + pad};
    const double stroke = 0.004 * span;
    using detail::svg_num;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << svg_num(b.xmin) << ' ' << svg_num(-b.ymax) << ' '
       << svg_num(b.xmax - b.xmin) << ' ' << svg_num(b.ymax - b.ymin) << "\">\n";
    if (!f.title.empty()) {
        std::string t;
        for (char ch : f.title) {
            if (ch == '<') t += "&lt;";
            else if (ch == '>') t += "&gt;";
            else if (ch == '&') t += "&amp;";
            else t += ch;
        }
        os << "<title>" << t << "</title>\n";
    }
    const std::string fill = " fill=\"#555555\" stroke=\"none\"";
    for (const auto& k : f.components) {
        if (auto d = std::get_if<Disk>(&k)) {
            os << "<circle class=\"component\" cx=\"" << svg_num(d->center.real()) << "\" cy=\""
               << svg_num(-d->center.imag()) << "\" r=\"" << svg_num(d->radius) << "\"" << fill << "/>\n";
        } else if (auto p = std::get_if<PointComponent>(&k)) {
            os << "<circle class=\"component\" cx=\"" << svg_num(p->at.real()) << "\" cy=\"" << svg_num(-p->at.imag())
               << "\" r=\"" << svg_num(2 * stroke) << "\"" << fill << "/>\n";
        } else if (auto o = std::get_if<OuterDisk>(&k)) {
            // everything in view outside the circle
            const double r = o->radius, cx = o->center.real(), cy = -o->center.imag();
            os << "<path class=\"component\" fill-rule=\"evenodd\" d=\"M" << svg_num(b.xmin) << ',' << svg_num(-b.ymax)
               << " H" << svg_num(b.xmax) << " V" << svg_num(-b.ymin) << " H" << svg_num(b.xmin) << " Z M"
               << svg_num(cx + r) << ',' << svg_num(cy) << " A" << svg_num(r) << ',' << svg_num(r) << " 0 1 0 "
               << svg_num(cx - r) << ',' << svg_num(cy) << " A" << svg_num(r) << ',' << svg_num(r) << " 0 1 0 "
               << svg_num(cx + r) << ',' << svg_num(cy) << " Z\"" << fill << "/>\n";
        } else {
            const auto pts = polygon_vertices(k);
            os << "<polygon class=\"component\" points=\"" << detail::svg_points(pts) << "\"" << fill << "/>\n";
        }
    }
    for (const auto& l : f.loops) {
        os << "<polygon class=\"loop\" points=\"" << detail::svg_points(l) << "\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\""
           << svg_num(stroke) << "\"/>\n";
    }
    for (const auto& l : f.level_curves) {
        os << "<polygon class=\"level\" points=\"" << detail::svg_points(l) << "\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\""
           << svg_num(stroke) << "\"/>\n";
    }
    for (const auto& h : f.heat) {
        os << "<rect class=\"heat\" x=\"" << svg_num(h.box.xmin) << "\" y=\"" << svg_num(-h.box.ymax) << "\" width=\""
           << svg_num(h.box.xmax - h.box.xmin) << "\" height=\"" << svg_num(h.box.ymax - h.box.ymin) << "\" fill=\""
           << detail::ramp(h.value) << "\" fill-opacity=\"0.85\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline void emit_svg(const Figure& f, const std::string& path) { write_text_file(path, to_svg(f)); }

// ---------------------------------------------------------------------------
// Tables and JSON views

inline json complex_pair(cplx z) { return json::array({z.real(), z.imag()}); }

/// NaN and infinities have no JSON literal; they are written as null.
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const SlitSolution& s)
{
    json radii = json::array();
    for (const auto& r : s.radii) radii.push_back({{"component", r.component}, {"radius", r.radius}});
    json sources = json::array();
    for (const auto& l : s.log_sources) sources.push_back({{"at", complex_pair(l.at)}, {"coefficient", l.coefficient}});
    json series = json::array();
    for (const auto& b : s.series) {
        json coef = json::array();
        for (cplx a : b.coefficients) coef.push_back(complex_pair(a));
        series.push_back({{"component", b.component},
                          {"center", complex_pair(b.center)},
                          {"kind", b.exterior ? "taylor" : "laurent"},
                          {"coefficients", coef}});
    }
    json poles = json::array();
    for (const auto& p : s.poles) {
        poles.push_back({{"component", p.component}, {"pole", complex_pair(p.pole)}, {"coefficient", complex_pair(p.coefficient)}});
    }
    json corners = json::array();
    for (const auto& c : s.corners) {
        corners.push_back({{"component", c.component},
                           {"vertex", complex_pair(c.vertex)},
                           {"anchor", complex_pair(c.anchor)},
                           {"exponent", c.exponent},
                           {"coefficient", complex_pair(c.coefficient)}});
    }
    json wedges = json::array();
    for (const auto& w : s.wedges) {
        wedges.push_back({{"component", w.component},
                          {"vertex", complex_pair(w.vertex)},
                          {"anchor", complex_pair(w.anchor)},
                          {"exponent", w.exponent},
                          {"at", complex_pair(w.at)},
                          {"image", complex_pair(w.image)}});
    }
    return {{"x", complex_pair(s.x)},
            {"base", s.base},
            {"radii", radii},
            {"squeeze", slit_squeeze(s)},
            {"boundary_residual", s.boundary_residual},
            {"period_residual", s.period_residual},
            {"condition_estimate", finite_or_null(s.condition_estimate)},
            {"series_order", s.series_order},
            {"collocation", s.collocation},
            {"constant", s.constant},
            {"log_sources", sources},
            {"series", series},
            {"poles", poles},
            {"corners", corners},
            {"wedges", wedges}};
}

inline json to_json(const Model& m)
{
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            json j = {{"kind", model_kind(s)}, {"center", complex_pair(s.center)}};
            if constexpr (std::is_same_v<T, AnnulusModel>) {
                j["inner"] = s.inner;
                j["outer"] = finite_or_null(s.outer);
            } else {
                j["radius"] = s.radius;
            }
            return j;
        },
        m);
}

inline json to_json(const LoopEstimate& e)
{
    json loop = json::array();
    for (cplx z : e.loop) loop.push_back(complex_pair(z));
    json j = {{"found", e.found},
              {"length_upper", finite_or_null(e.length_upper)},
              {"kobayashi_length", finite_or_null(e.kobayashi_length)},
              {"squeeze_upper", e.found ? json(squeeze_upper_from_loop(e.kobayashi_length)) : json(1.0)},
              {"candidates", e.candidates},
              {"witness", e.witness ? to_json(*e.witness) : json(nullptr)},
              {"note", e.note},
              {"loop", loop}};
    return j;
}

inline Table field_table(std::span<const FieldRow> rows)
{
    Table t{{"x_re", "x_im", "lower", "upper", "residual"}, {}};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : rows) {
        if (r.bracket) {
            t.add({r.x.real(), r.x.imag(), r.bracket->lower, r.bracket->upper, r.bracket->residual});
        } else {
            t.add({r.x.real(), r.x.imag(), nan, nan, nan});
        }
    }
    return t;
}

/// Heatmap of the lower bound; cells centred on the grid points.
inline std::vector<HeatCell> field_heat(const GridSpec& g, std::span<const FieldRow> rows)
{
    const double hx = g.nx > 1 ? (g.box.xmax - g.box.xmin) / double(g.nx - 1) : g.box.xmax - g.box.xmin;
    const double hy = g.ny > 1 ? (g.box.ymax - g.box.ymin) / double(g.ny - 1) : g.box.ymax - g.box.ymin;
    std::vector<HeatCell> cells;
    for (const auto& r : rows) {
        const double v = r.bracket ? r.bracket->lower : std::numeric_limits<double>::quiet_NaN();
        cells.push_back({{r.x.real() - hx / 2, r.x.real() + hx / 2, r.x.imag() - hy / 2, r.x.imag() + hy / 2}, v});
    }
    return cells;
}

} // namespace squeeze
