#pragma once

// Tabular results, CSV output and static SVG figures.

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "adhoc_tc/errors.hpp"

namespace adhoc_tc::cli {

using Cell = std::optional<double>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> notes;  // one per row, may be empty

    std::size_t column(const std::string& name) const {
        auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw std::out_of_range("no column '" + name + "'");
        return static_cast<std::size_t>(it - columns.begin());
    }
    bool has_column(const std::string& name) const {
        return std::find(columns.begin(), columns.end(), name) != columns.end();
    }
};

/// Shortest decimal text that reads back to the same double.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + csv_escape(t.columns[i]);
    out += ",note\n";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        for (std::size_t i = 0; i < t.rows[r].size(); ++i) {
            if (i) out += ',';
            if (t.rows[r][i]) out += format_number(*t.rows[r][i]);
        }
        out += ',';
        if (r < t.notes.size()) out += csv_escape(t.notes[r]);
        out += '\n';
    }
    return out;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

// ---------------------------------------------------------------------------
// SVG

struct Series {
    std::string label;
    std::string color;
    bool dashed = false;
    bool markers = false;  // points with optional error bars instead of a line
    std::vector<double> x, y, err;
};

struct Panel {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    std::vector<Series> series;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Roughly five round tick positions covering [lo, hi].
inline std::vector<double> ticks(double lo, double hi) {
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> out;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) out.push_back(v);
    return out;
}

}  // namespace detail

inline std::string render_svg(const std::string& title, const std::vector<Panel>& panels) {
    const int pw = 460, ph = 340, cols = panels.size() > 1 ? 2 : 1;
    const int rows = static_cast<int>((panels.size() + cols - 1) / cols);
    const int W = pw * cols, H = ph * rows + 40;
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << detail::xml_escape(title)
      << "</text>\n";

    for (std::size_t k = 0; k < panels.size(); ++k) {
        const auto& p = panels[k];
        const double ox = static_cast<double>((k % cols) * pw) + 60.0;
        const double oy = static_cast<double>((k / cols) * ph) + 70.0;
        const double w = pw - 90.0, h = ph - 100.0;

        double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
        for (const auto& se : p.series)
            for (std::size_t i = 0; i < se.x.size(); ++i) {
                if (!std::isfinite(se.x[i]) || !std::isfinite(se.y[i])) continue;
                const double e = i < se.err.size() && std::isfinite(se.err[i]) ? se.err[i] : 0.0;
                xlo = std::min(xlo, se.x[i]);
                xhi = std::max(xhi, se.x[i]);
                ylo = std::min(ylo, se.y[i] - e);
                yhi = std::max(yhi, se.y[i] + e);
            }
        if (!std::isfinite(xlo)) {
            xlo = 0;
            xhi = 1;
            ylo = 0;
            yhi = 1;
        }
        ylo = std::min(ylo, 0.0);
        if (yhi <= ylo) yhi = ylo + 1.0;
        if (xhi <= xlo) xhi = xlo + 1.0;
        yhi += 0.05 * (yhi - ylo);
        auto X = [&](double v) { return ox + (v - xlo) / (xhi - xlo) * w; };
        auto Y = [&](double v) { return oy + h - (v - ylo) / (yhi - ylo) * h; };

        s << "<g>\n<text x=\"" << detail::num(ox + w / 2) << "\" y=\"" << detail::num(oy - 12)
          << "\" text-anchor=\"middle\" font-size=\"13\">" << detail::xml_escape(p.title) << "</text>\n";
        s << "<rect x=\"" << detail::num(ox) << "\" y=\"" << detail::num(oy) << "\" width=\"" << detail::num(w)
          << "\" height=\"" << detail::num(h) << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (double t : detail::ticks(xlo, xhi)) {
            s << "<line x1=\"" << detail::num(X(t)) << "\" y1=\"" << detail::num(oy + h) << "\" x2=\""
              << detail::num(X(t)) << "\" y2=\"" << detail::num(oy + h + 4) << "\" stroke=\"black\"/>";
            s << "<text x=\"" << detail::num(X(t)) << "\" y=\"" << detail::num(oy + h + 16)
              << "\" text-anchor=\"middle\">" << detail::tick_label(t) << "</text>\n";
        }
        for (double t : detail::ticks(ylo, yhi)) {
            s << "<line x1=\"" << detail::num(ox - 4) << "\" y1=\"" << detail::num(Y(t)) << "\" x2=\""
              << detail::num(ox) << "\" y2=\"" << detail::num(Y(t)) << "\" stroke=\"black\"/>";
            s << "<text x=\"" << detail::num(ox - 6) << "\" y=\"" << detail::num(Y(t) + 4)
              << "\" text-anchor=\"end\">" << detail::tick_label(t) << "</text>\n";
        }
        s << "<text x=\"" << detail::num(ox + w / 2) << "\" y=\"" << detail::num(oy + h + 32)
          << "\" text-anchor=\"middle\">" << detail::xml_escape(p.xlabel) << "</text>\n";
        s << "<text transform=\"translate(" << detail::num(ox - 44) << ',' << detail::num(oy + h / 2)
          << ") rotate(-90)\" text-anchor=\"middle\">" << detail::xml_escape(p.ylabel) << "</text>\n";

        int legend = 0;
        for (const auto& se : p.series) {
            if (se.markers) {
                for (std::size_t i = 0; i < se.x.size(); ++i) {
                    if (!std::isfinite(se.x[i]) || !std::isfinite(se.y[i])) continue;
                    const double e = i < se.err.size() && std::isfinite(se.err[i]) ? se.err[i] : 0.0;
                    if (e > 0.0)
                        s << "<line x1=\"" << detail::num(X(se.x[i])) << "\" y1=\"" << detail::num(Y(se.y[i] - e))
                          << "\" x2=\"" << detail::num(X(se.x[i])) << "\" y2=\"" << detail::num(Y(se.y[i] + e))
                          << "\" stroke=\"" << se.color << "\"/>";
                    s << "<circle cx=\"" << detail::num(X(se.x[i])) << "\" cy=\"" << detail::num(Y(se.y[i]))
                      << "\" r=\"2.5\" fill=\"" << se.color << "\"/>\n";
                }
            } else {
                std::string pts;
                for (std::size_t i = 0; i < se.x.size(); ++i) {
                    if (!std::isfinite(se.x[i]) || !std::isfinite(se.y[i])) {
                        if (!pts.empty())
                            s << "<polyline fill=\"none\" stroke=\"" << se.color << "\" stroke-width=\"1.5\""
                              << (se.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"" << pts << "\"/>\n";
                        pts.clear();
                        continue;
                    }
                    pts += detail::num(X(se.x[i])) + "," + detail::num(Y(se.y[i])) + " ";
                }
                if (!pts.empty())
                    s << "<polyline fill=\"none\" stroke=\"" << se.color << "\" stroke-width=\"1.5\""
                      << (se.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"" << pts << "\"/>\n";
            }
            const double ly = oy + 12 + 13 * legend++;
            s << "<line x1=\"" << detail::num(ox + 8) << "\" y1=\"" << detail::num(ly - 4) << "\" x2=\""
              << detail::num(ox + 26) << "\" y2=\"" << detail::num(ly - 4) << "\" stroke=\"" << se.color
              << "\" stroke-width=\"1.5\"" << (se.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>";
            s << "<text x=\"" << detail::num(ox + 30) << "\" y=\"" << detail::num(ly) << "\">"
              << detail::xml_escape(se.label) << "</text>\n";
        }
        s << "</g>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace adhoc_tc::cli
