#pragma once

#include <hornbill/csv.hpp>
#include <hornbill/errors.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace hornbill::svg {

enum class PlotKind { line, scatter, histogram };

struct PlotSpec {
    PlotKind kind = PlotKind::line;
    std::string title;
    std::string x_label;
    std::string y_label;
    int bins = 40;
    bool log_x = false;
    bool log_y = false;
    double width = 640.0;
    double height = 420.0;
};

namespace detail {

inline std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

inline std::string num(double v)
{
    return csv::format(std::round(v * 100.0) / 100.0);
}

struct Range {
    double lo = INFINITY;
    double hi = -INFINITY;

    void add(double v)
    {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    void pad()
    {
        if (!(hi > lo)) {
            lo -= 0.5;
            hi += 0.5;
        }
    }
};

} // namespace detail

/**
 * @brief Writes a self-contained SVG of y against x (line, scatter) or of
 * the distribution of x (histogram). Non-finite points are skipped.
 */
inline void render(std::ostream& out, const std::vector<double>& x_in, const std::vector<double>& y_in,
                   const PlotSpec& spec)
{
    const bool hist = spec.kind == PlotKind::histogram;
    if (!hist && x_in.size() != y_in.size()) {
        throw DomainError("plot: x and y lengths differ");
    }
    auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
    std::vector<double> xs;
    std::vector<double> ys;
    if (hist) {
        if (spec.bins < 1) {
            throw DomainError("plot: bins must be positive");
        }
        detail::Range r;
        std::vector<double> v;
        for (double a : x_in) {
            const double t = tx(a);
            if (std::isfinite(t)) {
                v.push_back(t);
                r.add(t);
            }
        }
        if (v.empty()) {
            throw DomainError("plot: no finite samples");
        }
        r.pad();
        std::vector<double> counts(static_cast<std::size_t>(spec.bins), 0.0);
        const double w = (r.hi - r.lo) / spec.bins;
        for (double t : v) {
            auto b = static_cast<std::size_t>(std::floor((t - r.lo) / w));
            counts[std::min(b, counts.size() - 1)] += 1.0;
        }
        for (std::size_t b = 0; b < counts.size(); ++b) {
            xs.push_back(r.lo + w * static_cast<double>(b));
            ys.push_back(counts[b]);
        }
        xs.push_back(r.hi);
    } else {
        for (std::size_t i = 0; i < x_in.size(); ++i) {
            const double a = tx(x_in[i]);
            const double b = ty(y_in[i]);
            if (std::isfinite(a) && std::isfinite(b)) {
                xs.push_back(a);
                ys.push_back(b);
            }
        }
        if (xs.empty()) {
            throw DomainError("plot: no finite points");
        }
    }
    detail::Range rx;
    detail::Range ry;
    for (double v : xs) {
        rx.add(v);
    }
    for (double v : ys) {
        ry.add(v);
    }
    if (hist) {
        ry.lo = 0.0;
    }
    rx.pad();
    ry.pad();

    const double ml = 70.0;
    const double mr = 20.0;
    const double mt = 40.0;
    const double mb = 50.0;
    const double pw = spec.width - ml - mr;
    const double ph = spec.height - mt - mb;
    auto px = [&](double v) { return ml + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
    auto py = [&](double v) { return mt + ph - (v - ry.lo) / (ry.hi - ry.lo) * ph; };
    using detail::num;

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(spec.width) << "\" height=\""
        << num(spec.height) << "\" viewBox=\"0 0 " << num(spec.width) << ' ' << num(spec.height) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<text x=\"" << num(spec.width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << detail::escape(spec.title) << "</text>\n";
    out << "<rect x=\"" << num(ml) << "\" y=\"" << num(mt) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
        out << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(mt + ph + 16) << "\" text-anchor=\"middle\">"
            << csv::format(std::round(fx * 1e4) / 1e4) << "</text>\n";
        out << "<text x=\"" << num(ml - 6) << "\" y=\"" << num(py(fy) + 4) << "\" text-anchor=\"end\">"
            << csv::format(std::round(fy * 1e4) / 1e4) << "</text>\n";
    }
    out << "<text x=\"" << num(ml + pw / 2) << "\" y=\"" << num(spec.height - 10) << "\" text-anchor=\"middle\">"
        << detail::escape(spec.log_x ? "log10 " + spec.x_label : spec.x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << num(mt + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << num(mt + ph / 2) << ")\">" << detail::escape(spec.log_y ? "log10 " + spec.y_label : spec.y_label)
        << "</text>\n";
    out << "</g>\n";

    switch (spec.kind) {
    case PlotKind::line: {
        out << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            out << (i ? " " : "") << num(px(xs[i])) << ',' << num(py(ys[i]));
        }
        out << "\"/>\n";
        break;
    }
    case PlotKind::scatter:
        for (std::size_t i = 0; i < xs.size(); ++i) {
            out << "<circle cx=\"" << num(px(xs[i])) << "\" cy=\"" << num(py(ys[i]))
                << "\" r=\"1.8\" fill=\"#1f5fa8\"/>\n";
        }
        break;
    case PlotKind::histogram:
        for (std::size_t b = 0; b < ys.size(); ++b) {
            const double x0 = px(xs[b]);
            const double x1 = px(xs[b + 1]);
            out << "<rect x=\"" << num(x0) << "\" y=\"" << num(py(ys[b])) << "\" width=\"" << num(x1 - x0)
                << "\" height=\"" << num(py(0.0) - py(ys[b])) << "\" fill=\"#1f5fa8\" stroke=\"white\"/>\n";
        }
        break;
    }
    out << "</svg>\n";
}

} // namespace hornbill::svg
