#include "ccn/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ccn/errors.hpp"

namespace ccn {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 50.0;

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        }
        double span = hi - lo;
        if (span <= 0.0) span = std::max(std::abs(lo), 1.0);
        lo -= 0.05 * span;
        hi += 0.05 * span;
    }
};

double point_gamma(const BranchPoint& pt) {
    return pt.solution.gamma1 ? *pt.solution.gamma1 : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string format_double(double v) { return fmt("%.17g", v); }

void write_branch_csv(std::ostream& out, const Branch& branch, const Vector& weights) {
    out << kBranchCsvHeader << '\n';
    for (const auto& pt : branch.points) {
        const Vector& u = pt.solution.u;
        const double l2 = std::sqrt(u.cwiseProduct(weights).dot(u));
        out << format_double(pt.s) << ',' << format_double(pt.solution.lambda) << ',' << format_double(pt.solution.eps)
            << ',' << format_double(u.maxCoeff()) << ',' << format_double(u.minCoeff()) << ',' << format_double(l2)
            << ',' << (pt.solution.gamma1 ? format_double(*pt.solution.gamma1) : std::string("nan")) << ','
            << (pt.solution.stability ? to_string(*pt.solution.stability) : "") << ',' << (pt.is_fold ? 1 : 0) << '\n';
    }
}

void write_nodes_csv(std::ostream& out, const Branch& branch, const Mesh& mesh) {
    out << "point,node,x,y,u\n";
    for (std::size_t k = 0; k < branch.points.size(); ++k) {
        const Vector& u = branch.points[k].solution.u;
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            const Point& x = mesh.nodes()[static_cast<std::size_t>(i)];
            out << k << ',' << i << ',' << format_double(x.x) << ',' << format_double(x.y) << ',' << format_double(u[i])
                << '\n';
        }
    }
}

std::vector<CsvRow> read_branch_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kBranchCsvHeader) throw IoError("branch CSV: unexpected header");
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (cells.size() != 9) throw IoError("branch CSV: expected 9 columns");
        const auto num = [&](std::size_t i) {
            char* end = nullptr;
            const double v = std::strtod(cells[i].c_str(), &end);
            if (end == cells[i].c_str() || *end != '\0') throw IoError("branch CSV: bad number '" + cells[i] + "'");
            return v;
        };
        CsvRow r;
        r.s = num(0);
        r.lambda = num(1);
        r.eps = num(2);
        r.u_max = num(3);
        r.u_min = num(4);
        r.u_l2 = num(5);
        r.gamma1 = num(6);
        r.stability = cells[7];
        r.is_fold = cells[8] == "1";
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<SvgSeries> whyburn_series(const std::vector<Branch>& branches) {
    std::vector<SvgSeries> out;
    const std::size_t m = branches.size();
    for (std::size_t i = 0; i < m; ++i) {
        SvgSeries s;
        s.branch = &branches[i];
        s.opacity = m > 1 ? 0.25 + 0.75 * static_cast<double>(i) / static_cast<double>(m - 1) : 1.0;
        s.label = "eps = " + fmt("%g", branches[i].eps);
        out.push_back(std::move(s));
    }
    return out;
}

std::string render_svg(const std::vector<SvgSeries>& series, const std::string& title) {
    Range xr, yr;
    for (const auto& s : series)
        for (const auto& pt : s.branch->points) {
            xr.add(pt.solution.lambda);
            yr.add(pt.solution.u.lpNorm<Eigen::Infinity>());
        }
    xr.pad();
    yr.pad();

    const double pw = kWidth - kMarginLeft - kMarginRight;
    const double ph = kHeight - kMarginTop - kMarginBottom;
    const auto X = [&](double v) { return kMarginLeft + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
    const auto Y = [&](double v) { return kMarginTop + (yr.hi - v) / (yr.hi - yr.lo) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" data-lambda-min=\"" << format_double(xr.lo)
      << "\" data-lambda-max=\"" << format_double(xr.hi) << "\" data-u-min=\"" << format_double(yr.lo)
      << "\" data-u-max=\"" << format_double(yr.hi) << "\">\n";
    o << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    o << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
      << "</text>\n";

    // axes and ticks
    o << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
    o << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << pw << "\" height=\"" << ph << "\"/>\n";
    o << "</g>\n<g font-size=\"11\" fill=\"black\">\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = xr.lo + (xr.hi - xr.lo) * t / 4.0;
        const double yv = yr.lo + (yr.hi - yr.lo) * t / 4.0;
        o << "<text x=\"" << fmt("%.2f", X(xv)) << "\" y=\"" << fmt("%.2f", kHeight - kMarginBottom + 16)
          << "\" text-anchor=\"middle\">" << fmt("%.3g", xv) << "</text>\n";
        o << "<text x=\"" << fmt("%.2f", kMarginLeft - 6) << "\" y=\"" << fmt("%.2f", Y(yv) + 4)
          << "\" text-anchor=\"end\">" << fmt("%.3g", yv) << "</text>\n";
    }
    o << "<text x=\"" << kMarginLeft + pw / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">lambda</text>\n";
    o << "<text x=\"16\" y=\"" << kMarginTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kMarginTop + ph / 2 << ")\">max u</text>\n";
    o << "</g>\n";

    for (const auto& s : series) {
        const auto& pts = s.branch->points;
        o << "<g class=\"branch\" data-eps=\"" << format_double(s.branch->eps) << "\" opacity=\""
          << fmt("%.3f", s.opacity) << "\">\n";
        if (!s.label.empty()) o << "<title>" << xml_escape(s.label) << "</title>\n";
        // consecutive segments sharing a stability class form one polyline
        std::size_t k = 0;
        while (k + 1 < pts.size()) {
            const auto dashed_at = [&](std::size_t j) { return point_gamma(pts[j]) + point_gamma(pts[j + 1]) < 0.0; };
            const bool dashed = dashed_at(k);
            std::size_t end = k + 1;
            while (end + 1 < pts.size() && dashed_at(end) == dashed) ++end;
            o << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"";
            if (dashed) o << " stroke-dasharray=\"6,4\"";
            o << " points=\"";
            for (std::size_t j = k; j <= end; ++j) {
                if (j > k) o << ' ';
                o << fmt("%.2f", X(pts[j].solution.lambda)) << ','
                  << fmt("%.2f", Y(pts[j].solution.u.lpNorm<Eigen::Infinity>()));
            }
            o << "\"/>\n";
            k = end;
        }
        for (const auto& pt : pts)
            if (pt.is_fold)
                o << "<circle class=\"fold\" cx=\"" << fmt("%.2f", X(pt.solution.lambda)) << "\" cy=\""
                  << fmt("%.2f", Y(pt.solution.u.lpNorm<Eigen::Infinity>())) << "\" r=\"4\" fill=\"none\" stroke=\"red\"/>\n";
        o << "</g>\n";
    }
    o << "</svg>\n";
    return o.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace ccn
