#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ccn/continuation.hpp"
#include "ccn/mesh.hpp"

namespace ccn {

/// Header of the branch CSV, in column order.
inline constexpr const char* kBranchCsvHeader = "s,lambda,eps,u_max,u_min,u_l2,gamma1,stability,is_fold";

/// Writes one row per branch point; u_l2 is the W-weighted norm, floats use 17
/// significant digits, a missing gamma1 is written as "nan".
void write_branch_csv(std::ostream& out, const Branch& branch, const Vector& weights);

/// Node values of every branch point: "point,node,x,y,u".
void write_nodes_csv(std::ostream& out, const Branch& branch, const Mesh& mesh);

struct CsvRow {
    double s = 0.0;
    double lambda = 0.0;
    double eps = 0.0;
    double u_max = 0.0;
    double u_min = 0.0;
    double u_l2 = 0.0;
    double gamma1 = 0.0;
    std::string stability;
    bool is_fold = false;
};

/// Reads back a branch CSV; ParseError-free: malformed input throws IoError.
std::vector<CsvRow> read_branch_csv(std::istream& in);

struct SvgSeries {
    const Branch* branch = nullptr;
    double opacity = 1.0;
    std::string label;
};

/// Bifurcation diagram: lambda horizontally, ||u||_inf vertically. Segments with
/// gamma1 > 0 are solid, gamma1 < 0 dashed; folds are circled. Axis ranges are
/// the data ranges padded by 5% and recorded as data-* attributes on the root.
std::string render_svg(const std::vector<SvgSeries>& series, const std::string& title);

/// One series per eps; opacity increases as eps decreases.
std::vector<SvgSeries> whyburn_series(const std::vector<Branch>& branches);

/// Writes text to a file; IoError when the path is not writable.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// %.17g
std::string format_double(double v);

}  // namespace ccn
