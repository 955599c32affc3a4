#include "io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace sandwich::cli {

namespace {

struct Line {
    std::size_t number = 0;
    std::vector<std::string> cells;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<Line> read_lines(std::istream& in, const std::string& name) {
    std::vector<Line> out;
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw)) {
        ++number;
        if (trim(raw).empty()) continue;
        Line line;
        line.number = number;
        std::stringstream ss(raw);
        std::string cell;
        while (std::getline(ss, cell, ',')) line.cells.push_back(trim(cell));
        if (!raw.empty() && raw.back() == ',') line.cells.emplace_back();
        out.push_back(std::move(line));
    }
    if (out.empty()) throw ParseError(name + ": empty input");
    return out;
}

[[noreturn]] void fail(const std::string& name, std::size_t line, const std::string& what) {
    throw ParseError(name + ":" + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& cell, const std::string& name, std::size_t line) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (cell.empty() || res.ec != std::errc() || res.ptr != last) fail(name, line, "not a number: '" + cell + "'");
    return v;
}

double parse_tagged(const std::string& cell, const std::string& tag, const std::string& name, std::size_t line) {
    if (cell.rfind(tag, 0) != 0) fail(name, line, "expected '" + tag + "<coordinate>', got '" + cell + "'");
    return parse_number(cell.substr(tag.size()), name, line);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    return out;
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

GridData parse_grid_csv(std::istream& in, const std::string& name) {
    const auto lines = read_lines(in, name);
    const Line& header = lines.front();
    if (header.cells.size() < 2) fail(name, header.number, "grid header needs at least one z column");
    GridData g;
    for (std::size_t c = 1; c < header.cells.size(); ++c)
        g.z.push_back(parse_tagged(header.cells[c], "z:", name, header.number));
    const std::size_t cols = g.z.size();
    const std::size_t rows = lines.size() - 1;
    if (rows == 0) fail(name, header.number, "grid has no data rows");
    g.Y.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const Line& line = lines[r + 1];
        if (line.cells.size() != cols + 1)
            fail(name, line.number,
                 "expected " + std::to_string(cols + 1) + " cells, got " + std::to_string(line.cells.size()));
        g.x.push_back(parse_tagged(line.cells[0], "x:", name, line.number));
        for (std::size_t c = 0; c < cols; ++c)
            g.Y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_number(line.cells[c + 1], name, line.number);
    }
    return g;
}

GridData read_grid_csv(const std::string& path) {
    auto in = open_input(path);
    return parse_grid_csv(in, path);
}

void write_grid_csv(std::ostream& out, const Eigen::MatrixXd& y, const std::vector<double>& x,
                    const std::vector<double>& z) {
    out << "x\\z";
    for (double v : z) out << ",z:" << format_double(v);
    out << '\n';
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        out << "x:" << format_double(x[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < y.cols(); ++j) out << ',' << format_double(y(i, j));
        out << '\n';
    }
}

void write_grid_csv(const std::string& path, const Eigen::MatrixXd& y, const std::vector<double>& x,
                    const std::vector<double>& z) {
    auto out = open_output(path);
    write_grid_csv(out, y, x, z);
    if (!out) throw IoError("write failed for '" + path + "'");
}

ScatterData parse_scatter_csv(std::istream& in, const std::string& name) {
    const auto lines = read_lines(in, name);
    const Line& header = lines.front();
    if (header.cells != std::vector<std::string>{"x", "z", "y"})
        fail(name, header.number, "scatter header must be 'x,z,y'");
    ScatterData data;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const Line& line = lines[r];
        if (line.cells.size() != 3) fail(name, line.number, "expected 3 cells");
        data.points.push_back({parse_number(line.cells[0], name, line.number),
                               parse_number(line.cells[1], name, line.number),
                               parse_number(line.cells[2], name, line.number)});
    }
    if (data.points.empty()) fail(name, header.number, "no observations");
    return data;
}

ScatterData read_scatter_csv(const std::string& path) {
    auto in = open_input(path);
    return parse_scatter_csv(in, path);
}

CurveSet parse_curves_csv(std::istream& in, const std::string& name) {
    const auto lines = read_lines(in, name);
    const Line& header = lines.front();
    CurveSet curves;
    for (const auto& cell : header.cells) curves.t.push_back(parse_tagged(cell, "t:", name, header.number));
    const std::size_t j = curves.t.size();
    const std::size_t n = lines.size() - 1;
    if (n == 0) fail(name, header.number, "no curves");
    curves.Y.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j));
    for (std::size_t r = 0; r < n; ++r) {
        const Line& line = lines[r + 1];
        if (line.cells.size() != j) fail(name, line.number, "expected " + std::to_string(j) + " cells");
        for (std::size_t c = 0; c < j; ++c)
            curves.Y(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_number(line.cells[c], name, line.number);
    }
    return curves;
}

CurveSet read_curves_csv(const std::string& path) {
    auto in = open_input(path);
    return parse_curves_csv(in, path);
}

ArrayData parse_array_csv(std::istream& in, const std::string& name) {
    const auto lines = read_lines(in, name);
    const Line& header = lines.front();
    const std::size_t d = header.cells.size() >= 1 ? header.cells.size() - 1 : 0;
    if (d < 2) fail(name, header.number, "array header needs at least two coordinate columns and y");
    for (std::size_t k = 0; k < d; ++k)
        if (header.cells[k] != "x" + std::to_string(k + 1))
            fail(name, header.number, "expected column 'x" + std::to_string(k + 1) + "'");
    if (header.cells.back() != "y") fail(name, header.number, "last column must be 'y'");

    struct Row {
        std::vector<double> at;
        double y;
        std::size_t line;
    };
    std::vector<Row> rows;
    std::vector<std::vector<double>> coords(d);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const Line& line = lines[r];
        if (line.cells.size() != d + 1) fail(name, line.number, "expected " + std::to_string(d + 1) + " cells");
        Row row{{}, 0.0, line.number};
        for (std::size_t k = 0; k < d; ++k) {
            row.at.push_back(parse_number(line.cells[k], name, line.number));
            coords[k].push_back(row.at.back());
        }
        row.y = parse_number(line.cells[d], name, line.number);
        rows.push_back(std::move(row));
    }
    std::vector<std::size_t> shape(d);
    for (std::size_t k = 0; k < d; ++k) {
        std::sort(coords[k].begin(), coords[k].end());
        coords[k].erase(std::unique(coords[k].begin(), coords[k].end()), coords[k].end());
        shape[k] = coords[k].size();
    }
    ArrayData data;
    data.values = NdArray(shape, 0.0);
    std::size_t expected = 1;
    for (auto s : shape) expected *= s;
    if (rows.size() != expected)
        fail(name, header.number,
             "array has " + std::to_string(rows.size()) + " rows but the coordinate grid has " +
                 std::to_string(expected) + " cells");
    std::vector<char> seen(expected, 0);
    std::vector<std::size_t> index(d);
    for (const Row& row : rows) {
        for (std::size_t k = 0; k < d; ++k)
            index[k] = static_cast<std::size_t>(std::lower_bound(coords[k].begin(), coords[k].end(), row.at[k]) -
                                                coords[k].begin());
        const std::size_t off = data.values.offset(index);
        if (seen[off]) fail(name, row.line, "duplicate grid cell");
        seen[off] = 1;
        data.values.data[off] = row.y;
    }
    data.coords = std::move(coords);
    return data;
}

ArrayData read_array_csv(const std::string& path) {
    auto in = open_input(path);
    return parse_array_csv(in, path);
}

void write_array_csv(const std::string& path, const NdArray& values, const std::vector<std::vector<double>>& coords) {
    auto out = open_output(path);
    const std::size_t d = values.rank();
    for (std::size_t k = 0; k < d; ++k) out << 'x' << k + 1 << ',';
    out << "y\n";
    std::vector<std::size_t> index(d, 0);
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
        std::size_t rem = flat;
        for (std::size_t k = 0; k < d; ++k) {
            index[k] = rem % values.shape[k];
            rem /= values.shape[k];
        }
        for (std::size_t k = 0; k < d; ++k) out << format_double(coords[k][index[k]]) << ',';
        out << format_double(values.data[flat]) << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

void write_gcv_csv(const std::string& path, const GcvSurface& surface) {
    auto out = open_output(path);
    out << "lambda1,lambda2,gcv\n";
    for (std::size_t i = 0; i < surface.lambda1.size(); ++i)
        for (std::size_t j = 0; j < surface.lambda2.size(); ++j)
            out << format_double(surface.lambda1[i]) << ',' << format_double(surface.lambda2[j]) << ','
                << format_double(surface.gcv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

void write_text(const std::string& path, const std::string& text) {
    auto out = open_output(path);
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace sandwich::cli
