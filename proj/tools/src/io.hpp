#pragma once

// Text formats read and written by the command-line tool.
//
//   grid CSV     header  `x\z,z:<z1>,z:<z2>,...`; rows `x:<xi>,y_i1,y_i2,...`
//   scatter CSV  header  `x,z,y`; one observation per row
//   curves CSV   header  `t:<t1>,t:<t2>,...`; one curve per row
//   array CSV    header  `x1,...,xd,y`; one cell per row, any order, full grid required
//
// Every number is written with 17 significant digits so files round-trip exactly.

#include "sandwich/binning.hpp"
#include "sandwich/fda.hpp"
#include "sandwich/glam.hpp"
#include "sandwich/sandwich2d.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace sandwich::cli {

/// Malformed input; the message carries the file name and line.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format_double(double v);

GridData read_grid_csv(const std::string& path);
GridData parse_grid_csv(std::istream& in, const std::string& name);
void write_grid_csv(const std::string& path, const Eigen::MatrixXd& y, const std::vector<double>& x,
                    const std::vector<double>& z);
void write_grid_csv(std::ostream& out, const Eigen::MatrixXd& y, const std::vector<double>& x,
                    const std::vector<double>& z);

ScatterData read_scatter_csv(const std::string& path);
ScatterData parse_scatter_csv(std::istream& in, const std::string& name);

CurveSet read_curves_csv(const std::string& path);
CurveSet parse_curves_csv(std::istream& in, const std::string& name);

ArrayData read_array_csv(const std::string& path);
ArrayData parse_array_csv(std::istream& in, const std::string& name);
void write_array_csv(const std::string& path, const NdArray& values, const std::vector<std::vector<double>>& coords);

/// `lambda1,lambda2,gcv` long format.
void write_gcv_csv(const std::string& path, const GcvSurface& surface);

/// Writes `text` to `path`, throwing IoError on failure.
void write_text(const std::string& path, const std::string& text);

} // namespace sandwich::cli
