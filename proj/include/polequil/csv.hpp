#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "polequil/bne.hpp"
#include "polequil/errors.hpp"
#include "polequil/sensitivity1d.hpp"
#include "polequil/solvernd.hpp"

namespace polequil {

// 12 significant digits, locale-independent; identical inputs give
// byte-identical files.
inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns)
      : columns_(std::move(columns)) {}

  void add_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size())
      throw DimensionMismatch("csv row width mismatch");
    rows_.push_back(cells);
  }

  std::string str() const {
    std::ostringstream out;
    join(out, columns_);
    for (const auto& row : rows_) join(out, row);
    return out.str();
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << str();
  }

 private:
  static void join(std::ostringstream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out << cells[i] << (i + 1 == cells.size() ? "\n" : ",");
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

inline CsvWriter csv_of_equilibrium(const EquilibriumResult& eq) {
  CsvWriter csv({"x_left", "x_right", "foc_left", "foc_right", "det_h", "certified"});
  csv.add_row({csv_num(eq.pair.left), csv_num(eq.pair.right),
               csv_num(eq.foc_residual[0]), csv_num(eq.foc_residual[1]),
               csv_num(eq.hessian.det()),
               eq.diagnostics.unique_certified() ? "1" : "0"});
  return csv;
}

inline CsvWriter csv_of_path(const EquilibriumPath& path) {
  CsvWriter csv({"param", "x_left", "x_right", "foc_left", "foc_right", "det_h"});
  for (std::size_t i = 0; i < path.points.size(); ++i) {
    const auto& eq = path.points[i];
    csv.add_row({csv_num(path.grid[i]), csv_num(eq.pair.left),
                 csv_num(eq.pair.right), csv_num(eq.foc_residual[0]),
                 csv_num(eq.foc_residual[1]), csv_num(eq.hessian.det())});
  }
  return csv;
}

inline CsvWriter csv_of_sensitivity(const SensitivityReport& rep) {
  CsvWriter csv({"kind", "size", "dx_left_pred", "dx_right_pred",
                 "elasticity_left", "elasticity_right", "dx_left_oracle",
                 "dx_right_oracle", "first_order_error", "linear_residual"});
  csv.add_row({rep.kind == PerturbationKind::DeviationCost ? "deviation-cost"
                                                           : "distribution",
               csv_num(rep.size), csv_num(rep.dx_pred[0]), csv_num(rep.dx_pred[1]),
               csv_num(rep.elasticity[0]), csv_num(rep.elasticity[1]),
               csv_num(rep.dx_oracle[0]), csv_num(rep.dx_oracle[1]),
               csv_num(rep.first_order_error), csv_num(rep.linear_residual)});
  return csv;
}

inline CsvWriter csv_of_mixture(const MixtureContainmentReport& rep) {
  CsvWriter csv({"lambda", "x_left", "x_right"});
  for (std::size_t i = 0; i < rep.lambdas.size(); ++i)
    csv.add_row({csv_num(rep.lambdas[i]), csv_num(rep.pairs[i].left),
                 csv_num(rep.pairs[i].right)});
  return csv;
}

inline CsvWriter csv_of_path_nd(const EquilibriumPathND& path, std::size_t dim) {
  std::vector<std::string> cols{"alpha"};
  for (std::size_t i = 1; i <= dim; ++i) cols.push_back("x_left_" + std::to_string(i));
  for (std::size_t i = 1; i <= dim; ++i) cols.push_back("x_right_" + std::to_string(i));
  cols.push_back("residual");
  cols.push_back("cond_h_left");
  cols.push_back("cond_h_right");
  CsvWriter csv(cols);
  for (std::size_t i = 0; i < path.points.size(); ++i) {
    const auto& eq = path.points[i];
    std::vector<std::string> row{csv_num(path.alphas[i])};
    for (double v : eq.pair.left) row.push_back(csv_num(v));
    for (double v : eq.pair.right) row.push_back(csv_num(v));
    row.push_back(csv_num(eq.residual_norm));
    row.push_back(csv_num(path.cond_left[i]));
    row.push_back(csv_num(path.cond_right[i]));
    csv.add_row(row);
  }
  return csv;
}

inline CsvWriter csv_of_equilibrium_nd(const EquilibriumResultND& eq) {
  const std::size_t dim = eq.pair.left.size();
  std::vector<std::string> cols;
  for (std::size_t i = 1; i <= dim; ++i) cols.push_back("x_left_" + std::to_string(i));
  for (std::size_t i = 1; i <= dim; ++i) cols.push_back("x_right_" + std::to_string(i));
  cols.push_back("residual");
  cols.push_back("worst_slice_maxima");
  CsvWriter csv(cols);
  std::vector<std::string> row;
  for (double v : eq.pair.left) row.push_back(csv_num(v));
  for (double v : eq.pair.right) row.push_back(csv_num(v));
  row.push_back(csv_num(eq.residual_norm));
  row.push_back(std::to_string(eq.worst_slice_maxima));
  csv.add_row(row);
  return csv;
}

inline CsvWriter csv_of_bne(const BnePolicy& policy) {
  CsvWriter csv({"signal", "x_left", "x_right", "eu_left", "eu_right"});
  for (std::size_t j = 0; j < policy.x_left.size(); ++j)
    csv.add_row({std::to_string(j), csv_num(policy.x_left[j]),
                 csv_num(policy.x_right[j]), csv_num(policy.eu_left[j]),
                 csv_num(policy.eu_right[j])});
  return csv;
}

}  // namespace polequil
