#pragma once

#include "sseplab/params.hpp"

#include <Eigen/Sparse>

#include <span>
#include <utility>
#include <vector>

namespace sseplab {

enum class OperatorKind {
  AbsorbedLine,       // B: walk on {0..n}, absorbed at 0 and n
  AbsorbedTriangle,   // A: walk on V_n, absorbed at the boundary lines x=0, y=n
  ReflectedLine,      // R: walk on {1..n-1}, reflected at both ends
  ReflectedTriangle,  // R2: walk on V_n, reflected at the boundary
};

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Random-walk generator with unscaled rates; evolution in macroscopic
// time multiplies every rate by n^2. Triangle walks move between
// l1-nearest neighbours (x +- 1, y) and (x, y +- 1) that keep x < y.
class DiscreteOperator {
 public:
  static DiscreteOperator absorbed_line(const SystemParams& p);
  static DiscreteOperator absorbed_triangle(const SystemParams& p);
  static DiscreteOperator reflected_line(int n);
  static DiscreteOperator reflected_triangle(int n);

  OperatorKind kind() const { return kind_; }
  int lattice_size() const { return n_; }
  int state_count() const { return static_cast<int>(coords_.size()); }

  // line states carry y = -1
  std::pair<int, int> coords(int s) const { return coords_[static_cast<std::size_t>(s)]; }
  int state_of(int x) const;
  int state_of(int x, int y) const;
  bool absorbing(int s) const { return row_ptr_[s + 1] == row_ptr_[s]; }

  struct Rate {
    int to;
    double rate;
  };
  std::span<const Rate> out(int s) const {
    return {rates_.data() + row_ptr_[s], static_cast<std::size_t>(row_ptr_[s + 1] - row_ptr_[s])};
  }
  double exit_rate(int s) const;
  double max_exit_rate() const;

  const std::vector<int>& transient() const { return transient_; }
  int transient_index(int s) const { return tindex_[static_cast<std::size_t>(s)]; }

  SparseRowMatrix generator(double scale = 1.0) const;
  // restricted to transient states, in transient() order
  SparseRowMatrix transient_generator(double scale = 1.0) const;

  // Max over states of |row sum| of the assembled generator, plus a
  // negativity flag for off-diagonal entries.
  struct GeneratorCheck {
    double max_row_sum = 0.0;
    bool off_diagonal_nonnegative = true;
    bool absorbing_rows_zero = true;
  };
  GeneratorCheck check_generator() const;

 private:
  DiscreteOperator(OperatorKind k, int n) : kind_(k), n_(n) {}
  void finish(const std::vector<std::vector<Rate>>& rows);

  OperatorKind kind_;
  int n_;
  std::vector<std::pair<int, int>> coords_;
  std::vector<int> lookup_;  // (x, y) -> state, dense (n+1)^2 or n+1
  std::vector<int> row_ptr_;
  std::vector<Rate> rates_;
  std::vector<int> transient_;
  std::vector<int> tindex_;
};

}  // namespace sseplab
