#include "sseplab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sseplab {

namespace {

bool on_triangle_boundary(int x, int y, int n) { return x == 0 || y == n; }

}  // namespace

int DiscreteOperator::state_of(int x) const {
  if (x < 0 || x > n_) return -1;
  return lookup_[static_cast<std::size_t>(x)];
}

int DiscreteOperator::state_of(int x, int y) const {
  if (x < 0 || y < 0 || x > n_ || y > n_) return -1;
  return lookup_[static_cast<std::size_t>(x * (n_ + 1) + y)];
}

double DiscreteOperator::exit_rate(int s) const {
  double r = 0;
  for (const auto& e : out(s)) r += e.rate;
  return r;
}

double DiscreteOperator::max_exit_rate() const {
  double m = 0;
  for (int s = 0; s < state_count(); ++s) m = std::max(m, exit_rate(s));
  return m;
}

void DiscreteOperator::finish(const std::vector<std::vector<Rate>>& rows) {
  row_ptr_.assign(1, 0);
  rates_.clear();
  transient_.clear();
  tindex_.assign(rows.size(), -1);
  for (std::size_t s = 0; s < rows.size(); ++s) {
    for (const auto& r : rows[s]) rates_.push_back(r);
    row_ptr_.push_back(static_cast<int>(rates_.size()));
  }
  for (int s = 0; s < state_count(); ++s) {
    bool transient = !absorbing(s);
    if (kind_ == OperatorKind::ReflectedLine || kind_ == OperatorKind::ReflectedTriangle) transient = true;
    if (transient) {
      tindex_[static_cast<std::size_t>(s)] = static_cast<int>(transient_.size());
      transient_.push_back(s);
    }
  }
}

DiscreteOperator DiscreteOperator::absorbed_line(const SystemParams& p) {
  p.validate();
  DiscreteOperator op(OperatorKind::AbsorbedLine, p.n);
  const int n = p.n;
  const double slow = p.slow_factor();
  op.lookup_.resize(static_cast<std::size_t>(n + 1));
  for (int x = 0; x <= n; ++x) {
    op.lookup_[static_cast<std::size_t>(x)] = x;
    op.coords_.emplace_back(x, -1);
  }
  std::vector<std::vector<Rate>> rows(static_cast<std::size_t>(n + 1));
  for (int x = 1; x < n; ++x) {
    rows[x].push_back({x - 1, x - 1 == 0 ? slow : 1.0});
    rows[x].push_back({x + 1, x + 1 == n ? slow : 1.0});
  }
  op.finish(rows);
  return op;
}

DiscreteOperator DiscreteOperator::absorbed_triangle(const SystemParams& p) {
  p.validate();
  DiscreteOperator op(OperatorKind::AbsorbedTriangle, p.n);
  const int n = p.n;
  const double slow = p.slow_factor();
  op.lookup_.assign(static_cast<std::size_t>((n + 1) * (n + 1)), -1);
  for (int x = 0; x <= n; ++x)
    for (int y = x + 1; y <= n; ++y) {
      op.lookup_[static_cast<std::size_t>(x * (n + 1) + y)] = static_cast<int>(op.coords_.size());
      op.coords_.emplace_back(x, y);
    }
  std::vector<std::vector<Rate>> rows(op.coords_.size());
  for (int s = 0; s < op.state_count(); ++s) {
    auto [x, y] = op.coords_[static_cast<std::size_t>(s)];
    if (on_triangle_boundary(x, y, n)) continue;
    const int moves[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
    for (const auto& m : moves) {
      const int to = op.state_of(m[0], m[1]);
      if (to < 0) continue;
      rows[static_cast<std::size_t>(s)].push_back({to, on_triangle_boundary(m[0], m[1], n) ? slow : 1.0});
    }
  }
  op.finish(rows);
  return op;
}

DiscreteOperator DiscreteOperator::reflected_line(int n) {
  if (n < 3) throw std::invalid_argument("reflected_line: n must be >= 3");
  DiscreteOperator op(OperatorKind::ReflectedLine, n);
  op.lookup_.assign(static_cast<std::size_t>(n + 1), -1);
  for (int x = 1; x < n; ++x) {
    op.lookup_[static_cast<std::size_t>(x)] = x - 1;
    op.coords_.emplace_back(x, -1);
  }
  std::vector<std::vector<Rate>> rows(op.coords_.size());
  for (int x = 1; x < n; ++x) {
    if (x > 1) rows[static_cast<std::size_t>(x - 1)].push_back({x - 2, 1.0});
    if (x < n - 1) rows[static_cast<std::size_t>(x - 1)].push_back({x, 1.0});
  }
  op.finish(rows);
  return op;
}

DiscreteOperator DiscreteOperator::reflected_triangle(int n) {
  if (n < 3) throw std::invalid_argument("reflected_triangle: n must be >= 3");
  DiscreteOperator op(OperatorKind::ReflectedTriangle, n);
  op.lookup_.assign(static_cast<std::size_t>((n + 1) * (n + 1)), -1);
  for (int x = 1; x < n; ++x)
    for (int y = x + 1; y < n; ++y) {
      op.lookup_[static_cast<std::size_t>(x * (n + 1) + y)] = static_cast<int>(op.coords_.size());
      op.coords_.emplace_back(x, y);
    }
  std::vector<std::vector<Rate>> rows(op.coords_.size());
  for (int s = 0; s < op.state_count(); ++s) {
    auto [x, y] = op.coords_[static_cast<std::size_t>(s)];
    const int moves[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
    for (const auto& m : moves) {
      const int to = op.state_of(m[0], m[1]);
      if (to >= 0) rows[static_cast<std::size_t>(s)].push_back({to, 1.0});
    }
  }
  op.finish(rows);
  return op;
}

SparseRowMatrix DiscreteOperator::generator(double scale) const {
  std::vector<Eigen::Triplet<double>> trip;
  for (int s = 0; s < state_count(); ++s) {
    double diag = 0;
    for (const auto& e : out(s)) {
      trip.emplace_back(s, e.to, scale * e.rate);
      diag -= scale * e.rate;
    }
    if (!out(s).empty()) trip.emplace_back(s, s, diag);
  }
  SparseRowMatrix m(state_count(), state_count());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

SparseRowMatrix DiscreteOperator::transient_generator(double scale) const {
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < static_cast<int>(transient_.size()); ++i) {
    const int s = transient_[static_cast<std::size_t>(i)];
    double diag = 0;
    for (const auto& e : out(s)) {
      diag -= scale * e.rate;
      const int j = tindex_[static_cast<std::size_t>(e.to)];
      if (j >= 0) trip.emplace_back(i, j, scale * e.rate);
    }
    trip.emplace_back(i, i, diag);
  }
  const auto m = static_cast<Eigen::Index>(transient_.size());
  SparseRowMatrix q(m, m);
  q.setFromTriplets(trip.begin(), trip.end());
  return q;
}

DiscreteOperator::GeneratorCheck DiscreteOperator::check_generator() const {
  GeneratorCheck c;
  const SparseRowMatrix q = generator();
  for (int r = 0; r < q.outerSize(); ++r) {
    double sum = 0;
    bool any = false;
    for (SparseRowMatrix::InnerIterator it(q, r); it; ++it) {
      sum += it.value();
      any = any || it.value() != 0.0;
      if (it.col() != r && it.value() < 0) c.off_diagonal_nonnegative = false;
    }
    if (absorbing(r) && any) c.absorbing_rows_zero = false;
    c.max_row_sum = std::max(c.max_row_sum, std::abs(sum));
  }
  return c;
}

}  // namespace sseplab
