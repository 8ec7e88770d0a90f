#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "qkp/matrix.hpp"

namespace qkp {

using Point = std::vector<double>;
using PointSet = std::vector<Point>;

// Pairwise Euclidean distances; symmetric, zero diagonal.
struct DistanceMatrix {
  DenseMatrix entries;
  std::size_t size() const { return entries.rows(); }
};

struct KernelMatrix {
  DenseMatrix entries;
  bool symmetric = false;
  std::size_t rows() const { return entries.rows(); }
  std::size_t cols() const { return entries.cols(); }
};

// A kernel handle. `symmetric` records whether K(x, y) == K(y, x) so the
// matrix builder may mirror the upper triangle.
struct Kernel {
  std::function<double(std::span<const double>, std::span<const double>)> fn;
  bool symmetric = true;

  double operator()(std::span<const double> x, std::span<const double> y) const { return fn(x, y); }
};

// exp(-gamma * ||x - y||^2)
double gaussian_kernel(std::span<const double> x, std::span<const double> y, double gamma);

// <x, y> / (||x|| ||y||), negatives clamped to 0.
double normalized_inner_product_kernel(std::span<const double> x, std::span<const double> y);

Kernel make_gaussian_kernel(double gamma);
Kernel make_cosine_kernel();

DistanceMatrix build_distance_matrix(const PointSet& points);

// entries(i, j) = kernel(a[i], b[j]). Pass the same vector for both sets to
// obtain a symmetric matrix. Rows are computed in parallel.
KernelMatrix build_kernel_matrix(const PointSet& a, const PointSet& b, const Kernel& kernel);
KernelMatrix build_kernel_matrix(const PointSet& points, const Kernel& kernel);

// Full matrix, row-major, comma separated, shortest round-trip formatting.
void write_csv(std::ostream& out, const DenseMatrix& m);

}  // namespace qkp
