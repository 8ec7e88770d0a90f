#include "qkp/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "qkp/parallel.hpp"

namespace qkp {
namespace {

void require_same_length(std::span<const double> x, std::span<const double> y, const char* what) {
  if (x.size() != y.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  }
}

}  // namespace

double gaussian_kernel(std::span<const double> x, std::span<const double> y, double gamma) {
  require_same_length(x, y, "gaussian_kernel");
  if (!(gamma > 0.0)) throw std::invalid_argument("gaussian_kernel: gamma must be positive");
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    sq += d * d;
  }
  return std::exp(-gamma * sq);
}

double normalized_inner_product_kernel(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y, "normalized_inner_product_kernel");
  double dot = 0.0, nx = 0.0, ny = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx == 0.0 || ny == 0.0) {
    throw std::invalid_argument("normalized_inner_product_kernel: zero vector");
  }
  const double c = dot / (std::sqrt(nx) * std::sqrt(ny));
  return std::clamp(c, 0.0, 1.0);
}

Kernel make_gaussian_kernel(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gaussian kernel gamma must be positive");
  return {[gamma](std::span<const double> x, std::span<const double> y) {
            return gaussian_kernel(x, y, gamma);
          },
          true};
}

Kernel make_cosine_kernel() { return {normalized_inner_product_kernel, true}; }

DistanceMatrix build_distance_matrix(const PointSet& points) {
  if (points.empty()) throw std::invalid_argument("build_distance_matrix: no points");
  const std::size_t n = points.size();
  const std::size_t d = points.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].size() != d) {
      throw std::invalid_argument("build_distance_matrix: point " + std::to_string(i) + " has dimension " +
                                  std::to_string(points[i].size()) + ", expected " + std::to_string(d));
    }
  }
  DistanceMatrix D{DenseMatrix(n, n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sq = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = points[i][c] - points[j][c];
        sq += diff * diff;
      }
      const double dist = std::sqrt(sq);
      D.entries(i, j) = dist;
      D.entries(j, i) = dist;
    }
  }
  return D;
}

KernelMatrix build_kernel_matrix(const PointSet& a, const PointSet& b, const Kernel& kernel) {
  const bool same = &a == &b;
  const bool symmetric = same && kernel.symmetric;
  KernelMatrix K{DenseMatrix(a.size(), b.size()), symmetric};
  parallel_for(a.size(), [&](std::size_t i) {
    const std::size_t first = symmetric ? i : 0;
    for (std::size_t j = first; j < b.size(); ++j) {
      try {
        K.entries(i, j) = kernel(a[i], b[j]);
      } catch (const std::exception& e) {
        throw std::invalid_argument("kernel evaluation failed at (" + std::to_string(i) + ", " +
                                    std::to_string(j) + "): " + e.what());
      }
    }
  });
  if (symmetric) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) K.entries(i, j) = K.entries(j, i);
    }
  }
  return K;
}

KernelMatrix build_kernel_matrix(const PointSet& points, const Kernel& kernel) {
  return build_kernel_matrix(points, points, kernel);
}

void write_csv(std::ostream& out, const DenseMatrix& m) {
  char buffer[64];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      const auto res = std::to_chars(buffer, buffer + sizeof buffer, m(i, j));
      out.write(buffer, res.ptr - buffer);
    }
    out << '\n';
  }
}

}  // namespace qkp
