#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "subnewton/linops.hpp"
#include "subnewton/problem.hpp"

namespace subnewton {

/// Randomized orthogonal system sketch S (m x n): rows of sqrt(n_pad) H diag(signs)
/// picked i.i.d. uniformly with replacement, restricted to the first n columns.
/// H is the orthonormal Hadamard matrix of size n_pad, so E[S^T S] = m I.
struct RosSketch {
  std::size_t n = 0;
  std::size_t n_pad = 0;
  std::size_t m = 0;
  std::vector<double> signs;
  std::vector<std::size_t> row_picks;
  std::uint64_t seed = 0;

  /// Explicit m x n matrix (tests and small problems only).
  DenseMatrix dense() const;
};

RosSketch new_sketch(std::size_t n, std::size_t m, std::uint64_t seed);

/// S u in O(n_pad log n_pad).
Vector apply(const RosSketch& s, std::span<const double> u);

/// B = S (1/sqrt(n)) D^{1/2} X for one iterate, with lambda carried alongside.
struct SketchedSqrt {
  DenseMatrix b;  // m x d
  double lambda = 0.0;
  std::uint64_t w_tag = 0;

  std::size_t m() const { return b.rows(); }
  std::size_t d() const { return b.cols(); }
  /// (1/m) B^T B + lambda I.
  DenseMatrix hessian() const;
};

/// One FWHT pass per column of D^{1/2} X; sparse X is read column-wise.
SketchedSqrt build_sketched_sqrt(const LogisticModel& model, std::span<const double> w,
                                 const RosSketch& s, std::uint64_t w_tag = 0);

/// v1 = B p, then (1/m) B^T v1 + lambda p. Charges 2m component products.
Vector sketched_hess_vec(const SketchedSqrt& b, std::span<const double> p,
                         OracleCounter* counter = nullptr);

/// Dense m x n Gaussian sketch with N(0,1) entries; E[S^T S] = m I as for RosSketch.
DenseMatrix gaussian_sketch(std::size_t n, std::size_t m, std::uint64_t seed);

}  // namespace subnewton
