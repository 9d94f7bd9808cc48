#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "subnewton/linops.hpp"

namespace subnewton {

/// Binary classification data: n rows of features with labels in {-1, +1}.
struct Dataset {
  FeatureMatrix features;
  std::vector<int> labels;
  std::string name;

  std::size_t num_examples() const { return labels.size(); }
  std::size_t num_features() const { return cols(features); }

  /// Throws std::invalid_argument when labels and rows disagree or a label
  /// is not exactly -1 or +1.
  void validate() const;
};

/// Same labels and the same feature values, regardless of storage format or name.
bool same_content(const Dataset& a, const Dataset& b);

/// Rows of `ds` in the given order.
Dataset select_rows(const Dataset& ds, const std::vector<std::size_t>& rows);

struct SplitDataset {
  Dataset train;
  Dataset test;
  std::uint64_t seed = 0;
  std::vector<std::size_t> train_rows;  // indices into the source dataset, ascending
  std::vector<std::size_t> test_rows;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Stored as CSR below this density, dense otherwise.
inline constexpr double kSparseDensityThreshold = 0.25;

/// Parses `<label> <idx>:<val> ...` lines with 1-based ascending indices.
/// Labels in {0,1} map 0 -> -1, labels in {1,2} map 2 -> -1, +-1 pass through.
Dataset read_libsvm(std::istream& in, std::string name = "dataset");
Dataset read_libsvm(const std::filesystem::path& path);

/// Writes values with %.17g. When the last feature column has no nonzero,
/// an explicit `d:0` is emitted on the first row so the width survives a reread.
void write_libsvm(std::ostream& out, const Dataset& ds);
void write_libsvm(const std::filesystem::path& path, const Dataset& ds);

/// Scale applied to the log-spaced singular values so that the l2 term
/// (lambda = 1/n) does not cap the Hessian condition number below kappa.
double synth_feature_scale(std::size_t n, double kappa_target);

/// Synthetic logistic-regression data X = G diag(s) Q^T with log-spaced
/// singular scales, labels sign(X w_bar) with 5% flipped.
Dataset synth_gen(std::size_t n, std::size_t d, double kappa_target, std::uint64_t seed);

/// Random disjoint partition into ceil(n(1-f)) training rows and the rest.
SplitDataset split(const Dataset& ds, double test_frac, std::uint64_t seed);

}  // namespace subnewton
