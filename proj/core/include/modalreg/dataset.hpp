#ifndef MODALREG_DATASET_HPP
#define MODALREG_DATASET_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace modalreg {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Design matrix (n x p) and response (n). Column names label the columns
/// of X; "(Intercept)" marks the ones column when one was added.
struct Dataset {
  RowMatrix X;
  Eigen::VectorXd y;
  std::vector<std::string> column_names;

  std::size_t n() const { return static_cast<std::size_t>(y.size()); }
  std::size_t p() const { return static_cast<std::size_t>(X.cols()); }

  /// Throws std::invalid_argument on empty, mis-shaped or non-finite input.
  void validate() const;
};

inline constexpr const char* kInterceptName = "(Intercept)";

/// Assemble a dataset from named covariate columns, prepending a ones column
/// when `intercept` is set.
Dataset make_dataset(const std::vector<double>& y,
                     const std::vector<std::vector<double>>& covariates,
                     const std::vector<std::string>& names, bool intercept);

class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical rank of X from column-pivoted QR with tolerance 1e-10 * ||X||_F.
std::size_t numerical_rank(const RowMatrix& X);

/// Throws RankDeficientError unless X has full column rank and p <= n;
/// the flat prior on the coefficients needs both for a proper posterior.
void require_full_rank(const Dataset& data);

}  // namespace modalreg

#endif  // MODALREG_DATASET_HPP
