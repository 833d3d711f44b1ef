#include "modalreg/dataset.hpp"

#include <cmath>

namespace modalreg {

void Dataset::validate() const {
  if (y.size() == 0) throw std::invalid_argument("dataset: need at least one observation");
  if (X.cols() == 0) throw std::invalid_argument("dataset: need at least one column in X");
  if (X.rows() != y.size()) {
    throw std::invalid_argument("dataset: X has " + std::to_string(X.rows()) + " rows but y has " +
                                std::to_string(y.size()) + " entries");
  }
  if (!column_names.empty() && column_names.size() != p()) {
    throw std::invalid_argument("dataset: column_names does not match the column count of X");
  }
  if (!X.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("dataset: non-finite entries in X or y");
  }
}

Dataset make_dataset(const std::vector<double>& y,
                     const std::vector<std::vector<double>>& covariates,
                     const std::vector<std::string>& names, bool intercept) {
  if (names.size() != covariates.size()) {
    throw std::invalid_argument("make_dataset: one name per covariate column required");
  }
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto p = static_cast<Eigen::Index>(covariates.size() + (intercept ? 1 : 0));
  Dataset d;
  d.X.resize(n, p);
  d.y = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  Eigen::Index col = 0;
  if (intercept) {
    d.X.col(col++).setOnes();
    d.column_names.emplace_back(kInterceptName);
  }
  for (std::size_t j = 0; j < covariates.size(); ++j) {
    if (static_cast<Eigen::Index>(covariates[j].size()) != n) {
      throw std::invalid_argument("make_dataset: covariate '" + names[j] + "' has wrong length");
    }
    d.X.col(col++) = Eigen::Map<const Eigen::VectorXd>(covariates[j].data(), n);
    d.column_names.push_back(names[j]);
  }
  d.validate();
  return d;
}

std::size_t numerical_rank(const RowMatrix& X) {
  if (X.size() == 0) return 0;
  const Eigen::MatrixXd A = X;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  const double tol = 1e-10 * A.norm();
  const auto diag = qr.matrixQR().diagonal();
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (std::abs(diag(i)) > tol) ++rank;
  }
  return rank;
}

void require_full_rank(const Dataset& data) {
  data.validate();
  if (data.p() > data.n()) {
    throw RankDeficientError("design matrix has more columns (" + std::to_string(data.p()) +
                             ") than rows (" + std::to_string(data.n()) +
                             "); a full column rank design is required");
  }
  const std::size_t rank = numerical_rank(data.X);
  if (rank < data.p()) {
    throw RankDeficientError("design matrix is rank deficient (rank " + std::to_string(rank) +
                             " < " + std::to_string(data.p()) +
                             " columns); the flat coefficient prior needs full column rank");
  }
}

}  // namespace modalreg
