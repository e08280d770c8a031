#ifndef SAIF_DESIGN_MATRIX_HPP
#define SAIF_DESIGN_MATRIX_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>

namespace saif {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Column-accessible dense design matrix with cached per-column norms.
class DesignMatrix {
 public:
  DesignMatrix() = default;

  explicit DesignMatrix(Matrix m) : m_(std::move(m)) {
    if (!m_.allFinite())
      throw std::invalid_argument("design matrix contains NaN/Inf");
    col_sqnorm_ = m_.colwise().squaredNorm();
    col_norm_ = col_sqnorm_.cwiseSqrt();
  }

  Eigen::Index rows() const { return m_.rows(); }
  Eigen::Index cols() const { return m_.cols(); }

  const Matrix& matrix() const { return m_; }
  Matrix::ConstColXpr col(Eigen::Index i) const { return m_.col(i); }

  double col_sqnorm(Eigen::Index i) const { return col_sqnorm_[i]; }
  double col_norm(Eigen::Index i) const { return col_norm_[i]; }
  const Vector& col_norms() const { return col_norm_; }

 private:
  Matrix m_;
  Vector col_sqnorm_;
  Vector col_norm_;
};

}  // namespace saif

#endif  // SAIF_DESIGN_MATRIX_HPP
