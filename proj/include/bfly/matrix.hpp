#pragma once

#include <complex>

#include <Eigen/Dense>

namespace bfly {

using CMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVector = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, 1>;

}  // namespace bfly
