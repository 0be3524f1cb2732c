#pragma once

#include <complex>

#include <Eigen/Dense>

namespace fdrelay {

using cdouble = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

}  // namespace fdrelay
