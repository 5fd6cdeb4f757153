#pragma once

#include <Eigen/Dense>

namespace noisespec {

/// Row-major so that a sample is one contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

} // namespace noisespec
