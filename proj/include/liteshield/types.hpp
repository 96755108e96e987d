#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace liteshield {

// Row-major so a sample is a contiguous row.
template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = MatrixT<double>;
using MatrixF = MatrixT<float>;
using Vector = Eigen::VectorXd;
using Labels = Eigen::VectorXi;

enum class Task { binary, multiclass };

std::string_view to_string(Task task);
Task parse_task(std::string_view text);

}  // namespace liteshield
