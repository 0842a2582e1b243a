#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace irwri {

using Real = double;
using Complex = std::complex<double>;

using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<Complex>;
using SpMatR = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<Complex>;
using TripletR = Eigen::Triplet<double>;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(const std::string& msg, long pivot_index)
      : Error(msg), pivot_index_(pivot_index) {}
  long pivot_index() const { return pivot_index_; }

 private:
  long pivot_index_;
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& msg) : Error(msg) {}
};

}  // namespace irwri
