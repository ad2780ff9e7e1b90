#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bmtomo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// All stochastic routines draw from this engine so that a seed fully
// determines their output on a given standard library.
using Rng = std::mt19937_64;

// d x r complex Burer-Monteiro factor, rho = Y Y^*.
using BMFactor = CMatrix;
// 2d x 2r real embedding of a BMFactor, see realify.hpp.
using RealFactor = RMatrix;

/// SplitMix64 finalizer. Used to derive independent sub-stream seeds
/// (data, initialization, chain noise) from a single user seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

struct SystemSize {
  int n = 1;  // qubits
  int d = 2;  // Hilbert dimension, 2^n

  static SystemSize qubits(int n);
  static SystemSize from_dimension(long d);
};

// Error hierarchy. Everything derives from std::runtime_error or
// std::invalid_argument so callers can catch at whatever granularity fits.

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class StructureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public NumericalError {
 public:
  DivergenceError(long step, const std::string& what)
      : NumericalError(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace bmtomo
