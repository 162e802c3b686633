#pragma once

// Internal exact-rational helpers.  GMP stays private to the library: this
// header is only included by core/src/*.cpp.

#include <map>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include <Eigen/Dense>

#include "sclab/univariate.hpp"

namespace sclab::detail {

using Rat = mpq_class;
using RatMat = std::vector<std::vector<Rat>>;  // row-major dense
/// Sparse rational vector: (index, value), sorted by index, values nonzero.
using RatVec = std::vector<std::pair<long, Rat>>;

struct RatKnots {
  int p = 0;
  std::vector<Rat> knots;
  int dim() const { return static_cast<int>(knots.size()) - p - 1; }
};

/// Exact rationalization of the double knots (every double is a rational).
RatKnots rat_knots(const KnotVector& kv);
RatKnots rat_derivative(const RatKnots& kv);
RatKnots rat_dyadic_refine(const RatKnots& kv);

/// Boehm knot-insertion two-scale matrix, (fine.dim x coarse.dim), exact.
RatMat rat_twoscale(const RatKnots& coarse, const RatKnots& fine);

/// Curry-Schoenberg weights w_j = p/(xi_{j+1+p} - xi_{j+1}), j = 0..m-2.
std::vector<Rat> rat_cs_weights(const RatKnots& kv);

/// Two-scale matrix between normalized Curry-Schoenberg derivative bases.
RatMat rat_twoscale_cs(const RatKnots& coarse, const RatKnots& fine);

Eigen::MatrixXd to_double(const RatMat& m);

/// y += c * x on sparse rational vectors (sorted merge).
void axpy(RatVec& y, const Rat& c, const RatVec& x);

/// Exact rank of a collection of sparse rational rows (order irrelevant),
/// by incremental reduction to row echelon form over Q.
long exact_rank(std::vector<RatVec> rows);

/// Total number of stored nonzeros.
long nnz(const std::vector<RatVec>& rows);

}  // namespace sclab::detail
