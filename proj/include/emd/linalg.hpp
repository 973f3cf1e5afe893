#pragma once

#include "emd/common.hpp"

namespace emd {

struct NullSpace {
    int rank = 0;
    Mat basis;           // orthonormal columns spanning the numerical null space
    Vec singular_values;
};

/// Numerical null space with rank threshold rel * sigma_max.
NullSpace null_space(const Mat& M, double rel = tol::rank_rel);

int numerical_rank(const Mat& M, double rel = tol::rank_rel);

/// Minimum-norm least-squares solution with the same rank threshold.
Vec min_norm_solve(const Mat& M, const Vec& b, double rel = tol::rank_rel);

}  // namespace emd
