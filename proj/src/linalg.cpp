#include "emd/linalg.hpp"

#include <Eigen/SVD>

namespace emd {

namespace {
int rank_of(const Vec& s, double rel) {
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int r = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s(k) > rel * s(0)) ++r;
    return r;
}
}  // namespace

NullSpace null_space(const Mat& M, double rel) {
    NullSpace ns;
    const auto cols = M.cols();
    if (M.rows() == 0) {
        ns.basis = Mat::Identity(cols, cols);
        return ns;
    }
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
    ns.singular_values = svd.singularValues();
    ns.rank = rank_of(ns.singular_values, rel);
    ns.basis = svd.matrixV().rightCols(cols - ns.rank);
    return ns;
}

int numerical_rank(const Mat& M, double rel) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(M);
    return rank_of(svd.singularValues(), rel);
}

Vec min_norm_solve(const Mat& M, const Vec& b, double rel) {
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& s = svd.singularValues();
    const int r = rank_of(s, rel);
    Vec y = Vec::Zero(M.cols());
    const Vec utb = svd.matrixU().transpose() * b;
    Vec coef = Vec::Zero(s.size());
    for (int k = 0; k < r; ++k) coef(k) = utb(k) / s(k);
    y = svd.matrixV() * coef;
    return y;
}

}  // namespace emd
