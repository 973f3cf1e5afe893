#pragma once

#include <string>
#include <vector>

#include "emd/common.hpp"

namespace emd {

/// Flat symplectic bundle given by holonomy generators and relation words.
/// A word is a list of signed 1-based generator indices; -k means the inverse of generator k.
struct BundlePresentation {
    int nv = 1;
    std::vector<Mat> generators;
    std::vector<std::vector<int>> relations;
};

struct PresentationDiagnostics {
    std::vector<double> generator_violation;  // |H^T W H - W|_max per generator
    std::vector<double> relation_violation;   // |word - Id|_max per relation
    bool ok = false;
};

PresentationDiagnostics presentation_check(const BundlePresentation& P, double tol = tol::alg);

/// Product of generators along a word (left to right).
Mat evaluate_word(const BundlePresentation& P, const std::vector<int>& word);

struct AlgebraReport {
    int dim = 0;
    std::vector<Mat> basis;
    double residual = 0.0;  // worst commutator norm over basis and constraints
};

/// {X in sp(2n) : X H_i = H_i X for all generators}.
AlgebraReport centralizer_algebra(const BundlePresentation& P);

/// Centralizer condition plus [X, J0] = 0.
AlgebraReport autb_theta_algebra(const BundlePresentation& P, const Mat& J0);

inline constexpr int kMaxWordLength = 6;

/// Sorted traces of all freely reduced words of length 1..max_len (the empty word when there are no generators).
std::vector<double> conjugacy_invariants(const BundlePresentation& P, int max_len);

/// "distinct" when some entry differs by more than tol, otherwise "not distinguished".
std::string compare_invariants(const std::vector<double>& a, const std::vector<double>& b, double tol = tol::alg);

}  // namespace emd
