#pragma once

#include <array>
#include <cstddef>
#include <string>

namespace emd {

/// Kernel family used by the finite-difference stencils.
enum class SimdBackend { Scalar, Avx2, Neon };

std::string backend_name(SimdBackend b);
/// True when the running CPU (and the build) can execute b.
bool backend_available(SimdBackend b);
/// Best available backend, or the one named by EMDUALITY_SIMD (scalar|avx2|neon) when set and available.
SimdBackend default_backend();

namespace kernels {

// Contiguous primitives; plus/minus/centre may alias the input at a fixed offset.
// All variants perform the same IEEE operations in the same order, so results are bitwise equal.

/// out[k] = (plus[k] - minus[k]) * s
void central_diff(const double* plus, const double* minus, double* out, std::size_t n, double s, SimdBackend b);
/// out[k] = ((plus[k] - 2 centre[k]) + minus[k]) * s
void second_diff(const double* plus, const double* centre, const double* minus, double* out, std::size_t n, double s,
                 SimdBackend b);

}  // namespace kernels

/// Node array shape, row-major with the last axis fastest.
using Shape4 = std::array<int, 4>;

std::size_t node_count(const Shape4& n);

/// First derivative along `axis` with spacing h: central in the interior, one-sided second order
/// on the two boundary layers. Requires n[axis] >= 3.
void diff1(const double* in, double* out, const Shape4& n, int axis, double h, SimdBackend b);
/// Second derivative along `axis`; one-sided second order on boundary layers. Requires n[axis] >= 4.
void diff2(const double* in, double* out, const Shape4& n, int axis, double h, SimdBackend b);

}  // namespace emd
