#include "emd/stencil.hpp"

#include <cstdlib>
#include <stdexcept>

#include "emd/common.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define EMD_HAVE_X86 1
#endif
#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>
#define EMD_HAVE_NEON 1
#endif

namespace emd {

std::string backend_name(SimdBackend b) {
    switch (b) {
        case SimdBackend::Scalar: return "scalar";
        case SimdBackend::Avx2: return "avx2";
        case SimdBackend::Neon: return "neon";
    }
    return "scalar";
}

bool backend_available(SimdBackend b) {
    switch (b) {
        case SimdBackend::Scalar: return true;
        case SimdBackend::Avx2:
#ifdef EMD_HAVE_X86
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
        case SimdBackend::Neon:
#ifdef EMD_HAVE_NEON
            return true;
#else
            return false;
#endif
    }
    return false;
}

SimdBackend default_backend() {
    if (const char* env = std::getenv("EMDUALITY_SIMD")) {
        const std::string want(env);
        for (SimdBackend b : {SimdBackend::Scalar, SimdBackend::Avx2, SimdBackend::Neon})
            if (want == backend_name(b) && backend_available(b)) return b;
    }
    if (backend_available(SimdBackend::Avx2)) return SimdBackend::Avx2;
    if (backend_available(SimdBackend::Neon)) return SimdBackend::Neon;
    return SimdBackend::Scalar;
}

namespace kernels {
namespace {

void central_scalar(const double* p, const double* m, double* out, std::size_t n, double s) {
    for (std::size_t k = 0; k < n; ++k) out[k] = (p[k] - m[k]) * s;
}

void second_scalar(const double* p, const double* c, const double* m, double* out, std::size_t n, double s) {
    for (std::size_t k = 0; k < n; ++k) {
        double t = p[k] - 2.0 * c[k];
        t = t + m[k];
        out[k] = t * s;
    }
}

#ifdef EMD_HAVE_X86
__attribute__((target("avx2"))) void central_avx2(const double* p, const double* m, double* out, std::size_t n,
                                                  double s) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(p + k), _mm256_loadu_pd(m + k));
        _mm256_storeu_pd(out + k, _mm256_mul_pd(d, vs));
    }
    central_scalar(p + k, m + k, out + k, n - k, s);
}

__attribute__((target("avx2"))) void second_avx2(const double* p, const double* c, const double* m, double* out,
                                                 std::size_t n, double s) {
    const __m256d vs = _mm256_set1_pd(s);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d t = _mm256_sub_pd(_mm256_loadu_pd(p + k), _mm256_mul_pd(two, _mm256_loadu_pd(c + k)));
        t = _mm256_add_pd(t, _mm256_loadu_pd(m + k));
        _mm256_storeu_pd(out + k, _mm256_mul_pd(t, vs));
    }
    second_scalar(p + k, c + k, m + k, out + k, n - k, s);
}
#endif

#ifdef EMD_HAVE_NEON
// Untested in this build environment (x86 only); mirrors the AVX2 operation order.
void central_neon(const double* p, const double* m, double* out, std::size_t n, double s) {
    const float64x2_t vs = vdupq_n_f64(s);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) vst1q_f64(out + k, vmulq_f64(vsubq_f64(vld1q_f64(p + k), vld1q_f64(m + k)), vs));
    central_scalar(p + k, m + k, out + k, n - k, s);
}

void second_neon(const double* p, const double* c, const double* m, double* out, std::size_t n, double s) {
    const float64x2_t vs = vdupq_n_f64(s);
    const float64x2_t two = vdupq_n_f64(2.0);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        float64x2_t t = vsubq_f64(vld1q_f64(p + k), vmulq_f64(two, vld1q_f64(c + k)));
        t = vaddq_f64(t, vld1q_f64(m + k));
        vst1q_f64(out + k, vmulq_f64(t, vs));
    }
    second_scalar(p + k, c + k, m + k, out + k, n - k, s);
}
#endif

}  // namespace

void central_diff(const double* plus, const double* minus, double* out, std::size_t n, double s, SimdBackend b) {
#ifdef EMD_HAVE_X86
    if (b == SimdBackend::Avx2) return central_avx2(plus, minus, out, n, s);
#endif
#ifdef EMD_HAVE_NEON
    if (b == SimdBackend::Neon) return central_neon(plus, minus, out, n, s);
#endif
    (void)b;
    central_scalar(plus, minus, out, n, s);
}

void second_diff(const double* plus, const double* centre, const double* minus, double* out, std::size_t n, double s,
                 SimdBackend b) {
#ifdef EMD_HAVE_X86
    if (b == SimdBackend::Avx2) return second_avx2(plus, centre, minus, out, n, s);
#endif
#ifdef EMD_HAVE_NEON
    if (b == SimdBackend::Neon) return second_neon(plus, centre, minus, out, n, s);
#endif
    (void)b;
    second_scalar(plus, centre, minus, out, n, s);
}

}  // namespace kernels

std::size_t node_count(const Shape4& n) {
    return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]) * static_cast<std::size_t>(n[2]) *
           static_cast<std::size_t>(n[3]);
}

namespace {

struct AxisView {
    std::size_t outer = 1, len = 0, inner = 1;
};

AxisView axis_view(const Shape4& n, int axis, int min_len) {
    if (axis < 0 || axis > 3) throw DimensionError("stencil axis out of range");
    if (n[axis] < min_len) throw DimensionError("stencil: too few nodes along axis");
    AxisView v;
    for (int a = 0; a < axis; ++a) v.outer *= static_cast<std::size_t>(n[a]);
    for (int a = axis + 1; a < 4; ++a) v.inner *= static_cast<std::size_t>(n[a]);
    v.len = static_cast<std::size_t>(n[axis]);
    return v;
}

}  // namespace

void diff1(const double* in, double* out, const Shape4& n, int axis, double h, SimdBackend b) {
    const AxisView v = axis_view(n, axis, 3);
    const std::size_t s = v.inner, L = v.len;
    const double c = 1.0 / (2.0 * h);
    for (std::size_t o = 0; o < v.outer; ++o) {
        const double* f = in + o * L * s;
        double* g = out + o * L * s;
        // Interior rows 1..L-2 form one contiguous run of (L-2)*s values.
        kernels::central_diff(f + 2 * s, f, g + s, (L - 2) * s, c, b);
        for (std::size_t k = 0; k < s; ++k) {
            g[k] = (-3.0 * f[k] + 4.0 * f[s + k] - f[2 * s + k]) * c;
            const std::size_t e = (L - 1) * s + k;
            g[e] = (3.0 * f[e] - 4.0 * f[e - s] + f[e - 2 * s]) * c;
        }
    }
}

void diff2(const double* in, double* out, const Shape4& n, int axis, double h, SimdBackend b) {
    const AxisView v = axis_view(n, axis, 4);
    const std::size_t s = v.inner, L = v.len;
    const double c = 1.0 / (h * h);
    for (std::size_t o = 0; o < v.outer; ++o) {
        const double* f = in + o * L * s;
        double* g = out + o * L * s;
        kernels::second_diff(f + 2 * s, f + s, f, g + s, (L - 2) * s, c, b);
        for (std::size_t k = 0; k < s; ++k) {
            g[k] = (2.0 * f[k] - 5.0 * f[s + k] + 4.0 * f[2 * s + k] - f[3 * s + k]) * c;
            const std::size_t e = (L - 1) * s + k;
            g[e] = (2.0 * f[e] - 5.0 * f[e - s] + 4.0 * f[e - 2 * s] - f[e - 3 * s]) * c;
        }
    }
}

}  // namespace emd
