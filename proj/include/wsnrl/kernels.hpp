#pragma once

#include <cstddef>

// Data-parallel inner loops used by the policy network. Every kernel has a
// scalar reference implementation and, on x86-64, an AVX2/FMA variant. The
// backend is picked once at startup (cpuid, overridable via WSNRL_KERNELS or
// set_backend) and stays fixed for the process, so repeated runs with the
// same seed reproduce bit-identical results.
//
// GEMM naming: output is always M x N, reduction length K, row-major.
//   gemm_nn: C += A[MxK] * B[KxN]
//   gemm_nt: C += A[MxK] * B[NxK]^T
//   gemm_tn: C += A[KxM]^T * B[KxN]
namespace wsnrl::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
void set_backend(Backend b);
bool avx2_supported();
const char* backend_name(Backend b);

void gemm_nn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c);
void gemm_nt(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c);
void gemm_tn(std::size_t m, std::size_t n, std::size_t k,
             const double* a, const double* b, double* c);

double dot(std::size_t n, const double* x, const double* y);
// y += a * x
void axpy(std::size_t n, double a, const double* x, double* y);
double sum(std::size_t n, const double* x);

// y = x > 0 ? x : slope * x  (and its input-side gradient)
void leaky_relu(std::size_t n, double slope, const double* x, double* y);
void leaky_relu_grad(std::size_t n, double slope, const double* x,
                     const double* dy, double* dx);

// Internal: per-backend tables, exposed for the equivalence tests.
struct Ops {
    void (*gemm_nn)(std::size_t, std::size_t, std::size_t, const double*, const double*, double*);
    void (*gemm_nt)(std::size_t, std::size_t, std::size_t, const double*, const double*, double*);
    void (*gemm_tn)(std::size_t, std::size_t, std::size_t, const double*, const double*, double*);
    double (*dot)(std::size_t, const double*, const double*);
    void (*axpy)(std::size_t, double, const double*, double*);
    double (*sum)(std::size_t, const double*);
    void (*leaky_relu)(std::size_t, double, const double*, double*);
    void (*leaky_relu_grad)(std::size_t, double, const double*, const double*, double*);
};

const Ops& scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
#endif

}  // namespace wsnrl::kernels
