#pragma once

// Dense compute kernels backing the tensor ops. Each kernel exists in two
// lanes with identical signatures: kernels::serial (reference) and
// kernels::omp (OpenMP over independent output cells). Both lanes accumulate
// every output element in the same inner-loop order, so their results are
// bit-identical; the unit tests assert that and tools/kernel_bench compares
// their throughput.
//
// The unqualified kernels::* entry points dispatch to the OpenMP lane when
// parallelism is enabled and the problem is large enough to amortize the
// fork/join overhead, and to the serial lane otherwise.

namespace trajkit::kernels {

// Zero padding per side of the spatial map.
struct Pad {
    int top = 0;
    int left = 0;
    int bottom = 0;
    int right = 0;
};

struct Conv2dShape {
    int c_in = 0;
    int h = 0;
    int w = 0;
    int c_out = 0;
    int kh = 0;
    int kw = 0;
    Pad pad;

    int out_h() const { return h + pad.top + pad.bottom - kh + 1; }
    int out_w() const { return w + pad.left + pad.right - kw + 1; }
};

// Runtime switch for the parallel lane (the latency harness times the
// serial lane only; everything else defaults to parallel-when-worthwhile).
void set_parallel(bool enabled);
bool parallel_enabled();

struct ScopedSerial {
    ScopedSerial() : prev_(parallel_enabled()) { set_parallel(false); }
    ~ScopedSerial() { set_parallel(prev_); }

private:
    bool prev_;
};

namespace serial {

// c[m x n] = a[m x k] * b[k x n]
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n);
// c[m x k] = a[m x n] * b[k x n]^T
void matmul_nt(const double* a, const double* b, double* c, int m, int n, int k);
// c[k x n] = a[m x k]^T * b[m x n]
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n);

// Cross-correlation, stride 1, zero fill outside the padded map.
void conv2d_forward(const double* in, const double* kernel, const double* bias,
                    double* out, const Conv2dShape& s);
// Gather-form gradients (no scatter, so the omp lane stays deterministic).
void conv2d_dinput(const double* dout, const double* kernel, double* din,
                   const Conv2dShape& s);
void conv2d_dkernel(const double* dout, const double* in, double* dkernel,
                    const Conv2dShape& s);
void conv2d_dbias(const double* dout, double* dbias, const Conv2dShape& s);

}  // namespace serial

namespace omp {

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_nt(const double* a, const double* b, double* c, int m, int n, int k);
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n);
void conv2d_forward(const double* in, const double* kernel, const double* bias,
                    double* out, const Conv2dShape& s);
void conv2d_dinput(const double* dout, const double* kernel, double* din,
                   const Conv2dShape& s);
void conv2d_dkernel(const double* dout, const double* in, double* dkernel,
                    const Conv2dShape& s);
void conv2d_dbias(const double* dout, double* dbias, const Conv2dShape& s);

}  // namespace omp

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_nt(const double* a, const double* b, double* c, int m, int n, int k);
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n);
void conv2d_forward(const double* in, const double* kernel, const double* bias,
                    double* out, const Conv2dShape& s);
void conv2d_dinput(const double* dout, const double* kernel, double* din,
                   const Conv2dShape& s);
void conv2d_dkernel(const double* dout, const double* in, double* dkernel,
                    const Conv2dShape& s);
void conv2d_dbias(const double* dout, double* dbias, const Conv2dShape& s);

}  // namespace trajkit::kernels
