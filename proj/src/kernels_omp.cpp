// OpenMP lane. Parallel only over independent output cells; each cell keeps
// the serial lane's accumulation order, so both lanes agree bit-for-bit.

#include "trajkit/kernels.hpp"

namespace trajkit::kernels::omp {

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
            c[i * n + j] = acc;
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c, int m, int n, int k) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += a[i * n + j] * b[p * n + j];
            c[i * k + p] = acc;
        }
    }
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static)
    for (int p = 0; p < k; ++p) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i) acc += a[i * k + p] * b[i * n + j];
            c[p * n + j] = acc;
        }
    }
}

void conv2d_forward(const double* in, const double* kernel, const double* bias,
                    double* out, const Conv2dShape& s) {
    const int oh = s.out_h(), ow = s.out_w();
#pragma omp parallel for collapse(2) schedule(static)
    for (int co = 0; co < s.c_out; ++co) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double acc = bias ? bias[co] : 0.0;
                for (int ci = 0; ci < s.c_in; ++ci) {
                    for (int ky = 0; ky < s.kh; ++ky) {
                        const int iy = oy + ky - s.pad.top;
                        if (iy < 0 || iy >= s.h) continue;
                        for (int kx = 0; kx < s.kw; ++kx) {
                            const int ix = ox + kx - s.pad.left;
                            if (ix < 0 || ix >= s.w) continue;
                            acc += in[(ci * s.h + iy) * s.w + ix] *
                                   kernel[((co * s.c_in + ci) * s.kh + ky) * s.kw + kx];
                        }
                    }
                }
                out[(co * oh + oy) * ow + ox] = acc;
            }
        }
    }
}

void conv2d_dinput(const double* dout, const double* kernel, double* din,
                   const Conv2dShape& s) {
    const int oh = s.out_h(), ow = s.out_w();
#pragma omp parallel for collapse(2) schedule(static)
    for (int ci = 0; ci < s.c_in; ++ci) {
        for (int iy = 0; iy < s.h; ++iy) {
            for (int ix = 0; ix < s.w; ++ix) {
                double acc = 0.0;
                for (int co = 0; co < s.c_out; ++co) {
                    for (int ky = 0; ky < s.kh; ++ky) {
                        const int oy = iy - ky + s.pad.top;
                        if (oy < 0 || oy >= oh) continue;
                        for (int kx = 0; kx < s.kw; ++kx) {
                            const int ox = ix - kx + s.pad.left;
                            if (ox < 0 || ox >= ow) continue;
                            acc += dout[(co * oh + oy) * ow + ox] *
                                   kernel[((co * s.c_in + ci) * s.kh + ky) * s.kw + kx];
                        }
                    }
                }
                din[(ci * s.h + iy) * s.w + ix] = acc;
            }
        }
    }
}

void conv2d_dkernel(const double* dout, const double* in, double* dkernel,
                    const Conv2dShape& s) {
    const int oh = s.out_h(), ow = s.out_w();
#pragma omp parallel for collapse(2) schedule(static)
    for (int co = 0; co < s.c_out; ++co) {
        for (int ci = 0; ci < s.c_in; ++ci) {
            for (int ky = 0; ky < s.kh; ++ky) {
                for (int kx = 0; kx < s.kw; ++kx) {
                    double acc = 0.0;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy + ky - s.pad.top;
                        if (iy < 0 || iy >= s.h) continue;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox + kx - s.pad.left;
                            if (ix < 0 || ix >= s.w) continue;
                            acc += dout[(co * oh + oy) * ow + ox] *
                                   in[(ci * s.h + iy) * s.w + ix];
                        }
                    }
                    dkernel[((co * s.c_in + ci) * s.kh + ky) * s.kw + kx] = acc;
                }
            }
        }
    }
}

void conv2d_dbias(const double* dout, double* dbias, const Conv2dShape& s) {
    const int plane = s.out_h() * s.out_w();
#pragma omp parallel for schedule(static)
    for (int co = 0; co < s.c_out; ++co) {
        double acc = 0.0;
        for (int i = 0; i < plane; ++i) acc += dout[co * plane + i];
        dbias[co] = acc;
    }
}

}  // namespace trajkit::kernels::omp
