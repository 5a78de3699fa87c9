#pragma once

#include <cstddef>
#include <cstdint>

// Low-level compute kernels. Every kernel exists twice with an identical
// loop body: the default entry points are OpenMP-parallel, and
// kernels::serial holds a single-threaded reference used by the tests and
// the benchmark. Parallel loops are partitioned so that each output
// element is written by exactly one iteration and every reduction runs in
// a fixed order, which makes results bit-identical to the serial variant
// for any thread count.

namespace dsmote::kernels {

struct ConvGeom {
  int n = 0;
  int c_in = 0, h_in = 0, w_in = 0;
  int c_out = 0, k = 1, stride = 1, pad = 0;

  int h_out() const { return (h_in + 2 * pad - k) / stride + 1; }
  int w_out() const { return (w_in + 2 * pad - k) / stride + 1; }
};

// Transposed convolution. Weight layout is [c_in][c_out][k][k]; output
// spatial size is (in-1)*stride - 2*pad + k.
struct ConvTGeom {
  int n = 0;
  int c_in = 0, h_in = 0, w_in = 0;
  int c_out = 0, k = 1, stride = 1, pad = 0;

  int h_out() const { return (h_in - 1) * stride - 2 * pad + k; }
  int w_out() const { return (w_in - 1) * stride - 2 * pad + k; }
};

#define DSMOTE_DECLARE_KERNELS                                                             \
  void conv2d_forward(const ConvGeom& g, const float* in, const float* w, const float* b, \
                      float* out);                                                         \
  void conv2d_backward_input(const ConvGeom& g, const float* gout, const float* w,        \
                             float* gin);                                                  \
  void conv2d_backward_params(const ConvGeom& g, const float* gout, const float* in,      \
                              float* gw, float* gb);                                       \
  void convt2d_forward(const ConvTGeom& g, const float* in, const float* w,               \
                       const float* b, float* out);                                        \
  void convt2d_backward_input(const ConvTGeom& g, const float* gout, const float* w,      \
                              float* gin);                                                 \
  void convt2d_backward_params(const ConvTGeom& g, const float* gout, const float* in,    \
                               float* gw, float* gb);                                      \
  void linear_forward(int n, int f_in, int f_out, const float* in, const float* w,        \
                      const float* b, float* out);                                         \
  void linear_backward_input(int n, int f_in, int f_out, const float* gout,               \
                             const float* w, float* gin);                                  \
  void linear_backward_params(int n, int f_in, int f_out, const float* gout,              \
                              const float* in, float* gw, float* gb);                      \
  void batchnorm_forward_train(int n, int c, int spatial, float eps, const float* in,     \
                               const float* gamma, const float* beta, float* out,         \
                               float* xhat, float* mean, float* var, float* rstd);         \
  void batchnorm_forward_eval(int n, int c, int spatial, float eps, const float* in,      \
                              const float* gamma, const float* beta, const float* rmean,  \
                              const float* rvar, float* out);                              \
  void batchnorm_backward(int n, int c, int spatial, const float* gout,                   \
                          const float* gamma, const float* xhat, const float* rstd,       \
                          float* gin, float* ggamma, float* gbeta);                        \
  void leaky_relu_forward(size_t n, float slope, const float* in, float* out);            \
  void leaky_relu_backward(size_t n, float slope, const float* in, const float* gout,     \
                           float* gin);                                                    \
  void tanh_forward(size_t n, const float* in, float* out);                               \
  void tanh_backward(size_t n, const float* out, const float* gout, float* gin);          \
  void maxpool2_forward(int n, int c, int h, int w, const float* in, float* out,          \
                        int32_t* argmax);                                                  \
  void maxpool2_backward(int n, int c, int h, int w, const int32_t* argmax,               \
                         const float* gout, float* gin);                                   \
  double mse_value(size_t n, const float* pred, const float* tgt);                        \
  void mse_grad(size_t n, const float* pred, const float* tgt, float* grad);              \
  void adam_update(size_t n, float lr, float b1, float b2, float eps, double bc1,         \
                   double bc2, const float* g, float* m, float* v, float* p);              \
  void sqdist_matrix(int rows, int dim, const float* pts, double* dist);

DSMOTE_DECLARE_KERNELS

namespace serial {
DSMOTE_DECLARE_KERNELS
}

#undef DSMOTE_DECLARE_KERNELS

}  // namespace dsmote::kernels
