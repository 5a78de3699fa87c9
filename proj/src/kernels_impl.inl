// Shared kernel bodies, included by kernels_omp.cpp (DS_PAR_* expand to
// OpenMP pragmas) and kernels_serial.cpp (they expand to nothing). Keeping
// one body guarantees the two variants agree bit-for-bit: reductions run
// in the same fixed order either way, threading only splits independent
// output elements.

// im2col, rows = (c,kh,kw) patch coordinate, cols = output position.
inline void im2col_rows(int c, int h, int w, int k, int stride, int pad,
                        const float* img, float* col) {
  const int oh = (h + 2 * pad - k) / stride + 1;
  const int ow = (w + 2 * pad - k) / stride + 1;
  const int p = oh * ow;
  int row = 0;
  for (int ci = 0; ci < c; ++ci) {
    const float* plane = img + static_cast<size_t>(ci) * h * w;
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw, ++row) {
        float* dst = col + static_cast<size_t>(row) * p;
        for (int y = 0; y < oh; ++y) {
          const int iy = y * stride - pad + kh;
          float* d = dst + static_cast<size_t>(y) * ow;
          if (iy < 0 || iy >= h) {
            for (int x = 0; x < ow; ++x) d[x] = 0.0f;
            continue;
          }
          const float* src = plane + static_cast<size_t>(iy) * w;
          for (int x = 0; x < ow; ++x) {
            const int ix = x * stride - pad + kw;
            d[x] = (ix >= 0 && ix < w) ? src[ix] : 0.0f;
          }
        }
      }
    }
  }
}

// Transposed layout: rows = output position, cols = patch coordinate.
// Used where the accumulation axis must be contiguous.
inline void im2col_cols(int c, int h, int w, int k, int stride, int pad,
                        const float* img, float* col) {
  const int oh = (h + 2 * pad - k) / stride + 1;
  const int ow = (w + 2 * pad - k) / stride + 1;
  const int k2 = c * k * k;
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      float* dst = col + static_cast<size_t>(y * ow + x) * k2;
      int row = 0;
      for (int ci = 0; ci < c; ++ci) {
        const float* plane = img + static_cast<size_t>(ci) * h * w;
        for (int kh = 0; kh < k; ++kh) {
          const int iy = y * stride - pad + kh;
          for (int kw = 0; kw < k; ++kw, ++row) {
            const int ix = x * stride - pad + kw;
            dst[row] = (iy >= 0 && iy < h && ix >= 0 && ix < w)
                           ? plane[static_cast<size_t>(iy) * w + ix]
                           : 0.0f;
          }
        }
      }
    }
  }
}

// Scatter-add inverse of im2col_rows.
inline void col2im_add(int c, int h, int w, int k, int stride, int pad,
                       const float* col, float* img) {
  const int oh = (h + 2 * pad - k) / stride + 1;
  const int ow = (w + 2 * pad - k) / stride + 1;
  const int p = oh * ow;
  int row = 0;
  for (int ci = 0; ci < c; ++ci) {
    float* plane = img + static_cast<size_t>(ci) * h * w;
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw, ++row) {
        const float* src = col + static_cast<size_t>(row) * p;
        for (int y = 0; y < oh; ++y) {
          const int iy = y * stride - pad + kh;
          if (iy < 0 || iy >= h) continue;
          float* dplane = plane + static_cast<size_t>(iy) * w;
          const float* s = src + static_cast<size_t>(y) * ow;
          for (int x = 0; x < ow; ++x) {
            const int ix = x * stride - pad + kw;
            if (ix >= 0 && ix < w) dplane[ix] += s[x];
          }
        }
      }
    }
  }
}

void conv2d_forward(const ConvGeom& g, const float* in, const float* w, const float* b,
                    float* out) {
  const int p = g.h_out() * g.w_out();
  const int k2 = g.c_in * g.k * g.k;
  const size_t in_stride = static_cast<size_t>(g.c_in) * g.h_in * g.w_in;
  DS_PAR_FOR
  for (int n = 0; n < g.n; ++n) {
    std::vector<float> col(static_cast<size_t>(k2) * p);
    im2col_rows(g.c_in, g.h_in, g.w_in, g.k, g.stride, g.pad, in + n * in_stride,
                col.data());
    for (int oc = 0; oc < g.c_out; ++oc) {
      float* o = out + (static_cast<size_t>(n) * g.c_out + oc) * p;
      const float bias = b ? b[oc] : 0.0f;
      for (int x = 0; x < p; ++x) o[x] = bias;
      const float* wrow = w + static_cast<size_t>(oc) * k2;
      for (int r = 0; r < k2; ++r) {
        const float wv = wrow[r];
        const float* c = col.data() + static_cast<size_t>(r) * p;
        for (int x = 0; x < p; ++x) o[x] += wv * c[x];
      }
    }
  }
}

void conv2d_backward_input(const ConvGeom& g, const float* gout, const float* w,
                           float* gin) {
  const int p = g.h_out() * g.w_out();
  const int k2 = g.c_in * g.k * g.k;
  const size_t in_stride = static_cast<size_t>(g.c_in) * g.h_in * g.w_in;
  DS_PAR_FOR
  for (int n = 0; n < g.n; ++n) {
    std::vector<float> colg(static_cast<size_t>(k2) * p, 0.0f);
    for (int oc = 0; oc < g.c_out; ++oc) {
      const float* go = gout + (static_cast<size_t>(n) * g.c_out + oc) * p;
      const float* wrow = w + static_cast<size_t>(oc) * k2;
      for (int r = 0; r < k2; ++r) {
        const float wv = wrow[r];
        float* c = colg.data() + static_cast<size_t>(r) * p;
        for (int x = 0; x < p; ++x) c[x] += wv * go[x];
      }
    }
    float* gi = gin + n * in_stride;
    for (size_t i = 0; i < in_stride; ++i) gi[i] = 0.0f;
    col2im_add(g.c_in, g.h_in, g.w_in, g.k, g.stride, g.pad, colg.data(), gi);
  }
}

void conv2d_backward_params(const ConvGeom& g, const float* gout, const float* in,
                            float* gw, float* gb) {
  const int p = g.h_out() * g.w_out();
  const int k2 = g.c_in * g.k * g.k;
  const size_t in_stride = static_cast<size_t>(g.c_in) * g.h_in * g.w_in;
  // One transposed patch matrix per batch element, shared by all threads.
  std::vector<float> cols(static_cast<size_t>(g.n) * p * k2);
  DS_PAR_FOR
  for (int n = 0; n < g.n; ++n) {
    im2col_cols(g.c_in, g.h_in, g.w_in, g.k, g.stride, g.pad, in + n * in_stride,
                cols.data() + static_cast<size_t>(n) * p * k2);
  }
  DS_PAR_FOR
  for (int oc = 0; oc < g.c_out; ++oc) {
    float* gwrow = gw + static_cast<size_t>(oc) * k2;
    for (int r = 0; r < k2; ++r) gwrow[r] = 0.0f;
    double bias_acc = 0.0;
    for (int n = 0; n < g.n; ++n) {
      const float* go = gout + (static_cast<size_t>(n) * g.c_out + oc) * p;
      const float* colb = cols.data() + static_cast<size_t>(n) * p * k2;
      for (int x = 0; x < p; ++x) {
        const float gv = go[x];
        bias_acc += gv;
        const float* c = colb + static_cast<size_t>(x) * k2;
        for (int r = 0; r < k2; ++r) gwrow[r] += gv * c[r];
      }
    }
    if (gb) gb[oc] = static_cast<float>(bias_acc);
  }
}

// Transposed convolution shares the patch machinery: its *output* plays
// the role the input plays in a plain convolution of the same geometry.
void convt2d_forward(const ConvTGeom& g, const float* in, const float* w, const float* b,
                     float* out) {
  const int oh = g.h_out(), ow = g.w_out();
  const int p = g.h_in * g.w_in;  // positions in the small map
  const int k2 = g.c_out * g.k * g.k;
  const size_t out_stride = static_cast<size_t>(g.c_out) * oh * ow;
  DS_PAR_FOR
  for (int n = 0; n < g.n; ++n) {
    std::vector<float> colg(static_cast<size_t>(k2) * p, 0.0f);
    for (int ic = 0; ic < g.c_in; ++ic) {
      const float* src = in + (static_cast<size_t>(n) * g.c_in + ic) * p;
      const float* wrow = w + static_cast<size_t>(ic) * k2;
      for (int r = 0; r < k2; ++r) {
        const float wv = wrow[r];
        float* c = colg.data() + static_cast<size_t>(r) * p;
        for (int x = 0; x < p; ++x) c[x] += wv * src[x];
      }
    }
    float* o = out + n * out_stride;
    for (int oc = 0; oc < g.c_out; ++oc) {
      const float bias = b ? b[oc] : 0.0f;
      float* plane = o + static_cast<size_t>(oc) * oh * ow;
      for (int i = 0; i < oh * ow; ++i) plane[i] = bias;
    }
    col2im_add(g.c_out, oh, ow, g.k, g.stride, g.pad, colg.data(), o);
  }
}

void convt2d_backward_input(const ConvTGeom& g, const float* gout, const float* w,
                            float* gin) {
  const int oh = g.h_out(), ow = g.w_out();
  const int p = g.h_in * g.w_in;
  const int k2 = g.c_out * g.k * g.k;
  const size_t out_stride = static_cast<size_t>(g.c_out) * oh * ow;
  DS_PAR_FOR
  for (int n = 0; n < g.n; ++n) {
    std::vector<float> col(static_cast<size_t>(k2) * p);
    im2col_rows(g.c_out, oh, ow, g.k, g.stride, g.pad, gout + n * out_stride,
                col.data());
    for (int ic = 0; ic < g.c_in; ++ic) {
      float* gi = gin + (static_cast<size_t>(n) * g.c_in + ic) * p;
      for (int x = 0; x < p; ++x) gi[x] = 0.0f;
      const float* wrow = w + static_cast<size_t>(ic) * k2;
      for (int r = 0; r < k2; ++r) {
        const float wv = wrow[r];
        const float* c = col.data() + static_cast<size_t>(r) * p;
        for (int x = 0; x < p; ++x) gi[x] += wv * c[x];
      }
    }
  }
}

void convt2d_backward_params(const ConvTGeom& g, const float* gout, const float* in,
                             float* gw, float* gb) {
  const int oh = g.h_out(), ow = g.w_out();
  const int p = g.h_in * g.w_in;
  const int k2 = g.c_out * g.k * g.k;
  const size_t out_stride = static_cast<size_t>(g.c_out) * oh * ow;
  std::vector<float> cols(static_cast<size_t>(g.n) * p * k2);
  DS_PAR_FOR
  for (int n = 0; n < g.n; ++n) {
    im2col_cols(g.c_out, oh, ow, g.k, g.stride, g.pad, gout + n * out_stride,
                cols.data() + static_cast<size_t>(n) * p * k2);
  }
  DS_PAR_FOR
  for (int ic = 0; ic < g.c_in; ++ic) {
    float* gwrow = gw + static_cast<size_t>(ic) * k2;
    for (int r = 0; r < k2; ++r) gwrow[r] = 0.0f;
    for (int n = 0; n < g.n; ++n) {
      const float* src = in + (static_cast<size_t>(n) * g.c_in + ic) * p;
      const float* colb = cols.data() + static_cast<size_t>(n) * p * k2;
      for (int x = 0; x < p; ++x) {
        const float v = src[x];
        const float* c = colb + static_cast<size_t>(x) * k2;
        for (int r = 0; r < k2; ++r) gwrow[r] += v * c[r];
      }
    }
  }
  if (gb) {
    DS_PAR_FOR
    for (int oc = 0; oc < g.c_out; ++oc) {
      double acc = 0.0;
      for (int n = 0; n < g.n; ++n) {
        const float* go = gout + (n * out_stride) + static_cast<size_t>(oc) * oh * ow;
        for (int i = 0; i < oh * ow; ++i) acc += go[i];
      }
      gb[oc] = static_cast<float>(acc);
    }
  }
}

void linear_forward(int n, int f_in, int f_out, const float* in, const float* w,
                    const float* b, float* out) {
  // w is [f_out][f_in]; transpose once so the inner axpy runs contiguous.
  std::vector<float> wt(static_cast<size_t>(f_in) * f_out);
  DS_PAR_FOR
  for (int i = 0; i < f_in; ++i)
    for (int o = 0; o < f_out; ++o)
      wt[static_cast<size_t>(i) * f_out + o] = w[static_cast<size_t>(o) * f_in + i];
  DS_PAR_FOR
  for (int s = 0; s < n; ++s) {
    const float* x = in + static_cast<size_t>(s) * f_in;
    float* o = out + static_cast<size_t>(s) * f_out;
    for (int j = 0; j < f_out; ++j) o[j] = b ? b[j] : 0.0f;
    for (int i = 0; i < f_in; ++i) {
      const float v = x[i];
      const float* wrow = wt.data() + static_cast<size_t>(i) * f_out;
      for (int j = 0; j < f_out; ++j) o[j] += v * wrow[j];
    }
  }
}

void linear_backward_input(int n, int f_in, int f_out, const float* gout, const float* w,
                           float* gin) {
  DS_PAR_FOR
  for (int s = 0; s < n; ++s) {
    const float* go = gout + static_cast<size_t>(s) * f_out;
    float* gi = gin + static_cast<size_t>(s) * f_in;
    for (int i = 0; i < f_in; ++i) gi[i] = 0.0f;
    for (int j = 0; j < f_out; ++j) {
      const float gv = go[j];
      const float* wrow = w + static_cast<size_t>(j) * f_in;
      for (int i = 0; i < f_in; ++i) gi[i] += gv * wrow[i];
    }
  }
}

void linear_backward_params(int n, int f_in, int f_out, const float* gout,
                            const float* in, float* gw, float* gb) {
  DS_PAR_FOR
  for (int j = 0; j < f_out; ++j) {
    float* gwrow = gw + static_cast<size_t>(j) * f_in;
    for (int i = 0; i < f_in; ++i) gwrow[i] = 0.0f;
    double bias_acc = 0.0;
    for (int s = 0; s < n; ++s) {
      const float gv = gout[static_cast<size_t>(s) * f_out + j];
      bias_acc += gv;
      const float* x = in + static_cast<size_t>(s) * f_in;
      for (int i = 0; i < f_in; ++i) gwrow[i] += gv * x[i];
    }
    if (gb) gb[j] = static_cast<float>(bias_acc);
  }
}

void batchnorm_forward_train(int n, int c, int spatial, float eps, const float* in,
                             const float* gamma, const float* beta, float* out,
                             float* xhat, float* mean, float* var, float* rstd) {
  const size_t plane = static_cast<size_t>(spatial);
  const size_t sample = static_cast<size_t>(c) * plane;
  const double m = static_cast<double>(n) * spatial;
  DS_PAR_FOR
  for (int ch = 0; ch < c; ++ch) {
    double sum = 0.0;
    for (int s = 0; s < n; ++s) {
      const float* p = in + s * sample + ch * plane;
      for (int i = 0; i < spatial; ++i) sum += p[i];
    }
    const double mu = sum / m;
    double sq = 0.0;
    for (int s = 0; s < n; ++s) {
      const float* p = in + s * sample + ch * plane;
      for (int i = 0; i < spatial; ++i) {
        const double d = p[i] - mu;
        sq += d * d;
      }
    }
    const double v = sq / m;
    const float rs = static_cast<float>(1.0 / std::sqrt(v + eps));
    mean[ch] = static_cast<float>(mu);
    var[ch] = static_cast<float>(v);
    rstd[ch] = rs;
    const float mu_f = static_cast<float>(mu);
    const float gm = gamma[ch], bt = beta[ch];
    for (int s = 0; s < n; ++s) {
      const float* p = in + s * sample + ch * plane;
      float* xh = xhat + s * sample + ch * plane;
      float* o = out + s * sample + ch * plane;
      for (int i = 0; i < spatial; ++i) {
        const float h = (p[i] - mu_f) * rs;
        xh[i] = h;
        o[i] = h * gm + bt;
      }
    }
  }
}

void batchnorm_forward_eval(int n, int c, int spatial, float eps, const float* in,
                            const float* gamma, const float* beta, const float* rmean,
                            const float* rvar, float* out) {
  const size_t plane = static_cast<size_t>(spatial);
  const size_t sample = static_cast<size_t>(c) * plane;
  DS_PAR_FOR
  for (int ch = 0; ch < c; ++ch) {
    const float rs = static_cast<float>(1.0 / std::sqrt(static_cast<double>(rvar[ch]) + eps));
    const float mu = rmean[ch];
    const float gm = gamma[ch], bt = beta[ch];
    for (int s = 0; s < n; ++s) {
      const float* p = in + s * sample + ch * plane;
      float* o = out + s * sample + ch * plane;
      for (int i = 0; i < spatial; ++i) o[i] = (p[i] - mu) * rs * gm + bt;
    }
  }
}

void batchnorm_backward(int n, int c, int spatial, const float* gout, const float* gamma,
                        const float* xhat, const float* rstd, float* gin, float* ggamma,
                        float* gbeta) {
  const size_t plane = static_cast<size_t>(spatial);
  const size_t sample = static_cast<size_t>(c) * plane;
  const double m = static_cast<double>(n) * spatial;
  DS_PAR_FOR
  for (int ch = 0; ch < c; ++ch) {
    double sum_g = 0.0, sum_gx = 0.0;
    for (int s = 0; s < n; ++s) {
      const float* go = gout + s * sample + ch * plane;
      const float* xh = xhat + s * sample + ch * plane;
      for (int i = 0; i < spatial; ++i) {
        sum_g += go[i];
        sum_gx += static_cast<double>(go[i]) * xh[i];
      }
    }
    ggamma[ch] = static_cast<float>(sum_gx);
    gbeta[ch] = static_cast<float>(sum_g);
    const float mean_g = static_cast<float>(sum_g / m);
    const float mean_gx = static_cast<float>(sum_gx / m);
    const float scale = gamma[ch] * rstd[ch];
    for (int s = 0; s < n; ++s) {
      const float* go = gout + s * sample + ch * plane;
      const float* xh = xhat + s * sample + ch * plane;
      float* gi = gin + s * sample + ch * plane;
      for (int i = 0; i < spatial; ++i)
        gi[i] = scale * (go[i] - mean_g - xh[i] * mean_gx);
    }
  }
}

void leaky_relu_forward(size_t n, float slope, const float* in, float* out) {
  const int64_t nn = static_cast<int64_t>(n);
  DS_PAR_FOR
  for (int64_t i = 0; i < nn; ++i) out[i] = in[i] > 0.0f ? in[i] : slope * in[i];
}

void leaky_relu_backward(size_t n, float slope, const float* in, const float* gout,
                         float* gin) {
  const int64_t nn = static_cast<int64_t>(n);
  DS_PAR_FOR
  for (int64_t i = 0; i < nn; ++i) gin[i] = in[i] > 0.0f ? gout[i] : slope * gout[i];
}

void tanh_forward(size_t n, const float* in, float* out) {
  const int64_t nn = static_cast<int64_t>(n);
  DS_PAR_FOR
  for (int64_t i = 0; i < nn; ++i) out[i] = std::tanh(in[i]);
}

void tanh_backward(size_t n, const float* out, const float* gout, float* gin) {
  const int64_t nn = static_cast<int64_t>(n);
  DS_PAR_FOR
  for (int64_t i = 0; i < nn; ++i) gin[i] = gout[i] * (1.0f - out[i] * out[i]);
}

void maxpool2_forward(int n, int c, int h, int w, const float* in, float* out,
                      int32_t* argmax) {
  const int oh = h / 2, ow = w / 2;
  DS_PAR_FOR2
  for (int s = 0; s < n; ++s) {
    for (int ch = 0; ch < c; ++ch) {
      const float* plane = in + (static_cast<size_t>(s) * c + ch) * h * w;
      float* o = out + (static_cast<size_t>(s) * c + ch) * oh * ow;
      int32_t* am = argmax + (static_cast<size_t>(s) * c + ch) * oh * ow;
      for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
          int best = (2 * y) * w + 2 * x;
          float bv = plane[best];
          const int cand[3] = {(2 * y) * w + 2 * x + 1, (2 * y + 1) * w + 2 * x,
                               (2 * y + 1) * w + 2 * x + 1};
          for (int idx : cand) {
            if (plane[idx] > bv) {
              bv = plane[idx];
              best = idx;
            }
          }
          o[y * ow + x] = bv;
          am[y * ow + x] = best;
        }
      }
    }
  }
}

void maxpool2_backward(int n, int c, int h, int w, const int32_t* argmax,
                       const float* gout, float* gin) {
  const int oh = h / 2, ow = w / 2;
  DS_PAR_FOR2
  for (int s = 0; s < n; ++s) {
    for (int ch = 0; ch < c; ++ch) {
      float* gplane = gin + (static_cast<size_t>(s) * c + ch) * h * w;
      for (int i = 0; i < h * w; ++i) gplane[i] = 0.0f;
      const float* go = gout + (static_cast<size_t>(s) * c + ch) * oh * ow;
      const int32_t* am = argmax + (static_cast<size_t>(s) * c + ch) * oh * ow;
      for (int i = 0; i < oh * ow; ++i) gplane[am[i]] += go[i];
    }
  }
}

// Loss reduction stays serial in both variants: the sum must have one
// fixed order, and the pass is memory-bound anyway.
double mse_value(size_t n, const float* pred, const float* tgt) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(pred[i]) - tgt[i];
    acc += d * d;
  }
  return acc / static_cast<double>(n);
}

void mse_grad(size_t n, const float* pred, const float* tgt, float* grad) {
  const float scale = static_cast<float>(2.0 / static_cast<double>(n));
  const int64_t nn = static_cast<int64_t>(n);
  DS_PAR_FOR
  for (int64_t i = 0; i < nn; ++i) grad[i] = scale * (pred[i] - tgt[i]);
}

void adam_update(size_t n, float lr, float b1, float b2, float eps, double bc1,
                 double bc2, const float* g, float* m, float* v, float* p) {
  const float inv_bc1 = static_cast<float>(1.0 / bc1);
  const float inv_bc2 = static_cast<float>(1.0 / bc2);
  const int64_t nn = static_cast<int64_t>(n);
  DS_PAR_FOR
  for (int64_t i = 0; i < nn; ++i) {
    m[i] = b1 * m[i] + (1.0f - b1) * g[i];
    v[i] = b2 * v[i] + (1.0f - b2) * g[i] * g[i];
    const float mhat = m[i] * inv_bc1;
    const float vhat = v[i] * inv_bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

void sqdist_matrix(int rows, int dim, const float* pts, double* dist) {
  DS_PAR_FOR
  for (int i = 0; i < rows; ++i) {
    const float* a = pts + static_cast<size_t>(i) * dim;
    for (int j = 0; j < rows; ++j) {
      if (j == i) {
        dist[static_cast<size_t>(i) * rows + j] = 0.0;
        continue;
      }
      const float* b = pts + static_cast<size_t>(j) * dim;
      double acc = 0.0;
      for (int d = 0; d < dim; ++d) {
        const double diff = static_cast<double>(a[d]) - b[d];
        acc += diff * diff;
      }
      dist[static_cast<size_t>(i) * rows + j] = acc;
    }
  }
}
