#include "dsmote/network.hpp"

#include <algorithm>
#include <cmath>

#include "dsmote/kernels.hpp"

namespace dsmote {

namespace {

std::string pname(size_t layer, const char* what) {
  return "layer" + std::to_string(layer) + "." + what;
}

std::vector<int> with_batch(int n, const std::vector<int>& s) {
  std::vector<int> out;
  out.reserve(s.size() + 1);
  out.push_back(n);
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

}  // namespace

ParamStore init_params(const NetworkSpec& spec, Rng& rng) {
  spec.type_check();
  ParamStore store;
  auto normal_tensor = [&](std::vector<int> shape, float std_dev) {
    Tensor t(std::move(shape));
    for (auto& v : t.data) v = static_cast<float>(rng.normal() * std_dev);
    return t;
  };
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    switch (l.kind) {
      case LayerKind::conv2d:
        store.add(pname(i, "weight"),
                  normal_tensor({l.out_ch, l.in_ch, l.kernel, l.kernel}, 0.02f), true);
        if (l.bias) store.add(pname(i, "bias"), Tensor::zeros({l.out_ch}), true);
        break;
      case LayerKind::conv2d_transpose:
        store.add(pname(i, "weight"),
                  normal_tensor({l.in_ch, l.out_ch, l.kernel, l.kernel}, 0.02f), true);
        if (l.bias) store.add(pname(i, "bias"), Tensor::zeros({l.out_ch}), true);
        break;
      case LayerKind::batchnorm2d:
        store.add(pname(i, "gamma"), Tensor::full({l.features}, 1.0f), true);
        store.add(pname(i, "beta"), Tensor::zeros({l.features}), true);
        store.add(pname(i, "running_mean"), Tensor::zeros({l.features}), false);
        store.add(pname(i, "running_var"), Tensor::full({l.features}, 1.0f), false);
        break;
      case LayerKind::linear:
        store.add(pname(i, "weight"),
                  normal_tensor({l.out_features, l.in_features}, 0.02f), true);
        store.add(pname(i, "bias"), Tensor::zeros({l.out_features}), true);
        break;
      default:
        break;
    }
  }
  return store;
}

Tensor forward(const NetworkSpec& spec, ParamStore& params, const Tensor& input,
               Mode mode, ForwardCache* cache) {
  const auto shapes = spec.type_check();
  if (input.shape.size() != spec.input_shape.size() + 1)
    throw ShapeError("forward: input must be batched " +
                     Tensor::shape_str(spec.input_shape) + ", got " +
                     Tensor::shape_str(input.shape));
  for (size_t i = 0; i < spec.input_shape.size(); ++i)
    if (input.shape[i + 1] != spec.input_shape[i])
      throw ShapeError("forward: input shape " + Tensor::shape_str(input.shape) +
                       " does not match spec input " +
                       Tensor::shape_str(spec.input_shape));
  const int n = input.shape[0];

  if (cache) {
    cache->layers.assign(spec.layers.size(), LayerCache{});
    cache->batch = n;
    cache->spec = &spec;
  }

  Tensor cur = input;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& l = spec.layers[i];
    Tensor next(with_batch(n, shapes[i]));
    switch (l.kind) {
      case LayerKind::conv2d: {
        kernels::ConvGeom g{n, cur.shape[1], cur.shape[2], cur.shape[3],
                            l.out_ch,        l.kernel,     l.stride,     l.pad};
        kernels::conv2d_forward(g, cur.ptr(), params.at(pname(i, "weight")).ptr(),
                                l.bias ? params.at(pname(i, "bias")).ptr() : nullptr,
                                next.ptr());
        if (cache) cache->layers[i].input = cur;
        break;
      }
      case LayerKind::conv2d_transpose: {
        kernels::ConvTGeom g{n, cur.shape[1], cur.shape[2], cur.shape[3],
                             l.out_ch,        l.kernel,     l.stride,     l.pad};
        kernels::convt2d_forward(g, cur.ptr(), params.at(pname(i, "weight")).ptr(),
                                 l.bias ? params.at(pname(i, "bias")).ptr() : nullptr,
                                 next.ptr());
        if (cache) cache->layers[i].input = cur;
        break;
      }
      case LayerKind::batchnorm2d: {
        const int c = cur.shape[1];
        const int spatial = cur.shape[2] * cur.shape[3];
        if (mode == Mode::train) {
          Tensor xhat(cur.shape);
          std::vector<float> mean(c), var(c), rstd(c);
          kernels::batchnorm_forward_train(
              n, c, spatial, kBnEps, cur.ptr(), params.at(pname(i, "gamma")).ptr(),
              params.at(pname(i, "beta")).ptr(), next.ptr(), xhat.ptr(), mean.data(),
              var.data(), rstd.data());
          // Exponential moving average; running variance is unbiased.
          const double m = static_cast<double>(n) * spatial;
          const double unbias = m > 1.0 ? m / (m - 1.0) : 1.0;
          float* rmean = params.at(pname(i, "running_mean")).ptr();
          float* rvar = params.at(pname(i, "running_var")).ptr();
          for (int ch = 0; ch < c; ++ch) {
            rmean[ch] = (1.0f - kBnMomentum) * rmean[ch] + kBnMomentum * mean[ch];
            rvar[ch] = (1.0f - kBnMomentum) * rvar[ch] +
                       kBnMomentum * static_cast<float>(var[ch] * unbias);
          }
          if (cache) {
            cache->layers[i].bn_xhat = std::move(xhat);
            cache->layers[i].bn_rstd = std::move(rstd);
          }
        } else {
          kernels::batchnorm_forward_eval(
              n, c, spatial, kBnEps, cur.ptr(), params.at(pname(i, "gamma")).ptr(),
              params.at(pname(i, "beta")).ptr(),
              params.at(pname(i, "running_mean")).ptr(),
              params.at(pname(i, "running_var")).ptr(), next.ptr());
        }
        break;
      }
      case LayerKind::leaky_relu:
        kernels::leaky_relu_forward(cur.numel(), l.slope, cur.ptr(), next.ptr());
        if (cache) cache->layers[i].input = cur;
        break;
      case LayerKind::relu:
        kernels::leaky_relu_forward(cur.numel(), 0.0f, cur.ptr(), next.ptr());
        if (cache) cache->layers[i].input = cur;
        break;
      case LayerKind::tanh:
        kernels::tanh_forward(cur.numel(), cur.ptr(), next.ptr());
        if (cache) cache->layers[i].output = next;
        break;
      case LayerKind::flatten:
      case LayerKind::unflatten:
        next.data = cur.data;
        break;
      case LayerKind::linear: {
        kernels::linear_forward(n, l.in_features, l.out_features, cur.ptr(),
                                params.at(pname(i, "weight")).ptr(),
                                params.at(pname(i, "bias")).ptr(), next.ptr());
        if (cache) cache->layers[i].input = cur;
        break;
      }
      case LayerKind::maxpool2d: {
        const int c = cur.shape[1], h = cur.shape[2], w = cur.shape[3];
        std::vector<int32_t> argmax(static_cast<size_t>(n) * c * (h / 2) * (w / 2));
        kernels::maxpool2_forward(n, c, h, w, cur.ptr(), next.ptr(), argmax.data());
        if (cache) cache->layers[i].pool_argmax = std::move(argmax);
        break;
      }
    }
    cur = std::move(next);
  }
  return cur;
}

Tensor backward(const NetworkSpec& spec, const ParamStore& params,
                const ForwardCache& cache, const Tensor& grad_output,
                GradStore& grads) {
  if (cache.spec != &spec || cache.layers.size() != spec.layers.size())
    throw ShapeError("backward: cache does not belong to this network spec");
  if (grads.grads.size() != params.entries.size())
    throw ShapeError("backward: gradient store does not match parameter store");
  const int n = cache.batch;
  const auto shapes = spec.type_check();
  if (grad_output.shape != with_batch(n, shapes.back()))
    throw ShapeError("backward: grad_output shape " +
                     Tensor::shape_str(grad_output.shape) + " does not match output " +
                     Tensor::shape_str(with_batch(n, shapes.back())));

  auto gindex = [&](size_t layer, const char* what) {
    const std::string name = pname(layer, what);
    for (size_t i = 0; i < params.entries.size(); ++i)
      if (params.entries[i].name == name) return i;
    throw ShapeError("backward: missing parameter '" + name + "'");
  };

  Tensor g = grad_output;
  for (size_t ri = spec.layers.size(); ri-- > 0;) {
    const LayerSpec& l = spec.layers[ri];
    const std::vector<int> in_shape =
        ri == 0 ? with_batch(n, spec.input_shape) : with_batch(n, shapes[ri - 1]);
    Tensor gin(in_shape);
    const LayerCache& lc = cache.layers[ri];
    switch (l.kind) {
      case LayerKind::conv2d: {
        kernels::ConvGeom geom{n,        lc.input.shape[1], lc.input.shape[2],
                               lc.input.shape[3], l.out_ch, l.kernel,
                               l.stride, l.pad};
        const size_t wi = gindex(ri, "weight");
        Tensor gw(params.entries[wi].value.shape);
        Tensor gb;
        if (l.bias) gb = Tensor::zeros({l.out_ch});
        kernels::conv2d_backward_params(geom, g.ptr(), lc.input.ptr(), gw.ptr(),
                                        l.bias ? gb.ptr() : nullptr);
        kernels::conv2d_backward_input(geom, g.ptr(),
                                       params.entries[wi].value.ptr(), gin.ptr());
        grads.grads[wi].data.swap(gw.data);
        if (l.bias) grads.grads[gindex(ri, "bias")].data.swap(gb.data);
        break;
      }
      case LayerKind::conv2d_transpose: {
        kernels::ConvTGeom geom{n,        lc.input.shape[1], lc.input.shape[2],
                                lc.input.shape[3], l.out_ch, l.kernel,
                                l.stride, l.pad};
        const size_t wi = gindex(ri, "weight");
        Tensor gw(params.entries[wi].value.shape);
        Tensor gb;
        if (l.bias) gb = Tensor::zeros({l.out_ch});
        kernels::convt2d_backward_params(geom, g.ptr(), lc.input.ptr(), gw.ptr(),
                                         l.bias ? gb.ptr() : nullptr);
        kernels::convt2d_backward_input(geom, g.ptr(),
                                        params.entries[wi].value.ptr(), gin.ptr());
        grads.grads[wi].data.swap(gw.data);
        if (l.bias) grads.grads[gindex(ri, "bias")].data.swap(gb.data);
        break;
      }
      case LayerKind::batchnorm2d: {
        if (lc.bn_xhat.numel() == 0)
          throw ShapeError("backward: batchnorm cache missing (eval-mode forward?)");
        const int c = lc.bn_xhat.shape[1];
        const int spatial = lc.bn_xhat.shape[2] * lc.bn_xhat.shape[3];
        const size_t gi = gindex(ri, "gamma");
        const size_t bi = gindex(ri, "beta");
        Tensor ggamma(params.entries[gi].value.shape);
        Tensor gbeta(params.entries[bi].value.shape);
        kernels::batchnorm_backward(n, c, spatial, g.ptr(),
                                    params.entries[gi].value.ptr(), lc.bn_xhat.ptr(),
                                    lc.bn_rstd.data(), gin.ptr(), ggamma.ptr(),
                                    gbeta.ptr());
        grads.grads[gi].data.swap(ggamma.data);
        grads.grads[bi].data.swap(gbeta.data);
        break;
      }
      case LayerKind::leaky_relu:
        kernels::leaky_relu_backward(g.numel(), l.slope, lc.input.ptr(), g.ptr(),
                                     gin.ptr());
        break;
      case LayerKind::relu:
        kernels::leaky_relu_backward(g.numel(), 0.0f, lc.input.ptr(), g.ptr(),
                                     gin.ptr());
        break;
      case LayerKind::tanh:
        kernels::tanh_backward(g.numel(), lc.output.ptr(), g.ptr(), gin.ptr());
        break;
      case LayerKind::flatten:
      case LayerKind::unflatten:
        gin.data = g.data;
        break;
      case LayerKind::linear: {
        const size_t wi = gindex(ri, "weight");
        const size_t bi = gindex(ri, "bias");
        Tensor gw(params.entries[wi].value.shape);
        Tensor gb(params.entries[bi].value.shape);
        kernels::linear_backward_params(n, l.in_features, l.out_features, g.ptr(),
                                        lc.input.ptr(), gw.ptr(), gb.ptr());
        kernels::linear_backward_input(n, l.in_features, l.out_features, g.ptr(),
                                       params.entries[wi].value.ptr(), gin.ptr());
        grads.grads[wi].data.swap(gw.data);
        grads.grads[bi].data.swap(gb.data);
        break;
      }
      case LayerKind::maxpool2d: {
        const int c = gin.shape[1], h = gin.shape[2], w = gin.shape[3];
        kernels::maxpool2_backward(n, c, h, w, lc.pool_argmax.data(), g.ptr(),
                                   gin.ptr());
        break;
      }
    }
    g = std::move(gin);
  }
  return g;
}

std::pair<double, Tensor> mse_loss(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target))
    throw ShapeError("mse_loss: shape mismatch " + Tensor::shape_str(pred.shape) +
                     " vs " + Tensor::shape_str(target.shape));
  Tensor grad(pred.shape);
  const double loss = kernels::mse_value(pred.numel(), pred.ptr(), target.ptr());
  kernels::mse_grad(pred.numel(), pred.ptr(), target.ptr(), grad.ptr());
  return {loss, std::move(grad)};
}

std::pair<double, Tensor> softmax_xent_loss(const Tensor& logits,
                                            const std::vector<int32_t>& labels) {
  if (logits.shape.size() != 2)
    throw ShapeError("softmax_xent_loss: expected [N,K] logits");
  const int n = logits.shape[0], k = logits.shape[1];
  if (static_cast<size_t>(n) != labels.size())
    throw ShapeError("softmax_xent_loss: label count mismatch");
  Tensor grad(logits.shape);
  double loss = 0.0;
  for (int s = 0; s < n; ++s) {
    const float* row = logits.ptr() + static_cast<size_t>(s) * k;
    float* grow = grad.ptr() + static_cast<size_t>(s) * k;
    const int32_t y = labels[s];
    if (y < 0 || y >= k) throw ShapeError("softmax_xent_loss: label out of range");
    float mx = row[0];
    for (int j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (int j = 0; j < k; ++j) denom += std::exp(static_cast<double>(row[j]) - mx);
    const double logz = std::log(denom) + mx;
    loss += logz - row[y];
    for (int j = 0; j < k; ++j) {
      const double p = std::exp(static_cast<double>(row[j]) - logz);
      grow[j] = static_cast<float>((p - (j == y ? 1.0 : 0.0)) / n);
    }
  }
  return {loss / n, std::move(grad)};
}

double grad_check(const NetworkSpec& spec, const ParamStore& params, const Tensor& input,
                  const LossFn& loss_fn, double epsilon) {
  ParamStore work = params;  // leave the caller's store untouched
  ForwardCache cache;
  Tensor out = forward(spec, work, input, Mode::train, &cache);
  auto [loss, grad_out] = loss_fn(out);
  (void)loss;
  GradStore grads = GradStore::zeros_like(work);
  backward(spec, work, cache, grad_out, grads);

  auto eval_loss = [&](ParamStore& p) {
    Tensor o = forward(spec, p, input, Mode::train, nullptr);
    return loss_fn(o).first;
  };

  double worst = 0.0;
  for (size_t ei = 0; ei < work.entries.size(); ++ei) {
    if (!work.entries[ei].trainable) continue;
    Tensor& value = work.entries[ei].value;
    for (size_t j = 0; j < value.numel(); ++j) {
      const float saved = value.data[j];
      value.data[j] = saved + static_cast<float>(epsilon);
      const double lp = eval_loss(work);
      value.data[j] = saved - static_cast<float>(epsilon);
      const double lm = eval_loss(work);
      value.data[j] = saved;
      const double numeric = (lp - lm) / (2.0 * epsilon);
      const double analytic = grads.grads[ei].data[j];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace dsmote
