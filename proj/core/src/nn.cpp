#include "fedq/nn.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fedq/rng.hpp"

namespace fedq {

namespace {

void check_batch_shape(const ModelSpec& spec, const Batch& batch) {
  Shape expected = spec.input_shape;
  expected.insert(expected.begin(), batch.size());
  if (batch.inputs.shape != expected) {
    throw std::invalid_argument("batch input shape mismatch: expected " +
                                shape_to_string(expected) + ", got " +
                                shape_to_string(batch.inputs.shape));
  }
  batch.inputs.check("forward inputs");
  batch.validate(spec.class_count);
}

void check_params_layout(const ModelSpec& spec, const ParamSet& params) {
  size_t want = 2 * spec.parameterized_layers().size();
  if (params.entries.size() != want) {
    throw std::invalid_argument("param set has " + std::to_string(params.entries.size()) +
                                " entries, model wants " + std::to_string(want));
  }
}

Shape batched(Shape sample, int64_t b) {
  sample.insert(sample.begin(), b);
  return sample;
}

struct ForwardCache {
  // acts[i] = input of layer i; acts[layers.size()] = logits.
  std::vector<Tensor> acts;
  // per layer: argmax flat offsets for maxpool layers (empty otherwise)
  std::vector<std::vector<int64_t>> pool_argmax;
};

// Runs the batch through every layer, filling the cache.
void forward_pass(const ModelSpec& spec, const ParamSet& params, const Batch& batch,
                  ForwardCache& cache) {
  const int64_t B = batch.size();
  cache.acts.clear();
  cache.pool_argmax.assign(spec.layers.size(), {});
  cache.acts.reserve(spec.layers.size() + 1);
  cache.acts.push_back(batch.inputs);

  size_t param_cursor = 0;
  for (size_t li = 0; li < spec.layers.size(); ++li) {
    const Layer& layer = spec.layers[li];
    const Tensor& in = cache.acts.back();
    Shape in_sample = spec.shape_after(li);
    Shape out_sample = spec.shape_after(li + 1);
    Tensor out = Tensor::zeros(batched(out_sample, B));

    switch (layer.kind) {
      case LayerKind::Dense: {
        const Tensor& w = params.entries[param_cursor].tensor;
        const Tensor& bias = params.entries[param_cursor + 1].tensor;
        param_cursor += 2;
        const int64_t ni = layer.in, no = layer.out;
        for (int64_t b = 0; b < B; ++b) {
          const float* x = in.data.data() + b * ni;
          float* y = out.data.data() + b * no;
          for (int64_t o = 0; o < no; ++o) {
            const float* wrow = w.data.data() + o * ni;
            float acc = bias.data[o];
            for (int64_t i = 0; i < ni; ++i) acc += wrow[i] * x[i];
            y[o] = acc;
          }
        }
        break;
      }
      case LayerKind::Conv2d: {
        const Tensor& w = params.entries[param_cursor].tensor;
        const Tensor& bias = params.entries[param_cursor + 1].tensor;
        param_cursor += 2;
        const int64_t C = in_sample[0], H = in_sample[1], W = in_sample[2];
        const int64_t O = out_sample[0], OH = out_sample[1], OW = out_sample[2];
        const int64_t k = layer.k;
        for (int64_t b = 0; b < B; ++b) {
          const float* xb = in.data.data() + b * C * H * W;
          float* yb = out.data.data() + b * O * OH * OW;
          for (int64_t o = 0; o < O; ++o) {
            const float* wo = w.data.data() + o * C * k * k;
            for (int64_t oh = 0; oh < OH; ++oh) {
              for (int64_t ow = 0; ow < OW; ++ow) {
                float acc = bias.data[o];
                for (int64_t c = 0; c < C; ++c) {
                  const float* xc = xb + c * H * W;
                  const float* wc = wo + c * k * k;
                  for (int64_t kh = 0; kh < k; ++kh) {
                    const float* xrow = xc + (oh + kh) * W + ow;
                    const float* wrow = wc + kh * k;
                    for (int64_t kw = 0; kw < k; ++kw) acc += wrow[kw] * xrow[kw];
                  }
                }
                yb[o * OH * OW + oh * OW + ow] = acc;
              }
            }
          }
        }
        break;
      }
      case LayerKind::MaxPool2: {
        const int64_t C = in_sample[0], H = in_sample[1], W = in_sample[2];
        const int64_t OH = out_sample[1], OW = out_sample[2];
        auto& argmax = cache.pool_argmax[li];
        argmax.assign(static_cast<size_t>(out.size()), 0);
        for (int64_t b = 0; b < B; ++b) {
          for (int64_t c = 0; c < C; ++c) {
            const float* xc = in.data.data() + (b * C + c) * H * W;
            for (int64_t oh = 0; oh < OH; ++oh) {
              for (int64_t ow = 0; ow < OW; ++ow) {
                int64_t best = (2 * oh) * W + 2 * ow;
                float bv = xc[best];
                for (int64_t dh = 0; dh < 2; ++dh) {
                  for (int64_t dw = 0; dw < 2; ++dw) {
                    int64_t idx = (2 * oh + dh) * W + 2 * ow + dw;
                    if (xc[idx] > bv) {
                      bv = xc[idx];
                      best = idx;
                    }
                  }
                }
                int64_t oidx = ((b * C + c) * OH + oh) * OW + ow;
                out.data[oidx] = bv;
                argmax[oidx] = (b * C + c) * H * W + best;
              }
            }
          }
        }
        break;
      }
      case LayerKind::Relu:
        for (int64_t i = 0; i < in.size(); ++i) out.data[i] = in.data[i] > 0 ? in.data[i] : 0.0f;
        break;
      case LayerKind::Tanh:
        for (int64_t i = 0; i < in.size(); ++i) out.data[i] = std::tanh(in.data[i]);
        break;
      case LayerKind::Flatten:
        out.data = in.data;
        break;
    }
    cache.acts.push_back(std::move(out));
  }
}

// Mean cross-entropy over the batch plus d loss / d logits, both from the
// stable log-sum-exp form.
double softmax_ce(const Tensor& logits, const std::vector<int64_t>& labels, Tensor* dlogits) {
  const int64_t B = static_cast<int64_t>(labels.size());
  const int64_t K = logits.shape[1];
  double total = 0.0;
  if (dlogits) *dlogits = Tensor::zeros(logits.shape);
  for (int64_t b = 0; b < B; ++b) {
    const float* z = logits.data.data() + b * K;
    float m = z[0];
    for (int64_t k = 1; k < K; ++k) m = std::max(m, z[k]);
    double sum = 0.0;
    for (int64_t k = 0; k < K; ++k) sum += std::exp(static_cast<double>(z[k]) - m);
    double lse = m + std::log(sum);
    total += lse - z[labels[static_cast<size_t>(b)]];
    if (dlogits) {
      float* d = dlogits->data.data() + b * K;
      for (int64_t k = 0; k < K; ++k) {
        double p = std::exp(static_cast<double>(z[k]) - lse);
        d[k] = static_cast<float>(p / B);
      }
      d[labels[static_cast<size_t>(b)]] -= 1.0f / static_cast<float>(B);
    }
  }
  return total / static_cast<double>(B);
}

struct BackpropResult {
  GradSet grads;
  Tensor input_grad;
  double loss;
};

BackpropResult backprop(const ModelSpec& spec, const ParamSet& params, const Batch& batch) {
  ForwardCache cache;
  forward_pass(spec, params, batch, cache);
  const int64_t B = batch.size();

  Tensor delta;
  BackpropResult result;
  result.loss = softmax_ce(cache.acts.back(), batch.labels, &delta);
  result.grads = zeros_like(params);

  size_t param_cursor = params.entries.size();
  for (size_t lj = spec.layers.size(); lj-- > 0;) {
    const Layer& layer = spec.layers[lj];
    const Tensor& in = cache.acts[lj];
    Shape in_sample = spec.shape_after(lj);
    Shape out_sample = spec.shape_after(lj + 1);
    Tensor next_delta = Tensor::zeros(batched(in_sample, B));

    switch (layer.kind) {
      case LayerKind::Dense: {
        param_cursor -= 2;
        const Tensor& w = params.entries[param_cursor].tensor;
        Tensor& dw = result.grads.entries[param_cursor].tensor;
        Tensor& db = result.grads.entries[param_cursor + 1].tensor;
        const int64_t ni = layer.in, no = layer.out;
        for (int64_t b = 0; b < B; ++b) {
          const float* x = in.data.data() + b * ni;
          const float* d = delta.data.data() + b * no;
          float* nd = next_delta.data.data() + b * ni;
          for (int64_t o = 0; o < no; ++o) {
            const float dv = d[o];
            db.data[o] += dv;
            float* dwrow = dw.data.data() + o * ni;
            const float* wrow = w.data.data() + o * ni;
            for (int64_t i = 0; i < ni; ++i) {
              dwrow[i] += dv * x[i];
              nd[i] += dv * wrow[i];
            }
          }
        }
        break;
      }
      case LayerKind::Conv2d: {
        param_cursor -= 2;
        const Tensor& w = params.entries[param_cursor].tensor;
        Tensor& dw = result.grads.entries[param_cursor].tensor;
        Tensor& db = result.grads.entries[param_cursor + 1].tensor;
        const int64_t C = in_sample[0], H = in_sample[1], W = in_sample[2];
        const int64_t O = out_sample[0], OH = out_sample[1], OW = out_sample[2];
        const int64_t k = layer.k;
        for (int64_t b = 0; b < B; ++b) {
          const float* xb = in.data.data() + b * C * H * W;
          const float* db_delta = delta.data.data() + b * O * OH * OW;
          float* ndb = next_delta.data.data() + b * C * H * W;
          for (int64_t o = 0; o < O; ++o) {
            const float* wo = w.data.data() + o * C * k * k;
            float* dwo = dw.data.data() + o * C * k * k;
            for (int64_t oh = 0; oh < OH; ++oh) {
              for (int64_t ow = 0; ow < OW; ++ow) {
                const float dv = db_delta[o * OH * OW + oh * OW + ow];
                if (dv == 0.0f) continue;
                db.data[o] += dv;
                for (int64_t c = 0; c < C; ++c) {
                  const float* xc = xb + c * H * W;
                  float* ndc = ndb + c * H * W;
                  float* dwc = dwo + c * k * k;
                  const float* wc = wo + c * k * k;
                  for (int64_t kh = 0; kh < k; ++kh) {
                    for (int64_t kw = 0; kw < k; ++kw) {
                      int64_t idx = (oh + kh) * W + ow + kw;
                      dwc[kh * k + kw] += dv * xc[idx];
                      ndc[idx] += dv * wc[kh * k + kw];
                    }
                  }
                }
              }
            }
          }
        }
        break;
      }
      case LayerKind::MaxPool2: {
        const auto& argmax = cache.pool_argmax[lj];
        for (int64_t i = 0; i < delta.size(); ++i) next_delta.data[argmax[i]] += delta.data[i];
        break;
      }
      case LayerKind::Relu:
        for (int64_t i = 0; i < delta.size(); ++i)
          next_delta.data[i] = in.data[i] > 0 ? delta.data[i] : 0.0f;
        break;
      case LayerKind::Tanh: {
        const Tensor& outv = cache.acts[lj + 1];
        for (int64_t i = 0; i < delta.size(); ++i)
          next_delta.data[i] = delta.data[i] * (1.0f - outv.data[i] * outv.data[i]);
        break;
      }
      case LayerKind::Flatten:
        next_delta.data = delta.data;
        break;
    }
    delta = std::move(next_delta);
  }
  result.input_grad = std::move(delta);
  return result;
}

}  // namespace

ParamSet init_params(const ModelSpec& spec, uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  ParamSet params;
  for (int64_t li : spec.parameterized_layers()) {
    const Layer& layer = spec.layers[static_cast<size_t>(li)];
    Shape wshape;
    int64_t fan_in, fan_out;
    if (layer.kind == LayerKind::Dense) {
      wshape = {layer.out, layer.in};
      fan_in = layer.in;
      fan_out = layer.out;
    } else {
      wshape = {layer.out, layer.in, layer.k, layer.k};
      fan_in = layer.in * layer.k * layer.k;
      fan_out = layer.out * layer.k * layer.k;
    }
    float a = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
    Tensor w = Tensor::zeros(wshape);
    for (float& v : w.data) v = rng.uniform(-a, a);
    params.entries.push_back({li, ParamRole::Weight, std::move(w)});
    params.entries.push_back({li, ParamRole::Bias, Tensor::zeros({layer.out})});
  }
  return params;
}

ForwardResult forward_loss(const ModelSpec& spec, const ParamSet& params, const Batch& batch) {
  check_batch_shape(spec, batch);
  check_params_layout(spec, params);
  ForwardCache cache;
  forward_pass(spec, params, batch, cache);
  double loss = softmax_ce(cache.acts.back(), batch.labels, nullptr);
  ForwardResult r{std::move(cache.acts.back()), loss};
  r.logits.check("forward logits");
  return r;
}

GradSet backward(const ModelSpec& spec, const ParamSet& params, const Batch& batch) {
  check_batch_shape(spec, batch);
  check_params_layout(spec, params);
  BackpropResult r = backprop(spec, params, batch);
  for (const auto& e : r.grads.entries) e.tensor.check("backward gradient");
  return std::move(r.grads);
}

Tensor input_gradient(const ModelSpec& spec, const ParamSet& params, const Batch& batch) {
  check_batch_shape(spec, batch);
  check_params_layout(spec, params);
  BackpropResult r = backprop(spec, params, batch);
  r.input_grad.check("input gradient");
  return std::move(r.input_grad);
}

ParamSet sgd_step(const ParamSet& params, const GradSet& grads, float mu) {
  if (!(mu >= 0.0f) || !std::isfinite(mu)) {
    throw std::invalid_argument("sgd_step: learning rate must be finite and non-negative");
  }
  params.require_same_layout(grads, "sgd_step");
  ParamSet out = params;
  for (size_t e = 0; e < out.entries.size(); ++e) {
    float* w = out.entries[e].tensor.data.data();
    const float* g = grads.entries[e].tensor.data.data();
    for (int64_t i = 0; i < out.entries[e].tensor.size(); ++i) w[i] -= mu * g[i];
  }
  return out;
}

GradSet zeros_like(const ParamSet& params) {
  GradSet g;
  g.entries.reserve(params.entries.size());
  for (const auto& e : params.entries) {
    g.entries.push_back({e.layer_index, e.role, Tensor::zeros(e.tensor.shape)});
  }
  return g;
}

GradSet param_delta(const ParamSet& a, const ParamSet& b) {
  a.require_same_layout(b, "param_delta");
  GradSet d = a;
  for (size_t e = 0; e < d.entries.size(); ++e) {
    float* x = d.entries[e].tensor.data.data();
    const float* y = b.entries[e].tensor.data.data();
    for (int64_t i = 0; i < d.entries[e].tensor.size(); ++i) x[i] -= y[i];
  }
  return d;
}

ParamSet param_add(const ParamSet& a, const GradSet& delta) {
  a.require_same_layout(delta, "param_add");
  ParamSet s = a;
  for (size_t e = 0; e < s.entries.size(); ++e) {
    float* x = s.entries[e].tensor.data.data();
    const float* y = delta.entries[e].tensor.data.data();
    for (int64_t i = 0; i < s.entries[e].tensor.size(); ++i) x[i] += y[i];
  }
  return s;
}

}  // namespace fedq
