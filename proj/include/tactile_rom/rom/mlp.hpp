#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "tactile_rom/core/error.hpp"
#include "tactile_rom/core/rng.hpp"

namespace trom::rom {

// Dense MLP with optional ReLU + LayerNorm after each hidden layer and plain
// affine input/output layers. Parameters live in one flat store per network;
// gradients use the identical layout. Forward/backward are hand-written and
// batched (samples are columns), with Eigen doing the matrix products.
//
// Flat layout per layer: W (out x in, row-major), b (out), then for
// normalized layers gain (out) and offset (out). Layers in order.
template <typename T>
struct Mlp {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;
  using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  static constexpr T kLnEps = static_cast<T>(1e-12);

  struct Layer {
    int in = 0;
    int out = 0;
    bool normalized = false;  // ReLU + LayerNorm when set
    std::size_t w_off = 0, b_off = 0, gain_off = 0, offset_off = 0;
  };

  std::vector<Layer> layers;
  std::vector<T> params;

  // dims = {in, h0, ..., out}; the last layer is affine, the rest normalized.
  void build(const std::vector<int>& dims) {
    if (dims.size() < 2) throw ShapeError("mlp needs at least one layer");
    layers.clear();
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
      Layer lay;
      lay.in = dims[l];
      lay.out = dims[l + 1];
      lay.normalized = (l + 2 < dims.size());
      if (lay.in <= 0 || lay.out <= 0) throw ShapeError("mlp layer dims must be positive");
      lay.w_off = off;
      off += static_cast<std::size_t>(lay.out) * lay.in;
      lay.b_off = off;
      off += lay.out;
      if (lay.normalized) {
        lay.gain_off = off;
        off += lay.out;
        lay.offset_off = off;
        off += lay.out;
      }
      layers.push_back(lay);
    }
    params.assign(off, T(0));
  }

  int input_dim() const { return layers.front().in; }
  int output_dim() const { return layers.back().out; }
  std::size_t param_count() const { return params.size(); }

  // He-uniform weights, zero biases/offsets, unit gains.
  void init(Rng& rng) {
    for (const Layer& l : layers) {
      double limit = std::sqrt(6.0 / static_cast<double>(l.in));
      std::size_t nw = static_cast<std::size_t>(l.out) * l.in;
      for (std::size_t i = 0; i < nw; ++i)
        params[l.w_off + i] = static_cast<T>(rng.uniform(-limit, limit));
      for (int i = 0; i < l.out; ++i) params[l.b_off + i] = T(0);
      if (l.normalized) {
        for (int i = 0; i < l.out; ++i) params[l.gain_off + i] = T(1);
        for (int i = 0; i < l.out; ++i) params[l.offset_off + i] = T(0);
      }
    }
  }

  struct Cache {
    std::vector<Mat> x;     // layer inputs
    std::vector<Mat> z;     // pre-activations
    std::vector<Mat> xhat;  // normalized activations (normalized layers)
    std::vector<RowVec> inv_std;
  };

  Eigen::Map<const RowMat> W(const Layer& l) const {
    return Eigen::Map<const RowMat>(params.data() + l.w_off, l.out, l.in);
  }
  Eigen::Map<const Vec> bias(const Layer& l) const {
    return Eigen::Map<const Vec>(params.data() + l.b_off, l.out);
  }
  Eigen::Map<const Vec> gain(const Layer& l) const {
    return Eigen::Map<const Vec>(params.data() + l.gain_off, l.out);
  }
  Eigen::Map<const Vec> offset(const Layer& l) const {
    return Eigen::Map<const Vec>(params.data() + l.offset_off, l.out);
  }

  Mat forward(const Mat& input, Cache* cache = nullptr) const {
    if (input.rows() != input_dim())
      throw ShapeError("mlp forward: input has " + std::to_string(input.rows()) +
                       " rows, expected " + std::to_string(input_dim()));
    if (cache) {
      cache->x.assign(layers.size(), Mat());
      cache->z.assign(layers.size(), Mat());
      cache->xhat.assign(layers.size(), Mat());
      cache->inv_std.assign(layers.size(), RowVec());
    }
    Mat a = input;
    for (std::size_t li = 0; li < layers.size(); ++li) {
      const Layer& l = layers[li];
      if (cache) cache->x[li] = a;
      Mat z = (W(l) * a).colwise() + bias(l);
      if (!l.normalized) {
        a = std::move(z);  // backward only needs z for the ReLU mask
        continue;
      }
      Mat act = z.cwiseMax(T(0));
      RowVec mu = act.colwise().mean();
      Mat centered = act.rowwise() - mu;
      RowVec var = centered.array().square().colwise().mean();
      RowVec inv_std = (var.array() + kLnEps).rsqrt();
      Mat xhat = centered.array().rowwise() * inv_std.array();
      a = (xhat.array().colwise() * gain(l).array()).colwise() + offset(l).array();
      if (cache) {
        cache->z[li] = std::move(z);
        cache->xhat[li] = std::move(xhat);
        cache->inv_std[li] = std::move(inv_std);
      }
    }
    return a;
  }

  // Returns the gradient w.r.t. the network input. When `grads` is given,
  // parameter gradients are accumulated into it (layout of `params`).
  Mat backward(const Mat& d_output, const Cache& cache, std::vector<T>* grads = nullptr) const {
    if (grads && grads->size() != params.size())
      throw ShapeError("mlp backward: gradient buffer size mismatch");
    if (d_output.rows() != output_dim())
      throw ShapeError("mlp backward: upstream gradient has wrong row count");
    Mat d = d_output;
    for (std::size_t li = layers.size(); li-- > 0;) {
      const Layer& l = layers[li];
      Mat dz;
      if (l.normalized) {
        const Mat& xhat = cache.xhat[li];
        const RowVec& inv_std = cache.inv_std[li];
        Mat dxhat = d.array().colwise() * gain(l).array();
        RowVec m1 = dxhat.colwise().mean();
        RowVec m2 = (dxhat.array() * xhat.array()).matrix().colwise().mean();
        Mat da = (((dxhat.array().rowwise() - m1.array()) -
                   xhat.array().rowwise() * m2.array())
                      .rowwise() *
                  inv_std.array())
                     .matrix();
        if (grads) {
          Eigen::Map<Vec>(grads->data() + l.gain_off, l.out) +=
              (d.array() * xhat.array()).matrix().rowwise().sum();
          Eigen::Map<Vec>(grads->data() + l.offset_off, l.out) += d.rowwise().sum();
        }
        dz = (da.array() * (cache.z[li].array() > T(0)).template cast<T>()).matrix();
      } else {
        dz = std::move(d);
      }
      if (grads) {
        Eigen::Map<RowMat>(grads->data() + l.w_off, l.out, l.in).noalias() +=
            dz * cache.x[li].transpose();
        Eigen::Map<Vec>(grads->data() + l.b_off, l.out) += dz.rowwise().sum();
      }
      d.noalias() = W(l).transpose() * dz;
    }
    return d;
  }
};

}  // namespace trom::rom
