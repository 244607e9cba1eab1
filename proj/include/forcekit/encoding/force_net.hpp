#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "forcekit/dynamics/types.hpp"
#include "forcekit/random.hpp"

namespace forcekit::encoding {

// Three affine layers with fixed hidden widths, each followed by LayerNorm
// and exact (Gaussian-CDF) GELU, then an affine projection to the embedding
// space. Gradients are hand-derived reverse mode for this fixed topology.

inline constexpr std::array<int, 3> kHiddenWidths{128, 256, 256};
inline constexpr int kDefaultEmbedDim = 256;

struct ForceNetLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
  Eigen::VectorXd gain;    // LayerNorm gamma
  Eigen::VectorXd shift;   // LayerNorm beta
};

struct ForceNetParams {
  std::array<ForceNetLayer, 3> layers;
  Eigen::MatrixXd out_weight;  // d x 256
  Eigen::VectorXd out_bias;    // d
  double epsilon = 1e-5;

  int input_width() const { return static_cast<int>(layers[0].weight.cols()); }
  int embed_dim() const { return static_cast<int>(out_weight.rows()); }

  void validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    int expect_in = input_width();
    if (expect_in < 1) throw std::invalid_argument("input width must be >= 1");
    for (int i = 0; i < 3; ++i) {
      const auto& l = layers[i];
      if (l.weight.rows() != kHiddenWidths[i] || l.weight.cols() != expect_in ||
          l.bias.size() != kHiddenWidths[i] ||
          l.gain.size() != kHiddenWidths[i] ||
          l.shift.size() != kHiddenWidths[i])
        throw std::invalid_argument("layer " + std::to_string(i) +
                                    " shapes do not chain");
      expect_in = kHiddenWidths[i];
    }
    if (out_weight.cols() != expect_in || out_bias.size() != out_weight.rows())
      throw std::invalid_argument("output projection shapes do not chain");
  }
};

namespace detail {

inline void init_affine(Eigen::MatrixXd& weight, Eigen::VectorXd& bias, int rows,
                        int cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  weight.resize(rows, cols);
  bias.resize(rows);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) weight(r, c) = rng.uniform(-bound, bound);
  for (int r = 0; r < rows; ++r) bias[r] = rng.uniform(-bound, bound);
}

}  // namespace detail

/// Seeded parameters: affine maps uniform in +-1/sqrt(fan_in), unit gains,
/// zero shifts.
inline ForceNetParams make_force_net(int input_width, int embed_dim, Rng& rng) {
  if (input_width < 1 || embed_dim < 1)
    throw std::invalid_argument("force net widths must be >= 1");
  ForceNetParams p;
  int in = input_width;
  for (int i = 0; i < 3; ++i) {
    detail::init_affine(p.layers[i].weight, p.layers[i].bias, kHiddenWidths[i],
                        in, rng);
    p.layers[i].gain = Eigen::VectorXd::Ones(kHiddenWidths[i]);
    p.layers[i].shift = Eigen::VectorXd::Zero(kHiddenWidths[i]);
    in = kHiddenWidths[i];
  }
  detail::init_affine(p.out_weight, p.out_bias, embed_dim, in, rng);
  return p;
}

inline ForceNetParams zero_force_net(int input_width, int embed_dim) {
  ForceNetParams p;
  int in = input_width;
  for (int i = 0; i < 3; ++i) {
    p.layers[i].weight = Eigen::MatrixXd::Zero(kHiddenWidths[i], in);
    p.layers[i].bias = Eigen::VectorXd::Zero(kHiddenWidths[i]);
    p.layers[i].gain = Eigen::VectorXd::Zero(kHiddenWidths[i]);
    p.layers[i].shift = Eigen::VectorXd::Zero(kHiddenWidths[i]);
    in = kHiddenWidths[i];
  }
  p.out_weight = Eigen::MatrixXd::Zero(embed_dim, in);
  p.out_bias = Eigen::VectorXd::Zero(embed_dim);
  return p;
}

inline double gelu(double x) {
  return 0.5 * x * std::erfc(-x * M_SQRT1_2);
}

inline double gelu_derivative(double x) {
  const double cdf = 0.5 * std::erfc(-x * M_SQRT1_2);
  const double pdf = std::exp(-0.5 * x * x) * 0.3989422804014326779399461;
  return cdf + x * pdf;
}

struct ForceEmbedding {
  Eigen::VectorXd values;
  std::string provenance;
};

/// Intermediate activations kept for reverse mode.
struct ForwardCache {
  Eigen::MatrixXd input;                      // width x T
  std::array<Eigen::MatrixXd, 3> normalized;  // xhat per layer
  std::array<Eigen::VectorXd, 3> inv_std;     // per column
  std::array<Eigen::MatrixXd, 3> activated;   // GELU output per layer
};

/// Forward pass over a batch of frames (one frame per column).
inline Eigen::MatrixXd fn_forward_batch(const ForceNetParams& params,
                                        const Eigen::MatrixXd& frames,
                                        ForwardCache* cache = nullptr) {
  params.validate();
  if (frames.rows() != params.input_width())
    throw std::invalid_argument("width mismatch: force net input");
  if (cache != nullptr) cache->input = frames;

  Eigen::MatrixXd x = frames;
  for (int i = 0; i < 3; ++i) {
    const auto& layer = params.layers[i];
    Eigen::MatrixXd z = layer.weight * x;
    z.colwise() += layer.bias;

    const Eigen::RowVectorXd mu = z.colwise().mean();
    Eigen::MatrixXd centered = z.rowwise() - mu;
    const Eigen::RowVectorXd var = centered.array().square().colwise().mean();
    const Eigen::ArrayXd inv_std =
        (var.transpose().array() + params.epsilon).sqrt().inverse();
    Eigen::MatrixXd xhat =
        centered.array().rowwise() * inv_std.transpose().array();
    Eigen::MatrixXd y = (xhat.array().colwise() * layer.gain.array()).matrix();
    y.colwise() += layer.shift;

    Eigen::MatrixXd h = y.unaryExpr([](double v) { return gelu(v); });
    if (cache != nullptr) {
      cache->normalized[i] = xhat;
      cache->inv_std[i] = inv_std.matrix();
      cache->activated[i] = h;
    }
    x = std::move(h);
  }
  Eigen::MatrixXd out = params.out_weight * x;
  out.colwise() += params.out_bias;
  return out;
}

/// Embedding of one flattened J*3 torque frame.
inline ForceEmbedding fn_forward(const ForceNetParams& params,
                                 const Eigen::VectorXd& tau_frame) {
  return {fn_forward_batch(params, tau_frame).col(0), "frame"};
}

/// Mean-pooled embedding of a whole torque sequence.
inline ForceEmbedding encode_sequence(const ForceNetParams& params,
                                      const dynamics::TorqueSequence& tau,
                                      const std::string& sequence_id = "") {
  if (tau.frame_count() == 0)
    throw std::invalid_argument("empty torque sequence");
  Eigen::MatrixXd frames(tau.joint_count() * 3, tau.frame_count());
  for (int t = 0; t < tau.frame_count(); ++t)
    frames.col(t) = tau.flatten_frame(t);
  const Eigen::MatrixXd embedded = fn_forward_batch(params, frames);
  ForceEmbedding e;
  e.values = embedded.rowwise().mean();
  e.provenance = sequence_id.empty()
                     ? "mean-pool[" + std::to_string(tau.frame_count()) + "]"
                     : sequence_id + ":mean-pool[" +
                           std::to_string(tau.frame_count()) + "]";
  return e;
}

struct ForceNetGradients {
  std::array<ForceNetLayer, 3> layers;
  Eigen::MatrixXd out_weight;
  Eigen::VectorXd out_bias;
  Eigen::MatrixXd input;  // gradient w.r.t. the input frames

  static ForceNetGradients zero_like(const ForceNetParams& p) {
    ForceNetGradients g;
    for (int i = 0; i < 3; ++i) {
      g.layers[i].weight = Eigen::MatrixXd::Zero(p.layers[i].weight.rows(),
                                                 p.layers[i].weight.cols());
      g.layers[i].bias = Eigen::VectorXd::Zero(p.layers[i].bias.size());
      g.layers[i].gain = Eigen::VectorXd::Zero(p.layers[i].gain.size());
      g.layers[i].shift = Eigen::VectorXd::Zero(p.layers[i].shift.size());
    }
    g.out_weight =
        Eigen::MatrixXd::Zero(p.out_weight.rows(), p.out_weight.cols());
    g.out_bias = Eigen::VectorXd::Zero(p.out_bias.size());
    return g;
  }

  void accumulate(const ForceNetGradients& other) {
    for (int i = 0; i < 3; ++i) {
      layers[i].weight += other.layers[i].weight;
      layers[i].bias += other.layers[i].bias;
      layers[i].gain += other.layers[i].gain;
      layers[i].shift += other.layers[i].shift;
    }
    out_weight += other.out_weight;
    out_bias += other.out_bias;
  }
};

/// Reverse-mode gradients for a batch, given d(loss)/d(output) per column.
inline ForceNetGradients fn_gradient_batch(const ForceNetParams& params,
                                           const ForwardCache& cache,
                                           const Eigen::MatrixXd& upstream) {
  if (upstream.rows() != params.embed_dim() ||
      upstream.cols() != cache.input.cols())
    throw std::invalid_argument("shape mismatch: upstream gradient");

  ForceNetGradients grads;
  grads.out_weight = upstream * cache.activated[2].transpose();
  grads.out_bias = upstream.rowwise().sum();

  Eigen::MatrixXd dh = params.out_weight.transpose() * upstream;
  for (int i = 2; i >= 0; --i) {
    const auto& layer = params.layers[i];
    const Eigen::MatrixXd& xhat = cache.normalized[i];
    // LayerNorm output, recomputed from the cached normalization
    Eigen::MatrixXd y = (xhat.array().colwise() * layer.gain.array()).matrix();
    y.colwise() += layer.shift;

    const Eigen::MatrixXd dy =
        dh.cwiseProduct(y.unaryExpr([](double v) { return gelu_derivative(v); }));
    grads.layers[i].gain = dy.cwiseProduct(xhat).rowwise().sum();
    grads.layers[i].shift = dy.rowwise().sum();

    const Eigen::MatrixXd dxhat =
        (dy.array().colwise() * layer.gain.array()).matrix();
    const Eigen::RowVectorXd mean_dxhat = dxhat.colwise().mean();
    const Eigen::RowVectorXd mean_dxhat_xhat =
        dxhat.cwiseProduct(xhat).colwise().mean();
    Eigen::MatrixXd dz =
        dxhat.rowwise() - mean_dxhat;
    dz -= (xhat.array().rowwise() * mean_dxhat_xhat.array()).matrix();
    dz = dz.array().rowwise() * cache.inv_std[i].transpose().array();

    const Eigen::MatrixXd& layer_input =
        i == 0 ? cache.input : cache.activated[i - 1];
    grads.layers[i].weight = dz * layer_input.transpose();
    grads.layers[i].bias = dz.rowwise().sum();
    dh = layer.weight.transpose() * dz;
  }
  grads.input = dh;
  return grads;
}

/// Gradients of one frame's embedding composed with an upstream linear
/// functional (a d-vector).
inline ForceNetGradients fn_gradient(const ForceNetParams& params,
                                     const Eigen::VectorXd& tau_frame,
                                     const Eigen::VectorXd& upstream) {
  ForwardCache cache;
  fn_forward_batch(params, tau_frame, &cache);
  return fn_gradient_batch(params, cache, upstream);
}

}  // namespace forcekit::encoding
