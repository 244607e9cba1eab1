#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "forcekit/encoding/force_net.hpp"
#include "forcekit/random.hpp"

namespace forcekit::encoding {

struct FitConfig {
  int epochs = 50;
  double step_size = 0.05;
  int batch_size = 8;
  std::uint64_t seed = 42;
  int embed_dim = kDefaultEmbedDim;
};

struct ClassifierHead {
  Eigen::MatrixXd weight;  // classes x d
  Eigen::VectorXd bias;
};

struct FitResult {
  ForceNetParams params;
  ClassifierHead head;
  std::vector<double> loss_trace;  // dataset-mean cross entropy per epoch
  double final_loss = 0.0;
  double train_accuracy = 0.0;
};

namespace detail {

inline Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::ArrayXd shifted = logits.array() - logits.maxCoeff();
  const Eigen::ArrayXd exps = shifted.exp();
  return (exps / exps.sum()).matrix();
}

struct SequenceBatch {
  Eigen::MatrixXd frames;  // width x T, flattened torque frames
  int label = 0;
};

}  // namespace detail

/// Trains the force encoder plus a linear softmax head with seeded SGD.
/// Frame embeddings are mean-pooled over time before the head. Deterministic
/// given the seed.
inline FitResult fit_encoder(
    const std::vector<std::pair<dynamics::TorqueSequence, int>>& dataset,
    const FitConfig& config) {
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  if (config.epochs < 0 || config.batch_size < 1)
    throw std::invalid_argument("invalid fit config");

  int classes = 0;
  const int joints = dataset.front().first.joint_count();
  for (const auto& [tau, label] : dataset) {
    if (label < 0) throw std::invalid_argument("labels must be nonnegative");
    if (tau.joint_count() != joints)
      throw std::invalid_argument("sequences must share the joint count");
    if (tau.frame_count() < 1)
      throw std::invalid_argument("empty torque sequence");
    classes = std::max(classes, label + 1);
  }
  {
    std::vector<bool> seen(static_cast<std::size_t>(classes), false);
    for (const auto& [tau, label] : dataset)
      seen[static_cast<std::size_t>(label)] = true;
    const auto distinct = std::count(seen.begin(), seen.end(), true);
    if (distinct < 2)
      throw std::invalid_argument("degenerate dataset: need at least 2 classes");
  }

  std::vector<detail::SequenceBatch> sequences;
  sequences.reserve(dataset.size());
  for (const auto& [tau, label] : dataset) {
    detail::SequenceBatch sb;
    sb.frames.resize(joints * 3, tau.frame_count());
    for (int t = 0; t < tau.frame_count(); ++t)
      sb.frames.col(t) = tau.flatten_frame(t);
    sb.label = label;
    sequences.push_back(std::move(sb));
  }

  Rng rng(config.seed);
  FitResult result;
  result.params = make_force_net(joints * 3, config.embed_dim, rng);
  const double head_bound = 1.0 / std::sqrt(static_cast<double>(config.embed_dim));
  result.head.weight.resize(classes, config.embed_dim);
  for (int r = 0; r < classes; ++r)
    for (int c = 0; c < config.embed_dim; ++c)
      result.head.weight(r, c) = rng.uniform(-head_bound, head_bound);
  result.head.bias = Eigen::VectorXd::Zero(classes);

  const int count = static_cast<int>(sequences.size());
  std::vector<int> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with the shared stream keeps runs reproducible.
    for (int i = count - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(j)]);
    }

    double epoch_loss = 0.0;
    for (int start = 0; start < count; start += config.batch_size) {
      const int batch_n = std::min(config.batch_size, count - start);
      auto net_grads = ForceNetGradients::zero_like(result.params);
      Eigen::MatrixXd head_w_grad =
          Eigen::MatrixXd::Zero(classes, config.embed_dim);
      Eigen::VectorXd head_b_grad = Eigen::VectorXd::Zero(classes);

      for (int k = 0; k < batch_n; ++k) {
        const auto& sb =
            sequences[static_cast<std::size_t>(order[static_cast<std::size_t>(start + k)])];
        ForwardCache cache;
        const Eigen::MatrixXd embedded =
            fn_forward_batch(result.params, sb.frames, &cache);
        const Eigen::VectorXd pooled = embedded.rowwise().mean();
        const Eigen::VectorXd probs =
            detail::softmax(result.head.weight * pooled + result.head.bias);
        epoch_loss += -std::log(std::max(probs[sb.label], 1e-300));

        Eigen::VectorXd dlogits = probs;
        dlogits[sb.label] -= 1.0;
        dlogits /= static_cast<double>(batch_n);
        head_w_grad += dlogits * pooled.transpose();
        head_b_grad += dlogits;

        const Eigen::VectorXd dpool = result.head.weight.transpose() * dlogits;
        const Eigen::MatrixXd upstream =
            (dpool / static_cast<double>(sb.frames.cols())) *
            Eigen::RowVectorXd::Ones(sb.frames.cols());
        net_grads.accumulate(fn_gradient_batch(result.params, cache, upstream));
      }

      const double step = config.step_size;
      for (int i = 0; i < 3; ++i) {
        result.params.layers[i].weight -= step * net_grads.layers[i].weight;
        result.params.layers[i].bias -= step * net_grads.layers[i].bias;
        result.params.layers[i].gain -= step * net_grads.layers[i].gain;
        result.params.layers[i].shift -= step * net_grads.layers[i].shift;
      }
      result.params.out_weight -= step * net_grads.out_weight;
      result.params.out_bias -= step * net_grads.out_bias;
      result.head.weight -= step * head_w_grad;
      result.head.bias -= step * head_b_grad;
    }
    result.loss_trace.push_back(epoch_loss / count);
  }

  int correct = 0;
  double final_loss = 0.0;
  for (const auto& sb : sequences) {
    const Eigen::VectorXd pooled =
        fn_forward_batch(result.params, sb.frames).rowwise().mean();
    const Eigen::VectorXd probs =
        detail::softmax(result.head.weight * pooled + result.head.bias);
    final_loss += -std::log(std::max(probs[sb.label], 1e-300));
    int argmax = 0;
    probs.maxCoeff(&argmax);
    if (argmax == sb.label) ++correct;
  }
  result.final_loss = final_loss / count;
  result.train_accuracy = static_cast<double>(correct) / count;
  return result;
}

/// Class probabilities for one torque sequence under a trained encoder+head.
inline Eigen::VectorXd classify_sequence(const ForceNetParams& params,
                                         const ClassifierHead& head,
                                         const dynamics::TorqueSequence& tau) {
  const ForceEmbedding e = encode_sequence(params, tau);
  return detail::softmax(head.weight * e.values + head.bias);
}

}  // namespace forcekit::encoding
