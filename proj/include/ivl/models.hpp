#pragma once

#include <string>
#include <vector>

#include "ivl/autodiff.hpp"
#include "ivl/groupact.hpp"
#include "ivl/optim.hpp"
#include "ivl/tensor.hpp"

namespace ivl::models {

// Shared architecture for the vanilla VAE and the rotation-invariant VAE.
// Encoder: conv(c1, 3x3, s2) -> relu -> conv(c2, 3x3, s2) -> relu ->
// dense(fc) -> relu -> heads (mu, logvar, and for the invariant model a
// 2-unit pose head normalized to a unit vector).
// Decoder mirrors it with nearest-neighbor upsampling + 3x3 convs, sigmoid
// output. The invariant model reconstructs by rotating the canonical
// decoder output with the predicted pose.
struct VaeConfig {
  int64_t input_side = 28;  // must be divisible by 4
  int64_t latent_dim = 10;
  int64_t conv1_ch = 16;
  int64_t conv2_ch = 32;
  int64_t fc_dim = 128;
  float beta = 1.0f;                // KL weight
  float lambda_consistency = 1.0f;  // weight of the two-view consistency penalty
  bool invariant = false;
  bool consistency = true;  // only meaningful for the invariant model

  int64_t feat_side() const { return input_side / 4; }
  void validate() const;
};

std::vector<nn::ParamSpec> param_specs(const VaeConfig& cfg);

// Parameters bound onto a tape, in ParamSet order.
template <typename T>
struct BoundParams {
  std::vector<std::string> names;
  std::vector<ad::Var> vars;
  ad::Var at(const std::string& name) const;
};

template <typename T>
BoundParams<T> bind_params(ad::Tape<T>& t, const nn::ParamSet& ps, bool needs_grad);
template <typename T>
BoundParams<T> bind_tensors(ad::Tape<T>& t, const std::vector<std::string>& names,
                            const std::vector<Tensor<T>>& values, bool needs_grad);

template <typename T>
struct EncoderVars {
  ad::Var mu, logvar;
  ad::Var pose;  // invalid for the vanilla model
};

// x: [n, 1, s, s]
template <typename T>
EncoderVars<T> build_encoder(ad::Tape<T>& t, const VaeConfig& cfg, const BoundParams<T>& p, ad::Var x);
// z: [n, d] -> canonical image [n, 1, s, s], sigmoid-activated
template <typename T>
ad::Var build_decoder(ad::Tape<T>& t, const VaeConfig& cfg, const BoundParams<T>& p, ad::Var z);

struct LossBreakdown {
  double total = 0, reconstruction = 0, kl = 0, consistency = 0;
};

LossBreakdown make_breakdown(double recon, double kl, double consistency, double beta, double lambda);

// Value-path ELBO for a single image pair (pixel-sum reconstruction CE with
// the same [1e-7, 1-1e-7] clamp the training op uses). consistency is 0.
LossBreakdown elbo_loss(const Tensor<float>& x, const Tensor<float>& recon,
                        const std::vector<float>& mu, const std::vector<float>& logvar, float beta);
double consistency_loss(const std::vector<float>& mu1, const std::vector<float>& mu2);

struct EncoderOutput {
  std::vector<float> mu, logvar;
  group::GroupElement pose;  // identity for the vanilla model
  bool has_pose = false;
};

// Frozen-parameter convenience wrapper used by evaluation and the CLI.
class VaeModel {
 public:
  VaeModel(VaeConfig cfg, nn::ParamSet params);

  const VaeConfig& config() const { return cfg_; }
  const nn::ParamSet& params() const { return params_; }
  nn::ParamSet& params() { return params_; }

  // imgs: [n, s, s] -> mu rows [n, d]
  Tensor<float> embed_batch(const Tensor<float>& imgs) const;
  EncoderOutput encode(const Tensor<float>& img) const;  // img: [s, s]
  Tensor<float> decode_canonical(const std::vector<float>& z) const;  // -> [s, s]
  Tensor<float> decode_posed(const std::vector<float>& z, const group::GroupElement& g) const;

 private:
  VaeConfig cfg_;
  nn::ParamSet params_;
};

}  // namespace ivl::models
