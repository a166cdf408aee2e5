#include "ivl/models.hpp"

#include <cmath>

namespace ivl::models {

void VaeConfig::validate() const {
  IVL_VALIDATE(input_side >= 8 && input_side % 4 == 0,
               "input_side must be a multiple of 4 and >= 8, got %lld", (long long)input_side);
  IVL_VALIDATE(latent_dim >= 1, "latent_dim must be >= 1, got %lld", (long long)latent_dim);
  IVL_VALIDATE(conv1_ch >= 1 && conv2_ch >= 1 && fc_dim >= 1, "layer widths must be >= 1");
  IVL_VALIDATE(beta >= 0.0f, "beta must be >= 0, got %g", double(beta));
  IVL_VALIDATE(lambda_consistency >= 0.0f, "lambda_consistency must be >= 0");
}

std::vector<nn::ParamSpec> param_specs(const VaeConfig& cfg) {
  cfg.validate();
  const int64_t c1 = cfg.conv1_ch, c2 = cfg.conv2_ch, fc = cfg.fc_dim, d = cfg.latent_dim;
  const int64_t fs = cfg.feat_side();
  const int64_t flat = c2 * fs * fs;
  std::vector<nn::ParamSpec> sp;
  auto conv = [&](const std::string& name, int64_t co, int64_t ci) {
    sp.push_back({name + ".k", {co, ci, 3, 3}, nn::Init::kGlorot, 0.0, double(ci * 9), double(co * 9)});
    sp.push_back({name + ".b", {co}, nn::Init::kZero});
  };
  auto fcl = [&](const std::string& name, int64_t in, int64_t out) {
    sp.push_back({name + ".w", {in, out}, nn::Init::kGlorot, 0.0, double(in), double(out)});
    sp.push_back({name + ".b", {out}, nn::Init::kZero});
  };
  conv("enc.conv1", c1, 1);
  conv("enc.conv2", c2, c1);
  fcl("enc.fc", flat, fc);
  fcl("enc.mu", fc, d);
  fcl("enc.logvar", fc, d);
  if (cfg.invariant) {
    // bias starts at (1, 0): the pose head begins near the identity rotation
    sp.push_back({"enc.pose.w", {fc, 2}, nn::Init::kGlorot, 0.0, double(fc), 2.0});
    sp.push_back({"enc.pose.b", {2}, nn::Init::kUnitX});
  }
  fcl("dec.fc1", d, fc);
  fcl("dec.fc2", fc, flat);
  conv("dec.conv1", c1, c2);
  conv("dec.conv2", 1, c1);
  return sp;
}

template <typename T>
ad::Var BoundParams<T>::at(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return vars[i];
  throw Error(strfmt("parameter '%s' is not bound", name.c_str()));
}

template <typename T>
BoundParams<T> bind_params(ad::Tape<T>& t, const nn::ParamSet& ps, bool needs_grad) {
  BoundParams<T> b;
  for (const auto& e : ps.entries) {
    b.names.push_back(e.name);
    b.vars.push_back(t.leaf(e.value.template cast<T>(), needs_grad));
  }
  return b;
}

template <typename T>
BoundParams<T> bind_tensors(ad::Tape<T>& t, const std::vector<std::string>& names,
                            const std::vector<Tensor<T>>& values, bool needs_grad) {
  IVL_CHECK(names.size() == values.size(), "bind_tensors arity mismatch");
  BoundParams<T> b;
  b.names = names;
  for (const auto& v : values) b.vars.push_back(t.leaf(v, needs_grad));
  return b;
}

template <typename T>
EncoderVars<T> build_encoder(ad::Tape<T>& t, const VaeConfig& cfg, const BoundParams<T>& p, ad::Var x) {
  const Shape xs = t.val(x).shape;
  IVL_CHECK(xs.size() == 4 && xs[1] == 1 && xs[2] == cfg.input_side && xs[3] == cfg.input_side,
            "encoder input %s does not match configured side %lld", shape_str(xs).c_str(),
            (long long)cfg.input_side);
  ad::Var h = ad::conv2d(t, x, p.at("enc.conv1.k"), p.at("enc.conv1.b"), 2, 1);
  h = ad::relu(t, h);
  h = ad::conv2d(t, h, p.at("enc.conv2.k"), p.at("enc.conv2.b"), 2, 1);
  h = ad::relu(t, h);
  const int64_t n = xs[0];
  h = ad::reshape(t, h, Shape{n, cfg.conv2_ch * cfg.feat_side() * cfg.feat_side()});
  h = ad::dense(t, h, p.at("enc.fc.w"), p.at("enc.fc.b"));
  h = ad::relu(t, h);
  EncoderVars<T> out;
  out.mu = ad::dense(t, h, p.at("enc.mu.w"), p.at("enc.mu.b"));
  out.logvar = ad::dense(t, h, p.at("enc.logvar.w"), p.at("enc.logvar.b"));
  if (cfg.invariant) {
    ad::Var raw = ad::dense(t, h, p.at("enc.pose.w"), p.at("enc.pose.b"));
    out.pose = ad::row_normalize(t, raw);
  }
  return out;
}

template <typename T>
ad::Var build_decoder(ad::Tape<T>& t, const VaeConfig& cfg, const BoundParams<T>& p, ad::Var z) {
  const Shape zs = t.val(z).shape;
  IVL_CHECK(zs.size() == 2 && zs[1] == cfg.latent_dim, "decoder input %s does not match latent_dim %lld",
            shape_str(zs).c_str(), (long long)cfg.latent_dim);
  const int64_t n = zs[0];
  const int64_t fs = cfg.feat_side();
  ad::Var h = ad::dense(t, z, p.at("dec.fc1.w"), p.at("dec.fc1.b"));
  h = ad::relu(t, h);
  h = ad::dense(t, h, p.at("dec.fc2.w"), p.at("dec.fc2.b"));
  h = ad::relu(t, h);
  h = ad::reshape(t, h, Shape{n, cfg.conv2_ch, fs, fs});
  h = ad::upsample2x(t, h);
  h = ad::conv2d(t, h, p.at("dec.conv1.k"), p.at("dec.conv1.b"), 1, 1);
  h = ad::relu(t, h);
  h = ad::upsample2x(t, h);
  h = ad::conv2d(t, h, p.at("dec.conv2.k"), p.at("dec.conv2.b"), 1, 1);
  return ad::sigmoid(t, h);
}

LossBreakdown make_breakdown(double recon, double kl, double consistency, double beta, double lambda) {
  LossBreakdown b;
  b.reconstruction = recon;
  b.kl = kl;
  b.consistency = consistency;
  b.total = recon + beta * kl + lambda * consistency;
  IVL_CHECK(std::isfinite(b.total), "non-finite loss: recon %g kl %g consistency %g", recon, kl,
            consistency);
  return b;
}

LossBreakdown elbo_loss(const Tensor<float>& x, const Tensor<float>& recon,
                        const std::vector<float>& mu, const std::vector<float>& logvar, float beta) {
  IVL_CHECK(x.shape == recon.shape, "elbo shape mismatch: x %s recon %s",
            shape_str(x.shape).c_str(), shape_str(recon.shape).c_str());
  IVL_CHECK(mu.size() == logvar.size(), "elbo mu/logvar length mismatch");
  const double lo = 1e-7, hi = 1.0 - 1e-7;
  double ce = 0;
  for (int64_t i = 0; i < x.size(); ++i) {
    double r = double(recon[i]);
    r = r < lo ? lo : (r > hi ? hi : r);
    ce -= double(x[i]) * std::log(r) + (1.0 - double(x[i])) * std::log(1.0 - r);
  }
  double kl = 0;
  for (size_t i = 0; i < mu.size(); ++i)
    kl += double(mu[i]) * double(mu[i]) + std::exp(double(logvar[i])) - 1.0 - double(logvar[i]);
  kl /= 2.0;
  return make_breakdown(ce, kl, 0.0, double(beta), 0.0);
}

double consistency_loss(const std::vector<float>& mu1, const std::vector<float>& mu2) {
  IVL_CHECK(mu1.size() == mu2.size(), "consistency length mismatch");
  double acc = 0;
  for (size_t i = 0; i < mu1.size(); ++i) {
    const double d = double(mu1[i]) - double(mu2[i]);
    acc += d * d;
  }
  return acc;
}

VaeModel::VaeModel(VaeConfig cfg, nn::ParamSet params) : cfg_(cfg), params_(std::move(params)) {
  cfg_.validate();
  const auto specs = param_specs(cfg_);
  IVL_CHECK(specs.size() == params_.entries.size(), "parameter set does not match config: %zu vs %zu",
            params_.entries.size(), specs.size());
  for (size_t i = 0; i < specs.size(); ++i) {
    IVL_CHECK(specs[i].name == params_.entries[i].name && specs[i].shape == params_.entries[i].value.shape,
              "parameter %zu mismatch: expected %s %s", i, specs[i].name.c_str(),
              shape_str(specs[i].shape).c_str());
  }
}

Tensor<float> VaeModel::embed_batch(const Tensor<float>& imgs) const {
  IVL_CHECK(imgs.shape.size() == 3, "embed_batch expects [n,s,s], got %s",
            shape_str(imgs.shape).c_str());
  IVL_CHECK(imgs.shape[1] == cfg_.input_side && imgs.shape[2] == cfg_.input_side,
            "embed_batch image side %s does not match model input_side %lld",
            shape_str(imgs.shape).c_str(), (long long)cfg_.input_side);
  const int64_t n = imgs.shape[0];
  ad::Tape<float> t;
  auto bound = bind_params(t, params_, false);
  Tensor<float> x = imgs;
  x.shape = {n, 1, cfg_.input_side, cfg_.input_side};
  auto enc = build_encoder(t, cfg_, bound, t.leaf(std::move(x), false));
  return t.val(enc.mu);
}

EncoderOutput VaeModel::encode(const Tensor<float>& img) const {
  IVL_CHECK(img.shape.size() == 2, "encode expects [s,s], got %s", shape_str(img.shape).c_str());
  const int64_t side = cfg_.input_side;
  IVL_CHECK(img.shape[0] == side && img.shape[1] == side,
            "encode image %s does not match model input_side %lld", shape_str(img.shape).c_str(),
            (long long)side);
  ad::Tape<float> t;
  auto bound = bind_params(t, params_, false);
  Tensor<float> x = img;
  x.shape = {1, 1, side, side};
  auto enc = build_encoder(t, cfg_, bound, t.leaf(std::move(x), false));
  EncoderOutput out;
  out.mu = t.val(enc.mu).data;
  out.logvar = t.val(enc.logvar).data;
  if (cfg_.invariant) {
    out.has_pose = true;
    out.pose = {double(t.val(enc.pose)[0]), double(t.val(enc.pose)[1])};
  }
  return out;
}

Tensor<float> VaeModel::decode_canonical(const std::vector<float>& z) const {
  IVL_CHECK(int64_t(z.size()) == cfg_.latent_dim, "latent length %zu does not match latent_dim %lld",
            z.size(), (long long)cfg_.latent_dim);
  ad::Tape<float> t;
  auto bound = bind_params(t, params_, false);
  Tensor<float> zt({1, cfg_.latent_dim});
  zt.data = z;
  ad::Var img = build_decoder(t, cfg_, bound, t.leaf(std::move(zt), false));
  Tensor<float> out = t.val(img);
  out.shape = {cfg_.input_side, cfg_.input_side};
  return out;
}

Tensor<float> VaeModel::decode_posed(const std::vector<float>& z, const group::GroupElement& g) const {
  return group::rotate_image(decode_canonical(z), g);
}

#define IVL_INSTANTIATE(T)                                                                       \
  template struct BoundParams<T>;                                                               \
  template BoundParams<T> bind_params<T>(ad::Tape<T>&, const nn::ParamSet&, bool);              \
  template BoundParams<T> bind_tensors<T>(ad::Tape<T>&, const std::vector<std::string>&,        \
                                          const std::vector<Tensor<T>>&, bool);                 \
  template EncoderVars<T> build_encoder<T>(ad::Tape<T>&, const VaeConfig&, const BoundParams<T>&, \
                                           ad::Var);                                            \
  template ad::Var build_decoder<T>(ad::Tape<T>&, const VaeConfig&, const BoundParams<T>&, ad::Var);

IVL_INSTANTIATE(float)
IVL_INSTANTIATE(double)
#undef IVL_INSTANTIATE

}  // namespace ivl::models
