#include "ivl/optim.hpp"

#include <cmath>

#include "ivl/common.hpp"
#include "ivl/rng.hpp"

namespace ivl::nn {

void ParamSet::add(std::string name, Tensor<float> value) {
  IVL_CHECK(index(name) < 0, "duplicate parameter name '%s'", name.c_str());
  entries.push_back({std::move(name), std::move(value)});
}

Tensor<float>& ParamSet::at(const std::string& name) {
  const int64_t i = index(name);
  IVL_CHECK(i >= 0, "unknown parameter '%s'", name.c_str());
  return entries[size_t(i)].value;
}

const Tensor<float>& ParamSet::at(const std::string& name) const {
  return const_cast<ParamSet*>(this)->at(name);
}

int64_t ParamSet::index(const std::string& name) const {
  for (size_t i = 0; i < entries.size(); ++i)
    if (entries[i].name == name) return int64_t(i);
  return -1;
}

bool ParamSet::all_finite() const {
  for (const auto& e : entries)
    if (!e.value.finite()) return false;
  return true;
}

int64_t ParamSet::total_elems() const {
  int64_t n = 0;
  for (const auto& e : entries) n += e.value.size();
  return n;
}

bool ParamSet::same_bits(const ParamSet& o) const {
  if (entries.size() != o.entries.size()) return false;
  for (size_t i = 0; i < entries.size(); ++i)
    if (entries[i].name != o.entries[i].name || !entries[i].value.same_bits(o.entries[i].value))
      return false;
  return true;
}

ParamSet init_params(const std::vector<ParamSpec>& specs, uint64_t seed) {
  ParamSet ps;
  for (size_t i = 0; i < specs.size(); ++i) {
    const ParamSpec& sp = specs[i];
    Rng rng = Rng::derive(seed, 0x706172616dull, i);
    Tensor<float> t(sp.shape);
    switch (sp.init) {
      case Init::kZero:
        break;
      case Init::kConst:
        t.fill(float(sp.const_val));
        break;
      case Init::kUnitX:
        if (t.size() > 0) t[0] = 1.0f;
        break;
      case Init::kGlorot: {
        IVL_CHECK(sp.fan_in > 0 && sp.fan_out > 0, "glorot init for '%s' needs fan sizes",
                  sp.name.c_str());
        const double bound = std::sqrt(6.0 / (sp.fan_in + sp.fan_out));
        for (auto& v : t.data) v = float(rng.uniform(-bound, bound));
        break;
      }
    }
    ps.add(sp.name, std::move(t));
  }
  return ps;
}

template <typename T>
void AdamState<T>::step(std::vector<Tensor<T>*> params, std::vector<const Tensor<T>*> grads,
                        const std::vector<std::string>& names) {
  IVL_CHECK(params.size() == grads.size() && params.size() == m.size(),
            "adam step arity mismatch: %zu params, %zu grads, %zu state slots", params.size(),
            grads.size(), m.size());
  for (size_t i = 0; i < grads.size(); ++i) {
    for (T g : grads[i]->data)
      IVL_CHECK(std::isfinite(double(g)), "non-finite gradient for parameter '%s'",
                i < names.size() ? names[i].c_str() : "?");
  }
  ++t;
  const T bc1 = T(1) - std::pow(cfg.beta1, T(t));
  const T bc2 = T(1) - std::pow(cfg.beta2, T(t));
  for (size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& p = *params[i];
    const Tensor<T>& g = *grads[i];
    Tensor<T>& mi = m[i];
    Tensor<T>& vi = v[i];
    IVL_CHECK(p.shape == g.shape && p.shape == mi.shape, "adam shape mismatch for '%s'",
              i < names.size() ? names[i].c_str() : "?");
    for (int64_t j = 0; j < p.size(); ++j) {
      mi[j] = cfg.beta1 * mi[j] + (T(1) - cfg.beta1) * g[j];
      vi[j] = cfg.beta2 * vi[j] + (T(1) - cfg.beta2) * g[j] * g[j];
      const T mhat = mi[j] / bc1;
      const T vhat = vi[j] / bc2;
      p[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

template struct AdamState<float>;
template struct AdamState<double>;

void adam_step(ParamSet& params, const std::vector<Tensor<float>>& grads, AdamState<float>& state) {
  std::vector<Tensor<float>*> ps;
  std::vector<const Tensor<float>*> gs;
  std::vector<std::string> names;
  for (size_t i = 0; i < params.entries.size(); ++i) {
    ps.push_back(&params.entries[i].value);
    gs.push_back(&grads[i]);
    names.push_back(params.entries[i].name);
  }
  state.step(std::move(ps), std::move(gs), names);
}

}  // namespace ivl::nn
