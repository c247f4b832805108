#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfc/error.hpp"
#include "rfc/rng.hpp"
#include "rfc/rotation.hpp"

namespace rfc {

// ---------------------------------------------------------------------------
// Tensors and checkpointing

struct TensorRef {
  double* value = nullptr;
  const double* grad = nullptr;
  long size = 0;
};

struct Checkpoint {
  nlohmann::json meta;
  std::vector<MatX> tensors;

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint '" + path + "'");
    const char magic[8] = {'R', 'F', 'C', 'K', 'P', 'T', '0', '1'};
    out.write(magic, 8);
    const std::string meta_str = meta.dump();
    const std::uint64_t meta_len = meta_str.size();
    out.write(reinterpret_cast<const char*>(&meta_len), 8);
    out.write(meta_str.data(), static_cast<std::streamsize>(meta_len));
    const std::uint64_t count = tensors.size();
    out.write(reinterpret_cast<const char*>(&count), 8);
    for (const MatX& t : tensors) {
      const std::uint64_t rows = t.rows(), cols = t.cols();
      out.write(reinterpret_cast<const char*>(&rows), 8);
      out.write(reinterpret_cast<const char*>(&cols), 8);
      out.write(reinterpret_cast<const char*>(t.data()),
                static_cast<std::streamsize>(sizeof(double) * t.size()));
    }
  }

  static Checkpoint load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::string(magic, 8) != "RFCKPT01")
      throw ParseError("'" + path + "' is not a checkpoint file");
    std::uint64_t meta_len = 0;
    in.read(reinterpret_cast<char*>(&meta_len), 8);
    std::string meta_str(meta_len, '\0');
    in.read(meta_str.data(), static_cast<std::streamsize>(meta_len));
    Checkpoint ck;
    ck.meta = nlohmann::json::parse(meta_str);
    std::uint64_t count = 0;
    in.read(reinterpret_cast<char*>(&count), 8);
    for (std::uint64_t i = 0; i < count; ++i) {
      std::uint64_t rows = 0, cols = 0;
      in.read(reinterpret_cast<char*>(&rows), 8);
      in.read(reinterpret_cast<char*>(&cols), 8);
      MatX t(rows, cols);
      in.read(reinterpret_cast<char*>(t.data()),
              static_cast<std::streamsize>(sizeof(double) * t.size()));
      if (!in) throw ParseError("truncated checkpoint '" + path + "'");
      ck.tensors.push_back(std::move(t));
    }
    return ck;
  }
};

// ---------------------------------------------------------------------------
// MLP with rectifier hidden layers and a linear output

struct MlpCache {
  MatX input;
  std::vector<MatX> pre;   // pre-activations per layer
  std::vector<MatX> post;  // activations per layer
};

struct MlpGrads {
  std::vector<MatX> w;
  std::vector<VecX> b;

  void zero() {
    for (MatX& m : w) m.setZero();
    for (VecX& v : b) v.setZero();
  }
};

class Mlp {
 public:
  Mlp() = default;

  // widths = [input, hidden..., output]
  Mlp(const std::vector<int>& widths, Rng& rng, double out_scale = 1.0)
      : widths_(widths) {
    if (widths.size() < 2) throw ContractError("Mlp needs >= 2 widths");
    for (size_t l = 0; l + 1 < widths.size(); ++l) {
      const int fan_in = widths[l], fan_out = widths[l + 1];
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      MatX w(fan_out, fan_in);
      for (int i = 0; i < w.size(); ++i)
        w.data()[i] = rng.uniform(-bound, bound);
      if (l + 2 == widths.size()) w *= out_scale;
      w_.push_back(std::move(w));
      b_.push_back(VecX::Zero(fan_out));
    }
  }

  int input_dim() const { return widths_.front(); }
  int output_dim() const { return widths_.back(); }
  int layer_count() const { return static_cast<int>(w_.size()); }
  const std::vector<int>& widths() const { return widths_; }

  // Batched forward; columns are samples. Deterministic.
  MatX forward(const MatX& x, MlpCache* cache = nullptr) const {
    if (x.rows() != widths_.front())
      throw ContractError("Mlp::forward: input dimension mismatch");
    if (cache) {
      cache->input = x;
      cache->pre.clear();
      cache->post.clear();
    }
    MatX a = x;
    for (size_t l = 0; l < w_.size(); ++l) {
      MatX z = (w_[l] * a).colwise() + b_[l];
      if (l + 1 < w_.size()) a = z.cwiseMax(0.0);  // ReLU
      else a = z;
      if (cache) {
        cache->pre.push_back(z);
        cache->post.push_back(a);
      }
    }
    return a;
  }

  VecX evaluate(const VecX& x) const { return forward(x); }

  // Exact reverse-mode gradients; returns the input gradient and adds the
  // parameter gradients into `grads`.
  MatX backward(const MatX& d_out, const MlpCache& cache,
                MlpGrads& grads) const {
    ensure_grads(grads);
    MatX delta = d_out;
    for (int l = layer_count() - 1; l >= 0; --l) {
      const MatX& a_prev = l == 0 ? cache.input : cache.post[l - 1];
      grads.w[l] += delta * a_prev.transpose();
      grads.b[l] += delta.rowwise().sum();
      if (l > 0) {
        MatX d_prev = w_[l].transpose() * delta;
        // ReLU mask of layer l-1
        d_prev = (cache.pre[l - 1].array() > 0.0)
                     .select(d_prev, MatX::Zero(d_prev.rows(), d_prev.cols()));
        delta = std::move(d_prev);
      } else {
        return w_[0].transpose() * delta;
      }
    }
    return {};
  }

  void ensure_grads(MlpGrads& g) const {
    if (g.w.size() == w_.size()) return;
    g.w.clear();
    g.b.clear();
    for (size_t l = 0; l < w_.size(); ++l) {
      g.w.push_back(MatX::Zero(w_[l].rows(), w_[l].cols()));
      g.b.push_back(VecX::Zero(b_[l].size()));
    }
  }

  std::vector<TensorRef> param_refs(const MlpGrads& g) {
    std::vector<TensorRef> refs;
    for (size_t l = 0; l < w_.size(); ++l) {
      refs.push_back({w_[l].data(), g.w[l].data(), w_[l].size()});
      refs.push_back({b_[l].data(), g.b[l].data(), b_[l].size()});
    }
    return refs;
  }

  void append_tensors(Checkpoint& ck) const {
    for (size_t l = 0; l < w_.size(); ++l) {
      ck.tensors.push_back(w_[l]);
      ck.tensors.push_back(b_[l]);
    }
  }
  void read_tensors(const Checkpoint& ck, size_t& idx) {
    for (size_t l = 0; l < w_.size(); ++l) {
      if (idx + 2 > ck.tensors.size())
        throw ParseError("checkpoint has too few tensors");
      if (ck.tensors[idx].rows() != w_[l].rows() ||
          ck.tensors[idx].cols() != w_[l].cols())
        throw ConfigError("checkpoint tensor shape mismatch");
      w_[l] = ck.tensors[idx++];
      b_[l] = ck.tensors[idx++].col(0);
    }
  }

  std::vector<MatX> w_;
  std::vector<VecX> b_;

 private:
  std::vector<int> widths_;
};

// ---------------------------------------------------------------------------
// Gated recurrent cell (GRU)

struct GruStepCache {
  VecX x, h_prev, r, z, n, uh_n;  // uh_n = U_n h + b_hn
};

struct GruGrads {
  MatX w_r, w_z, w_n, u_r, u_z, u_n;
  VecX b_r, b_z, b_n, b_hn;

  void zero() {
    w_r.setZero();
    w_z.setZero();
    w_n.setZero();
    u_r.setZero();
    u_z.setZero();
    u_n.setZero();
    b_r.setZero();
    b_z.setZero();
    b_n.setZero();
    b_hn.setZero();
  }
};

class GruCell {
 public:
  GruCell() = default;
  GruCell(int input_dim, int hidden_dim, Rng& rng)
      : in_(input_dim), hidden_(hidden_dim) {
    auto init = [&](int rows, int cols) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
      MatX m(rows, cols);
      for (int i = 0; i < m.size(); ++i)
        m.data()[i] = rng.uniform(-bound, bound);
      return m;
    };
    w_r = init(hidden_, in_);
    w_z = init(hidden_, in_);
    w_n = init(hidden_, in_);
    u_r = init(hidden_, hidden_);
    u_z = init(hidden_, hidden_);
    u_n = init(hidden_, hidden_);
    b_r = VecX::Zero(hidden_);
    b_z = VecX::Zero(hidden_);
    b_n = VecX::Zero(hidden_);
    b_hn = VecX::Zero(hidden_);
  }

  int input_dim() const { return in_; }
  int hidden_dim() const { return hidden_; }

  static VecX sigmoid(const VecX& v) {
    return 1.0 / (1.0 + (-v.array()).exp());
  }

  VecX step(const VecX& x, const VecX& h_prev,
            GruStepCache* cache = nullptr) const {
    if (x.size() != in_ || h_prev.size() != hidden_)
      throw ContractError("GruCell::step: dimension mismatch");
    const VecX r = sigmoid(w_r * x + u_r * h_prev + b_r);
    const VecX z = sigmoid(w_z * x + u_z * h_prev + b_z);
    const VecX uh_n = u_n * h_prev + b_hn;
    const VecX n = (w_n * x + b_n + r.cwiseProduct(uh_n)).array().tanh();
    VecX h = (1.0 - z.array()) * n.array() + z.array() * h_prev.array();
    if (cache) *cache = {x, h_prev, r, z, n, uh_n};
    return h;
  }

  // Backward through one step. d_h is dL/dh(t); returns dL/dh(t-1) and
  // fills d_x; parameter gradients accumulate.
  VecX step_backward(const VecX& d_h, const GruStepCache& c, GruGrads& grads,
                     VecX& d_x) const {
    ensure_grads(grads);
    const Eigen::ArrayXd z = c.z.array(), n = c.n.array(), r = c.r.array();
    const Eigen::ArrayXd d_h_a = d_h.array();

    const VecX d_z = (d_h_a * (c.h_prev.array() - n)).matrix();
    const VecX d_n = (d_h_a * (1.0 - z)).matrix();
    VecX d_h_prev = (d_h_a * z).matrix();

    // n = tanh(pre_n), pre_n = W_n x + b_n + r o uh_n
    const VecX d_pre_n = (d_n.array() * (1.0 - n * n)).matrix();
    const VecX d_r = d_pre_n.cwiseProduct(c.uh_n);
    const VecX d_uh_n = d_pre_n.cwiseProduct(c.r);

    const VecX d_pre_r = (d_r.array() * r * (1.0 - r)).matrix();
    const VecX d_pre_z = (d_z.array() * z * (1.0 - z)).matrix();

    grads.w_r += d_pre_r * c.x.transpose();
    grads.w_z += d_pre_z * c.x.transpose();
    grads.w_n += d_pre_n * c.x.transpose();
    grads.u_r += d_pre_r * c.h_prev.transpose();
    grads.u_z += d_pre_z * c.h_prev.transpose();
    grads.u_n += d_uh_n * c.h_prev.transpose();
    grads.b_r += d_pre_r;
    grads.b_z += d_pre_z;
    grads.b_n += d_pre_n;
    grads.b_hn += d_uh_n;

    d_x = w_r.transpose() * d_pre_r + w_z.transpose() * d_pre_z +
          w_n.transpose() * d_pre_n;
    d_h_prev += u_r.transpose() * d_pre_r + u_z.transpose() * d_pre_z +
                u_n.transpose() * d_uh_n;
    return d_h_prev;
  }

  void ensure_grads(GruGrads& g) const {
    if (g.w_r.rows() == hidden_ && g.w_r.cols() == in_) return;
    g.w_r = MatX::Zero(hidden_, in_);
    g.w_z = MatX::Zero(hidden_, in_);
    g.w_n = MatX::Zero(hidden_, in_);
    g.u_r = MatX::Zero(hidden_, hidden_);
    g.u_z = MatX::Zero(hidden_, hidden_);
    g.u_n = MatX::Zero(hidden_, hidden_);
    g.b_r = VecX::Zero(hidden_);
    g.b_z = VecX::Zero(hidden_);
    g.b_n = VecX::Zero(hidden_);
    g.b_hn = VecX::Zero(hidden_);
  }

  std::vector<TensorRef> param_refs(const GruGrads& g) {
    return {{w_r.data(), g.w_r.data(), w_r.size()},
            {w_z.data(), g.w_z.data(), w_z.size()},
            {w_n.data(), g.w_n.data(), w_n.size()},
            {u_r.data(), g.u_r.data(), u_r.size()},
            {u_z.data(), g.u_z.data(), u_z.size()},
            {u_n.data(), g.u_n.data(), u_n.size()},
            {b_r.data(), g.b_r.data(), b_r.size()},
            {b_z.data(), g.b_z.data(), b_z.size()},
            {b_n.data(), g.b_n.data(), b_n.size()},
            {b_hn.data(), g.b_hn.data(), b_hn.size()}};
  }

  void append_tensors(Checkpoint& ck) const {
    for (const MatX* m : {&w_r, &w_z, &w_n, &u_r, &u_z, &u_n})
      ck.tensors.push_back(*m);
    for (const VecX* v : {&b_r, &b_z, &b_n, &b_hn}) ck.tensors.push_back(*v);
  }
  void read_tensors(const Checkpoint& ck, size_t& idx) {
    if (idx + 10 > ck.tensors.size())
      throw ParseError("checkpoint has too few tensors");
    for (MatX* m : {&w_r, &w_z, &w_n, &u_r, &u_z, &u_n}) {
      if (ck.tensors[idx].rows() != m->rows() ||
          ck.tensors[idx].cols() != m->cols())
        throw ConfigError("checkpoint tensor shape mismatch");
      *m = ck.tensors[idx++];
    }
    for (VecX* v : {&b_r, &b_z, &b_n, &b_hn}) *v = ck.tensors[idx++].col(0);
  }

  MatX w_r, w_z, w_n, u_r, u_z, u_n;
  VecX b_r, b_z, b_n, b_hn;

 private:
  int in_ = 0, hidden_ = 0;
};

// ---------------------------------------------------------------------------
// Diagonal Gaussian head

inline double gaussian_logprob(const VecX& value, const VecX& mean,
                               const VecX& sigma) {
  if (value.size() != mean.size() || mean.size() != sigma.size())
    throw ContractError("gaussian_logprob: dimension mismatch");
  constexpr double kLog2Pi = 1.8378770664093453;
  double lp = 0.0;
  for (int i = 0; i < value.size(); ++i) {
    if (!(sigma[i] > 0.0))
      throw ContractError("gaussian_logprob: sigma must be positive");
    const double zscore = (value[i] - mean[i]) / sigma[i];
    lp += -0.5 * kLog2Pi - std::log(sigma[i]) - 0.5 * zscore * zscore;
  }
  return lp;
}

// d logprob / d mean
inline VecX gaussian_logprob_grad_mean(const VecX& value, const VecX& mean,
                                       const VecX& sigma) {
  return (value - mean).cwiseQuotient(sigma.cwiseProduct(sigma));
}

// mean + sigma o eps with eps ~ N(0, I); the deterministic flag returns the
// mean exactly (test-time behavior).
inline VecX gaussian_sample(const VecX& mean, const VecX& sigma, Rng& rng,
                            bool deterministic = false) {
  if (deterministic) return mean;
  VecX out(mean.size());
  for (int i = 0; i < mean.size(); ++i)
    out[i] = mean[i] + sigma[i] * rng.normal();
  return out;
}

// ---------------------------------------------------------------------------
// Adam

class Adam {
 public:
  explicit Adam(double stepsize = 1e-3, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : lr_(stepsize), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<TensorRef> params) { step(std::move(params), lr_); }

  void step(std::vector<TensorRef> params, double stepsize) {
    if (m_.empty()) {
      for (const TensorRef& p : params) {
        m_.push_back(VecX::Zero(p.size));
        v_.push_back(VecX::Zero(p.size));
      }
    }
    if (m_.size() != params.size())
      throw ContractError("Adam: parameter list changed size");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t k = 0; k < params.size(); ++k) {
      TensorRef& p = params[k];
      if (m_[k].size() != p.size)
        throw ContractError("Adam: tensor size changed");
      for (long i = 0; i < p.size; ++i) {
        const double g = p.grad[i];
        m_[k][i] = beta1_ * m_[k][i] + (1.0 - beta1_) * g;
        v_[k][i] = beta2_ * v_[k][i] + (1.0 - beta2_) * g * g;
        const double m_hat = m_[k][i] / bc1;
        const double v_hat = v_[k][i] / bc2;
        p.value[i] -= stepsize * m_hat / (std::sqrt(v_hat) + eps_);
      }
    }
  }

  double stepsize() const { return lr_; }
  void set_stepsize(double lr) { lr_ = lr; }
  long step_count() const { return t_; }

  void append_tensors(Checkpoint& ck) const {
    for (const VecX& m : m_) ck.tensors.push_back(m);
    for (const VecX& v : v_) ck.tensors.push_back(v);
  }
  void read_tensors(const Checkpoint& ck, size_t& idx, size_t count,
                    long t) {
    m_.clear();
    v_.clear();
    for (size_t k = 0; k < count; ++k) m_.push_back(ck.tensors[idx++].col(0));
    for (size_t k = 0; k < count; ++k) v_.push_back(ck.tensors[idx++].col(0));
    t_ = t;
  }
  size_t slot_count() const { return m_.size(); }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<VecX> m_, v_;
};

}  // namespace rfc
