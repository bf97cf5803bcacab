#include "czlm/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace czlm::nn {

namespace {

// Gradient buffer of a parent, or nullptr when it does not take gradients.
double* grad_of(const Tensor& t) {
  if (!t.defined() || !t.requires_grad()) return nullptr;
  return t.node().ensure_grad().data();
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ShapeError(message);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shapes " + shape_string(a.shape()) + " and " +
                                      shape_string(b.shape()) + " differ");
}

void require_matrix(const Tensor& t, const char* op) {
  require(t.rank() == 2, std::string(op) + ": expected a matrix, got " + shape_string(t.shape()));
}

// c[m,n] += a[m,k] * b[k,n] (or b^T when b is (n,k)).
using ConstMat = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using Mat = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// c (m, n) += a (m, k) * b, where b is (k, n) or, transposed, (n, k).
void gemm(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n,
          bool transpose_b) {
  const auto M = static_cast<Eigen::Index>(m), K = static_cast<Eigen::Index>(k), N = static_cast<Eigen::Index>(n);
  Mat C(c, M, N);
  if (transpose_b)
    C.noalias() += ConstMat(a, M, K) * ConstMat(b, N, K).transpose();
  else
    C.noalias() += ConstMat(a, M, K) * ConstMat(b, K, N);
}

// c (k, n) += a^T g for a (m, k), g (m, n).
void gemm_at(const double* a, const double* g, double* c, std::size_t m, std::size_t k, std::size_t n) {
  const auto M = static_cast<Eigen::Index>(m), K = static_cast<Eigen::Index>(k), N = static_cast<Eigen::Index>(n);
  Mat(c, K, N).noalias() += ConstMat(a, M, K).transpose() * ConstMat(g, M, N);
}

template <class F, class D>
Tensor unary(const Tensor& x, F f, D derivative) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i]);
  return make_op(x.shape(), std::move(out), {x}, [x, derivative](detail::Node& self) {
    double* gx = grad_of(x);
    if (!gx) return;
    const auto xv = x.values();
    for (std::size_t i = 0; i < self.grad.size(); ++i) gx[i] += self.grad[i] * derivative(xv[i], self.value[i]);
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return make_op(a.shape(), std::move(out), {a, b}, [a, b](detail::Node& self) {
    for (const Tensor* t : {&a, &b})
      if (double* g = grad_of(*t))
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return make_op(a.shape(), std::move(out), {a, b}, [a, b](detail::Node& self) {
    if (double* g = grad_of(a))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    if (double* g = grad_of(b))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return make_op(a.shape(), std::move(out), {a, b}, [a, b](detail::Node& self) {
    if (double* g = grad_of(a))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * b[i];
    if (double* g = grad_of(b))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * a[i];
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * factor;
  return make_op(a.shape(), std::move(out), {a}, [a, factor](detail::Node& self) {
    if (double* g = grad_of(a))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * factor;
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  require(shape_size(shape) == a.size(), "reshape: " + shape_string(a.shape()) + " -> " + shape_string(shape));
  std::vector<double> out(a.values().begin(), a.values().end());
  return make_op(std::move(shape), std::move(out), {a}, [a](detail::Node& self) {
    if (double* g = grad_of(a))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  require_matrix(x, "add_bias");
  const std::size_t n = x.dim(0), d = x.dim(1);
  require(bias.size() == d, "add_bias: bias size mismatch");
  std::vector<double> out(x.values().begin(), x.values().end());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] += bias[j];
  return make_op(x.shape(), std::move(out), {x, bias}, [x, bias, n, d](detail::Node& self) {
    if (double* g = grad_of(x))
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
    if (double* g = grad_of(bias))
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) g[j] += self.grad[i * d + j];
  });
}

Tensor matmul(const Tensor& a, const Tensor& b, bool transpose_b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1);
  const std::size_t n = transpose_b ? b.dim(0) : b.dim(1);
  require((transpose_b ? b.dim(1) : b.dim(0)) == k,
          "matmul: inner dimensions of " + shape_string(a.shape()) + " and " + shape_string(b.shape()) + " differ");
  std::vector<double> out(m * n, 0.0);
  gemm(a.values().data(), b.values().data(), out.data(), m, k, n, transpose_b);
  return make_op({m, n}, std::move(out), {a, b}, [a, b, m, k, n, transpose_b](detail::Node& self) {
    const double* g = self.grad.data();
    if (double* ga = grad_of(a)) {
      // dA = G B^T (or G B when b is stored transposed)
      gemm(g, b.values().data(), ga, m, n, k, !transpose_b);
    }
    if (double* gb = grad_of(b)) {
      // dB = A^T G, or (A^T G)^T = G^T A when b is stored transposed
      if (!transpose_b)
        gemm_at(a.values().data(), g, gb, m, k, n);
      else
        gemm_at(g, a.values().data(), gb, m, n, k);
    }
  });
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  auto y = matmul(x, weight);
  return bias.defined() ? add_bias(y, bias) : y;
}

Tensor gelu(const Tensor& x) {
  constexpr double c = 0.7978845608028654;  // sqrt(2/pi)
  return unary(
      x,
      [](double v) { return 0.5 * v * (1.0 + std::tanh(c * (v + 0.044715 * v * v * v))); },
      [](double v, double) {
        const double inner = c * (v + 0.044715 * v * v * v);
        const double t = std::tanh(inner);
        const double dinner = c * (1.0 + 3.0 * 0.044715 * v * v);
        return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * dinner;
      });
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); }, [](double, double y) { return y * (1.0 - y); });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return make_op({}, {s}, {x}, [x](detail::Node& self) {
    if (double* g = grad_of(x))
      for (std::size_t i = 0; i < x.size(); ++i) g[i] += self.grad[0];
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.size())); }

Tensor embedding(const Tensor& table, const std::vector<int>& ids) {
  require_matrix(table, "embedding");
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<double> out(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab)
      throw std::out_of_range("embedding id " + std::to_string(ids[i]) + " outside table of " + std::to_string(vocab));
    std::copy_n(table.values().begin() + static_cast<std::ptrdiff_t>(ids[i] * d), d, out.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return make_op({ids.size(), d}, std::move(out), {table}, [table, ids, d](detail::Node& self) {
    if (double* g = grad_of(table))
      for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) g[static_cast<std::size_t>(ids[i]) * d + j] += self.grad[i * d + j];
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  const std::size_t n = parts[0].dim(0);
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_matrix(p, "concat_cols");
    require(p.dim(0) == n, "concat_cols: row counts differ");
    total += p.dim(1);
  }
  std::vector<double> out(n * total);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.dim(1);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < w; ++j) out[i * total + offset + j] = p[i * w + j];
    offset += w;
  }
  return make_op({n, total}, std::move(out), parts, [parts, n, total](detail::Node& self) {
    std::size_t offset = 0;
    for (const auto& p : parts) {
      const std::size_t w = p.dim(1);
      if (double* g = grad_of(p))
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < w; ++j) g[i * w + j] += self.grad[i * total + offset + j];
      offset += w;
    }
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  const std::size_t d = parts[0].dim(1);
  std::size_t rows = 0;
  for (const auto& p : parts) {
    require_matrix(p, "concat_rows");
    require(p.dim(1) == d, "concat_rows: column counts differ");
    rows += p.dim(0);
  }
  std::vector<double> out;
  out.reserve(rows * d);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  return make_op({rows, d}, std::move(out), parts, [parts](detail::Node& self) {
    std::size_t offset = 0;
    for (const auto& p : parts) {
      if (double* g = grad_of(p))
        for (std::size_t i = 0; i < p.size(); ++i) g[i] += self.grad[offset + i];
      offset += p.size();
    }
  });
}

Tensor slice_rows(const Tensor& x, std::size_t start, std::size_t count) {
  require_matrix(x, "slice_rows");
  require(start + count <= x.dim(0), "slice_rows: range beyond tensor");
  std::vector<std::size_t> rows(count);
  for (std::size_t i = 0; i < count; ++i) rows[i] = start + i;
  return gather_rows(x, rows);
}

Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& rows) {
  require_matrix(x, "gather_rows");
  const std::size_t d = x.dim(1);
  std::vector<double> out(rows.size() * d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < x.dim(0), "gather_rows: row index out of range");
    std::copy_n(x.values().begin() + static_cast<std::ptrdiff_t>(rows[i] * d), d, out.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return make_op({rows.size(), d}, std::move(out), {x}, [x, rows, d](detail::Node& self) {
    if (double* g = grad_of(x))
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) g[rows[i] * d + j] += self.grad[i * d + j];
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  require_matrix(x, "layer_norm");
  const std::size_t n = x.dim(0), d = x.dim(1);
  require(d >= 1, "layer_norm: empty last dimension");
  require(gain.size() == d && bias.size() == d, "layer_norm: gain/bias size mismatch");
  std::vector<double> xhat(n * d), inv_std(n), out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.values().data() + i * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      xhat[i * d + j] = (row[j] - mu) * inv_std[i];
      out[i * d + j] = xhat[i * d + j] * gain[j] + bias[j];
    }
  }
  return make_op(x.shape(), std::move(out), {x, gain, bias},
                 [x, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std), n, d](detail::Node& self) {
                   const double* g = self.grad.data();
                   if (double* gg = grad_of(gain))
                     for (std::size_t i = 0; i < n; ++i)
                       for (std::size_t j = 0; j < d; ++j) gg[j] += g[i * d + j] * xhat[i * d + j];
                   if (double* gb = grad_of(bias))
                     for (std::size_t i = 0; i < n; ++i)
                       for (std::size_t j = 0; j < d; ++j) gb[j] += g[i * d + j];
                   if (double* gx = grad_of(x)) {
                     const double dd = static_cast<double>(d);
                     for (std::size_t i = 0; i < n; ++i) {
                       double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                       for (std::size_t j = 0; j < d; ++j) {
                         const double dxh = g[i * d + j] * gain[j];
                         sum_dxhat += dxh;
                         sum_dxhat_xhat += dxh * xhat[i * d + j];
                       }
                       for (std::size_t j = 0; j < d; ++j) {
                         const double dxh = g[i * d + j] * gain[j];
                         gx[i * d + j] +=
                             inv_std[i] / dd * (dd * dxh - sum_dxhat - xhat[i * d + j] * sum_dxhat_xhat);
                       }
                     }
                   }
                 });
}

std::vector<double> softmax(const std::vector<double>& logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (out[i] = std::exp(logits[i] - mx));
  for (auto& v : out) v /= z;
  return out;
}

Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& targets) {
  require_matrix(logits, "softmax_cross_entropy");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  require(targets.size() == n, "softmax_cross_entropy: one target per row");
  std::size_t active = 0;
  for (int t : targets) {
    if (t == kIgnoreIndex) continue;
    require(t >= 0 && static_cast<std::size_t>(t) < c, "softmax_cross_entropy: target out of range");
    ++active;
  }
  std::vector<double> probs(n * c, 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] == kIgnoreIndex) continue;
    const double* row = logits.values().data() + i * c;
    const double mx = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += (probs[i * c + j] = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] /= z;
    loss += mx + std::log(z) - row[targets[i]];
  }
  const double norm = active ? 1.0 / static_cast<double>(active) : 0.0;
  return make_op({}, {loss * norm}, {logits},
                 [logits, targets, probs = std::move(probs), n, c, norm](detail::Node& self) {
                   double* g = grad_of(logits);
                   if (!g) return;
                   const double up = self.grad[0] * norm;
                   for (std::size_t i = 0; i < n; ++i) {
                     if (targets[i] == kIgnoreIndex) continue;
                     for (std::size_t j = 0; j < c; ++j) g[i * c + j] += up * probs[i * c + j];
                     g[i * c + static_cast<std::size_t>(targets[i])] -= up;
                   }
                 });
}

Tensor attention(const Tensor& qkv, std::size_t batch, std::size_t seq, std::size_t heads,
                 const std::vector<std::size_t>& lengths, std::vector<double>* probs_out) {
  require_matrix(qkv, "attention");
  require(qkv.dim(0) == batch * seq, "attention: row count must be batch*seq");
  require(qkv.dim(1) % 3 == 0, "attention: expected packed q,k,v columns");
  const std::size_t d = qkv.dim(1) / 3;
  require(heads > 0 && d % heads == 0, "attention: hidden size not divisible by heads");
  require(lengths.size() == batch, "attention: one length per batch row");
  const std::size_t hd = d / heads;
  const double scale_factor = 1.0 / std::sqrt(static_cast<double>(hd));
  const std::size_t w = 3 * d;
  const double* in = qkv.values().data();

  std::vector<double> probs(batch * heads * seq * seq, 0.0);
  std::vector<double> out(batch * seq * d, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t len = std::min(lengths[b], seq);
    require(len >= 1, "attention: empty sequence");
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < seq; ++i) {
        double* p = probs.data() + ((b * heads + h) * seq + i) * seq;
        const double* q = in + (b * seq + i) * w + h * hd;
        double mx = -INFINITY;
        for (std::size_t j = 0; j < len; ++j) {
          const double* k = in + (b * seq + j) * w + d + h * hd;
          double s = 0.0;
          for (std::size_t t = 0; t < hd; ++t) s += q[t] * k[t];
          p[j] = s * scale_factor;
          mx = std::max(mx, p[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < len; ++j) z += (p[j] = std::exp(p[j] - mx));
        for (std::size_t j = 0; j < len; ++j) p[j] /= z;
        double* o = out.data() + (b * seq + i) * d + h * hd;
        for (std::size_t j = 0; j < len; ++j) {
          const double* v = in + (b * seq + j) * w + 2 * d + h * hd;
          for (std::size_t t = 0; t < hd; ++t) o[t] += p[j] * v[t];
        }
      }
    }
  }
  if (probs_out) *probs_out = probs;
  return make_op({batch * seq, d}, std::move(out), {qkv},
                 [qkv, probs = std::move(probs), batch, seq, heads, lengths, d, hd, w,
                  scale_factor](detail::Node& self) {
                   double* g = grad_of(qkv);
                   if (!g) return;
                   const double* in = qkv.values().data();
                   std::vector<double> dp(seq);
                   for (std::size_t b = 0; b < batch; ++b) {
                     const std::size_t len = std::min(lengths[b], seq);
                     for (std::size_t h = 0; h < heads; ++h)
                       for (std::size_t i = 0; i < seq; ++i) {
                         const double* p = probs.data() + ((b * heads + h) * seq + i) * seq;
                         const double* go = self.grad.data() + (b * seq + i) * d + h * hd;
                         double dot = 0.0;
                         for (std::size_t j = 0; j < len; ++j) {
                           const double* v = in + (b * seq + j) * w + 2 * d + h * hd;
                           double* gv = g + (b * seq + j) * w + 2 * d + h * hd;
                           double s = 0.0;
                           for (std::size_t t = 0; t < hd; ++t) {
                             s += go[t] * v[t];
                             gv[t] += p[j] * go[t];
                           }
                           dp[j] = s;
                           dot += p[j] * s;
                         }
                         const double* q = in + (b * seq + i) * w + h * hd;
                         double* gq = g + (b * seq + i) * w + h * hd;
                         for (std::size_t j = 0; j < len; ++j) {
                           const double ds = p[j] * (dp[j] - dot) * scale_factor;
                           if (ds == 0.0) continue;
                           const double* k = in + (b * seq + j) * w + d + h * hd;
                           double* gk = g + (b * seq + j) * w + d + h * hd;
                           for (std::size_t t = 0; t < hd; ++t) {
                             gq[t] += ds * k[t];
                             gk[t] += ds * q[t];
                           }
                         }
                       }
                   }
                 });
}

Tensor scalar_mix(const std::vector<Tensor>& layers, const Tensor& mix_logits, const Tensor& gamma) {
  require(!layers.empty(), "scalar_mix: no layers");
  require(mix_logits.size() == layers.size(), "scalar_mix: one mixing logit per layer");
  require(gamma.size() == 1, "scalar_mix: gamma must be a single value");
  for (const auto& l : layers) require_same_shape(l, layers[0], "scalar_mix");
  const std::size_t count = layers.size(), n = layers[0].size();
  const auto weights = softmax(std::vector<double>(mix_logits.values().begin(), mix_logits.values().end()));
  const double g0 = gamma[0];
  std::vector<double> mixed(n, 0.0);
  for (std::size_t l = 0; l < count; ++l)
    for (std::size_t i = 0; i < n; ++i) mixed[i] += weights[l] * layers[l][i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = g0 * mixed[i];

  std::vector<Tensor> parents = layers;
  parents.push_back(mix_logits);
  parents.push_back(gamma);
  return make_op(layers[0].shape(), std::move(out), parents,
                 [layers, mix_logits, gamma, weights, mixed = std::move(mixed), g0, count, n](detail::Node& self) {
                   const double* go = self.grad.data();
                   if (double* gg = grad_of(gamma)) {
                     double s = 0.0;
                     for (std::size_t i = 0; i < n; ++i) s += go[i] * mixed[i];
                     gg[0] += s;
                   }
                   std::vector<double> dots(count, 0.0);
                   for (std::size_t l = 0; l < count; ++l) {
                     for (std::size_t i = 0; i < n; ++i) dots[l] += go[i] * layers[l][i];
                     if (double* gl = grad_of(layers[l]))
                       for (std::size_t i = 0; i < n; ++i) gl[i] += g0 * weights[l] * go[i];
                   }
                   if (double* gm = grad_of(mix_logits)) {
                     double avg = 0.0;
                     for (std::size_t l = 0; l < count; ++l) avg += weights[l] * dots[l];
                     for (std::size_t l = 0; l < count; ++l) gm[l] += g0 * weights[l] * (dots[l] - avg);
                   }
                 });
}

Tensor pool_subwords(const Tensor& x, const std::vector<std::vector<std::size_t>>& groups) {
  require_matrix(x, "pool_subwords");
  const std::size_t d = x.dim(1);
  std::vector<double> out(groups.size() * d, 0.0);
  for (std::size_t t = 0; t < groups.size(); ++t) {
    if (groups[t].empty()) throw std::invalid_argument("pool_subwords: token " + std::to_string(t) + " has no subwords");
    for (std::size_t r : groups[t]) {
      require(r < x.dim(0), "pool_subwords: subword index out of range");
      for (std::size_t j = 0; j < d; ++j) out[t * d + j] += x[r * d + j];
    }
  }
  return make_op({groups.size(), d}, std::move(out), {x}, [x, groups, d](detail::Node& self) {
    if (double* g = grad_of(x))
      for (std::size_t t = 0; t < groups.size(); ++t)
        for (std::size_t r : groups[t])
          for (std::size_t j = 0; j < d; ++j) g[r * d + j] += self.grad[t * d + j];
  });
}

Tensor gru_sequence(const Tensor& xs, const Tensor& w_h, const Tensor& b_h, bool reverse) {
  require_matrix(xs, "gru_sequence");
  require_matrix(w_h, "gru_sequence");
  const std::size_t steps = xs.dim(0), h = w_h.dim(0);
  require(steps >= 1, "gru_sequence: empty sequence");
  require(xs.dim(1) == 3 * h && w_h.dim(1) == 3 * h && b_h.size() == 3 * h, "gru_sequence: gate sizes mismatch");

  // Per step: previous state, recurrent pre-activations, gates r, z and candidate n.
  std::vector<double> prev(steps * h), hh(steps * 3 * h), r(steps * h), z(steps * h), cand(steps * h);
  std::vector<double> out(steps * h, 0.0);
  std::vector<double> state(h, 0.0);
  const double* wv = w_h.values().data();
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = reverse ? steps - 1 - s : s;
    std::copy(state.begin(), state.end(), prev.begin() + static_cast<std::ptrdiff_t>(t * h));
    double* hht = hh.data() + t * 3 * h;
    for (std::size_t j = 0; j < 3 * h; ++j) hht[j] = b_h[j];
    gemm(state.data(), wv, hht, 1, h, 3 * h, false);
    const double* a = xs.values().data() + t * 3 * h;
    for (std::size_t j = 0; j < h; ++j) {
      const double rj = 1.0 / (1.0 + std::exp(-(a[j] + hht[j])));
      const double zj = 1.0 / (1.0 + std::exp(-(a[h + j] + hht[h + j])));
      const double nj = std::tanh(a[2 * h + j] + rj * hht[2 * h + j]);
      r[t * h + j] = rj;
      z[t * h + j] = zj;
      cand[t * h + j] = nj;
      state[j] = (1.0 - zj) * nj + zj * state[j];
      out[t * h + j] = state[j];
    }
  }
  return make_op({steps, h}, std::move(out), {xs, w_h, b_h},
                 [xs, w_h, b_h, prev = std::move(prev), hh = std::move(hh), r = std::move(r), z = std::move(z),
                  cand = std::move(cand), steps, h, reverse](detail::Node& self) {
                   double* gxs = grad_of(xs);
                   double* gw = grad_of(w_h);
                   double* gb = grad_of(b_h);
                   const double* wv = w_h.values().data();
                   std::vector<double> carry(h, 0.0), dh(h), dhh(3 * h);
                   for (std::size_t s = 0; s < steps; ++s) {
                     const std::size_t t = reverse ? s : steps - 1 - s;  // reverse of forward order
                     for (std::size_t j = 0; j < h; ++j) dh[j] = self.grad[t * h + j] + carry[j];
                     std::fill(carry.begin(), carry.end(), 0.0);
                     const double* hht = hh.data() + t * 3 * h;
                     for (std::size_t j = 0; j < h; ++j) {
                       const double rj = r[t * h + j], zj = z[t * h + j], nj = cand[t * h + j];
                       const double hp = prev[t * h + j];
                       const double dn = dh[j] * (1.0 - zj);
                       const double dz = dh[j] * (hp - nj);
                       carry[j] += dh[j] * zj;
                       const double dpre_n = dn * (1.0 - nj * nj);
                       const double dr = dpre_n * hht[2 * h + j];
                       const double dpre_r = dr * rj * (1.0 - rj);
                       const double dpre_z = dz * zj * (1.0 - zj);
                       dhh[j] = dpre_r;
                       dhh[h + j] = dpre_z;
                       dhh[2 * h + j] = dpre_n * rj;
                       if (gxs) {
                         gxs[t * 3 * h + j] += dpre_r;
                         gxs[t * 3 * h + h + j] += dpre_z;
                         gxs[t * 3 * h + 2 * h + j] += dpre_n;
                       }
                     }
                     if (gb)
                       for (std::size_t k = 0; k < 3 * h; ++k) gb[k] += dhh[k];
                     const double* hp = prev.data() + t * h;
                     if (gw)
                       for (std::size_t i = 0; i < h; ++i)
                         for (std::size_t k = 0; k < 3 * h; ++k) gw[i * 3 * h + k] += hp[i] * dhh[k];
                     for (std::size_t i = 0; i < h; ++i) {
                       double s2 = 0.0;
                       for (std::size_t k = 0; k < 3 * h; ++k) s2 += wv[i * 3 * h + k] * dhh[k];
                       carry[i] += s2;
                     }
                   }
                 });
}

}  // namespace czlm::nn
