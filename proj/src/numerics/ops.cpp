#include "sentiaug/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sentiaug::num {

namespace {

[[noreturn]] void shape_fail(std::string_view op, const std::string& what) {
  throw ShapeError(std::string(op) + ": " + what);
}

// Index mapping for an elementwise binary op with broadcasting.
struct Broadcast {
  enum class Mode { same, b_suffix, a_suffix, generic };
  Shape out;
  std::size_t n = 0, na = 0, nb = 0;
  Mode mode = Mode::same;
  std::vector<std::uint32_t> ia, ib;

  std::size_t a(std::size_t i) const {
    switch (mode) {
      case Mode::same:
      case Mode::b_suffix: return i;
      case Mode::a_suffix: return i % na;
      default: return ia[i];
    }
  }
  std::size_t b(std::size_t i) const {
    switch (mode) {
      case Mode::same:
      case Mode::a_suffix: return i;
      case Mode::b_suffix: return i % nb;
      default: return ib[i];
    }
  }
};

bool is_suffix_of(const Shape& small, const Shape& big) {
  // small (ignoring leading 1s) equals the trailing dims of big.
  std::size_t lead = 0;
  while (lead < small.size() && small[lead] == 1 && small.size() - lead > 0) ++lead;
  const std::size_t len = small.size() - lead;
  if (len > big.size()) return false;
  for (std::size_t i = 0; i < len; ++i) {
    if (small[lead + i] != big[big.size() - len + i]) return false;
  }
  return true;
}

Broadcast plan_broadcast(std::string_view op, const Shape& sa, const Shape& sb) {
  Broadcast bc;
  bc.na = shape_numel(sa);
  bc.nb = shape_numel(sb);
  if (sa == sb) {
    bc.out = sa;
    bc.n = bc.na;
    bc.mode = Broadcast::Mode::same;
    return bc;
  }
  const std::size_t r = std::max(sa.size(), sb.size());
  Shape pa(r, 1), pb(r, 1), out(r, 1);
  std::copy(sa.begin(), sa.end(), pa.begin() + static_cast<std::ptrdiff_t>(r - sa.size()));
  std::copy(sb.begin(), sb.end(), pb.begin() + static_cast<std::ptrdiff_t>(r - sb.size()));
  for (std::size_t i = 0; i < r; ++i) {
    if (pa[i] == pb[i] || pb[i] == 1) {
      out[i] = pa[i];
    } else if (pa[i] == 1) {
      out[i] = pb[i];
    } else {
      shape_fail(op, "cannot broadcast " + shape_str(sa) + " with " + shape_str(sb) +
                         " (dimension " + std::to_string(i) + ")");
    }
  }
  bc.out = out;
  bc.n = shape_numel(out);
  if (bc.na == bc.n && is_suffix_of(sb, out)) {
    bc.mode = Broadcast::Mode::b_suffix;
    return bc;
  }
  if (bc.nb == bc.n && is_suffix_of(sa, out)) {
    bc.mode = Broadcast::Mode::a_suffix;
    return bc;
  }
  bc.mode = Broadcast::Mode::generic;
  std::vector<std::size_t> stra(r, 0), strb(r, 0);
  std::size_t acc_a = 1, acc_b = 1;
  for (std::size_t i = r; i-- > 0;) {
    stra[i] = pa[i] == 1 ? 0 : acc_a;
    strb[i] = pb[i] == 1 ? 0 : acc_b;
    acc_a *= pa[i];
    acc_b *= pb[i];
  }
  bc.ia.resize(bc.n);
  bc.ib.resize(bc.n);
  std::vector<std::size_t> idx(r, 0);
  for (std::size_t i = 0; i < bc.n; ++i) {
    std::size_t oa = 0, ob = 0;
    for (std::size_t d = 0; d < r; ++d) {
      oa += idx[d] * stra[d];
      ob += idx[d] * strb[d];
    }
    bc.ia[i] = static_cast<std::uint32_t>(oa);
    bc.ib[i] = static_cast<std::uint32_t>(ob);
    for (std::size_t d = r; d-- > 0;) {
      if (++idx[d] < out[d]) break;
      idx[d] = 0;
    }
  }
  return bc;
}

std::size_t last_dim(const Tensor& x, std::string_view op) {
  if (x.rank() == 0) shape_fail(op, "rank-0 input");
  return x.shape().back();
}

template <typename F, typename DF>
Tensor unary(std::string op, const Tensor& x, F f, DF df_from_xy) {
  std::vector<double> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return make_result(std::move(op), x.shape(), std::move(out), {x},
                     [df_from_xy](Node& self) {
                       Node& p = *self.parents[0];
                       for (std::size_t i = 0; i < self.data.size(); ++i) {
                         p.grad[i] += self.grad[i] * df_from_xy(p.data[i], self.data[i]);
                       }
                     });
}

void softmax_rows(const double* x, double* y, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, x[j]);
  double z = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    y[j] = std::exp(x[j] - mx);
    z += y[j];
  }
  for (std::size_t j = 0; j < n; ++j) y[j] /= z;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  auto bc = plan_broadcast("add", a.shape(), b.shape());
  std::vector<double> out(bc.n);
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < bc.n; ++i) out[i] = da[bc.a(i)] + db[bc.b(i)];
  Shape shape = bc.out;
  return make_result("add", std::move(shape), std::move(out), {a, b},
                     [bc = std::move(bc)](Node& self) {
                       Node& pa = *self.parents[0];
                       Node& pb = *self.parents[1];
                       if (pa.requires_grad)
                         for (std::size_t i = 0; i < bc.n; ++i) pa.grad[bc.a(i)] += self.grad[i];
                       if (pb.requires_grad)
                         for (std::size_t i = 0; i < bc.n; ++i) pb.grad[bc.b(i)] += self.grad[i];
                     });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  auto bc = plan_broadcast("sub", a.shape(), b.shape());
  std::vector<double> out(bc.n);
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < bc.n; ++i) out[i] = da[bc.a(i)] - db[bc.b(i)];
  Shape shape = bc.out;
  return make_result("sub", std::move(shape), std::move(out), {a, b},
                     [bc = std::move(bc)](Node& self) {
                       Node& pa = *self.parents[0];
                       Node& pb = *self.parents[1];
                       if (pa.requires_grad)
                         for (std::size_t i = 0; i < bc.n; ++i) pa.grad[bc.a(i)] += self.grad[i];
                       if (pb.requires_grad)
                         for (std::size_t i = 0; i < bc.n; ++i) pb.grad[bc.b(i)] -= self.grad[i];
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  auto bc = plan_broadcast("mul", a.shape(), b.shape());
  std::vector<double> out(bc.n);
  const auto da = a.data();
  const auto db = b.data();
  for (std::size_t i = 0; i < bc.n; ++i) out[i] = da[bc.a(i)] * db[bc.b(i)];
  Shape shape = bc.out;
  return make_result("mul", std::move(shape), std::move(out), {a, b},
                     [bc = std::move(bc)](Node& self) {
                       Node& pa = *self.parents[0];
                       Node& pb = *self.parents[1];
                       if (pa.requires_grad)
                         for (std::size_t i = 0; i < bc.n; ++i)
                           pa.grad[bc.a(i)] += self.grad[i] * pb.data[bc.b(i)];
                       if (pb.requires_grad)
                         for (std::size_t i = 0; i < bc.n; ++i)
                           pb.grad[bc.b(i)] += self.grad[i] * pa.data[bc.a(i)];
                     });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (auto& v : out) v *= factor;
  return make_result("scale", a.shape(), std::move(out), {a}, [factor](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += factor * self.grad[i];
  });
}

Tensor add_scalar(const Tensor& a, double value) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (auto& v : out) v += value;
  return make_result("add_scalar", a.shape(), std::move(out), {a}, [](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    shape_fail("matmul", "expects rank-2 operands, got " + shape_str(a.shape()) + " and " +
                             shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    shape_fail("matmul", "inner dimensions differ: " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  const double* A = a.data().data();
  const double* B = b.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* c = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      const double* brow = B + p * n;
      for (std::size_t j = 0; j < n; ++j) c[j] += av * brow[j];
    }
  }
  return make_result("matmul", {m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const double* G = self.grad.data();
    if (pa.requires_grad) {
      const double* B = pb.data.data();
      for (std::size_t i = 0; i < m; ++i) {
        const double* g = G + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = B + p * n;
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[j] * brow[j];
          pa.grad[i * k + p] += acc;
        }
      }
    }
    if (pb.requires_grad) {
      const double* A = pa.data.data();
      for (std::size_t i = 0; i < m; ++i) {
        const double* g = G + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double av = A[i * k + p];
          if (av == 0.0) continue;
          double* gb = pb.grad.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) gb[j] += av * g[j];
        }
      }
    }
  });
}

Tensor tanh(const Tensor& x) {
  return unary("tanh", x, [](double v) { return std::tanh(v); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(const Tensor& x) {
  return unary("sigmoid", x,
               [](double v) {
                 if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
                 const double e = std::exp(v);
                 return e / (1.0 + e);
               },
               [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& x) {
  return unary("relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor exp(const Tensor& x) {
  return unary("exp", x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  return unary("log", x, [](double v) { return std::log(v); },
               [](double v, double) { return 1.0 / v; });
}

Tensor log_sigmoid(const Tensor& x) {
  return unary("log_sigmoid", x,
               [](double v) { return std::min(v, 0.0) - std::log1p(std::exp(-std::abs(v))); },
               [](double v, double) {
                 // d/dv log(sigmoid(v)) = sigmoid(-v)
                 if (v >= 0) {
                   const double e = std::exp(-v);
                   return e / (1.0 + e);
                 }
                 return 1.0 / (1.0 + std::exp(v));
               });
}

Tensor softmax(const Tensor& x) {
  const std::size_t n = last_dim(x, "softmax");
  const std::size_t rows = x.numel() / n;
  std::vector<double> out(x.numel());
  for (std::size_t r = 0; r < rows; ++r) softmax_rows(x.data().data() + r * n, out.data() + r * n, n);
  return make_result("softmax", x.shape(), std::move(out), {x}, [n, rows](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.data.data() + r * n;
      const double* g = self.grad.data() + r * n;
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += g[j] * y[j];
      for (std::size_t j = 0; j < n; ++j) p.grad[r * n + j] += y[j] * (g[j] - dot);
    }
  });
}

Tensor log_softmax(const Tensor& x) {
  const std::size_t n = last_dim(x, "log_softmax");
  const std::size_t rows = x.numel() / n;
  std::vector<double> out(x.numel());
  const double* in = x.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = in + r * n;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) mx = std::max(mx, xr[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(xr[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < n; ++j) out[r * n + j] = xr[j] - lse;
  }
  return make_result("log_softmax", x.shape(), std::move(out), {x}, [n, rows](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.data.data() + r * n;
      const double* g = self.grad.data() + r * n;
      double gsum = 0.0;
      for (std::size_t j = 0; j < n; ++j) gsum += g[j];
      for (std::size_t j = 0; j < n; ++j) p.grad[r * n + j] += g[j] - std::exp(y[j]) * gsum;
    }
  });
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> ids) {
  if (table.rank() != 2) shape_fail("embedding_lookup", "table must be rank 2, got " + shape_str(table.shape()));
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<double> out(ids.size() * d);
  const double* T = table.data().data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      shape_fail("embedding_lookup", "id " + std::to_string(ids[i]) + " outside table of " +
                                         std::to_string(vocab) + " rows");
    }
    std::copy_n(T + static_cast<std::size_t>(ids[i]) * d, d, out.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  std::vector<int> idv(ids.begin(), ids.end());
  return make_result("embedding_lookup", {ids.size(), d}, std::move(out), {table},
                     [idv = std::move(idv), d](Node& self) {
                       Node& p = *self.parents[0];
                       for (std::size_t i = 0; i < idv.size(); ++i) {
                         double* g = p.grad.data() + static_cast<std::size_t>(idv[i]) * d;
                         const double* s = self.grad.data() + i * d;
                         for (std::size_t j = 0; j < d; ++j) g[j] += s[j];
                       }
                     });
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) shape_fail("concat", "no inputs");
  const Shape& first = parts[0].shape();
  const std::size_t rows = parts[0].numel() / last_dim(parts[0], "concat");
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    const auto& s = p.shape();
    if (s.size() != first.size() || !std::equal(s.begin(), s.end() - 1, first.begin())) {
      shape_fail("concat", "leading dimensions differ: " + shape_str(first) + " vs " + shape_str(s));
    }
    widths.push_back(s.back());
    total += s.back();
  }
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const double* src = parts[k].data().data();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(src + r * widths[k], widths[k], out.begin() + static_cast<std::ptrdiff_t>(r * total + offset));
    }
    offset += widths[k];
  }
  Shape shape = first;
  shape.back() = total;
  return make_result("concat", std::move(shape), std::move(out), parts,
                     [widths, rows, total](Node& self) {
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < widths.size(); ++k) {
                         Node& p = *self.parents[k];
                         if (p.requires_grad) {
                           for (std::size_t r = 0; r < rows; ++r)
                             for (std::size_t j = 0; j < widths[k]; ++j)
                               p.grad[r * widths[k] + j] += self.grad[r * total + off + j];
                         }
                         off += widths[k];
                       }
                     });
}

Tensor slice_last(const Tensor& x, std::size_t start, std::size_t len) {
  const std::size_t n = last_dim(x, "slice_last");
  if (start + len > n || len == 0) {
    shape_fail("slice_last", "columns [" + std::to_string(start) + "," + std::to_string(start + len) +
                                 ") out of range for " + shape_str(x.shape()));
  }
  const std::size_t rows = x.numel() / n;
  std::vector<double> out(rows * len);
  const double* in = x.data().data();
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(in + r * n + start, len, out.begin() + static_cast<std::ptrdiff_t>(r * len));
  Shape shape = x.shape();
  shape.back() = len;
  return make_result("slice_last", std::move(shape), std::move(out), {x}, [n, rows, start, len](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t j = 0; j < len; ++j) p.grad[r * n + start + j] += self.grad[r * len + j];
  });
}

Tensor stack_steps(const std::vector<Tensor>& steps) {
  if (steps.empty()) shape_fail("stack_steps", "no inputs");
  if (steps[0].rank() != 2) shape_fail("stack_steps", "steps must be rank 2, got " + shape_str(steps[0].shape()));
  const std::size_t B = steps[0].dim(0), C = steps[0].dim(1), T = steps.size();
  for (const auto& s : steps) {
    if (s.shape() != steps[0].shape()) {
      shape_fail("stack_steps", "step shapes differ: " + shape_str(steps[0].shape()) + " vs " + shape_str(s.shape()));
    }
  }
  std::vector<double> out(B * T * C);
  for (std::size_t t = 0; t < T; ++t) {
    const double* src = steps[t].data().data();
    for (std::size_t b = 0; b < B; ++b) std::copy_n(src + b * C, C, out.begin() + static_cast<std::ptrdiff_t>((b * T + t) * C));
  }
  return make_result("stack_steps", {B, T, C}, std::move(out), steps, [B, T, C](Node& self) {
    for (std::size_t t = 0; t < T; ++t) {
      Node& p = *self.parents[t];
      if (!p.requires_grad) continue;
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c) p.grad[b * C + c] += self.grad[(b * T + t) * C + c];
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    shape_fail("reshape", "cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return make_result("reshape", std::move(shape), std::move(out), {x}, [](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
  });
}

Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  const bool batched = input.rank() == 3;
  if (!batched && input.rank() != 2) shape_fail("conv1d", "input must be [B,T,C] or [T,C], got " + shape_str(input.shape()));
  const std::size_t B = batched ? input.dim(0) : 1;
  const std::size_t T = batched ? input.dim(1) : input.dim(0);
  const std::size_t C = input.shape().back();
  if (weight.rank() != 2 || weight.dim(0) % C != 0 || weight.dim(0) == 0) {
    shape_fail("conv1d", "weight " + shape_str(weight.shape()) + " is not [K*" + std::to_string(C) + ",F]");
  }
  const std::size_t K = weight.dim(0) / C, F = weight.dim(1);
  if (bias.numel() != F) shape_fail("conv1d", "bias " + shape_str(bias.shape()) + " does not match " + std::to_string(F) + " filters");
  if (T < K) shape_fail("conv1d", "sequence length " + std::to_string(T) + " shorter than kernel width " + std::to_string(K));
  const std::size_t To = T - K + 1, KC = K * C;
  std::vector<double> out(B * To * F);
  const double* X = input.data().data();
  const double* W = weight.data().data();
  const double* bv = bias.data().data();
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t t = 0; t < To; ++t) {
      double* o = out.data() + (b * To + t) * F;
      std::copy_n(bv, F, o);
      const double* xw = X + (b * T + t) * C;
      for (std::size_t j = 0; j < KC; ++j) {
        const double xv = xw[j];
        if (xv == 0.0) continue;
        const double* wr = W + j * F;
        for (std::size_t f = 0; f < F; ++f) o[f] += xv * wr[f];
      }
    }
  }
  Shape shape = batched ? Shape{B, To, F} : Shape{To, F};
  return make_result("conv1d", std::move(shape), std::move(out), {input, weight, bias},
                     [B, T, C, To, KC, F](Node& self) {
                       Node& px = *self.parents[0];
                       Node& pw = *self.parents[1];
                       Node& pb = *self.parents[2];
                       for (std::size_t b = 0; b < B; ++b) {
                         for (std::size_t t = 0; t < To; ++t) {
                           const double* g = self.grad.data() + (b * To + t) * F;
                           const std::size_t xoff = (b * T + t) * C;
                           if (pb.requires_grad)
                             for (std::size_t f = 0; f < F; ++f) pb.grad[f] += g[f];
                           for (std::size_t j = 0; j < KC; ++j) {
                             const double* wr = pw.data.data() + j * F;
                             if (px.requires_grad) {
                               double acc = 0.0;
                               for (std::size_t f = 0; f < F; ++f) acc += wr[f] * g[f];
                               px.grad[xoff + j] += acc;
                             }
                             if (pw.requires_grad) {
                               const double xv = px.data[xoff + j];
                               if (xv == 0.0) continue;
                               double* gw = pw.grad.data() + j * F;
                               for (std::size_t f = 0; f < F; ++f) gw[f] += xv * g[f];
                             }
                           }
                         }
                       }
                     });
}

Tensor max_pool_over_time(const Tensor& x) {
  const bool batched = x.rank() == 3;
  if (!batched && x.rank() != 2) shape_fail("max_pool_over_time", "input must be [B,T,F] or [T,F], got " + shape_str(x.shape()));
  const std::size_t B = batched ? x.dim(0) : 1;
  const std::size_t T = batched ? x.dim(1) : x.dim(0);
  const std::size_t F = x.shape().back();
  if (T == 0) shape_fail("max_pool_over_time", "empty time axis");
  std::vector<double> out(B * F);
  std::vector<std::uint32_t> arg(B * F);
  const double* X = x.data().data();
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t f = 0; f < F; ++f) {
      std::size_t best = 0;
      double bv = X[(b * T) * F + f];
      for (std::size_t t = 1; t < T; ++t) {
        const double v = X[(b * T + t) * F + f];
        if (v > bv) {
          bv = v;
          best = t;
        }
      }
      out[b * F + f] = bv;
      arg[b * F + f] = static_cast<std::uint32_t>(best);
    }
  }
  return make_result("max_pool_over_time", {B, F}, std::move(out), {x},
                     [arg = std::move(arg), B, T, F](Node& self) {
                       Node& p = *self.parents[0];
                       for (std::size_t b = 0; b < B; ++b)
                         for (std::size_t f = 0; f < F; ++f)
                           p.grad[(b * T + arg[b * F + f]) * F + f] += self.grad[b * F + f];
                     });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  return make_result("sum", {1}, {s}, {x}, [](Node& self) {
    Node& p = *self.parents[0];
    for (auto& g : p.grad) g += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) shape_fail("mean", "empty input");
  double s = 0.0;
  for (double v : x.data()) s += v;
  const double n = static_cast<double>(x.numel());
  return make_result("mean", {1}, {s / n}, {x}, [n](Node& self) {
    Node& p = *self.parents[0];
    for (auto& g : p.grad) g += self.grad[0] / n;
  });
}

Tensor pick(const Tensor& x, std::span<const int> ids) {
  if (x.rank() != 2 || x.dim(0) != ids.size()) {
    shape_fail("pick", "expects [B,V] with B=" + std::to_string(ids.size()) + ", got " + shape_str(x.shape()));
  }
  const std::size_t V = x.dim(1);
  std::vector<double> out(ids.size());
  for (std::size_t b = 0; b < ids.size(); ++b) {
    if (ids[b] < 0 || static_cast<std::size_t>(ids[b]) >= V) shape_fail("pick", "id " + std::to_string(ids[b]) + " out of range");
    out[b] = x.data()[b * V + static_cast<std::size_t>(ids[b])];
  }
  std::vector<int> idv(ids.begin(), ids.end());
  return make_result("pick", {ids.size()}, std::move(out), {x}, [idv = std::move(idv), V](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t b = 0; b < idv.size(); ++b) p.grad[b * V + static_cast<std::size_t>(idv[b])] += self.grad[b];
  });
}

Tensor weighted_cross_entropy(const Tensor& logits, std::span<const int> targets,
                              std::span<const double> weights) {
  if (logits.rank() != 2 || logits.dim(0) != targets.size() || weights.size() != targets.size()) {
    shape_fail("cross_entropy", "logits " + shape_str(logits.shape()) + " vs " + std::to_string(targets.size()) +
                                    " targets / " + std::to_string(weights.size()) + " weights");
  }
  const std::size_t B = logits.dim(0), V = logits.dim(1);
  std::vector<double> probs(B * V);
  double loss = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    if (targets[b] < 0 || static_cast<std::size_t>(targets[b]) >= V) {
      shape_fail("cross_entropy", "target " + std::to_string(targets[b]) + " outside " + std::to_string(V) + " classes");
    }
    const double* x = logits.data().data() + b * V;
    double* pr = probs.data() + b * V;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < V; ++j) mx = std::max(mx, x[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < V; ++j) {
      pr[j] = std::exp(x[j] - mx);
      z += pr[j];
    }
    for (std::size_t j = 0; j < V; ++j) pr[j] /= z;
    if (weights[b] != 0.0) {
      loss += weights[b] * -(x[static_cast<std::size_t>(targets[b])] - mx - std::log(z));
    }
  }
  std::vector<int> tv(targets.begin(), targets.end());
  std::vector<double> wv(weights.begin(), weights.end());
  return make_result("cross_entropy", {1}, {loss}, {logits},
                     [probs = std::move(probs), tv = std::move(tv), wv = std::move(wv), B, V](Node& self) {
                       Node& p = *self.parents[0];
                       const double g = self.grad[0];
                       for (std::size_t b = 0; b < B; ++b) {
                         if (wv[b] == 0.0) continue;
                         const double s = g * wv[b];
                         for (std::size_t j = 0; j < V; ++j) p.grad[b * V + j] += s * probs[b * V + j];
                         p.grad[b * V + static_cast<std::size_t>(tv[b])] -= s;
                       }
                     });
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> targets) {
  if (targets.empty()) shape_fail("cross_entropy", "empty batch");
  std::vector<double> w(targets.size(), 1.0 / static_cast<double>(targets.size()));
  return weighted_cross_entropy(logits, targets, w);
}

Tensor gumbel_softmax_with_noise(const Tensor& logits, const std::vector<double>& noise,
                                 double temperature, bool hard) {
  if (!(temperature > 0.0)) throw std::invalid_argument("gumbel_softmax: temperature must be > 0");
  if (noise.size() != logits.numel()) {
    shape_fail("gumbel_softmax", "noise has " + std::to_string(noise.size()) + " values for logits " + shape_str(logits.shape()));
  }
  const std::size_t n = last_dim(logits, "gumbel_softmax");
  const std::size_t rows = logits.numel() / n;
  std::vector<double> perturbed(logits.numel());
  for (std::size_t i = 0; i < perturbed.size(); ++i) perturbed[i] = (logits.data()[i] + noise[i]) / temperature;
  std::vector<double> out(logits.numel());
  for (std::size_t r = 0; r < rows; ++r) softmax_rows(perturbed.data() + r * n, out.data() + r * n, n);
  const double inv_t = 1.0 / temperature;
  Tensor soft = make_result("gumbel_softmax", logits.shape(), std::move(out), {logits},
                            [n, rows, inv_t](Node& self) {
                              Node& p = *self.parents[0];
                              for (std::size_t r = 0; r < rows; ++r) {
                                const double* y = self.data.data() + r * n;
                                const double* g = self.grad.data() + r * n;
                                double dot = 0.0;
                                for (std::size_t j = 0; j < n; ++j) dot += g[j] * y[j];
                                for (std::size_t j = 0; j < n; ++j) p.grad[r * n + j] += inv_t * y[j] * (g[j] - dot);
                              }
                            });
  return hard ? straight_through_onehot(soft) : soft;
}

Tensor gumbel_softmax(const Tensor& logits, double temperature, bool hard, Rng& rng) {
  if (!(temperature > 0.0)) throw std::invalid_argument("gumbel_softmax: temperature must be > 0");
  std::vector<double> noise(logits.numel());
  for (auto& g : noise) g = rng.gumbel();
  return gumbel_softmax_with_noise(logits, noise, temperature, hard);
}

Tensor gumbel_softmax(const Tensor& logits, double temperature, bool hard, std::uint64_t seed) {
  Rng rng(seed);
  return gumbel_softmax(logits, temperature, hard, rng);
}

Tensor straight_through_onehot(const Tensor& soft) {
  const std::size_t n = last_dim(soft, "straight_through_onehot");
  const std::size_t rows = soft.numel() / n;
  std::vector<double> out(soft.numel(), 0.0);
  const double* y = soft.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = y + r * n;
    out[r * n + static_cast<std::size_t>(std::max_element(row, row + n) - row)] = 1.0;
  }
  return make_result("straight_through", soft.shape(), std::move(out), {soft}, [](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
  });
}

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::mul: return "mul";
    case OpKind::tanh: return "tanh";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::relu: return "relu";
    case OpKind::softmax: return "softmax";
    case OpKind::log: return "log";
    case OpKind::embedding_lookup: return "embedding_lookup";
    case OpKind::concat: return "concat";
    case OpKind::conv1d: return "conv1d";
    case OpKind::max_pool_over_time: return "max_pool_over_time";
    case OpKind::mean: return "mean";
  }
  return "?";
}

const std::vector<OpKind>& all_op_kinds() {
  static const std::vector<OpKind> kinds = {
      OpKind::matmul, OpKind::add,     OpKind::mul,    OpKind::tanh,
      OpKind::sigmoid, OpKind::relu,   OpKind::softmax, OpKind::log,
      OpKind::embedding_lookup, OpKind::concat, OpKind::conv1d,
      OpKind::max_pool_over_time, OpKind::mean};
  return kinds;
}

Tensor forward_op(OpKind kind, const std::vector<Tensor>& inputs) {
  auto need = [&](std::size_t n) {
    if (inputs.size() != n) {
      shape_fail(op_name(kind), "expects " + std::to_string(n) + " inputs, got " + std::to_string(inputs.size()));
    }
  };
  switch (kind) {
    case OpKind::matmul: need(2); return matmul(inputs[0], inputs[1]);
    case OpKind::add: need(2); return add(inputs[0], inputs[1]);
    case OpKind::mul: need(2); return mul(inputs[0], inputs[1]);
    case OpKind::tanh: need(1); return tanh(inputs[0]);
    case OpKind::sigmoid: need(1); return sigmoid(inputs[0]);
    case OpKind::relu: need(1); return relu(inputs[0]);
    case OpKind::softmax: need(1); return softmax(inputs[0]);
    case OpKind::log: need(1); return log(inputs[0]);
    case OpKind::embedding_lookup: {
      need(2);
      std::vector<int> ids;
      for (double v : inputs[1].data()) ids.push_back(static_cast<int>(std::lround(v)));
      return embedding_lookup(inputs[0], ids);
    }
    case OpKind::concat: return concat(inputs);
    case OpKind::conv1d: need(3); return conv1d(inputs[0], inputs[1], inputs[2]);
    case OpKind::max_pool_over_time: need(1); return max_pool_over_time(inputs[0]);
    case OpKind::mean: need(1); return mean(inputs[0]);
  }
  shape_fail("forward_op", "unknown operator");
}

}  // namespace sentiaug::num
