#include "czlm/heads/parser.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace czlm::heads {

using nn::Tensor;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require(bool ok, const char* message) {
  if (!ok) throw nn::ShapeError(std::string("biaffine: ") + message);
}

}  // namespace

Tensor biaffine(const Tensor& H, const Tensor& D, const Tensor& U, const Tensor& u, const Tensor& v, const Tensor& b) {
  require(H.rank() == 2 && D.rank() == 2, "H and D must be matrices");
  const std::size_t m = H.dim(0), p = H.dim(1), n = D.dim(0), q = D.dim(1);
  require(U.rank() == 3 && U.dim(1) == p && U.dim(2) == q, "U must be (R, p, q)");
  const std::size_t R = U.dim(0);
  require(u.size() == R * p && v.size() == R * q && b.size() == R, "u, v, b sizes disagree with U");

  const double* hv = H.values().data();
  const double* dv = D.values().data();
  // T[r] = H U_r, (m, q) per relation; kept for the backward pass.
  std::vector<double> T(R * m * q, 0.0);
  std::vector<double> out(n * m * R, 0.0);
  for (std::size_t r = 0; r < R; ++r) {
    const double* Ur = U.values().data() + r * p * q;
    double* Tr = T.data() + r * m * q;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t a = 0; a < p; ++a) {
        const double h = hv[i * p + a];
        if (h == 0.0) continue;
        for (std::size_t c = 0; c < q; ++c) Tr[i * q + c] += h * Ur[a * q + c];
      }
    std::vector<double> hu(m, 0.0), dvv(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t a = 0; a < p; ++a) hu[i] += u[r * p + a] * hv[i * p + a];
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < q; ++c) dvv[j] += v[r * q + c] * dv[j * q + c];
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < q; ++c) s += Tr[i * q + c] * dv[j * q + c];
        out[j * m * R + i * R + r] = s + hu[i] + dvv[j] + b[r];
      }
  }

  return nn::make_op({n, m * R}, std::move(out), {H, D, U, u, v, b},
                     [H, D, U, u, v, b, T = std::move(T), m, p, n, q, R](nn::detail::Node& self) {
                       auto grad_of = [](const Tensor& t) -> double* {
                         return t.requires_grad() ? t.node().ensure_grad().data() : nullptr;
                       };
                       double* gH = grad_of(H);
                       double* gD = grad_of(D);
                       double* gU = grad_of(U);
                       double* gu = grad_of(u);
                       double* gv = grad_of(v);
                       double* gb = grad_of(b);
                       const double* hv = H.values().data();
                       const double* dv = D.values().data();
                       std::vector<double> dS(m * n), dT(m * q);
                       for (std::size_t r = 0; r < R; ++r) {
                         const double* Ur = U.values().data() + r * p * q;
                         const double* Tr = T.data() + r * m * q;
                         for (std::size_t j = 0; j < n; ++j)
                           for (std::size_t i = 0; i < m; ++i) dS[i * n + j] = self.grad[j * m * R + i * R + r];
                         std::fill(dT.begin(), dT.end(), 0.0);
                         for (std::size_t i = 0; i < m; ++i) {
                           double row = 0.0;
                           for (std::size_t j = 0; j < n; ++j) {
                             const double g = dS[i * n + j];
                             row += g;
                             if (g == 0.0) continue;
                             for (std::size_t c = 0; c < q; ++c) {
                               dT[i * q + c] += g * dv[j * q + c];
                               if (gD) gD[j * q + c] += g * Tr[i * q + c];
                             }
                           }
                           if (gu)
                             for (std::size_t a = 0; a < p; ++a) gu[r * p + a] += row * hv[i * p + a];
                           if (gH)
                             for (std::size_t a = 0; a < p; ++a) gH[i * p + a] += row * u[r * p + a];
                           if (gb) gb[r] += row;
                         }
                         for (std::size_t j = 0; j < n; ++j) {
                           double col = 0.0;
                           for (std::size_t i = 0; i < m; ++i) col += dS[i * n + j];
                           if (gv)
                             for (std::size_t c = 0; c < q; ++c) gv[r * q + c] += col * dv[j * q + c];
                           if (gD)
                             for (std::size_t c = 0; c < q; ++c) gD[j * q + c] += col * v[r * q + c];
                         }
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t a = 0; a < p; ++a) {
                             const double h = hv[i * p + a];
                             double acc = 0.0;
                             for (std::size_t c = 0; c < q; ++c) {
                               if (gU) gU[r * p * q + a * q + c] += h * dT[i * q + c];
                               acc += dT[i * q + c] * Ur[a * q + c];
                             }
                             if (gH) gH[i * p + a] += acc;
                           }
                       }
                     });
}

DepArcScores DepArcScores::from_biaffine(const Tensor& arcs, const Tensor& labels) {
  DepArcScores s;
  s.n = arcs.dim(0);
  const std::size_t m = s.n + 1;
  if (arcs.dim(1) != m) throw nn::ShapeError("arc scores must be (n, n+1)");
  s.arc.assign(m * s.n, 0.0);
  for (std::size_t j = 0; j < s.n; ++j)
    for (std::size_t i = 0; i < m; ++i) s.arc[i * s.n + j] = arcs[j * m + i];
  if (labels.defined()) {
    if (labels.dim(0) != s.n || labels.dim(1) % m != 0) throw nn::ShapeError("label scores must be (n, (n+1)*R)");
    s.relations = labels.dim(1) / m;
    s.label.assign(m * s.n * s.relations, 0.0);
    for (std::size_t j = 0; j < s.n; ++j)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t r = 0; r < s.relations; ++r)
          s.label[(i * s.n + j) * s.relations + r] = labels[j * m * s.relations + i * s.relations + r];
  }
  return s;
}

namespace {

using Matrix = std::vector<std::vector<double>>;

// Chu-Liu/Edmonds on a dense graph; node 0 is the root. Returns head per node (-1 for 0).
std::vector<int> chu_liu_edmonds(const Matrix& s) {
  const int N = static_cast<int>(s.size());
  std::vector<int> head(N, -1);
  for (int d = 1; d < N; ++d) {
    double best = kNegInf;
    for (int h = 0; h < N; ++h) {
      if (h == d || (head[d] >= 0 && !(s[h][d] > best))) continue;
      best = s[h][d];
      head[d] = h;
    }
  }

  // Find a cycle.
  std::vector<int> color(N, 0);
  std::vector<int> cycle;
  for (int start = 1; start < N && cycle.empty(); ++start) {
    int x = start;
    std::vector<int> path;
    while (x > 0 && color[x] == 0) {
      color[x] = start;
      path.push_back(x);
      x = head[x];
    }
    if (x > 0 && color[x] == start) {
      int y = x;
      do {
        cycle.push_back(y);
        y = head[y];
      } while (y != x);
    }
    for (int p : path) color[p] = -1;
  }
  if (cycle.empty()) return head;

  std::vector<char> in_cycle(N, 0);
  for (int c : cycle) in_cycle[c] = 1;
  // Contracted graph: non-cycle nodes keep their order, the cycle becomes the last node.
  std::vector<int> to_new(N, -1), to_old;
  for (int x = 0; x < N; ++x)
    if (!in_cycle[x]) {
      to_new[x] = static_cast<int>(to_old.size());
      to_old.push_back(x);
    }
  const int C = static_cast<int>(to_old.size());
  const int M = C + 1;
  Matrix t(M, std::vector<double>(M, kNegInf));
  std::vector<int> enter_dep(M, -1);  // for edges u -> cycle: which cycle node is entered
  std::vector<int> leave_head(M, -1); // for edges cycle -> v: which cycle node is the head
  for (int a = 0; a < C; ++a)
    for (int b = 0; b < C; ++b)
      if (a != b) t[a][b] = s[to_old[a]][to_old[b]];
  for (int a = 0; a < C; ++a) {
    const int u = to_old[a];
    for (int c : cycle) {
      const double val = s[u][c] - s[head[c]][c];
      if (enter_dep[a] < 0 || val > t[a][C] || (val == t[a][C] && c < enter_dep[a])) {
        t[a][C] = val;
        enter_dep[a] = c;
      }
    }
  }
  for (int b = 1; b < C; ++b) {
    const int v = to_old[b];
    for (int c : cycle) {
      if (leave_head[b] < 0 || s[c][v] > t[C][b] || (s[c][v] == t[C][b] && c < leave_head[b])) {
        t[C][b] = s[c][v];
        leave_head[b] = c;
      }
    }
  }

  const auto sub = chu_liu_edmonds(t);
  std::vector<int> result(N, -1);
  for (int b = 1; b < C; ++b) {
    const int h = sub[b];
    result[to_old[b]] = h == C ? leave_head[b] : to_old[h];
  }
  for (int c : cycle) result[c] = head[c];
  const int entering_from = sub[C];
  result[enter_dep[entering_from]] = to_old[entering_from];
  return result;
}

double tree_score(const DepArcScores& s, const std::vector<int>& head) {
  double total = 0.0;
  for (std::size_t j = 1; j < head.size(); ++j) total += s.arc_score(static_cast<std::size_t>(head[j]), j);
  return total;
}

}  // namespace

DecodedTree decode_tree(const DepArcScores& scores, bool single_root) {
  const std::size_t n = scores.n;
  if (scores.arc.size() != (n + 1) * n) throw std::invalid_argument("arc score matrix has the wrong size");
  for (double x : scores.arc)
    if (!std::isfinite(x)) throw std::invalid_argument("arc scores must be finite");
  DecodedTree out;
  if (n == 0) return out;

  Matrix s(n + 1, std::vector<double>(n + 1, kNegInf));
  for (std::size_t h = 0; h <= n; ++h)
    for (std::size_t d = 1; d <= n; ++d)
      if (h != d) s[h][d] = scores.arc_score(h, d);

  std::vector<int> best;
  double best_score = kNegInf;
  auto consider = [&](const Matrix& m) {
    auto heads = chu_liu_edmonds(m);
    const double sc = tree_score(scores, heads);
    if (best.empty() || sc > best_score) {
      best = std::move(heads);
      best_score = sc;
    }
  };
  auto unconstrained = chu_liu_edmonds(s);
  std::size_t root_children = 0;
  for (std::size_t d = 1; d <= n; ++d) root_children += unconstrained[d] == 0;
  if (!single_root || root_children == 1) {
    best = unconstrained;
    best_score = tree_score(scores, best);
  } else {
    for (std::size_t c = 1; c <= n; ++c) {
      Matrix m = s;
      for (std::size_t d = 1; d <= n; ++d)
        if (d != c) m[0][d] = kNegInf;
      consider(m);
    }
  }

  out.score = best_score;
  for (std::size_t d = 1; d <= n; ++d) out.heads.push_back(static_cast<std::size_t>(best[d]));
  if (scores.relations > 0) {
    for (std::size_t d = 1; d <= n; ++d) {
      const std::size_t h = out.heads[d - 1];
      std::size_t arg = 0;
      for (std::size_t r = 1; r < scores.relations; ++r)
        if (scores.label_score(h, d, r) > scores.label_score(h, d, arg)) arg = r;
      out.labels.push_back(arg);
    }
  }
  return out;
}

bool is_valid_tree(const std::vector<std::size_t>& heads) {
  const std::size_t n = heads.size();
  for (std::size_t h : heads)
    if (h > n) return false;
  for (std::size_t j = 1; j <= n; ++j) {
    std::size_t x = j, steps = 0;
    while (x != 0 && steps <= n) {
      x = heads[x - 1];
      ++steps;
    }
    if (x != 0) return false;
  }
  return true;
}

}  // namespace czlm::heads
