#include "czlm/heads/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace czlm::heads {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& xs) {
  double mx = kNegInf;
  for (double x : xs) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

struct Lattice {
  std::size_t n, L;
  std::vector<double> alpha, beta;
  double log_z;
};

Lattice forward_backward(const std::vector<double>& E, const std::vector<double>& T, std::size_t L,
                         const CrfConstraints& c) {
  Lattice lat{E.size() / L, L, {}, {}, 0.0};
  const std::size_t n = lat.n;
  lat.alpha.assign(n * L, kNegInf);
  lat.beta.assign(n * L, kNegInf);
  std::vector<double> terms(L);
  for (std::size_t l = 0; l < L; ++l)
    if (c.allowed_start[l]) lat.alpha[l] = E[l];
  for (std::size_t t = 1; t < n; ++t)
    for (std::size_t b = 0; b < L; ++b) {
      for (std::size_t a = 0; a < L; ++a)
        terms[a] = c.allowed[a * L + b] ? lat.alpha[(t - 1) * L + a] + T[a * L + b] : kNegInf;
      lat.alpha[t * L + b] = log_sum_exp(terms) + E[t * L + b];
    }
  for (std::size_t l = 0; l < L; ++l) lat.beta[(n - 1) * L + l] = 0.0;
  for (std::size_t t = n - 1; t-- > 0;)
    for (std::size_t a = 0; a < L; ++a) {
      for (std::size_t b = 0; b < L; ++b)
        terms[b] = c.allowed[a * L + b] ? T[a * L + b] + E[(t + 1) * L + b] + lat.beta[(t + 1) * L + b] : kNegInf;
      lat.beta[t * L + a] = log_sum_exp(terms);
    }
  lat.log_z = log_sum_exp(std::vector<double>(lat.alpha.end() - static_cast<std::ptrdiff_t>(L), lat.alpha.end()));
  return lat;
}

void check_shapes(const std::vector<double>& E, const std::vector<double>& T, std::size_t L,
                  const CrfConstraints& c) {
  if (L == 0 || E.size() % L != 0 || T.size() != L * L) throw nn::ShapeError("CRF score shapes disagree");
  if (c.labels != L) throw nn::ShapeError("CRF constraints cover a different label count");
}

}  // namespace

CrfConstraints CrfConstraints::none(std::size_t labels) {
  return {labels, std::vector<char>(labels, 1), std::vector<char>(labels * labels, 1)};
}

CrfConstraints CrfConstraints::bio(const std::vector<std::string>& tags) {
  const std::size_t L = tags.size();
  auto c = none(L);
  auto inside_type = [](const std::string& t) -> std::string { return t.rfind("I-", 0) == 0 ? t.substr(2) : ""; };
  auto entity_type = [](const std::string& t) -> std::string {
    return t.rfind("B-", 0) == 0 || t.rfind("I-", 0) == 0 ? t.substr(2) : "";
  };
  for (std::size_t b = 0; b < L; ++b) {
    const auto type = inside_type(tags[b]);
    if (type.empty()) continue;
    c.allowed_start[b] = 0;
    for (std::size_t a = 0; a < L; ++a) c.allowed[a * L + b] = entity_type(tags[a]) == type;
  }
  return c;
}

bool CrfConstraints::permits(const std::vector<int>& path) const {
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (path[t] < 0 || static_cast<std::size_t>(path[t]) >= labels) return false;
    if (t == 0 ? !allowed_start[static_cast<std::size_t>(path[0])]
               : !allowed[static_cast<std::size_t>(path[t - 1]) * labels + static_cast<std::size_t>(path[t])])
      return false;
  }
  return true;
}

double crf_path_score(const std::vector<double>& E, const std::vector<double>& T, std::size_t L,
                      const std::vector<int>& path) {
  double s = 0.0;
  for (std::size_t t = 0; t < path.size(); ++t) {
    s += E[t * L + static_cast<std::size_t>(path[t])];
    if (t > 0) s += T[static_cast<std::size_t>(path[t - 1]) * L + static_cast<std::size_t>(path[t])];
  }
  return s;
}

double crf_log_partition(const std::vector<double>& E, const std::vector<double>& T, std::size_t L,
                         const CrfConstraints& c) {
  check_shapes(E, T, L, c);
  if (E.empty()) return 0.0;
  return forward_backward(E, T, L, c).log_z;
}

std::vector<int> crf_viterbi(const std::vector<double>& E, const std::vector<double>& T, std::size_t L,
                             const CrfConstraints& c) {
  check_shapes(E, T, L, c);
  const std::size_t n = E.size() / L;
  if (n == 0) return {};
  std::vector<double> delta(n * L, kNegInf);
  std::vector<int> back(n * L, 0);
  for (std::size_t l = 0; l < L; ++l)
    if (c.allowed_start[l]) delta[l] = E[l];
  for (std::size_t t = 1; t < n; ++t)
    for (std::size_t b = 0; b < L; ++b) {
      double best = kNegInf;
      int arg = -1;
      for (std::size_t a = 0; a < L; ++a) {
        if (!c.allowed[a * L + b]) continue;
        const double v = delta[(t - 1) * L + a] + T[a * L + b];
        if (arg < 0 || v > best) {
          best = v;
          arg = static_cast<int>(a);
        }
      }
      delta[t * L + b] = arg < 0 ? kNegInf : best + E[t * L + b];
      back[t * L + b] = std::max(arg, 0);
    }
  std::vector<int> path(n);
  std::size_t last = 0;
  for (std::size_t l = 1; l < L; ++l)
    if (delta[(n - 1) * L + l] > delta[(n - 1) * L + last]) last = l;
  path[n - 1] = static_cast<int>(last);
  for (std::size_t t = n - 1; t > 0; --t) path[t - 1] = back[t * L + static_cast<std::size_t>(path[t])];
  return path;
}

nn::Tensor crf_nll(const nn::Tensor& emissions, const nn::Tensor& transitions, const std::vector<int>& gold,
                   const CrfConstraints& constraints) {
  if (emissions.rank() != 2) throw nn::ShapeError("CRF emissions must be (n, L)");
  const std::size_t n = emissions.dim(0), L = emissions.dim(1);
  std::vector<double> E(emissions.values().begin(), emissions.values().end());
  std::vector<double> T(transitions.values().begin(), transitions.values().end());
  check_shapes(E, T, L, constraints);
  if (gold.size() != n) throw nn::ShapeError("CRF gold sequence length differs from emissions");
  if (n == 0) throw std::invalid_argument("CRF over an empty sequence");
  if (!constraints.permits(gold)) throw InvalidTagSequenceError("gold tag sequence violates the BIO constraints");

  auto lat = forward_backward(E, T, L, constraints);
  const double loss = lat.log_z - crf_path_score(E, T, L, gold);
  return nn::make_op({}, {loss}, {emissions, transitions},
                     [emissions, transitions, gold, lat = std::move(lat), E = std::move(E), T = std::move(T), n, L,
                      constraints](nn::detail::Node& self) {
                       const double g = self.grad[0];
                       if (emissions.requires_grad()) {
                         auto& ge = emissions.node().ensure_grad();
                         for (std::size_t t = 0; t < n; ++t) {
                           for (std::size_t l = 0; l < L; ++l)
                             ge[t * L + l] += g * std::exp(lat.alpha[t * L + l] + lat.beta[t * L + l] - lat.log_z);
                           ge[t * L + static_cast<std::size_t>(gold[t])] -= g;
                         }
                       }
                       if (transitions.requires_grad()) {
                         auto& gt = transitions.node().ensure_grad();
                         for (std::size_t t = 1; t < n; ++t) {
                           for (std::size_t a = 0; a < L; ++a)
                             for (std::size_t b = 0; b < L; ++b) {
                               if (!constraints.allowed[a * L + b]) continue;
                               gt[a * L + b] += g * std::exp(lat.alpha[(t - 1) * L + a] + T[a * L + b] +
                                                             E[t * L + b] + lat.beta[t * L + b] - lat.log_z);
                             }
                           gt[static_cast<std::size_t>(gold[t - 1]) * L + static_cast<std::size_t>(gold[t])] -= g;
                         }
                       }
                     });
}

}  // namespace czlm::heads
