#pragma once

#include <random>
#include <vector>

#include "amod/matrix.hpp"
#include "amod/netmodel.hpp"

namespace testing_support {

inline std::vector<std::vector<double>> rows(const amod::Matrix& m) {
  std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

// Random irreducible network: every off-diagonal routing entry positive.
inline amod::Network random_network(std::mt19937_64& rng, std::size_t n,
                                    double lmin = 0.2, double lmax = 3.0,
                                    double tmin = 0.5, double tmax = 4.0) {
  std::uniform_real_distribution<double> lam(lmin, lmax), tt(tmin, tmax), w(0.05, 1.0);
  amod::Network net;
  net.lambda.resize(n);
  for (double& l : net.lambda) l = lam(rng);
  net.P = amod::Matrix(n, n, 0.0);
  net.T = amod::Matrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum += net.P(i, j) = w(rng);
    for (std::size_t j = 0; j < n; ++j) {
      net.P(i, j) /= sum;
      if (j != i) net.T(i, j) = tt(rng);
    }
  }
  return net;
}

inline amod::RebalancePromotion random_promotion(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  amod::RebalancePromotion p;
  p.psi.resize(n);
  p.alpha = amod::Matrix(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    p.psi[i] = u(rng) < 0.3 ? 0.0 : 2.0 * u(rng);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) sum += p.alpha(i, j) = 0.05 + u(rng);
    for (std::size_t j = 0; j < n; ++j) p.alpha(i, j) /= sum;
  }
  return p;
}

inline amod::Network symmetric_pair(double lambda = 1.0, double t = 1.0) {
  amod::Network net;
  net.lambda = {lambda, lambda};
  net.P = amod::Matrix{{0.0, 1.0}, {1.0, 0.0}};
  net.T = amod::Matrix{{0.0, t}, {t, 0.0}};
  return net;
}

}  // namespace testing_support
