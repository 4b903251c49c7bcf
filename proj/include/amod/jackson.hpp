#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "amod/matrix.hpp"
#include "amod/netmodel.hpp"

namespace amod {

/// Relative throughputs of every node, stations first. Scaled so that the
/// largest station entry is 1; any positive rescaling is equivalent.
struct Throughputs {
  std::vector<double> pi;
  std::size_t iterations = 0;
};

struct PowerIterationOptions {
  double tolerance = 1e-12;
  std::size_t max_iterations = 1'000'000;
};

/// Stationary row vector of an irreducible stochastic matrix, scaled to max 1.
/// Uses the lazy chain (I + P)/2 so periodic chains converge too. Throws
/// NumericalError if the max-norm change does not fall below the tolerance.
std::vector<double> stationary_vector(const Matrix& P,
                                      const PowerIterationOptions& opts = {},
                                      std::size_t* iterations = nullptr);

/// Relative throughputs from the station-only (folded) traffic equations; road
/// entries are pi[parent] * eff_P(parent, child).
Throughputs solve_throughputs(const AbstractQueueNet& qnet,
                              const PowerIterationOptions& opts = {});

/// Steady-state metrics for a fleet of `fleet` vehicles. Station vectors have
/// N entries; queue_length, wait and node_throughput have one entry per node.
struct PerfReport {
  long long fleet = 0;
  std::vector<double> availability;
  std::vector<double> throughput;
  std::vector<double> gamma;
  std::vector<double> queue_length;
  std::vector<double> wait;
  std::vector<double> node_throughput;
};

/// Relative utilization pi_i / mu_i(1) of every station.
std::vector<double> relative_utilization(const AbstractQueueNet& qnet,
                                         const Throughputs& pi);

/// Product-form normalization constants G(0..m), computed by convolving the
/// per-node factors x -> pi^x / prod_{n<=x} mu(n) one node at a time.
std::vector<double> normalization_constants(const AbstractQueueNet& qnet,
                                            const Throughputs& pi, long long m);

/// Same constants by literal enumeration of every state with <= m vehicles.
/// Only for tiny nets; it is the check on `normalization_constants`.
std::vector<double> enumerate_normalization_constants(const AbstractQueueNet& qnet,
                                                      const Throughputs& pi,
                                                      long long m);

inline constexpr double kOracleStateLimit = 1e7;

/// Number of states C(m + nodes - 1, m) of the closed network.
double state_space_size(std::size_t nodes, long long m);

/// Exact metrics from the normalization constants, including exact marginal
/// queue lengths. Server counts on the nodes are honoured, so this is also the
/// reference for finite-server roads. Refuses (ValidationError) when the
/// state space exceeds kOracleStateLimit.
PerfReport oracle_metrics(const AbstractQueueNet& qnet, const Throughputs& pi,
                          long long m);

/// Exact mean value analysis for stations plus infinite-server roads.
PerfReport mva_metrics(const AbstractQueueNet& qnet, const Throughputs& pi,
                       long long m);

/// MVA reports for several fleet sizes from a single recursion. `fleets` must
/// be sorted ascending.
std::vector<PerfReport> mva_curve(const AbstractQueueNet& qnet,
                                  const Throughputs& pi,
                                  std::span<const long long> fleets);

/// Residual of the balance identity every promotion satisfies,
///   (lambda_i + psi_i) gamma_i = sum_j gamma_j (alpha_ji psi_j + p_ji lambda_j),
/// maximised over stations. A test harness primitive for the throughput solve.
double utilization_identity_residual(const AbstractQueueNet& qnet,
                                     const Throughputs& pi);

/// Checks a raw availability is within 1e-9 of [0, 1] and clamps it.
/// Throws NumericalError otherwise.
double checked_availability(double raw, std::size_t station);

}  // namespace amod
