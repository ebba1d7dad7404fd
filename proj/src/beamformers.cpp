#include "pwbf/beamformers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "pwbf/errors.hpp"

namespace pwbf::bf {
namespace {

cplx sum(Aperture y) {
  cplx s = 0.0;
  for (const auto& v : y) s += v;
  return s;
}

double energy(Aperture y) {
  double e = 0.0;
  for (const auto& v : y) e += std::norm(v);
  return e;
}

double clamp_gain(double g) { return std::clamp(g, 0.0, 1.0); }

// sigma_x^2 / (alpha sigma_n^2 + M sigma_x^2) * total. Shared by MAP, iMAP and ScW so the
// alpha = 1 cases follow the identical arithmetic path.
cplx shrink(cplx total, const MapParameters& p, double alpha, std::size_t m) {
  const double denom = alpha * p.sigma_n_sq + static_cast<double>(m) * p.sigma_x_sq;
  if (denom == 0.0) return 0.0;
  return (p.sigma_x_sq / denom) * total;
}

MapParameters ml_params_with_sum(Aperture y, cplx x) {
  double residual = 0.0;
  for (const auto& v : y) residual += std::norm(v - x);
  return {std::norm(x), residual / static_cast<double>(y.size())};
}

}  // namespace

cplx das(Aperture y) { return sum(y) / static_cast<double>(y.size()); }

cplx map_estimate(Aperture y, const MapParameters& params) {
  if (params.sigma_x_sq < 0.0 || params.sigma_n_sq < 0.0) {
    throw ConfigError("map_estimate: prior powers must be non-negative");
  }
  return shrink(sum(y), params, 1.0, y.size());
}

MapParameters ml_params(Aperture y, cplx x) { return ml_params_with_sum(y, x); }

ImapResult imap(Aperture y, int iterations) {
  if (iterations < 1) throw ConfigError("imap: iterations must be >= 1");
  ImapResult result;
  const cplx total = sum(y);
  cplx x = total / static_cast<double>(y.size());
  for (int t = 0; t <= iterations; ++t) {
    const auto params = ml_params_with_sum(y, x);
    result.trace.push_back({t, x, params});
    if (t == iterations) break;
    x = shrink(total, params, 1.0, y.size());
  }
  result.value = x;
  return result;
}

cplx imap_value(Aperture y, int iterations) {
  if (iterations < 1) throw ConfigError("imap: iterations must be >= 1");
  const cplx total = sum(y);
  cplx x = total / static_cast<double>(y.size());
  for (int t = 0; t < iterations; ++t) x = shrink(total, ml_params_with_sum(y, x), 1.0, y.size());
  return x;
}

double coherence_factor(Aperture y) {
  const double e = energy(y);
  if (e == 0.0) return 0.0;
  return clamp_gain(std::norm(sum(y)) / (static_cast<double>(y.size()) * e));
}

cplx cf_output(Aperture y) { return coherence_factor(y) * das(y); }

CovarianceEstimate smoothed_noise_covariance(Aperture y, cplx x_das, std::size_t subarray) {
  const std::size_t m = y.size();
  if (subarray < 1 || subarray > m) {
    throw ConfigError("smoothed_noise_covariance: subarray length must lie in [1, M]");
  }
  CovarianceEstimate r;
  r.subarray_length = subarray;
  r.subarray_count = m - subarray + 1;
  r.matrix.assign(subarray * subarray, 0.0);
  for (std::size_t k = 0; k < r.subarray_count; ++k) {
    for (std::size_t i = 0; i < subarray; ++i) {
      const cplx ri = y[k + i] - x_das;
      for (std::size_t j = 0; j < subarray; ++j) {
        r.matrix[i * subarray + j] += ri * std::conj(y[k + j] - x_das);
      }
    }
  }
  const double inv_k = 1.0 / static_cast<double>(r.subarray_count);
  for (auto& v : r.matrix) v *= inv_k;
  return r;
}

cplx wiener_postfilter(Aperture y, std::size_t subarray) {
  const std::size_t m = y.size();
  if (subarray < 1 || subarray >= m) {
    throw ConfigError("wiener_postfilter: subarray length must lie in [1, M-1]");
  }
  const cplx x_das = das(y);
  const double signal = std::norm(x_das);

  // w^H R_n w with w = 1/L reduces to the mean over subarrays of |mean(y_k) - x_das|^2;
  // the subarray sums are maintained as a sliding window.
  const std::size_t k_count = m - subarray + 1;
  const double inv_l = 1.0 / static_cast<double>(subarray);
  cplx window = 0.0;
  for (std::size_t i = 0; i < subarray; ++i) window += y[i];
  double noise = 0.0;
  for (std::size_t k = 0;; ++k) {
    noise += std::norm(window * inv_l - x_das);
    if (k + 1 == k_count) break;
    window += y[k + subarray] - y[k];
  }
  noise /= static_cast<double>(k_count);

  if (signal + noise == 0.0) return 0.0;
  return clamp_gain(signal / (signal + noise)) * x_das;
}

cplx scaled_wiener(Aperture y, double alpha) {
  if (!(alpha >= 0.0)) throw ConfigError("scaled_wiener: alpha must be >= 0");
  const cplx total = sum(y);
  const auto params = ml_params_with_sum(y, total / static_cast<double>(y.size()));
  return shrink(total, params, alpha, y.size());
}

constexpr double kMinReciprocalCondition = 1e-12;

cplx minimum_variance(Aperture y, std::size_t subarray, double loading_factor) {
  const std::size_t m = y.size();
  if (subarray < 1 || subarray > m) {
    throw ConfigError("minimum_variance: subarray length must lie in [1, M]");
  }
  if (!(loading_factor >= 0.0)) throw ConfigError("minimum_variance: loading must be >= 0");
  if (energy(y) == 0.0) return 0.0;

  const std::size_t len = subarray;
  const std::size_t k_count = m - len + 1;
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(len),
                                              static_cast<Eigen::Index>(len));
  for (std::size_t k = 0; k < k_count; ++k) {
    const Eigen::Map<const Eigen::VectorXcd> yk(y.data() + k, static_cast<Eigen::Index>(len));
    r.noalias() += yk * yk.adjoint();
  }
  r /= static_cast<double>(k_count);
  const double load = loading_factor * r.trace().real() / static_cast<double>(len);
  r.diagonal().array() += load;

  // Exactly singular matrices can pass the factorisation through a rounded pivot.
  const Eigen::LLT<Eigen::MatrixXcd> llt(r);
  if (llt.info() != Eigen::Success || !(llt.rcond() > kMinReciprocalCondition)) {
    throw NumericalError("minimum_variance: covariance is singular; increase diagonal loading");
  }
  const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(len));
  Eigen::VectorXcd w = llt.solve(ones);
  const cplx norm = ones.dot(w);  // 1^H R^-1 1
  if (!std::isfinite(norm.real()) || norm == 0.0) {
    throw NumericalError("minimum_variance: degenerate weight normalisation");
  }
  w /= norm;

  cplx out = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    cplx yk_out = 0.0;
    for (std::size_t l = 0; l < len; ++l) yk_out += std::conj(w[static_cast<Eigen::Index>(l)]) * y[k + l];
    out += yk_out;
  }
  return out / static_cast<double>(k_count);
}

std::size_t default_wiener_subarray(std::size_t m) {
  if (m < 2) return 1;
  return std::clamp<std::size_t>(m / 2, 1, m - 1);
}

std::size_t default_mv_subarray(std::size_t m) { return std::max<std::size_t>(m / 2, 1); }

double default_mv_loading(std::size_t subarray) {
  return 1.0 / (100.0 * static_cast<double>(subarray));
}

double default_scw_alpha(std::size_t m) { return std::sqrt(static_cast<double>(m)); }

namespace testing {

cplx wiener_postfilter_white(Aperture y) {
  const cplx x_das = das(y);
  const auto params = ml_params(y, x_das);
  const double signal = params.sigma_x_sq;
  const double noise = params.sigma_n_sq / static_cast<double>(y.size());
  if (signal + noise == 0.0) return 0.0;
  return (signal / (signal + noise)) * x_das;
}

}  // namespace testing
}  // namespace pwbf::bf
