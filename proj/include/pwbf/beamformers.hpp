#pragma once

// Per-pixel estimators operating on one aperture vector y (length M = M_active).
// All powers are squared magnitudes and all inner products Hermitian, so the kernels
// accept complex analytic data. An all-zero aperture yields 0 from every method.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pwbf::bf {

using cplx = std::complex<double>;
using Aperture = std::span<const cplx>;

struct MapParameters {
  double sigma_x_sq = 0.0;  // signal power
  double sigma_n_sq = 0.0;  // per-element interference power
};

struct IterationState {
  int t = 0;
  cplx x_hat;
  MapParameters params;  // estimated from x_hat
};

struct ImapResult {
  cplx value;
  std::vector<IterationState> trace;  // t = 0 .. iterations
};

/// Hermitian L x L matrix stored row-major.
struct CovarianceEstimate {
  std::size_t subarray_length = 0;
  std::size_t subarray_count = 0;
  double diagonal_loading = 0.0;
  std::vector<cplx> matrix;

  cplx operator()(std::size_t r, std::size_t c) const { return matrix[r * subarray_length + c]; }
};

cplx das(Aperture y);

/// sigma_x^2 / (sigma_n^2 + M sigma_x^2) * sum(y). Returns 0 when both powers are 0.
cplx map_estimate(Aperture y, const MapParameters& params);

/// Maximum-likelihood powers for a given signal estimate: (|x|^2, ||y - x 1||^2 / M).
MapParameters ml_params(Aperture y, cplx x);

/// Iterative MAP: starts from DAS and alternates ml_params / map_estimate.
ImapResult imap(Aperture y, int iterations);

/// Allocation-free variant of imap() returning only the final estimate.
cplx imap_value(Aperture y, int iterations);

/// |sum y|^2 / (M sum |y|^2), in [0, 1]; 0 for a zero aperture.
double coherence_factor(Aperture y);

cplx cf_output(Aperture y);

/// (1/K) sum_k (y_k - x 1)(y_k - x 1)^H over the K = M - L + 1 subarrays of length L.
CovarianceEstimate smoothed_noise_covariance(Aperture y, cplx x_das, std::size_t subarray);

/// Wiener postfilter for DAS: |x_das|^2 / (|x_das|^2 + w^H R_n w) * x_das with the
/// spatially smoothed noise covariance and w = 1/L. Requires 1 <= L < M.
cplx wiener_postfilter(Aperture y, std::size_t subarray);

/// sigma_x^2 / (alpha sigma_n^2 + M sigma_x^2) * sum(y) with the DAS-based ML powers.
cplx scaled_wiener(Aperture y, double alpha);

/// Capon beamformer with spatial smoothing over subarrays of length L and diagonal loading
/// loading_factor * trace(R) / L. Output is the subarray-averaged w^H y_k.
cplx minimum_variance(Aperture y, std::size_t subarray, double loading_factor);

/// Default parameter rules (functions of the active aperture size M).
std::size_t default_wiener_subarray(std::size_t m);
std::size_t default_mv_subarray(std::size_t m);
double default_mv_loading(std::size_t subarray);
double default_scw_alpha(std::size_t m);

namespace testing {
/// Wiener postfilter with the smoothed quadratic form replaced by the white-noise value
/// sigma_n^2 / M. Equals one iMAP iteration.
cplx wiener_postfilter_white(Aperture y);
}  // namespace testing

}  // namespace pwbf::bf
