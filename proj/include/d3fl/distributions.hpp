#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "d3fl/rng.hpp"

namespace d3fl::dist {

// Shape xi switches the GEV family between its Frechet (xi > 0), Weibull
// (xi < 0) and Gumbel (xi -> 0) regimes. Below kXiEps the closed forms
// divide by ~0, so the Gumbel limit expressions take over.
inline constexpr double kXiEps = 1e-12;

struct GevParams {
    double mu;     // location, data units
    double sigma;  // scale, data units
    double xi;     // shape, dimensionless
};

struct LogNormParams {
    double mu;     // mean of ln(x)
    double sigma;  // std-dev of ln(x)
};

enum class DistKind { gev, lognorm };

// throw std::invalid_argument when sigma <= 0 or any field is non-finite
void validate(const GevParams& p);
void validate(const LogNormParams& p);

double gev_pdf(double x, const GevParams& p);
double gev_cdf(double x, const GevParams& p);
// u in (0,1), else std::domain_error
double gev_quantile(double u, const GevParams& p);

double lognorm_pdf(double x, const LogNormParams& p);
double lognorm_cdf(double x, const LogNormParams& p);
double lognorm_quantile(double u, const LogNormParams& p);

double gev_median(const GevParams& p);
double lognorm_median(const LogNormParams& p);

// standard normal quantile: Acklam's rational approximation plus one Halley
// refinement step, absolute error <= 1e-9 on (0,1)
double norm_quantile(double u);

std::vector<double> sample(DistKind kind, const GevParams& gp, const LogNormParams& lp,
                           std::size_t n, rng::RngStream& stream);
std::vector<double> sample_gev(const GevParams& p, std::size_t n, rng::RngStream& stream);
std::vector<double> sample_lognorm(const LogNormParams& p, std::size_t n,
                                   rng::RngStream& stream);

// samples must be sorted ascending and non-empty (std::domain_error otherwise);
// D = max_i max(|i/n - F(x_i)|, |(i-1)/n - F(x_i)|)
double ks_statistic(const std::vector<double>& sorted_samples,
                    const std::function<double(double)>& cdf);

}  // namespace d3fl::dist
