#include "d3fl/distributions.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace d3fl::dist {

namespace {

constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kSqrt2Pi = 2.5066282746310005024;

void require_open_unit(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        std::ostringstream os;
        os << "quantile argument must lie in (0,1), got " << u;
        throw std::domain_error(os.str());
    }
}

}  // namespace

void validate(const GevParams& p) {
    if (!std::isfinite(p.mu) || !std::isfinite(p.sigma) || !std::isfinite(p.xi) ||
        p.sigma <= 0.0)
        throw std::invalid_argument("GEV parameters require finite mu, xi and sigma > 0");
}

void validate(const LogNormParams& p) {
    if (!std::isfinite(p.mu) || !std::isfinite(p.sigma) || p.sigma <= 0.0)
        throw std::invalid_argument("log-normal parameters require finite mu and sigma > 0");
}

double gev_pdf(double x, const GevParams& p) {
    validate(p);
    const double z = (x - p.mu) / p.sigma;
    if (std::fabs(p.xi) < kXiEps) {
        const double ez = std::exp(-z);
        return std::exp(-z - ez) / p.sigma;
    }
    const double s = 1.0 + p.xi * z;
    if (s <= 0.0) return 0.0;
    const double ls = std::log(s);
    const double t = std::exp(-ls / p.xi);  // (1 + xi z)^(-1/xi)
    return std::exp(-(1.0 / p.xi + 1.0) * ls - t) / p.sigma;
}

double gev_cdf(double x, const GevParams& p) {
    validate(p);
    const double z = (x - p.mu) / p.sigma;
    if (std::fabs(p.xi) < kXiEps) return std::exp(-std::exp(-z));
    const double s = 1.0 + p.xi * z;
    if (s <= 0.0) return p.xi > 0.0 ? 0.0 : 1.0;
    return std::exp(-std::exp(-std::log(s) / p.xi));
}

double gev_quantile(double u, const GevParams& p) {
    validate(p);
    require_open_unit(u);
    const double w = -std::log(u);  // > 0
    if (std::fabs(p.xi) < kXiEps) return p.mu - p.sigma * std::log(w);
    // ((-ln u)^(-xi) - 1)/xi computed through expm1 to survive tiny xi
    return p.mu + p.sigma * std::expm1(-p.xi * std::log(w)) / p.xi;
}

double lognorm_pdf(double x, const LogNormParams& p) {
    validate(p);
    if (x <= 0.0) return 0.0;
    const double w = (std::log(x) - p.mu) / p.sigma;
    return std::exp(-0.5 * w * w) / (x * p.sigma * kSqrt2Pi);
}

double lognorm_cdf(double x, const LogNormParams& p) {
    validate(p);
    if (x <= 0.0) return 0.0;
    const double w = (std::log(x) - p.mu) / p.sigma;
    return 0.5 * std::erfc(-w / kSqrt2);
}

double lognorm_quantile(double u, const LogNormParams& p) {
    validate(p);
    require_open_unit(u);
    return std::exp(p.mu + p.sigma * norm_quantile(u));
}

double gev_median(const GevParams& p) { return gev_quantile(0.5, p); }

double lognorm_median(const LogNormParams& p) {
    validate(p);
    return std::exp(p.mu);
}

// Acklam's piecewise rational approximation to the standard normal quantile
// (relative error ~1.15e-9), tightened by one Halley step against the erfc
// form of the normal CDF.
double norm_quantile(double u) {
    require_open_unit(u);

    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (u < p_low) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - p_low) {
        const double q = u - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    const double err = 0.5 * std::erfc(-x / kSqrt2) - u;
    const double step = err * kSqrt2Pi * std::exp(0.5 * x * x);
    return x - step / (1.0 + 0.5 * x * step);
}

std::vector<double> sample_gev(const GevParams& p, std::size_t n, rng::RngStream& stream) {
    validate(p);
    if (n == 0) throw std::invalid_argument("sample: requested zero draws");
    std::vector<double> out(n);
    for (auto& v : out) v = gev_quantile(stream.uniform01(), p);
    return out;
}

std::vector<double> sample_lognorm(const LogNormParams& p, std::size_t n,
                                   rng::RngStream& stream) {
    validate(p);
    if (n == 0) throw std::invalid_argument("sample: requested zero draws");
    std::vector<double> out(n);
    for (auto& v : out) v = lognorm_quantile(stream.uniform01(), p);
    return out;
}

std::vector<double> sample(DistKind kind, const GevParams& gp, const LogNormParams& lp,
                           std::size_t n, rng::RngStream& stream) {
    return kind == DistKind::gev ? sample_gev(gp, n, stream) : sample_lognorm(lp, n, stream);
}

double ks_statistic(const std::vector<double>& sorted_samples,
                    const std::function<double(double)>& cdf) {
    if (sorted_samples.empty()) throw std::domain_error("ks_statistic: empty sample");
    const double n = static_cast<double>(sorted_samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted_samples.size(); ++i) {
        const double f = cdf(sorted_samples[i]);
        const double hi = std::fabs((static_cast<double>(i) + 1.0) / n - f);
        const double lo = std::fabs(static_cast<double>(i) / n - f);
        d = std::max(d, std::max(hi, lo));
    }
    return d;
}

}  // namespace d3fl::dist
