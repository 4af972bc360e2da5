#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace d3fl::detrend {

enum class Technique {
    none,
    differencing,
    moving_average,
    subtract_mean,
    linear_model,
    quadratic_model,
};

std::string_view technique_name(Technique t);
Technique parse_technique(std::string_view name);

struct DetrendTechnique {
    Technique tag = Technique::none;
    std::size_t window = 24;  // moving_average only; one day of hourly data
};

// Everything needed to invert the transform exactly and to extrapolate
// fitted trends past the end of the series.
struct DetrendState {
    Technique tag = Technique::none;
    std::size_t n = 0;           // original series length
    std::size_t window = 0;      // moving_average window p
    double anchor = 0.0;         // differencing: x_0
    std::vector<double> prefix;  // moving_average: x_0 .. x_{p-2}
    std::vector<double> means;   // moving_average: window mean per output index
    std::vector<double> beta;    // subtract_mean: {mean}; fits: polynomial coefficients
};

// Output lengths: differencing n-1, moving_average n-p+1, all others n.
// Requires length >= max(2, p) and finite input.
std::pair<std::vector<double>, DetrendState> apply(const std::vector<double>& series,
                                                   const DetrendTechnique& tech);

// Inverse of apply: reconstructs the original series (full length n).
std::vector<double> retrend(const std::vector<double>& detrended, const DetrendState& state);

// Trend value at an arbitrary index, defined for subtract_mean and the two
// fits; valid beyond n for horizon extrapolation.
double trend_at(const DetrendState& state, std::size_t i);

// Least-squares polynomial of the given degree over x_i = f(i), i = 0..n-1.
// Returns coefficients in ascending-power order. The normal equations are
// assembled on a centered index (i - (n-1)/2) in extended precision and
// solved by partially pivoted Gaussian elimination, then shifted back; the
// centering keeps the tiny Gram matrix well conditioned even for n ~ 1e5.
std::vector<double> least_squares_fit(const std::vector<double>& values, int degree);

// key-value text sidecar, 17 significant digits so values survive the trip
void save_state(const DetrendState& state, const std::string& path);
DetrendState load_state(const std::string& path);

}  // namespace d3fl::detrend
