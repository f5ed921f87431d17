#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace ougf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct QuadratureSettings {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_subdivisions = 4000;
};

struct IntegrationResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
    int subdivisions = 0;
    bool converged = false;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, IntegrationResult partial)
        : std::runtime_error(what), partial_(partial) {}
    const IntegrationResult& partial() const { return partial_; }

private:
    IntegrationResult partial_;
};

// Globally adaptive Gauss-Kronrod (G7,K15) with interval bisection.
// b may be +infinity; the tail is mapped to (0, 1] by u = exp(a - s), which
// requires the integrand to decay (caller guarantees integrability).
// Stops once the summed error estimate is below max(abs_tol, rel_tol*|I|).
IntegrationResult try_integrate(const std::function<double(double)>& f, double a,
                                double b, const QuadratureSettings& settings = {});

// Same, but throws QuadratureError (carrying the partial estimate) on
// non-convergence or on NaN from the integrand.
double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          const QuadratureSettings& settings = {});

}  // namespace ougf
