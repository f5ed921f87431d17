#include "ougf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace ougf {

namespace {

// 15-point Kronrod nodes on [-1,1] (symmetric) and weights; the embedded
// 7-point Gauss rule uses the odd-indexed nodes.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526, 0.949107912342758524526189684048,
    0.864864423359769072789712788641, 0.741531185599394439863864773281,
    0.586087235467691130294144838259, 0.405845151377397166906606412077,
    0.207784955007898467600689403773, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a, b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

// Evaluates G7/K15 on [a,b]; returns false if the integrand produced NaN.
bool gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                   double* value, double* error) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double result_gauss = 0.0;
    double result_kronrod = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double dx = half * kXgk[i];
        double fsum;
        if (i == 7) {
            fsum = f(center);
        } else {
            fsum = f(center - dx) + f(center + dx);
        }
        if (std::isnan(fsum)) return false;
        result_kronrod += kWgk[i] * fsum;
        if (i % 2 == 1) result_gauss += kWg[i / 2] * fsum;
    }
    *value = result_kronrod * half;
    *error = std::abs(result_kronrod - result_gauss) * std::abs(half);
    return true;
}

IntegrationResult adaptive_on_finite(const std::function<double(double)>& f, double a,
                                     double b, const QuadratureSettings& settings,
                                     bool* nan_seen) {
    IntegrationResult res;
    *nan_seen = false;
    if (a == b) {
        res.converged = true;
        return res;
    }

    std::priority_queue<Segment> queue;
    Segment whole{a, b, 0.0, 0.0};
    if (!gauss_kronrod(f, a, b, &whole.value, &whole.error)) {
        *nan_seen = true;
        return res;
    }
    queue.push(whole);
    double total = whole.value;
    double total_err = whole.error;

    while (static_cast<int>(res.subdivisions) < settings.max_subdivisions) {
        const double tol = std::max(settings.abs_tol, settings.rel_tol * std::abs(total));
        if (total_err <= tol) {
            res.value = total;
            res.error = total_err;
            res.converged = true;
            return res;
        }
        Segment worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval at floating-point resolution; accept its estimate
            total_err -= worst.error;
            worst.error = 0.0;
            queue.push(worst);
            res.subdivisions++;
            continue;
        }
        Segment left{worst.a, mid, 0.0, 0.0};
        Segment right{mid, worst.b, 0.0, 0.0};
        if (!gauss_kronrod(f, left.a, left.b, &left.value, &left.error) ||
            !gauss_kronrod(f, right.a, right.b, &right.value, &right.error)) {
            *nan_seen = true;
            res.value = total;
            res.error = total_err;
            return res;
        }
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        res.subdivisions++;
    }
    res.value = total;
    res.error = total_err;
    res.converged = total_err <= std::max(settings.abs_tol, settings.rel_tol * std::abs(total));
    return res;
}

}  // namespace

IntegrationResult try_integrate(const std::function<double(double)>& f, double a,
                                double b, const QuadratureSettings& settings) {
    bool nan_seen = false;
    IntegrationResult res;
    if (std::isinf(b)) {
        // s = a - log(u), ds = -du/u maps (a, inf) to u in (0, 1]
        auto mapped = [&f, a](double u) { return f(a - std::log(u)) / u; };
        res = adaptive_on_finite(mapped, 0.0, 1.0, settings, &nan_seen);
    } else {
        res = adaptive_on_finite(f, a, b, settings, &nan_seen);
    }
    if (nan_seen) res.converged = false;
    return res;
}

double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          const QuadratureSettings& settings) {
    bool nan_seen = false;
    IntegrationResult res;
    if (std::isinf(b)) {
        auto mapped = [&f, a](double u) { return f(a - std::log(u)) / u; };
        res = adaptive_on_finite(mapped, 0.0, 1.0, settings, &nan_seen);
    } else {
        res = adaptive_on_finite(f, a, b, settings, &nan_seen);
    }
    if (nan_seen) {
        throw QuadratureError("integrand returned NaN", res);
    }
    if (!res.converged) {
        throw QuadratureError("quadrature did not converge within max_subdivisions", res);
    }
    return res.value;
}

}  // namespace ougf
