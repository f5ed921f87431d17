#pragma once

namespace ougf {

// Digamma psi(x) for x > 0, accurate to ~1e-13 relative.
// Recurrence psi(x) = psi(x+1) - 1/x shifts the argument above 10, then an
// asymptotic (Bernoulli) series is applied.
// Throws std::domain_error for x <= 0.
double digamma(double x);

// log Gamma(x) for x > 0. Throws std::domain_error for x <= 0.
double log_gamma(double x);

// (1-u)^q - 1 + q*u without cancellation for small u (0 <= u <= 1, q >= 0).
// This is the compensated power term shared by the Laplace exponent and the
// cumulant integrands; naive evaluation loses all digits once u ~ 1e-8.
double pow1m_compensated(double u, double q);

}  // namespace ougf
