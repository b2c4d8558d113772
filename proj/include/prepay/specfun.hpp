#pragma once

// Confluent hypergeometric functions M (Kummer) and U (Tricomi) for real
// parameters and real argument, plus log-gamma.
//
// Region selection:
//   M, z >= 0 : positive Taylor series summed with a running log scale, or the
//               large-z asymptotic series once it converges to double precision.
//   M, z <  0 : Kummer transformation M(a,b,z) = e^z M(b-a,b,-z).
//   U, z >  0 : integral representation (a > 0), or the large-z asymptotic series
//               once it converges. The reflection formula through M is never used
//               because it cancels catastrophically at integer b.

namespace prepay::specfun {

struct HypergeometricParams {
    double alpha;
    double gamma;
};

/// ln Gamma(x) for x > 0. Throws DomainError otherwise.
double log_gamma(double x);

/// M(alpha, gamma, z). Throws DomainError if gamma is zero or a negative integer and
/// OverflowError if the value exceeds the double range.
double kummer_m(HypergeometricParams params, double z);

/// ln M(alpha, gamma, z) for z >= 0 and alpha, gamma > 0 (where M > 0). Never overflows.
double log_kummer_m(HypergeometricParams params, double z);

/// dM/dz = (alpha / gamma) M(alpha + 1, gamma + 1, z).
double kummer_m_prime(HypergeometricParams params, double z);

/// U(alpha, gamma, z) for z > 0. Throws DomainError for z <= 0.
double tricomi_u(HypergeometricParams params, double z);

/// dU/dz = -alpha U(alpha + 1, gamma + 1, z).
double tricomi_u_prime(HypergeometricParams params, double z);

/// U evaluated by quadrature of its integral representation only (alpha > 0, z > 0).
/// Exposed so the asymptotic branch can be cross-checked against it.
double tricomi_u_integral(HypergeometricParams params, double z);

/// Closed-form Wronskian M U' - M' U = -(Gamma(gamma) / Gamma(alpha)) z^-gamma e^z,
/// evaluated in log space. Throws DomainError for z <= 0 and OverflowError if the
/// magnitude is not representable.
double wronskian_mu(HypergeometricParams params, double z);

}  // namespace prepay::specfun
