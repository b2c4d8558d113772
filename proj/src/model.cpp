#include "prepay/model.hpp"

#include "prepay/errors.hpp"

#include <cmath>
#include <string>

namespace prepay {

namespace {

void require_positive(const char* field, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ValidationError(field, "must be a positive finite number, got " + std::to_string(value));
    }
}

}  // namespace

void validate(const CirParams& cir) {
    require_positive("k", cir.k);
    require_positive("theta", cir.theta);
    require_positive("sigma", cir.sigma);
}

void validate(const ContractParams& contract) {
    require_positive("c", contract.c);
    require_positive("m", contract.m);
    if (!(contract.duration > 0.0)) {
        throw ValidationError("T", "must be positive (or unbounded)");
    }
}

DerivedConstants derive_constants(const CirParams& cir) {
    validate(cir);
    const double sigma2 = cir.sigma * cir.sigma;
    const double s = std::sqrt(cir.k * cir.k + 2.0 * sigma2);
    DerivedConstants out{};
    out.s = s;
    // s - k = 2 sigma^2 / (s + k) keeps lambda, alpha and a_exp free of cancellation
    // when sigma is small against k.
    const double s_plus_k = s + cir.k;
    out.lambda = -2.0 / s_plus_k;
    out.p = 2.0 * s / sigma2;
    out.alpha = 2.0 * cir.k * cir.theta / (s * s_plus_k);
    out.gamma = 2.0 * cir.k * cir.theta / sigma2;
    out.a_exp = sigma2 / (s * s_plus_k);
    if (!(std::isfinite(out.p) && std::isfinite(out.gamma) && out.alpha > 0.0)) {
        throw ValidationError("sigma", "too small: derived constants are not representable");
    }
    return out;
}

double balance(const ContractParams& contract, double tau) {
    if (!(tau >= 0.0)) throw DomainError("balance: tau must be nonnegative");
    return contract.m / contract.c * -std::expm1(-contract.c * tau);
}

}  // namespace prepay
