#include "doctest.h"

#include "prepay/errors.hpp"
#include "prepay/model.hpp"

#include <cmath>
#include <string>

using namespace prepay;

TEST_SUITE("model") {
    TEST_CASE("derived constants for the primary fixture") {
        const DerivedConstants k = derive_constants({0.25, 0.06, 0.1});
        CHECK(k.s == doctest::Approx(std::sqrt(0.0825)).epsilon(1e-15));
        CHECK(k.lambda == doctest::Approx(-3.72281323269014).epsilon(1e-13));
        CHECK(k.p == doctest::Approx(57.4456264653803).epsilon(1e-13));
        CHECK(k.alpha == doctest::Approx(0.194417580332266).epsilon(1e-13));
        CHECK(k.gamma == doctest::Approx(3.0).epsilon(1e-15));
        CHECK(k.a_exp == doctest::Approx(0.0648058601107554).epsilon(1e-13));
    }

    TEST_CASE("constant relations hold across parameters") {
        for (double kk : {0.01, 0.25, 3.0}) {
            for (double sigma : {0.02, 0.1, 0.6}) {
                const CirParams cir{kk, 0.05, sigma};
                const DerivedConstants k = derive_constants(cir);
                const double var = sigma * sigma;
                CHECK(std::abs(0.5 * var * k.lambda * k.lambda - kk * k.lambda - 1.0) < 1e-13);
                CHECK(k.a_exp == doctest::Approx(-k.lambda / k.p).epsilon(1e-14));
                CHECK(k.alpha == doctest::Approx(kk * 0.05 / var * (1 - kk / k.s)).epsilon(1e-10));
                CHECK(k.a_exp > 0.0);
                CHECK(k.a_exp < 0.5);
                CHECK(k.alpha < k.gamma);
            }
        }
    }

    TEST_CASE("validation names the offending field") {
        auto field_of = [](auto&& fn) {
            try {
                fn();
            } catch (const ValidationError& e) {
                return e.field();
            }
            return std::string("none");
        };
        CHECK(field_of([] { validate(CirParams{-1, 0.06, 0.1}); }) == "k");
        CHECK(field_of([] { validate(CirParams{0.25, 0.0, 0.1}); }) == "theta");
        CHECK(field_of([] { validate(CirParams{0.25, 0.06, 0.0}); }) == "sigma");
        CHECK(field_of([] { validate(CirParams{0.25, std::nan(""), 0.1}); }) == "theta");
        CHECK(field_of([] { validate(ContractParams{0.0, 0.05}); }) == "c");
        CHECK(field_of([] { validate(ContractParams{0.05, -1.0}); }) == "m");
        CHECK(field_of([] { derive_constants(CirParams{0.25, 0.06, -0.1}); }) == "sigma");
    }

    TEST_CASE("Feller flag") {
        CHECK(CirParams{0.25, 0.06, 0.1}.feller());
        CHECK_FALSE(CirParams{0.1, 0.03, 0.2}.feller());
    }

    TEST_CASE("balance") {
        const ContractParams contract{0.05, 0.05};
        CHECK(balance(contract, 0.0) == 0.0);
        CHECK(balance(contract, 10.0) == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-15));
        CHECK(balance(contract, 1e-9) == doctest::Approx(0.05e-9).epsilon(1e-9));
        CHECK(balance(contract, INFINITY) == 1.0);
    }
}
