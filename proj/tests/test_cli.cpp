#include "doctest.h"

#include "prepay/cli.hpp"
#include "prepay/json_writer.hpp"

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

using prepay::cli::Json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = prepay::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

const std::vector<std::string> kFixture{"--k", "0.25", "--theta", "0.06", "--sigma", "0.1", "--c", "0.05"};

std::vector<std::string> with(std::string command, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{std::move(command)};
    args.insert(args.end(), kFixture.begin(), kFixture.end());
    args.insert(args.end(), extra.begin(), extra.end());
    return args;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::string exact(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("json writer") {
        Json j;
        j["x"] = 0.1;
        j["n"] = 3;
        j["bad"] = std::nan("");
        j["list"] = Json::array({1.0 / 3.0});
        const std::string text = prepay::cli::to_json_text(j, 0);
        CHECK(text == "{\"x\":0.10000000000000001,\"n\":3,\"bad\":null,\"list\":[0.33333333333333331]}\n");
        CHECK(prepay::cli::csv_number(1.0 / 3.0) == "0.333333333333");
    }

    TEST_CASE("solve reports the fixture boundary") {
        const auto r = run(with("solve"));
        REQUIRE(r.code == 0);
        const Json j = Json::parse(r.out);
        CHECK(j["x_star"].get<double>() == doctest::Approx(0.00921728030947948).epsilon(1e-11));
        CHECK(j["c1"].get<double>() == 0.0);
        CHECK(std::abs(j["diagnostics"]["value_residual"].get<double>()) < 1e-8);
        CHECK(r.err.empty());
    }

    TEST_CASE("tolerance contract") {
        const Json loose = Json::parse(run(with("solve", {"--tol-root", "1e-3"})).out);
        const Json tight = Json::parse(run(with("solve", {"--tol-root", "1e-10"})).out);
        const double a = loose["x_star"].get<double>();
        const double b = tight["x_star"].get<double>();
        CHECK(std::abs(a - b) <= 1e-3 * b);
    }

    TEST_CASE("validation errors exit 2 and name the field") {
        const auto r = run({"solve", "--k", "-1", "--theta", "0.06", "--sigma", "0.1", "--c", "0.05"});
        CHECK(r.code == 2);
        const Json e = Json::parse(r.err);
        CHECK(e["error"]["type"] == "validation");
        CHECK(e["error"]["field"] == "k");
        CHECK(run(with("solve", {"--bogus", "1"})).code == 2);
        CHECK(run(with("solve", {"--output", "xml"})).code == 2);
        CHECK(run(with("curve", {"--points", "1"})).code == 2);
        CHECK(run({"solve", "--k", "0.25"}).code == 2);
    }

    TEST_CASE("no interior boundary exits 3") {
        const auto r = run({"solve", "--k", "0.1", "--theta", "0.06", "--sigma", "0.05", "--c", "0.03"});
        CHECK(r.code == 3);
        CHECK(Json::parse(r.err)["error"]["type"] == "no_bracket");
    }

    TEST_CASE("curve csv") {
        const Json s = Json::parse(run(with("solve")).out);
        const double x_star = s["x_star"].get<double>();
        const auto r = run(with("curve", {"--x-min", exact(x_star), "--x-max", exact(5 * x_star),
                                          "--points", "11"}));
        REQUIRE(r.code == 0);
        const auto rows = lines(r.out);
        REQUIRE(rows.size() == 12);
        CHECK(rows[0] == "x,v,ode_residual");
        double prev = 2.0;
        double prev_x = 0.0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            double x, v, res;
            REQUIRE(std::sscanf(rows[i].c_str(), "%lf,%lf,%lf", &x, &v, &res) == 3);
            CHECK(x > prev_x);
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
            CHECK(v < prev);
            CHECK(std::abs(res) <= 1e-6 * 0.05);
            if (i == 1) CHECK(std::abs(v - 1.0) <= 1e-8);
            prev = v;
            prev_x = x;
        }
    }

    TEST_CASE("curve scales by m / c") {
        const auto base = lines(run(with("curve", {"--points", "3"})).out);
        const auto scaled = lines(run(with("curve", {"--points", "3", "--m", "0.1"})).out);
        double v1, v2, x, r;
        std::sscanf(base[3].c_str(), "%lf,%lf,%lf", &x, &v1, &r);
        std::sscanf(scaled[3].c_str(), "%lf,%lf,%lf", &x, &v2, &r);
        CHECK(v2 == doctest::Approx(2.0 * v1).epsilon(1e-11));
    }

    TEST_CASE("verify without the slow oracles") {
        const auto r = run(with("verify", {"--skip", "fd", "--skip", "mc"}));
        CHECK(r.code == 0);
        const Json j = Json::parse(r.out);
        CHECK(j["passed"] == true);
        int skipped = 0;
        for (const auto& c : j["checks"]) {
            if (c["status"] == "skipped") ++skipped;
            CHECK(c["status"] != "fail");
        }
        CHECK(skipped == 2);
    }

    TEST_CASE("verify catches a corrupted constant") {
        const auto r = run(with("verify", {"--skip", "fd", "--skip", "mc", "--skip", "shooting",
                                           "--corrupt-constant", "alpha"}));
        CHECK(r.code == 5);
        const Json j = Json::parse(r.out);
        CHECK(j["passed"] == false);
        bool named = false;
        for (const auto& f : j["failed"]) named = named || f == "model.alpha_definition";
        CHECK(named);
    }

    TEST_CASE("compare on the fixture") {
        const auto r = run(with("compare", {"--fd-nodes", "400", "--mc-paths", "4000", "--output", "csv"}));
        CHECK(r.code == 0);
        const auto rows = lines(r.out);
        REQUIRE(rows.size() >= 8);
        CHECK(rows[0] == "method,quantity,x,estimate,reference,difference,tolerance,status");
        for (std::size_t i = 2; i < rows.size(); ++i) {
            CAPTURE(rows[i]);
            CHECK(rows[i].substr(rows[i].rfind(',') + 1) == "PASS");
        }
    }
}
