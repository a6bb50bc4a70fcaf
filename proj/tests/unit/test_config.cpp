#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "support.hpp"
#include "wide/config.hpp"
#include "wide/report_io.hpp"

using namespace wide;

namespace {

const char* kIni = R"(
[grid]
dim = 2
n = 16

[params]
epsilon = 0.2
sigma = 0.5
nu = 0.05
T = 0.5
tau = 0.025
quadrature = interval
convection = false

[datum]
kind = random_modes
seed = 42
k_cut = 3

[optimizer]
max_iters = 50
grad_tol = 1e-7
preconditioner = weight

[diagnostics]
s = -2
buffer = 0.1

[sweep]
eps_list = 0.4, 0.2, 0.1
sigma_alt = none

[output]
dir = results
)";

const char* kJson = R"({
  "grid": {"dim": 2, "n": 16},
  "params": {"epsilon": 0.2, "sigma": 0.5, "nu": 0.05, "T": 0.5, "tau": 0.025,
             "quadrature": "interval", "convection": false},
  "datum": {"kind": "random_modes", "seed": 42, "k_cut": 3},
  "optimizer": {"max_iters": 50, "grad_tol": 1e-7, "preconditioner": "weight"},
  "diagnostics": {"s": -2, "buffer": 0.1},
  "sweep": {"eps_list": [0.4, 0.2, 0.1], "sigma_alt": null},
  "output": {"dir": "results"}
})";

std::string error_of(const std::string& text, bool json = false) {
  try {
    auto c = parse_config_string(text, json);
    c.validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("ini and json configs agree") {
  for (bool json : {false, true}) {
    auto c = parse_config_string(json ? kJson : kIni, json);
    c.validate();
    CHECK(c.grid.n == 16);
    CHECK(c.params.epsilon == 0.2);
    CHECK(c.params.sigma == 0.5);
    CHECK(c.params.nu == 0.05);
    CHECK(c.params.horizon == 0.5);
    CHECK(c.tau == 0.025);
    CHECK(c.steps() == 20);
    CHECK(c.params.quadrature == QuadratureRule::interval);
    CHECK_FALSE(c.params.convection);
    CHECK(c.datum.kind == DatumKind::random_modes);
    CHECK(c.datum.seed == 42);
    CHECK(c.datum.k_cut == 3.0);
    CHECK(c.optimizer.max_iters == 50);
    CHECK(c.optimizer.grad_tol == 1e-7);
    CHECK(c.optimizer.preconditioner == Preconditioner::weight);
    CHECK(c.diagnostics.s == -2.0);
    CHECK(c.diagnostics.buffer == 0.1);
    CHECK(c.sweep.eps_list == std::vector<double>{0.4, 0.2, 0.1});
    CHECK_FALSE(c.sweep.sigma_alt.has_value());
    CHECK(c.output_dir == "results");
    CHECK(c.warnings.empty());
  }
}

TEST_CASE("defaults validate") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.steps() == 100);
  CHECK(c.sweep.sigma_alt.value() == 1.0);
}

TEST_CASE("every rule violation is a named config error") {
  CHECK(error_of("[params]\nepsilon = 0.01\n").find("epsilon >= T/25") != std::string::npos);
  CHECK(error_of("[params]\ntau = 0.03\n").find("divide") != std::string::npos);
  CHECK(error_of("[params]\nepsilon = abc\n").find("params.epsilon") != std::string::npos);
  CHECK(error_of("[params]\nsigma = -1\n").find("sigma") != std::string::npos);
  CHECK(error_of("[params]\nnu = 0\n").find("nu") != std::string::npos);
  CHECK(error_of("[params]\nquadrature = simpson\n").find("quadrature") != std::string::npos);
  CHECK(error_of("[params]\nconvection = maybe\n").find("boolean") != std::string::npos);
  CHECK(error_of("[grid]\nn = 15\n") != "");
  CHECK(error_of("[grid]\nn = 16.5\n").find("integer") != std::string::npos);
  CHECK(error_of("[params]\nepsilom = 0.1\n").find("unknown config key 'params.epsilom'") != std::string::npos);
  CHECK(error_of("[extra]\nx = 1\n").find("unknown") != std::string::npos);
  CHECK(error_of("stray = 1\n").find("section") != std::string::npos);
  CHECK(error_of("[datum]\nkind = vortex\n").find("datum.kind") != std::string::npos);
  CHECK(error_of("[datum]\nkind = file\n").find("datum.path") != std::string::npos);
  CHECK(error_of("[datum]\nseed = -3\n").find("datum.seed") != std::string::npos);
  CHECK(error_of("[grid]\ndim = 3\nn = 8\n").find("taylor_green") != std::string::npos);
  CHECK(error_of("[sweep]\neps_list = 0.1, 0.2\n").find("decreasing") != std::string::npos);
  CHECK(error_of("[sweep]\neps_list = 0.2, 0.01\n").find("T/25") != std::string::npos);
  CHECK(error_of("[optimizer]\nmemory = 0\n").find("memory") != std::string::npos);
  CHECK(error_of("[optimizer]\npreconditioner = jacobi\n").find("preconditioner") != std::string::npos);
  CHECK(error_of("[diagnostics]\nbuffer = 1\n").find("buffer") != std::string::npos);
  CHECK(error_of("[output]\ndir =\n").find("output.dir") != std::string::npos);
  CHECK(error_of("{\"params\": 3}", true).find("object") != std::string::npos);
  CHECK(error_of("{\"params\": {\"epsilon\": [1, [2]]}}", true) != "");
  CHECK(error_of("{not json", true).find("parse") != std::string::npos);
  CHECK(error_of("[params\n").find("parse") != std::string::npos);
  CHECK_THROWS_AS(load_config("no_such_config.ini"), ConfigError);
}

TEST_CASE("small sigma warns but validates") {
  auto c = parse_config_string("[params]\nsigma = 0.1\n", false);
  CHECK_NOTHROW(c.validate());
  REQUIRE(c.warnings.size() == 1);
  CHECK(c.warnings[0].find("energy certificate invalid") != std::string::npos);
}

TEST_CASE("datum construction") {
  auto c = parse_config_string("[grid]\nn = 16\n[datum]\nkind = random_modes\nseed = 3\n", false);
  c.validate();
  const auto a = make_datum(c);
  CHECK(a == random_field(c.grid, 3, 4.0));
  CHECK(max_divergence(a) < 1e-12);
  c.datum.kind = DatumKind::taylor_green;
  CHECK((make_datum(c) - testsupport::taylor_green_field(c.grid)).max_abs() < 1e-15);
  c.datum.kind = DatumKind::file;
  c.datum.path = "missing_datum.bin";
  CHECK_THROWS_AS(make_datum(c), InputError);
}

TEST_CASE("seventeen-digit output") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(2.0) == "2");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  JsonObject o;
  o.number("a", 0.5).boolean("b", true).text("c", "x\"y");
  JsonObject inner;
  inner.integer("k", 3);
  o.object("d", inner).number("nan", std::nan(""));
  CHECK(o.dump() == "{\n  \"a\": 0.5,\n  \"b\": true,\n  \"c\": \"x\\\"y\",\n  \"d\": {\n    \"k\": 3\n  },\n  \"nan\": null\n}");
}
