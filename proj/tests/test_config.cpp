#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "lrt/config.hpp"

namespace {

lrt::ConfigNode parse(const std::string& text) {
    std::istringstream is(text);
    return lrt::parse_config_text(is);
}

const char* kSpinRun = R"(
# minimal adaptive run
engine = lrtdvp
seed = 7

model {
  name = spin_lattice
  Lx = 2
  Ly = 1
  Jz = 1.0
  hx = 0.75
  gamma = 1.0
}

solver {
  t1 = 0.5
  rel_tol = 1e-8
  n_samples = 11
}

rank {
  enabled = true
  chi_variant = projected_trace
  eps_max = 1e-4
  M_min = 1
  M_max = 4
}

output {
  prefix = spin_test
}
)";

}  // namespace

TEST_CASE("parser handles sections, lists and comments") {
    const lrt::ConfigNode n = parse(R"(
top = 1.5   # trailing comment
flags = [a, b, c]
nested {
  # full-line comment
  inner = yes
  deeper {
    k = -2
  }
}
)");
    CHECK(n.get_double("top") == 1.5);
    const std::vector<std::string> flags = n.get_string_list("flags");
    REQUIRE(flags.size() == 3);
    CHECK(flags[0] == "a");
    CHECK(flags[2] == "c");
    REQUIRE(n.section("nested") != nullptr);
    CHECK(n.section("nested")->get_bool("inner", false));
    REQUIRE(n.section("nested")->section("deeper") != nullptr);
    CHECK(n.section("nested")->section("deeper")->get_double("k") == -2.0);
    CHECK(n.section("missing") == nullptr);
}

TEST_CASE("parser reports the offending line") {
    try {
        parse("a = 1\nb = \nc = 3\n");
        FAIL("expected a parse error");
    } catch (const lrt::ConfigError& e) {
        CHECK(e.line == 2);
    }

    try {
        parse("a = 1\nsec {\n x = 2\n");  // unterminated section
        FAIL("expected a parse error");
    } catch (const lrt::ConfigError& e) {
        CHECK(e.line >= 2);
    }

    try {
        parse("a = 1\na = 2\n");
        FAIL("duplicate keys must be rejected");
    } catch (const lrt::ConfigError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("typed accessors validate and fall back") {
    const lrt::ConfigNode n = parse("x = 2.5\nn = 12\nflag = false\nlist = [1, 2.5, -3e2]\n");
    CHECK(n.get_double("x") == 2.5);
    CHECK(n.get_size("n") == 12);
    CHECK(n.get_bool("flag", true) == false);
    CHECK(n.get_double("absent", 9.0) == 9.0);
    CHECK(n.get_size("absent", 4) == 4);
    CHECK(n.get_string("absent", "d") == "d");

    const std::vector<double> xs = n.get_double_list("list");
    REQUIRE(xs.size() == 3);
    CHECK(xs[2] == -300.0);

    CHECK_THROWS_AS(n.get_double("flag"), lrt::ConfigError);
    CHECK_THROWS_AS(n.get_size("x"), lrt::ConfigError);  // not an integer
    CHECK_THROWS_AS(n.get_double("absent"), lrt::ConfigError);
}

TEST_CASE("unused keys are flagged with their location") {
    const lrt::ConfigNode n = parse("known = 1\ntypo_key = 2\n");
    CHECK(n.get_double("known") == 1.0);
    try {
        n.check_all_used();
        FAIL("typo_key should have been reported");
    } catch (const lrt::ConfigError& e) {
        CHECK(std::string(e.what()).find("typo_key") != std::string::npos);
        CHECK(e.line == 2);
    }
}

TEST_CASE("set_path creates nested values") {
    lrt::ConfigNode n = parse("model {\n G = 1\n}\n");
    n.set_path("model.G", "45");
    n.set_path("solver.t1", "2.0");
    CHECK(n.section("model")->get_double("G") == 45.0);
    CHECK(n.section("solver")->get_double("t1") == 2.0);
}

TEST_CASE("a complete run setup loads and consumes every key") {
    const lrt::ConfigNode n = parse(kSpinRun);
    const lrt::RunSetup s = lrt::load_run_setup(n);
    CHECK_NOTHROW(n.check_all_used());

    CHECK(s.engine == "lrtdvp");
    CHECK(s.seed == 7);
    CHECK(s.bundle.model.dim == 4);
    CHECK(s.solver.t1 == 0.5);
    CHECK(s.solver.rel_tol == 1e-8);
    CHECK(s.solver.output_points == 11);
    CHECK(s.rank_adaptive);
    CHECK(s.policy.eps_max == 1e-4);
    CHECK(s.policy.M_max == 4);
    CHECK(s.policy.seed == 7);
    CHECK(s.prefix == "spin_test");
    // all model observables recorded by default
    CHECK(s.observables.size() == s.bundle.observables.size());
}

TEST_CASE("observable filter keeps the requested subset in order") {
    std::string text = kSpinRun;
    text += "\nobservables = [M_z, M_y]\n";
    const lrt::RunSetup s = lrt::load_run_setup(parse(text));
    REQUIRE(s.observables.size() == 2);
    CHECK(s.observables[0].name == "M_z");
    CHECK(s.observables[1].name == "M_y");

    std::string bad = kSpinRun;
    bad += "\nobservables = [M_z, no_such_thing]\n";
    CHECK_THROWS_AS(lrt::load_run_setup(parse(bad)), lrt::ConfigError);
}

TEST_CASE("missing end time is an error unless the model supplies one") {
    CHECK_THROWS_AS(lrt::load_run_setup(parse(R"(
model {
  name = spin_lattice
}
)")),
                    lrt::ConfigError);

    // the cat gate publishes its gate duration as the default end time
    const lrt::RunSetup s = lrt::load_run_setup(parse(R"(
model {
  name = cat_gate
  gate = z
  alpha_sq = 4.0
  epsilon = 0.05
}
)"));
    CHECK(s.solver.t1 == doctest::Approx(2.5 * std::acos(-1.0)).epsilon(1e-12));
}

TEST_CASE("baseline engine requires its step") {
    std::string text = R"(
engine = baseline
model {
  name = spin_lattice
  Lx = 2
  Ly = 1
}
solver {
  t1 = 0.1
}
)";
    CHECK_THROWS_AS(lrt::load_run_setup(parse(text)), lrt::ConfigError);

    text += "baseline {\n  dt = 1e-3\n  eps_max = 1e-5\n}\n";
    const lrt::RunSetup s = lrt::load_run_setup(parse(text));
    CHECK(s.engine == "baseline");
    CHECK(s.baseline_dt == 1e-3);
    CHECK(s.baseline_eps == 1e-5);
}

TEST_CASE("unknown engine and model names are rejected") {
    CHECK_THROWS_AS(lrt::load_run_setup(parse(R"(
engine = quantum_leap
model {
  name = spin_lattice
}
solver {
  t1 = 1
}
)")),
                    lrt::ConfigError);
    CHECK_THROWS_AS(lrt::load_run_setup(parse(R"(
model {
  name = hypercube
}
solver {
  t1 = 1
}
)")),
                    lrt::ConfigError);
}

TEST_CASE("sweep spec is read and consumed") {
    std::string text = kSpinRun;
    text += R"(
sweep {
  parameter = model.hx
  values = [0.25, 0.5, 0.75]
}
)";
    const lrt::ConfigNode n = parse(text);
    const lrt::SweepSpec spec = lrt::read_sweep_spec(n);
    CHECK(spec.active);
    CHECK(spec.parameter == "model.hx");
    REQUIRE(spec.values.size() == 3);
    CHECK(spec.values[1] == "0.5");

    CHECK(!lrt::read_sweep_spec(parse(kSpinRun)).active);
}

TEST_CASE("serialization round-trips the tree") {
    const lrt::ConfigNode n = parse(kSpinRun);
    std::ostringstream os;
    lrt::write_config_text(os, n);
    const lrt::ConfigNode back = parse(os.str());

    // spot-check values and structure survive
    CHECK(back.get_string("engine") == "lrtdvp");
    CHECK(back.section("model")->get_double("hx") == 0.75);
    CHECK(back.section("rank")->get_double("eps_max") == 1e-4);
    CHECK(back.section("output")->get_string("prefix") == "spin_test");

    // and the round-tripped tree still drives a full setup
    const lrt::RunSetup s = lrt::load_run_setup(back);
    CHECK(s.bundle.model.dim == 4);
}

TEST_CASE("explicit sample times override the uniform grid") {
    std::string text = kSpinRun;
    text += "\n";
    lrt::ConfigNode n = parse(text);
    n.set_path("solver.sample_times", "[0.0, 0.1, 0.5]");
    const lrt::RunSetup s = lrt::load_run_setup(n);
    const std::vector<double> ts = s.solver.sample_times();
    REQUIRE(ts.size() == 3);
    CHECK(ts[0] == 0.0);
    CHECK(ts[1] == 0.1);
    CHECK(ts[2] == 0.5);
}
