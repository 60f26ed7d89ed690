#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "heis/cli.hpp"
#include "heis/errors.hpp"
#include "heis/excess_lab.hpp"
#include "heis/io.hpp"
#include "heis/parallel.hpp"
#include "heis/plate_solver.hpp"
#include "support.hpp"

using namespace heis;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "heislab_io_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_config(const std::string& name, const json& j) {
  const auto path = (temp_dir() / name).string();
  io::write_file(path, j.dump());
  return path;
}

}  // namespace

TEST_SUITE("cli_io") {

TEST_CASE("doubles round-trip through text") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng) * std::pow(10.0, k % 40 - 20);
    CHECK(io::parse_double(io::format_double(x)) == x);
  }
  CHECK_THROWS_AS(io::parse_double("1.5x"), ValidationError);
  CHECK_THROWS_AS(io::parse_double(""), ValidationError);
}

TEST_CASE("metric round-trip") {
  std::mt19937_64 rng(2);
  const MetricForm h(test::random_spd(rng, 4, 10.0));
  const json j = io::to_json(h);
  CHECK(io::metric_from_json(json::parse(j.dump())) == h);
  json bad = j;
  bad["extra"] = 1;
  CHECK_THROWS_AS(io::metric_from_json(bad), ValidationError);
}

TEST_CASE("field round-trip") {
  const auto v = ScalarField::sample(2, 9, 1.5, [](const SmallVec& x) { return std::sin(x[0]) * std::exp(x[1]); });
  CHECK(io::field_from_json(json::parse(io::to_json(v).dump())) == v);
  json bad = io::to_json(v);
  bad["spacing"] = 0.1;
  CHECK_THROWS_AS(io::field_from_json(bad), ValidationError);
  bad = io::to_json(v);
  bad["colour"] = "red";
  CHECK_THROWS_AS(io::field_from_json(bad), ValidationError);
  bad = io::to_json(v);
  bad["values"].erase(0);
  CHECK_THROWS_AS(io::field_from_json(bad), ValidationError);
}

TEST_CASE("coefficient tensor round-trip") {
  std::mt19937_64 rng(3);
  const CoefficientTensor c = compute_coefficients(MetricForm(test::random_spd(rng, 6, 5.0)));
  CHECK(io::coefficients_from_json(json::parse(io::to_json(c).dump())) == c);
}

TEST_CASE("excess report round-trip") {
  ExcessReport r;
  r.n = 2;
  for (double rad : {0.4, 0.2}) {
    ExcessRecord e;
    e.radius = rad;
    e.excess_pi0 = 0.1 * rad;
    e.excess_best = 0.01 * rad * rad;
    e.A = Eigen::Matrix2d{{0.1, -0.2}, {-0.2, 0.3}} * rad;
    e.q_osc = rad / 3;
    e.phi_osc = rad / 7;
    e.best_converged = rad > 0.3;
    r.records.push_back(e);
  }
  r.fitted_exponent = 2.01;
  CHECK(io::excess_report_from_json(json::parse(io::to_json(r).dump())) == r);
  r.fitted_exponent = NAN;
  r.flat_exact = true;
  CHECK(io::excess_report_from_json(json::parse(io::to_json(r).dump())) == r);
  const auto recs = io::excess_records_from_csv(io::excess_csv(r), 2);
  REQUIRE(recs.size() == 2);
  CHECK(recs[1].A == r.records[1].A);
  CHECK(recs[0].phi_osc == r.records[0].phi_osc);
  const std::string csv = io::excess_csv(r);
  CHECK(csv.rfind("radius,excess_pi0,excess_best,A_1_1,A_1_2,A_2_2,q_osc,phi_osc", 0) == 0);
  const json s = io::excess_summary(r);
  CHECK(s.contains("fitted_exponent"));
}

TEST_CASE("torus csv") {
  RatioRecord rec;
  rec.n = 3;
  rec.r = 0.5;
  rec.samples = 1000;
  rec.seed = 7;
  rec.ratio = 1.25;
  const std::string csv = io::torus_csv({rec});
  CHECK(csv.rfind("n,r,samples,seed,volume,std_error,ratio\n", 0) == 0);
  CHECK(csv.find("3,0.5,1000,7,0,0,1.25") != std::string::npos);
}

TEST_CASE("version and usage") {
  const Run v = run_cli({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out == "1.0.0\n");
  CHECK(run_cli({}).code == 1);
  CHECK(run_cli({"frobnicate"}).code == 1);
}

TEST_CASE("selftest") {
  const Run r = run_cli({"selftest"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("config validation") {
  CHECK(run_cli({"minimize", "--config", write_config("bad_key.json", {{"n", 2}, {"gird", 5}})}).code == 1);
  CHECK(run_cli({"minimize", "--config", write_config("bad_grid.json", {{"grid", {{"points", 8}}}})}).code == 1);
  CHECK(run_cli({"minimize", "--config", write_config("bad_family.json", {{"boundary", {{"family", "blob"}}}})}).code == 1);
  CHECK(run_cli({"minimize", "--config", write_config("bad_param.json",
                                                      {{"boundary", {{"family", "bump"}, {"height", 1}}}})})
            .code == 1);
  CHECK(run_cli({"minimize", "--config", (temp_dir() / "missing.json").string()}).code == 1);
  const auto p = (temp_dir() / "garbage.json").string();
  io::write_file(p, "{not json");
  CHECK(run_cli({"minimize", "--config", p}).code == 1);
  const Run r = run_cli({"torus-ratio", "--n", "2", "--radii", "1,-2", "--samples", "5000"});
  CHECK(r.code == 1);
  CHECK(r.out.empty());
  CHECK(r.err.find("error") != std::string::npos);
}

TEST_CASE("cli::parse_config fills defaults") {
  const cli::ExperimentConfig c = cli::parse_config("decay", json{{"n", 2}, {"radii", {0.4, 0.2}}});
  CHECK(c.grid.points == 65);
  CHECK(c.radii == std::vector<double>{0.4, 0.2});
  CHECK_THROWS_AS(cli::parse_config("decay", json{{"samples", 10}}), ValidationError);
}

TEST_CASE("minimize with zero data reports the box volume") {
  const std::string cfg = write_config("zero.json", {{"n", 2}, {"grid", {{"points", 17}, {"half_width", 1.0}}}});
  const Run r = run_cli({"minimize", "--config", cfg});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  const double h = 2.0 / 16;
  CHECK(j["result"]["final_area"].get<double>() == doctest::Approx(std::pow(15 * h, 2)));
  CHECK(r.err.find("converged") != std::string::npos);
}

TEST_CASE("non-convergence exits with 2") {
  const std::string cfg =
      write_config("short.json", {{"n", 2},
                                  {"grid", {{"points", 17}}},
                                  {"boundary", {{"family", "bump"}, {"eps", 0.2}}},
                                  {"solver", {{"max_iterations", 0}}}});
  CHECK(run_cli({"minimize", "--config", cfg}).code == 2);
}

TEST_CASE("outputs are byte-identical across runs and thread counts") {
  const auto dir = temp_dir();
  const std::string a = (dir / "torus_a.csv").string(), b = (dir / "torus_b.csv").string();
  const Run ra = run_cli({"--threads", "1", "torus-ratio", "--n", "3", "--radii", "0.1,1,10,40,80", "--samples",
                          "20000", "--seed", "7", "--output", a});
  const Run rb = run_cli({"--threads", "3", "torus-ratio", "--n", "3", "--radii", "0.1,1,10,40,80", "--samples",
                          "20000", "--seed", "7", "--output", b});
  CHECK(ra.code == 0);
  CHECK(rb.code == 0);
  const std::string ta = io::read_file(a);
  CHECK(ta == io::read_file(b));
  CHECK(std::count(ta.begin(), ta.end(), '\n') == 6);
  CHECK(!ra.out.empty());

  const std::string cfg = write_config("decay.json", {{"n", 2},
                                                      {"grid", {{"points", 33}}},
                                                      {"boundary", {{"family", "bump"}, {"eps", 0.2}, {"center", {0.35, 0.2}}}},
                                                      {"radii", {0.4, 0.2, 0.1}}});
  const std::string da = (dir / "decay_a.csv").string(), db = (dir / "decay_b.csv").string();
  CHECK(run_cli({"--threads", "1", "decay", "--config", cfg, "--output", da}).code == 0);
  CHECK(run_cli({"--threads", "2", "decay", "--config", cfg, "--output", db}).code == 0);
  CHECK(io::read_file(da) == io::read_file(db));
  CHECK(io::read_file(da + ".summary.json") == io::read_file(db + ".summary.json"));
  parallel::set_max_threads(1);
}

TEST_CASE("every subcommand runs on a small config") {
  const std::string g = write_config("gauge.json", {{"n", 1}, {"points", {{1.0, 0.0, 0.0}, {0.0, 0.0, 0.25}}}});
  const Run rg = run_cli({"gauge", "--config", g});
  CHECK(rg.code == 0);
  CHECK(rg.out == "index,gauge\n0,1\n1,1\n");
  const std::string sp = write_config("plate.json", {{"n", 2},
                                                     {"grid", {{"points", 17}}},
                                                     {"boundary", {{"family", "sinusoid"}, {"eps", 0.1}}},
                                                     {"interior", {{"r", 0.3}, {"R", 0.6}}}});
  CHECK(run_cli({"solve-plate", "--config", sp}).code == 0);
  const std::string ex = write_config("excess.json", {{"n", 2},
                                                      {"grid", {{"points", 33}}},
                                                      {"boundary", {{"family", "quadratic"}, {"A", {{0.2, 0.0}, {0.0, 0.1}}}}},
                                                      {"radius", 0.5}});
  const Run re = run_cli({"excess", "--config", ex});
  CHECK(re.code == 0);
  CHECK(json::parse(re.out).contains("excess"));
}

}  // TEST_SUITE
