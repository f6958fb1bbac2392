#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cli_commands.hpp"
#include "doctest.h"
#include "rdtrack/builtins.hpp"
#include "rdtrack/trace_io.hpp"

using namespace rdtrack;
using namespace rdtrack::cli;

namespace {

#ifndef RDTRACK_CLI_PATH
#define RDTRACK_CLI_PATH "rdtrack"
#endif

std::string tmp_path(const std::string& name) { return std::string("cli_test_") + name; }

int run_cli(const std::string& args) {
  std::string cmd = std::string(RDTRACK_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("problem resolution and grid parsing") {
  CHECK(resolve_problem("fig3").repro_size() == 4);
  CHECK(resolve_problem("binary-hamming:p=0.3").source[0] == 0.3);
  CHECK_THROWS(resolve_problem("/nonexistent/file.json"));
  auto lin = parse_beta_grid("lin:4:1:4");
  REQUIRE(lin.size() == 4);
  CHECK(lin[0] == 4.0);
  CHECK(lin[3] == 1.0);
  auto lg = parse_beta_grid("log2:8:1:4");
  CHECK(lg[0] == doctest::Approx(8.0));
  CHECK(lg[1] == doctest::Approx(4.0));
  CHECK(lg[3] == doctest::Approx(1.0));
  auto list = parse_beta_grid("3.0,2.0,1.5");
  CHECK(list.size() == 3);
  CHECK_THROWS(parse_beta_grid("1.0,2.0"));
  CHECK_THROWS(parse_beta_grid("lin:1:4:4"));
}

TEST_CASE("track command writes trace files and a summary") {
  TrackArgs args;
  args.problem = "binary-hamming:p=0.3";
  args.config.beta0 = 8.0;
  args.config.beta_min = 0.5;
  args.config.step = -0.25;
  args.config.order = 3;
  args.out_json = tmp_path("trace.json");
  args.out_csv = tmp_path("trace.csv");
  std::ostringstream log;
  CHECK(cmd_track(args, log) == kExitOk);
  CHECK(log.str().find("bifurcation") != std::string::npos);
  std::ifstream f(args.out_json);
  REQUIRE(f.good());
  TrackTrace trace = load_trace_json(f);
  CHECK(trace.bifurcations.size() == 1);
  std::string csv = slurp(args.out_csv);
  CHECK(csv.find("beta,r1,r2,D,R_nats,min_marginal,event") != std::string::npos);
}

TEST_CASE("determinism: identical manifests give identical bytes") {
  TrackArgs args;
  args.problem = "binary-hamming:p=0.3";
  args.config.beta0 = 8.0;
  args.config.beta_min = 1.0;
  args.config.step = -0.5;
  args.out_json = tmp_path("det1.json");
  args.out_csv = tmp_path("det1.csv");
  std::ostringstream log1, log2;
  REQUIRE(cmd_track(args, log1) == kExitOk);
  std::string json1 = slurp(args.out_json);
  std::string csv1 = slurp(args.out_csv);
  REQUIRE(cmd_track(args, log2) == kExitOk);
  CHECK(slurp(args.out_json) == json1);
  CHECK(slurp(args.out_csv) == csv1);

  BaArgs ba;
  ba.problem = "binary-hamming:p=0.3";
  ba.grid = "lin:4:1:7";
  ba.out_csv = tmp_path("det_ba.csv");
  std::ostringstream bl;
  REQUIRE(cmd_ba(ba, bl) == kExitOk);
  std::string bacsv = slurp(ba.out_csv);
  REQUIRE(cmd_ba(ba, bl) == kExitOk);
  CHECK(slurp(ba.out_csv) == bacsv);
}

TEST_CASE("ba and compare pipeline") {
  BaArgs ba;
  ba.problem = "binary-hamming:p=0.3";
  ba.grid = "lin:8:1:57";
  ba.tol = 1e-12;
  ba.out_csv = tmp_path("baseline.csv");
  std::ostringstream log;
  REQUIRE(cmd_ba(ba, log) == kExitOk);

  TrackArgs track;
  track.problem = "binary-hamming:p=0.3";
  track.config.beta0 = 8.0;
  track.config.beta_min = 1.0;
  track.config.step = -0.125;
  track.out_json = tmp_path("cmp_trace.json");
  REQUIRE(cmd_track(track, log) == kExitOk);

  CompareArgs cmp;
  cmp.trace_path = track.out_json;
  cmp.reference = ba.out_csv;
  cmp.out_csv = tmp_path("cmp.csv");
  std::ostringstream clog;
  CHECK(cmd_compare(cmp, clog) == kExitOk);
  CHECK(clog.str().find("max L-inf error") != std::string::npos);

  // a trace against its own oracle: tiny error
  CompareArgs cmp2;
  cmp2.trace_path = track.out_json;
  cmp2.reference = "oracle:binary-hamming:p=0.3";
  std::ostringstream clog2;
  CHECK(cmd_compare(cmp2, clog2) == kExitOk);

  // a trace against itself: max error exactly zero
  CompareArgs self;
  self.trace_path = track.out_json;
  self.reference = track.out_json;
  self.out_csv = tmp_path("self.csv");
  std::ostringstream slog;
  CHECK(cmd_compare(self, slog) == kExitOk);
  CHECK(slog.str().find("max L-inf error 0 ") != std::string::npos);
}

TEST_CASE("independent-mode BA and single-point grids") {
  BaArgs ba;
  ba.problem = "binary-hamming:p=0.3";
  ba.grid = "2.0";  // a single beta: one row
  ba.mode = "independent";
  ba.init = "uniform";
  ba.out_csv = tmp_path("indep.csv");
  std::ostringstream log;
  CHECK(cmd_ba(ba, log) == kExitOk);
  std::string csv = slurp(ba.out_csv);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // comment, header, one row
  ba.mode = "sideways";
  CHECK(cmd_ba(ba, log) == kExitUsage);
}

TEST_CASE("spectra classifies the flowchart cases on berger273") {
  SpectraArgs args;
  args.problem = "berger273";
  args.grid = "2.4,2.2,2.0";
  args.tol = 1e-9;
  args.out_csv = tmp_path("spectra.csv");
  std::ostringstream log;
  CHECK(cmd_spectra(args, log) == kExitOk);
  std::string csv = slurp(args.out_csv);
  CHECK(csv.find("classification") != std::string::npos);
  CHECK(csv.find("none") != std::string::npos);  // far from both bifurcations
}

TEST_CASE("exit codes distinguish usage errors") {
  CHECK(run_cli("track --problem /missing.json --out x.json") == kExitUsage);
  CHECK(run_cli("definitely-not-a-command") == kExitUsage);
  CHECK(run_cli("--help") == kExitOk);
  CHECK(run_cli("track --problem binary-hamming:p=0.3 --beta0 4 --beta-min 1 "
                "--step -0.5 --order 2 --out " +
                tmp_path("cli_e2e.json")) == kExitOk);
}

TEST_SUITE_END();
