#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cli_commands.hpp"
#include "rdtrack/sympoly.hpp"
#include "rdtrack/version.hpp"

using namespace rdtrack;
using namespace rdtrack::cli;

namespace {

// RDTRACK_PK_CACHE names a directory whose pk_cache.txt skips regenerating
// the P_k polynomials across runs.
std::string pk_cache_file() {
  const char* dir = std::getenv("RDTRACK_PK_CACHE");
  if (!dir || !*dir) return {};
  return std::string(dir) + "/pk_cache.txt";
}

void load_pk_cache() {
  std::string path = pk_cache_file();
  if (path.empty()) return;
  std::ifstream f(path);
  if (f) load_P_cache(f);
}

void store_pk_cache() {
  std::string path = pk_cache_file();
  if (path.empty()) return;
  int have = max_cached_P_order();
  if (have < 1) return;
  std::ofstream f(path);
  if (f) save_P_cache(f, have);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rdtrack: reconstructs rate-distortion solution curves by tracking "
               "Blahut-Arimoto fixed points with high-order implicit derivatives"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // --- track ---
  TrackArgs track;
  auto* t = app.add_subcommand("track", "run root tracking and write a trace");
  t->add_option("--problem", track.problem, "problem file or builtin (fig3, berger273, binary-hamming:p=..)")
      ->required();
  t->add_option("--beta0", track.config.beta0, "starting multiplier");
  t->add_option("--beta-min", track.config.beta_min, "smallest multiplier on the grid");
  std::string spacing = "linear";
  t->add_option("--spacing", spacing, "grid spacing: linear | log2")
      ->check(CLI::IsMember({"linear", "log2"}));
  t->add_option("--step", track.config.step, "grid step in beta (negative, linear spacing)");
  t->add_option("--grid-points", track.config.points, "number of grid points (log2 spacing)");
  t->add_option("--order", track.config.order, "Taylor order L");
  t->add_option("--delta", track.config.delta, "cluster mass threshold");
  t->add_option("--ba-tol", track.config.ba_tol, "Blahut-Arimoto stopping tolerance");
  t->add_option("--ba-max-iter", track.config.ba_max_iter, "Blahut-Arimoto iteration cap");
  t->add_option("--eigen-thresh", track.config.eigen_threshold, "bifurcation eigenvalue threshold");
  t->add_option("--classify-every", track.config.classify_every,
                "classify every k-th grid point (0: only at stops)");
  t->add_option("--out", track.out_json, "trace JSON output path");
  t->add_option("--csv", track.out_csv, "trace CSV output path");
  t->add_option("--seed", track.seed, "seed recorded in the manifest");

  // --- ba ---
  BaArgs ba;
  auto* b = app.add_subcommand("ba", "Blahut-Arimoto along a beta grid");
  b->add_option("--problem", ba.problem, "problem file or builtin")->required();
  b->add_option("--grid", ba.grid, "grid spec lin:<hi>:<lo>:<n> | log2:<hi>:<lo>:<n> | b1,b2,..")
      ->required();
  b->add_option("--mode", ba.mode, "reverse-anneal | independent")
      ->check(CLI::IsMember({"reverse-anneal", "independent"}));
  b->add_option("--init", ba.init, "initialization for independent mode (uniform)");
  b->add_option("--tol", ba.tol, "stopping tolerance");
  b->add_option("--max-iter", ba.max_iter, "iteration cap per point");
  b->add_option("--out", ba.out_csv, "CSV output path");
  b->add_option("--seed", ba.seed, "seed recorded in the manifest");

  // --- compare ---
  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "error of a trace against an oracle or BA baseline");
  c->add_option("--trace", cmp.trace_path, "trace JSON produced by `track`")->required();
  c->add_option("--ref", cmp.reference, "oracle:binary-hamming:p=.., a `ba` CSV, or a trace JSON")->required();
  c->add_option("--out", cmp.out_csv, "per-beta error CSV output path");
  c->add_flag("!--no-delta-window", cmp.exclude_delta_window,
              "do not exclude baseline points inside the delta-window");
  c->add_option("--seed", cmp.seed, "seed recorded in the manifest");

  // --- compare-sweep ---
  SweepArgs sweep;
  auto* s = app.add_subcommand("compare-sweep",
                               "error-to-cost tradeoff data across orders and grid densities");
  s->add_option("--problem", sweep.problem, "problem builtin with an oracle");
  s->add_option("--ref", sweep.reference, "oracle reference");
  s->add_option("--orders", sweep.orders, "Taylor orders")->delimiter(',');
  s->add_option("--grids", sweep.grid_sizes, "grid sizes")->delimiter(',');
  s->add_option("--beta0", sweep.beta0, "top of the beta range");
  s->add_option("--beta-min", sweep.beta_min, "bottom of the beta range");
  s->add_option("--delta", sweep.delta, "cluster mass threshold");
  s->add_option("--min-repeat-ms", sweep.min_repeat_ms, "repeat timed runs up to this wall time");
  s->add_option("--out", sweep.out_csv, "CSV output path");
  s->add_option("--seed", sweep.seed, "seed recorded in the manifest");

  // --- spectra ---
  SpectraArgs spectra;
  auto* e = app.add_subcommand("spectra", "Jacobian spectra and bifurcation classification");
  e->add_option("--problem", spectra.problem, "problem file or builtin")->required();
  e->add_option("--grid", spectra.grid, "grid spec")->required();
  e->add_option("--tol", spectra.tol, "BA stopping tolerance");
  e->add_option("--max-iter", spectra.max_iter, "BA iteration cap per point");
  e->add_option("--eigen-thresh", spectra.eigen_threshold, "eigenvalue threshold");
  e->add_option("--delta", spectra.delta, "cluster mass threshold");
  e->add_option("--out", spectra.out_csv, "CSV output path");
  e->add_option("--seed", spectra.seed, "seed recorded in the manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  track.config.spacing = spacing == "log2" ? GridSpacing::log2 : GridSpacing::linear;
  load_pk_cache();
  int code = kExitUsage;
  if (t->parsed()) code = cmd_track(track, std::cout);
  else if (b->parsed()) code = cmd_ba(ba, std::cout);
  else if (c->parsed()) code = cmd_compare(cmp, std::cout);
  else if (s->parsed()) code = cmd_compare_sweep(sweep, std::cout);
  else if (e->parsed()) code = cmd_spectra(spectra, std::cout);
  store_pk_cache();
  return code;
}
