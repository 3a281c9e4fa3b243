#include "haarlab/xlab.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace haarlab;

int main(int argc, char** argv) {
  CLI::App app{"Dyadic Haar shift and weight experiments"};
  app.require_subcommand(1);

  std::string measure = "lmp", out = "json", output, shift = "hilbert", mode = "float";
  std::uint32_t depth = 40, jmax = 64, kmax = 10, N = 1;
  double p = 2.0;
  int trials = 100;
  std::uint64_t seed = 1, measure_seed = 1, shift_seed = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--output", output, "Write to this file instead of stdout");
  };
  auto sampled = [&](CLI::App* sub) {
    sub->add_option("--measure", measure, "lmp, uniform, random or a measure JSON file");
    sub->add_option("--depth", depth, "Depth bound of the measure tree")->check(CLI::Range(4u, 4096u));
    sub->add_option("--measure-seed", measure_seed, "Seed of a random balanced tree");
    sub->add_option("--trials", trials, "Number of random trials")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Data seed");
  };

  auto* sf = app.add_subcommand("sparse-failure", "Sparse-form failure of the dyadic Hilbert transform on LMP");
  sf->add_option("--jmax", jmax)->check(CLI::Range(8u, 1024u));
  common(sf);
  auto* cs = app.add_subcommand("complexity-separation", "Complexity-1 forms against the ll2 shift on LMP");
  cs->add_option("--jmax", jmax)->check(CLI::Range(8u, 1024u));
  common(cs);
  auto* bw = app.add_subcommand("bad-weight", "A2 weight with unbounded Hilbert probes on LMP");
  bw->add_option("--kmax", kmax)->check(CLI::Range(5u, 12u));
  common(bw);
  auto* sd = app.add_subcommand("sparse-domination", "Sparse domination ratios of a shift or maximal:N");
  sd->add_option("--shift", shift, "hilbert, hilbert-adjoint, ll2, multiplier:+-..., random:s,t or maximal:N");
  sd->add_option("--shift-seed", shift_seed, "Seed for random shift coefficients");
  sampled(sd);
  common(sd);
  auto* ws = app.add_subcommand("weight-suite", "Weight characteristics and weighted bounds over random weights");
  ws->add_option("--p", p)->check(CLI::Range(1.0001, 100.0));
  ws->add_option("--N", N)->check(CLI::Range(1u, 3u));
  sampled(ws);
  common(ws);
  auto* cz = app.add_subcommand("czd-demo", "Calderon-Zygmund decomposition checks");
  cz->add_option("--mode", mode)->check(CLI::IsMember({"float", "rational"}));
  sampled(cz);
  common(cz);

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentReport r;
    auto spec = [&] { return measure_spec_from_token(measure, depth, measure_seed); };
    if (sf->parsed()) r = run_sparse_failure(jmax);
    else if (cs->parsed()) r = run_complexity_separation(jmax);
    else if (bw->parsed()) r = run_bad_weight(kmax);
    else if (sd->parsed()) r = run_sparse_domination(spec(), shift, trials, seed, shift_seed);
    else if (ws->parsed()) r = run_weight_suite(spec(), p, N, trials, seed);
    else r = run_czd_demo(spec(), trials, seed, mode == "rational");

    std::string text = out == "csv" ? to_csv(r) : to_json(r) + "\n";
    if (output.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(output);
      if (!f) throw std::runtime_error("cannot write " + output);
      f << text;
    }
    for (const auto& [what, ok] : r.checks)
      if (!ok) std::cerr << "check failed: " << what << "\n";
    return r.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
