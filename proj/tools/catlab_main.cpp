// catlab command-line tool: extinction probabilities, critical curves,
// phase-diagram CSV export, and Monte Carlo validation for colony growth
// under geometric catastrophes with dispersal on a d-ary tree.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>
#include "CLI11.hpp"

#include "catlab/analytic.hpp"
#include "catlab/distributions.hpp"
#include "catlab/format.hpp"
#include "catlab/model.hpp"
#include "catlab/phase.hpp"
#include "catlab/simulator.hpp"

using json = nlohmann::ordered_json;
using namespace catlab;

namespace {

constexpr int exit_bad_input = 2;
constexpr int exit_no_closed_form = 3;
constexpr int exit_io = 4;

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

DispersionScheme make_scheme(const std::string& name, int d) {
  if (name == "none") return DispersionScheme::none();
  if (name == "optimal") return DispersionScheme::optimal(d);
  if (name == "independent") return DispersionScheme::independent(d);
  if (name == "uniform") return DispersionScheme::uniform(d);
  throw std::invalid_argument("unknown scheme: " + name);
}

GridSpec parse_range(const std::string& text) {
  GridSpec g;
  double* slot[3] = {&g.lo, &g.hi, &g.step};
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t next = i < 2 ? text.find(':', pos) : text.size();
    if (next == std::string::npos || (i == 2 && text.find(':', pos) != std::string::npos))
      throw std::invalid_argument("range must be lo:hi:step, got: " + text);
    const char* b = text.data() + pos;
    const char* e = text.data() + next;
    const auto res = std::from_chars(b, e, *slot[i]);
    if (res.ec != std::errc() || res.ptr != e)
      throw std::invalid_argument("bad number in range: " + text);
    pos = next + 1;
  }
  return g;
}

const char* yesno(bool b) { return b ? "yes" : "no"; }

// ---------------------------------------------------------------------------
// psi
// ---------------------------------------------------------------------------

struct PsiArgs {
  std::string scheme;
  int d = 3;
  double lambda = 0.0;
  double p = 0.0;
  std::string method = "closed";
  bool as_json = false;
  std::uint64_t reps = 100000;
  std::uint64_t seed = 1;
  std::uint64_t colony_cap = 10000;
  std::uint64_t generation_cap = 10000;
  unsigned threads = 0;
};

ExtinctionResult psi_numeric(const DispersionScheme& scheme, const ModelParams& mp) {
  if (!scheme.disperses())
    throw std::invalid_argument(
        "the no-dispersion chain has no offspring PGF to iterate; its closed "
        "form is exact (or use --method mc)");
  const OffspringPmf pmf = scheme.closed_form_covered()
                               ? offspring_pmf(scheme, mp)
                               : offspring_pmf_series_oracle(scheme, mp);
  return extinction_fixed_point(pmf);
}

int run_psi(const PsiArgs& a) {
  const DispersionScheme scheme = make_scheme(a.scheme, a.d);
  const ModelParams mp(a.lambda, a.p);
  json out;
  out["command"] = "psi";
  out["scheme"] = a.scheme;
  out["d"] = scheme.d;
  out["lambda"] = a.lambda;
  out["p"] = a.p;
  out["method"] = a.method;

  if (a.method == "mc") {
    SimConfig cfg;
    cfg.replications = a.reps;
    cfg.seed = a.seed;
    cfg.colony_cap = a.colony_cap;
    cfg.generation_cap = a.generation_cap;
    const SimEstimate est = estimate_psi(scheme, mp, cfg, a.threads);
    out["psi"] = est.psi_hat;
    out["survives"] = est.psi_hat < 1.0;
    out["diagnostic"] = est.std_error;
    out["replications"] = est.replications;
    out["extinct"] = est.extinct;
    out["cap_survive"] = est.cap_survive;
    out["cap_bias_note"] = est.cap_bias_note;
    out["seed"] = a.seed;
    if (a.as_json) {
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    std::cout << "psi = " << fmt_g(est.psi_hat) << "\n"
              << "survives = " << yesno(est.psi_hat < 1.0) << "\n"
              << "method = mc\n"
              << "diagnostic = " << fmt_g(est.std_error) << "\n"
              << "replications = " << est.replications << "\n"
              << "extinct = " << est.extinct << "\n"
              << "cap_survive = " << est.cap_survive << "\n";
    return 0;
  }

  const ExtinctionResult r =
      a.method == "numeric" ? psi_numeric(scheme, mp) : psi_closed_form(scheme, mp);
  out["psi"] = r.psi;
  out["survives"] = r.survives;
  out["diagnostic"] = r.diagnostic;
  out["degenerate"] = r.degenerate;
  if (a.as_json) {
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  std::cout << "psi = " << fmt_g(r.psi) << "\n"
            << "survives = " << yesno(r.survives) << "\n"
            << "method = " << to_string(r.method) << "\n"
            << "diagnostic = " << fmt_g(r.diagnostic) << "\n"
            << "degenerate = " << yesno(r.degenerate) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// critical
// ---------------------------------------------------------------------------

struct CriticalArgs {
  std::string scheme;
  int d = 3;
  double p = 0.0;
  bool have_p = false;
  bool crossing = false;
  bool as_json = false;
};

int run_critical(const CriticalArgs& a) {
  const DispersionScheme scheme = make_scheme(a.scheme, a.d);
  if (a.have_p == a.crossing)
    throw std::invalid_argument("need exactly one of --p or --crossing");
  json out;
  out["command"] = "critical";
  out["scheme"] = a.scheme;
  out["d"] = scheme.d;
  if (a.crossing) {
    const double pc = crossing_p(scheme);
    out["mode"] = "crossing";
    out["crossing_p"] = pc;
    if (a.as_json)
      std::cout << out.dump(2) << "\n";
    else
      std::cout << "crossing_p = " << fmt_g(pc) << "\n";
    return 0;
  }
  const double lc = critical_lambda(scheme, a.p);
  out["mode"] = "critical_lambda";
  out["p"] = a.p;
  out["lambda_c"] = lc;
  if (a.as_json)
    std::cout << out.dump(2) << "\n";
  else
    std::cout << "lambda_c = " << fmt_g(lc) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// grid
// ---------------------------------------------------------------------------

struct GridArgs {
  std::string lambda_range;
  std::string p_range;
  int d = 3;
  std::string out_path;
  std::string gnuplot_path;
};

int run_grid(const GridArgs& a) {
  const GridSpec ls = parse_range(a.lambda_range);
  const GridSpec ps = parse_range(a.p_range);
  const std::vector<PhaseRow> rows = phase_grid(ls, ps, a.d);

  std::ofstream f(a.out_path);
  if (!f) throw io_error("cannot open for writing: " + a.out_path);
  f << "lambda,p,psi_A,psi_o,psi_i,psi_u,dom_indep,dom_unif,region_indep,"
       "region_unif\n";
  for (const PhaseRow& r : rows) {
    f << fmt_g(r.lambda) << ',' << fmt_g(r.p) << ',' << fmt_g(r.psi_A) << ','
      << fmt_g(r.psi_o) << ',' << fmt_g(r.psi_i) << ',' << fmt_g(r.psi_u) << ','
      << to_string(r.dom_indep) << ',' << to_string(r.dom_unif) << ','
      << (r.region_indep ? to_string(*r.region_indep) : "n/a") << ','
      << (r.region_unif ? to_string(*r.region_unif) : "n/a") << '\n';
  }
  f.flush();
  if (!f) throw io_error("write failed: " + a.out_path);

  if (!a.gnuplot_path.empty()) {
    std::ofstream g(a.gnuplot_path);
    if (!g) throw io_error("cannot open for writing: " + a.gnuplot_path);
    g << "# phase-diagram heat maps over (lambda, p); run: gnuplot " << a.gnuplot_path
      << "\n"
      << "set datafile separator ','\n"
      << "set xlabel 'lambda'\n"
      << "set ylabel 'p'\n"
      << "set view map\n"
      << "set palette defined (0 'white', 1 'navy')\n"
      << "set terminal pngcairo size 900,700\n"
      << "set output 'psi_none.png'\n"
      << "splot '" << a.out_path << "' using 1:2:3 with points pt 5 ps 2 palette title 'psi none'\n"
      << "set output 'psi_uniform.png'\n"
      << "splot '" << a.out_path << "' using 1:2:6 with points pt 5 ps 2 palette title 'psi uniform'\n";
    g.flush();
    if (!g) throw io_error("write failed: " + a.gnuplot_path);
  }

  std::cout << "wrote " << rows.size() << " rows to " << a.out_path << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimArgs {
  std::string scheme;
  int d = 3;
  double lambda = 0.0;
  double p = 0.0;
  std::uint64_t reps = 100000;
  std::uint64_t seed = 1;
  std::uint64_t colony_cap = 10000;
  std::uint64_t generation_cap = 10000;
  unsigned threads = 0;
  bool as_json = false;
};

int run_simulate(const SimArgs& a) {
  const DispersionScheme scheme = make_scheme(a.scheme, a.d);
  const ModelParams mp(a.lambda, a.p);
  SimConfig cfg;
  cfg.replications = a.reps;
  cfg.seed = a.seed;
  cfg.colony_cap = a.colony_cap;
  cfg.generation_cap = a.generation_cap;
  const SimEstimate est = estimate_psi(scheme, mp, cfg, a.threads);

  json out;
  out["command"] = "simulate";
  out["scheme"] = a.scheme;
  out["d"] = scheme.d;
  out["lambda"] = a.lambda;
  out["p"] = a.p;
  out["seed"] = a.seed;
  out["psi_hat"] = est.psi_hat;
  out["std_error"] = est.std_error;
  out["replications"] = est.replications;
  out["extinct"] = est.extinct;
  out["cap_survive"] = est.cap_survive;
  out["cap_bias_note"] = est.cap_bias_note;

  std::string closed_lines;
  if (scheme.closed_form_covered()) {
    const double psi = psi_closed_form(scheme, mp).psi;
    const double abs_err = std::fabs(est.psi_hat - psi);
    out["psi_closed"] = psi;
    out["abs_error"] = abs_err;
    closed_lines += "psi_closed = " + fmt_g(psi) + "\n";
    closed_lines += "abs_error = " + fmt_g(abs_err) + "\n";
    if (est.std_error > 0.0) {
      out["z_score"] = abs_err / est.std_error;
      closed_lines += "z_score = " + fmt_g(abs_err / est.std_error) + "\n";
    }
  }

  if (a.as_json) {
    std::cout << out.dump(2) << "\n";
    return 0;
  }
  std::cout << "psi_hat = " << fmt_g(est.psi_hat) << "\n"
            << "std_error = " << fmt_g(est.std_error) << "\n"
            << "replications = " << est.replications << "\n"
            << "extinct = " << est.extinct << "\n"
            << "cap_survive = " << est.cap_survive << "\n"
            << closed_lines;
  return 0;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareArgs {
  double lambda = 0.0;
  double p = 0.0;
  int d = 3;
  bool as_json = false;
};

int run_compare(const CompareArgs& a) {
  const ModelParams mp(a.lambda, a.p);
  const PhaseRow row = phase_row(mp, a.d);

  json out;
  out["command"] = "compare";
  out["lambda"] = a.lambda;
  out["p"] = a.p;
  out["d"] = a.d;
  out["psi"] = {{"none", row.psi_A},
                {"optimal", row.psi_o},
                {"independent", row.psi_i},
                {"uniform", row.psi_u}};
  out["independent"] = {{"verdict", to_string(row.dom_indep)}};
  out["uniform"] = {{"verdict", to_string(row.dom_unif)}};
  if (row.region_indep) {
    out["independent"]["region"] = to_string(*row.region_indep);
    out["independent"]["case"] = describe(*row.region_indep);
  }
  if (row.region_unif) {
    out["uniform"]["region"] = to_string(*row.region_unif);
    out["uniform"]["case"] = describe(*row.region_unif);
  }
  if (a.as_json) {
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  std::cout << "lambda = " << fmt_g(a.lambda) << "\n"
            << "p = " << fmt_g(a.p) << "\n"
            << "d = " << a.d << "\n"
            << "psi_none = " << fmt_g(row.psi_A) << "\n"
            << "psi_optimal = " << fmt_g(row.psi_o) << "\n"
            << "psi_independent = " << fmt_g(row.psi_i) << "\n"
            << "psi_uniform = " << fmt_g(row.psi_u) << "\n"
            << "independent verdict = " << to_string(row.dom_indep) << "\n";
  if (row.region_indep)
    std::cout << "independent region = " << to_string(*row.region_indep) << "\n"
              << "independent case = " << describe(*row.region_indep) << "\n";
  std::cout << "uniform verdict = " << to_string(row.dom_unif) << "\n";
  if (row.region_unif)
    std::cout << "uniform region = " << to_string(*row.region_unif) << "\n"
              << "uniform case = " << describe(*row.region_unif) << "\n";
  return 0;
}

template <typename F>
int guard(F&& body) {
  try {
    return body();
  } catch (const unsupported_closed_form& e) {
    std::cerr << "error: " << e.what()
              << "\nno closed form for this scheme/d; psi supports --method "
                 "numeric or --method mc\n";
    return exit_no_closed_form;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_io;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_bad_input;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_bad_input;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "colony growth under geometric catastrophes: extinction probabilities, "
      "critical curves, phase grids, Monte Carlo validation"};
  app.require_subcommand(1);
  const std::vector<std::string> scheme_names = {"none", "optimal", "independent",
                                                 "uniform"};

  PsiArgs pa;
  auto* psi = app.add_subcommand("psi", "extinction probability at one point");
  psi->add_option("--scheme", pa.scheme, "dispersal scheme")
      ->required()
      ->check(CLI::IsMember(scheme_names));
  psi->add_option("--d", pa.d, "children per vertex (default 3; ignored for none)")
      ->check(CLI::Range(2, 1000000));
  psi->add_option("--lambda", pa.lambda, "growth rate")->required();
  psi->add_option("--p", pa.p, "per-kill survival probability")->required();
  psi->add_option("--method", pa.method, "closed|numeric|mc (default closed)")
      ->check(CLI::IsMember({"closed", "numeric", "mc"}));
  psi->add_flag("--json", pa.as_json, "machine-readable output");
  psi->add_option("--reps", pa.reps, "mc replications");
  psi->add_option("--seed", pa.seed, "mc master seed");
  psi->add_option("--colony-cap", pa.colony_cap, "mc survival cap");
  psi->add_option("--generation-cap", pa.generation_cap, "mc generation cap");
  psi->add_option("--threads", pa.threads, "mc worker threads (0 = auto)");

  CriticalArgs ca;
  auto* critical =
      app.add_subcommand("critical", "critical growth rate or curve crossing");
  critical->add_option("--scheme", ca.scheme, "dispersal scheme")
      ->required()
      ->check(CLI::IsMember(scheme_names));
  critical->add_option("--d", ca.d, "children per vertex")
      ->check(CLI::Range(2, 1000000));
  auto* copt = critical->add_option("--p", ca.p, "solve lambda_c at this p");
  auto* cflag = critical->add_flag("--crossing", ca.crossing,
                                   "p where the curve meets the no-dispersion one");
  copt->excludes(cflag);
  cflag->excludes(copt);
  critical->add_flag("--json", ca.as_json, "machine-readable output");

  GridArgs ga;
  auto* grid = app.add_subcommand("grid", "phase-diagram sweep to CSV");
  grid->add_option("--lambda-range", ga.lambda_range, "lo:hi:step")->required();
  grid->add_option("--p-range", ga.p_range, "lo:hi:step")->required();
  grid->add_option("--d", ga.d, "children per vertex (2 or 3)");
  grid->add_option("--out", ga.out_path, "output CSV path")->required();
  grid->add_option("--gnuplot", ga.gnuplot_path, "also write a plotting script");

  SimArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo extinction estimate");
  simulate->add_option("--scheme", sa.scheme, "dispersal scheme")
      ->required()
      ->check(CLI::IsMember(scheme_names));
  simulate->add_option("--d", sa.d, "children per vertex")
      ->check(CLI::Range(2, 1000000));
  simulate->add_option("--lambda", sa.lambda, "growth rate")->required();
  simulate->add_option("--p", sa.p, "per-kill survival probability")->required();
  simulate->add_option("--reps", sa.reps, "replications");
  simulate->add_option("--seed", sa.seed, "master seed");
  simulate->add_option("--colony-cap", sa.colony_cap, "declare survival at this count");
  simulate->add_option("--generation-cap", sa.generation_cap, "cycles before giving up");
  simulate->add_option("--threads", sa.threads, "worker threads (0 = auto)");
  simulate->add_flag("--json", sa.as_json, "machine-readable output");

  CompareArgs cpa;
  auto* compare =
      app.add_subcommand("compare", "all four strategies at one parameter point");
  compare->add_option("--lambda", cpa.lambda, "growth rate")->required();
  compare->add_option("--p", cpa.p, "per-kill survival probability")->required();
  compare->add_option("--d", cpa.d, "children per vertex (2 or 3)");
  compare->add_flag("--json", cpa.as_json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_bad_input;
  }

  if (psi->parsed()) return guard([&] { return run_psi(pa); });
  if (critical->parsed()) {
    ca.have_p = copt->count() > 0;
    return guard([&] { return run_critical(ca); });
  }
  if (grid->parsed()) return guard([&] { return run_grid(ga); });
  if (simulate->parsed()) return guard([&] { return run_simulate(sa); });
  if (compare->parsed()) return guard([&] { return run_compare(cpa); });
  return exit_bad_input;
}
