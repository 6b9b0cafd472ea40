// smilekernel: classification, spectra, kernel export, pricing and the
// acceptance battery from the command line.
//
//   smilekernel classify --a 1 --b 0 --c -1
//   smilekernel spectrum --a 1 --b 0 --c -1 --out-dir out
//   smilekernel price --a 2 --b -6 --c 4 --r 0.03 --kind call --strike 1.5 --maturity 1
//   smilekernel validate
//
// Verbosity comes from SMILEKERNEL_LOG (trace, debug, info, warn, error, off).

#include "smilekernel/geometry.hpp"
#include "smilekernel/io/csv.hpp"
#include "smilekernel/kernel.hpp"
#include "smilekernel/model.hpp"
#include "smilekernel/pricing.hpp"
#include "smilekernel/spectral.hpp"
#include "smilekernel/validation.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace smilekernel;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Shortest round-trip form, for human-readable reports.
std::string short_num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

struct RunConfig {
  double a = 1.0, b = 0.0, c = -1.0, r = 0.0;
  double grid_halfwidth = 20.0;
  std::size_t grid_nodes = 4001;
  double kmax_mult = 40.0;
  std::size_t k_nodes = 400;
  std::uint64_t seed = 20240601;
  std::string out_dir = ".";

  [[nodiscard]] QnvModel model() const { return {a, b, c, r}; }
  [[nodiscard]] KQuadratureSpec k_quadrature() const { return {kmax_mult, k_nodes}; }

  void validate() const {
    model().validate();
    if (grid_nodes < 101 || grid_nodes % 2 == 0) {
      throw std::invalid_argument("--grid-nodes must be odd and at least 101 (a node sits at x = 0)");
    }
    if (!(grid_halfwidth > 0.0)) throw std::invalid_argument("--grid-halfwidth must be positive");
    if (!(kmax_mult > 0.0) || k_nodes < 1) throw std::invalid_argument("--kmax-mult and --k-nodes must be positive");
  }

  [[nodiscard]] fs::path output(const std::string& name) const {
    fs::create_directories(out_dir);
    return fs::path(out_dir) / name;
  }
};

struct PtFlags {
  std::optional<double> lambda, alpha;
  double v0 = 0.0;
  [[nodiscard]] bool active() const { return lambda.has_value(); }
};

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  auto os = io::open_output(path.string());
  body(os);
  spdlog::info("wrote {}", path.string());
}

// Lamperti map and potential for regimes without two roots: the spherical
// model maps R onto a finite x-interval, the Euclidean model maps the branch
// above its double root onto x < 0. W is built from nu with a centred
// difference for nu'.
PotentialProfile non_hyperbolic_profile(const QnvModel& m, const GeometryClass& geo, const RunConfig& cfg) {
  std::function<double(double)> s_of_x;
  double lo = 0.0, hi = 0.0;
  const double aa = std::abs(m.a);
  if (geo.regime == Regime::Spherical && m.a != 0.0) {
    const double q = std::sqrt(-geo.discriminant);
    const double sgn = m.a > 0 ? 1.0 : -1.0;
    // x = (2 / q) atan((2 a S + b) / q) for a > 0; |sigma| flips the sign for a < 0.
    s_of_x = [=](double x) { return (q * std::tan(0.5 * q * sgn * x) - m.b) / (2.0 * m.a); };
    const double edge = M_PI / q;
    lo = -edge * (1.0 - 1e-3);
    hi = edge * (1.0 - 1e-3);
  } else if (geo.regime == Regime::Euclidean && m.a != 0.0) {
    const double root = geo.roots.front();
    s_of_x = [=](double x) { return root - 1.0 / (aa * x); };
    lo = -cfg.grid_halfwidth / std::sqrt(aa);
    hi = -1e-2 / std::sqrt(aa);
  } else {
    throw std::domain_error("no x-domain for this model (sigma is affine or constant)");
  }
  auto nu = [=](double x) {
    const double s = s_of_x(x);
    const double sig = std::abs(m.polynomial(s));
    const double dsig = (m.polynomial(s) >= 0.0 ? 1.0 : -1.0) * (2.0 * m.a * s + m.b);
    return m.r * s / sig - 0.5 * dsig;
  };
  const UniformGrid grid(lo, hi, cfg.grid_nodes);
  const double h = 1e-5 * (hi - lo);
  return synthetic_profile(
      [=](double x) {
        const double v = nu(x);
        const double dv = (nu(x + h) - nu(x - h)) / (2.0 * h);
        return 0.5 * (v * v + dv);
      },
      grid, 1.0);
}

NumericalSpectrumOptions spectrum_options() {
  NumericalSpectrumOptions opt;
  opt.max_states = 40;
  return opt;
}

int cmd_classify(const RunConfig& cfg) {
  const GeometryClass geo = classify(cfg.model());
  std::cout << to_string(geo.regime) << ", Δ=" << short_num(geo.discriminant);
  if (geo.regime == Regime::Hyperbolic) {
    std::cout << ", roots [" << short_num(geo.roots[0]) << ", " << short_num(geo.roots[1]) << "]";
  } else if (!geo.roots.empty()) {
    std::cout << ", double root " << short_num(geo.roots.front());
  }
  std::cout << '\n';
  return 0;
}

int cmd_spectrum(const RunConfig& cfg, const PtFlags& pt) {
  if (pt.active()) {
    const PoschlTellerParams params{*pt.lambda, pt.alpha.value_or(1.0), pt.v0};
    const double half = cfg.grid_halfwidth * params.alpha;
    const auto grid = UniformGrid::symmetric(half, cfg.grid_nodes);
    const auto profile = poschl_teller_profile(params.lambda, params.alpha, params.v0, grid);
    write_file(cfg.output("potential.csv"), [&](std::ostream& os) { profile.write_csv(os); });
    const auto cf = closed_form_spectrum(params, cfg.k_quadrature());
    write_file(cfg.output("spectrum.csv"), [&](std::ostream& os) { cf.write_csv(os); });
    auto opt = spectrum_options();
    opt.energy_cap = params.v0;
    const auto num = numerical_spectrum(profile, cfg.grid_nodes, {-half, half}, opt);
    std::cout << "synthetic well lambda=" << short_num(params.lambda) << " alpha=" << short_num(params.alpha)
              << " V0=" << short_num(params.v0) << '\n';
    const auto e_cf = cf.bound_energies();
    const auto e_num = num.bound_energies();
    std::cout << "bound states: " << e_cf.size() << " (closed form), " << e_num.size() << " (grid)\n";
    for (std::size_t n = 0; n < std::max(e_cf.size(), e_num.size()); ++n) {
      const double a = n < e_cf.size() ? e_cf[n] : kNaN;
      const double b = n < e_num.size() ? e_num[n] : kNaN;
      std::cout << "  n=" << n << " E_closed=" << short_num(a) << " E_grid=" << short_num(b)
                << " rel_diff=" << short_num(std::abs(a - b) / std::max(std::abs(a - params.v0), 1e-300)) << '\n';
    }
    return 0;
  }

  const QnvModel m = cfg.model();
  const GeometryClass geo = classify(m);
  if (geo.regime != Regime::Hyperbolic) {
    std::cout << to_string(geo.regime) << " model: closed-form spectrum unavailable; numerical path only\n";
    const auto profile = non_hyperbolic_profile(m, geo, cfg);
    write_file(cfg.output("potential.csv"), [&](std::ostream& os) {
      io::CsvWriter csv(os);
      csv.header({"x", "W"});
      for (std::size_t i = 0; i < profile.grid.size(); ++i) csv.cell(profile.grid[i]).cell(profile.values[i]).end_row();
    });
    const auto num =
        numerical_spectrum(profile, cfg.grid_nodes, {profile.grid.lo(), profile.grid.hi()}, spectrum_options());
    write_file(cfg.output("spectrum.csv"), [&](std::ostream& os) { num.write_csv(os); });
    std::cout << "grid eigenvalues (lowest " << num.states.size() << "):";
    for (std::size_t n = 0; n < std::min<std::size_t>(num.states.size(), 8); ++n) std::cout << ' ' << short_num(num.states[n].energy);
    std::cout << '\n';
    return 0;
  }

  const CoordinateMap map(m);
  const auto grid = default_grid(map, cfg.grid_halfwidth, cfg.grid_nodes);
  const PotentialProfile profile = potential(m, grid);
  write_file(cfg.output("potential.csv"), [&](std::ostream& os) { profile.write_csv(os); });
  const PoschlTellerFit fit = fit_poschl_teller(profile);
  std::cout << "fit lambda=" << short_num(fit.lambda) << " alpha=" << short_num(fit.alpha) << " V0=" << short_num(fit.v0)
            << " residual=" << short_num(fit.residual) << (fit.exact ? " (exact)" : " (not exact)") << '\n';

  auto opt = spectrum_options();
  opt.energy_cap = std::isfinite(fit.v0) ? fit.v0 : std::optional<double>{};
  std::optional<SpectralDecomposition> num;
  try {
    num = numerical_spectrum(profile, cfg.grid_nodes, {grid.lo(), grid.hi()}, opt);
  } catch (const resolution_error& e) {
    spdlog::warn("{}", e.what());
  }
  std::vector<double> e_cf;
  if (fit.exact) {
    const auto cf = closed_form_spectrum({fit.lambda, fit.alpha, fit.v0}, cfg.k_quadrature());
    e_cf = cf.bound_energies();
    write_file(cfg.output("spectrum.csv"), [&](std::ostream& os) { cf.write_csv(os); });
  } else {
    std::cout << "potential is not a Poschl-Teller well; closed-form spectrum skipped\n";
    if (num) write_file(cfg.output("spectrum.csv"), [&](std::ostream& os) { num->write_csv(os); });
  }
  const auto e_num = num ? num->bound_energies() : std::vector<double>{};
  if (e_cf.empty()) {
    std::cout << "grid levels (" << e_num.size() << " below the wall values), lowest:";
    for (std::size_t n = 0; n < std::min<std::size_t>(e_num.size(), 8); ++n) std::cout << ' ' << short_num(e_num[n]);
    std::cout << '\n';
    return 0;
  }
  std::cout << "bound states: " << e_cf.size() << " (closed form), " << e_num.size() << " (grid)\n";
  for (std::size_t n = 0; n < std::max(e_cf.size(), e_num.size()); ++n) {
    const double a = n < e_cf.size() ? e_cf[n] : kNaN;
    const double b = n < e_num.size() ? e_num[n] : kNaN;
    const double scale = std::max(std::abs(a - fit.v0), 1e-300);
    std::cout << "  n=" << n << " E_closed=" << short_num(a) << " E_grid=" << short_num(b)
              << " rel_diff=" << short_num(std::abs(a - b) / scale) << '\n';
  }
  return 0;
}

int cmd_kernel(const RunConfig& cfg, const PtFlags& pt, double tau, std::size_t stride) {
  std::shared_ptr<const SpectralDecomposition> sp;
  UniformGrid grid;
  if (pt.active()) {
    const PoschlTellerParams params{*pt.lambda, pt.alpha.value_or(1.0), pt.v0};
    grid = UniformGrid::symmetric(cfg.grid_halfwidth * params.alpha, cfg.grid_nodes);
    sp = std::make_shared<const SpectralDecomposition>(closed_form_spectrum(params, cfg.k_quadrature()));
  } else {
    const QnvModel m = cfg.model();
    const CoordinateMap map(m);
    grid = default_grid(map, cfg.grid_halfwidth, cfg.grid_nodes);
    const auto profile = potential(m, grid);
    const auto fit = fit_poschl_teller(profile);
    if (fit.exact) {
      sp = std::make_shared<const SpectralDecomposition>(
          closed_form_spectrum({fit.lambda, fit.alpha, fit.v0}, cfg.k_quadrature()));
    } else {
      spdlog::info("fit residual {} above the exactness threshold; using the grid spectrum", fit.residual);
      // Same truncation and energy window as the numerical pricing path.
      const SpectralConfig scfg;
      const auto [xlo, xhi] = truncated_domain(grid, profile, scfg);
      grid = UniformGrid(xlo, xhi, cfg.grid_nodes);
      const auto trunc = potential(m, grid);
      const double window = scfg.energy_window / std::max(tau, 1e-12);
      NumericalSpectrumOptions opt;
      opt.extrapolate = false;
      opt.energy_cap = *std::min_element(trunc.values.begin(), trunc.values.end()) + window;
      auto dec = numerical_spectrum(trunc, cfg.grid_nodes, {xlo, xhi}, opt);
      if (dec.states.empty()) throw std::runtime_error("no grid states below the energy cap");
      opt.energy_cap = dec.states.front().energy + window;
      opt.check_resolution = false;
      sp = std::make_shared<const SpectralDecomposition>(numerical_spectrum(trunc, cfg.grid_nodes, {xlo, xhi}, opt));
    }
  }
  const PricingKernel k(sp, tau, grid);
  for (const auto& w : k.warnings()) spdlog::warn("{}", w);
  write_file(cfg.output("kernel.csv"), [&](std::ostream& os) { k.write_csv(os, stride); });
  std::cout << "kernel: " << to_string(sp->source) << " spectrum, " << sp->states.size() << " states, tau=" << short_num(tau)
            << ", " << (grid.size() + stride - 1) / stride << "^2 entries\n";
  return 0;
}

struct ContractFlags {
  std::string kind = "call";
  std::optional<double> strike;
  double maturity = 1.0;
  std::string payoff_table;
  std::string contract_file;
};

OptionContract build_contract(ContractFlags f, const QnvModel& m) {
  if (!f.contract_file.empty()) {
    const auto kv = io::read_kv_file(f.contract_file);
    // The file supplies defaults; explicit flags were applied before.
    if (auto it = kv.find("kind"); it != kv.end()) f.kind = it->second;
    if (auto it = kv.find("strike"); it != kv.end() && !f.strike) f.strike = io::parse_double(it->second, "strike");
    if (auto it = kv.find("maturity"); it != kv.end()) f.maturity = io::parse_double(it->second, "maturity");
    if (auto it = kv.find("payoff_table"); it != kv.end() && f.payoff_table.empty()) {
      fs::path p = it->second;
      if (p.is_relative()) p = fs::path(f.contract_file).parent_path() / p;
      f.payoff_table = p.string();
    }
  }
  double strike = 0.0;
  if (f.strike) {
    strike = *f.strike;
  } else if (f.kind == "call" || f.kind == "put" || f.kind == "digital") {
    if (classify(m).regime != Regime::Hyperbolic) throw std::invalid_argument("--strike is required for this model");
    strike = mid_strike(m);
  }
  if (f.kind == "call") return OptionContract::call(strike, f.maturity);
  if (f.kind == "put") return OptionContract::put(strike, f.maturity);
  if (f.kind == "digital") return OptionContract::digital(strike, f.maturity);
  if (f.kind == "bond") return OptionContract::unit_bond(f.maturity);
  if (f.kind == "table") {
    if (f.payoff_table.empty()) throw std::invalid_argument("kind=table needs --payoff-table");
    return OptionContract::custom(io::read_table(f.payoff_table), f.maturity);
  }
  throw std::invalid_argument("unknown contract kind '" + f.kind + "' (call, put, digital, bond, table)");
}

int cmd_price(const RunConfig& cfg, const ContractFlags& cf, const std::vector<std::string>& methods,
              std::vector<double> spots, std::size_t paths, std::size_t steps) {
  const QnvModel m = cfg.model();
  const OptionContract contract = build_contract(cf, m);
  contract.validate();
  const bool hyperbolic = classify(m).regime == Regime::Hyperbolic;
  if (spots.empty()) {
    if (!hyperbolic) throw std::invalid_argument("--spots is required outside the hyperbolic regime");
    spots = default_spots(m);
  }
  auto wants = [&](const std::string& name) { return std::find(methods.begin(), methods.end(), name) != methods.end(); };
  const std::size_t n = spots.size();
  std::vector<double> p_sp(n, kNaN), p_cn(n, kNaN), p_mc(n, kNaN), se(n, kNaN);

  if (wants("spectral")) {
    if (hyperbolic) {
      SpectralConfig sc;
      sc.grid_nodes = cfg.grid_nodes;
      sc.grid_halfwidth_mult = cfg.grid_halfwidth;
      sc.k_quadrature = cfg.k_quadrature();
      const auto res = price_spectral(m, contract, spots, sc);
      spdlog::info("spectral path: {} (fit residual {})", res.path, res.fit_residual);
      for (const auto& w : res.warnings) spdlog::warn("{}", w);
      p_sp = res.prices;
    } else {
      spdlog::warn("spectral pricing needs two volatility roots; column left empty");
    }
  }
  if (wants("cn")) p_cn = price_crank_nicolson(m, contract, spots).prices;
  if (wants("mc")) {
    if (hyperbolic) {
      MonteCarloConfig mc;
      mc.paths = paths;
      mc.steps = steps;
      mc.seed = cfg.seed;
      const auto res = price_monte_carlo(m, contract, spots, mc);
      p_mc = res.prices;
      se = res.std_error;
    } else {
      spdlog::warn("Monte Carlo runs in the Lamperti coordinate and needs two roots; column left empty");
    }
  }
  const auto path = cfg.output("price.csv");
  write_file(path, [&](std::ostream& os) {
    io::CsvWriter csv(os);
    csv.header({"spot", "price_spectral", "price_cn", "price_mc", "mc_se"});
    for (std::size_t i = 0; i < n; ++i) csv.cell(spots[i]).cell(p_sp[i]).cell(p_cn[i]).cell(p_mc[i]).cell(se[i]).end_row();
  });
  std::cout << to_string(contract.kind) << " T=" << short_num(contract.maturity) << " on " << n << " spots -> "
            << path.string() << '\n';
  return 0;
}

int cmd_validate(const RunConfig& cfg) {
  validation::ValidationConfig vc;
  vc.grid_nodes = cfg.grid_nodes;
  vc.grid_halfwidth = cfg.grid_halfwidth;
  vc.k_quadrature = cfg.k_quadrature();
  vc.seed = cfg.seed;
  std::ostringstream report;
  bool ok = true;
  for (const auto& id : validation::criterion_ids()) {
    spdlog::info("running {}", id);
    const auto r = validation::run_criterion(id, vc);
    r.write(report);
    r.write(std::cout);
    std::cout.flush();
    ok = ok && r.passed;
  }
  report << (ok ? "OVERALL PASS" : "OVERALL FAIL") << '\n';
  std::cout << (ok ? "OVERALL PASS" : "OVERALL FAIL") << '\n';
  write_file(cfg.output("validation.txt"), [&](std::ostream& os) { os << report.str(); });
  return ok ? 0 : 1;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("smilekernel");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("SMILEKERNEL_LOG")) {
    const auto lvl = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only "off" itself should do that.
    if (lvl != spdlog::level::off || std::string(env) == "off") spdlog::set_level(lvl);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Spectral pricing kernels for quadratic normal volatility models"};
  app.require_subcommand(1);
  // Global flags may follow the subcommand name.
  app.fallthrough();
  app.set_config("--config", "", "INI file of option values; command-line flags win");

  RunConfig cfg;
  app.add_option("--a", cfg.a, "quadratic coefficient of sigma(S)")->capture_default_str();
  app.add_option("--b", cfg.b, "linear coefficient")->capture_default_str();
  app.add_option("--c", cfg.c, "constant coefficient")->capture_default_str();
  app.add_option("--r", cfg.r, "risk-free rate")->capture_default_str();
  app.add_option("--grid-halfwidth", cfg.grid_halfwidth, "x-grid half-width in natural length units")->capture_default_str();
  app.add_option("--grid-nodes", cfg.grid_nodes, "x-grid nodes (odd, >= 101)")->capture_default_str();
  app.add_option("--kmax-mult", cfg.kmax_mult, "continuum cut-off k_max")->capture_default_str();
  app.add_option("--k-nodes", cfg.k_nodes, "Gauss-Legendre nodes on [0, k_max]")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Monte Carlo seed")->capture_default_str();
  app.add_option("--out-dir", cfg.out_dir, "directory for all output files")->capture_default_str();

  auto* classify_cmd = app.add_subcommand("classify", "discriminant, regime and roots");

  PtFlags pt;
  auto add_pt = [&](CLI::App* sub) {
    sub->add_option("--pt-lambda", pt.lambda, "synthetic Poschl-Teller strength (replaces the model)");
    sub->add_option("--pt-alpha", pt.alpha, "synthetic well width");
    sub->add_option("--pt-v0", pt.v0, "synthetic well offset");
  };
  auto* spectrum_cmd = app.add_subcommand("spectrum", "potential profile, fit and bound spectrum");
  add_pt(spectrum_cmd);

  double tau = 1.0;
  std::size_t stride = 1;
  auto* kernel_cmd = app.add_subcommand("kernel", "export K(x, x'; tau) as long-format CSV");
  add_pt(kernel_cmd);
  kernel_cmd->add_option("--tau", tau, "evolution time")->capture_default_str();
  kernel_cmd->add_option("--stride", stride, "export every n-th node")->capture_default_str()->check(CLI::PositiveNumber);

  ContractFlags cf;
  std::vector<std::string> methods{"spectral", "cn", "mc"};
  std::vector<double> spots;
  std::size_t paths = 100000, steps = 0;
  auto* price_cmd = app.add_subcommand("price", "price a European claim on the spot ladder");
  price_cmd->add_option("--kind", cf.kind, "call, put, digital, bond or table")->capture_default_str();
  price_cmd->add_option("--strike", cf.strike, "strike (default: middle of the root interval)");
  price_cmd->add_option("--maturity", cf.maturity, "years to maturity")->capture_default_str();
  price_cmd->add_option("--payoff-table", cf.payoff_table, "two-column CSV (S, payoff) for kind=table");
  price_cmd->add_option("--contract", cf.contract_file, "key-value contract file (kind, strike, maturity, payoff_table)");
  price_cmd->add_option("--methods", methods, "any of spectral, cn, mc")->delimiter(',')->capture_default_str();
  price_cmd->add_option("--spots", spots, "comma-separated spots (default: 21 inside the roots)")->delimiter(',');
  price_cmd->add_option("--paths", paths, "Monte Carlo paths")->capture_default_str();
  price_cmd->add_option("--steps", steps, "Euler steps (0: dt = 0.002)")->capture_default_str();

  auto* validate_cmd = app.add_subcommand("validate", "run the acceptance battery");

  CLI11_PARSE(app, argc, argv);
  try {
    cfg.validate();
    for (const auto& mth : methods) {
      if (mth != "spectral" && mth != "cn" && mth != "mc") throw std::invalid_argument("unknown method " + mth);
    }
    if (*classify_cmd) return cmd_classify(cfg);
    if (*spectrum_cmd) return cmd_spectrum(cfg, pt);
    if (*kernel_cmd) return cmd_kernel(cfg, pt, tau, stride);
    if (*price_cmd) return cmd_price(cfg, cf, methods, spots, paths, steps);
    if (*validate_cmd) return cmd_validate(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
