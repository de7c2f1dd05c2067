#include "fxlv/cli.hpp"

#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "fxlv/grid_pricer.hpp"
#include "fxlv/io.hpp"

namespace fxlv {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  const auto end = s.find_last_not_of(" \t\r");
  return begin == std::string::npos ? "" : s.substr(begin, end - begin + 1);
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// key -> value map with "section.key" keys.
std::map<std::string, std::string> parse_kv_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError(file.string() + ": cannot open config");
  std::map<std::string, std::string> kv;
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(file.string() + ":" + std::to_string(line_no) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(file.string() + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    kv[section.empty() ? key : section + "." + key] = value;
  }
  return kv;
}

PricerKind pricer_from_string(const std::string& s) {
  if (s == "grid") return PricerKind::grid;
  if (s == "mc" || s == "monte-carlo" || s == "monte_carlo") return PricerKind::monte_carlo;
  throw ParseError("unknown pricer backend '" + s + "'");
}

struct LoadedMarket {
  std::shared_ptr<const ForwardCurve> forward;
  MarketSnapshot snapshot;
};

LoadedMarket load_market(const RunConfig& config) {
  ForwardCurve forward = load_forward_csv(config.forward_curve);
  DiscountCurve discount = load_discount_csv(config.discount_curve);
  std::vector<VolQuote> quotes = load_vols_csv(config.vols);
  auto forward_ptr = std::make_shared<const ForwardCurve>(forward);
  MarketSnapshot snapshot(std::move(forward), std::move(discount), std::move(quotes));
  return {std::move(forward_ptr), std::move(snapshot)};
}

double resolve_c0(const RunConfig& config, const MarketSnapshot& market) {
  if (config.c0) return *config.c0;
  // Default: the ATM quote closest to one year out.
  const Date one_year = market.valuation + 365;
  std::optional<VolQuote> best;
  for (const auto& q : market.quotes) {
    if (q.kind != QuoteKind::atmf) continue;
    if (!best || std::abs(q.expiry - one_year) < std::abs(best->expiry - one_year)) best = q;
  }
  if (!best) throw std::runtime_error("cannot default c0: no ATM quotes in the market");
  return best->vol;
}

LocalVolSurface make_initial_surface(const RunConfig& config, const LoadedMarket& market,
                                     const std::vector<InstrumentSpec>& instruments) {
  // Time pillars span the calibrated instruments, not the full quote board.
  std::vector<double> expiries;
  for (const auto& inst : instruments) expiries.push_back(inst.T);
  const auto time_pillars = LocalVolSurface::default_time_pillars(
      expiries, static_cast<std::size_t>(config.time_pillar_count));
  const auto state_pillars =
      LocalVolSurface::uniform_state_pillars(static_cast<std::size_t>(config.state_pillar_count));
  return initial_surface_from_atm(market.snapshot, time_pillars, state_pillars,
                                  resolve_c0(config, market.snapshot), market.forward);
}

void ensure_out_dir(const RunConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  write_resolved_config(config, config.out_dir / "resolved_config.toml");
}

void write_grid_diagnostics(const std::filesystem::path& file, const GridField& field) {
  std::ofstream out(file);
  out << "slice,date,mu,q_sum,martingale_err,clamp_count\n";
  out.precision(17);
  const auto& d = field.diagnostics;
  for (std::size_t n = 0; n < field.slice_count(); ++n)
    out << n << "," << field.slices[n].date.yyyymmdd() << "," << d.slice_mu[n] << ","
        << d.slice_q_sum[n] << "," << d.slice_martingale_err[n] << ","
        << d.slice_clamp_count[n] << "\n";
}

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParseFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomainFailure;
  }
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& file) {
  const auto kv = parse_kv_file(file);
  RunConfig config;
  config.config_file = file;
  const auto base = file.parent_path();

  auto path_of = [&](const std::string& key) -> std::filesystem::path {
    const auto it = kv.find(key);
    if (it == kv.end()) return {};
    std::filesystem::path p = it->second;
    return p.is_absolute() ? p : base / p;
  };
  auto str = [&](const std::string& key, const std::string& fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  };
  auto number = [&](const std::string& key, double fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (const std::exception&) {
      throw ParseError(file.string() + ": bad number for " + key + ": '" + it->second + "'");
    }
  };

  config.forward_curve = path_of("files.forward_curve");
  config.discount_curve = path_of("files.discount_curve");
  config.vols = path_of("files.vols");
  config.deals = path_of("files.deals");
  config.surface = path_of("files.surface");

  if (kv.count("market.selection")) config.selection = split(kv.at("market.selection"), ';');
  if (kv.count("market.c0") && kv.at("market.c0") != "auto")
    config.c0 = number("market.c0", 0.0);

  config.time_pillar_count = static_cast<int>(number("surface.time_pillars", 18));
  config.state_pillar_count = static_cast<int>(number("surface.state_pillars", 11));

  config.grid_half_states = static_cast<int>(number("backend.grid_half_states", 50));
  config.mc_paths = static_cast<int>(number("backend.mc_paths", 20000));
  config.seed = static_cast<std::uint64_t>(number("backend.seed", 42));
  config.max_gap_days = static_cast<int>(number("backend.max_gap_days", 3));
  config.calibration_backend = pricer_from_string(str("backend.calibration_pricer", "grid"));
  config.european_backend = pricer_from_string(str("backend.european_pricer", "grid"));

  config.solver.max_iterations = static_cast<int>(number("solver.max_iterations", 100));
  config.solver.tol_f = number("solver.tol_f", 1e-6);
  config.solver.tol_x = number("solver.tol_x", 1e-8);
  config.solver.threads = static_cast<int>(number("solver.threads", 0));

  if (kv.count("converge.grid_sizes")) {
    config.grid_sizes.clear();
    for (const auto& token : split(kv.at("converge.grid_sizes"), ','))
      config.grid_sizes.push_back(std::stoi(token));
  }
  if (kv.count("converge.path_counts")) {
    config.path_counts.clear();
    for (const auto& token : split(kv.at("converge.path_counts"), ','))
      config.path_counts.push_back(std::stoi(token));
  }

  config.out_dir = str("output.dir", "out");
  if (!config.out_dir.is_absolute() && kv.count("output.dir")) config.out_dir = base / config.out_dir;
  config.grid_diagnostics = str("output.grid_diagnostics", "false") == "true";
  config.dump_paths = str("output.dump_paths", "false") == "true";

  if (config.grid_half_states < 10)
    throw ParseError("backend.grid_half_states below the minimum of 10");
  if (config.mc_paths < 100) throw ParseError("backend.mc_paths below the minimum of 100");
  return config;
}

void write_resolved_config(const RunConfig& config, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error(file.string() + ": cannot write");
  out << "# resolved configuration (source: " << config.config_file.string() << ")\n";
  out << "[files]\n";
  out << "forward_curve = \"" << config.forward_curve.string() << "\"\n";
  out << "discount_curve = \"" << config.discount_curve.string() << "\"\n";
  out << "vols = \"" << config.vols.string() << "\"\n";
  out << "deals = \"" << config.deals.string() << "\"\n";
  out << "surface = \"" << config.surface.string() << "\"\n";
  out << "[market]\n";
  out << "selection = \"";
  for (std::size_t i = 0; i < config.selection.size(); ++i)
    out << (i ? ";" : "") << config.selection[i];
  out << "\"\n";
  if (config.c0) out << "c0 = " << *config.c0 << "\n";
  else out << "c0 = auto\n";
  out << "[surface]\n";
  out << "time_pillars = " << config.time_pillar_count << "\n";
  out << "state_pillars = " << config.state_pillar_count << "\n";
  out << "[backend]\n";
  out << "grid_half_states = " << config.grid_half_states << "\n";
  out << "mc_paths = " << config.mc_paths << "\n";
  out << "seed = " << config.seed << "\n";
  out << "max_gap_days = " << config.max_gap_days << "\n";
  out << "calibration_pricer = "
      << (config.calibration_backend == PricerKind::grid ? "grid" : "mc") << "\n";
  out << "european_pricer = " << (config.european_backend == PricerKind::grid ? "grid" : "mc")
      << "\n";
  out << "[solver]\n";
  out << "max_iterations = " << config.solver.max_iterations << "\n";
  out << "tol_f = " << config.solver.tol_f << "\n";
  out << "tol_x = " << config.solver.tol_x << "\n";
  out << "threads = " << config.solver.threads << "\n";
  out << "[converge]\n";
  out << "grid_sizes = ";
  for (std::size_t i = 0; i < config.grid_sizes.size(); ++i)
    out << (i ? "," : "") << config.grid_sizes[i];
  out << "\npath_counts = ";
  for (std::size_t i = 0; i < config.path_counts.size(); ++i)
    out << (i ? "," : "") << config.path_counts[i];
  out << "\n[output]\n";
  out << "dir = \"" << config.out_dir.string() << "\"\n";
  out << "grid_diagnostics = " << (config.grid_diagnostics ? "true" : "false") << "\n";
  out << "dump_paths = " << (config.dump_paths ? "true" : "false") << "\n";
}

int cmd_validate(const RunConfig& config) {
  return run_guarded([&]() {
    const LoadedMarket market = load_market(config);
    const ValidationReport report = validate_market(market.snapshot);
    ensure_out_dir(config);
    save_validation_report_json(config.out_dir / "validation_report.json", report);
    if (report.pass) {
      std::cout << "validation passed (" << report.c1_terms.size() << " ATM tenors, "
                << report.butterflies.size() << " full smiles)\n";
      return kExitOk;
    }
    std::cout << "validation failed:\n";
    for (const auto& v : report.violations)
      std::cout << "  [" << v.condition << "] " << v.tenor << ": " << v.detail << "\n";
    return kExitDomainFailure;
  });
}

int cmd_calibrate(const RunConfig& config, bool force) {
  return run_guarded([&]() {
    const LoadedMarket market = load_market(config);
    const ValidationReport validation = validate_market(market.snapshot);
    if (!validation.pass && !force) {
      std::cerr << "market failed validation (" << validation.violations.size()
                << " violations); rerun with --force to calibrate anyway\n";
      return kExitDomainFailure;
    }

    const auto selection = InstrumentSelection::parse(config.selection);
    auto instruments = resolve_instruments(market.snapshot, selection);
    LocalVolSurface initial = make_initial_surface(config, market, instruments);
    CalibrationProblem problem(market.snapshot, std::move(instruments), std::move(initial));
    problem.backend = config.calibration_backend;
    problem.grid_half_states = config.grid_half_states;
    problem.mc_paths = config.mc_paths;
    problem.rng.seed = config.seed;
    problem.max_gap_days = config.max_gap_days;
    problem.settings = config.solver;

    const CalibrationReport report = calibrate(problem);

    ensure_out_dir(config);
    const LocalVolSurface final_surface = LocalVolSurface::from_params(
        problem.initial_surface, std::span<const double>(report.params));
    save_surface_json(config.out_dir / "surface.json", final_surface);
    save_calibration_report_json(config.out_dir / "calibration_report.json", report);
    save_trace_csv(config.out_dir / "trace.csv", report.trace);

    std::cout << "instruments: " << report.residuals.size()
              << ", parameters: " << report.params.size() << "\n";
    std::cout << "status: " << to_string(report.status)
              << ", accepted steps: " << report.accepted_steps
              << ", rejected steps: " << report.rejected_steps << "\n";
    std::cout.precision(6);
    std::cout << "AvgError = " << std::scientific << report.avg_error << "\n";
    return report.status == CalibrationStatus::stalled ? kExitDomainFailure : kExitOk;
  });
}

namespace {

LocalVolSurface load_priced_surface(const RunConfig& config, const LoadedMarket& market) {
  if (config.surface.empty())
    throw ParseError("no surface file configured (files.surface or --surface)");
  return load_surface_json(config.surface, market.forward);
}

struct PricedRow {
  std::string id;
  std::string type;
  std::string backend;
  long resolution = 0;
  double pv = 0.0;
  double std_error = 0.0;  // MC only
  std::uint64_t seed = 0;
};

void write_prices_csv(const std::filesystem::path& file, const std::vector<PricedRow>& rows) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error(file.string() + ": cannot write");
  out << "id,type,backend,resolution,pv,std_error,seed\n";
  out.precision(10);
  for (const auto& r : rows) {
    out << r.id << "," << r.type << "," << r.backend << "," << r.resolution << ",";
    out << r.pv << ",";
    if (r.backend == "mc") out << r.std_error;
    out << "," << (r.backend == "mc" ? std::to_string(r.seed) : "") << "\n";
  }
}

void write_prices_json(const std::filesystem::path& file, const std::vector<PricedRow>& rows) {
  nlohmann::json out;
  out["results"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json entry = {{"id", r.id},
                            {"type", r.type},
                            {"backend", r.backend},
                            {"resolution", r.resolution},
                            {"pv", r.pv}};
    if (r.backend == "mc") {
      entry["std_error"] = r.std_error;
      entry["seed"] = r.seed;
      entry["rng_algorithm"] = RngSpec::algorithm;
    }
    out["results"].push_back(std::move(entry));
  }
  std::ofstream stream(file);
  if (!stream) throw std::runtime_error(file.string() + ": cannot write");
  stream << out.dump(2) << "\n";
}

void dump_paths_csv(const std::filesystem::path& file, const PathSet& paths) {
  std::ofstream out(file);
  out << "path,date,state\n";
  out.precision(17);
  for (int i = 0; i < paths.path_count; ++i)
    for (std::size_t n = 0; n < paths.step_count(); ++n)
      out << i << "," << paths.time_grid.dates[n].yyyymmdd() << "," << paths.state(i, n) << "\n";
}

GridField build_grid_for_deals(const RunConfig& config, const LoadedMarket& market,
                               const LocalVolSurface& surface, const DealSet& deals,
                               int half_states) {
  std::vector<Date> specials;
  for (const auto& d : deals.americans) {
    specials.push_back(d.exercise_end);
    if (d.exercise_start > market.snapshot.valuation) specials.push_back(d.exercise_start);
  }
  for (const auto& d : deals.europeans) specials.push_back(d.expiry);
  const TimeGrid grid =
      build_time_grid(market.snapshot.valuation, specials, config.max_gap_days);
  GridField field = build_state_grid(grid, surface, half_states);
  forward_propagate(field, surface, *market.forward);
  return field;
}

}  // namespace

int cmd_price(const RunConfig& config) {
  return run_guarded([&]() {
    const LoadedMarket market = load_market(config);
    const LocalVolSurface surface = load_priced_surface(config, market);
    const DealSet deals = load_deals_json(config.deals);
    for (const auto& d : deals.americans) validate_deal(d, market.snapshot.valuation);
    for (const auto& d : deals.asians) validate_deal(d, market.snapshot.valuation);
    for (const auto& d : deals.europeans) validate_deal(d, market.snapshot.valuation);

    ensure_out_dir(config);
    std::vector<PricedRow> rows;

    const bool needs_grid = !deals.americans.empty() ||
                            (!deals.europeans.empty() && config.european_backend == PricerKind::grid);
    if (needs_grid) {
      const GridField field =
          build_grid_for_deals(config, market, surface, deals, config.grid_half_states);
      if (config.grid_diagnostics)
        write_grid_diagnostics(config.out_dir / "grid_diagnostics.csv", field);
      for (const auto& d : deals.americans)
        rows.push_back({d.id, "american", "grid", config.grid_half_states,
                        price_american(field, d, market.snapshot.discount), 0.0, 0});
      if (config.european_backend == PricerKind::grid)
        for (const auto& d : deals.europeans)
          rows.push_back({d.id, "european", "grid", config.grid_half_states,
                          price_european_on_grid(field, d, market.snapshot.discount), 0.0, 0});
    }

    RngSpec rng{config.seed};
    for (const auto& d : deals.asians) {
      const TimeGrid steps = build_mc_time_steps(market.snapshot.valuation, d.fixing_dates,
                                                 std::vector<Date>{d.expiry}, config.max_gap_days);
      const PathSet paths =
          generate_paths(surface, *market.forward, steps, config.mc_paths, rng);
      if (config.dump_paths)
        dump_paths_csv(config.out_dir / ("paths_" + d.id + ".csv"), paths);
      const McPrice price = price_asian(paths, d, market.snapshot.discount);
      rows.push_back({d.id, "asian", "mc", config.mc_paths, price.pv, price.std_error,
                      config.seed});
    }
    if (config.european_backend == PricerKind::monte_carlo) {
      for (const auto& d : deals.europeans) {
        const TimeGrid steps = build_mc_time_steps(market.snapshot.valuation, {},
                                                   std::vector<Date>{d.expiry},
                                                   config.max_gap_days);
        const PathSet paths =
            generate_paths(surface, *market.forward, steps, config.mc_paths, rng);
        const McPrice price = price_european_mc(paths, d, market.snapshot.discount);
        rows.push_back({d.id, "european", "mc", config.mc_paths, price.pv, price.std_error,
                        config.seed});
      }
    }

    write_prices_csv(config.out_dir / "prices.csv", rows);
    write_prices_json(config.out_dir / "prices.json", rows);
    std::cout << "priced " << rows.size() << " deals -> "
              << (config.out_dir / "prices.csv").string() << "\n";
    return kExitOk;
  });
}

int cmd_converge(const RunConfig& config) {
  return run_guarded([&]() {
    const LoadedMarket market = load_market(config);
    const LocalVolSurface surface = load_priced_surface(config, market);
    const DealSet deals = load_deals_json(config.deals);
    for (const auto& d : deals.americans) validate_deal(d, market.snapshot.valuation);
    for (const auto& d : deals.asians) validate_deal(d, market.snapshot.valuation);

    ensure_out_dir(config);
    const double spot_notional_scale = market.snapshot.forward.spot();

    if (!deals.americans.empty()) {
      std::ofstream out(config.out_dir / "converge_grid.csv");
      out << "id";
      for (int I : config.grid_sizes) out << ",pv_I" << I;
      out << ",max_dev_bp[1e-4*N*F0]\n";
      out.precision(10);
      std::vector<std::vector<double>> pvs(deals.americans.size());
      for (int I : config.grid_sizes) {
        const GridField field = build_grid_for_deals(config, market, surface, deals, I);
        for (std::size_t d = 0; d < deals.americans.size(); ++d)
          pvs[d].push_back(price_american(field, deals.americans[d], market.snapshot.discount));
      }
      for (std::size_t d = 0; d < deals.americans.size(); ++d) {
        const auto [lo, hi] = std::minmax_element(pvs[d].begin(), pvs[d].end());
        const double bp =
            (*hi - *lo) / (deals.americans[d].notional * spot_notional_scale) * 1e4;
        out << deals.americans[d].id;
        for (double pv : pvs[d]) out << "," << pv;
        out << "," << bp << "\n";
        std::cout << deals.americans[d].id << ": max deviation " << bp << " bp\n";
      }
    }

    if (!deals.asians.empty()) {
      std::ofstream out(config.out_dir / "converge_mc.csv");
      out << "id";
      for (int paths : config.path_counts) out << ",pv_" << paths;
      out << ",max_dev_bp[1e-4*N*F0]\n";
      out.precision(10);
      for (const auto& deal : deals.asians) {
        const TimeGrid steps =
            build_mc_time_steps(market.snapshot.valuation, deal.fixing_dates,
                                std::vector<Date>{deal.expiry}, config.max_gap_days);
        std::vector<double> pvs;
        for (int count : config.path_counts) {
          const PathSet paths =
              generate_paths(surface, *market.forward, steps, count, RngSpec{config.seed});
          pvs.push_back(price_asian(paths, deal, market.snapshot.discount).pv);
        }
        const auto [lo, hi] = std::minmax_element(pvs.begin(), pvs.end());
        const double bp = (*hi - *lo) / (deal.notional * spot_notional_scale) * 1e4;
        out << deal.id;
        for (double pv : pvs) out << "," << pv;
        out << "," << bp << "\n";
        std::cout << deal.id << ": max deviation " << bp << " bp\n";
      }
    }
    return kExitOk;
  });
}

}  // namespace fxlv
