#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dbf/harness.hpp"

using namespace dbf;

namespace {

constexpr int kUsageError = 1;
constexpr int kGateFailure = 2;

struct GateFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string payoffs = "3 2 1 0";
  int d = 1;
  int M = 1;
  std::vector<int> sides{100};
  double rho = 0.5;
  std::uint64_t seed = 1;
  std::int64_t replicates = 1;
  double horizon = 100.0;
  std::string out = "-";
  std::string format = "csv";
  int workers = 1;
  std::string config;
};

/// Options of one subcommand by long name, for filling from a config file.
using OptionIndex = std::map<std::string, CLI::Option*>;

void add_common(CLI::App* sub, Common& c, OptionIndex& idx) {
  idx["payoffs"] = sub->add_option("--payoffs", c.payoffs, "a11 a12 a21 a22, each an integer or p/q")->capture_default_str();
  idx["d"] = sub->add_option("--d", c.d, "dimension")->capture_default_str()->check(CLI::Range(1, 3));
  idx["M"] = sub->add_option("--M", c.M, "interaction range")->capture_default_str()->check(CLI::PositiveNumber);
  idx["sides"] = sub->add_option("--sides", c.sides, "torus side(s); one value means a cube")->capture_default_str();
  idx["rho"] = sub->add_option("--rho", c.rho, "initial density of strategy 1")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  idx["seed"] = sub->add_option("--seed", c.seed, "base seed; replicate i uses seed + i")->capture_default_str();
  idx["replicates"] = sub->add_option("--replicates", c.replicates, "number of replicates")->capture_default_str()->check(CLI::PositiveNumber);
  idx["horizon"] = sub->add_option("--horizon", c.horizon, "time horizon")->capture_default_str()->check(CLI::PositiveNumber);
  idx["out"] = sub->add_option("--out", c.out, "output path, - for stdout")->capture_default_str();
  idx["format"] = sub->add_option("--format", c.format, "csv or json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
  idx["workers"] = sub->add_option("--workers", c.workers, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--config", c.config, "JSON file with option values; flags given on the command line win");
}

std::vector<std::string> json_tokens(const Json& v) {
  if (v.is_array()) {
    std::vector<std::string> out;
    for (const auto& e : v) {
      const auto t = json_tokens(e);
      out.insert(out.end(), t.begin(), t.end());
    }
    return out;
  }
  if (v.is_string()) return {v.get<std::string>()};
  if (v.is_boolean()) return {v.get<bool>() ? "true" : "false"};
  return {v.dump()};
}

void apply_config(const std::string& path, const OptionIndex& idx) {
  std::ifstream f(path);
  if (!f) throw CLI::ValidationError("--config", "cannot open " + path);
  Json j;
  try {
    j = Json::parse(f);
  } catch (const std::exception& e) {
    throw CLI::ValidationError("--config", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw CLI::ValidationError("--config", "top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") continue;
    const auto it = idx.find(key);
    if (it == idx.end()) throw CLI::ValidationError("--config", "unknown key '" + key + "'");
    CLI::Option* opt = it->second;
    if (opt->count() > 0) continue;
    const auto tokens = json_tokens(value);
    if (opt->get_type_size() == 0) {
      if (tokens.size() != 1) throw CLI::ValidationError("--config", "flag '" + key + "' needs a boolean");
      if (tokens[0] == "true") opt->add_result("true");
      else if (tokens[0] != "false") throw CLI::ValidationError("--config", "flag '" + key + "' needs a boolean");
    } else {
      opt->add_result(tokens);
    }
    opt->run_callback();
  }
}

ExperimentConfig make_config(const Common& c, const std::string& kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.payoffs = PayoffMatrix::parse(c.payoffs);
  cfg.d = c.d;
  cfg.M = c.M;
  cfg.sides = c.sides;
  cfg.rho = c.rho;
  cfg.horizon = c.horizon;
  cfg.replicates = c.replicates;
  cfg.seed = c.seed;
  cfg.workers = c.workers;
  cfg.out = c.out;
  cfg.format = c.format;
  return cfg;
}

Table table_for(const ExperimentConfig& cfg, std::vector<std::string> columns) {
  Table t;
  t.columns = std::move(columns);
  const Json j = cfg.to_json();
  for (const auto& [k, v] : j.items()) t.metadata[k] = v;
  return t;
}

double gate_threshold(double bound, std::int64_t trials) {
  if (bound <= 0.0) return bound;
  return bound - 3.0 * stats::sigma_at(std::min(bound, 1.0), trials);
}

bool meets(double estimate, double bound, std::int64_t trials) { return estimate >= gate_threshold(bound, trials); }

Json estimate_row_bound(const EstimateRecord& r, double bound, bool pass) {
  return Json{r.event, r.successes, r.trials, r.estimate, r.interval.lower, r.interval.upper, bound,
              gate_threshold(bound, r.trials), pass};
}

const std::vector<std::string> kEstimateColumns{"event", "successes", "trials", "estimate", "lower",
                                                "upper", "bound",     "threshold", "pass"};

std::vector<Json> row_of(const Json& arr) { return {arr.begin(), arr.end()}; }

// ---------------------------------------------------------------------------

int cmd_simulate(const Common& c, const std::string& log_csv, const std::string& final_path) {
  const auto cfg = make_config(c, "simulate");
  auto t = table_for(cfg, {"seed", "outcome", "n1_initial", "n1_final", "flips", "events", "end_time", "absorbed"});
  const auto game = classify_game(cfg.payoffs);
  t.metadata["game"] = game.name ? *game.name : game.ordering;
  t.metadata["boundary"] = game.boundary;
  const auto trs = parallel_map(cfg.replicates, cfg.workers, [&](std::int64_t i) {
    return simulate_replicate(cfg, cfg.replicate_seed(i), i == 0 && !log_csv.empty() ? LogMode::kFlips : LogMode::kNone);
  });
  for (std::size_t i = 0; i < trs.size(); ++i) {
    const auto& tr = trs[i];
    t.rows.push_back({Json(cfg.replicate_seed(static_cast<std::int64_t>(i))), Json(to_string(classify_run(tr))),
                      Json(tr.initial.count(Strategy::kOne)), Json(tr.final_state.count(Strategy::kOne)),
                      Json(tr.flips), Json(tr.events), Json(tr.end_time), Json(tr.absorbed)});
  }
  if (!log_csv.empty()) {
    std::ofstream f(log_csv);
    if (!f) throw std::runtime_error("cannot open '" + log_csv + "' for writing");
    write_trajectory_csv(f, trs.front());
  }
  if (!final_path.empty()) {
    std::ofstream f(final_path);
    if (!f) throw std::runtime_error("cannot open '" + final_path + "' for writing");
    write_configuration(f, trs.front().final_state);
  }
  emit(t, cfg.format, cfg.out);
  return 0;
}

int cmd_meanfield(const Common& c, const std::string& u0_text, double dt, const std::string& orientation) {
  const auto cfg = make_config(c, "meanfield");
  const auto dp = derive_params(cfg.payoffs);
  const Rational u0 = Rational::parse(u0_text);
  const auto o = orientation == "displayed" ? mean_field::Orientation::kDisplayed : mean_field::Orientation::kFlux;
  auto t = table_for(cfg, {"t", "u1"});
  t.metadata["a1"] = dp.a1.to_string();
  t.metadata["a2"] = dp.a2.to_string();
  t.metadata["u0"] = u0.to_string();
  t.metadata["orientation"] = orientation;
  const auto fp = mean_field::fixed_points(dp);
  t.metadata["e_star"] = fp.e_star ? fp.e_star->to_string() : "undefined";
  if (u0 > Rational(0) && u0 < Rational(1) && o == mean_field::Orientation::kFlux) {
    const auto cl = mean_field::classify_outcome(dp, u0);
    t.metadata["outcome"] = to_string(cl.outcome);
    t.metadata["limit"] = cl.limit;
    t.metadata["boundary"] = cl.boundary;
  }
  for (const auto& [time, u] : mean_field::series(dp, u0, cfg.horizon, dt, o)) t.rows.push_back({Json(time), Json(u)});
  emit(t, cfg.format, cfg.out);
  return 0;
}

int cmd_phase_sweep(const Common& c, const std::string& a12, const std::string& a21, const std::string& g11,
                    const std::string& g22, bool include_boundary) {
  const auto cfg = make_config(c, "phase-sweep");
  const PhaseSweepSpec spec{Rational::parse(a12), Rational::parse(a21), rational_grid(g11), rational_grid(g22),
                            include_boundary};
  std::vector<PhaseCell> cells;
  try {
    cells = phase_sweep(spec, cfg);
  } catch (const std::logic_error& e) {
    throw GateFailure(e.what());
  }
  auto t = table_for(cfg, {"a11", "a22", "game", "boundary", "pure_growth", "weak", "strong", "fixation",
                           "open_region", "mean_field", "s1-wins", "s2-wins", "fixates-mixed", "undecided",
                           "skipped"});
  t.metadata["a12"] = spec.a12.to_string();
  t.metadata["a21"] = spec.a21.to_string();
  for (const auto& cell : cells) {
    t.rows.push_back({Json(cell.a11.to_string()), Json(cell.a22.to_string()),
                      Json(cell.game.name ? *cell.game.name : cell.game.ordering), Json(cell.game.boundary),
                      Json(cell.regions.pure_growth), Json(cell.regions.weak), Json(cell.regions.strong),
                      Json(cell.regions.fixation), Json(cell.regions.open_region),
                      Json(cell.mean_field ? mean_field::to_string(*cell.mean_field) : ""), Json(cell.counts[0]),
                      Json(cell.counts[1]), Json(cell.counts[2]), Json(cell.counts[3]), Json(cell.skipped)});
  }
  emit(t, cfg.format, cfg.out);
  return 0;
}

int cmd_front(const Common& c, std::int64_t n, const std::string& ext_text, std::int64_t x0, bool enumerate,
              int max_width, bool gate) {
  const auto cfg = make_config(c, "front");
  bool ok = true;
  if (enumerate) {
    auto t = table_for(cfg, {"cells", "X", "K", "rates", "drift_a", "drift_b", "drift_sign"});
    t.metadata["gold1"] = region_predicates(cfg.payoffs, NeighborhoodSpec(1, 1)).gold1;
    for (const auto& r : enumerate_front_contexts(cfg.payoffs, max_width)) {
      std::string rates;
      for (const auto& [dx, rate] : r.rates) rates += (rates.empty() ? "" : " ") + std::to_string(dx) + ":" + rate.to_string();
      const int sg = r.drift.sign();
      ok = ok && sg <= 0;
      t.rows.push_back({Json(to_digits(r.cells)), Json(r.X), r.K ? Json(*r.K) : Json(nullptr), Json(rates),
                        Json(r.drift.a().to_string()), Json(r.drift.b().to_string()), Json(sg)});
    }
    emit(t, cfg.format, cfg.out);
  } else {
    const auto ext = exterior_from_string(ext_text);
    const double bound = 1.0 - golden_power(-1).to_double();
    const auto est = estimate_by_seed("reached-n", cfg.replicates, cfg.seed, cfg.workers, [&](std::uint64_t s) {
      return run_hitting(cfg.payoffs, ext, n, s, {.x0 = x0}) == HittingOutcome::kReachedN;
    });
    ok = stats::passes_lower(est.estimate, bound, est.trials);
    auto t = table_for(cfg, kEstimateColumns);
    t.metadata["n"] = n;
    t.metadata["exterior"] = to_string(ext);
    t.metadata["x0"] = x0;
    t.rows.push_back(row_of(estimate_row_bound(est, bound, ok)));
    emit(t, cfg.format, cfg.out);
  }
  if (gate && !ok) throw GateFailure("front check failed");
  return 0;
}

int cmd_interval(const Common& c, std::int64_t m, std::int64_t n, const std::string& ext_text, int core, bool gate) {
  const auto cfg = make_config(c, "interval");
  const auto ext = exterior_from_string(ext_text);
  const Strategy s = strategy_from_int(core);
  const double bound = (7.0 - 3.0 * std::sqrt(5.0)) / 2.0;
  const auto est = estimate_by_seed("intact-escape", cfg.replicates, cfg.seed, cfg.workers, [&](std::uint64_t sd) {
    return interval_survival(cfg.payoffs, m, ext, n, sd, {.core = s}) == SurvivalOutcome::kIntactEscape;
  });
  const bool ok = stats::passes_lower(est.estimate, bound, est.trials);
  auto t = table_for(cfg, kEstimateColumns);
  t.metadata["m"] = m;
  t.metadata["n"] = n;
  t.metadata["exterior"] = to_string(ext);
  t.metadata["core"] = core;
  t.rows.push_back(row_of(estimate_row_bound(est, bound, ok)));
  emit(t, cfg.format, cfg.out);
  if (gate && !ok) throw GateFailure("interval bound not met");
  return 0;
}

int cmd_bootstrap(const Common& c, std::optional<double> density, double min_fill, bool gate) {
  const auto cfg = make_config(c, "bootstrap");
  const auto torus = cfg.torus();
  struct Row {
    std::int64_t eta0 = -1, zeta0 = 0, steps = 0, final_count = 0;
    bool full = false;
  };
  const auto rows = parallel_map(cfg.replicates, cfg.workers, [&](std::int64_t i) {
    const auto s = cfg.replicate_seed(i);
    Row r;
    BootstrapConfig z0(torus, false);
    if (density) {
      z0 = sample_site_field(*density, torus, s);
    } else {
      auto ci = coupled_initials(cfg.rho, torus, s);
      r.eta0 = extract_centers(ci.xi0).count();
      z0 = std::move(ci.zeta0);
    }
    r.zeta0 = z0.count();
    const auto lim = bootstrap_limit(z0);
    r.steps = lim.steps;
    r.final_count = lim.field.count();
    r.full = lim.field.full();
    return r;
  });
  auto t = table_for(cfg, {"seed", "eta0", "zeta0", "steps", "final", "full"});
  t.metadata["density"] = density ? *density : std::pow(cfg.rho, static_cast<double>(torus->N() + 1));
  std::int64_t full = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    full += r.full;
    t.rows.push_back({Json(cfg.replicate_seed(static_cast<std::int64_t>(i))), r.eta0 < 0 ? Json(nullptr) : Json(r.eta0),
                      Json(r.zeta0), Json(r.steps), Json(r.final_count), Json(r.full)});
  }
  const auto est = make_estimate("fills-torus", full, cfg.replicates);
  t.metadata["fill_estimate"] = est.estimate;
  t.metadata["fill_lower"] = est.interval.lower;
  t.metadata["fill_upper"] = est.interval.upper;
  emit(t, cfg.format, cfg.out);
  if (gate && est.estimate < min_fill) throw GateFailure("bootstrap filling below the requested fraction");
  return 0;
}

std::array<Strategy, 2> context_of(const std::string& s) {
  const auto w = word_from_digits(s);
  if (w.size() != 2) throw CLI::ValidationError("context", "context must be two cells, e.g. 22");
  return {w[0], w[1]};
}

int cmd_patterns(const Common& c, const std::string& pattern, const std::string& left, const std::string& right,
                 int chain_len, bool gate) {
  const auto cfg = make_config(c, "patterns");
  const auto& p = cfg.payoffs;
  if (!pattern.empty()) {
    const Pattern s{word_from_digits(pattern), context_of(left), context_of(right)};
    std::optional<AbsorbingReport> chain;
    if (chain_len > 0) chain = absorbing_chain_verify(chain_len, p);
    const auto j = pattern_report(s, p, chain ? &*chain : nullptr);
    if (cfg.out.empty() || cfg.out == "-") {
      std::cout << j.dump(2) << '\n';
    } else {
      std::ofstream f(cfg.out);
      if (!f) throw std::runtime_error("cannot open '" + cfg.out + "' for writing");
      f << j.dump(2) << '\n';
    }
    return 0;
  }
  bool ok = true;
  auto t = table_for(cfg, {"check", "asserted", "holds", "detail"});
  for (const auto& cl : pattern_claims(p)) {
    ok = ok && (!cl.asserted || cl.holds);
    t.rows.push_back({Json(cl.name), Json(cl.asserted), Json(cl.holds), Json("")});
  }
  const auto fr = forbidden_transition_check(p);
  for (const auto* group : {&fr.claim1, &fr.claim2}) {
    const bool asserted = group == &fr.claim1 ? fr.claim1_asserted : fr.claim2_asserted;
    for (const auto& tc : *group) {
      std::string detail;
      for (const auto& ce : tc.counterexamples) detail += (detail.empty() ? "" : " ") + ce;
      t.rows.push_back({Json("zero rate " + tc.name), Json(asserted), Json(tc.holds), Json(detail)});
    }
  }
  ok = ok && fr.passes();
  if (chain_len > 0) {
    const auto rp = region_predicates(p, NeighborhoodSpec(1, 1));
    const auto rep = absorbing_chain_verify(chain_len, p);
    const std::string detail = std::to_string(rep.absorbing_states) + " absorbing of " + std::to_string(rep.states) +
                               (rep.counterexample ? ", counterexample " + to_digits(*rep.counterexample) : "");
    ok = ok && (!rp.fixation || rep.absorbing);
    t.rows.push_back({Json("absorbing chain L0=" + std::to_string(chain_len)), Json(rp.fixation), Json(rep.absorbing),
                      Json(detail)});
  }
  emit(t, cfg.format, cfg.out);
  if (gate && !ok) throw GateFailure("a pattern check failed");
  return 0;
}

int cmd_blocks(const Common& c, int blocks, std::optional<double> T, std::int64_t tau_samples, bool coexistence,
               int L, double floor, double sample_interval, double min_fraction, bool gate) {
  const auto cfg = make_config(c, "blocks");
  bool ok = true;
  if (coexistence) {
    const auto rs = parallel_map(cfg.replicates, cfg.workers, [&](std::int64_t i) {
      return coexistence_run(cfg.payoffs, cfg.M, L, cfg.rho, cfg.horizon, cfg.replicate_seed(i), sample_interval, floor);
    });
    auto t = table_for(cfg, {"seed", "final_minority", "final_interface_density", "persistent"});
    t.metadata["L"] = L;
    t.metadata["floor"] = floor;
    std::int64_t k = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      k += rs[i].persistent;
      t.rows.push_back({Json(cfg.replicate_seed(static_cast<std::int64_t>(i))), Json(rs[i].final_minority),
                        Json(rs[i].final_interface_density), Json(rs[i].persistent)});
    }
    const auto est = make_estimate("persistent", k, cfg.replicates);
    t.metadata["persistent_estimate"] = est.estimate;
    t.metadata["persistent_lower"] = est.interval.lower;
    t.metadata["persistent_upper"] = est.interval.upper;
    ok = est.estimate >= min_fraction;
    emit(t, cfg.format, cfg.out);
  } else {
    BlockDiagnosticsSpec spec;
    spec.M = cfg.M;
    spec.blocks = blocks;
    spec.T = T;
    spec.tau_samples = tau_samples;
    spec.rho = cfg.rho;
    const auto s = block_event_diagnostics(cfg.payoffs, spec, cfg.replicates, cfg.seed, cfg.workers);
    auto t = table_for(cfg, kEstimateColumns);
    t.metadata["L"] = s.L;
    t.metadata["T"] = s.T;
    t.metadata["size_A"] = s.size_A;
    t.metadata["size_B"] = s.size_B;
    t.metadata["log_M"] = s.log_M;
    t.metadata["small_M"] = s.small_M;
    for (std::size_t i = 0; i < s.estimates.size(); ++i) {
      const auto& e = s.estimates[i];
      const double b = s.bounds[i];
      if (std::isnan(b)) {
        t.rows.push_back({Json(e.event), Json(e.successes), Json(e.trials), Json(e.estimate), Json(e.interval.lower),
                          Json(e.interval.upper), Json(nullptr), Json(nullptr), Json(nullptr)});
        continue;
      }
      const bool pass = meets(e.estimate, b, e.trials);
      ok = ok && pass;
      t.rows.push_back(row_of(estimate_row_bound(e, b, pass)));
    }
    emit(t, cfg.format, cfg.out);
  }
  if (gate && !ok) throw GateFailure("block diagnostics below their bounds");
  return 0;
}

int cmd_fluctuate(const Common& c, int ell0, std::int64_t flips, bool gate) {
  const auto cfg = make_config(c, "fluctuate");
  const auto rs = parallel_map(cfg.replicates, cfg.workers, [&](std::int64_t i) {
    return fluctuation_run(cfg.payoffs, ell0, flips, cfg.replicate_seed(i));
  });
  auto t = table_for(cfg, {"seed", "up", "down", "up_at_2", "down_at_2", "irregular", "flips", "max_length",
                           "truncated", "chi2", "p_value"});
  t.metadata["ell0"] = ell0;
  std::int64_t up = 0, down = 0, down2 = 0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const auto& r = rs[i];
    up += r.up;
    down += r.down;
    down2 += r.down_at_2;
    const double x = stats::symmetry_chi2(r.up, r.down);
    t.rows.push_back({Json(cfg.replicate_seed(static_cast<std::int64_t>(i))), Json(r.up), Json(r.down),
                      Json(r.up_at_2), Json(r.down_at_2), Json(r.irregular), Json(r.flips), Json(r.max_length),
                      Json(r.truncated), Json(x), Json(stats::chi2_1dof_pvalue(x))});
  }
  const double p = stats::chi2_1dof_pvalue(stats::symmetry_chi2(up, down));
  t.metadata["pooled_p_value"] = p;
  emit(t, cfg.format, cfg.out);
  if (gate && !(p > 0.01 && down2 == 0)) throw GateFailure("increments not symmetric or shrink at length two");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Death-birth of the fittest: spatial simulations, mean field and exact checks"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::map<std::string, OptionIndex> index;
  std::map<std::string, Common> common;
  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    add_common(s, common[name], index[name]);
    return s;
  };

  std::string log_csv, final_path;
  auto* sim = sub("simulate", "simulate replicates from a product measure");
  index["simulate"]["log-csv"] = sim->add_option("--log-csv", log_csv, "flip log of the first replicate as CSV");
  index["simulate"]["final"] = sim->add_option("--final", final_path, "final configuration of the first replicate");

  std::string u0 = "1/2", orientation = "flux";
  double dt = 0.1;
  auto* mf = sub("meanfield", "closed-form mean-field trajectory");
  index["meanfield"]["u0"] = mf->add_option("--u0", u0, "initial frequency of strategy 1 (rational)")->capture_default_str();
  index["meanfield"]["dt"] = mf->add_option("--dt", dt, "output time step")->capture_default_str()->check(CLI::PositiveNumber);
  index["meanfield"]["orientation"] =
      mf->add_option("--orientation", orientation, "flux or displayed")->capture_default_str()->check(CLI::IsMember({"flux", "displayed"}));

  std::string a12 = "0", a21 = "1", g11 = "-2:2:5", g22 = "-2:2:5";
  bool include_boundary = false;
  auto* ps = sub("phase-sweep", "outcome frequencies over an (a11, a22) grid");
  index["phase-sweep"]["a12"] = ps->add_option("--a12", a12, "fixed a12")->capture_default_str();
  index["phase-sweep"]["a21"] = ps->add_option("--a21", a21, "fixed a21")->capture_default_str();
  index["phase-sweep"]["a11-grid"] = ps->add_option("--a11-grid", g11, "lo:hi:count")->capture_default_str();
  index["phase-sweep"]["a22-grid"] = ps->add_option("--a22-grid", g22, "lo:hi:count")->capture_default_str();
  index["phase-sweep"]["include-boundary"] = ps->add_flag("--include-boundary", include_boundary, "simulate boundary cells too");

  std::int64_t front_n = 20, x0 = 0;
  std::string front_ext = "all-2";
  bool enumerate = false, front_gate = false;
  int max_width = 9;
  auto* fr = sub("front", "half-line front: hitting estimate or exact drift table");
  index["front"]["n"] = fr->add_option("--n", front_n, "target level")->capture_default_str()->check(CLI::PositiveNumber);
  index["front"]["exterior"] = fr->add_option("--exterior", front_ext, "all-2, alternating, pairs or all-1")->capture_default_str();
  index["front"]["x0"] = fr->add_option("--x0", x0, "initial front position")->capture_default_str()->check(CLI::NonNegativeNumber);
  index["front"]["enumerate"] = fr->add_flag("--enumerate", enumerate, "exact drift over all front contexts");
  index["front"]["max-width"] = fr->add_option("--max-width", max_width, "context width")->capture_default_str()->check(CLI::Range(1, 16));
  index["front"]["gate"] = fr->add_flag("--gate", front_gate, "exit 2 when the bound or drift sign fails");

  std::int64_t m = 1, interval_n = 20;
  std::string interval_ext = "all-2";
  int core = 1;
  bool interval_gate = false;
  auto* iv = sub("interval", "survival of a core interval until both fronts escape");
  index["interval"]["m"] = iv->add_option("--m", m, "half-width of the core")->capture_default_str()->check(CLI::PositiveNumber);
  index["interval"]["n"] = iv->add_option("--n", interval_n, "escape level")->capture_default_str()->check(CLI::PositiveNumber);
  index["interval"]["exterior"] = iv->add_option("--exterior", interval_ext, "all-2, alternating, pairs or all-1")->capture_default_str();
  index["interval"]["core"] = iv->add_option("--core", core, "core strategy")->capture_default_str()->check(CLI::IsMember({1, 2}));
  index["interval"]["gate"] = iv->add_flag("--gate", interval_gate, "exit 2 when the bound fails");

  std::optional<double> density;
  double min_fill = 0.95;
  bool boot_gate = false;
  auto* bs = sub("bootstrap", "modified bootstrap percolation limits");
  index["bootstrap"]["density"] =
      bs->add_option("--density", density, "occupied density; default rho^(N+1) with centers reported")->check(CLI::Range(0.0, 1.0));
  index["bootstrap"]["min-fill"] = bs->add_option("--min-fill", min_fill, "gate fraction")->capture_default_str();
  index["bootstrap"]["gate"] = bs->add_flag("--gate", boot_gate, "exit 2 when fewer runs fill the torus");

  std::string pattern, left = "22", right = "22";
  int chain_len = 0;
  bool pat_gate = false;
  auto* pt = sub("patterns", "exact stability, forbidden transitions and absorbing chain checks");
  index["patterns"]["pattern"] = pt->add_option("--pattern", pattern, "word over {1,2}; prints a JSON report");
  index["patterns"]["left"] = pt->add_option("--left", left, "two-cell left context")->capture_default_str();
  index["patterns"]["right"] = pt->add_option("--right", right, "two-cell right context")->capture_default_str();
  index["patterns"]["chain"] = pt->add_option("--chain", chain_len, "segment length for the absorbing chain, 0 for none")->capture_default_str()->check(CLI::Range(0, 20));
  index["patterns"]["gate"] = pt->add_flag("--gate", pat_gate, "exit 2 when an asserted check fails");

  int blocks = 4, L = 2100;
  std::optional<double> T;
  std::int64_t tau_samples = 2000;
  bool coexistence = false, block_gate = false;
  double floor = 0.01, sample_interval = 10.0, min_fraction = 0.9;
  auto* bl = sub("blocks", "block-event diagnostics or coexistence runs at finite range");
  index["blocks"]["blocks"] = bl->add_option("--blocks", blocks, "torus length in units of 7M")->capture_default_str()->check(CLI::PositiveNumber);
  index["blocks"]["T"] = bl->add_option("--T", T, "time scale; default twice the 99th percentile of tau9")->check(CLI::PositiveNumber);
  index["blocks"]["tau-samples"] = bl->add_option("--tau-samples", tau_samples, "samples for the tau9 quantile")->capture_default_str();
  index["blocks"]["coexistence"] = bl->add_flag("--coexistence", coexistence, "minority persistence runs instead");
  index["blocks"]["L"] = bl->add_option("--L", L, "ring length for coexistence runs")->capture_default_str();
  index["blocks"]["floor"] = bl->add_option("--floor", floor, "persistence floor")->capture_default_str();
  index["blocks"]["sample-interval"] = bl->add_option("--sample-interval", sample_interval, "sampling period")->capture_default_str();
  index["blocks"]["min-fraction"] = bl->add_option("--min-fraction", min_fraction, "gate fraction of persistent runs")->capture_default_str();
  index["blocks"]["gate"] = bl->add_flag("--gate", block_gate, "exit 2 when an estimate misses its bound");

  int ell0 = 10;
  std::int64_t flips = 10000;
  bool fl_gate = false;
  auto* fl = sub("fluctuate", "length of a single run of 1s in a sea of 2s");
  index["fluctuate"]["ell0"] = fl->add_option("--ell0", ell0, "initial length")->capture_default_str()->check(CLI::PositiveNumber);
  index["fluctuate"]["flips"] = fl->add_option("--flips", flips, "flips per replicate")->capture_default_str()->check(CLI::PositiveNumber);
  index["fluctuate"]["gate"] = fl->add_flag("--gate", fl_gate, "exit 2 on asymmetric increments or a shrink at length two");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    Common& c = common[name];
    if (!c.config.empty()) apply_config(c.config, index[name]);
    if (name == "simulate") return cmd_simulate(c, log_csv, final_path);
    if (name == "meanfield") return cmd_meanfield(c, u0, dt, orientation);
    if (name == "phase-sweep") return cmd_phase_sweep(c, a12, a21, g11, g22, include_boundary);
    if (name == "front") return cmd_front(c, front_n, front_ext, x0, enumerate, max_width, front_gate);
    if (name == "interval") return cmd_interval(c, m, interval_n, interval_ext, core, interval_gate);
    if (name == "bootstrap") return cmd_bootstrap(c, density, min_fill, boot_gate);
    if (name == "patterns") return cmd_patterns(c, pattern, left, right, chain_len, pat_gate);
    if (name == "blocks") return cmd_blocks(c, blocks, T, tau_samples, coexistence, L, floor, sample_interval, min_fraction, block_gate);
    if (name == "fluctuate") return cmd_fluctuate(c, ell0, flips, fl_gate);
  } catch (const GateFailure& e) {
    std::cerr << "gate failure: " << e.what() << '\n';
    return kGateFailure;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
