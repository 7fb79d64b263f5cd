#include "pmcmc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pmcmc/bootstrap.hpp"
#include "pmcmc/kalman.hpp"
#include "pmcmc/proposals.hpp"
#include "pmcmc/samplers.hpp"

namespace pmcmc {

namespace {

using nlohmann::json;

bool is_exact(const std::string& s) { return s == "ideal-mh" || s == "ideal-barker"; }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

void write_json(const std::filesystem::path& p, const json& j) {
  auto os = open_out(p);
  os << j.dump(2) << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

ChainRecord make_record(std::size_t iter, const ThetaVector& th, bool accepted, std::size_t l,
                        double logz) {
  return {iter, th.rho, th.sigma2_x, th.sigma2_y, accepted, l, logz};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (horizon == 0) throw ConfigError("horizon must be positive");
  if (iterations == 0) throw ConfigError("iterations must be positive");
  if (burn_in >= iterations) throw ConfigError("burn-in must be smaller than iterations");
  if (n_particles == 0) throw ConfigError("n-particles must be positive");
  if (m_params == 0) throw ConfigError("m-params must be positive");
  if (seeds == 0) throw ConfigError("seeds must be positive");
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (n_grid.empty()) throw ConfigError("empty N grid");
  for (auto n : n_grid)
    if (n == 0) throw ConfigError("N grid entries must be positive");
  auto known = [](const std::string& s) {
    return std::find(kSamplerNames.begin(), kSamplerNames.end(), s) != kSamplerNames.end();
  };
  if (!known(sampler)) throw ConfigError("unknown sampler '" + sampler + "'");
  if (samplers.empty()) throw ConfigError("empty sampler list");
  for (const auto& s : samplers)
    if (!known(s)) throw ConfigError("unknown sampler '" + s + "'");
  if (!in_prior_support(true_theta))
    throw ConfigError("true theta outside the prior support (need |rho| <= 1, variances > 0)");
}

void ExperimentConfig::use_full_scale() {
  iterations = 100000;
  burn_in = 10000;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  if (j.contains("true_theta")) {
    const auto& t = j.at("true_theta");
    c.true_theta = {t.at("rho").get<double>(), t.at("sigma2_x").get<double>(),
                    t.at("sigma2_y").get<double>()};
  }
  auto get = [&](const char* key, auto& dst) {
    if (j.contains(key)) dst = j.at(key).get<std::decay_t<decltype(dst)>>();
  };
  get("horizon", c.horizon);
  get("data_seed", c.data_seed);
  get("data_path", c.data_path);
  get("iterations", c.iterations);
  get("burn_in", c.burn_in);
  get("sampler", c.sampler);
  get("samplers", c.samplers);
  get("n_particles", c.n_particles);
  get("n_grid", c.n_grid);
  get("m_params", c.m_params);
  get("seed", c.seed);
  get("seeds", c.seeds);
  get("tau", c.tau);
  get("backward_sampling", c.backward_sampling);
  get("threads", c.threads);
  if (j.contains("initial_mode")) c.initial_mode = parse_initial_mode(j.at("initial_mode"));
  if (j.contains("variant")) c.variant = parse_mixture_variant(j.at("variant"));
  if (j.contains("terminal_selection"))
    c.terminal_selection = parse_terminal_selection(j.at("terminal_selection"));
  if (j.contains("out")) c.out = j.at("out").get<std::string>();
  if (j.value("paper_scale", false)) c.use_full_scale();
  return c;
}

json to_json(const ExperimentConfig& c) {
  return {
      {"true_theta",
       {{"rho", c.true_theta.rho},
        {"sigma2_x", c.true_theta.sigma2_x},
        {"sigma2_y", c.true_theta.sigma2_y}}},
      {"horizon", c.horizon},
      {"data_seed", c.data_seed},
      {"data_path", c.data_path},
      {"initial_mode", to_string(c.initial_mode)},
      {"iterations", c.iterations},
      {"burn_in", c.burn_in},
      {"sampler", c.sampler},
      {"samplers", c.samplers},
      {"n_particles", c.n_particles},
      {"n_grid", c.n_grid},
      {"m_params", c.m_params},
      {"seed", c.seed},
      {"seeds", c.seeds},
      {"tau", c.tau},
      {"variant", to_string(c.variant)},
      {"terminal_selection", to_string(c.terminal_selection)},
      {"backward_sampling", c.backward_sampling},
      {"out", c.out.string()},
  };
}

std::vector<double> simulate_observations(const ExperimentConfig& c) {
  if (!in_prior_support(c.true_theta) || c.true_theta.sigma2_x <= 0.0)
    throw ConfigError("cannot simulate: true theta outside the support");
  RngStream rng(c.data_seed, StreamPurpose::kData);
  return simulate_linear_gaussian(c.true_theta, c.horizon, rng, c.initial_mode).second;
}

std::vector<double> load_observations(const std::filesystem::path& csv) {
  std::ifstream is(csv);
  if (!is) throw std::runtime_error("cannot read " + csv.string());
  std::string line;
  if (!std::getline(is, line) || line != "t,y")
    throw std::runtime_error(csv.string() + ": expected header 't,y'");
  std::vector<double> y;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 2) throw std::runtime_error(csv.string() + ": malformed row '" + line + "'");
    if (static_cast<std::size_t>(to_double(f[0])) != y.size())
      throw std::runtime_error(csv.string() + ": rows out of order");
    y.push_back(to_double(f[1]));
  }
  if (y.empty()) throw std::runtime_error(csv.string() + ": no observations");
  return y;
}

void write_observations(const std::filesystem::path& csv, std::span<const double> y) {
  auto os = open_out(csv);
  os << "t,y\n";
  for (std::size_t t = 0; t < y.size(); ++t) os << t << ',' << fmt(y[t]) << '\n';
}

std::vector<double> observations_for(const ExperimentConfig& c) {
  return c.data_path.empty() ? simulate_observations(c) : load_observations(c.data_path);
}

void generate_data(const ExperimentConfig& c) {
  c.validate();
  const auto y = simulate_observations(c);
  write_observations(c.out / "data.csv", y);
  write_json(c.out / "data.json", {{"true_theta",
                                     {{"rho", c.true_theta.rho},
                                      {"sigma2_x", c.true_theta.sigma2_x},
                                      {"sigma2_y", c.true_theta.sigma2_y}}},
                                    {"horizon", c.horizon},
                                    {"data_seed", c.data_seed},
                                    {"initial_mode", to_string(c.initial_mode)}});
}

std::vector<ChainRecord> run_chain(const ExperimentConfig& c, const std::string& sampler,
                                   std::size_t num_particles, std::span<const double> y,
                                   std::uint64_t seed) {
  const LinearGaussianSSM model(std::vector<double>(y.begin(), y.end()), c.initial_mode);
  const GaussianRandomWalk q(c.tau);
  ChainStreams cs(seed);
  std::vector<ChainRecord> records;
  records.reserve(c.iterations);
  CsmcConfig csmc{num_particles, c.backward_sampling, c.terminal_selection};

  auto loop = [&](auto&& step) {
    for (std::size_t i = 0; i < c.iterations; ++i) {
      try {
        records.push_back(step(i));
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        throw std::runtime_error(sampler + " failed at iteration " + std::to_string(i) + ": " +
                                 e.what());
      }
    }
  };

  if (sampler == "pmmh") {
    BootstrapFilter<LinearGaussianSSM> filter(model, num_particles);
    auto state = pmmh_initial_state(model, c.true_theta, filter, cs.smc);
    loop([&](std::size_t i) {
      const auto o = pmmh_kernel(state, model, q, filter, streams_of(cs));
      return make_record(i, state.theta, o.accepted, 0, state.log_z);
    });
  } else if (sampler == "pgibbs" || sampler == "mpgibbs") {
    csmc.validate();
    ChainState<ThetaVector> state;
    state.theta = c.true_theta;
    state.trajectory = ffbs_sample(c.true_theta, y, cs.smc, c.initial_mode);
    ParticleSystem ps;
    if (sampler == "pgibbs") {
      loop([&](std::size_t i) {
        const auto o = pgibbs_kernel(state, model, q, csmc, streams_of(cs), ps);
        return make_record(i, state.theta, o.accepted, 0, kNaN);
      });
    } else {
      const GaussianProposalPair pair(c.tau);
      const MPGibbsConfig mcfg{c.m_params, c.variant, csmc};
      loop([&](std::size_t i) {
        const auto o = mpgibbs_kernel(state, model, pair, mcfg, streams_of(cs), ps);
        return make_record(i, state.theta, o.accepted, state.index, kNaN);
      });
    }
  } else if (is_exact(sampler)) {
    auto ll = [&](const ThetaVector& th) { return kalman_loglik(th, y, c.initial_mode); };
    ChainState<ThetaVector> state;
    state.theta = c.true_theta;
    state.log_z = ll(c.true_theta);
    const bool barker = sampler == "ideal-barker";
    loop([&](std::size_t i) {
      const auto o = barker ? ideal_barker_kernel(state, model, ll, q, cs.proposal)
                            : ideal_mh_kernel(state, model, ll, q, cs.proposal);
      return make_record(i, state.theta, o.accepted, 0, state.log_z);
    });
  } else {
    throw ConfigError("unknown sampler '" + sampler + "'");
  }
  return records;
}

void write_records(std::ostream& os, std::span<const ChainRecord> records) {
  os << "iter,rho,sigma2_x,sigma2_y,accepted,l,logz_or_nan\n";
  for (const auto& r : records)
    os << r.iter << ',' << fmt(r.rho) << ',' << fmt(r.sigma2_x) << ',' << fmt(r.sigma2_y) << ','
       << (r.accepted ? 1 : 0) << ',' << r.l << ',' << fmt(r.logz) << '\n';
}

std::vector<ChainRecord> read_records(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "iter,rho,sigma2_x,sigma2_y,accepted,l,logz_or_nan")
    throw std::runtime_error("records: unexpected header");
  std::vector<ChainRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 7) throw std::runtime_error("records: malformed row '" + line + "'");
    out.push_back({static_cast<std::size_t>(std::stoull(f[0])), to_double(f[1]), to_double(f[2]),
                   to_double(f[3]), f[4] == "1", static_cast<std::size_t>(std::stoull(f[5])),
                   to_double(f[6])});
  }
  return out;
}

json summary_json(const ChainSummary& s) {
  json params = json::object();
  const char* names[] = {"rho", "sigma2_x", "sigma2_y"};
  for (int p = 0; p < 3; ++p)
    params[names[p]] = {{"mean", s.params[p].mean},
                        {"variance", s.params[p].variance},
                        {"iact", s.params[p].iact},
                        {"ess", s.params[p].ess}};
  return {{"acceptance_rate", s.acceptance_rate},
          {"burn_in", s.burn_in},
          {"retained", s.retained},
          {"ess_min", s.ess_min()},
          {"parameters", params}};
}

ChainSummary run_sampler(const ExperimentConfig& c) {
  c.validate();
  const auto y = observations_for(c);
  const auto records = run_chain(c, c.sampler, c.n_particles, y, c.seed);
  {
    auto os = open_out(c.out / "records.csv");
    write_records(os, records);
  }
  const ChainSummary s = summarize(records, c.burn_in);
  json j = summary_json(s);
  j["sampler"] = c.sampler;
  j["config"] = to_json(c);
  write_json(c.out / "summary.json", j);
  return s;
}

std::uint64_t cell_stream_seed(std::uint64_t seed, const std::string& sampler, std::size_t n,
                               std::size_t m) {
  // FNV-1a over the cell key.
  const std::string key =
      sampler + '/' + std::to_string(n) + '/' + std::to_string(m) + '/' + std::to_string(seed);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : key) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<GridCell> grid_cells(const ExperimentConfig& c) {
  std::vector<GridCell> cells;
  for (const auto& s : c.samplers) {
    const std::vector<std::size_t> ns = is_exact(s) ? std::vector<std::size_t>{0} : c.n_grid;
    const std::size_t m = s == "mpgibbs" ? c.m_params : 1;
    for (auto n : ns)
      for (std::size_t k = 0; k < c.seeds; ++k) {
        GridCell cell;
        cell.sampler = s;
        cell.n = n;
        cell.m = m;
        cell.seed = c.seed + k;
        cell.stream_seed = cell_stream_seed(cell.seed, s, n, m);
        cells.push_back(cell);
      }
  }
  return cells;
}

std::vector<GridCell> run_grid(const ExperimentConfig& c) {
  c.validate();
  const auto y = observations_for(c);
  auto cells = grid_cells(c);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
      auto& cell = cells[i];
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const auto records = run_chain(c, cell.sampler, cell.n, y, cell.stream_seed);
        cell.summary = summarize(records, c.burn_in);
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cell.wallclock_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  std::size_t nthreads = c.threads ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min(nthreads, cells.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  {
    auto os = open_out(c.out / "grid.csv");
    write_grid_csv(os, cells);
  }
  json agg = aggregate_grid(cells);
  json failures = json::array();
  for (const auto& cell : cells)
    if (!cell.error.empty())
      failures.push_back({{"sampler", cell.sampler},
                          {"n", cell.n},
                          {"m", cell.m},
                          {"seed", cell.seed},
                          {"error", cell.error}});
  write_json(c.out / "grid_summary.json",
             {{"config", to_json(c)}, {"aggregate", agg}, {"failures", failures}});
  auto svg = open_out(c.out / "figure1.svg");
  svg << figure_svg(cells);
  return cells;
}

void write_grid_csv(std::ostream& os, std::span<const GridCell> cells) {
  os << "sampler,n,m,seed,acceptance,iact_rho,iact_s2x,iact_s2y,ess_min,wallclock_s\n";
  for (const auto& cell : cells) {
    const bool ok = cell.error.empty();
    const auto& s = cell.summary;
    auto v = [&](double x) { return fmt(ok ? x : kNaN); };
    os << cell.sampler << ',' << cell.n << ',' << cell.m << ',' << cell.seed << ','
       << v(s.acceptance_rate) << ',' << v(s.params[0].iact) << ',' << v(s.params[1].iact) << ','
       << v(s.params[2].iact) << ',' << v(s.ess_min()) << ',' << fmt(cell.wallclock_s) << '\n';
  }
}

std::vector<GridCell> read_grid_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) ||
      line != "sampler,n,m,seed,acceptance,iact_rho,iact_s2x,iact_s2y,ess_min,wallclock_s")
    throw std::runtime_error("grid: unexpected header");
  std::vector<GridCell> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 10) throw std::runtime_error("grid: malformed row '" + line + "'");
    GridCell cell;
    cell.sampler = f[0];
    cell.n = std::stoull(f[1]);
    cell.m = std::stoull(f[2]);
    cell.seed = std::stoull(f[3]);
    cell.summary.acceptance_rate = to_double(f[4]);
    for (int p = 0; p < 3; ++p) cell.summary.params[p].iact = to_double(f[5 + p]);
    for (auto& p : cell.summary.params) p.ess = to_double(f[8]);
    cell.wallclock_s = to_double(f[9]);
    if (std::isnan(cell.summary.acceptance_rate)) cell.error = "failed";
    out.push_back(cell);
  }
  return out;
}

json aggregate_grid(std::span<const GridCell> cells) {
  std::map<std::pair<std::string, std::size_t>, std::vector<const GridCell*>> groups;
  std::vector<std::pair<std::string, std::size_t>> order;
  for (const auto& cell : cells) {
    const auto key = std::make_pair(cell.sampler, cell.n);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&cell);
  }
  json out = json::array();
  for (const auto& key : order) {
    std::vector<double> acc, ess;
    std::size_t failed = 0;
    for (const auto* cell : groups[key]) {
      if (!cell->error.empty()) {
        ++failed;
        continue;
      }
      acc.push_back(cell->summary.acceptance_rate);
      ess.push_back(cell->summary.ess_min());
    }
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return v.empty() ? kNaN : s / static_cast<double>(v.size());
    };
    auto sd = [&](const std::vector<double>& v) {
      if (v.size() < 2) return 0.0;
      const double m = mean(v);
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      return std::sqrt(s / static_cast<double>(v.size() - 1));
    };
    out.push_back({{"sampler", key.first},
                   {"n", key.second},
                   {"m", groups[key].front()->m},
                   {"acceptance_mean", mean(acc)},
                   {"acceptance_sd", sd(acc)},
                   {"ess_min_mean", mean(ess)},
                   {"cells", groups[key].size()},
                   {"failed", failed}});
  }
  return out;
}

std::string figure_svg(std::span<const GridCell> cells) {
  const json agg = aggregate_grid(cells);
  constexpr double W = 640, H = 420, L = 70, R = 170, Tp = 30, B = 60;
  double nmin = 0, nmax = 0, ymax = 0.1, ideal_mh = kNaN, ideal_barker = kNaN;
  for (const auto& row : agg) {
    const double a = row["acceptance_mean"].is_number() ? row["acceptance_mean"].get<double>() : kNaN;
    if (std::isnan(a)) continue;
    ymax = std::max(ymax, a);
    const std::string s = row["sampler"];
    const double n = row["n"].get<double>();
    if (s == "ideal-mh") ideal_mh = a;
    else if (s == "ideal-barker") ideal_barker = a;
    else {
      nmin = nmin == 0 ? n : std::min(nmin, n);
      nmax = std::max(nmax, n);
    }
  }
  ymax = std::ceil(ymax * 11.0) / 10.0;
  if (nmin == 0) nmin = 1, nmax = 2;
  if (nmax == nmin) nmax = nmin * 2;
  const double lx0 = std::log2(nmin), lx1 = std::log2(nmax);
  auto px = [&](double n) { return L + (std::log2(n) - lx0) / (lx1 - lx0) * (W - L - R); };
  auto py = [&](double a) { return H - B - a / ymax * (H - Tp - B); };

  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n<line x1=\"" << L << "\" y1=\"" << Tp << "\" x2=\"" << L
     << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (double n = nmin; n <= nmax * 1.0001; n *= 2)
    os << "<text x=\"" << px(n) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << n
       << "</text>\n";
  for (int k = 0; k <= 5; ++k) {
    const double a = ymax * k / 5.0;
    os << "<text x=\"" << L - 8 << "\" y=\"" << py(a) + 4 << "\" text-anchor=\"end\">" << a
       << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15
     << "\" text-anchor=\"middle\">number of particles N</text>\n"
     << "<text x=\"18\" y=\"" << (Tp + H - B) / 2 << "\" transform=\"rotate(-90 18 "
     << (Tp + H - B) / 2 << ")\" text-anchor=\"middle\">acceptance rate</text>\n";

  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  int legend = 0;
  auto legend_entry = [&](const std::string& label, const std::string& color,
                          const std::string& dash) {
    const double y = Tp + 10 + 20 * legend++;
    os << "<line x1=\"" << W - R + 15 << "\" y1=\"" << y << "\" x2=\"" << W - R + 45 << "\" y2=\""
       << y << "\" stroke=\"" << color << "\" stroke-width=\"2\"" << dash << "/>\n<text x=\""
       << W - R + 52 << "\" y=\"" << y + 4 << "\">" << label << "</text>\n";
  };
  std::vector<std::string> names;
  for (const auto& row : agg) {
    const std::string s = row["sampler"];
    if (s != "ideal-mh" && s != "ideal-barker" &&
        std::find(names.begin(), names.end(), s) == names.end())
      names.push_back(s);
  }
  for (std::size_t k = 0; k < names.size(); ++k) {
    const std::string color = colors[k % 5];
    std::string pts;
    std::ostringstream marks;
    marks.setf(std::ios::fixed);
    marks.precision(2);
    for (const auto& row : agg) {
      if (row["sampler"] != names[k] || !row["acceptance_mean"].is_number()) continue;
      const double a = row["acceptance_mean"].get<double>();
      if (std::isnan(a)) continue;
      const double x = px(row["n"].get<double>()), y = py(a);
      std::ostringstream p;
      p.setf(std::ios::fixed);
      p.precision(2);
      p << x << ',' << y << ' ';
      pts += p.str();
      marks << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"" << color
            << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << pts
       << "\"/>\n"
       << marks.str();
    legend_entry(names[k], color, "");
  }
  auto hline = [&](double a, const std::string& label, const std::string& dash) {
    if (std::isnan(a)) return;
    os << "<line x1=\"" << L << "\" y1=\"" << py(a) << "\" x2=\"" << W - R << "\" y2=\"" << py(a)
       << "\" stroke=\"black\"" << dash << "/>\n";
    legend_entry(label, "black", dash);
  };
  hline(ideal_mh, "ideal MH", " stroke-dasharray=\"8,4\"");
  hline(ideal_barker, "ideal Barker", " stroke-dasharray=\"2,3\"");
  os << "</svg>\n";
  return os.str();
}

}  // namespace pmcmc
