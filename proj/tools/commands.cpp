#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "hawkes/errors.hpp"
#include "hawkes/laplace.hpp"
#include "hawkes/mc_harness.hpp"
#include "hawkes/moments.hpp"
#include "hawkes/pyramid.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/simulate.hpp"

namespace hawkes::cli {

namespace fs = std::filesystem;
using nlohmann::json;

Artifacts::Artifacts(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

std::ofstream Artifacts::open(const std::string& name) {
  std::ofstream out(dir_ / name, std::ios::binary);
  if (!out) throw Error("cannot write " + (dir_ / name).string());
  files_.push_back(name);
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 14];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0')
        << static_cast<int>(digest[i]);
  }
  return hex.str();
}

void Artifacts::finish() {
  std::vector<std::string> names = files_;
  std::sort(names.begin(), names.end());
  json files = json::array();
  for (const auto& n : names) {
    files.push_back({{"path", n},
                     {"bytes", fs::file_size(dir_ / n)},
                     {"sha256", sha256_file(dir_ / n)}});
  }
  std::ofstream out(dir_ / "manifest.json", std::ios::binary);
  out << json{{"files", files}}.dump(2) << '\n';
}

namespace {

std::ostream& log_of(const RunOptions& o) { return o.log ? *o.log : std::cout; }

bool wants(const ExperimentConfig& c, const std::string& format) {
  const auto& f = c.output.formats;
  return std::find(f.begin(), f.end(), format) != f.end();
}

fs::path output_dir(const ExperimentConfig& c, const RunOptions& o) {
  return o.output_dir.empty() ? fs::path(c.output.directory) : o.output_dir;
}

void require_standard(const ExperimentConfig& c, const char* what) {
  if (c.is_general()) {
    throw ConfigError(std::string(what) + " needs the standard model "
                      "(remove model.general)");
  }
}

std::vector<double> time_grid(double T, double step) {
  std::vector<double> grid;
  const auto n = static_cast<long long>(std::floor(T / step * (1 + 1e-12)));
  for (long long i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) * step);
  if (T - grid.back() > 1e-12 * T) grid.push_back(T);
  return grid;
}

void write_path_csv(std::ostream& out, const OdePath& p, const std::string& prefix,
                    Eigen::Index rows, Eigen::Index cols, Eigen::Index offset) {
  out << "t";
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      out << ',' << prefix << i;
      if (cols > 1) out << '_' << j;
    }
  }
  out << '\n';
  out.precision(17);
  for (std::size_t n = 0; n < p.size(); ++n) {
    out << p.grid[n];
    Eigen::Map<const Matrix> m(p.values[n].data() + offset, rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) out << ',' << m(i, j);
    }
    out << '\n';
  }
}

struct Check {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

Check check_close(std::string name, double value, double reference,
                  double tolerance) {
  return {std::move(name), value, reference, tolerance,
          std::abs(value - reference) <= tolerance};
}

Check check_at_least(std::string name, double value, double bound) {
  return {std::move(name), value, bound, 0.0, value >= bound};
}

std::string theta_label(const std::array<double, 2>& th) {
  std::ostringstream s;
  s << "(" << th[0] << "," << th[1] << ")";
  return s.str();
}

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

int run_simulate(const ExperimentConfig& c, const RunOptions& o) {
  Artifacts art(output_dir(c, o));
  const double T = c.run.T;
  const auto grid = time_grid(T, c.run.grid_step);
  for (std::uint64_t i = 0; i < c.run.sample_paths; ++i) {
    const std::uint64_t seed = derive_seed(c.run.seed, i);
    std::vector<double> lambda;
    if (c.is_general()) {
      const GeneralModel gm = build_general_model(c);
      const GeneralLogs logs = simulate_general(gm, T, seed);
      auto ext = art.open("external_" + std::to_string(i) + ".csv");
      write_event_csv(ext, logs.external);
      auto hk = art.open("hawkes_" + std::to_string(i) + ".csv");
      write_event_csv(hk, logs.hawkes);
      lambda = intensity_path(logs.external, logs.hawkes, gm, grid);
      log_of(o) << "path " << i << ": " << logs.external.size()
                << " external, " << logs.hawkes.size() << " hawkes events\n";
    } else {
      const OdeKernel k = build_kernel(c.model.kernel);
      const EventLog log = simulate_standard(k, c.model.mu, T, seed);
      auto ev = art.open("events_" + std::to_string(i) + ".csv");
      write_event_csv(ev, log);
      auto pyr = art.open("pyramid_" + std::to_string(i) + ".csv");
      write_pyramid_csv(pyr, pyramid_at(log, T));
      lambda = intensity_path(log, k, c.model.mu, grid);
      log_of(o) << "path " << i << ": " << log.size() << " events\n";
    }
    auto out = art.open("intensity_" + std::to_string(i) + ".csv");
    out << "t,lambda\n";
    out.precision(17);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      out << grid[j] << ',' << lambda[j] << '\n';
    }
  }
  art.finish();
  return kOk;
}

int run_moments(const ExperimentConfig& c, const RunOptions& o) {
  require_standard(c, "moments");
  const OdeKernel k = build_kernel(c.model.kernel);
  const double mu = c.model.mu;
  std::vector<double> times = c.query.moments_grid;
  if (times.empty()) times.push_back(c.run.T);
  for (double t : times) {
    if (!(t >= 0.0)) throw ConfigError("query.moments_grid: times must be >= 0");
  }
  const double horizon = *std::max_element(times.begin(), times.end());
  const OdePath path = second_moment_ode(k, mu, horizon);
  if (path.blew_up) {
    throw BlowUp("moments: second-moment system blew up", path.blowup_time);
  }
  const Eigen::Index d = path.rows;

  Artifacts art(output_dir(c, o));
  {
    auto out = art.open("mean_path.csv");
    write_path_csv(out, path, "u", d, 1, d * d);
  }
  {
    auto out = art.open("second_moment_path.csv");
    write_path_csv(out, path, "v", d, d, 0);
  }

  const auto& kf = c.model.kernel;
  const bool exp_form = kf.family == "exponential" && kf.scale == 1.0;
  const bool delayed_form = kf.family == "delayed" && kf.scale == 1.0;

  struct Row {
    std::string quantity;
    double t;
    double ode;
    std::optional<double> closed;
  };
  std::vector<Row> rows;
  for (double t : times) {
    const Vector y = path.at(t);
    const Eigen::Map<const Matrix> raw(y.data(), d, d);
    const Vector u = y.tail(d);
    const double var_n = raw(0, 0) - u[0] * u[0];
    const double var_l = raw(1, 1) - u[1] * u[1];
    std::optional<double> cn, cv, cl;
    if (exp_form) {
      cn = closed_form_mean_exp(kf.params[0], mu, t);
      cv = closed_form_var_exp(kf.params[0], mu, t);
    }
    if (delayed_form) {
      cn = closed_form_mean_delayed(kf.params[0], kf.params[1], mu, t);
      if (kf.params[0] == kf.params[1]) {
        cl = closed_form_var_intensity_critical(kf.params[1], mu, t);
      }
    }
    rows.push_back({"E[N_t]", t, u[0], cn});
    rows.push_back({"Var(N_t)", t, var_n, cv});
    rows.push_back({"E[lambda_t]", t, mu + u[1], std::nullopt});
    rows.push_back({"Var(lambda_t)", t, var_l, cl});
  }

  if (wants(c, "csv")) {
    auto out = art.open("moments_table.csv");
    out << "quantity,t,ode,closed_form,abs_diff\n";
    out.precision(17);
    for (const auto& r : rows) {
      out << r.quantity << ',' << r.t << ',' << r.ode << ',';
      if (r.closed) out << *r.closed << ',' << std::abs(r.ode - *r.closed);
      else out << ',';
      out << '\n';
    }
  }
  if (wants(c, "json")) {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"quantity", r.quantity},
                     {"t", r.t},
                     {"ode", r.ode},
                     {"closed_form", r.closed ? json(*r.closed) : json()}});
    }
    auto out = art.open("moments_table.json");
    out << arr.dump(2) << '\n';
  }
  for (const auto& r : rows) {
    std::ostringstream t;
    t << r.t;
    std::string name = r.quantity;
    name.replace(name.find("_t"), 2, "_" + t.str());
    log_of(o) << name << " = " << fixed6(r.ode);
    if (r.closed) log_of(o) << "  (closed form " << fixed6(*r.closed) << ")";
    log_of(o) << '\n';
  }
  art.finish();
  return kOk;
}

namespace {

std::vector<std::array<double, 2>> laplace_queries(const ExperimentConfig& c) {
  if (!c.query.laplace.empty()) return c.query.laplace;
  return {{-0.5, -0.2}};
}

std::vector<GeneralQuery> general_queries(const ExperimentConfig& c) {
  if (!c.query.general_laplace.empty()) return c.query.general_laplace;
  GeneralQuery q;
  q.count = -0.3;
  return {q};
}

Matrix fill(const std::vector<std::vector<double>>& rows, Eigen::Index r,
            Eigen::Index cols, const char* what) {
  Matrix m = Matrix::Zero(r, cols);
  if (rows.empty()) return m;
  if (static_cast<Eigen::Index>(rows.size()) != r) {
    throw ConfigError(std::string("query.general_laplace.") + what +
                      ": wrong number of rows");
  }
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError(std::string("query.general_laplace.") + what +
                        ": wrong number of columns");
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
  }
  return m;
}

std::pair<Matrix, Matrix> general_exponents(const GeneralModel& gm,
                                            const GeneralQuery& q) {
  Matrix U = fill(q.u, gm.external.order() + 1,
                  gm.external.time_factor.order() + 1, "u");
  Matrix V = fill(q.v, gm.self.order() + 1, gm.self.time_factor.order() + 1, "v");
  V(0, 0) += q.count;
  return {U, V};
}

std::string general_label(const GeneralQuery& q) {
  std::ostringstream s;
  s << "general(count=" << q.count << (q.u.empty() ? "" : ",u") <<
      (q.v.empty() ? "" : ",v") << ")";
  return s.str();
}

LaplaceResult result_of(const std::string& query, const RiccatiPath& p,
                        double value) {
  LaplaceResult r;
  r.query = query;
  r.value = value;
  r.blowup_flag = p.blew_up();
  r.step = p.path.step;
  r.nodes = p.path.size();
  r.richardson_gap = p.richardson_gap;
  r.blowup_time = p.blowup_time();
  return r;
}

}  // namespace

int run_laplace(const ExperimentConfig& c, const RunOptions& o) {
  Artifacts art(output_dir(c, o));
  const double T = c.run.T;
  std::vector<LaplaceResult> results;
  bool blew_up = false;
  if (c.is_general()) {
    const GeneralModel gm = build_general_model(c);
    const auto queries = general_queries(c);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto [U, V] = general_exponents(gm, queries[i]);
      const RiccatiPath p = solve_matrix_riccati(gm, U, V, T);
      const double value = p.blew_up() ? std::nan("") : std::exp(p.accumulated());
      results.push_back(result_of(general_label(queries[i]), p, value));
      blew_up |= p.blew_up();
      auto out = art.open("riccati_general_" + std::to_string(i) + ".csv");
      write_riccati_csv(out, p);
    }
  } else {
    const OdeKernel k = build_kernel(c.model.kernel);
    const double mu = c.model.mu;
    const auto queries = laplace_queries(c);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto& th = queries[i];
      Vector v = Vector::Zero(k.order() + 1);
      v[0] = th[0];
      v[1] = th[1];
      const RiccatiPath p = solve_A_ode(k, v, T);
      const double vec_value =
          p.blew_up() ? std::nan("")
                      : std::exp(th[1] * mu) * std::exp(mu * p.accumulated());
      results.push_back(result_of("vector_A" + theta_label(th), p, vec_value));
      blew_up |= p.blew_up();
      auto out = art.open("riccati_" + std::to_string(i) + ".csv");
      write_riccati_csv(out, p);

      const OdePath g = solve_G_ode(k, th[0], th[1], T);
      LaplaceResult gr;
      gr.query = "scalar_G" + theta_label(th);
      gr.blowup_flag = g.blew_up;
      gr.step = g.step;
      gr.nodes = g.size();
      gr.blowup_time = g.blowup_time;
      gr.value = g.blew_up ? std::nan("")
                           : joint_laplace_N_lambda(k, mu, th[0], th[1], T);
      blew_up |= g.blew_up;
      results.push_back(gr);
    }
  }
  if (wants(c, "json")) {
    auto out = art.open("laplace.json");
    write_laplace_json(out, results);
  }
  for (const auto& r : results) {
    log_of(o) << r.query << " = ";
    if (r.blowup_flag) log_of(o) << "blow-up near t = " << r.blowup_time << '\n';
    else log_of(o) << std::setprecision(12) << r.value << '\n';
  }
  art.finish();
  return blew_up ? kBlowUp : kOk;
}

namespace {

double uniform_cdf(double x) { return std::clamp(x, 0.0, 1.0); }

struct Suite {
  std::vector<McReport> mc;
  std::vector<Check> checks;

  bool all_pass() const {
    return std::all_of(mc.begin(), mc.end(), [](auto& r) { return r.pass; }) &&
           std::all_of(checks.begin(), checks.end(), [](auto& r) { return r.pass; });
  }
};

constexpr std::size_t kKsPaths = 2000;
constexpr std::size_t kStructuralPaths = 200;

void validate_standard(const ExperimentConfig& c, unsigned threads, Suite& s) {
  const OdeKernel k = build_kernel(c.model.kernel);
  const double mu = c.model.mu;
  const double T = c.run.T;
  const std::uint64_t seed = c.run.seed;

  const OdePath sm = second_moment_ode(k, mu, T);
  if (sm.blew_up) throw BlowUp("validate: moment system blew up", sm.blowup_time);
  const SecondMoment m = second_moment_at(sm, sm.size() - 1);
  const double u1 = m.mean[1];

  std::vector<Statistic> stats(4);
  stats[0].kind = StatisticKind::Count;
  stats[1].kind = StatisticKind::Intensity;
  stats[2].kind = StatisticKind::CountSquared;
  stats[3].kind = StatisticKind::IntensitySquared;
  std::vector<double> analytic{m.mean[0], mu + u1, m.raw(0, 0),
                               mu * mu + 2 * mu * u1 + m.raw(1, 1)};

  const auto queries = laplace_queries(c);
  std::vector<Vector> thetas;
  for (const auto& th : queries) {
    Vector v = Vector::Zero(k.order() + 1);
    v[0] = th[0];
    v[1] = th[1];
    thetas.push_back(v);
    const double lx = laplace_X(k, mu, v, T);
    const double joint = joint_laplace_N_lambda(k, mu, th[0], th[1], T);
    s.checks.push_back(check_close("vector_A vs scalar_G " + theta_label(th),
                                   std::exp(th[1] * mu) * lx, joint, 1e-7));
    Statistic st;
    st.kind = StatisticKind::ExpTheta;
    st.theta = v;
    st.name = "exp(theta.X_T) " + theta_label(th);
    stats.push_back(st);
    analytic.push_back(lx);
  }

  const auto inputs = estimate(k, mu, stats, T, c.run.n_paths, seed, threads);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    s.mc.push_back(compare(analytic[i], inputs[i]));
  }

  const RiccatiPath A = solve_A_ode(k, thetas.front(), T);
  if (A.blew_up()) throw BlowUp("validate: Riccati path blew up", A.blowup_time());
  std::vector<Statistic> mart(2);
  for (int i = 0; i < 2; ++i) {
    mart[i].kind = StatisticKind::Martingale15;
    mart[i].path = &A;
    mart[i].at = i == 0 ? 0.5 * T : T;
    mart[i].name = i == 0 ? "martingale_15(T/2)" : "martingale_15(T)";
  }
  const auto mi = estimate(k, mu, mart, T, c.run.martingale_paths,
                           derive_seed(seed, 1), threads);
  for (const auto& x : mi) s.mc.push_back(compare(1.0, x));

  const std::uint64_t aux = derive_seed(seed, 2);
  std::vector<double> pooled;
  double worst_gap = 0.0;
  bool counts_ok = true;
  bool generations_ok = true;
  for (std::size_t i = 0; i < kKsPaths; ++i) {
    const std::uint64_t ps = derive_seed(aux, i);
    const EventLog log = simulate_standard(k, mu, T, ps);
    const auto r = rescaled_uniforms(log, k, mu);
    pooled.insert(pooled.end(), r.begin(), r.end());
    if (i < kStructuralPaths) {
      const Vector direct = markov_state_direct(log, k, T);
      const Vector prop = markov_state_at(log, k, T).X;
      worst_gap = std::max(worst_gap, relative_gap(direct, prop));
      counts_ok &= pyramid_at(log, T).size() == log.size() &&
                   static_cast<double>(log.size()) == prop[0];
      const EventLog gen = simulate_generations(k, mu, T, ps, 1000);
      std::size_t total = 0;
      for (int g = 0; g <= 1001; ++g) {
        total += static_cast<std::size_t>(std::count_if(
            gen.events.begin(), gen.events.end(),
            [g](const EventRecord& e) { return e.gen == g; }));
      }
      generations_ok &= gen.times() == log.times() && total == log.size();
    }
  }
  const double d = ks_statistic(pooled, uniform_cdf);
  s.checks.push_back(
      check_at_least("time-rescaling KS p-value", kolmogorov_pvalue(d, pooled.size()), 0.01));
  s.checks.push_back(check_close("direct vs propagated Markov state", worst_gap, 0.0, 1e-8));
  s.checks.push_back(check_close("N_T = <Z_T, 1>", counts_ok ? 0.0 : 1.0, 0.0, 0.0));
  s.checks.push_back(
      check_close("generations partition N_T", generations_ok ? 0.0 : 1.0, 0.0, 0.0));
}

void validate_general(const ExperimentConfig& c, unsigned threads, Suite& s) {
  const GeneralModel gm = build_general_model(c);
  const double T = c.run.T;
  const std::uint64_t seed = c.run.seed;
  const auto queries = general_queries(c);

  std::vector<Statistic> stats(1);
  stats[0].kind = StatisticKind::Count;
  stats[0].name = "N2_T";
  {
    const Eigen::Index r2 = gm.self.order() + 1;
    const Eigen::Index c2 = gm.self.time_factor.order() + 1;
    const Matrix U = Matrix::Zero(gm.external.order() + 1,
                                  gm.external.time_factor.order() + 1);
    const double h = 1e-4;
    Matrix V = Matrix::Zero(r2, c2);
    V(0, 0) = h;
    const double up = std::log(laplace_general(gm, U, V, T));
    V(0, 0) = -h;
    const double down = std::log(laplace_general(gm, U, V, T));
    std::vector<double> analytic{(up - down) / (2 * h)};

    std::vector<std::pair<Matrix, Matrix>> exps;
    for (const auto& q : queries) {
      const auto e = general_exponents(gm, q);
      exps.push_back(e);
      Statistic st;
      st.kind = StatisticKind::ExpTheta;
      st.U = e.first;
      st.V = e.second;
      st.name = general_label(q);
      stats.push_back(st);
      analytic.push_back(laplace_general(gm, e.first, e.second, T));
    }
    const auto inputs = estimate_general(gm, stats, T, c.run.n_paths, seed, threads);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      s.mc.push_back(compare(analytic[i], inputs[i]));
    }

    const RiccatiPath B =
        solve_matrix_riccati(gm, exps.front().first, exps.front().second, T);
    if (B.blew_up()) throw BlowUp("validate: Riccati path blew up", B.blowup_time());
    std::vector<Statistic> mart(2);
    for (int i = 0; i < 2; ++i) {
      mart[i].kind = StatisticKind::Martingale39;
      mart[i].path = &B;
      mart[i].at = i == 0 ? 0.5 * T : T;
      mart[i].name = i == 0 ? "martingale_39(T/2)" : "martingale_39(T)";
    }
    const auto mi = estimate_general(gm, mart, T, c.run.martingale_paths,
                                     derive_seed(seed, 1), threads);
    for (const auto& x : mi) s.mc.push_back(compare(1.0, x));
  }

  const std::uint64_t aux = derive_seed(seed, 2);
  std::vector<double> pooled;
  double worst_gap = 0.0;
  for (std::size_t i = 0; i < kKsPaths; ++i) {
    const GeneralLogs logs = simulate_general(gm, T, derive_seed(aux, i));
    const auto r = rescaled_uniforms(logs.external, logs.hawkes, gm);
    pooled.insert(pooled.end(), r.begin(), r.end());
    if (i < kStructuralPaths) {
      const MatrixState a = matrix_state_direct(logs.external, logs.hawkes, gm, T);
      const MatrixState b = matrix_state_propagated(logs.external, logs.hawkes, gm, T);
      worst_gap = std::max({worst_gap, relative_gap(a.M1, b.M1),
                            relative_gap(a.M2, b.M2)});
    }
  }
  const double d = ks_statistic(pooled, uniform_cdf);
  s.checks.push_back(
      check_at_least("time-rescaling KS p-value", kolmogorov_pvalue(d, pooled.size()), 0.01));
  s.checks.push_back(check_close("direct vs propagated matrix state", worst_gap, 0.0, 1e-8));
}

void write_checks(Artifacts& art, const ExperimentConfig& c,
                  const std::vector<Check>& checks) {
  if (wants(c, "json")) {
    json arr = json::array();
    for (const auto& k : checks) {
      arr.push_back({{"check", k.name},
                     {"value", k.value},
                     {"reference", k.reference},
                     {"tolerance", k.tolerance},
                     {"pass", k.pass}});
    }
    auto out = art.open("checks.json");
    out << arr.dump(2) << '\n';
  }
  if (wants(c, "csv")) {
    auto out = art.open("checks.csv");
    out << "check,value,reference,tolerance,pass\n";
    out.precision(17);
    for (const auto& k : checks) {
      out << '"' << k.name << "\"," << k.value << ',' << k.reference << ','
          << k.tolerance << ',' << (k.pass ? "true" : "false") << '\n';
    }
  }
}

}  // namespace

int run_validate(const ExperimentConfig& c, const RunOptions& o) {
  if (c.run.n_paths < 100 || c.run.martingale_paths < 100) {
    throw ConfigError("validate: run.n_paths and run.martingale_paths must be >= 100");
  }
  Suite s;
  if (c.is_general()) validate_general(c, o.threads, s);
  else validate_standard(c, o.threads, s);

  Artifacts art(output_dir(c, o));
  if (wants(c, "json")) {
    auto out = art.open("mc_report.json");
    write_report_json(out, s.mc);
  }
  if (wants(c, "csv")) {
    auto out = art.open("mc_report.csv");
    write_report_csv(out, s.mc);
  }
  write_checks(art, c, s.checks);
  art.finish();

  auto& log = log_of(o);
  for (const auto& r : s.mc) {
    log << (r.pass ? "PASS " : "FAIL ") << r.quantity << ": analytic "
        << std::setprecision(8) << r.analytic << ", MC " << r.empirical
        << " +- " << r.std_error << " (z = " << std::setprecision(3) << r.z
        << ")\n";
  }
  for (const auto& k : s.checks) {
    log << (k.pass ? "PASS " : "FAIL ") << k.name << ": " << std::setprecision(8)
        << k.value << " (reference " << k.reference << ")\n";
  }
  return s.all_pass() ? kOk : kValidationFailure;
}

int run_powerlaw(const ExperimentConfig& c, const RunOptions& o) {
  require_standard(c, "powerlaw");
  const auto& spec = c.model.kernel;
  if (spec.family != "power_law") {
    throw ConfigError("powerlaw: model.kernel.family must be power_law");
  }
  const OdeKernel k = build_kernel(spec);
  const PowerLawParams p{spec.params[0], spec.params[1], spec.params[2],
                         static_cast<int>(spec.params[3])};
  const auto [w, r] = power_law_modes(p);
  const Vector weights = spec.scale * w;
  const double horizon = k.check_horizon();
  const BranchingRatio br = branching_ratio(k, horizon);

  Artifacts art(output_dir(c, o));
  double worst = 0.0;
  {
    auto out = art.open("kernel_grid.csv");
    out << "a,phi,modes\n";
    out.precision(17);
    const int n = 400;
    for (int i = 0; i <= n; ++i) {
      const double a = horizon * i / n;
      const double phi = k(a);
      const double direct = (weights.array() * (-r.array() * a).exp()).sum();
      worst = std::max(worst, std::abs(phi - direct));
      out << a << ',' << phi << ',' << direct << '\n';
    }
  }
  const auto eig = k.age_eigenvalues();
  json eigen = json::array();
  for (Eigen::Index i = 0; i < eig.size(); ++i) {
    eigen.push_back({eig[i].real(), eig[i].imag()});
  }
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json report = {{"tau0", p.tau0},
                 {"ratio", p.ratio},
                 {"exponent", p.exponent},
                 {"terms", p.terms},
                 {"scale", spec.scale},
                 {"weights", vec(weights)},
                 {"rates", vec(r)},
                 {"c", vec(k.coefficients())},
                 {"m", vec(k.initial_stack())},
                 {"age_eigenvalues", eigen},
                 {"branching_ratio", br.value},
                 {"tail_estimate", br.tail_estimate},
                 {"dominant_exponent", br.dominant_exponent},
                 {"possibly_divergent", br.possibly_divergent},
                 {"check_horizon", horizon},
                 {"max_abs_error_vs_modes", worst}};
  {
    auto out = art.open("powerlaw.json");
    out << report.dump(2) << '\n';
  }
  log_of(o) << "order " << k.order() << ", branching ratio "
            << std::setprecision(10) << br.value << ", max |phi - modes| "
            << worst << '\n';
  art.finish();
  return kOk;
}

int run(const std::string& sub, const ExperimentConfig& c, const RunOptions& o) {
  try {
    if (sub == "simulate") return run_simulate(c, o);
    if (sub == "moments") return run_moments(c, o);
    if (sub == "laplace") return run_laplace(c, o);
    if (sub == "validate") return run_validate(c, o);
    if (sub == "powerlaw") return run_powerlaw(c, o);
    std::cerr << "unknown subcommand '" << sub << "'\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const BlowUp& e) {
    std::cerr << "blow-up: " << e.what() << '\n';
    return kBlowUp;
  } catch (const ExplosionGuard& e) {
    std::cerr << "explosion: " << e.what() << '\n';
    return kBlowUp;
  } catch (const QuadratureFailure& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kBlowUp;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace hawkes::cli
