#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <concepts>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gdcount/gdcount.hpp"

namespace gdcount::cli {
namespace {

using json = nlohmann::ordered_json;

constexpr const char* kVersion = "gdcount 1.0.0";

struct RunConfig {
  std::string subcommand;
  std::vector<double> mu, v, rho;
  std::vector<std::int64_t> x;
  std::vector<double> u;
  bool grid = false;
  std::string which = "both";
  double sigmas = kDefaultSigmas;
  double accuracy = kDefaultMvnAccuracy;
  std::uint64_t seed = kDefaultIntegrationSeed;
  std::size_t n = 1;
  std::string format = "csv";
  std::string output;
  std::string binomial_size = "generalized";

  [[nodiscard]] bool want_exact() const { return which != "approx"; }
  [[nodiscard]] bool want_approx() const { return which != "exact"; }
  [[nodiscard]] BinomialSize rule() const {
    return binomial_size == "floor" ? BinomialSize::kFloor : BinomialSize::kGeneralized;
  }
  [[nodiscard]] MvnOptions mvn() const {
    MvnOptions o;
    o.accuracy = accuracy;
    o.seed = seed;
    return o;
  }
};

// Shortest round-trip representation, independent of the locale.
std::string num(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

template <std::integral T>
std::string num(T v) {
  return std::to_string(v);
}

class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  [[nodiscard]] std::string csv() const {
    std::string s;
    append(s, header_);
    for (const auto& r : rows_) append(s, r);
    return s;
  }

 private:
  static void append(std::string& s, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) s += ',';
      s += fields[i];
    }
    s += '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct Result {
  Table table{{}};
  json grid;  // null when there is no grid
  std::string values_key = "values";
  json values;
  json metadata = json::object();
};

std::vector<std::string> coord_names(std::size_t dim) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= dim; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

json range_json(const GridRange& r) { return {{"lo", r.lo}, {"hi", r.hi}}; }

json grid_json(const GridSpec& g, double sigmas) {
  json ranges = json::array();
  for (const auto& r : g.ranges()) ranges.push_back(range_json(r));
  return {{"sigmas", sigmas}, {"ranges", ranges}, {"points", g.point_count()}};
}

json marginal_json(const GdParams& g) {
  json j{{"mu", g.mean()}, {"v", g.variance()}, {"branch", to_string(g.branch())}};
  if (g.size()) j["m"] = *g.size();
  if (g.prob()) j["p"] = *g.prob();
  return j;
}

json marginals_json(std::span<const GdParams> gs) {
  json j = json::array();
  for (const auto& g : gs) j.push_back(marginal_json(g));
  return j;
}

// ---------------------------------------------------------------------------
// Model construction from flags
// ---------------------------------------------------------------------------

void require_moments(const RunConfig& c) {
  if (c.mu.empty()) throw DimensionError("--mu needs at least one value");
  if (c.mu.size() != c.v.size()) {
    throw DimensionError("--mu has " + std::to_string(c.mu.size()) + " values but --v has " + std::to_string(c.v.size()));
  }
}

GdParams univariate(const RunConfig& c) {
  require_moments(c);
  if (c.mu.size() != 1) throw DimensionError("this command needs a single --mu/--v pair");
  if (!c.rho.empty()) throw DimensionError("--rho needs at least two dimensions");
  return from_moments(c.mu[0], c.v[0], c.rule());
}

GdnParams joint(const RunConfig& c) {
  require_moments(c);
  const std::size_t n = c.mu.size();
  if (n < 2) throw DimensionError("this command needs at least two dimensions");
  CorrelationMatrix rho = c.rho.empty() ? CorrelationMatrix::identity(n) : CorrelationMatrix::from_upper_triangle(n, c.rho);
  return new_gdn(c.mu, c.v, std::move(rho), c.rule());
}

// ---------------------------------------------------------------------------
// Grid evaluation shared by pmf --grid and contour
// ---------------------------------------------------------------------------

struct GridValues {
  GridSpec grid;
  std::optional<ContourData> exact, approx;
  double max_error = 0.0;
};

GridValues evaluate_grid(const GdnParams& p, const RunConfig& c) {
  GridValues out{default_grid(p, c.sigmas), {}, {}, 0.0};
  if (p.dim() == 2) {
    if (c.want_exact()) out.exact = contour_grid(p, out.grid, PmfKind::kExact);
    if (c.want_approx()) out.approx = contour_grid(p, out.grid, PmfKind::kApprox);
    return out;
  }
  check_grid(p, out.grid);
  if (c.want_exact()) {
    ContourData d;
    d.matrix.grid = out.grid;
    const MvnOptions opts = c.mvn();
    out.grid.for_each([&](std::span<const std::int64_t> x) {
      const MvnResult r = exact_pmf(p, x, opts);
      out.max_error = std::max(out.max_error, r.error);
      d.matrix.values.push_back(r.value);
    });
    out.exact = std::move(d);
  }
  if (c.want_approx()) {
    ContourData d;
    d.kind = PmfKind::kApprox;
    d.matrix.grid = out.grid;
    const auto tables = marginal_tables(p);
    out.grid.for_each([&](std::span<const std::int64_t> x) {
      d.matrix.values.push_back(approx_pmf_unnorm(std::span<const GdTable>(tables), p.chol(), x));
    });
    const double total = d.matrix.sum();
    if (!(total > 0.0)) throw ZeroMass("approximate pmf has no mass on the grid");
    d.normalization = 1.0 / total;
    for (double& v : d.matrix.values) v *= d.normalization;
    out.approx = std::move(d);
  }
  return out;
}

void grid_metadata(const GridValues& gv, json& meta, std::ostream& err) {
  if (gv.exact) {
    meta["clamped"] = gv.exact->clamped;
    meta["most_negative"] = gv.exact->most_negative;
    meta["clamp_warning"] = gv.exact->clamp_warning();
    meta["exact_mass"] = gv.exact->matrix.sum();
    if (gv.grid.dim() > 2) meta["max_error"] = gv.max_error;
    if (gv.exact->clamp_warning()) {
      err << "warning: " << gv.exact->clamped << " of " << gv.exact->matrix.values.size()
          << " exact grid values were negative (most negative " << num(gv.exact->most_negative)
          << ") and were clamped to 0\n";
    }
  }
  if (gv.approx) meta["K"] = gv.approx->normalization;
  if (gv.exact && gv.approx) meta["tv_distance"] = total_variation(gv.exact->matrix, gv.approx->matrix);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

Result run_pmf(const RunConfig& c, std::ostream& err) {
  if (c.grid == !c.x.empty()) throw std::invalid_argument("pmf needs exactly one of --x or --grid");
  Result r;
  if (c.mu.size() == 1) {
    const GdParams g = univariate(c);
    std::vector<std::int64_t> xs = c.x;
    if (c.grid) {
      const GridRange range = default_range(g, c.sigmas);
      for (std::int64_t x = range.lo; x <= range.hi; ++x) xs.push_back(x);
      r.grid = {{"sigmas", c.sigmas}, {"ranges", json::array({range_json(range)})}, {"points", xs.size()}};
    }
    r.table = Table({"x", "pmf"});
    r.values = {{"x", json::array()}, {"pmf", json::array()}};
    for (const std::int64_t x : xs) {
      const double p = g.pmf(x);
      r.table.add({num(x), num(p)});
      r.values["x"].push_back(x);
      r.values["pmf"].push_back(p);
    }
    r.metadata["marginals"] = marginals_json(std::span<const GdParams>(&g, 1));
    return r;
  }

  const GdnParams p = joint(c);
  const std::size_t n = p.dim();
  r.metadata["marginals"] = marginals_json(p.marginals());
  std::vector<std::string> header = coord_names(n);

  if (!c.grid) {
    if (c.x.size() != n) {
      throw DimensionError("--x has " + std::to_string(c.x.size()) + " coordinates for a " + std::to_string(n) +
                           "-dimensional distribution");
    }
    if (c.want_exact()) {
      header.emplace_back("exact");
      header.emplace_back("exact_error");
    }
    if (c.want_approx()) header.emplace_back("approx_unnorm");
    r.table = Table(header);
    std::vector<std::string> row;
    for (const std::int64_t x : c.x) row.push_back(num(x));
    r.values = {{"x", c.x}};
    if (c.want_exact()) {
      // The bivariate case uses the deterministic four-term formula.
      const MvnResult e = n == 2 ? MvnResult{exact_pmf2(p, c.x[0], c.x[1]), 0.0, 0} : exact_pmf(p, c.x, c.mvn());
      row.push_back(num(e.value));
      row.push_back(num(e.error));
      r.values["exact"] = e.value;
      r.values["exact_error"] = e.error;
    }
    if (c.want_approx()) {
      const double a = approx_pmf_unnorm(p, c.x);
      row.push_back(num(a));
      r.values["approx_unnorm"] = a;
    }
    r.table.add(std::move(row));
    return r;
  }

  const GridValues gv = evaluate_grid(p, c);
  if (gv.exact) header.emplace_back("exact");
  if (gv.approx) header.emplace_back("approx");
  r.table = Table(header);
  r.grid = grid_json(gv.grid, c.sigmas);
  r.values = json::object();
  if (gv.exact) r.values["exact"] = gv.exact->matrix.values;
  if (gv.approx) r.values["approx"] = gv.approx->matrix.values;
  std::size_t k = 0;
  gv.grid.for_each([&](std::span<const std::int64_t> x) {
    std::vector<std::string> row;
    for (const std::int64_t xi : x) row.push_back(num(xi));
    if (gv.exact) row.push_back(num(gv.exact->matrix.values[k]));
    if (gv.approx) row.push_back(num(gv.approx->matrix.values[k]));
    r.table.add(std::move(row));
    ++k;
  });
  grid_metadata(gv, r.metadata, err);
  return r;
}

Result run_cdf(const RunConfig& c) {
  if (c.x.empty()) throw std::invalid_argument("cdf needs --x");
  Result r;
  if (c.mu.size() == 1) {
    const GdParams g = univariate(c);
    r.table = Table({"x", "cdf"});
    r.values = {{"x", json::array()}, {"cdf", json::array()}};
    for (const std::int64_t x : c.x) {
      const double F = cdf(g, x);
      r.table.add({num(x), num(F)});
      r.values["x"].push_back(x);
      r.values["cdf"].push_back(F);
    }
    r.metadata["marginals"] = marginals_json(std::span<const GdParams>(&g, 1));
    return r;
  }

  const GdnParams p = joint(c);
  const std::size_t n = p.dim();
  if (c.x.size() != n) {
    throw DimensionError("--x has " + std::to_string(c.x.size()) + " coordinates for a " + std::to_string(n) +
                         "-dimensional distribution");
  }
  std::vector<double> upper(n);
  for (std::size_t i = 0; i < n; ++i) {
    const GdParams& g = p.marginal(i);
    upper[i] = normal_score(cdf(g, c.x[i]), sf(g, c.x[i]));
  }
  MvnResult res;
  if (n == 2) {
    res.value = bvn_cdf(upper[0], upper[1], p.rho()(0, 1));
  } else {
    const std::vector<double> lower(n, -kInf);
    res = mvn_rect_prob(lower, upper, p.rho(), c.mvn());
  }
  std::vector<std::string> header = coord_names(n);
  header.emplace_back("cdf");
  header.emplace_back("error");
  r.table = Table(header);
  std::vector<std::string> row;
  for (const std::int64_t x : c.x) row.push_back(num(x));
  row.push_back(num(res.value));
  row.push_back(num(res.error));
  r.table.add(std::move(row));
  r.values = {{"x", c.x}, {"cdf", res.value}, {"error", res.error}};
  r.metadata["marginals"] = marginals_json(p.marginals());
  return r;
}

Result run_quantile(const RunConfig& c) {
  if (c.u.empty()) throw std::invalid_argument("quantile needs --u");
  const GdParams g = univariate(c);
  Result r;
  r.table = Table({"u", "x"});
  r.values = {{"u", json::array()}, {"x", json::array()}};
  for (const double u : c.u) {
    const std::int64_t x = quantile(g, u);
    r.table.add({num(u), num(x)});
    r.values["u"].push_back(u);
    r.values["x"].push_back(x);
  }
  r.metadata["marginals"] = marginals_json(std::span<const GdParams>(&g, 1));
  return r;
}

Result run_sample(const RunConfig& c) {
  Result r;
  std::mt19937_64 eng(c.seed);
  r.values = json::array();
  if (c.mu.size() == 1) {
    const GdParams g = univariate(c);
    const GdSampler sampler(g);
    r.table = Table({"x"});
    for (std::size_t i = 0; i < c.n; ++i) {
      const std::int64_t x = sampler(eng);
      r.table.add({num(x)});
      r.values.push_back(x);
    }
    r.metadata["marginals"] = marginals_json(std::span<const GdParams>(&g, 1));
    return r;
  }
  const GdnParams p = joint(c);
  const GdnSampler sampler(p);
  r.table = Table(coord_names(p.dim()));
  for (std::size_t i = 0; i < c.n; ++i) {
    const std::vector<std::int64_t> x = sampler(eng);
    std::vector<std::string> row;
    for (const std::int64_t xi : x) row.push_back(num(xi));
    r.table.add(std::move(row));
    r.values.push_back(x);
  }
  r.metadata["marginals"] = marginals_json(p.marginals());
  return r;
}

std::vector<std::string> table1_fields(const Table1Values& t) {
  return {num(t.rho_prime), num(t.k), num(t.mu1s), num(t.v1s), num(t.mu2s), num(t.v2s), num(t.rhos)};
}

json table1_json(const Table1Values& t) {
  return {{"rho_prime", t.rho_prime}, {"K", t.k},     {"mu1s", t.mu1s}, {"v1s", t.v1s},
          {"mu2s", t.mu2s},           {"v2s", t.v2s}, {"rhos", t.rhos}};
}

Result run_table1(const RunConfig& c, std::ostream& err) {
  Table1Options opts;
  opts.sigmas = c.sigmas;
  opts.rule = c.rule();
  const auto rows = reproduce_table1(opts);

  std::vector<std::string> header{"case", "mu1", "v1", "mu2", "v2", "rho", "rho_prime", "K", "mu1s", "v1s", "mu2s", "v2s", "rhos"};
  for (const char* prefix : {"ref_", "dev_"})
    for (const char* col : {"rho_prime", "K", "mu1s", "v1s", "mu2s", "v2s", "rhos"}) header.push_back(std::string(prefix) + col);
  for (const char* col : {"exact_mass", "tv_distance", "argmax_match", "clamped"}) header.emplace_back(col);

  Result r;
  r.table = Table(header);
  r.values_key = "rows";
  r.values = json::array();
  r.grid = {{"sigmas", c.sigmas}, {"cases", json::object()}};
  for (const auto& row : rows) {
    const auto& in = row.input;
    std::vector<std::string> f{in.label, num(in.mu1), num(in.v1), num(in.mu2), num(in.v2), num(in.rho)};
    for (const auto& part : {row.computed, in.reference, row.deviation}) {
      const auto cells = table1_fields(part);
      f.insert(f.end(), cells.begin(), cells.end());
    }
    f.push_back(num(row.exact_mass));
    f.push_back(num(row.tv_distance));
    f.emplace_back(row.argmax_match ? "true" : "false");
    f.push_back(num(row.clamped));
    r.table.add(std::move(f));

    json ranges = json::array();
    for (const auto& g : row.grid.ranges()) ranges.push_back(range_json(g));
    r.grid["cases"][in.label] = ranges;
    r.values.push_back({{"case", in.label},
                        {"input", {{"mu1", in.mu1}, {"v1", in.v1}, {"mu2", in.mu2}, {"v2", in.v2}, {"rho", in.rho}}},
                        {"computed", table1_json(row.computed)},
                        {"reference", table1_json(in.reference)},
                        {"deviation", table1_json(row.deviation)},
                        {"exact_mass", row.exact_mass},
                        {"tv_distance", row.tv_distance},
                        {"argmax_match", row.argmax_match},
                        {"clamped", row.clamped}});
    if (row.clamped * 1000 > row.grid.point_count()) {
      err << "warning: case " << in.label << ": " << row.clamped << " of " << row.grid.point_count()
          << " exact grid values were negative and were clamped to 0\n";
    }
  }
  return r;
}

Result run_contour(const RunConfig& c, std::ostream& err) {
  const GdnParams p = joint(c);
  if (p.dim() != 2) throw DimensionError("contour needs exactly two dimensions");
  const GridValues gv = evaluate_grid(p, c);
  std::vector<std::string> header{"x1", "x2"};
  if (gv.exact) header.emplace_back("exact");
  if (gv.approx) header.emplace_back("approx");

  Result r;
  r.table = Table(header);
  r.grid = grid_json(gv.grid, c.sigmas);
  r.values = json::object();
  const GridRange r0 = gv.grid[0];
  const GridRange r1 = gv.grid[1];
  auto matrix = [&](const ContourData& d) {
    json m = json::array();
    std::size_t k = 0;
    for (std::int64_t a = r0.lo; a <= r0.hi; ++a) {
      json row = json::array();
      for (std::int64_t b = r1.lo; b <= r1.hi; ++b) row.push_back(d.matrix.values[k++]);
      m.push_back(std::move(row));
    }
    return m;
  };
  if (gv.exact) r.values["exact"] = matrix(*gv.exact);
  if (gv.approx) r.values["approx"] = matrix(*gv.approx);
  std::size_t k = 0;
  gv.grid.for_each([&](std::span<const std::int64_t> x) {
    std::vector<std::string> row{num(x[0]), num(x[1])};
    if (gv.exact) row.push_back(num(gv.exact->matrix.values[k]));
    if (gv.approx) row.push_back(num(gv.approx->matrix.values[k]));
    r.table.add(std::move(row));
    ++k;
  });
  r.metadata["marginals"] = marginals_json(p.marginals());
  grid_metadata(gv, r.metadata, err);
  if (gv.exact && gv.approx) {
    r.metadata["argmax_match"] = argmax_index(gv.exact->matrix) == argmax_index(gv.approx->matrix);
  }
  return r;
}

json config_json(const RunConfig& c) {
  json j{{"subcommand", c.subcommand}};
  if (c.subcommand != "table1") {
    j["mu"] = c.mu;
    j["v"] = c.v;
    j["rho"] = c.rho;
  }
  if (!c.x.empty()) j["x"] = c.x;
  if (!c.u.empty()) j["u"] = c.u;
  if (c.subcommand == "pmf") j["grid"] = c.grid;
  if (c.subcommand == "pmf" || c.subcommand == "contour") j["which"] = c.which;
  if (c.subcommand == "sample") j["n"] = c.n;
  j["sigmas"] = c.sigmas;
  j["accuracy"] = c.accuracy;
  j["seed"] = c.seed;
  j["binomial_size"] = c.binomial_size;
  j["format"] = c.format;
  return j;
}

json base_metadata() {
  return {{"version", kVersion},
          {"defaults",
           {{"sigmas", kDefaultSigmas},
            {"accuracy", kDefaultMvnAccuracy},
            {"seed", kDefaultIntegrationSeed},
            {"binomial_size", "generalized"},
            {"format", "csv"}}}};
}

std::string render(const RunConfig& c, const Result& r) {
  if (c.format == "csv") return r.table.csv();
  json meta = base_metadata();
  for (const auto& [key, value] : r.metadata.items()) meta[key] = value;
  const json doc{{"config", config_json(c)}, {"grid", r.grid}, {r.values_key, r.values}, {"metadata", meta}};
  return doc.dump(2) + "\n";
}

Result dispatch(const RunConfig& c, std::ostream& err) {
  if (c.subcommand == "pmf") return run_pmf(c, err);
  if (c.subcommand == "cdf") return run_cdf(c);
  if (c.subcommand == "quantile") return run_quantile(c);
  if (c.subcommand == "sample") return run_sample(c);
  if (c.subcommand == "table1") return run_table1(c, err);
  return run_contour(c, err);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Generic Discrete count distributions and their normal-copula extension", "gdcount"};
  app.require_subcommand(1);

  auto model = [&](CLI::App* s) {
    s->add_option("--mu", cfg.mu, "Marginal means, comma separated")->required()->delimiter(',');
    s->add_option("--v", cfg.v, "Marginal variances, comma separated")->required()->delimiter(',');
    s->add_option("--rho", cfg.rho, "Correlation: one value for two dimensions, else the upper triangle row-major")
        ->delimiter(',');
    s->add_option("--binomial-size", cfg.binomial_size, "Non-integer Binomial size rule")
        ->check(CLI::IsMember({"generalized", "floor"}))
        ->capture_default_str();
  };
  auto output = [&](CLI::App* s) {
    s->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    s->add_option("--output,-o", cfg.output, "Write to this file instead of standard output");
  };
  auto sigmas = [&](CLI::App* s) {
    s->add_option("--sigmas", cfg.sigmas, "Grid half-width in standard deviations")->capture_default_str();
  };
  auto integration = [&](CLI::App* s) {
    s->add_option("--accuracy", cfg.accuracy, "Target error of the QMC rectangle probability")->capture_default_str();
    s->add_option("--seed", cfg.seed, "Seed for lattice shifts and sampling")->capture_default_str();
  };
  auto which = [&](CLI::App* s) {
    s->add_option("--which", cfg.which, "Which pmf to evaluate")
        ->check(CLI::IsMember({"exact", "approx", "both"}))
        ->capture_default_str();
  };

  CLI::App* pmf = app.add_subcommand("pmf", "Exact and/or approximate pmf at a point or over the default grid");
  model(pmf);
  pmf->add_option("--x", cfg.x, "Point (one value per dimension); a list of points in one dimension")->delimiter(',');
  pmf->add_flag("--grid", cfg.grid, "Evaluate over the default grid");
  which(pmf);
  sigmas(pmf);
  integration(pmf);
  output(pmf);

  CLI::App* cdf_cmd = app.add_subcommand("cdf", "Joint cdf P(X <= x)");
  model(cdf_cmd);
  cdf_cmd->add_option("--x", cfg.x, "Point (one value per dimension); a list of points in one dimension")
      ->required()
      ->delimiter(',');
  integration(cdf_cmd);
  output(cdf_cmd);

  CLI::App* quant = app.add_subcommand("quantile", "Univariate quantiles");
  model(quant);
  quant->add_option("--u", cfg.u, "Probabilities in (0, 1), comma separated")->required()->delimiter(',');
  output(quant);

  CLI::App* samp = app.add_subcommand("sample", "Seeded draws");
  model(samp);
  samp->add_option("--n", cfg.n, "Number of draws")->capture_default_str();
  samp->add_option("--seed", cfg.seed, "Seed for the mt19937_64 engine")->capture_default_str();
  output(samp);

  CLI::App* t1 = app.add_subcommand("table1", "Reproduce the four reference cases with deviations");
  t1->add_option("--binomial-size", cfg.binomial_size, "Non-integer Binomial size rule")
      ->check(CLI::IsMember({"generalized", "floor"}))
      ->capture_default_str();
  sigmas(t1);
  output(t1);

  CLI::App* contour = app.add_subcommand("contour", "Exact and approximate pmf matrices over the default grid");
  model(contour);
  which(contour);
  sigmas(contour);
  output(contour);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success&) {
    const auto selected = app.get_subcommands();
    out << (selected.empty() ? app.help() : selected.front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    const auto selected = app.get_subcommands();
    err << "error: " << e.what() << "\n\n" << (selected.empty() ? app.help() : selected.front()->help());
    return 1;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();

  try {
    const std::string text = render(cfg, dispatch(cfg, err));
    if (cfg.output.empty()) {
      out << text;
    } else {
      std::ofstream file(cfg.output, std::ios::binary);
      if (!file) throw std::invalid_argument("cannot open " + cfg.output + " for writing");
      file << text;
      if (!file.flush()) throw std::invalid_argument("failed writing " + cfg.output);
    }
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace gdcount::cli
