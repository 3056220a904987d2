#include "fairsim/data.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "fairsim/errors.hpp"
#include "text_util.hpp"

namespace fairsim {

double Rng::uniform() {
  // 53-bit mantissa in [0, 1)
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi_v<double> * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::array<std::array<int, 2>, 2> Dataset::cell_counts() const {
  std::array<std::array<int, 2>, 2> counts{};
  for (const SampleRecord& rec : records) {
    counts[static_cast<std::size_t>(rec.group)][static_cast<std::size_t>(rec.effort)] += 1;
  }
  return counts;
}

double Dataset::lambda1_estimate() const {
  if (records.empty()) return 0.5;
  std::size_t n1 = 0;
  for (const SampleRecord& rec : records) n1 += rec.group == 1 ? 1 : 0;
  return static_cast<double>(n1) / static_cast<double>(records.size());
}

std::vector<ScoredObservation> Dataset::observations() const {
  if (!scored) throw ConfigError("dataset is featured; score it first");
  std::vector<ScoredObservation> out;
  out.reserve(records.size());
  for (const SampleRecord& rec : records) {
    out.push_back(ScoredObservation{rec.group, rec.effort, *rec.theta});
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

[[noreturn]] void bad_row(const std::string& path, int line_no, const std::string& why) {
  throw ParseError(path + ":" + std::to_string(line_no) + ": " + why);
}

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_line(line);
  Dataset out;
  if (header.size() < 3 || header[0] != "s" || header[1] != "e") {
    throw ParseError(path + ":1: header must be s,e,theta or s,e,x1..xd");
  }
  if (header.size() == 3 && header[2] == "theta") {
    out.scored = true;
  } else {
    out.scored = false;
    out.feature_dim = static_cast<int>(header.size()) - 2;
    for (int j = 0; j < out.feature_dim; ++j) {
      if (header[static_cast<std::size_t>(j) + 2] != "x" + std::to_string(j + 1)) {
        throw ParseError(path + ":1: feature columns must be named x1..xd");
      }
    }
  }

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size()) bad_row(path, line_no, "wrong number of columns");
    SampleRecord rec;
    if (fields[0] == "0") {
      rec.group = 0;
    } else if (fields[0] == "1") {
      rec.group = 1;
    } else {
      bad_row(path, line_no, "group must be 0 or 1");
    }
    const std::optional<Effort> e =
        fields[1].size() == 1 ? effort_from_code(fields[1][0]) : std::nullopt;
    if (!e.has_value()) bad_row(path, line_no, "effort must be q or u");
    rec.effort = *e;
    try {
      if (out.scored) {
        rec.theta = std::stod(fields[2]);
      } else {
        for (std::size_t j = 2; j < fields.size(); ++j) {
          rec.features.push_back(std::stod(fields[j]));
        }
      }
    } catch (const std::exception&) {
      bad_row(path, line_no, "malformed numeric field");
    }
    out.records.push_back(std::move(rec));
  }
  const auto counts = out.cell_counts();
  for (int s = 0; s < 2; ++s) {
    for (Effort e : {Effort::Unqualified, Effort::Qualified}) {
      if (counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(e)] == 0) {
        out.warnings.push_back(std::string("no records for cell (s=") +
                               static_cast<char>('0' + s) + ", e=" + effort_code(e) + ")");
      }
    }
  }
  return out;
}

std::string dataset_to_csv(const Dataset& dataset) {
  std::ostringstream out;
  if (dataset.scored) {
    out << "s,e,theta\n";
    for (const SampleRecord& rec : dataset.records) {
      out << rec.group << ',' << effort_code(rec.effort) << ',' << fmt_g(*rec.theta) << '\n';
    }
  } else {
    out << "s,e";
    for (int j = 1; j <= dataset.feature_dim; ++j) out << ",x" << j;
    out << '\n';
    for (const SampleRecord& rec : dataset.records) {
      out << rec.group << ',' << effort_code(rec.effort);
      for (double x : rec.features) out << ',' << fmt_g(x);
      out << '\n';
    }
  }
  return out.str();
}

RidgeOutcome ridge_score(const Dataset& dataset, const ScorerSpec& spec) {
  if (dataset.scored) throw ConfigError("ridge_score needs a featured dataset");
  if (spec.penalties.empty()) throw ConfigError("ridge_score needs at least one penalty");
  for (double a : spec.penalties) {
    if (!(a > 0.0)) throw ConfigError("ridge penalties must be positive");
  }
  if (!(spec.train_fraction > 0.0) || !(spec.train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0, 1)");
  }
  const std::size_t n = dataset.records.size();
  const int d = dataset.feature_dim;
  const auto n_train = static_cast<std::size_t>(std::llround(
      spec.train_fraction * static_cast<double>(n)));
  if (n_train < static_cast<std::size_t>(d) + 2 || n_train >= n) {
    throw ConfigError("not enough rows for the requested train fraction");
  }

  // seed-deterministic split (Fisher-Yates on row indices)
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(spec.seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
    std::swap(order[i], order[j]);
  }

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n_train), d);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n_train));
  for (std::size_t i = 0; i < n_train; ++i) {
    const SampleRecord& rec = dataset.records[order[i]];
    for (int j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), j) = rec.features[static_cast<std::size_t>(j)];
    y(static_cast<Eigen::Index>(i)) = rec.effort == Effort::Qualified ? 1.0 : 0.0;
  }

  // leave-one-out error in closed form: e_i / (1 - h_ii)
  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::VectorXd xty = x.transpose() * y;
  double best_penalty = spec.penalties.front();
  double best_err = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_w;
  for (double alpha : spec.penalties) {
    Eigen::MatrixXd reg = xtx;
    for (int j = 0; j < d; ++j) reg(j, j) += alpha;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(reg);
    if (ldlt.info() != Eigen::Success) {
      throw NumericError("ridge system is singular for alpha=" + fmt_g(alpha));
    }
    const Eigen::VectorXd w = ldlt.solve(xty);
    const Eigen::VectorXd resid = y - x * w;
    const Eigen::MatrixXd xa = ldlt.solve(x.transpose());  // (d+1) x n
    double err = 0.0;
    bool ok = true;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double h = x.row(i).dot(xa.col(i));
      const double denom = 1.0 - h;
      if (denom <= 1e-12) {
        ok = false;
        break;
      }
      const double loo = resid(i) / denom;
      err += loo * loo;
    }
    if (!ok) continue;
    err /= static_cast<double>(x.rows());
    if (err < best_err) {
      best_err = err;
      best_penalty = alpha;
      best_w = w;
    }
  }
  if (best_w.size() == 0) throw NumericError("no ridge penalty produced a usable fit");

  RidgeOutcome out;
  out.penalty = best_penalty;
  out.weights.assign(best_w.data(), best_w.data() + d);
  out.train_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.heldout.scored = true;
  for (std::size_t i = n_train; i < n; ++i) {
    const SampleRecord& rec = dataset.records[order[i]];
    double theta = 0.0;
    for (int j = 0; j < d; ++j) theta += rec.features[static_cast<std::size_t>(j)] * out.weights[static_cast<std::size_t>(j)];
    if (!std::isfinite(theta)) throw NumericError("non-finite score produced by the ridge fit");
    SampleRecord scored;
    scored.group = rec.group;
    scored.effort = rec.effort;
    scored.theta = theta;
    out.heldout.records.push_back(std::move(scored));
  }
  return out;
}

std::string scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::GaussianG1: return "gaussian_g1";
    case ScenarioKind::Example1: return "example1";
    case ScenarioKind::Example2: return "example2";
    case ScenarioKind::Custom: return "custom";
  }
  return "?";
}

std::optional<ScenarioKind> scenario_kind_from_name(const std::string& name) {
  if (name == "gaussian_g1") return ScenarioKind::GaussianG1;
  if (name == "example1") return ScenarioKind::Example1;
  if (name == "example2") return ScenarioKind::Example2;
  if (name == "custom") return ScenarioKind::Custom;
  return std::nullopt;
}

namespace {

constexpr auto kQ = static_cast<std::size_t>(Effort::Qualified);
constexpr auto kU = static_cast<std::size_t>(Effort::Unqualified);

GridSpec grid_for(const std::array<std::array<double, 2>, 2>& mean,
                  const std::array<std::array<double, 2>, 2>& sd) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int s = 0; s < 2; ++s) {
    for (std::size_t e : {kU, kQ}) {
      lo = std::min(lo, mean[static_cast<std::size_t>(s)][e] - 6.0 * sd[static_cast<std::size_t>(s)][e]);
      hi = std::max(hi, mean[static_cast<std::size_t>(s)][e] + 6.0 * sd[static_cast<std::size_t>(s)][e]);
    }
  }
  return GridSpec{lo, hi, 2001};
}

}  // namespace

ScenarioSpec ScenarioSpec::gaussian_g1() {
  ScenarioSpec s;
  s.kind = ScenarioKind::GaussianG1;
  s.mean = {{{0.0, 1.0}, {0.0, 1.0}}};  // [group][effort]: u, q
  s.sd = {{{1.0, 1.0}, {1.0, 1.0}}};
  s.params = GameParams{};  // v_q = v_u = omega = 1, cost U[0, 0.2], lambda1 = 0.5
  s.grid = grid_for(s.mean, s.sd);
  return s;
}

ScenarioSpec ScenarioSpec::example1() {
  ScenarioSpec s;
  s.kind = ScenarioKind::Example1;
  s.mean = {{{0.0, 1.0}, {10.0, 11.0}}};
  s.sd = {{{1.0, 1.0}, {1.0, 1.0}}};
  s.params = GameParams{};
  s.params.lambda1 = 0.01;  // a vanishing minority share
  s.grid = grid_for(s.mean, s.sd);
  return s;
}

ScenarioSpec ScenarioSpec::example2() {
  ScenarioSpec s;
  s.kind = ScenarioKind::Example2;
  s.mean = {{{-0.5, 0.5}, {-0.5, 0.5}}};
  s.sd = {{{1.0, 1.0}, {10.0, 10.0}}};
  s.params = GameParams{};
  s.grid = grid_for(s.mean, s.sd);
  return s;
}

ScenarioSpec ScenarioSpec::custom(const std::array<std::array<double, 2>, 2>& mean,
                                  const std::array<std::array<double, 2>, 2>& sd,
                                  const GameParams& params) {
  ScenarioSpec s;
  s.kind = ScenarioKind::Custom;
  s.mean = mean;
  s.sd = sd;
  s.params = params;
  s.grid = grid_for(mean, sd);
  return s;
}

ScenarioSpec ScenarioSpec::from_json(const nlohmann::json& config) {
  const std::string kind_name = config.value("kind", std::string("gaussian_g1"));
  const std::optional<ScenarioKind> kind = scenario_kind_from_name(kind_name);
  if (!kind.has_value()) throw ConfigError("unknown scenario kind: " + kind_name);
  ScenarioSpec s;
  switch (*kind) {
    case ScenarioKind::GaussianG1: s = gaussian_g1(); break;
    case ScenarioKind::Example1: s = example1(); break;
    case ScenarioKind::Example2: s = example2(); break;
    case ScenarioKind::Custom: s = gaussian_g1(); s.kind = ScenarioKind::Custom; break;
  }
  if (!config.contains("params")) return s;
  const nlohmann::json& p = config.at("params");
  for (int g = 0; g < 2; ++g) {
    const std::string gs = std::to_string(g);
    const auto gi = static_cast<std::size_t>(g);
    if (p.contains("mean_q" + gs)) s.mean[gi][kQ] = p.at("mean_q" + gs).get<double>();
    if (p.contains("mean_u" + gs)) s.mean[gi][kU] = p.at("mean_u" + gs).get<double>();
    if (p.contains("sd_q" + gs)) s.sd[gi][kQ] = p.at("sd_q" + gs).get<double>();
    if (p.contains("sd_u" + gs)) s.sd[gi][kU] = p.at("sd_u" + gs).get<double>();
  }
  if (p.contains("lambda1")) s.params.lambda1 = p.at("lambda1").get<double>();
  if (p.contains("v_q")) s.params.v_q = p.at("v_q").get<double>();
  if (p.contains("v_u")) s.params.v_u = p.at("v_u").get<double>();
  if (p.contains("omega")) s.params.omega = p.at("omega").get<double>();
  if (p.contains("cost_lo")) s.params.cost_lo = p.at("cost_lo").get<double>();
  if (p.contains("cost_hi")) s.params.cost_hi = p.at("cost_hi").get<double>();
  s.grid = grid_for(s.mean, s.sd);
  if (p.contains("theta_min")) s.grid.theta_min = p.at("theta_min").get<double>();
  if (p.contains("theta_max")) s.grid.theta_max = p.at("theta_max").get<double>();
  if (p.contains("n_grid")) s.grid.n_grid = p.at("n_grid").get<int>();
  for (const auto& sd_row : s.sd) {
    for (double v : sd_row) {
      if (!(v > 0.0)) throw ConfigError("scenario sds must be positive");
    }
  }
  s.params.validate();
  return s;
}

SignalModel ScenarioSpec::truth_model() const {
  return SignalModel::two_group_gaussian(grid, mean, sd);
}

GeneratedData generate(const ScenarioSpec& scenario, int n_per_cell, std::uint64_t seed) {
  if (n_per_cell < 2) throw ConfigError("generate needs n >= 2 per cell");
  Rng rng(seed);
  Dataset data;
  data.scored = scenario.kind != ScenarioKind::Example2;
  data.feature_dim = data.scored ? 0 : 2;

  for (int s = 0; s < kNumGroups; ++s) {
    for (Effort e : {Effort::Unqualified, Effort::Qualified}) {
      const auto gi = static_cast<std::size_t>(s);
      const auto ei = static_cast<std::size_t>(e);
      for (int i = 0; i < n_per_cell; ++i) {
        const double z = scenario.mean[gi][ei] + scenario.sd[gi][ei] * rng.normal();
        SampleRecord rec;
        rec.group = s;
        rec.effort = e;
        if (data.scored) {
          rec.theta = z;
        } else {
          // group s lives on its own orthogonal basis vector
          rec.features = {s == 0 ? z : 0.0, s == 1 ? z : 0.0};
        }
        data.records.push_back(std::move(rec));
      }
    }
  }
  return GeneratedData{std::move(data), scenario.truth_model(), scenario.params};
}

}  // namespace fairsim
