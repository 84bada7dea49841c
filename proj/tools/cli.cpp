#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "spcl/csv.hpp"
#include "spcl/curriculum.hpp"
#include "spcl/error.hpp"
#include "spcl/regularizer.hpp"
#include "spcl/sampled_function.hpp"
#include "spcl/trainer.hpp"

namespace spcl::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

Error input_error(const std::string& what) { return Error(ErrorCode::kBadParam, what); }

json number(double x) { return std::isfinite(x) ? json(x) : json(csv::format_number(x)); }

json numbers(const std::vector<double>& xs) {
  json out = json::array();
  for (double x : xs) out.push_back(number(x));
  return out;
}

// ------------------------------------------------------------ parameters

// A named parameter settable from the config file and from a flag; the flag
// wins when both are present.
class Params {
 public:
  explicit Params(CLI::App* app) : app_(app) {}

  void add(const std::string& name, double& field, const std::string& help) {
    add_valued(name, help, [&field](const json& j) { field = as_double(j); },
               [&field](const std::string& s) { field = csv::parse_number(s, 0); },
               [&field] { return number(field); });
  }
  void add(const std::string& name, std::size_t& field, const std::string& help) {
    add_valued(name, help, [&field](const json& j) { field = as_count(j); },
               [&field](const std::string& s) { field = parse_count(s); }, [&field] { return json(field); });
  }
  void add(const std::string& name, std::uint64_t& field, const std::string& help, bool) {
    add_valued(name, help, [&field](const json& j) { field = as_count(j); },
               [&field](const std::string& s) { field = parse_count(s); }, [&field] { return json(field); });
  }
  void add(const std::string& name, std::string& field, const std::string& help) {
    add_valued(name, help,
               [&field, name](const json& j) {
                 if (!j.is_string()) throw input_error("config key '" + name + "' must be a string");
                 field = j.get<std::string>();
               },
               [&field](const std::string& s) { field = s; }, [&field] { return json(field); });
  }
  void add(const std::string& name, std::vector<double>& field, const std::string& help) {
    add_valued(name, help,
               [&field, name](const json& j) {
                 if (j.is_string()) {
                   field = parse_list(j.get<std::string>());
                   return;
                 }
                 if (!j.is_array()) throw input_error("config key '" + name + "' must be a list of numbers");
                 field.clear();
                 for (const auto& x : j) field.push_back(as_double(x));
               },
               [&field](const std::string& s) { field = parse_list(s); }, [&field] { return numbers(field); });
  }
  /// A JSON-valued parameter; the flag takes inline JSON or a path to a JSON file.
  void add_json(const std::string& name, json& field, const std::string& help) {
    add_valued(name, help, [&field](const json& j) { field = j; },
               [&field](const std::string& s) { field = parse_json_arg(s); }, [&field] { return field; });
  }
  void add_flag(const std::string& name, bool& field, const std::string& help) {
    auto entry = std::make_shared<Entry>();
    entry->option = app_->add_flag("--" + name, entry->flag, help);
    entry->from_json = [&field, name](const json& j) {
      if (!j.is_boolean()) throw input_error("config key '" + name + "' must be a boolean");
      field = j.get<bool>();
    };
    entry->from_flag = [&field, entry] { field = entry->flag; };
    entry->to_json = [&field] { return json(field); };
    entries_[name] = entry;
  }

  bool known(const std::string& key) const { return entries_.count(key) != 0; }

  void apply_config(const json& config) {
    for (const auto& [key, value] : config.items()) {
      auto it = entries_.find(key);
      if (it != entries_.end()) it->second->from_json(value);
    }
  }

  void apply_flags() {
    for (auto& [name, entry] : entries_) {
      if (entry->option->count() > 0) entry->from_flag();
    }
  }

  json effective() const {
    json out = json::object();
    for (const auto& [name, entry] : entries_) out[name] = entry->to_json();
    return out;
  }

 private:
  struct Entry {
    CLI::Option* option = nullptr;
    std::string text;
    bool flag = false;
    std::function<void(const json&)> from_json;
    std::function<void()> from_flag;
    std::function<json()> to_json;
  };

  void add_valued(const std::string& name, const std::string& help, std::function<void(const json&)> from_json,
                  std::function<void(const std::string&)> from_text, std::function<json()> to_json) {
    auto entry = std::make_shared<Entry>();
    entry->option = app_->add_option("--" + name, entry->text, help);
    entry->from_json = [from_json, name](const json& j) {
      try {
        from_json(j);
      } catch (const json::exception& e) {
        throw input_error("config key '" + name + "': " + e.what());
      }
    };
    entry->from_flag = [entry, from_text, name] {
      try {
        from_text(entry->text);
      } catch (const Error& e) {
        throw input_error("--" + name + ": " + e.what());
      }
    };
    entry->to_json = std::move(to_json);
    entries_[name] = entry;
  }

  static double as_double(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return csv::parse_number(j.get<std::string>(), 0);
    throw input_error("expected a number, got " + j.dump());
  }
  static std::size_t as_count(const json& j) {
    if (j.is_number_unsigned()) return j.get<std::size_t>();
    if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::size_t>(j.get<long long>());
    throw input_error("expected a non-negative integer, got " + j.dump());
  }
  static std::size_t parse_count(const std::string& s) {
    std::size_t pos = 0;
    unsigned long long value = 0;
    try {
      value = std::stoull(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size() || s.front() == '-') throw input_error("expected a non-negative integer: " + s);
    return static_cast<std::size_t>(value);
  }
  static std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& field : csv::split_row(s)) out.push_back(csv::parse_number(field, 0));
    return out;
  }
  static json parse_json_arg(const std::string& s) {
    std::string text = s;
    if (!s.empty() && s.front() != '{' && s.front() != '[') {
      std::ifstream in(s);
      if (!in) throw Error(ErrorCode::kIo, "cannot open '" + s + "'");
      std::stringstream buf;
      buf << in.rdbuf();
      text = buf.str();
    }
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse, std::string("invalid JSON: ") + e.what());
    }
  }

  CLI::App* app_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
};

// --------------------------------------------------------------- output

struct Globals {
  std::string config;
  std::string out = "spcl_out";
  std::uint64_t seed = 0;
};

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  return f;
}

void write_json(const fs::path& path, const json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

void write_header(std::ostream& out, std::initializer_list<const char*> names) {
  bool first = true;
  for (const char* n : names) {
    out << (first ? "" : ",") << n;
    first = false;
  }
  out << '\n';
}

// ---------------------------------------------------------- derive input

using Unary = std::function<double(double)>;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

Unary builtin_weight(const std::string& name) {
  if (name == "linear-clamp" || name == "linear") return [](double l) { return clamp01(1.0 - l); };
  if (name == "step" || name == "hard") return [](double l) { return l < 1.0 ? 1.0 : 0.0; };
  if (name == "exp-decay" || name == "exp") return [](double l) { return std::exp(-l); };
  if (name == "inverse" || name == "log") return [](double l) { return l <= 1.0 ? 1.0 : 1.0 / l; };
  return nullptr;
}

Unary builtin_regularizer(const std::string& name) {
  auto on_unit = [](Unary f) {
    return [f](double v) { return v >= 0.0 && v <= 1.0 ? f(v) : kPosInf; };
  };
  if (name == "neg-log" || name == "log") {
    return [](double v) { return v > 0.0 && v <= 1.0 ? -std::log(v) : kPosInf; };
  }
  if (name == "quadratic" || name == "linear") return on_unit([](double v) { return 0.5 * (1.0 - v) * (1.0 - v); });
  if (name == "entropy" || name == "exp") {
    return on_unit([](double v) { return v > 0.0 ? v * std::log(v) - v + 1.0 : 1.0; });
  }
  if (name == "neg-linear" || name == "hard") return on_unit([](double v) { return -v; });
  if (name == "zero") return on_unit([](double) { return 0.0; });
  return nullptr;
}

// Piecewise-linear interpolant of an `x,value` CSV; `outside` beyond the data.
Unary csv_function(const std::string& path, bool clamp_right, double outside) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  const csv::Table table = csv::read_table(in);
  if (table.header.size() != 2 || table.header[0] != "x" || table.header[1] != "value") {
    throw Error(ErrorCode::kParse, "line 1: expected header 'x,value'");
  }
  auto xs = std::make_shared<std::vector<double>>();
  auto ys = std::make_shared<std::vector<double>>();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const double x = table.rows[r][0];
    if (!std::isfinite(x) || (!xs->empty() && !(x > xs->back()))) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(table.line_numbers[r]) + ": x must be finite and strictly increasing");
    }
    xs->push_back(x);
    ys->push_back(table.rows[r][1]);
  }
  if (xs->size() < 2) throw Error(ErrorCode::kParse, "need at least two samples");
  return [xs, ys, clamp_right, outside](double x) {
    if (x < xs->front()) return outside;
    if (x > xs->back()) return clamp_right ? ys->back() : outside;
    auto it = std::upper_bound(xs->begin(), xs->end(), x);
    if (it == xs->end()) return ys->back();
    const std::size_t i = static_cast<std::size_t>(it - xs->begin());
    const double t = (x - (*xs)[i - 1]) / ((*xs)[i] - (*xs)[i - 1]);
    const double a = (*ys)[i - 1];
    const double b = (*ys)[i];
    if (!std::isfinite(a) || !std::isfinite(b)) return t < 0.5 ? a : b;
    return a + t * (b - a);
  };
}

bool looks_like_path(const std::string& s) {
  return s.find('/') != std::string::npos || s.find('.') != std::string::npos;
}

// ------------------------------------------------------------- commands

struct DeriveParams {
  std::string pipeline;
  std::string input;
  std::string name;
  double lambda = 1.0;
  double l_max = 8.0;
  std::size_t points = 2049;
};

void dump_triple(const fs::path& dir, const SPRegularizer& reg, double lambda, std::size_t points) {
  {
    auto f = open_out(dir / "r_sp.csv");
    write_header(f, {"v", "r_sp"});
    for (double v : uniform_grid(0.0, 1.0, points)) csv::write_row(f, {v, reg.r_sp(v, lambda)});
  }
  const auto ls = uniform_grid(0.0, 8.0 * lambda, points);
  {
    auto f = open_out(dir / "weight.csv");
    write_header(f, {"l", "weight"});
    for (double l : ls) csv::write_row(f, {l, reg.weight(lambda, l)});
  }
  {
    auto f = open_out(dir / "latent.csv");
    write_header(f, {"l", "latent"});
    for (double l : ls) csv::write_row(f, {l, reg.latent(lambda, l)});
  }
}

int finish_validation(const fs::path& dir, const SPRegularizer& reg, const json& effective, std::ostream& out) {
  const ValidationReport report = validate_sp_regularizer(reg);
  json j = report;
  j["notes"] = reg.notes();
  j["config"] = effective;
  write_json(dir / "validation.json", j);
  out << reg.name() << ": validation " << (report.verdict ? "passed" : "FAILED") << '\n';
  for (const auto& c : report.checks) {
    if (!c.passed || c.warning) {
      out << "  " << c.name << (c.warning ? " (warning)" : " FAILED") << ": residual " << csv::format_number(c.residual)
          << " at " << c.location << '\n';
    }
  }
  return report.verdict ? kSuccess : kValidationFailure;
}

int cmd_derive(const DeriveParams& p, const Globals& g, const json& effective, std::ostream& out) {
  if (!(p.lambda > 0.0)) throw input_error("--lambda must be positive");
  if (p.input.empty()) throw input_error("--input is required");
  SPRegularizer reg = hard_regularizer();
  if (p.pipeline == "from-weight") {
    Unary w = builtin_weight(p.input);
    if (!w) {
      if (!looks_like_path(p.input)) throw input_error("unknown weight function '" + p.input + "'");
      w = csv_function(p.input, true, 1.0);
    }
    reg = design_from_weight(w, {p.l_max, p.points, p.name.empty() ? "FROM_WEIGHT" : p.name});
  } else if (p.pipeline == "from-regularizer") {
    Unary r = builtin_regularizer(p.input);
    if (!r) {
      if (!looks_like_path(p.input)) throw input_error("unknown regularizer function '" + p.input + "'");
      r = csv_function(p.input, false, kPosInf);
    }
    reg = design_from_regularizer(r, {p.points, p.name.empty() ? "FROM_REGULARIZER" : p.name});
  } else {
    throw input_error("--pipeline must be from-weight or from-regularizer");
  }
  const fs::path dir = prepare_out(g.out);
  dump_triple(dir, reg, p.lambda, p.points);
  return finish_validation(dir, reg, effective, out);
}

struct ValidateParams {
  std::string regularizer = "linear";
  double lambda = 1.0;
  std::size_t points = 2049;
};

int cmd_validate(const ValidateParams& p, const Globals& g, const json& effective, std::ostream& out) {
  if (!(p.lambda > 0.0)) throw input_error("--lambda must be positive");
  const SPRegularizer reg = regularizer_by_name(p.regularizer);
  const fs::path dir = prepare_out(g.out);
  dump_triple(dir, reg, p.lambda, p.points);
  return finish_validation(dir, reg, effective, out);
}

struct CurriculumParams {
  std::string regularizer = "exp";
  double lambda = 1.0;
  json region = {{"kind", "halfspace"}, {"k", {1.0, -1.0}}, {"b", 0.0}};
  double l_max = 4.0;
  std::size_t lattice = 21;
  bool no_check = false;
};

const char* side_name(bool penalized) { return penalized ? "PENALIZED" : "UNAFFECTED"; }

int cmd_curriculum(const CurriculumParams& p, const Globals& g, const json& effective, std::ostream& out) {
  if (!(p.lambda > 0.0) || !(p.l_max > 0.0) || p.lattice < 2) {
    throw input_error("--lambda and --l-max must be positive and --lattice at least 2");
  }
  const SPRegularizer reg = regularizer_by_name(p.regularizer);
  const CurriculumRegion region = CurriculumRegion::from_json(p.region, 2);
  if (!p.no_check) region.check_nonsingular(reg, p.lambda);
  NumericActionOptions options;
  options.check_nonsingular = false;

  const auto axis = uniform_grid(0.0, p.l_max, p.lattice);
  const fs::path dir = prepare_out(g.out);
  auto f = open_out(dir / "lattice.csv");
  write_header(f, {"l1", "l2", "F", "Fnew", "side"});
  double max_excess = 0.0;
  double min_excess = kPosInf;
  json max_at;
  json boundary = json::array();
  std::vector<std::vector<bool>> penalized(p.lattice, std::vector<bool>(p.lattice));
  for (std::size_t a = 0; a < p.lattice; ++a) {
    for (std::size_t b = 0; b < p.lattice; ++b) {
      const std::vector<double> l{axis[a], axis[b]};
      const double base = separable_latent(reg, p.lambda, l);
      const double action = curriculum_action_numeric(reg, p.lambda, region, l, options).value;
      std::vector<double> v(2);
      for (std::size_t i = 0; i < 2; ++i) v[i] = reg.weight(p.lambda, l[i]);
      penalized[a][b] = !region.contains(v, 1e-12);
      f << csv::format_number(l[0]) << ',' << csv::format_number(l[1]) << ',' << csv::format_number(base) << ','
        << csv::format_number(action) << ',' << side_name(penalized[a][b]) << '\n';
      const double excess = action - base;
      min_excess = std::min(min_excess, excess);
      if (excess > max_excess) {
        max_excess = excess;
        max_at = {l[0], l[1]};
      }
    }
  }
  // lattice points whose side differs from a neighbour
  for (std::size_t a = 0; a < p.lattice; ++a) {
    for (std::size_t b = 0; b < p.lattice; ++b) {
      const bool flip = (a + 1 < p.lattice && penalized[a + 1][b] != penalized[a][b]) ||
                        (b + 1 < p.lattice && penalized[a][b + 1] != penalized[a][b]);
      if (flip) boundary.push_back({axis[a], axis[b]});
    }
  }
  json summary = {{"regularizer", reg.name()},
                  {"region", region},
                  {"max_excess", max_excess},
                  {"max_excess_at", max_at},
                  {"min_excess", min_excess},
                  {"critical_boundary", boundary},
                  {"config", effective}};
  write_json(dir / "summary.json", summary);
  out << "curriculum lattice " << p.lattice << "x" << p.lattice << ", max excess " << csv::format_number(max_excess)
      << '\n';
  return kSuccess;
}

struct FitParams {
  std::string data;
  std::string regularizer = "hard";
  std::string loss = "squared";
  double alpha = 1e-3;
  std::string schedule = "kumar";
  double lambda = 1.0;
  double growth = 1.3;
  std::vector<double> fractions;
  std::size_t max_stages = 30;
  std::size_t inner_max = 2000;
  json region;  // null: no curriculum
  bool use_groups = false;
  bool cross_check = false;
};

ScheduleConfig schedule_from(const std::string& kind, double lambda, double growth,
                             const std::vector<double>& fractions, std::size_t max_stages) {
  ScheduleConfig s;
  if (kind == "kumar") {
    s.kind = ScheduleKind::kKumar;
  } else if (kind == "portion") {
    s.kind = ScheduleKind::kPortion;
    check_fractions(fractions);
  } else if (kind == "fixed") {
    s.kind = ScheduleKind::kFixed;
  } else {
    throw input_error("--schedule must be kumar, portion or fixed");
  }
  s.lambda = lambda;
  s.growth = growth;
  s.fractions = fractions;
  s.max_stages = max_stages;
  return s;
}

json eigen_json(const Eigen::VectorXd& x) {
  json out = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(number(x[i]));
  return out;
}

int cmd_fit(const FitParams& p, const Globals& g, const json& effective, std::ostream& out) {
  if (p.data.empty()) throw input_error("--data is required");
  std::ifstream in(p.data);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + p.data + "'");
  const Dataset data = read_dataset_csv(in);

  TrainConfig config;
  config.regularizer = p.regularizer;
  regularizer_by_name(p.regularizer);
  config.loss = loss_kind_by_name(p.loss);
  config.alpha = p.alpha;
  config.schedule = schedule_from(p.schedule, p.lambda, p.growth, p.fractions, p.max_stages);
  config.inner_max = p.inner_max;
  if (p.use_groups && !p.region.is_null()) throw input_error("--use-groups and --region are mutually exclusive");
  if (p.use_groups) {
    if (data.groups.empty()) throw input_error("--use-groups needs a 'group' column in the dataset");
    std::map<long long, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < data.groups.size(); ++i) by_label[data.groups[i]].push_back(i);
    std::vector<std::vector<std::size_t>> partition;
    for (auto& [label, members] : by_label) partition.push_back(std::move(members));
    config.curriculum = CurriculumRegion::groups(std::move(partition));
  } else if (!p.region.is_null()) {
    config.curriculum = CurriculumRegion::from_json(p.region, data.size());
  }

  const TrainState state = spl_fit(data, config);
  const fs::path dir = prepare_out(g.out);
  {
    auto f = open_out(dir / "trace.csv");
    write_header(f, {"iter", "lambda", "spl_objective", "latent_objective"});
    for (const auto& row : state.trace) {
      f << row.iter << ',' << csv::format_number(row.lambda) << ',' << csv::format_number(row.spl_objective) << ','
        << csv::format_number(row.latent_objective) << '\n';
    }
  }
  json stages = json::array();
  for (const auto& s : state.stages) {
    stages.push_back({{"lambda", s.lambda},
                      {"iterations", s.iterations},
                      {"converged", s.converged},
                      {"gradient_norm", number(s.gradient_norm)}});
  }
  json trace = {{"iter", json::array()}, {"lambda", json::array()}, {"spl_objective", json::array()},
                {"latent_objective", json::array()}};
  for (const auto& row : state.trace) {
    trace["iter"].push_back(row.iter);
    trace["lambda"].push_back(number(row.lambda));
    trace["spl_objective"].push_back(number(row.spl_objective));
    trace["latent_objective"].push_back(number(row.latent_objective));
  }
  json result = {{"w", eigen_json(state.w)},
                 {"v", numbers(state.v)},
                 {"lambda", number(state.lambda)},
                 {"converged", state.converged},
                 {"stages", stages},
                 {"trace", trace},
                 {"config", effective}};
  if (p.cross_check) {
    const Eigen::VectorXd grad = latent_gradient(state.w, data, config, state.lambda);
    const DescentResult descent = latent_descent_fit(data, config, state.lambda, state.w);
    result["cross_check"] = {{"gradient_norm_at_fixed_point", number(grad.norm())},
                             {"latent_descent_w", eigen_json(descent.w)},
                             {"latent_descent_gradient_norm", number(descent.gradient_norm)},
                             {"latent_descent_iterations", descent.iterations},
                             {"parameter_gap", number((descent.w - state.w).norm())}};
    out << "cross-check: |grad G| at the fixed point = " << csv::format_number(grad.norm()) << '\n';
  }
  write_json(dir / "result.json", result);
  out << "fit: " << state.stages.size() << " stage(s), " << state.trace.size() << " iteration(s), final lambda "
      << csv::format_number(state.lambda) << (state.converged ? "" : " (iteration cap reached)") << '\n';
  return state.converged ? kSuccess : kIterationCap;
}

struct CompareParams {
  std::size_t n = 100;
  std::size_t d = 5;
  double outlier_fraction = 0.2;
  double noise = 1.0;
  double outlier_scale = 50.0;
  std::size_t seeds = 10;
  double alpha = 1e-3;
  double growth = 1.3;
  std::size_t max_stages = 15;
};

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

int cmd_compare(const CompareParams& p, const Globals& g, const json& effective, std::ostream& out) {
  if (p.seeds == 0) throw input_error("--seeds must be positive");
  const std::vector<std::string> variants{"hard", "exp"};
  const fs::path dir = prepare_out(g.out);
  auto f = open_out(dir / "compare.csv");
  write_header(f, {"seed", "ridge_error", "spl_hard_error", "spl_exp_error"});
  json per_seed = json::array();
  std::vector<double> ridge_errors;
  std::map<std::string, std::vector<double>> spl_errors;
  std::map<std::string, std::size_t> wins;
  for (std::size_t s = 0; s < p.seeds; ++s) {
    SyntheticSpec spec;
    spec.n = p.n;
    spec.d = p.d;
    spec.outlier_fraction = p.outlier_fraction;
    spec.noise = p.noise;
    spec.outlier_scale = p.outlier_scale;
    spec.seed = g.seed + s;
    const SyntheticData syn = make_synthetic(spec);
    const Eigen::VectorXd ridge = w_step(std::vector<double>(p.n, 1.0), syn.data, LossKind::kSquared, p.alpha);
    const double ridge_error = (ridge - syn.w_true).norm();
    ridge_errors.push_back(ridge_error);
    json row = {{"seed", spec.seed}, {"ridge_error", ridge_error}};
    f << spec.seed << ',' << csv::format_number(ridge_error);
    for (const auto& name : variants) {
      TrainConfig config;
      config.regularizer = name;
      config.alpha = p.alpha;
      config.schedule.kind = ScheduleKind::kKumar;
      config.schedule.growth = p.growth;
      config.schedule.max_stages = p.max_stages;
      const TrainState state = spl_fit(syn.data, config);
      const double error = (state.w - syn.w_true).norm();
      spl_errors[name].push_back(error);
      const bool win = error < ridge_error;
      wins[name] += win;
      row["spl_" + name + "_error"] = error;
      row["spl_" + name + "_wins"] = win;
      f << ',' << csv::format_number(error);
    }
    f << '\n';
    per_seed.push_back(row);
  }
  json summary = {{"per_seed", per_seed}, {"median_ridge_error", median(ridge_errors)}, {"config", effective}};
  for (const auto& name : variants) {
    summary["median_spl_" + name + "_error"] = median(spl_errors[name]);
    summary["spl_" + name + "_wins"] = wins[name];
    summary["spl_" + name + "_wins_every_seed"] = wins[name] == p.seeds;
  }
  write_json(dir / "summary.json", summary);
  out << "compare: SPL(HARD) wins " << wins["hard"] << "/" << p.seeds << ", SPL(EXP) wins " << wins["exp"] << "/"
      << p.seeds << '\n';
  return kSuccess;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, "config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParse, "config '" + path + "' must be a JSON object");
  return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-paced learning toolkit: regularizer design and validation, curriculum actions, SPL training"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals globals;
  Params global_params(&app);
  app.add_option("--config", globals.config, "JSON config file; flags override its values");
  global_params.add("out", globals.out, "output directory");
  global_params.add("seed", globals.seed, "base random seed", true);

  DeriveParams derive;
  auto* derive_cmd = app.add_subcommand("derive", "build a regularizer from a weight function or a regularizer");
  Params derive_params(derive_cmd);
  derive_params.add("pipeline", derive.pipeline, "from-weight | from-regularizer");
  derive_params.add("input", derive.input, "built-in function name or x,value CSV path");
  derive_params.add("name", derive.name, "name of the derived regularizer");
  derive_params.add("lambda", derive.lambda, "age parameter for the table dumps");
  derive_params.add("l-max", derive.l_max, "upper end of the l-grid (from-weight)");
  derive_params.add("points", derive.points, "grid points");

  ValidateParams validate;
  auto* validate_cmd = app.add_subcommand("validate", "validate a catalog regularizer");
  Params validate_params(validate_cmd);
  validate_params.add("regularizer", validate.regularizer, "hard | linear | log | exp");
  validate_params.add("lambda", validate.lambda, "age parameter for the table dumps");
  validate_params.add("points", validate.points, "grid points of the table dumps");

  CurriculumParams curriculum;
  auto* curriculum_cmd = app.add_subcommand("curriculum", "dump a 2-D curriculum action lattice");
  Params curriculum_params(curriculum_cmd);
  curriculum_params.add("regularizer", curriculum.regularizer, "hard | linear | log | exp");
  curriculum_params.add("lambda", curriculum.lambda, "age parameter");
  curriculum_params.add_json("region", curriculum.region, "region spec as inline JSON or a JSON file path");
  curriculum_params.add("l-max", curriculum.l_max, "lattice spans [0, l-max]^2");
  curriculum_params.add("lattice", curriculum.lattice, "lattice points per axis");
  curriculum_params.add_flag("no-check", curriculum.no_check, "skip the nonsingularity check");

  FitParams fit;
  auto* fit_cmd = app.add_subcommand("fit", "train SPL on a CSV dataset");
  Params fit_params(fit_cmd);
  fit_params.add("data", fit.data, "dataset CSV (features, then target; optional 'group' column)");
  fit_params.add("regularizer", fit.regularizer, "hard | linear | log | exp");
  fit_params.add("loss", fit.loss, "squared | logistic");
  fit_params.add("alpha", fit.alpha, "ridge coefficient");
  fit_params.add("schedule", fit.schedule, "kumar | portion | fixed");
  fit_params.add("lambda", fit.lambda, "age parameter for the fixed schedule");
  fit_params.add("growth", fit.growth, "age growth factor for the kumar schedule");
  fit_params.add("fractions", fit.fractions, "comma-separated portions for the portion schedule");
  fit_params.add("max-stages", fit.max_stages, "stage cap for the kumar schedule");
  fit_params.add("inner-max", fit.inner_max, "alternation cap per stage");
  fit_params.add_json("region", fit.region, "curriculum region spec (inline JSON or file)");
  fit_params.add_flag("use-groups", fit.use_groups, "share one weight per dataset group");
  fit_params.add_flag("cross-check", fit.cross_check, "run latent descent from the fixed point");

  CompareParams compare;
  auto* compare_cmd = app.add_subcommand("compare", "seeded SPL versus ridge experiment");
  Params compare_params(compare_cmd);
  compare_params.add("n", compare.n, "samples per dataset");
  compare_params.add("d", compare.d, "features");
  compare_params.add("outlier-fraction", compare.outlier_fraction, "fraction of corrupted targets");
  compare_params.add("noise", compare.noise, "noise standard deviation");
  compare_params.add("outlier-scale", compare.outlier_scale, "outlier shift in noise units");
  compare_params.add("seeds", compare.seeds, "number of seeds, starting at --seed");
  compare_params.add("alpha", compare.alpha, "ridge coefficient");
  compare_params.add("growth", compare.growth, "age growth factor");
  compare_params.add("max-stages", compare.max_stages, "stage cap");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  try {
    const json config = load_config(globals.config);
    Params* command = nullptr;
    if (derive_cmd->parsed()) command = &derive_params;
    if (validate_cmd->parsed()) command = &validate_params;
    if (curriculum_cmd->parsed()) command = &curriculum_params;
    if (fit_cmd->parsed()) command = &fit_params;
    if (compare_cmd->parsed()) command = &compare_params;
    for (const auto& [key, value] : config.items()) {
      if (!global_params.known(key) && !command->known(key)) {
        throw Error(ErrorCode::kParse, "config: unknown key '" + key + "'");
      }
    }
    global_params.apply_config(config);
    command->apply_config(config);
    global_params.apply_flags();
    command->apply_flags();
    json effective = command->effective();
    effective.update(global_params.effective());
    effective["command"] = app.get_subcommands().front()->get_name();

    if (derive_cmd->parsed()) return cmd_derive(derive, globals, effective, out);
    if (validate_cmd->parsed()) return cmd_validate(validate, globals, effective, out);
    if (curriculum_cmd->parsed()) return cmd_curriculum(curriculum, globals, effective, out);
    if (fit_cmd->parsed()) return cmd_fit(fit, globals, effective, out);
    return cmd_compare(compare, globals, effective, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::kSingularRegion:
        return kValidationFailure;
      default:
        return kInputError;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace spcl::cli
