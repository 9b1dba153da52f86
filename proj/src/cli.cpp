#include "gibbs/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "gibbs/asymptotics.hpp"
#include "gibbs/engine.hpp"
#include "gibbs/error.hpp"
#include "gibbs/model.hpp"
#include "gibbs/rng.hpp"
#include "gibbs/stats.hpp"

namespace gibbs::cli {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string spec_text(const std::string& source) {
  std::error_code ec;
  if (source.find('\n') == std::string::npos && std::filesystem::is_regular_file(source, ec)) {
    return read_file(source);
  }
  return source;
}

std::string cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

// Writes the header and rows as JSON lines, or rows as CSV with the seed and
// the config digest in every record.
class Writer {
 public:
  Writer(std::ostream& os, const RunConfig& cfg, json header, std::vector<std::string> columns)
      : os_(os), format_(cfg.format), header_(std::move(header)), columns_(std::move(columns)) {
    if (format_ == Format::kJson) {
      os_ << header_.dump() << '\n';
    } else {
      std::vector<std::string> names = columns_;
      names.push_back("seed");
      names.push_back("config_digest");
      os_ << csv_record(names);
    }
  }

  void row(const json& r) {
    if (format_ == Format::kJson) {
      os_ << r.dump() << '\n';
      return;
    }
    std::vector<std::string> fields;
    for (const auto& c : columns_) fields.push_back(r.contains(c) ? cell(r.at(c)) : "");
    fields.push_back(cell(header_.at("seed")));
    fields.push_back(cell(header_.at("config_digest")));
    os_ << csv_record(fields);
  }

  /// JSON only: a whole report on one line.
  void report(const json& r) {
    if (format_ == Format::kJson) os_ << r.dump() << '\n';
  }

 private:
  std::ostream& os_;
  Format format_;
  json header_;
  std::vector<std::string> columns_;
};

json header_for(const RunConfig& cfg, const GibbsModel* model) {
  json h = {{"command", cfg.command},
            {"seed", cfg.seed},
            {"rng", kRngName},
            {"method", cfg.method},
            {"config_digest", hex64(cfg.digest())}};
  if (model) {
    h["model_hash"] = hex64(model->digest());
    h["truncation"] = model->truncation();
  }
  return h;
}

std::unique_ptr<GibbsModel> load_model(const RunConfig& cfg) {
  if (cfg.spec.empty()) throw SpecError("--spec is required");
  ModelOptions opts;
  opts.truncation = cfg.truncation;
  if (opts.truncation == 0) {
    opts.truncation = kDefaultTruncation;
    for (std::size_t n : cfg.sizes) opts.truncation = std::max(opts.truncation, n);
  }
  return std::make_unique<GibbsModel>(SpeciesSpec::parse(spec_text(cfg.spec)), opts);
}

ExperimentOptions experiment_options(const RunConfig& cfg) {
  ExperimentOptions o;
  o.seed = cfg.seed;
  o.workers = cfg.workers;
  o.method = parse_method(cfg.method);
  return o;
}

void require_sizes(const RunConfig& cfg) {
  if (cfg.sizes.empty()) throw PreconditionError("--sizes is required");
  if (cfg.samples == 0) throw PreconditionError("--samples must be positive");
}

// Coefficients need no radius or sampling tables, so this path bypasses
// GibbsModel and its guards. A root that is not a composition gets a single
// series column.
void cmd_coeffs(const RunConfig& cfg, std::ostream& os) {
  if (cfg.spec.empty()) throw SpecError("--spec is required");
  const SpeciesSpec spec = SpeciesSpec::parse(spec_text(cfg.spec));
  const std::size_t n_max = cfg.truncation == 0 ? kDefaultTruncation : cfg.truncation;
  ExprPtr top = spec.root();
  while (top->op == Op::kRef) top = spec.definition(top->name);
  Engine engine(spec, n_max);
  json header = header_for(cfg, nullptr);
  header["model_hash"] = hex64(spec.digest());
  header["truncation"] = n_max;

  if (top->op != Op::kCompose) {
    const TruncatedSeries s = engine.series(spec.root(), n_max);
    Writer w(os, cfg, header, {"n", "series"});
    for (std::size_t n = 0; n <= n_max; ++n) w.row({{"n", n}, {"series", s[n].get_str()}});
    return;
  }
  const TruncatedSeries inner = engine.series(top->args[1], n_max);
  if (sgn(inner[0]) != 0) throw InnerHasConstantTerm("the inner species has objects of size 0");
  const TruncatedSeries composite = engine.series(top, n_max);
  const TruncatedSeries derived =
      engine.series(build::compose(build::derive(top->args[0]), top->args[1]), n_max);
  Writer w(os, cfg, header, {"n", "inner", "composite", "derived"});
  for (std::size_t n = 0; n <= n_max; ++n) {
    w.row({{"n", n},
           {"inner", inner[n].get_str()},
           {"composite", composite[n].get_str()},
           {"derived", derived[n].get_str()}});
  }
}

void cmd_sample(const RunConfig& cfg, std::ostream& os) {
  require_sizes(cfg);
  auto model = load_model(cfg);
  for (std::size_t n : cfg.sizes) require_lattice_size(*model, n);
  const ExperimentOptions opts = experiment_options(cfg);
  Writer w(os, cfg, header_for(cfg, model.get()),
           {"n", "canonical", "largest", "remainder_size", "components"});
  for (std::size_t n : cfg.sizes) {
    std::vector<json> lines(cfg.samples);
    parallel_for(cfg.samples, opts.workers, [&](std::size_t i) {
      Rng rng = sample_stream(opts.seed, n, i);
      const Object s = sample_S_n(*model, n, rng, opts.method);
      const std::string canonical = canonicalize(s).key();
      const FragmentRecord r = extract_remainder(s, rng);
      lines[i] = {{"n", n},
                  {"canonical", canonical},
                  {"largest", r.largest_size},
                  {"remainder_size", r.remainder_size},
                  {"components", r.component_count}};
    });
    for (const auto& l : lines) w.row(l);
  }
}

void cmd_limit(const RunConfig& cfg, std::ostream& os) {
  auto model = load_model(cfg);
  const LimitLaw law = limit_remainder_distribution(*model, cfg.cap);
  std::vector<const LimitEntry*> order;
  for (const auto& e : law.entries) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [](const LimitEntry* a, const LimitEntry* b) {
    return a->p > b->p || (a->p == b->p && a->remainder.key() < b->remainder.key());
  });
  Writer w(os, cfg, header_for(cfg, model.get()),
           {"kind", "remainder", "size", "components", "p", "p_low", "p_high"});
  for (const LimitEntry* e : order) {
    w.row({{"kind", "orbit"},
           {"remainder", e->remainder.key()},
           {"size", e->remainder.size()},
           {"components", e->components},
           {"p", static_cast<double>(e->p)},
           {"p_low", static_cast<double>(e->p_low)},
           {"p_high", static_cast<double>(e->p_high)}});
  }
  w.row({{"kind", "tail"}, {"p", static_cast<double>(law.tail)}});
  w.row({{"kind", "total"}, {"p", static_cast<double>(law.enumerated_mass() + law.tail)}});
  w.report({{"rho", static_cast<double>(law.rho)},
            {"rho_spread", static_cast<double>(law.spread)},
            {"normalizer", static_cast<double>(law.normalizer)},
            {"cap", law.cap}});
}

void cmd_asymptotics(const RunConfig& cfg, std::ostream& os) {
  auto model = load_model(cfg);
  const RatioReport rep = coefficient_ratio_experiment(*model);
  Writer w(os, cfg, header_for(cfg, model.get()), {"n", "r_n", "relative_deviation"});
  if (cfg.format == Format::kJson) {
    json j = rep.to_json();
    j["margin_probe"] = outer_margin_probe(*model, {1e-3L, 1e-2L}).to_json();
    j["margin_note"] =
        "truncation residuals at the listed epsilons; finiteness for some epsilon cannot be certified";
    w.report(j);
    return;
  }
  for (const auto& [n, r] : rep.ratio_track) {
    w.row({{"n", n},
           {"r_n", static_cast<double>(r)},
           {"relative_deviation", static_cast<double>(r / rep.constant - 1)}});
  }
}

void cmd_tv(const RunConfig& cfg, std::ostream& os) {
  require_sizes(cfg);
  auto model = load_model(cfg);
  const ExperimentOptions opts = experiment_options(cfg);
  const std::vector<std::string> columns = {"n",     "samples", "tv",   "radius",
                                            "lower", "upper",   "keys", "tail_term"};
  auto base = [](std::size_t n, std::size_t samples, const TvEstimate& tv) {
    return json{{"n", n},
                {"samples", samples},
                {"tv", static_cast<double>(tv.distance)},
                {"radius", static_cast<double>(tv.radius)},
                {"lower", static_cast<double>(tv.lower)},
                {"upper", static_cast<double>(tv.upper)},
                {"keys", tv.keys},
                {"tail_term", static_cast<double>(tv.tail_term)}};
  };
  if (cfg.statistic == "remainder") {
    std::vector<std::string> cols = columns;
    cols.insert(cols.end(), {"empirical_tail", "limit_tail", "mean_largest"});
    Writer w(os, cfg, header_for(cfg, model.get()), cols);
    const RemainderTvReport rep = remainder_tv_experiment(*model, cfg.sizes, cfg.samples, cfg.cap, opts);
    for (const auto& r : rep.rows) {
      json row = base(r.n, r.samples, r.tv);
      row["empirical_tail"] = static_cast<double>(r.empirical_tail);
      row["limit_tail"] = static_cast<double>(r.limit_tail);
      row["mean_largest"] = static_cast<double>(r.mean_largest);
      w.row(row);
    }
    w.report({{"cap", rep.cap},
              {"rho", static_cast<double>(rep.rho)},
              {"decreasing_beyond_radii", rep.decreasing_beyond_radii()}});
  } else if (cfg.statistic == "components") {
    Writer w(os, cfg, header_for(cfg, model.get()), columns);
    for (std::size_t n : cfg.sizes) {
      const ComponentCountReport rep = component_count_experiment(*model, n, cfg.samples, opts);
      json row = base(n, cfg.samples, rep.tv);
      if (cfg.format == Format::kJson) row["table"] = rep.to_json()["table"];
      w.row(row);
    }
  } else if (cfg.statistic == "self-test") {
    std::vector<std::string> cols = columns;
    cols.push_back("within_radius");
    Writer w(os, cfg, header_for(cfg, model.get()), cols);
    for (std::size_t n : cfg.sizes) {
      const TvEstimate tv = remainder_self_test(*model, n, cfg.samples, opts);
      json row = base(n, cfg.samples, tv);
      row["within_radius"] = tv.distance <= tv.radius;
      w.row(row);
    }
  } else {
    throw PreconditionError("unknown statistic '" + cfg.statistic + "'");
  }
}

TruncatedSeries series_from_file(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<Rational> c;
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    c.push_back(parse_rational(line.substr(b, e - b + 1)));
  }
  if (c.empty()) throw PreconditionError(path + " holds no coefficients");
  return TruncatedSeries(c);
}

void cmd_diagnose(const RunConfig& cfg, std::ostream& os) {
  std::unique_ptr<GibbsModel> model;
  TruncatedSeries g;
  if (!cfg.series_file.empty()) {
    g = series_from_file(cfg.series_file);
  } else {
    model = load_model(cfg);
    g = model->inner_series();
  }
  const SubexpReport rep = diagnose_subexponential(g);
  Writer w(os, cfg, header_for(cfg, model.get()), {"n", "ratio", "convolution"});
  if (cfg.format == Format::kJson) {
    w.report(rep.to_json());
    return;
  }
  std::map<std::size_t, json> rows;
  for (const auto& [n, v] : rep.ratio_track) rows[n]["ratio"] = static_cast<double>(v);
  for (const auto& [n, v] : rep.convolution_track) rows[n]["convolution"] = static_cast<double>(v);
  for (auto& [n, r] : rows) {
    r["n"] = n;
    w.row(r);
  }
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kSpec:
      return kSpecError;
    case ErrorCode::kPrecondition:
      return kPreconditionError;
    case ErrorCode::kBudget:
      return kBudgetError;
    default:
      return kFailure;
  }
}

}  // namespace

json RunConfig::to_json() const {
  return {{"command", command}, {"spec", spec},     {"truncation", truncation},
          {"seed", seed},       {"samples", samples}, {"sizes", sizes},
          {"cap", cap},         {"format", format == Format::kJson ? "json" : "csv"},
          {"method", method},   {"statistic", statistic}, {"series_file", series_file}};
}

std::uint64_t RunConfig::digest() const { return fnv1a64(to_json().dump()); }

std::string csv_record(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      out += f;
      continue;
    }
    out += '"';
    for (char c : f) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
  }
  out += "\r\n";
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Composite structures up to symmetry: coefficients, sampling and limit laws", "gibbs_cli"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string format = "json";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--spec", cfg.spec, "Spec file, or inline DSL / JSON");
    sub->add_option("--trunc", cfg.truncation, "Truncation order N (default max(256, sizes))");
    sub->add_option("--seed", cfg.seed, "RNG seed");
    sub->add_option("--samples", cfg.samples, "Samples per size");
    sub->add_option("--sizes", cfg.sizes, "Sizes n")->delimiter(',');
    sub->add_option("--cap", cfg.cap, "Largest enumerated remainder size");
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", cfg.out, "Output path (default stdout)");
    sub->add_option("--workers", cfg.workers, "Worker threads; output does not depend on it");
    sub->add_option("--method", cfg.method, "exact_recursive or rejection");
  };
  struct Command {
    const char* name;
    const char* help;
    void (*fn)(const RunConfig&, std::ostream&);
  };
  const Command commands[] = {
      {"coeffs", "Inner, composite and derived coefficients", cmd_coeffs},
      {"sample", "JSON-lines transcript of sampled composites", cmd_sample},
      {"limit", "Limit law of the remainder", cmd_limit},
      {"asymptotics", "Ratio of composite to inner coefficients, with an outer margin probe", cmd_asymptotics},
      {"tv", "Total variation experiments", cmd_tv},
      {"diagnose", "Subexponential diagnostics of the inner series", cmd_diagnose},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    common(sub);
    if (std::string(c.name) == "tv") {
      sub->add_option("--statistic", cfg.statistic, "remainder, components or self-test")
          ->check(CLI::IsMember({"remainder", "components", "self-test"}));
    }
    if (std::string(c.name) == "diagnose") {
      sub->add_option("--series-file", cfg.series_file, "Coefficients g_0, g_1, ... one per line");
    }
    subs.emplace_back(sub, &c);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kFailure;
  }
  cfg.format = format == "csv" ? Format::kCsv : Format::kJson;
  const Command* chosen = nullptr;
  for (const auto& [sub, c] : subs) {
    if (sub->parsed()) {
      chosen = c;
      cfg.command = c->name;
    }
  }

  try {
    if (cfg.out.empty()) {
      chosen->fn(cfg, out);
    } else {
      // Render fully before touching the file so that failures leave no
      // partial output behind.
      std::ostringstream buf;
      chosen->fn(cfg, buf);
      std::ofstream f(cfg.out, std::ios::binary);
      if (!f) throw PreconditionError("cannot write " + cfg.out);
      f << buf.str();
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace gibbs::cli
