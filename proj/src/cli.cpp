#include "luce/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "luce/arrangements.hpp"
#include "luce/bottomk.hpp"
#include "luce/error.hpp"
#include "luce/luce_model.hpp"
#include "luce/topk.hpp"
#include "luce/weight_spec.hpp"

namespace luce::cli {

namespace {

using nlohmann::json;

json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return std::strtod(format_number(v).c_str(), nullptr);
}

std::vector<int> parse_label_list(const std::string& text, const char* what) {
  std::string cleaned = text;
  for (char& ch : cleaned)
    if (ch == ',' || ch == '[' || ch == ']') ch = ' ';
  std::istringstream is(cleaned);
  std::vector<int> out;
  std::string token;
  while (is >> token) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size())
      throw InvalidArgument(std::string(what) + ": '" + token + "' is not an integer label");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument(std::string(what) + " is empty");
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in{std::filesystem::path(path)};
  if (!in) throw InvalidArgument("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string format = "auto";
  std::uint64_t seed = 0;
  unsigned threads = 1;
  json tolerances = json::object();

  std::string fmt(const char* fallback) const { return format == "auto" ? fallback : format; }
};

/// Runs `task(i)` for i in [0, count) on up to ctx.threads workers and
/// returns results in index order.
template <class T, class Task>
std::vector<T> parallel_map(std::size_t count, unsigned threads, Task task) {
  std::vector<T> results(count);
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) results[i] = task(i);
    return results;
  }
  const std::size_t workers = std::min<std::size_t>(threads, count);
  std::vector<std::future<void>> futures;
  for (std::size_t w = 0; w < workers; ++w)
    futures.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < count; i += workers) results[i] = task(i);
    }));
  for (auto& f : futures) f.get();
  return results;
}

// ---- pmf / sample / topk ---------------------------------------------------

int run_pmf(Context& ctx, const std::string& weights_spec, const std::string& sigma_text) {
  const auto w = parse_weight_spec(weights_spec);
  const Permutation sigma(parse_label_list(sigma_text, "--sigma"));
  const double p = luce_pmf(w, sigma);
  if (ctx.fmt("json") == "csv") {
    std::string label = sigma.to_string();
    std::replace(label.begin(), label.end(), ',', ' ');
    ctx.out << "sigma,pmf\n" << label << ',' << format_number(p) << '\n';
  } else {
    ctx.out << json{{"pmf", number(p)}}.dump() << '\n';
  }
  return kSuccess;
}

int run_sample(Context& ctx, const std::string& weights_spec, std::size_t samples,
               const std::string& method) {
  const auto w = parse_weight_spec(weights_spec);
  const RngStream root(ctx.seed);
  // One child stream per sample keeps output independent of --threads.
  const auto draws = parallel_map<std::optional<Permutation>>(samples, ctx.threads, [&](std::size_t i) {
    RngStream rng = root.split(i);
    return std::optional<Permutation>(method == "exponential" ? sample_exponential(w, rng)
                                                              : sample_urn(w, rng));
  });
  const bool csv = ctx.fmt("json") == "csv";
  if (csv && samples > 0) ctx.out << "sample,permutation\n";
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const auto& sigma = *draws[i];
    if (csv) {
      std::string label = sigma.to_string();
      std::replace(label.begin(), label.end(), ',', ' ');
      ctx.out << i << ',' << label << '\n';
    } else {
      ctx.out << json(std::vector<int>(sigma.labels().begin(), sigma.labels().end())).dump() << '\n';
    }
  }
  return kSuccess;
}

int run_topk(Context& ctx, const std::string& weights_spec, std::size_t k, bool normalize_first) {
  auto w = parse_weight_spec(weights_spec);
  if (normalize_first) w = normalize(w);
  if (!w.is_normalized(topk::kNormalizationTol))
    throw InvalidArgument("topk needs weights summing to 1 within 1e-9; pass --normalize or "
                          "\"normalize\": true in the weight spec");
  const auto report = topk::distance_report(w, k);
  ctx.tolerances["normalization"] = topk::kNormalizationTol;
  const json bound = report.d_inf_bound ? number(*report.d_inf_bound) : json(nullptr);
  if (ctx.fmt("json") == "csv") {
    ctx.out << "n,k,d_inf_exact,d_inf_bound,d_inf_bound_certified,tv_exact,lambda,tv_poisson\n"
            << w.size() << ',' << k << ',' << format_number(*report.d_inf_exact) << ','
            << (report.d_inf_bound ? format_number(*report.d_inf_bound) : std::string()) << ','
            << (report.d_inf_bound_certified ? "true" : "false") << ','
            << format_number(report.tv_exact) << ',' << format_number(report.lambda) << ','
            << format_number(report.tv_poisson) << '\n';
  } else {
    json j{{"n", w.size()},
           {"k", k},
           {"d_inf_exact", number(*report.d_inf_exact)},
           {"d_inf_bound", bound},
           {"d_inf_bound_certified", report.d_inf_bound_certified},
           {"tv_exact", number(report.tv_exact)},
           {"lambda", number(report.lambda)},
           {"tv_poisson", number(report.tv_poisson)}};
    ctx.out << j.dump() << '\n';
  }
  if (!report.d_inf_bound) {
    ctx.err << "luce: d_inf bound needs every weight <= 1/2; bound omitted\n";
    return kPreconditionViolation;
  }
  return kSuccess;
}

// ---- bottom-k --------------------------------------------------------------

int run_bottom_table(Context& ctx, const std::string& family, double parameter, int max_label,
                     double tol, double tail_tol) {
  if (max_label < 1) throw InvalidArgument("--max-label must be >= 1");
  ctx.tolerances["quadrature"] = tol;
  ctx.tolerances["tail"] = tail_tol;
  std::vector<bottomk::TableRow> rows;
  bool defective = false;
  if (family == "linear" && parameter == 1.0) {
    rows = parallel_map<bottomk::TableRow>(
        static_cast<std::size_t>(max_label), ctx.threads, [&](std::size_t i) {
          return bottomk::sukhatme_last_card_row(static_cast<int>(i) + 1, tol);
        });
  } else {
    const auto seq = sequence_from_family(family, parameter);
    bottomk::QuadratureOptions opt;
    opt.tol = tol;
    opt.tail_tol = tail_tol;
    const auto pmfs = parallel_map<bottomk::BottomPmf>(
        static_cast<std::size_t>(max_label), ctx.threads, [&](std::size_t i) {
          const int label = static_cast<int>(i) + 1;
          return bottomk::limit_bottom_pmf(seq, std::span<const int>(&label, 1), opt);
        });
    for (std::size_t i = 0; i < pmfs.size(); ++i) {
      rows.push_back({static_cast<int>(i) + 1, pmfs[i].value, pmfs[i].error});
      defective = defective || pmfs[i].defective;
    }
  }
  if (defective)
    ctx.err << "luce: family '" << family
            << "' fails the convergence criterion; masses are defective\n";
  if (ctx.fmt("csv") == "json") {
    json arr = json::array();
    for (const auto& r : rows) arr.push_back({{"label", r.label}, {"probability", number(r.probability)}});
    ctx.out << json{{"family", family}, {"defective", defective}, {"rows", arr}}.dump() << '\n';
  } else {
    ctx.out << "label,probability\n";
    for (const auto& r : rows) ctx.out << r.label << ',' << format_number(r.probability) << '\n';
  }
  return kSuccess;
}

int run_converge_test(Context& ctx, const std::string& family, double parameter) {
  const auto seq = sequence_from_family(family, parameter);
  const auto r = bottomk::convergence_test(seq);
  const std::string method =
      r.method == bottomk::Method::analytic ? "analytic" : "numeric-best-effort";
  if (ctx.fmt("json") == "csv") {
    ctx.out << "family,x0,f_at_x0,converges,method\n"
            << family << ',' << (std::isinf(r.x0) ? "inf" : format_number(r.x0)) << ','
            << (r.f_at_x0_infinite ? "infinite" : "finite") << ','
            << (r.converges ? "true" : "false") << ',' << method << '\n';
  } else {
    json j{{"family", family},
           {"x0", number(r.x0)},
           {"f_at_x0", r.f_at_x0_infinite ? "infinite" : "finite"},
           {"converges", r.converges},
           {"method", method},
           {"caveat", r.caveat}};
    ctx.out << j.dump() << '\n';
  }
  return kSuccess;
}

// ---- arrangements ----------------------------------------------------------

struct ArrangementArgs {
  std::string kind;
  std::string model = "tsetlin";
  std::string weights;
  std::size_t n = 0;
  std::size_t dim = 0;
  std::string graph;
  std::string faces;
  std::string start;
  std::size_t steps = 10;
  std::size_t samples = 1;
  bool exact = false;
};

std::string expected_kind(const std::string& model) {
  if (model == "tsetlin" || model == "riffle") return "braid";
  if (model == "ehrenfest" || model == "coloring") return "boolean";
  return "";
}

arr::BraidFaceTable braid_table_from_json(const json& doc) {
  const std::size_t n = doc.at("size").get<std::size_t>();
  std::map<arr::OrderedSetPartition, double> table;
  for (const auto& entry : doc.at("faces"))
    table.emplace(arr::OrderedSetPartition::parse(entry.at("face").get<std::string>()),
                  entry.at("weight").get<double>());
  return {arr::BraidArrangement{n}, std::move(table)};
}

arr::BooleanFaceTable boolean_table_from_json(const json& doc) {
  const std::size_t d = doc.at("size").get<std::size_t>();
  std::map<arr::SignVector, double> table;
  for (const auto& entry : doc.at("faces"))
    table.emplace(arr::SignVector::parse(entry.at("face").get<std::string>()),
                  entry.at("weight").get<double>());
  return {arr::BooleanArrangement{d}, std::move(table)};
}

json load_faces(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw InvalidArgument("face table '" + path + "': " + e.what());
  }
}

arr::BraidArrangement::Chamber parse_chamber(const arr::BraidArrangement&, const std::string& s) {
  return Permutation(parse_label_list(s, "--start"));
}
arr::BooleanArrangement::Chamber parse_chamber(const arr::BooleanArrangement&, const std::string& s) {
  return arr::SignVector::parse(s);
}

template <class Arrangement>
int arrangement_action(Context& ctx, const std::string& action,
                       const arr::FaceWeightTable<Arrangement>& table, const ArrangementArgs& a) {
  const auto& arrangement = table.arrangement();
  const bool csv_default = action == "stationary";
  const bool csv = ctx.fmt(csv_default ? "csv" : "json") == "csv";
  std::optional<typename Arrangement::Chamber> start;
  if (!a.start.empty()) {
    start = parse_chamber(arrangement, a.start);
    arrangement.validate_chamber(*start);
  }
  if (action == "sim") {
    RngStream rng(ctx.seed);
    arr::ChamberChain<Arrangement> chain(table, start ? *start : arrangement.reference_chamber());
    if (csv) ctx.out << "step,chamber\n";
    auto emit = [&](std::size_t t) {
      const auto label = arrangement.chamber_label(chain.current());
      if (csv)
        ctx.out << t << ',' << label << '\n';
      else
        ctx.out << json{{"step", t}, {"chamber", label}}.dump() << '\n';
    };
    emit(0);
    for (std::size_t t = 1; t <= a.steps; ++t) {
      chain.step(rng);
      emit(t);
    }
    return kSuccess;
  }
  if (action == "stationary") {
    if (!a.exact) throw InvalidArgument("arrangement stationary supports only --exact");
    ctx.tolerances["residual"] = 1e-10;
    const auto pi = arr::stationary_exact(arr::transition_matrix(table));
    if (csv) ctx.out << "chamber,probability\n";
    json arr_json = json::array();
    for (std::size_t i = 0; i < pi.size(); ++i) {
      const auto label = arrangement.chamber_label(arrangement.chamber_at(i));
      if (csv)
        ctx.out << label << ',' << format_number(pi[i]) << '\n';
      else
        arr_json.push_back({{"chamber", label}, {"probability", number(pi[i])}});
    }
    if (!csv) ctx.out << arr_json.dump() << '\n';
    return kSuccess;
  }
  // sample-bd
  const RngStream root(ctx.seed);
  const auto draws = parallel_map<std::optional<typename Arrangement::Chamber>>(
      a.samples, ctx.threads, [&](std::size_t i) {
        RngStream rng = root.split(i);
        return std::optional(arr::brown_diaconis_sample(table, rng, start));
      });
  if (csv && a.samples > 0) ctx.out << "sample,chamber\n";
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const auto label = arrangement.chamber_label(*draws[i]);
    if (csv)
      ctx.out << i << ',' << label << '\n';
    else
      ctx.out << json{{"sample", i}, {"chamber", label}}.dump() << '\n';
  }
  return kSuccess;
}

int coloring_action(Context& ctx, const std::string& action, const ArrangementArgs& a) {
  if (a.graph.empty()) throw InvalidArgument("--model coloring needs --graph <edge list file>");
  const auto graph = arr::parse_edge_list(read_file(a.graph));
  const arr::BooleanArrangement states{graph.vertex_count};
  const bool csv = ctx.fmt(action == "stationary" ? "csv" : "json") == "csv";
  if (action == "sim") {
    RngStream rng(ctx.seed);
    arr::SignVector current =
        a.start.empty() ? states.reference_chamber() : arr::SignVector::parse(a.start);
    states.validate_chamber(current);
    if (csv) ctx.out << "step,chamber\n";
    for (std::size_t t = 0; t <= a.steps; ++t) {
      if (t > 0) current = arr::graph_coloring_step(current, graph, rng);
      if (csv)
        ctx.out << t << ',' << current.to_string() << '\n';
      else
        ctx.out << json{{"step", t}, {"chamber", current.to_string()}}.dump() << '\n';
    }
    return kSuccess;
  }
  if (action == "stationary") {
    if (!a.exact) throw InvalidArgument("arrangement stationary supports only --exact");
    ctx.tolerances["residual"] = 1e-10;
    const auto pi = arr::stationary_exact(arr::graph_coloring_matrix(graph));
    if (csv) ctx.out << "chamber,probability\n";
    json arr_json = json::array();
    for (std::size_t i = 0; i < pi.size(); ++i) {
      const auto label = states.chamber_at(i).to_string();
      if (csv)
        ctx.out << label << ',' << format_number(pi[i]) << '\n';
      else
        arr_json.push_back({{"chamber", label}, {"probability", number(pi[i])}});
    }
    if (!csv) ctx.out << arr_json.dump() << '\n';
    return kSuccess;
  }
  throw InvalidArgument("sample-bd needs a face-weight model; the coloring chain has none");
}

int run_arrangement(Context& ctx, const std::string& action, const ArrangementArgs& a) {
  const std::string implied = expected_kind(a.model);
  if (!implied.empty() && !a.kind.empty() && a.kind != implied)
    throw InvalidArgument("--model " + a.model + " lives on the " + implied +
                          " arrangement, not " + a.kind);
  const std::string kind = implied.empty() ? a.kind : implied;
  if (a.model == "coloring") return coloring_action(ctx, action, a);
  if (a.model == "tsetlin") {
    if (a.weights.empty()) throw InvalidArgument("--model tsetlin needs --weights");
    return arrangement_action(ctx, action, arr::tsetlin_face_weights(normalize(parse_weight_spec(a.weights))), a);
  }
  if (a.model == "riffle") {
    if (a.n == 0) throw InvalidArgument("--model riffle needs --n");
    return arrangement_action(ctx, action, arr::riffle_face_weights(a.n), a);
  }
  if (a.model == "ehrenfest") {
    if (a.dim == 0) throw InvalidArgument("--model ehrenfest needs --dim");
    return arrangement_action(ctx, action, arr::ehrenfest_face_weights(a.dim), a);
  }
  // custom
  if (a.faces.empty()) throw InvalidArgument("--model custom needs --faces <json file>");
  const auto doc = load_faces(a.faces);
  const std::string file_kind = doc.value("kind", kind);
  try {
    if (file_kind == "braid") return arrangement_action(ctx, action, braid_table_from_json(doc), a);
    if (file_kind == "boolean")
      return arrangement_action(ctx, action, boolean_table_from_json(doc), a);
  } catch (const json::exception& e) {
    throw InvalidArgument("face table '" + a.faces + "': " + e.what());
  }
  throw InvalidArgument("custom face table needs kind \"braid\" or \"boolean\"");
}

void write_manifest(const std::string& path, const std::vector<std::string>& args,
                    const Context& ctx, double seconds, int code, std::ostream& err) {
  json m{{"command_line", args},
         {"seed", ctx.seed},
         {"tool_version", kVersion},
         {"tolerances", ctx.tolerances},
         {"threads", ctx.threads},
         {"exit_code", code},
         {"wall_clock_seconds", seconds}};
  std::ofstream f{std::filesystem::path(path)};
  if (!f) {
    err << "luce: cannot write manifest '" << path << "'\n";
    return;
  }
  f << m.dump(2) << '\n';
}

std::uint64_t time_seed() {
  const auto t = std::chrono::system_clock::now().time_since_epoch().count();
  std::uint64_t z = static_cast<std::uint64_t>(t) + 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

} // namespace

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

CsvTable parse_csv(std::string_view text) {
  auto split = [](std::string_view line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (quoted) {
        if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else if (ch == '"') {
          quoted = false;
        } else {
          cell += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        cells.push_back(std::move(cell));
        cell.clear();
      } else if (ch != '\r') {
        cell += ch;
      }
    }
    cells.push_back(std::move(cell));
    return cells;
  };
  CsvTable table;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    auto cells = split(line);
    if (first) {
      table.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != table.header.size())
        throw InvalidArgument("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(table.header.size()));
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args = raw_args;
  if (args.size() == 2 && args[0] == "--replay") {
    try {
      const auto manifest = json::parse(read_file(args[1]));
      args = manifest.at("command_line").get<std::vector<std::string>>();
      if (std::find(args.begin(), args.end(), "--seed") == args.end()) {
        args.insert(args.begin(), std::to_string(manifest.at("seed").get<std::uint64_t>()));
        args.insert(args.begin(), "--seed");
      }
    } catch (const std::exception& e) {
      err << "luce: cannot replay '" << raw_args[1] << "': " << e.what() << '\n';
      return kUsageError;
    }
  }
  const auto started = std::chrono::steady_clock::now();
  CLI::App app{"Luce permutation model, top/bottom-k analysis and hyperplane walks", "luce"};
  app.set_version_flag("--version", kVersion);
  app.footer("Rerun a recorded invocation with: luce --replay <manifest.json>");
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx{out, err};
  std::optional<std::uint64_t> seed;
  std::string manifest_path;
  bool no_manifest = false;
  app.add_option("--format", ctx.format, "Output format")
      ->check(CLI::IsMember({"auto", "json", "csv"}));
  app.add_option("--seed", seed, "Random seed (default: time derived, always logged)");
  app.add_option("--manifest", manifest_path, "Run manifest path");
  app.add_flag("--no-manifest", no_manifest, "Skip the run manifest");
  app.add_option("--threads", ctx.threads, "Worker threads")->check(CLI::Range(1u, 256u));

  std::string weights, sigma, method = "urn", family = "linear";
  std::size_t n_samples = 1, k = 1;
  bool report = true, normalize_first = false;
  double parameter = 1.0, tol = 1e-9, tail_tol = 1e-12;
  int max_label = 10;

  auto* pmf = app.add_subcommand("pmf", "Probability of one draw order");
  pmf->add_option("--weights", weights, "Weight spec (JSON or file)")->required();
  pmf->add_option("--sigma", sigma, "Draw order, e.g. 3,2,1")->required();

  auto* sample = app.add_subcommand("sample", "Draw permutations from the model");
  sample->add_option("--weights", weights, "Weight spec (JSON or file)")->required();
  sample->add_option("--n-samples", n_samples, "Number of draws");
  sample->add_option("--method", method, "Sampler")->check(CLI::IsMember({"urn", "exponential"}));

  auto* topk_cmd = app.add_subcommand("topk", "Top-k distances between the Luce and product laws");
  topk_cmd->add_option("--weights", weights, "Weight spec (JSON or file)")->required();
  topk_cmd->add_option("--k", k, "Prefix length")->required();
  topk_cmd->add_flag("--report", report, "Emit the full distance report (default)");
  topk_cmd->add_flag("--normalize", normalize_first, "Scale weights to sum to 1 first");

  auto* table_cmd = app.add_subcommand("bottom-table", "Limiting P(label is last card)");
  table_cmd->add_option("--family", family, "linear, constant, log or log-loglog");
  table_cmd->add_option("--parameter", parameter, "Family slope/value/beta");
  table_cmd->add_option("--max-label", max_label, "Last label in the table");
  table_cmd->add_option("--tol", tol, "Quadrature tolerance")->check(CLI::PositiveNumber);
  table_cmd->add_option("--tail-tol", tail_tol, "Infinite-product truncation tolerance")
      ->check(CLI::PositiveNumber);

  auto* conv_cmd = app.add_subcommand("converge-test", "Classify a weight sequence");
  conv_cmd->add_option("--family", family, "linear, constant, log or log-loglog")->required();
  conv_cmd->add_option("--parameter", parameter, "Family slope/value/beta");

  ArrangementArgs arr_args;
  auto* arr_cmd = app.add_subcommand("arrangement", "Hyperplane chamber walks");
  arr_cmd->require_subcommand(1);
  auto add_model_options = [&](CLI::App* c) {
    c->add_option("--kind", arr_args.kind, "braid or boolean")
        ->check(CLI::IsMember({"braid", "boolean"}));
    c->add_option("--model", arr_args.model, "tsetlin, riffle, ehrenfest, coloring or custom")
        ->check(CLI::IsMember({"tsetlin", "riffle", "ehrenfest", "coloring", "custom"}));
    c->add_option("--weights", arr_args.weights, "Tsetlin weight spec");
    c->add_option("--n", arr_args.n, "Deck size for riffle");
    c->add_option("--dim", arr_args.dim, "Dimension for ehrenfest");
    c->add_option("--graph", arr_args.graph, "Edge list file for coloring");
    c->add_option("--faces", arr_args.faces, "Face table JSON for custom");
    c->add_option("--start", arr_args.start, "Starting / reference chamber");
  };
  auto* sim_cmd = arr_cmd->add_subcommand("sim", "Stream chambers visited by the walk");
  add_model_options(sim_cmd);
  sim_cmd->add_option("--steps", arr_args.steps, "Number of steps");
  auto* stat_cmd = arr_cmd->add_subcommand("stationary", "Stationary law by a direct solve");
  add_model_options(stat_cmd);
  stat_cmd->add_flag("--exact", arr_args.exact, "Direct linear solve");
  auto* bd_cmd = arr_cmd->add_subcommand("sample-bd", "Exact stationary draws by urn ordering");
  add_model_options(bd_cmd);
  bd_cmd->add_option("--samples", arr_args.samples, "Number of draws");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kSuccess;
    err << app.help();
    return kUsageError;
  }

  ctx.seed = seed ? *seed : time_seed();
  err << "luce: seed " << ctx.seed << '\n';

  int code = kSuccess;
  try {
    if (pmf->parsed())
      code = run_pmf(ctx, weights, sigma);
    else if (sample->parsed())
      code = run_sample(ctx, weights, n_samples, method);
    else if (topk_cmd->parsed())
      code = run_topk(ctx, weights, k, normalize_first);
    else if (table_cmd->parsed())
      code = run_bottom_table(ctx, family, parameter, max_label, tol, tail_tol);
    else if (conv_cmd->parsed())
      code = run_converge_test(ctx, family, parameter);
    else if (sim_cmd->parsed())
      code = run_arrangement(ctx, "sim", arr_args);
    else if (stat_cmd->parsed())
      code = run_arrangement(ctx, "stationary", arr_args);
    else if (bd_cmd->parsed())
      code = run_arrangement(ctx, "sample-bd", arr_args);
  } catch (const PreconditionViolation& e) {
    err << "luce: precondition violated: " << e.what() << '\n';
    code = kPreconditionViolation;
  } catch (const NumericalFailure& e) {
    err << "luce: numerical failure: " << e.what() << '\n';
    code = kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "luce: " << e.what() << '\n';
    code = kUsageError;
  }
  out.flush();

  if (!no_manifest) {
    if (manifest_path.empty()) {
      const char* dir = std::getenv(kOutputDirEnv);
      manifest_path = (std::filesystem::path(dir && *dir ? dir : ".") / "luce-manifest.json").string();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_manifest(manifest_path, args, ctx, seconds, code, err);
  }
  return code;
}

} // namespace luce::cli
