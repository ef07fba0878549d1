#include "apd/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "apd/builtin_models.hpp"
#include "apd/decoders.hpp"
#include "apd/metrics.hpp"
#include "apd/model_io.hpp"
#include "apd/parallel.hpp"
#include "apd/sweep.hpp"
#include "apd/verify.hpp"
#include "json.hpp"

namespace apd {
namespace {

using nlohmann::ordered_json;

constexpr const char* kSweepHeader = "decoder,R,W,M,mean_k,se_k,tv,se_tv,throughput,seed,trials";

/// Shortest round-trip decimal form.
std::string fmt_num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

std::string timestamp() {
  std::time_t t = 0;
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde != nullptr && *sde != '\0') {
    t = static_cast<std::time_t>(std::stoll(sde));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    T value{};
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ValidationError(std::string("bad value '") + item + "' in " + what + " list");
    }
    out.push_back(value);
  }
  return out;
}

std::vector<DecoderKind> parse_decoders(const std::string& text) {
  std::vector<DecoderKind> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(DecoderKind::parse(item));
  }
  return out;
}

ordered_json config_json(const DecoderConfig& c) {
  return ordered_json{{"R", c.R},
                      {"W", c.W},
                      {"M", c.M},
                      {"n_max", c.n_max},
                      {"temperature", c.temperature},
                      {"top_p", c.top_p},
                      {"seed", c.seed},
                      {"process_small_model", c.process_small_model},
                      {"independent_draws", c.independent_draws},
                      {"fresh_noise_per_iteration", c.fresh_noise_per_iteration}};
}

ordered_json manifest(const std::string& command, ordered_json config, std::uint64_t seed,
                      const std::vector<std::string>& model_specs) {
  ordered_json digests = ordered_json::object();
  for (const auto& spec : model_specs) digests[spec] = model_digest(spec);
  return ordered_json{{"command", command},          {"config", std::move(config)},
                      {"seed", seed},                {"model_digests", std::move(digests)},
                      {"artifact_version", kArtifactVersion}, {"timestamp", timestamp()}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << content;
  if (!f) throw ValidationError("cannot write " + path.string());
}

// Shared decoder flags. Unset sizes resolve from the model horizon.
struct DecoderFlags {
  double R = 0.5;
  std::size_t W = 0;
  std::size_t M = 0;
  std::size_t n_max = 0;
  double temperature = 1.0;
  double top_p = 1.0;
  std::uint64_t seed = 0;
  bool process_small_model = false;
  bool independent_draws = false;
  bool fresh_noise_per_iteration = false;

  void add_common(CLI::App& app) {
    app.add_option("--n-max", n_max, "Maximum generation length (default: model horizon)");
    app.add_option("--temperature", temperature, "Temperature applied to marginals");
    app.add_option("--top-p", top_p, "Nucleus mass applied to marginals");
    app.add_option("--seed", seed, "Base seed");
    app.add_flag("--process-small-model", process_small_model,
                 "Also apply temperature/top-p to the small model");
    app.add_flag("--independent-draws", independent_draws,
                 "Use independent Gumbel noise for the APD target");
    app.add_flag("--fresh-noise-per-iteration", fresh_noise_per_iteration,
                 "Redraw noise for every iteration instead of keying it by position");
  }

  DecoderConfig resolve(const SequenceModel& model) const {
    DecoderConfig c;
    c.R = R;
    c.n_max = n_max == 0 ? model.horizon() : n_max;
    c.W = W == 0 ? c.n_max : W;
    c.M = M == 0 ? c.n_max : M;
    c.temperature = temperature;
    c.top_p = top_p;
    c.seed = seed;
    c.process_small_model = process_small_model;
    c.independent_draws = independent_draws;
    c.fresh_noise_per_iteration = fresh_noise_per_iteration;
    c.validate();
    return c;
  }
};

ordered_json trace_json(const DecodeTrace& trace, const Vocab& vocab) {
  ordered_json tokens = ordered_json::array();
  for (TokenId t : trace.tokens) tokens.push_back(vocab.name(t));
  ordered_json groups = ordered_json::array();
  for (const auto& g : trace.groups) groups.push_back({g.start, g.end});
  return ordered_json{{"tokens", tokens},
                      {"groups", groups},
                      {"accepted_counts", trace.accepted_counts},
                      {"iteration_costs", trace.iteration_costs},
                      {"masked_lengths", trace.masked_lengths},
                      {"iterations", trace.iterations()},
                      {"mean_parallel_tokens", trace.mean_parallel_tokens()},
                      {"total_cost", trace.total_cost()}};
}

std::string render_groups(const DecodeTrace& trace, const Vocab& vocab) {
  std::string s;
  for (const auto& g : trace.groups) {
    if (!s.empty()) s += ' ';
    s += '[';
    for (std::size_t i = g.start; i <= g.end; ++i) {
      if (i != g.start) s += ' ';
      s += vocab.name(trace.tokens[i]);
    }
    s += ']';
  }
  return s;
}

// -- decode ----------------------------------------------------------------

struct DecodeCommand {
  std::string model;
  std::string small_model;
  std::string decoder = "ar";
  std::string out_path;
  std::string format = "text";
  DecoderFlags flags;

  void add(CLI::App& app) {
    app.add_option("--model", model, "Marginal model: file or builtin:<name>")->required();
    app.add_option("--small-model", small_model, "Verifier model for apd (default: --model)");
    app.add_option("--decoder", decoder, "ar | semi:<k> | oneshot | apd");
    app.add_option("--R", flags.R, "Mixture weight of the marginal model");
    app.add_option("--W", flags.W, "Recompute KV window (default: n-max)");
    app.add_option("--M", flags.M, "Maximum masked lookahead (default: n-max)");
    flags.add_common(app);
    app.add_option("--out", out_path, "Write the trace as JSON to this file");
    app.add_option("--format", format, "Stdout format")
        ->check(CLI::IsMember({"text", "csv", "json"}));
  }

  int run(std::ostream& out) const {
    const DecoderKind kind = DecoderKind::parse(decoder);
    const ModelPtr p_D = resolve_model(model);
    ModelPtr p_hat;
    std::vector<std::string> specs = {model};
    if (kind.needs_small_model()) {
      const std::string s = small_model.empty() ? model : small_model;
      p_hat = resolve_model(s);
      if (s != model) specs.push_back(s);
      if (p_hat->vocab() != p_D->vocab()) {
        throw ValidationError("vocabulary mismatch: --model and --small-model use different "
                              "token sets");
      }
    }
    const DecoderConfig config = flags.resolve(*p_D);
    const DecodeTrace trace = decode(kind, *p_D, p_hat.get(), config);
    trace.check_invariants();

    ordered_json cfg = config_json(config);
    cfg["decoder"] = kind.name();
    const ordered_json doc{{"manifest", manifest("decode", cfg, config.seed, specs)},
                           {"trace", trace_json(trace, p_D->vocab())}};
    if (!out_path.empty()) write_file(out_path, doc.dump(2) + "\n");

    if (format == "json") {
      out << doc.dump(2) << "\n";
    } else if (format == "csv") {
      out << "iteration,start,end,k,cost,tokens\n";
      for (std::size_t i = 0; i < trace.groups.size(); ++i) {
        const auto& g = trace.groups[i];
        std::string toks;
        for (std::size_t j = g.start; j <= g.end; ++j) {
          if (j != g.start) toks += ' ';
          toks += p_D->vocab().name(trace.tokens[j]);
        }
        out << i << ',' << g.start << ',' << g.end << ',' << g.width() << ','
            << fmt_num(trace.iteration_costs[i]) << ',' << toks << "\n";
      }
    } else {
      out << render_groups(trace, p_D->vocab()) << "\n";
      out << "decoder=" << kind.name() << " tokens=" << trace.tokens.size()
          << " iterations=" << trace.iterations()
          << " mean_parallel_tokens=" << fmt_num(trace.mean_parallel_tokens())
          << " total_cost=" << fmt_num(trace.total_cost()) << "\n";
    }
    return kExitOk;
  }
};

// -- verify ----------------------------------------------------------------

struct VerifyCommand {
  std::string suite;
  std::string out_path;

  void add(CLI::App& app) {
    app.add_option("suite", suite, "coupler | coupling | desiderata | bonferroni | chain-rule | "
                                   "window | all")
        ->required();
    app.add_option("--out", out_path, "Write the report as JSON to this file");
  }

  int run(std::ostream& out) const {
    std::vector<std::string> names;
    if (suite == "all") {
      names = verify_suite_names();
    } else {
      run_verify_suite_name_check();
      names = {suite};
    }
    bool all_passed = true;
    ordered_json reports = ordered_json::array();
    for (const auto& name : names) {
      const SuiteReport report = run_verify_suite(name);
      ordered_json checks = ordered_json::array();
      for (const auto& c : report.checks) {
        out << (c.passed ? "PASS " : "FAIL ") << report.suite << ": " << c.name
            << " measured=" << fmt_num(c.measured) << ' ' << c.relation << " threshold="
            << fmt_num(c.threshold) << "\n";
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"measured", c.measured},
                          {"relation", c.relation},
                          {"threshold", c.threshold}});
      }
      all_passed = all_passed && report.passed();
      reports.push_back({{"suite", report.suite}, {"passed", report.passed()}, {"checks", checks}});
    }
    out << (all_passed ? "ALL PASSED" : "FAILURES PRESENT") << "\n";
    if (!out_path.empty()) {
      const ordered_json doc{
          {"manifest", manifest("verify", ordered_json{{"suite", suite}}, 0, {})},
          {"reports", reports}};
      write_file(out_path, doc.dump(2) + "\n");
    }
    return all_passed ? kExitOk : kExitValidation;
  }

  void run_verify_suite_name_check() const {
    const auto names = verify_suite_names();
    if (std::find(names.begin(), names.end(), suite) == names.end()) {
      throw ValidationError("unknown verify suite '" + suite + "'");
    }
  }
};

// -- sweep -----------------------------------------------------------------

struct SweepCommand {
  std::string model = "builtin:dep4";
  std::string small_model;
  std::string decoders = "ar,semi:2,semi:4,apd";
  std::string Rs = "0,0.25,0.5,0.75,1";
  std::string Ws;
  std::string Ms;
  std::size_t trials = 10000;
  std::string out_path;
  std::string format = "csv";
  double alpha = 1.0;
  double beta = 0.0;
  DecoderFlags flags;

  void add(CLI::App& app) {
    app.add_option("--model", model, "Marginal model: file or builtin:<name>");
    app.add_option("--small-model", small_model, "Verifier model for apd (default: --model)");
    app.add_option("--decoder", decoders, "Comma-separated decoders; empty for an empty grid");
    app.add_option("--R", Rs, "Comma-separated mixture weights (apd only)");
    app.add_option("--W", Ws, "Comma-separated recompute windows (default: n-max)");
    app.add_option("--M", Ms, "Comma-separated lookahead caps (default: n-max)");
    app.add_option("--trials", trials, "Decodes per grid point");
    app.add_option("--alpha", alpha, "Cost per attention row pair");
    app.add_option("--beta", beta, "Fixed cost per iteration");
    flags.add_common(app);
    app.add_option("--out", out_path, "Output stem; writes <stem>.csv and <stem>.json");
    app.add_option("--format", format, "Stdout format when --out is absent")
        ->check(CLI::IsMember({"csv", "json"}));
  }

  int run(std::ostream& out) const {
    const ModelPtr p_D = resolve_model(model);
    const std::string small_spec = small_model.empty() ? model : small_model;
    const ModelPtr p_hat = small_model.empty() ? p_D : resolve_model(small_spec);
    if (p_hat->vocab() != p_D->vocab()) {
      throw ValidationError("vocabulary mismatch: --model and --small-model use different "
                            "token sets");
    }
    std::vector<std::string> specs = {model};
    if (small_spec != model) specs.push_back(small_spec);

    const DecoderConfig base = flags.resolve(*p_D);
    const auto kinds = parse_decoders(decoders);
    const auto r_list = parse_list<double>(Rs, "R");
    auto w_list = parse_list<std::size_t>(Ws, "W");
    auto m_list = parse_list<std::size_t>(Ms, "M");
    if (w_list.empty()) w_list = {base.W};
    if (m_list.empty()) m_list = {base.M};
    std::vector<SweepSpec> grid = expand_grid(kinds, r_list, w_list, m_list, base);
    sort_grid(grid);

    CostModelParams cost{alpha, beta};
    cost.validate();
    const auto points = run_sweep(*p_D, p_hat.get(), grid, trials, cost);

    ordered_json cfg = config_json(base);
    cfg["decoders"] = decoders;
    cfg["R_grid"] = r_list;
    cfg["W_grid"] = w_list;
    cfg["M_grid"] = m_list;
    cfg["trials"] = trials;
    cfg["alpha"] = alpha;
    cfg["beta"] = beta;
    const ordered_json man = manifest("sweep", cfg, base.seed, specs);

    std::string csv = "# " + man.dump() + "\n" + kSweepHeader + "\n";
    ordered_json rows = ordered_json::array();
    for (const auto& pt : points) {
      const bool has_R = pt.kind.type == DecoderType::kAPD;
      // Both files carry the same doubles: the CSV text parses back exactly.
      csv += pt.kind.name() + "," + (has_R ? fmt_num(pt.config.R) : "") + "," +
             std::to_string(pt.config.W) + "," + std::to_string(pt.config.M) + "," +
             fmt_num(pt.mean_parallel_tokens) + "," + fmt_num(pt.se_parallel_tokens) + "," +
             fmt_num(pt.quality_tv) + "," + fmt_num(pt.se_quality_tv) + "," +
             fmt_num(pt.simulated_throughput) + "," + std::to_string(pt.config.seed) + "," +
             std::to_string(pt.trials) + "\n";
      rows.push_back({{"decoder", pt.kind.name()},
                      {"R", has_R ? ordered_json(pt.config.R) : ordered_json(nullptr)},
                      {"W", pt.config.W},
                      {"M", pt.config.M},
                      {"mean_k", pt.mean_parallel_tokens},
                      {"se_k", pt.se_parallel_tokens},
                      {"tv", pt.quality_tv},
                      {"se_tv", pt.se_quality_tv},
                      {"throughput", pt.simulated_throughput},
                      {"seed", pt.config.seed},
                      {"trials", pt.trials}});
    }
    const std::string json_text = ordered_json{{"manifest", man}, {"rows", rows}}.dump(2) + "\n";

    if (!out_path.empty()) {
      std::filesystem::path stem(out_path);
      if (stem.extension() == ".csv" || stem.extension() == ".json") stem.replace_extension();
      write_file(stem.string() + ".csv", csv);
      write_file(stem.string() + ".json", json_text);
      out << "wrote " << stem.string() << ".csv and " << stem.string() << ".json ("
          << points.size() << " rows)\n";
    } else {
      out << (format == "json" ? json_text : csv);
    }
    return kExitOk;
  }
};

// -- mi-gap ----------------------------------------------------------------

struct MiGapCommand {
  std::string model;
  std::string format = "text";

  void add(CLI::App& app) {
    app.add_option("--model", model, "Model: file or builtin:<name>")->required();
    app.add_option("--format", format, "Stdout format")
        ->check(CLI::IsMember({"text", "csv", "json"}));
  }

  int run(std::ostream& out) const {
    const ModelPtr m = resolve_model(model);
    const double gap = mutual_info_gap(*m);
    const double tv = total_variation(m->exact_sequence_distribution(), marginal_product(*m));
    if (format == "json") {
      out << ordered_json{{"manifest", manifest("mi-gap", ordered_json::object(), 0, {model})},
                          {"mi_gap_nats", gap},
                          {"tv_to_marginal_product", tv}}
                 .dump(2)
          << "\n";
    } else if (format == "csv") {
      out << "model,mi_gap_nats,tv_to_marginal_product\n"
          << model << ',' << fmt_num(gap) << ',' << fmt_num(tv) << "\n";
    } else {
      out << "mi_gap_nats=" << fmt_num(gap) << " tv_to_marginal_product=" << fmt_num(tv)
          << "\n";
    }
    return kExitOk;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive parallel decoding on exact toy sequence models", "apd"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kArtifactVersion);

  DecodeCommand decode_cmd;
  VerifyCommand verify_cmd;
  SweepCommand sweep_cmd;
  MiGapCommand mi_cmd;
  auto* decode_app = app.add_subcommand("decode", "Run one decode and print its parallel groups");
  auto* verify_app = app.add_subcommand("verify", "Run a property suite on built-in models");
  auto* sweep_app = app.add_subcommand("sweep", "Sweep decoder settings and write CSV/JSON");
  auto* mi_app = app.add_subcommand("mi-gap", "Mutual-information gap of one-shot sampling");
  decode_cmd.add(*decode_app);
  verify_cmd.add(*verify_app);
  sweep_cmd.add(*sweep_app);
  mi_cmd.add(*mi_app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << kArtifactVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (*decode_app) return decode_cmd.run(out);
    if (*verify_app) return verify_cmd.run(out);
    if (*sweep_app) return sweep_cmd.run(out);
    if (*mi_app) return mi_cmd.run(out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const TooLargeToEnumerate& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace apd
