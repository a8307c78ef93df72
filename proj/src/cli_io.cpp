#include "logitgraph/cli_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <optional>
#include <sstream>

#include "logitgraph/error.hpp"
#include "logitgraph/homeo.hpp"

namespace logitgraph {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------- reading

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::exception& e) {
    throw ParseError("", std::string("malformed JSON: ") + e.what());
  }
}

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

void expect_object(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ParseError(path.empty() ? "document" : path, "must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
      throw ParseError(join_path(path, it.key()), "is not a recognized field");
}

const json& field(const json& obj, const std::string& base, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(join_path(base, key), "is missing");
  return *it;
}

std::size_t read_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 1)
    throw ParseError(path, "must be a positive integer");
  return j.get<std::size_t>();
}

double read_real(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "is not a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ParseError(path, "is not finite");
  return v;
}

const json& expect_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "must be an array");
  return j;
}

void expect_length(const json& j, const std::string& path, std::size_t expected) {
  if (j.size() != expected)
    throw ParseError(path, "length " + std::to_string(j.size()) + " ≠ " + std::to_string(expected));
}

Vector read_vector(const json& j, const std::string& path, std::optional<std::size_t> expected) {
  expect_array(j, path);
  if (expected) expect_length(j, path, *expected);
  Vector v;
  v.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) v.push_back(read_real(j[k], index_path(path, k)));
  return v;
}

// Rows are checked before the row count so that the first reported error
// is the innermost one.
std::vector<Vector> read_tensors(const json& j, const std::string& path, std::size_t count,
                                 const std::vector<std::size_t>& lengths) {
  expect_array(j, path);
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < j.size(); ++i)
    rows.push_back(read_vector(j[i], index_path(path, i),
                               i < lengths.size() ? std::optional(lengths[i]) : std::nullopt));
  expect_length(j, path, count);
  return rows;
}

Game read_game(const json& j, const std::string& base) {
  expect_object(j, base, {"players", "actions", "payoffs"});
  const std::size_t players = read_count(field(j, base, "players"), join_path(base, "players"));
  const std::string actions_path = join_path(base, "actions");
  const json& actions = expect_array(field(j, base, "actions"), actions_path);
  expect_length(actions, actions_path, players);
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < players; ++i)
    counts.push_back(read_count(actions[i], index_path(actions_path, i)));
  const StrategicGameForm form(counts);
  std::vector<Vector> payoffs =
      read_tensors(field(j, base, "payoffs"), join_path(base, "payoffs"), players,
                   std::vector<std::size_t>(players, form.profile_count()));
  return Game(form, std::move(payoffs));
}

std::vector<Vector> read_profile_rows(const json& j, const std::string& path,
                                      const StrategicGameForm& form) {
  return read_tensors(j, path, form.num_players(), form.action_counts());
}

// ---------------------------------------------------------------- writing

std::string real(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_scalar(const ordered_json& j) { return !j.is_array() && !j.is_object(); }

void emit(const ordered_json& j, std::string& out, int depth) {
  const auto pad = [&](int d) { out.append(static_cast<std::size_t>(2 * d), ' '); };
  switch (j.type()) {
    case ordered_json::value_t::number_float:
      out += real(j.get<double>());
      return;
    case ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      if (std::all_of(j.begin(), j.end(), is_scalar)) {
        out += '[';
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) out += ", ";
          emit(j[k], out, depth);
        }
        out += ']';
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        pad(depth + 1);
        emit(j[k], out, depth + 1);
        out += k + 1 < j.size() ? ",\n" : "\n";
      }
      pad(depth);
      out += ']';
      return;
    }
    case ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t k = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++k) {
        pad(depth + 1);
        out += ordered_json(it.key()).dump() + ": ";
        emit(it.value(), out, depth + 1);
        out += k + 1 < j.size() ? ",\n" : "\n";
      }
      pad(depth);
      out += '}';
      return;
    }
    default:
      out += j.dump();
  }
}

std::string document(const ordered_json& j) {
  std::string out;
  emit(j, out, 0);
  out += '\n';
  return out;
}

ordered_json tensors(const std::vector<Vector>& rows) {
  ordered_json a = ordered_json::array();
  for (const auto& r : rows) a.push_back(r);
  return a;
}

ordered_json form_json(const StrategicGameForm& form) {
  return ordered_json{{"players", form.num_players()}, {"actions", form.action_counts()}};
}

ordered_json game_json(const Game& g) {
  ordered_json j = form_json(g.form());
  j["payoffs"] = tensors(g.payoffs());
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

class LongCsv {
 public:
  LongCsv() : out_("field,player,index,value\n") {}

  void tensors(const char* name, const std::vector<Vector>& rows) {
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t k = 0; k < rows[i].size(); ++k)
        out_ += std::string(name) + "," + std::to_string(i) + "," + std::to_string(k) + "," +
                real(rows[i][k]) + "\n";
  }
  void scalar(const char* name, const std::string& value) {
    out_ += std::string(name) + ",,," + value + "\n";
  }
  std::string str() const { return out_; }

 private:
  std::string out_;
};

const char* kind_name(GraphKind kind) { return kind == GraphKind::nash ? "nash" : "logit"; }

std::string actions_label(const StrategicGameForm& form) {
  std::string s;
  for (std::size_t m : form.action_counts()) s += (s.empty() ? "" : "x") + std::to_string(m);
  return s;
}

}  // namespace

Game parse_game(std::string_view text) { return read_game(parse_json(text), ""); }

TargetPoint parse_target_point(std::string_view text, bool project_tilde) {
  const json j = parse_json(text);
  expect_object(j, "", {"tilde_u", "y_bar"});
  const json& y = expect_array(field(j, "", "y_bar"), "y_bar");
  if (y.empty()) throw ParseError("y_bar", "must name at least one player");
  TargetPoint t;
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < y.size(); ++i) {
    t.y_bar.push_back(read_vector(y[i], index_path("y_bar", i), std::nullopt));
    if (t.y_bar.back().empty()) throw ParseError(index_path("y_bar", i), "must be nonempty");
    counts.push_back(t.y_bar.back().size());
  }
  const StrategicGameForm form(counts);
  t.tilde_u = read_tensors(field(j, "", "tilde_u"), "tilde_u", form.num_players(),
                           std::vector<std::size_t>(form.num_players(), form.profile_count()));
  if (project_tilde) {
    t.tilde_u = project_zero_mean(form, t.tilde_u);
    return t;
  }
  const MixedProfile uniform = uniform_profile(form);
  for (std::size_t i = 0; i < form.num_players(); ++i) {
    const Vector means = contract_opponents(form, t.tilde_u[i], i, uniform);
    double worst = 0.0;
    for (double m : means) worst = std::max(worst, std::abs(m));
    if (worst > 1e-6)
      throw ParseError(index_path("tilde_u", i),
                       "has opponent mean " + format_number(worst) + " above 1e-6");
  }
  return t;
}

GraphPoint parse_graph_point(std::string_view text) {
  const json j = parse_json(text);
  expect_object(j, "", {"kind", "n", "game", "profile", "residual"});
  const json& kind = field(j, "", "kind");
  if (kind != "nash" && kind != "logit") throw ParseError("kind", "must be \"nash\" or \"logit\"");
  Game game = read_game(field(j, "", "game"), "game");
  MixedProfile x{read_profile_rows(field(j, "", "profile"), "profile", game.form())};
  try {
    validate_profile(game.form(), x);
  } catch (const InvalidInput& e) {
    throw ParseError("profile", std::string("is not a mixed profile: ") + e.what());
  }
  std::optional<double> n;
  if (const json& nj = field(j, "", "n"); !nj.is_null()) n = read_real(nj, "n");
  if (kind == "logit" && !n) throw ParseError("n", "is required for a logit point");
  return GraphPoint{std::move(game), std::move(x),
                    kind == "nash" ? GraphKind::nash : GraphKind::logit, n,
                    read_real(field(j, "", "residual"), "residual")};
}

std::string to_json(const Game& game) { return document(game_json(game)); }

std::string to_json(const TargetPoint& t) {
  return document(ordered_json{{"tilde_u", tensors(t.tilde_u)}, {"y_bar", tensors(t.y_bar)}});
}

std::string to_json(const KMRepresentation& km) {
  return document(ordered_json{{"tilde_u", tensors(km.tilde_u)}, {"bar_u", tensors(km.bar_u)}});
}

std::string to_json(const GraphPoint& point) {
  ordered_json j{{"kind", kind_name(point.kind)}};
  j["n"] = point.n ? ordered_json(*point.n) : ordered_json(nullptr);
  j["game"] = game_json(point.game);
  j["profile"] = tensors(point.profile.strategies);
  j["residual"] = point.residual;
  return document(j);
}

std::string to_json(const PathTrace& trace) {
  ordered_json entries = ordered_json::array();
  for (const auto& e : trace.entries)
    entries.push_back(ordered_json{{"n", e.n}, {"x", tensors(e.x.strategies)}, {"residual", e.residual}});
  return document(ordered_json{{"game", game_json(trace.game)},
                               {"entries", entries},
                               {"terminal_nash_residual", trace.terminal_nash_residual},
                               {"fold_exits", trace.fold_exits}});
}

std::string to_json(const ConvergenceReport& report) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.rows)
    rows.push_back(ordered_json{{"n", r.n},
                                {"sup_gap_x", r.sup_gap_x},
                                {"sup_gap_full", r.sup_gap_full},
                                {"lemma_bound", r.lemma_bound}});
  return document(ordered_json{{"form", form_json(report.form)},
                               {"seed", report.seed},
                               {"samples", report.samples},
                               {"bound_box", report.bound_box},
                               {"rows", rows}});
}

std::string to_json(const RankReport& report) {
  return document(ordered_json{{"n", report.n},
                               {"form", form_json(report.form)},
                               {"sample_points", report.sample_points},
                               {"seed", report.seed},
                               {"expected_rank", report.expected_rank},
                               {"numeric_rank", report.numeric_rank},
                               {"min_singular_value", report.min_singular_value},
                               {"fd_step", report.fd_step},
                               {"threshold", report.threshold},
                               {"passed", report.passed()}});
}

std::string to_json(const VerificationReport& report) {
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks)
    checks.push_back(ordered_json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return document(ordered_json{{"passed", report.passed()}, {"checks", checks}});
}

std::string to_csv(const TargetPoint& t) {
  LongCsv csv;
  csv.tensors("tilde_u", t.tilde_u);
  csv.tensors("y_bar", t.y_bar);
  return csv.str();
}

std::string to_csv(const KMRepresentation& km) {
  LongCsv csv;
  csv.tensors("tilde_u", km.tilde_u);
  csv.tensors("bar_u", km.bar_u);
  return csv.str();
}

std::string to_csv(const GraphPoint& point) {
  LongCsv csv;
  csv.scalar("kind", kind_name(point.kind));
  if (point.n) csv.scalar("n", real(*point.n));
  csv.tensors("payoff", point.game.payoffs());
  csv.tensors("probability", point.profile.strategies);
  csv.scalar("residual", real(point.residual));
  return csv.str();
}

std::string to_csv(const PathTrace& trace) {
  std::string out = "n,player,action,probability,residual\n";
  for (const auto& e : trace.entries)
    for (std::size_t i = 0; i < e.x.num_players(); ++i)
      for (std::size_t a = 0; a < e.x[i].size(); ++a)
        out += real(e.n) + "," + std::to_string(i) + "," + std::to_string(a) + "," + real(e.x[i][a]) +
               "," + real(e.residual) + "\n";
  return out;
}

std::string to_csv(const ConvergenceReport& report) {
  std::string out = "n,sup_gap_x,sup_gap_full,lemma_bound\n";
  for (const auto& r : report.rows)
    out += real(r.n) + "," + real(r.sup_gap_x) + "," + real(r.sup_gap_full) + "," +
           real(r.lemma_bound) + "\n";
  return out;
}

std::string to_csv(const RankReport& r) {
  return "n,actions,sample_points,seed,expected_rank,numeric_rank,min_singular_value,fd_step,"
         "threshold,passed\n" +
         real(r.n) + "," + actions_label(r.form) + "," + std::to_string(r.sample_points) + "," +
         std::to_string(r.seed) + "," + std::to_string(r.expected_rank) + "," +
         std::to_string(r.numeric_rank) + "," + real(r.min_singular_value) + "," +
         real(r.fd_step) + "," + real(r.threshold) + "," + (r.passed() ? "true" : "false") + "\n";
}

std::string to_csv(const VerificationReport& report) {
  std::string out = "name,passed,detail\n";
  for (const auto& c : report.checks)
    out += csv_field(c.name) + "," + (c.passed ? "true" : "false") + "," + csv_field(c.detail) + "\n";
  return out;
}

// ---------------------------------------------------------------- CLI

namespace {

std::string read_input(const std::string& path) {
  std::ostringstream buf;
  if (path == "-") {
    buf << std::cin.rdbuf();
    return buf.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path);
  buf << in.rdbuf();
  return buf.str();
}

// "d:m1,m2,...": d players with the listed action counts.
StrategicGameForm parse_form(const std::string& spec) {
  const auto colon = spec.find(':');
  const auto bad = [&] { return InvalidInput("--form expects d:m1,...,md, got \"" + spec + "\""); };
  if (colon == std::string::npos) throw bad();
  std::vector<std::size_t> counts;
  std::size_t players = 0;
  try {
    std::size_t used = 0;
    players = std::stoul(spec.substr(0, colon), &used);
    if (used != colon) throw bad();
    std::stringstream rest(spec.substr(colon + 1));
    for (std::string item; std::getline(rest, item, ',');) {
      const unsigned long m = std::stoul(item, &used);
      if (used != item.size() || m == 0) throw bad();
      counts.push_back(m);
    }
  } catch (const std::logic_error&) {
    throw bad();
  }
  if (players == 0 || counts.size() != players) throw bad();
  return StrategicGameForm(counts);
}

template <class T>
std::string render(const T& value, const std::string& format) {
  return format == "csv" ? to_csv(value) : to_json(value);
}

void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!(file << text)) throw InvalidInput("cannot write " + path);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nash and logit equilibrium graphs of finite normal-form games.", "logitgraph"};
  app.require_subcommand(1);
  app.fallthrough();

  double tol = 1e-12;
  std::string out_path;
  std::string format;
  bool project_tilde = false;
  app.add_option("--tol", tol, "Solver tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--out", out_path, "Write the result to this file instead of stdout");
  app.add_option("--format", format, "Output format (trace defaults to csv, the rest to json)")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_flag("--project-tilde", project_tilde,
               "Project tilde_u of a target point to zero opponent means");

  std::string game_path, target_path, verify_arg, form_spec;
  double n = 0.0, n_final = 0.0, n_start = 0.0, box = 10.0, fd_step = 1e-6;
  std::vector<double> n_list;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  auto* decompose = app.add_subcommand("decompose", "Kohlberg-Mertens decomposition of a game");
  decompose->add_option("game", game_path, "Game file, - for stdin")->required();

  auto* solve = app.add_subcommand("solve", "Logit equilibrium at --n on the principal branch");
  solve->add_option("--n", n, "Logit parameter")->required();
  solve->add_option("game", game_path, "Game file, - for stdin")->required();

  auto* trace = app.add_subcommand("trace", "Follow the principal logit branch up to --n-final");
  trace->add_option("--n-final", n_final, "Last logit parameter")->required();
  trace->add_option("--n-start", n_start, "First logit parameter (default min(1e-3, n_final/10))");
  trace->add_option("game", game_path, "Game file, - for stdin")->required();

  auto* invert_nash = app.add_subcommand("invert-nash", "Nash graph point over a target point");
  invert_nash->add_option("target", target_path, "Target point file, - for stdin")->required();

  auto* invert_logit = app.add_subcommand("invert-logit", "Logit graph point over a target point");
  invert_logit->add_option("--n", n, "Logit parameter")->required();
  invert_logit->add_option("target", target_path, "Target point file, - for stdin")->required();

  auto* verify = app.add_subcommand("verify", "Run property checks on a game, or generic ones");
  verify->add_option("game", verify_arg, "Game file, or none")->required();
  verify->add_option("--seed", seed, "Seed of the generic checks")->capture_default_str();

  auto* study = app.add_subcommand("study", "Nash vs logit inverse gaps over random targets");
  study->add_option("--form", form_spec, "d:m1,...,md")->required();
  study->add_option("--n-list", n_list, "Ascending logit parameters")->required()->delimiter(',');
  study->add_option("--samples", samples, "Target points")->required();
  study->add_option("--seed", seed, "Sampling seed")->required();
  study->add_option("--box", box, "Entries are drawn from [-box, box]")->capture_default_str();

  auto* rank = app.add_subcommand("rank", "Finite-difference rank of the logit inverse");
  rank->add_option("--n", n, "Logit parameter")->required();
  rank->add_option("--form", form_spec, "d:m1,...,md")->required();
  rank->add_option("--samples", samples, "Sample points")->required();
  rank->add_option("--seed", seed, "Sampling seed")->required();
  rank->add_option("--fd-step", fd_step, "Central difference step")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  try {
    std::string text;
    int code = kExitOk;
    if (*decompose) {
      text = render(km_decompose(parse_game(read_input(game_path))), format);
    } else if (*solve) {
      const Game game = parse_game(read_input(game_path));
      if (!(n > 0.0)) throw InvalidInput("--n must be positive");
      const PathTrace path = trace_logit_path(game, n, std::min(kDefaultStartN, n / 10.0), tol);
      const PathEntry& last = path.entries.back();
      text = render(GraphPoint{game, last.x, GraphKind::logit, n, last.residual}, format);
    } else if (*trace) {
      const Game game = parse_game(read_input(game_path));
      const double start = trace->count("--n-start") ? n_start : std::min(kDefaultStartN, n_final / 10.0);
      text = render(trace_logit_path(game, n_final, start, tol), format.empty() ? "csv" : format);
    } else if (*invert_nash) {
      text = render(phi_inv(parse_target_point(read_input(target_path), project_tilde)), format);
    } else if (*invert_logit) {
      text = render(phi_n_inv(n, parse_target_point(read_input(target_path), project_tilde), tol),
                    format);
    } else if (*verify) {
      std::optional<Game> game;
      if (verify_arg != "none") game = parse_game(read_input(verify_arg));
      const VerificationReport report = run_verification(game, seed);
      text = render(report, format);
      if (!report.passed()) code = kExitInvalid;
    } else if (*study) {
      text = render(convergence_study(parse_form(form_spec), n_list, samples, seed, box, tol), format);
    } else if (*rank) {
      text = render(immersion_rank_check(n, parse_form(form_spec), samples, seed, fd_step), format);
    }
    write_output(text, out_path, out);
    return code;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConvergence;
  }
}

}  // namespace logitgraph
