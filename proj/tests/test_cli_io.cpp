#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "logitgraph/cli_io.hpp"
#include "logitgraph/error.hpp"
#include "logitgraph/homeo.hpp"

using namespace logitgraph;
using namespace fixtures;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Scratch files live in a per-process directory under the system temp dir.
std::string scratch(const std::string& name, const std::string& content) {
  const auto dir = std::filesystem::temp_directory_path() / "logitgraph_cli_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path, std::ios::binary) << content;
  return path.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

const char* kPennies = R"({"players":2,"actions":[2,2],"payoffs":[[1,-1,-1,1],[-1,1,1,-1]]})";
const char* kOnePlayer = R"({"players":1,"actions":[2],"payoffs":[[1,0]]})";
const char* kOneTarget = R"({"tilde_u":[[0,0]],"y_bar":[[1.5,0.5]]})";

std::string parse_error_message(std::string_view text) {
  try {
    parse_game(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parse_game examples") {
  const Game one = parse_game(kOnePlayer);
  CHECK(one.form() == StrategicGameForm({2}));
  CHECK(one.payoffs(0) == Vector{1, 0});

  // Player 1's action varies fastest: entry 1 is (a1 = 1, a2 = 0).
  const Game mp = parse_game(kPennies);
  const std::vector<std::size_t> a10{1, 0}, a01{0, 1};
  CHECK(mp.payoffs(0)[mp.form().index(a10)] == -1);
  CHECK(mp.payoffs(1)[mp.form().index(a10)] == 1);
  CHECK(mp.payoffs(1)[mp.form().index(a01)] == 1);
  CHECK(mp.payoffs() == matching_pennies().payoffs());

  try {
    parse_game(R"({"players":2,"actions":[2,2],"payoffs":[[1,2,3]]})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()) == "payoffs[0] length 3 ≠ 4");
    CHECK(e.path() == "payoffs[0]");
  }
}

TEST_CASE("parse_game rejects malformed input with a path") {
  CHECK(parse_error_message("{\"players\":1,").rfind("malformed JSON", 0) == 0);
  CHECK(parse_error_message("[1,2]") == "document must be a JSON object");
  CHECK(parse_error_message(R"({"actions":[2],"payoffs":[[1,0]]})") == "players is missing");
  CHECK(parse_error_message(R"({"players":1,"actions":[2],"payoffs":[[1,0]],"x":1})") ==
        "x is not a recognized field");
  CHECK(parse_error_message(R"({"players":0,"actions":[],"payoffs":[]})") ==
        "players must be a positive integer");
  CHECK(parse_error_message(R"({"players":1.5,"actions":[2],"payoffs":[[1,0]]})") ==
        "players must be a positive integer");
  CHECK(parse_error_message(R"({"players":2,"actions":[2],"payoffs":[[1,0]]})") ==
        "actions length 1 ≠ 2");
  CHECK(parse_error_message(R"({"players":1,"actions":[-2],"payoffs":[[1,0]]})") ==
        "actions[0] must be a positive integer");
  CHECK(parse_error_message(R"({"players":1,"actions":[2],"payoffs":[[1,"a"]]})") ==
        "payoffs[0][1] is not a number");
  CHECK(parse_error_message(R"({"players":1,"actions":[2],"payoffs":[[1,1e999]]})")
            .find("number overflow") != std::string::npos);
  CHECK(parse_error_message(R"({"players":2,"actions":[2,2],"payoffs":[[1,2,3,4]]})") ==
        "payoffs length 1 ≠ 2");
  CHECK(parse_error_message(R"({"players":1,"actions":[2],"payoffs":[5]})") ==
        "payoffs[0] must be an array");
  CHECK_THROWS_AS(parse_game(""), InvalidInput);
}

TEST_CASE("parse_target_point examples") {
  const TargetPoint t = parse_target_point(kOneTarget);
  CHECK(t.tilde_u == std::vector<Vector>{{0, 0}});
  CHECK(t.y_bar == std::vector<Vector>{{1.5, 0.5}});

  const char* offset = R"({"tilde_u":[[0.5,0.5]],"y_bar":[[1.5,0.5]]})";
  CHECK_THROWS_WITH_AS(parse_target_point(offset), "tilde_u[0] has opponent mean 0.5 above 1e-6",
                       ParseError);
  const TargetPoint p = parse_target_point(offset, true);
  CHECK(p.tilde_u == std::vector<Vector>{{0, 0}});

  // 2x2: player 1's slice for a1 = 0 is entries 0 and 2.
  const char* two = R"({"tilde_u":[[1,2,3,4],[0,0,0,0]],"y_bar":[[0,0],[0,0]]})";
  CHECK_THROWS_AS(parse_target_point(two), ParseError);
  const TargetPoint q = parse_target_point(two, true);
  CHECK(q.tilde_u[0] == Vector{-1, -1, 1, 1});

  CHECK_THROWS_AS(parse_target_point(R"({"tilde_u":[[0,0]],"y_bar":[]})"), ParseError);
  CHECK_THROWS_AS(parse_target_point(R"({"tilde_u":[[0,0,0]],"y_bar":[[1,2]]})"), ParseError);
  CHECK_THROWS_AS(parse_target_point(R"({"tilde_u":[[0,0]],"y_bar":[[]]})"), ParseError);
}

TEST_CASE("reals are written with 17 significant digits") {
  const Game g(StrategicGameForm({2}), {{0.1, 1.0 / 3.0}});
  const std::string text = to_json(g);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(text.find("0.33333333333333331") != std::string::npos);
}

TEST_CASE("serialized games and targets read back bit for bit") {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    const auto form = random_form(rng);
    std::vector<Vector> payoffs;
    std::uniform_real_distribution<double> wide(-1e6, 1e6);
    for (std::size_t i = 0; i < form.num_players(); ++i) {
      Vector v(form.profile_count());
      for (double& x : v) x = wide(rng) * std::pow(10.0, static_cast<int>(wide(rng)) % 20);
      payoffs.push_back(v);
    }
    const Game g(form, payoffs);
    const Game back = parse_game(to_json(g));
    REQUIRE(back.form() == g.form());
    for (std::size_t i = 0; i < form.num_players(); ++i)
      for (std::size_t j = 0; j < payoffs[i].size(); ++j)
        CHECK(same_bits(back.payoffs(i)[j], g.payoffs(i)[j]));

    const TargetPoint t = random_target(form, rng);
    const TargetPoint tb = parse_target_point(to_json(t));
    CHECK(tb.tilde_u == t.tilde_u);
    CHECK(tb.y_bar == t.y_bar);

    const GraphPoint point = phi_n_inv(2.0, t, 1e-12);
    const GraphPoint pb = parse_graph_point(to_json(point));
    CHECK(pb.kind == GraphKind::logit);
    CHECK(pb.n == 2.0);
    CHECK(pb.game.payoffs() == point.game.payoffs());
    CHECK(pb.profile.strategies == point.profile.strategies);
    CHECK(same_bits(pb.residual, point.residual));
  }
}

TEST_CASE("graph point JSON carries a null n for Nash points") {
  const GraphPoint p = phi_inv(parse_target_point(kOneTarget));
  const auto j = nlohmann::json::parse(to_json(p));
  CHECK(j["kind"] == "nash");
  CHECK(j["n"].is_null());
  const GraphPoint back = parse_graph_point(to_json(p));
  CHECK_FALSE(back.n.has_value());
  CHECK_THROWS_AS(parse_graph_point(R"({"kind":"logit","n":null,"game":)" + std::string(kOnePlayer) +
                                    R"(,"profile":[[0.5,0.5]],"residual":0})"),
                  ParseError);
  CHECK_THROWS_AS(parse_graph_point(R"({"kind":"nash","n":null,"game":)" + std::string(kOnePlayer) +
                                    R"(,"profile":[[0.7,0.7]],"residual":0})"),
                  ParseError);
}

TEST_CASE("csv layouts") {
  const PathTrace tr = trace_logit_path(matching_pennies(), 10.0, 1e-3, 1e-12);
  const std::string csv = to_csv(tr);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "n,player,action,probability,residual");
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    std::istringstream cells(line);
    std::string n, player, action, prob, res;
    std::getline(cells, n, ',');
    std::getline(cells, player, ',');
    std::getline(cells, action, ',');
    std::getline(cells, prob, ',');
    std::getline(cells, res, ',');
    CHECK(std::stod(prob) == 0.5);
    CHECK(std::stoul(player) < 2);
    CHECK(std::stoul(action) < 2);
  }
  CHECK(rows == tr.entries.size() * 4);

  VerificationReport v{{{"a, b", true, "say \"hi\""}}};
  CHECK(to_csv(v) == "name,passed,detail\n\"a, b\",true,\"say \"\"hi\"\"\"\n");
}

TEST_CASE("cli examples") {
  const std::string target = scratch("one_target.json", kOneTarget);
  const std::string one = scratch("one.json", kOnePlayer);
  const std::string pennies = scratch("pennies.json", kPennies);

  auto r = cli({"invert-nash", target});
  REQUIRE(r.code == 0);
  GraphPoint p = parse_graph_point(r.out);
  CHECK(p.game.payoffs(0) == Vector{0.5, 0.5});
  CHECK(p.profile[0] == Vector{1, 0});
  CHECK(p.residual == 0.0);

  r = cli({"solve", "--n", "1", one});
  REQUIRE(r.code == 0);
  p = parse_graph_point(r.out);
  const double e = std::exp(1.0);
  CHECK(p.profile[0][0] == doctest::Approx(e / (1 + e)).epsilon(1e-12));
  CHECK(p.profile[0][1] == doctest::Approx(1 / (1 + e)).epsilon(1e-12));
  CHECK(std::abs(p.profile[0][0] - 0.731058579) <= 5e-10);
  CHECK(p.n == 1.0);

  r = cli({"decompose", pennies});
  REQUIRE(r.code == 0);
  const auto km = nlohmann::json::parse(r.out);
  for (const auto& row : km["bar_u"])
    for (const auto& v : row) CHECK(v.get<double>() == 0.0);
  CHECK(km["tilde_u"][0] == nlohmann::json::parse("[1,-1,-1,1]"));
}

TEST_CASE("cli exit codes") {
  const std::string one = scratch("one.json", kOnePlayer);
  const std::string bad = scratch("bad.json", R"({"players":2,"actions":[2,2],"payoffs":[[1,2,3]]})");
  const std::string offset = scratch("offset.json", R"({"tilde_u":[[0.5,0.5]],"y_bar":[[1.5,0.5]]})");

  auto r = cli({"frobnicate"});
  CHECK(r.code == kExitInvalid);
  CHECK(r.err.find("Usage:") != std::string::npos);
  r = cli({"solve", "--n", "1", "--bogus", one});
  CHECK(r.code == kExitInvalid);
  CHECK(r.err.find("Usage:") != std::string::npos);
  CHECK(cli({}).code == kExitInvalid);
  CHECK(cli({"solve", one}).code == kExitInvalid);
  CHECK(cli({"decompose", one, "--format", "xml"}).code == kExitInvalid);

  r = cli({"decompose", bad});
  CHECK(r.code == kExitInvalid);
  CHECK(r.err.find("payoffs[0] length 3 ≠ 4") != std::string::npos);
  CHECK(cli({"decompose", "/nonexistent/game.json"}).code == kExitInvalid);
  CHECK(cli({"invert-nash", offset}).code == kExitInvalid);
  CHECK(cli({"invert-nash", "--project-tilde", offset}).code == kExitOk);
  CHECK(cli({"solve", "--n", "0", one}).code == kExitInvalid);
  CHECK(cli({"study", "--form", "2:2", "--n-list", "1", "--samples", "1", "--seed", "0"}).code ==
        kExitInvalid);

  // Unreachable tolerance: h_numeric stops at its iteration cap.
  const std::string far = scratch("far.json", R"({"tilde_u":[[0,0,0]],"y_bar":[[0.123,0.456,0.789]]})");
  r = cli({"invert-logit", "--n", "1000", "--tol", "1e-300", far});
  CHECK(r.code == kExitConvergence);
  CHECK_FALSE(r.err.empty());

  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("cli outputs re-parse and repeat byte for byte") {
  const std::string one = scratch("one.json", kOnePlayer);
  const std::string pennies = scratch("pennies.json", kPennies);
  const std::string target = scratch("one_target.json", kOneTarget);
  const std::vector<std::vector<std::string>> runs{
      {"decompose", pennies},
      {"solve", "--n", "3", pennies},
      {"trace", "--n-final", "5", one, "--format", "json"},
      {"invert-nash", target},
      {"invert-logit", "--n", "2", target},
      {"verify", pennies},
      {"study", "--form", "2:2,2", "--n-list", "1,10", "--samples", "5", "--seed", "3"},
      {"rank", "--n", "1", "--form", "1:3", "--samples", "2", "--seed", "4"},
  };
  for (const auto& args : runs) {
    const auto a = cli(args);
    const auto b = cli(args);
    REQUIRE_MESSAGE(a.code == 0, args[0] << ": " << a.err);
    CHECK(a.out == b.out);
    CHECK(nlohmann::json::parse(a.out).is_object());
  }
  CHECK_NOTHROW(parse_graph_point(cli({"solve", "--n", "3", pennies}).out));
  CHECK_NOTHROW(parse_graph_point(cli({"invert-logit", "--n", "2", target}).out));

  const auto j = nlohmann::json::parse(cli({"trace", "--n-final", "5", one, "--format", "json"}).out);
  CHECK(parse_game(j["game"].dump()).payoffs() == one_player({1, 0}).payoffs());
  CHECK(j["entries"].back()["n"] == 5.0);

  const auto csv = cli({"trace", "--n-final", "5", one});
  CHECK(csv.out.rfind("n,player,action,probability,residual\n", 0) == 0);
}

TEST_CASE("--out writes the same bytes as stdout") {
  const std::string pennies = scratch("pennies.json", kPennies);
  const auto dir = std::filesystem::temp_directory_path() / "logitgraph_cli_test";
  const std::string path = (dir / "decomposed.json").string();
  const auto direct = cli({"decompose", pennies});
  const auto to_file = cli({"--out", path, "decompose", pennies});
  CHECK(to_file.code == 0);
  CHECK(to_file.out.empty());
  CHECK(slurp(path) == direct.out);
  CHECK(cli({"decompose", pennies, "--out", "/nonexistent/dir/x.json"}).code == kExitInvalid);
}
