#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrl/dynamics.hpp"
#include "lrl/games.hpp"
#include "lrl/kuhn.hpp"
#include "lrl/learner.hpp"

namespace lrl {

using json = nlohmann::json;

// ----- Treeplex description JSON ------------------------------------------
//
//   {"simplex": K}
//   {"product": [node, ...]}
//   {"branch": {"k": K, "children": [node-or-null, ...]}}

inline Treeplex treeplex_from_json(const json& j) {
  if (j.contains("simplex")) return make_simplex(j.at("simplex").get<int>());
  if (j.contains("product")) {
    std::vector<Treeplex> parts;
    for (const auto& c : j.at("product")) parts.push_back(treeplex_from_json(c));
    std::vector<const Treeplex*> ptrs;
    for (const auto& p : parts) ptrs.push_back(&p);
    return make_product(ptrs);
  }
  if (j.contains("branch")) {
    const auto& b = j.at("branch");
    const int k = b.at("k").get<int>();
    std::vector<Treeplex> parts;
    std::vector<bool> engaged;
    for (const auto& c : b.at("children")) {
      engaged.push_back(!c.is_null());
      parts.push_back(c.is_null() ? Treeplex{} : treeplex_from_json(c));
    }
    if (static_cast<int>(parts.size()) != k)
      throw std::invalid_argument("treeplex json: branch needs one child slot per coordinate");
    std::vector<const Treeplex*> ptrs;
    for (std::size_t i = 0; i < parts.size(); ++i)
      ptrs.push_back(engaged[i] ? &parts[i] : nullptr);
    return make_branch(k, ptrs);
  }
  throw std::invalid_argument("treeplex json: expected simplex, product, or branch");
}

inline json treeplex_to_json(const Treeplex& tp, int idx) {
  const Treeplex::Node& n = tp.node(idx);
  if (n.kind == Treeplex::Kind::product) {
    json parts = json::array();
    for (int c : n.children) parts.push_back(treeplex_to_json(tp, c));
    return json{{"product", parts}};
  }
  bool all_empty = true;
  for (int c : n.children) all_empty = all_empty && c < 0;
  if (all_empty) return json{{"simplex", n.k}};
  json children = json::array();
  for (int c : n.children)
    children.push_back(c < 0 ? json() : treeplex_to_json(tp, c));
  return json{{"branch", {{"k", n.k}, {"children", children}}}};
}

inline json treeplex_to_json(const Treeplex& tp) { return treeplex_to_json(tp, tp.root); }

// ----- Game specification --------------------------------------------------
//
//   {"type": "normal_form", "tensors": [nested arrays, one per player]}
//   {"type": "kuhn", "players": 2 | 3}
//   {"type": "cournot", "a": .., "b": .., "n": .., "costs": [..],
//    "intervals": [[lo, hi], ..]}

namespace detail {

inline void tensor_shape(const json& j, std::vector<int>& shape) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("normal form: ragged tensor");
  shape.push_back(static_cast<int>(j.size()));
  if (j.front().is_array()) tensor_shape(j.front(), shape);
}

inline void flatten_tensor(const json& j, int depth, const std::vector<int>& shape,
                           std::vector<double>& out) {
  if (depth + 1 == static_cast<int>(shape.size())) {
    if (static_cast<int>(j.size()) != shape[static_cast<std::size_t>(depth)])
      throw std::invalid_argument("normal form: ragged tensor");
    for (const auto& v : j) out.push_back(v.get<double>());
    return;
  }
  if (static_cast<int>(j.size()) != shape[static_cast<std::size_t>(depth)])
    throw std::invalid_argument("normal form: ragged tensor");
  for (const auto& c : j) flatten_tensor(c, depth + 1, shape, out);
}

}  // namespace detail

inline Game build_game(const json& spec) {
  const std::string type = spec.at("type").get<std::string>();
  if (type == "normal_form") {
    const auto& tensors = spec.at("tensors");
    if (!tensors.is_array() || tensors.empty())
      throw std::invalid_argument("normal form: need one tensor per player");
    std::vector<int> shape;
    detail::tensor_shape(tensors.front(), shape);
    if (shape.size() != tensors.size())
      throw std::invalid_argument("normal form: tensor rank must equal the player count");
    std::vector<std::vector<double>> flat;
    for (const auto& t : tensors) {
      std::vector<double> f;
      detail::flatten_tensor(t, 0, shape, f);
      flat.push_back(std::move(f));
    }
    return make_normal_form_game(std::move(flat), shape);
  }
  if (type == "kuhn") return make_kuhn_game(spec.at("players").get<int>());
  if (type == "cournot") {
    const double a = spec.at("a").get<double>();
    const double b = spec.at("b").get<double>();
    const int n = spec.at("n").get<int>();
    std::vector<double> costs;
    if (spec.contains("costs"))
      for (const auto& c : spec.at("costs")) costs.push_back(c.get<double>());
    std::vector<std::pair<double, double>> intervals;
    for (const auto& iv : spec.at("intervals"))
      intervals.emplace_back(iv.at(0).get<double>(), iv.at(1).get<double>());
    if (static_cast<int>(intervals.size()) != n)
      throw std::invalid_argument("cournot: one quantity interval per firm");
    return make_cournot_game(a, b, std::move(costs), std::move(intervals));
  }
  throw std::invalid_argument("unknown game type: " + type);
}

// ----- Run configuration ----------------------------------------------------

struct RunConfig {
  json game_spec;
  long T{1};
  std::optional<double> eta;      // nullopt: recommended rate
  std::optional<double> epsilon;  // nullopt: 1/T
  bool anytime_epsilon{false};    // per-round tolerance 1/t^2
  SolverKind solver{SolverKind::prox_newton};
  std::optional<std::vector<long>> checkpoints;  // nullopt: powers of two
  bool strict_theory{false};
  long seed{0};
  std::string out;
};

inline RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  if (j.contains("game_file")) {
    std::ifstream in(j.at("game_file").get<std::string>());
    if (!in) throw std::invalid_argument("config: cannot open game_file");
    cfg.game_spec = json::parse(in);
  } else {
    cfg.game_spec = j.at("game");
  }
  cfg.T = j.at("T").get<long>();
  if (cfg.T < 1) throw std::invalid_argument("config: T must be at least 1");
  if (j.contains("eta") && !(j.at("eta").is_string() && j.at("eta") == "recommended")) {
    cfg.eta = j.at("eta").get<double>();
    if (!(*cfg.eta > 0.0)) throw std::invalid_argument("config: eta must be positive");
  }
  if (j.contains("epsilon") && j.at("epsilon").is_string()) {
    const std::string s = j.at("epsilon").get<std::string>();
    if (s == "anytime")
      cfg.anytime_epsilon = true;
    else if (s != "auto")
      throw std::invalid_argument("config: epsilon must be a number, \"auto\", or \"anytime\"");
  } else if (j.contains("epsilon")) {
    cfg.epsilon = j.at("epsilon").get<double>();
  }
  if (j.contains("solver")) {
    const std::string s = j.at("solver").get<std::string>();
    if (s == "prox_newton")
      cfg.solver = SolverKind::prox_newton;
    else if (s == "fw_newton")
      cfg.solver = SolverKind::frank_wolfe;
    else
      throw std::invalid_argument("config: unknown solver " + s);
  }
  if (j.contains("checkpoints") && j.at("checkpoints").is_array()) {
    std::vector<long> cps;
    for (const auto& c : j.at("checkpoints")) cps.push_back(c.get<long>());
    cfg.checkpoints = std::move(cps);
  }
  if (j.contains("strict_theory")) cfg.strict_theory = j.at("strict_theory").get<bool>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<long>();
  if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
  return cfg;
}

// ----- Running and reporting ------------------------------------------------

inline std::string fmt_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct ExperimentResult {
  RunTrace trace;
  double eta{0.0};
  double epsilon{0.0};
  double recommended_eta{0.0};
};

inline ExperimentResult run_experiment(const RunConfig& cfg, const Game& game) {
  const GameConstants consts = game_constants(game);
  const double recommended =
      recommended_learning_rate(consts.n, consts.B, consts.L, consts.l1);
  const double eta = cfg.eta.value_or(recommended);
  const double epsilon = cfg.epsilon.value_or(1.0 / static_cast<double>(cfg.T));

  std::vector<OftrlLearner> learners;
  learners.reserve(static_cast<std::size_t>(game.players()));
  for (int i = 0; i < game.players(); ++i) {
    LearnerConfig lc;
    lc.eta = eta;
    lc.horizon = static_cast<int>(cfg.T);
    lc.epsilon = epsilon;
    lc.anytime_epsilon = cfg.anytime_epsilon;
    lc.solver = cfg.solver;
    lc.constants = consts;
    learners.emplace_back(game.sets[static_cast<std::size_t>(i)], lc);
  }

  std::vector<long> cps = cfg.checkpoints ? *cfg.checkpoints : default_checkpoints(cfg.T);
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  std::erase_if(cps, [&](long t) { return t < 1 || t > cfg.T; });

  TheoryBounds bounds;
  bounds.eta = eta;
  bounds.epsilon = epsilon;
  bounds.c = consts;
  bounds.max_dim = game.max_dim();

  MonitorOptions monitors;
  monitors.check_bounds = eta <= recommended * (1.0 + 1e-12);

  ExperimentResult res;
  res.eta = eta;
  res.epsilon = epsilon;
  res.recommended_eta = recommended;
  res.trace = run_self_play(game, learners, cfg.T, cps, monitors, &bounds);
  res.trace.config = {eta, epsilon,
                      cfg.solver == SolverKind::prox_newton ? "prox_newton" : "fw_newton",
                      cfg.seed};
  return res;
}

inline void write_csv(const RunTrace& trace, std::ostream& os) {
  os << "t,player,external_regret,lifted_regret,path_length,stability_max\n";
  for (const auto& row : trace.checkpoints) {
    for (int i = 0; i < trace.players; ++i) {
      os << row.t << ',' << i << ',' << fmt_g12(row.external_regret[static_cast<std::size_t>(i)])
         << ',' << fmt_g12(row.lifted_regret[static_cast<std::size_t>(i)]) << ','
         << fmt_g12(row.path_length) << ','
         << fmt_g12(row.stability_max[static_cast<std::size_t>(i)]) << '\n';
    }
  }
}

inline void write_summary(const ExperimentResult& res, std::ostream& os) {
  const RunTrace& trace = res.trace;
  std::vector<long> ts;
  for (const auto& row : trace.checkpoints) ts.push_back(row.t);
  for (int i = 0; i < trace.players; ++i) {
    std::vector<double> lifted;
    for (const auto& row : trace.checkpoints)
      lifted.push_back(row.lifted_regret[static_cast<std::size_t>(i)]);
    const double slope = log_slope(ts, lifted);
    os << "player=" << i
       << " external_regret=" << fmt_g12(trace.checkpoints.back().external_regret[static_cast<std::size_t>(i)])
       << " lifted_regret=" << fmt_g12(trace.checkpoints.back().lifted_regret[static_cast<std::size_t>(i)])
       << " log_slope=" << fmt_g12(slope) << '\n';
  }
  os << "eta=" << fmt_g12(res.eta) << " epsilon=" << fmt_g12(res.epsilon)
     << " violations=" << trace.violations.size() << '\n';
  for (const auto& v : trace.violations) os << "violation: " << v << '\n';
}

// Report-only configuration checks: game well-formedness, treeplex
// structure, and learning-rate consistency under strict theory.
inline std::vector<std::string> validate_config(const RunConfig& cfg) {
  std::vector<std::string> report;
  Game game;
  try {
    game = build_game(cfg.game_spec);
  } catch (const std::exception& e) {
    report.push_back(std::string("game spec error: ") + e.what());
    return report;
  }
  for (int i = 0; i < game.players(); ++i) {
    const auto& s = game.sets[static_cast<std::size_t>(i)];
    if (s.is_treeplex()) {
      for (const auto& issue : validate_treeplex(s.treeplex()))
        report.push_back("player " + std::to_string(i) + " treeplex: " + issue);
    }
  }
  if (cfg.strict_theory && cfg.eta) {
    const GameConstants consts = game_constants(game);
    const double recommended =
        recommended_learning_rate(consts.n, consts.B, consts.L, consts.l1);
    if (*cfg.eta > recommended)
      report.push_back("eta " + fmt_g12(*cfg.eta) + " exceeds the recommended rate " +
                       fmt_g12(recommended) + "; the log-regret guarantee does not apply");
  }
  return report;
}

}  // namespace lrl
