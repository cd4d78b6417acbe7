#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "lrl/games.hpp"
#include "lrl/treeplex.hpp"

namespace lrl {

// Kuhn poker with n players and n+1 cards. Every player antes 1; a single
// betting round with a one-chip bet and no raises: players check in seat
// order until someone bets, then every other player in order folds or calls.
// Showdown among the non-folders, highest card takes the pot. The 3-player
// utilities are halved so that all payoffs stay inside [-2, 2], the same
// range as the 2-player game.

struct KuhnInfoset {
  int card{0};
  std::string history;       // public betting string at the decision point
  int parent_seq{-1};        // sequence-form coordinate preceding this infoset
  std::array<int, 2> seq{};  // coordinates of (infoset, action) pairs
};

struct KuhnTerminal {
  double prob{0.0};          // chance probability of the deal
  std::vector<double> util;  // per-player payoff, scaled
  std::vector<int> seq;      // per-player last sequence on the path
};

struct KuhnPlayer {
  std::vector<KuhnInfoset> infosets;
  int dim{0};
};

struct KuhnGame {
  Game game;
  std::vector<KuhnPlayer> players;
  std::vector<KuhnTerminal> terminals;
  int deck{0};
};

namespace kuhn_detail {

// Seat to act at a non-terminal betting history; players are seats 0..n-1
// and act in seat order until a bet, after which the remaining seats respond
// in wrapping order.
inline int to_act(const std::string& h, int n) {
  const std::size_t bet = h.find('b');
  if (bet == std::string::npos) return static_cast<int>(h.size());
  const int bettor = static_cast<int>(bet);
  const int responses = static_cast<int>(h.size() - bet - 1);
  return (bettor + 1 + responses) % n;
}

inline bool is_terminal(const std::string& h, int n) {
  const std::size_t bet = h.find('b');
  if (bet == std::string::npos) return static_cast<int>(h.size()) == n;
  return static_cast<int>(h.size()) == static_cast<int>(bet) + n;
}

inline bool betting_open(const std::string& h) { return h.find('b') == std::string::npos; }

// Index of the prefix after which `player` last acted, or -1.
inline int last_action_of(const std::string& h, int player, int n) {
  for (int j = static_cast<int>(h.size()) - 1; j >= 0; --j) {
    if (to_act(h.substr(0, static_cast<std::size_t>(j)), n) == player) return j;
  }
  return -1;
}

inline void enumerate_histories(const std::string& h, int n, std::vector<std::string>& out) {
  if (is_terminal(h, n)) {
    out.push_back(h);
    return;
  }
  const char a0 = betting_open(h) ? 'k' : 'f';
  const char a1 = betting_open(h) ? 'b' : 'c';
  enumerate_histories(h + a0, n, out);
  enumerate_histories(h + a1, n, out);
}

inline std::vector<std::vector<int>> deals(int deck, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::vector<bool> used(static_cast<std::size_t>(deck), false);
  auto rec = [&](auto&& self) -> void {
    if (static_cast<int>(cur.size()) == n) {
      out.push_back(cur);
      return;
    }
    for (int c = 0; c < deck; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      used[static_cast<std::size_t>(c)] = true;
      cur.push_back(c);
      self(self);
      cur.pop_back();
      used[static_cast<std::size_t>(c)] = false;
    }
  };
  rec(rec);
  return out;
}

// Chip outcome for one deal and betting line, before scaling.
inline std::vector<double> payoffs(const std::vector<int>& deal, const std::string& h, int n) {
  std::vector<double> contrib(static_cast<std::size_t>(n), 1.0);
  std::vector<bool> contender(static_cast<std::size_t>(n), true);
  const std::size_t bet = h.find('b');
  if (bet != std::string::npos) {
    const int bettor = static_cast<int>(bet);
    contrib[static_cast<std::size_t>(bettor)] += 1.0;
    for (std::size_t j = bet + 1; j < h.size(); ++j) {
      const int who = (bettor + 1 + static_cast<int>(j - bet - 1)) % n;
      if (h[j] == 'c')
        contrib[static_cast<std::size_t>(who)] += 1.0;
      else
        contender[static_cast<std::size_t>(who)] = false;
    }
  }
  double pot = 0.0;
  for (double c : contrib) pot += c;
  int winner = -1;
  for (int i = 0; i < n; ++i) {
    if (contender[static_cast<std::size_t>(i)] &&
        (winner < 0 || deal[static_cast<std::size_t>(i)] > deal[static_cast<std::size_t>(winner)]))
      winner = i;
  }
  std::vector<double> u(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    u[static_cast<std::size_t>(i)] = (i == winner ? pot : 0.0) - contrib[static_cast<std::size_t>(i)];
  return u;
}

}  // namespace kuhn_detail

inline KuhnGame build_kuhn(int players) {
  if (players != 2 && players != 3)
    throw std::invalid_argument("kuhn: supported player counts are 2 and 3");
  const int n = players;
  const int deck = n + 1;
  const double scale = n == 2 ? 1.0 : 0.5;

  std::vector<std::string> terminal_histories;
  kuhn_detail::enumerate_histories("", n, terminal_histories);

  // Decision histories per seat, in discovery (lexicographic) order.
  std::vector<std::vector<std::string>> decisions(static_cast<std::size_t>(n));
  {
    auto rec = [&](auto&& self, const std::string& h) -> void {
      if (kuhn_detail::is_terminal(h, n)) return;
      decisions[static_cast<std::size_t>(kuhn_detail::to_act(h, n))].push_back(h);
      const char a0 = kuhn_detail::betting_open(h) ? 'k' : 'f';
      const char a1 = kuhn_detail::betting_open(h) ? 'b' : 'c';
      self(self, h + a0);
      self(self, h + a1);
    };
    rec(rec, "");
  }

  KuhnGame out;
  out.deck = deck;
  out.players.resize(static_cast<std::size_t>(n));

  // Per player: infosets are (card, history) pairs, card-major. Coordinates
  // are assigned depth-first in the treeplex layout order (the two action
  // coordinates of an infoset, then the subtrees hanging under each action),
  // and the treeplex is built along the same recursion.
  std::vector<std::map<std::pair<int, std::string>, int>> infoset_index(
      static_cast<std::size_t>(n));
  for (int p = 0; p < n; ++p) {
    KuhnPlayer& kp = out.players[static_cast<std::size_t>(p)];
    for (int card = 0; card < deck; ++card) {
      for (const auto& h : decisions[static_cast<std::size_t>(p)]) {
        infoset_index[static_cast<std::size_t>(p)][{card, h}] =
            static_cast<int>(kp.infosets.size());
        kp.infosets.push_back({card, h, -1, {-1, -1}});
      }
    }

    // children[i][a]: infosets directly below (infoset i, action a).
    const int m = static_cast<int>(kp.infosets.size());
    std::vector<std::array<std::vector<int>, 2>> children(static_cast<std::size_t>(m));
    std::vector<bool> is_root(static_cast<std::size_t>(m), true);
    for (int i = 0; i < m; ++i) {
      const auto& is = kp.infosets[static_cast<std::size_t>(i)];
      const int j = kuhn_detail::last_action_of(is.history, p, n);
      if (j < 0) continue;
      is_root[static_cast<std::size_t>(i)] = false;
      const int parent =
          infoset_index[static_cast<std::size_t>(p)].at({is.card, is.history.substr(0, static_cast<std::size_t>(j))});
      const int action = (is.history[static_cast<std::size_t>(j)] == 'k' ||
                          is.history[static_cast<std::size_t>(j)] == 'f')
                             ? 0
                             : 1;
      children[static_cast<std::size_t>(parent)][static_cast<std::size_t>(action)].push_back(i);
    }

    int next_coord = 0;
    auto build = [&](auto&& self, int i) -> Treeplex {
      KuhnInfoset& is = kp.infosets[static_cast<std::size_t>(i)];
      is.seq[0] = next_coord++;
      is.seq[1] = next_coord++;
      std::array<Treeplex, 2> sub;
      std::array<bool, 2> has{};
      for (int a = 0; a < 2; ++a) {
        const auto& kids = children[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)];
        if (kids.empty()) continue;
        has[static_cast<std::size_t>(a)] = true;
        std::vector<Treeplex> parts;
        parts.reserve(kids.size());
        for (int c : kids) parts.push_back(self(self, c));
        if (parts.size() == 1) {
          sub[static_cast<std::size_t>(a)] = std::move(parts.front());
        } else {
          std::vector<const Treeplex*> ptrs;
          for (const auto& t : parts) ptrs.push_back(&t);
          sub[static_cast<std::size_t>(a)] = make_product(ptrs);
        }
      }
      return make_branch(2, {has[0] ? &sub[0] : nullptr, has[1] ? &sub[1] : nullptr});
    };

    std::vector<Treeplex> roots;
    for (int i = 0; i < m; ++i) {
      if (is_root[static_cast<std::size_t>(i)]) roots.push_back(build(build, i));
    }
    Treeplex tp;
    if (roots.size() == 1) {
      tp = std::move(roots.front());
    } else {
      std::vector<const Treeplex*> ptrs;
      for (const auto& t : roots) ptrs.push_back(&t);
      tp = make_product(ptrs);
    }
    kp.dim = tp.dim();
    if (kp.dim != next_coord)
      throw std::logic_error("kuhn: treeplex layout disagrees with sequence indexing");
    for (int i = 0; i < m; ++i) {
      const auto& is = kp.infosets[static_cast<std::size_t>(i)];
      const int j = kuhn_detail::last_action_of(is.history, p, n);
      if (j >= 0) {
        const int parent = infoset_index[static_cast<std::size_t>(p)].at(
            {is.card, is.history.substr(0, static_cast<std::size_t>(j))});
        const int action = (is.history[static_cast<std::size_t>(j)] == 'k' ||
                            is.history[static_cast<std::size_t>(j)] == 'f')
                               ? 0
                               : 1;
        kp.infosets[static_cast<std::size_t>(i)].parent_seq =
            kp.infosets[static_cast<std::size_t>(parent)].seq[static_cast<std::size_t>(action)];
      }
    }
    out.game.sets.push_back(make_treeplex_set(std::move(tp)));
  }

  // Terminal table: chance probability, scaled payoffs, and each player's
  // last sequence coordinate on the path.
  const auto all_deals = kuhn_detail::deals(deck, n);
  const double chance = 1.0 / static_cast<double>(all_deals.size());
  double max_payoff = 0.0;
  for (const auto& deal : all_deals) {
    for (const auto& h : terminal_histories) {
      KuhnTerminal term;
      term.prob = chance;
      term.util = kuhn_detail::payoffs(deal, h, n);
      for (auto& u : term.util) {
        u *= scale;
        max_payoff = std::max(max_payoff, std::abs(u));
      }
      term.seq.resize(static_cast<std::size_t>(n));
      for (int p = 0; p < n; ++p) {
        const int j = kuhn_detail::last_action_of(h, p, n);
        if (j < 0) throw std::logic_error("kuhn: player without an action on a path");
        const int infoset = infoset_index[static_cast<std::size_t>(p)].at(
            {deal[static_cast<std::size_t>(p)], h.substr(0, static_cast<std::size_t>(j))});
        const int action =
            (h[static_cast<std::size_t>(j)] == 'k' || h[static_cast<std::size_t>(j)] == 'f') ? 0 : 1;
        term.seq[static_cast<std::size_t>(p)] =
            out.players[static_cast<std::size_t>(p)].infosets[static_cast<std::size_t>(infoset)]
                .seq[static_cast<std::size_t>(action)];
      }
      out.terminals.push_back(std::move(term));
    }
  }

  // Every gradient entry is a chance-weighted sum of payoffs against
  // opponent reach probabilities, which total at most one per sequence, so
  // B = max |payoff|. The same bound works as the l1 smoothness constant:
  // perturbing any single player's reach by delta moves each entry by at
  // most max |payoff| * delta.
  out.game.gradient_bound = max_payoff;
  out.game.smoothness = max_payoff;
  out.game.gradient_fn = [terminals = out.terminals,
                          n](const std::vector<std::vector<double>>& x) {
    std::vector<std::vector<double>> grad(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      grad[static_cast<std::size_t>(i)].assign(x[static_cast<std::size_t>(i)].size(), 0.0);
    for (const auto& t : terminals) {
      for (int i = 0; i < n; ++i) {
        double others = 1.0;
        for (int j = 0; j < n; ++j) {
          if (j != i)
            others *= x[static_cast<std::size_t>(j)][static_cast<std::size_t>(t.seq[static_cast<std::size_t>(j)])];
        }
        grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(t.seq[static_cast<std::size_t>(i)])] +=
            t.prob * t.util[static_cast<std::size_t>(i)] * others;
      }
    }
    return grad;
  };

  return out;
}

inline Game make_kuhn_game(int players) { return build_kuhn(players).game; }

}  // namespace lrl
