// Copyright 2026 The PMCTS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PMCTS_ENVS_TIC_TAC_TOE_HPP_
#define PMCTS_ENVS_TIC_TAC_TOE_HPP_

#include <array>
#include <cstdlib>
#include <string>

#include "pmcts/errors.hpp"
#include "pmcts/mdp.hpp"

namespace pmcts {

// Tic-tac-toe as an alternating two-player process. A board is encoded in
// base 3 (cell i contributes digit * 3^i; 0 empty, 1 X, 2 O). X moves first.
// Action k places the mover's mark on the k-th empty cell in row-major
// order. The reward is +1 for the player whose move completes a line.
//
// Encodings that cannot arise in play are treated as terminal.
class TicTacToe {
 public:
  enum Cell : int { kEmpty = 0, kX = 1, kO = 2 };
  using Board = std::array<int, 9>;
  static constexpr int kStateCount = 19683;

  static Board decode(StateId s) {
    Board b{};
    auto v = static_cast<int>(s);
    for (int i = 0; i < 9; ++i) {
      b[i] = v % 3;
      v /= 3;
    }
    return b;
  }

  static StateId encode(const Board& b) {
    StateId s = 0;
    for (int i = 8; i >= 0; --i) s = s * 3 + b[i];
    return s;
  }

  // kX, kO, or kEmpty when nobody has a line.
  static int winner(const Board& b) {
    static constexpr int kLines[8][3] = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8},
                                         {0, 3, 6}, {1, 4, 7}, {2, 5, 8},
                                         {0, 4, 8}, {2, 4, 6}};
    int found = kEmpty;
    for (const auto& l : kLines) {
      if (b[l[0]] != kEmpty && b[l[0]] == b[l[1]] && b[l[1]] == b[l[2]]) {
        if (found != kEmpty && found != b[l[0]]) return -1;  // two winners
        found = b[l[0]];
      }
    }
    return found;
  }

  static int player_to_move(const Board& b) {
    int x = 0, o = 0;
    for (int c : b) {
      x += c == kX;
      o += c == kO;
    }
    return x == o ? kX : kO;
  }

  static bool is_valid(const Board& b) {
    int x = 0, o = 0;
    for (int c : b) {
      x += c == kX;
      o += c == kO;
    }
    if (x - o != 0 && x - o != 1) return false;
    const int w = winner(b);
    if (w == -1) return false;
    // The winner must have made the last move.
    if (w == kX && x != o + 1) return false;
    if (w == kO && x != o) return false;
    return true;
  }

  static std::string to_string(StateId s) {
    Board b = decode(s);
    std::string out;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out += ".XO"[b[r * 3 + c]];
      out += '\n';
    }
    return out;
  }

  std::size_t state_count() const { return kStateCount; }

  bool is_terminal(StateId s) const {
    if (s < 0 || s >= kStateCount) return true;
    Board b = decode(s);
    if (!is_valid(b) || winner(b) != kEmpty) return true;
    for (int c : b) {
      if (c == kEmpty) return false;
    }
    return true;
  }

  int action_count(StateId s) const {
    if (is_terminal(s)) return 0;
    int n = 0;
    for (int c : decode(s)) n += c == kEmpty;
    return n;
  }

  Transition transition(StateId s, ActionId a) const {
    if (is_terminal(s)) return {s, 0.0, true};
    Board b = decode(s);
    const int mover = player_to_move(b);
    int k = a;
    for (int i = 0; i < 9; ++i) {
      if (b[i] != kEmpty) continue;
      if (k-- == 0) {
        b[i] = mover;
        const StateId next = encode(b);
        const double reward = winner(b) == mover ? 1.0 : 0.0;
        return {next, reward, is_terminal(next)};
      }
    }
    throw RangeError("tic_tac_toe: action " + std::to_string(a) +
                     " out of range");
  }

  double discount() const { return 1.0; }
  StateId initial_state() const { return 0; }
  bool alternating() const { return true; }
  int max_episode_length() const { return 9; }
  double reward_bound() const { return 1.0; }
  std::string name() const { return "tic_tac_toe"; }
};

}  // namespace pmcts

#endif  // PMCTS_ENVS_TIC_TAC_TOE_HPP_
