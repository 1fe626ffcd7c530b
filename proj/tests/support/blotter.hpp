#pragma once

#include <cmath>
#include <vector>

#include "autohedge/hedge_env.hpp"

namespace autohedge::oracle {

// Independent trade blotter: records every fill at its traded price and marks
// the resulting inventory at the next mid. Knows nothing about the PNL split.
struct Blotter {
  double cash = 0.0;
  double position = 0.0;

  void buy(double size, double price) {
    cash -= size * price;
    position += size;
  }
  void sell(double size, double price) {
    cash += size * price;
    position -= size;
  }
  double value(double mid) const { return cash + position * mid; }
};

// Replays a single-asset episode through the blotter; returns the marked
// value after each step.
inline std::vector<double> blotter_values(const HedgerState& state) {
  Blotter b;
  std::vector<double> out;
  for (const auto& r : state.history) {
    b.buy(static_cast<double>(r.client_bid_size), r.client_bid);
    b.sell(static_cast<double>(r.client_ask_size), r.client_ask);
    if (r.hedge_size > 0.0) b.buy(r.hedge_size, r.hedge_ask);
    if (r.hedge_size < 0.0) b.sell(-r.hedge_size, r.hedge_bid);
    out.push_back(b.value(r.next_mid));
  }
  return out;
}

// Relative agreement scaled by the gross cash flow, the quantity whose
// cancellation the PNL decomposition avoids.
inline bool agrees(double a, double b, double scale, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b), std::abs(scale)});
}

}  // namespace autohedge::oracle
