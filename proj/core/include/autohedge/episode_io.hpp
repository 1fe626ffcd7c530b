#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "autohedge/hedge_env.hpp"
#include "autohedge/portfolio_env.hpp"

namespace autohedge {

// One row per step. Empty cells (undefined maker/taker spreads, the skew of a
// portfolio step) are stored as NaN and written as empty fields.
//
// Single-asset columns, in order:
//   step, mid, client_bid, client_ask, hedge_bid, hedge_ask, client_bid_size,
//   client_ask_size, action_hedge, action_skew, client_pos, hedge_pos, net_pos,
//   client_pnl, hedge_pnl, market_pnl, net_pnl, penalty, reward, done
// price_of_risk appends maker_spread, taker_spread. Portfolio appends mid1,
// mid2, blended_mid, hedge1_pos, hedge2_pos, hedge1_pnl, hedge2_pnl,
// portfolio_value, overhedge; there client_pnl/hedge_pnl are spread PNL,
// market_pnl is revaluation of every leg, hedgeK_pnl is leg K's total and
// action_hedge is the summed hedge size.
// PNL columns are cumulative.
struct EpisodeTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t size() const { return rows.size(); }
  std::optional<std::size_t> column_index(const std::string& name) const;
  bool has_column(const std::string& name) const { return column_index(name).has_value(); }
  // Throws DataError when the column is missing.
  std::vector<double> column(const std::string& name) const;
};

std::vector<std::string> single_episode_columns(EnvMode mode);
std::vector<std::string> portfolio_episode_columns();

EpisodeTable episode_table(const HedgerState& state, const EnvConfig& cfg);
EpisodeTable episode_table(const PortfolioState& state, const PortfolioConfig& cfg);

void write_episode_csv(const EpisodeTable& table, std::ostream& out);
void write_episode_csv(const EpisodeTable& table, const std::filesystem::path& path);
EpisodeTable read_episode_csv(std::istream& in);
EpisodeTable read_episode_csv(const std::filesystem::path& path);

// Invariant re-check on an exported table: PNL components sum to net_pnl,
// positions add up, and (single-asset tables) cumulative PNL matches a
// blotter valued at the next row's mid. Returns one message per violation.
std::vector<std::string> check_episode_table(const EpisodeTable& table, double rel_tol = 1e-9);

}  // namespace autohedge
