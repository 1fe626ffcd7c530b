#include "autohedge/episode_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "autohedge/error.hpp"

namespace autohedge {

namespace {

constexpr double kEmpty = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kBaseColumns = {
    "step",         "mid",          "client_bid",      "client_ask", "hedge_bid",
    "hedge_ask",    "client_bid_size", "client_ask_size", "action_hedge", "action_skew",
    "client_pos",   "hedge_pos",    "net_pos",         "client_pnl", "hedge_pnl",
    "market_pnl",   "net_pnl",      "penalty",         "reward",     "done"};

double opt(const std::optional<double>& v) { return v ? *v : kEmpty; }

std::string format_cell(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool close(double a, double b, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

std::optional<std::size_t> EpisodeTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

std::vector<double> EpisodeTable::column(const std::string& name) const {
  const auto idx = column_index(name);
  if (!idx) throw DataError("episode table has no column '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[*idx]);
  return out;
}

std::vector<std::string> single_episode_columns(EnvMode mode) {
  auto cols = kBaseColumns;
  if (mode == EnvMode::kPriceOfRisk) {
    cols.push_back("maker_spread");
    cols.push_back("taker_spread");
  }
  return cols;
}

std::vector<std::string> portfolio_episode_columns() {
  auto cols = kBaseColumns;
  for (const char* c : {"mid1", "mid2", "blended_mid", "hedge1_pos", "hedge2_pos", "hedge1_pnl",
                        "hedge2_pnl", "portfolio_value", "overhedge"}) {
    cols.emplace_back(c);
  }
  return cols;
}

EpisodeTable episode_table(const HedgerState& state, const EnvConfig& cfg) {
  EpisodeTable table;
  table.columns = single_episode_columns(cfg.mode);
  const bool por = cfg.mode == EnvMode::kPriceOfRisk;
  for (std::size_t i = 0; i < state.history.size(); ++i) {
    const auto& r = state.history[i];
    std::vector<double> row = {static_cast<double>(r.step),
                               r.mid,
                               r.client_bid,
                               r.client_ask,
                               r.hedge_bid,
                               r.hedge_ask,
                               static_cast<double>(r.client_bid_size),
                               static_cast<double>(r.client_ask_size),
                               r.hedge_size,
                               r.skew,
                               r.client_position,
                               r.hedge_position,
                               r.net_position,
                               r.cum_client_pnl,
                               r.cum_hedge_pnl,
                               r.cum_market_pnl,
                               r.cum_net_pnl,
                               r.penalty,
                               r.reward,
                               r.done ? 1.0 : 0.0};
    if (por) {
      const auto mt = maker_taker_spreads(state, cfg.maker_taker_window, i + 1);
      row.push_back(opt(mt.maker));
      row.push_back(opt(mt.taker));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

EpisodeTable episode_table(const PortfolioState& state, const PortfolioConfig&) {
  EpisodeTable table;
  table.columns = portfolio_episode_columns();
  for (const auto& r : state.history) {
    const double hedge_pos = r.hedge1_position + r.hedge2_position;
    table.rows.push_back({static_cast<double>(r.step),
                          r.blended_mid,
                          r.client_bid,
                          r.client_ask,
                          r.hedge_bid,
                          r.hedge_ask,
                          r.client_bid_size,
                          r.client_ask_size,
                          r.hedge1_size + r.hedge2_size,
                          kEmpty,
                          r.client_position,
                          hedge_pos,
                          r.client_position + hedge_pos,
                          r.cum_client_spread,
                          r.cum_hedge_spread,
                          r.cum_market,
                          r.cum_net,
                          r.penalty,
                          r.reward,
                          r.done ? 1.0 : 0.0,
                          r.mid1,
                          r.mid2,
                          r.blended_mid,
                          r.hedge1_position,
                          r.hedge2_position,
                          r.cum_hedge1,
                          r.cum_hedge2,
                          r.portfolio_value,
                          r.overhedge});
  }
  return table;
}

void write_episode_csv(const EpisodeTable& table, std::ostream& out) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << ',';
    out << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_cell(row[i]);
    }
    out << '\n';
  }
}

void write_episode_csv(const EpisodeTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_episode_csv(table, out);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

EpisodeTable read_episode_csv(std::istream& in) {
  EpisodeTable table;
  std::string line;
  if (!std::getline(in, line)) throw DataError("episode CSV is empty");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      const std::string cell =
          line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (cell.empty()) {
        row.push_back(kEmpty);
      } else {
        double v = 0.0;
        const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
          throw DataError("episode CSV line " + std::to_string(line_no) + ": bad number '" + cell +
                          "'");
        }
        row.push_back(v);
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (row.size() != table.columns.size()) {
      throw DataError("episode CSV line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.columns.size()) + " fields");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

EpisodeTable read_episode_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  return read_episode_csv(in);
}

std::vector<std::string> check_episode_table(const EpisodeTable& table, double rel_tol) {
  std::vector<std::string> errors;
  const auto client = table.column("client_pnl");
  const auto hedge = table.column("hedge_pnl");
  const auto market = table.column("market_pnl");
  const auto net = table.column("net_pnl");
  const auto cpos = table.column("client_pos");
  const auto hpos = table.column("hedge_pos");
  const auto npos = table.column("net_pos");
  const auto done = table.column("done");
  const bool portfolio = table.has_column("portfolio_value");

  auto fail = [&](std::size_t row, const std::string& what) {
    errors.push_back("row " + std::to_string(row) + ": " + what);
  };

  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!close(client[i] + hedge[i] + market[i], net[i], rel_tol)) fail(i, "PNL components");
    if (!close(cpos[i] + hpos[i], npos[i], rel_tol)) fail(i, "net position");
    if (done[i] != 0.0 && i + 1 != table.size()) fail(i, "done before the last row");
  }

  if (portfolio) {
    const auto h1 = table.column("hedge1_pos");
    const auto h2 = table.column("hedge2_pos");
    const auto m1 = table.column("mid1");
    const auto m2 = table.column("mid2");
    const auto blended = table.column("blended_mid");
    const auto value = table.column("portfolio_value");
    for (std::size_t i = 0; i + 1 < table.size(); ++i) {
      if (!close(h1[i] + h2[i], hpos[i], rel_tol)) fail(i, "hedge legs");
      const double v = blended[i + 1] * cpos[i] + m1[i + 1] * h1[i] + m2[i + 1] * h2[i];
      if (!close(v, value[i], rel_tol)) fail(i, "portfolio value");
    }
    return errors;
  }

  // Blotter: every fill changes cash; PNL is cash plus position at the next mid.
  const auto bid = table.column("client_bid");
  const auto ask = table.column("client_ask");
  const auto hbid = table.column("hedge_bid");
  const auto hask = table.column("hedge_ask");
  const auto nbid = table.column("client_bid_size");
  const auto nask = table.column("client_ask_size");
  const auto action = table.column("action_hedge");
  const auto mid = table.column("mid");
  double cash = 0.0;
  double position = 0.0;
  for (std::size_t i = 0; i + 1 < table.size(); ++i) {
    cash += -nbid[i] * bid[i] + nask[i] * ask[i];
    cash += action[i] > 0.0 ? -action[i] * hask[i] : -action[i] * hbid[i];
    position += nbid[i] - nask[i] + action[i];
    if (!close(position, npos[i], rel_tol)) fail(i, "blotter position");
    const double marked = cash + position * mid[i + 1];
    if (!close(marked, net[i], rel_tol * std::max(1.0, std::abs(cash)))) fail(i, "blotter PNL");
  }
  return errors;
}

}  // namespace autohedge
