#include "dfm/matpower.hpp"

#include "dfm/errors.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <queue>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dfm {

namespace {

struct Row {
  std::vector<double> values;
  int line = 0;
};

struct Block {
  std::vector<Row> rows;
  int line = 0;
};

double parse_number(const std::string& token, const std::string& block, int line) {
  const char* begin = token.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ParseError("malformed entry '" + token + "' in mpc." + block, line);
  return v;
}

/// Splits one chunk of matrix text into rows on ';', appending tokens to the row under construction.
void consume(const std::string& chunk, const std::string& block, int line, Block& out, Row& pending) {
  std::string token;
  auto flush_token = [&] {
    if (!token.empty()) {
      if (pending.values.empty()) pending.line = line;
      pending.values.push_back(parse_number(token, block, line));
      token.clear();
    }
  };
  auto flush_row = [&] {
    flush_token();
    if (!pending.values.empty()) out.rows.push_back(std::move(pending));
    pending = Row{};
  };
  for (char ch : chunk) {
    if (ch == ';') {
      flush_row();
    } else if (std::isspace(static_cast<unsigned char>(ch)) || ch == ',') {
      flush_token();
    } else {
      token.push_back(ch);
    }
  }
  flush_token();
  // A newline also ends a row, as in MATLAB matrix literals.
  if (!pending.values.empty()) flush_row();
}

std::map<std::string, Block> read_blocks(const std::string& text) {
  static const std::regex opener(R"(^\s*mpc\.(\w+)\s*=\s*\[(.*)$)");
  std::map<std::string, Block> blocks;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::string current;
  Block block;
  Row pending;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto pct = raw.find('%'); pct != std::string::npos) raw.erase(pct);
    std::string body;
    if (current.empty()) {
      std::smatch m;
      if (!std::regex_match(raw, m, opener)) continue;
      current = m[1];
      block = Block{};
      block.line = line;
      body = m[2];
    } else {
      body = raw;
    }
    const auto close = body.find(']');
    if (close == std::string::npos) {
      consume(body, current, line, block, pending);
      continue;
    }
    consume(body.substr(0, close), current, line, block, pending);
    const std::string rest = body.substr(close + 1);
    if (rest.find_first_not_of(" \t\r;") != std::string::npos)
      throw ParseError("unexpected text after the end of mpc." + current, line);
    blocks[current] = std::move(block);
    current.clear();
  }
  if (!current.empty()) throw ParseError("unterminated matrix block mpc." + current, block.line);
  return blocks;
}

void require_columns(const Block& block, std::size_t count, const std::string& name) {
  for (const auto& row : block.rows)
    if (row.values.size() < count)
      throw ParseError("mpc." + name + " rows need at least " + std::to_string(count) + " columns", row.line);
}

int as_int(double v, const std::string& name, int line) {
  if (v != std::floor(v)) throw ParseError("expected an integer in mpc." + name, line);
  return static_cast<int>(v);
}

}  // namespace

CaseData parse_matpower_case(const std::string& text) {
  const auto blocks = read_blocks(text);
  CaseData data;
  auto find = [&](const std::string& name) -> const Block* {
    const auto it = blocks.find(name);
    return it == blocks.end() ? nullptr : &it->second;
  };

  std::set<int> bus_ids;
  if (const Block* bus = find("bus")) {
    require_columns(*bus, 2, "bus");
    for (const auto& r : bus->rows) {
      const int id = as_int(r.values[0], "bus", r.line);
      if (!bus_ids.insert(id).second) throw ParseError("duplicate bus id " + std::to_string(id), r.line);
      data.buses.push_back({id, as_int(r.values[1], "bus", r.line)});
    }
  }

  std::vector<GenRecord> gens;
  std::vector<int> gen_lines;
  if (const Block* gen = find("gen")) {
    require_columns(*gen, 10, "gen");
    for (const auto& r : gen->rows) {
      const int bus = as_int(r.values[0], "gen", r.line);
      if (!bus_ids.count(bus)) throw ParseError("generator at unknown bus " + std::to_string(bus), r.line);
      gens.push_back({bus, r.values[9], r.values[8]});
      gen_lines.push_back(r.line);
    }
  }

  const Block* gencost = find("gencost");
  if (!gencost || gencost->rows.empty()) throw ParseError("no cost data", gencost ? gencost->line : 0);
  require_columns(*gencost, 4, "gencost");
  for (std::size_t k = 0; k < gens.size(); ++k) {
    const std::string label = "generator " + std::to_string(k + 1);
    if (k >= gencost->rows.size()) {
      data.warnings.push_back(label + " has no cost row; dropped");
      continue;
    }
    const Row& r = gencost->rows[k];
    const auto& v = r.values;
    const int model = as_int(v[0], "gencost", r.line);
    const int ncoef = as_int(v[3], "gencost", r.line);
    std::string reason;
    if (model != 2)
      reason = "cost model " + std::to_string(model) + " is not polynomial";
    else if (ncoef < 3)
      reason = "polynomial cost needs at least 3 coefficients";
    else if (v.size() < static_cast<std::size_t>(4 + ncoef))
      reason = "cost row is shorter than its coefficient count";
    else if (std::any_of(v.begin() + 4, v.begin() + 4 + (ncoef - 3), [](double c) { return c != 0.0; }))
      reason = "cost terms above quadratic are not supported";
    if (!reason.empty()) {
      data.warnings.push_back("line " + std::to_string(r.line) + ": " + label + " dropped: " + reason);
      continue;
    }
    const std::size_t at = static_cast<std::size_t>(4 + ncoef - 3);
    data.gens.push_back(gens[k]);
    data.gencosts.push_back({2, v[at], v[at + 1], v[at + 2]});
  }
  if (data.gens.empty()) throw ParseError("no cost data accepted for any generator", gencost->line);

  if (const Block* branch = find("branch")) {
    require_columns(*branch, 2, "branch");
    for (const auto& r : branch->rows) {
      const int from = as_int(r.values[0], "branch", r.line);
      const int to = as_int(r.values[1], "branch", r.line);
      if (!bus_ids.count(from) || !bus_ids.count(to)) throw ParseError("branch references an unknown bus", r.line);
      data.branches.push_back({from, to});
    }
  }
  return data;
}

CaseData load_matpower_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFoundError("cannot open case file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_matpower_case(buffer.str());
}

std::string write_matpower_case(const CaseData& data, const std::string& name) {
  std::string out;
  char buf[512];
  auto put = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
  };
  put("function mpc = %s\n", name.c_str());
  out += "mpc.version = '2';\nmpc.baseMVA = 100;\n\n";
  out += "%% bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin\nmpc.bus = [\n";
  for (const auto& b : data.buses) put("\t%d\t%d\t0\t0\t0\t0\t1\t1\t0\t138\t1\t1.06\t0.94;\n", b.id, b.type);
  out += "];\n\n%% bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin\nmpc.gen = [\n";
  for (const auto& g : data.gens) put("\t%d\t0\t0\t0\t0\t1\t100\t1\t%.17g\t%.17g;\n", g.bus, g.pmax, g.pmin);
  out += "];\n\n%% model startup shutdown n c2 c1 c0\nmpc.gencost = [\n";
  for (const auto& c : data.gencosts) put("\t%d\t0\t0\t3\t%.17g\t%.17g\t%.17g;\n", c.model, c.c2, c.c1, c.c0);
  out += "];\n\n%% fbus tbus r x b rateA rateB rateC ratio angle status\nmpc.branch = [\n";
  for (const auto& br : data.branches) put("\t%d\t%d\t0\t0.01\t0\t0\t0\t0\t0\t0\t1;\n", br.from, br.to);
  out += "];\n";
  return out;
}

Graph derive_generator_graph(const CaseData& data) {
  std::map<int, int> index;
  for (const auto& b : data.buses) index.emplace(b.id, static_cast<int>(index.size()));
  const int nb = static_cast<int>(index.size());
  Graph buses(nb);
  for (const auto& br : data.branches) {
    const int u = index.at(br.from), v = index.at(br.to);
    if (u != v && !buses.has_edge(u, v)) buses.add_edge(u, v);
  }
  if (nb == 0 || !buses.is_connected()) throw std::invalid_argument("bus network is disconnected");

  std::vector<std::vector<int>> gens_at(static_cast<std::size_t>(nb));
  for (std::size_t g = 0; g < data.gens.size(); ++g) {
    const auto it = index.find(data.gens[g].bus);
    if (it == index.end()) throw std::invalid_argument("generator at unknown bus " + std::to_string(data.gens[g].bus));
    gens_at[static_cast<std::size_t>(it->second)].push_back(static_cast<int>(g));
  }

  Graph out(static_cast<int>(data.gens.size()));
  auto link = [&out](int a, int b) {
    if (a != b && !out.has_edge(a, b)) out.add_edge(a, b);
  };
  for (std::size_t g = 0; g < data.gens.size(); ++g) {
    const int self = static_cast<int>(g);
    const int start = index.at(data.gens[g].bus);
    for (int other : gens_at[static_cast<std::size_t>(start)]) link(self, other);
    std::vector<bool> seen(static_cast<std::size_t>(nb), false);
    seen[static_cast<std::size_t>(start)] = true;
    std::queue<int> frontier;
    frontier.push(start);
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int v : buses.neighbors(u)) {
        if (seen[static_cast<std::size_t>(v)]) continue;
        seen[static_cast<std::size_t>(v)] = true;
        const auto& here = gens_at[static_cast<std::size_t>(v)];
        if (here.empty()) {
          frontier.push(v);
        } else {
          for (int other : here) link(self, other);
        }
      }
    }
  }
  return out;
}

CaseData synthetic_case(int buses, int gens, std::uint64_t seed) {
  if (buses < 2 || gens < 1 || gens > buses) throw std::invalid_argument("synthetic case needs 1 <= gens <= buses, buses >= 2");
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto round_to = [](double v, double step) { return std::round(v / step) * step; };

  CaseData data;
  for (int b = 1; b <= buses; ++b) data.buses.push_back({b, b == 1 ? 3 : 1});
  std::set<std::pair<int, int>> seen;
  auto connect = [&](int u, int v) {
    if (u == v) return;
    const auto key = std::minmax(u, v);
    if (seen.insert(key).second) data.branches.push_back({key.first, key.second});
  };
  for (int b = 2; b <= buses; ++b) connect(pick(std::max(1, b - 6), b - 1), b);
  for (int extra = 0; extra < buses / 2; ++extra) connect(pick(1, buses), pick(1, buses));

  std::vector<int> order(static_cast<std::size_t>(buses));
  for (int b = 0; b < buses; ++b) order[static_cast<std::size_t>(b)] = b + 1;
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(static_cast<std::size_t>(gens));
  std::sort(order.begin(), order.end());
  for (int bus : order) {
    const double pmax = round_to(uniform(50, 400), 1.0);
    data.gens.push_back({bus, 0.0, pmax});
    data.buses[static_cast<std::size_t>(bus - 1)].type = bus == 1 ? 3 : 2;
    data.gencosts.push_back({2, round_to(uniform(0.005, 0.1), 1e-4), round_to(uniform(10, 40), 0.01), 0.0});
  }
  return data;
}

}  // namespace dfm
