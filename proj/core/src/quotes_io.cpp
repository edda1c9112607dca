#include "impdens/quotes_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "format.hpp"
#include "impdens/error.hpp"

namespace impdens {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

std::optional<OptionKind> parse_kind(const std::string& s) {
  const std::string k = lower(s);
  if (k == "c" || k == "call") return OptionKind::Call;
  if (k == "p" || k == "put") return OptionKind::Put;
  return std::nullopt;
}

bool skip_line(const std::string& line) { return line.empty() || line.front() == '#'; }

}  // namespace

std::vector<Quote> parse_quotes(std::istream& in, const MarketContext& ctx, const LoadOptions& opts,
                                const std::string& source) {
  std::vector<std::pair<int, std::string>> rows;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string line = trim(raw);
    if (!skip_line(line)) rows.emplace_back(line_no, line);
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyFile, source + " contains no quotes");

  std::map<std::string, std::size_t> col;
  std::size_t first_data = 0;
  const auto head = split_csv(rows.front().second);
  if (!head.empty() && parse_kind(head.front())) {
    col = {{"kind", 0}, {"strike", 1}, {"price", 2}, {"weight", 3}};
  } else {
    for (std::size_t i = 0; i < head.size(); ++i) col[lower(head[i])] = i;
    first_data = 1;
    if (!col.count("kind") || !col.count("strike") || (!col.count("price") && !col.count("implied_vol"))) {
      throw Error(ErrorCode::ParseError,
                  source + ": header must name kind, strike and price or implied_vol (line " +
                      std::to_string(rows.front().first) + ")");
    }
  }
  if (first_data == rows.size()) throw Error(ErrorCode::EmptyFile, source + " has a header but no rows");

  auto cell = [&](const std::vector<std::string>& cells, const char* name) -> std::string {
    auto it = col.find(name);
    if (it == col.end() || it->second >= cells.size()) return {};
    return cells[it->second];
  };

  std::vector<Quote> quotes;
  std::vector<int> bad;
  for (std::size_t r = first_data; r < rows.size(); ++r) {
    const auto& [num, line] = rows[r];
    const auto cells = split_csv(line);
    Quote q;
    const auto kind = parse_kind(cell(cells, "kind"));
    const std::string price_s = cell(cells, "price");
    const std::string vol_s = cell(cells, "implied_vol");
    const std::string weight_s = cell(cells, "weight");
    double price = 0.0, vol = 0.0;
    const bool has_price = !price_s.empty();
    const bool has_vol = !vol_s.empty();
    if (!kind || !parse_double(cell(cells, "strike"), q.strike) || has_price == has_vol ||
        (has_price && !parse_double(price_s, price)) || (has_vol && !parse_double(vol_s, vol)) ||
        (!weight_s.empty() && !parse_double(weight_s, q.weight)) || q.weight < 0.0) {
      bad.push_back(num);
      continue;
    }
    q.kind = *kind;
    if (has_vol) {
      const std::string fam = cell(cells, "family");
      ModelFamily family;
      if (!fam.empty()) {
        family = parse_family(fam);
      } else if (opts.default_family) {
        family = *opts.default_family;
      } else {
        bad.push_back(num);
        continue;
      }
      if (vol < 0.0) {
        bad.push_back(num);
        continue;
      }
      try {
        price = model_price({family, vol}, q.kind, ctx, q.strike);
      } catch (const Error&) {
        bad.push_back(num);
        continue;
      }
    }
    if (price < 0.0) {
      bad.push_back(num);
      continue;
    }
    q.price = price;
    quotes.push_back(q);
  }
  if (!bad.empty()) {
    std::string msg = source + ": malformed rows at line(s)";
    for (std::size_t i = 0; i < bad.size(); ++i) msg += (i ? ", " : " ") + std::to_string(bad[i]);
    throw Error(ErrorCode::ParseError, msg);
  }
  return quotes;
}

std::vector<Quote> load_quotes(const std::string& path, const MarketContext& ctx, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return parse_quotes(in, ctx, opts, path);
}

Rescaled apply_rescale(const std::vector<Quote>& quotes, const MarketContext& ctx, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorCode::InvalidArgument, "rescale factor must be positive");
  }
  Rescaled out{quotes, ctx};
  for (auto& q : out.quotes) {
    q.strike /= factor;
    q.price /= factor;
  }
  out.ctx.spot /= factor;
  out.ctx.forward /= factor;
  return out;
}

Rescaled undo_rescale(const std::vector<Quote>& quotes, const MarketContext& ctx, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorCode::InvalidArgument, "rescale factor must be positive");
  }
  Rescaled out{quotes, ctx};
  for (auto& q : out.quotes) {
    q.strike *= factor;
    q.price *= factor;
  }
  out.ctx.spot *= factor;
  out.ctx.forward *= factor;
  return out;
}

double choose_rescale_factor(const std::vector<Quote>& quotes) {
  double biggest = 0.0;
  for (const auto& q : quotes) biggest = std::max(biggest, std::abs(q.strike));
  if (biggest <= 10.0) return 1.0;
  return std::pow(10.0, std::ceil(std::log10(biggest / 10.0)));
}

Density unscale_density(const Density& phi, double factor) {
  if (factor == 1.0) return phi;
  std::vector<double> nodes = phi.grid.nodes();
  for (double& x : nodes) x *= factor;
  Grid g = phi.grid.uniform() ? make_grid(nodes.front(), nodes.back(), phi.grid.size())
                              : make_grid_from_nodes(nodes);
  return {g, phi.values / factor};
}

void write_density_csv(std::ostream& os, const Density& phi) {
  os << "x,phi\n";
  for (Eigen::Index j = 0; j < phi.values.size(); ++j) {
    os << detail::fmt(phi.grid.nodes()[static_cast<std::size_t>(j)]) << ',' << detail::fmt(phi.values(j)) << '\n';
  }
}

Density read_density_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::string raw;
  std::vector<double> xs, ys;
  std::vector<int> bad;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (skip_line(line)) continue;
    const auto cells = split_csv(line);
    double x = 0.0, y = 0.0;
    if (cells.size() >= 2 && parse_double(cells[0], x) && parse_double(cells[1], y)) {
      xs.push_back(x);
      ys.push_back(y);
    } else if (!header_seen && xs.empty()) {
      header_seen = true;
    } else {
      bad.push_back(line_no);
    }
  }
  if (!bad.empty()) {
    std::string msg = path + ": malformed rows at line(s)";
    for (std::size_t i = 0; i < bad.size(); ++i) msg += (i ? ", " : " ") + std::to_string(bad[i]);
    throw Error(ErrorCode::ParseError, msg);
  }
  if (xs.empty()) throw Error(ErrorCode::EmptyFile, path + " contains no density rows");
  Grid g = make_grid_from_nodes(xs);
  return {g, Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()))};
}

}  // namespace impdens
