#include "pbnco/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace pbnco {

const char* family_name(Family f) {
  switch (f) {
    case Family::Er:
      return "er";
    case Family::Rb:
      return "rb";
    case Family::Custom:
      return "custom";
  }
  return "custom";
}

void GraphInstance::canonicalize() {
  if (node_count < 1) throw std::invalid_argument("node_count must be >= 1");
  if (!weights.empty() && weights.size() != edges.size())
    throw std::invalid_argument("weights length does not match edges");

  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (auto& [u, v] : edges) {
    if (u == v) throw std::invalid_argument("self-loop");
    if (u > v) std::swap(u, v);
    if (u < 0 || v >= node_count)
      throw std::invalid_argument("edge index out of range");
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return edges[a] < edges[b];
  });

  std::vector<std::pair<int, int>> sorted_edges(edges.size());
  std::vector<double> sorted_weights(weights.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted_edges[i] = edges[order[i]];
    if (!weights.empty()) sorted_weights[i] = weights[order[i]];
  }
  edges = std::move(sorted_edges);
  weights = std::move(sorted_weights);

  for (std::size_t i = 1; i < edges.size(); ++i)
    if (edges[i] == edges[i - 1]) throw std::invalid_argument("duplicate edge");
  for (double w : weights)
    if (!(w > 0.0)) throw std::invalid_argument("edge weight must be > 0");
}

Adjacency::Adjacency(const GraphInstance& g)
    : neighbors(g.node_count), neighbor_weights(g.node_count) {
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    auto [u, v] = g.edges[e];
    const double w = g.weight(e);
    neighbors[u].push_back(v);
    neighbor_weights[u].push_back(w);
    neighbors[v].push_back(u);
    neighbor_weights[v].push_back(w);
  }
}

GraphInstance generate_er(int n, double p, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_er: n must be >= 1");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("generate_er: p must be in [0,1]");

  Rng rng(seed);
  GraphInstance g;
  g.node_count = n;
  g.family = Family::Er;
  g.seed = seed;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) g.edges.emplace_back(u, v);
  return g;
}

GraphInstance generate_rb(int groups, int group_size, double tightness,
                          double constraint_factor, std::uint64_t seed) {
  if (groups < 2) throw std::invalid_argument("generate_rb: groups must be >= 2");
  if (group_size < 2)
    throw std::invalid_argument("generate_rb: group_size must be >= 2");
  if (!(tightness > 0.0 && tightness < 1.0))
    throw std::invalid_argument("generate_rb: tightness must be in (0,1)");
  if (!(constraint_factor > 0.0))
    throw std::invalid_argument("generate_rb: constraint_factor must be > 0");

  Rng rng(seed);
  const int d = group_size;
  GraphInstance g;
  g.node_count = groups * d;
  g.family = Family::Rb;
  g.seed = seed;

  std::set<std::pair<int, int>> edge_set;
  for (int c = 0; c < groups; ++c)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        edge_set.emplace(c * d + i, c * d + j);

  const long rounds = std::lround(constraint_factor * groups *
                                  std::log(static_cast<double>(groups)));
  const int per_round = static_cast<int>(std::lround(tightness * d * d));
  std::vector<int> cross(static_cast<std::size_t>(d) * d);
  for (long r = 0; r < rounds; ++r) {
    const int c1 = static_cast<int>(rng.uniform_int(groups));
    int c2 = static_cast<int>(rng.uniform_int(groups - 1));
    if (c2 >= c1) ++c2;
    // Partial Fisher-Yates: the first per_round slots end up holding a
    // uniform sample of cross pairs without replacement.
    std::iota(cross.begin(), cross.end(), 0);
    for (int k = 0; k < per_round; ++k) {
      const auto j = k + rng.uniform_int(cross.size() - k);
      std::swap(cross[k], cross[j]);
      const int u = c1 * d + cross[k] / d;
      const int v = c2 * d + cross[k] % d;
      edge_set.emplace(std::min(u, v), std::max(u, v));
    }
  }

  g.edges.assign(edge_set.begin(), edge_set.end());
  return g;
}

namespace {

void format_weight(std::string& out, double w) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, w);
  out.append(buf, ptr);
}

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;

  bool eof() const { return pos >= text.size(); }

  void skip_blanks() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }

  // Consumes to end of line including the newline.
  void skip_line() {
    while (pos < text.size() && text[pos] != '\n') ++pos;
    if (pos < text.size()) ++pos;
  }

  std::string token() {
    skip_blanks();
    const std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])))
      ++pos;
    return text.substr(start, pos - start);
  }

  void expect_eol(const char* where) {
    skip_blanks();
    if (pos < text.size() && text[pos] != '\n' && text[pos] != '\r')
      throw ParseError(std::string("trailing data after ") + where, pos);
    skip_line();
  }

  long long read_int(const char* what) {
    skip_blanks();
    const std::size_t start = pos;
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), value);
    if (ec != std::errc() || ptr == text.data() + pos)
      throw ParseError(std::string("expected integer ") + what, start);
    pos = static_cast<std::size_t>(ptr - text.data());
    return value;
  }

  double read_real(const char* what) {
    skip_blanks();
    const std::size_t start = pos;
    double value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), value);
    if (ec != std::errc() || ptr == text.data() + pos)
      throw ParseError(std::string("expected number ") + what, start);
    pos = static_cast<std::size_t>(ptr - text.data());
    return value;
  }
};

}  // namespace

std::string serialize_instance(const GraphInstance& g) {
  std::string out;
  out += "c seed ";
  out += std::to_string(g.seed);
  out += '\n';
  out += "p ";
  out += family_name(g.family);
  out += ' ';
  out += std::to_string(g.node_count);
  out += ' ';
  out += std::to_string(g.edge_count());
  out += '\n';
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    out += "e ";
    out += std::to_string(g.edges[e].first);
    out += ' ';
    out += std::to_string(g.edges[e].second);
    if (!g.weights.empty()) {
      out += ' ';
      format_weight(out, g.weights[e]);
    }
    out += '\n';
  }
  return out;
}

GraphInstance parse_instance(const std::string& text) {
  Cursor cur{text};
  GraphInstance g;
  bool saw_header = false;
  long long declared_edges = 0;

  while (!cur.eof()) {
    cur.skip_blanks();
    if (cur.eof()) break;
    const std::size_t line_start = cur.pos;
    const char c = cur.text[cur.pos];
    if (c == '\n' || c == '\r') {
      cur.skip_line();
      continue;
    }
    ++cur.pos;
    if (c == 'c') {
      // Comment. `c seed <n>` is recognized, everything else is ignored.
      cur.skip_blanks();
      if (cur.text.compare(cur.pos, 4, "seed") == 0) {
        cur.pos += 4;
        g.seed = static_cast<std::uint64_t>(cur.read_int("after 'c seed'"));
      }
      cur.skip_line();
    } else if (c == 'p') {
      if (saw_header) throw ParseError("duplicate header line", line_start);
      saw_header = true;
      const std::string fam = cur.token();
      if (fam == "er")
        g.family = Family::Er;
      else if (fam == "rb")
        g.family = Family::Rb;
      else if (fam == "custom")
        g.family = Family::Custom;
      else
        throw ParseError("unknown family '" + fam + "'", line_start);
      const long long n = cur.read_int("node count");
      declared_edges = cur.read_int("edge count");
      if (n < 1) throw ParseError("node count must be >= 1", line_start);
      if (declared_edges < 0)
        throw ParseError("edge count must be >= 0", line_start);
      g.node_count = static_cast<int>(n);
      cur.expect_eol("header");
    } else if (c == 'e') {
      if (!saw_header)
        throw ParseError("edge line before header", line_start);
      const long long u = cur.read_int("edge endpoint");
      const long long v = cur.read_int("edge endpoint");
      if (u < 0 || v < 0 || u >= g.node_count || v >= g.node_count)
        throw ParseError("edge endpoint out of range", line_start);
      if (u == v) throw ParseError("self-loop", line_start);
      g.edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
      cur.skip_blanks();
      if (!cur.eof() && cur.text[cur.pos] != '\n' && cur.text[cur.pos] != '\r') {
        const double w = cur.read_real("edge weight");
        if (!(w > 0.0)) throw ParseError("edge weight must be > 0", line_start);
        if (g.weights.size() != g.edges.size() - 1)
          throw ParseError("mixed weighted and unweighted edges", line_start);
        g.weights.push_back(w);
      } else if (!g.weights.empty()) {
        throw ParseError("mixed weighted and unweighted edges", line_start);
      }
      cur.expect_eol("edge");
    } else {
      throw ParseError(std::string("unknown line type '") + c + "'", line_start);
    }
  }

  if (!saw_header) throw ParseError("missing header line", 0);
  if (static_cast<long long>(g.edges.size()) != declared_edges)
    throw ParseError("edge count mismatch: header declares " +
                         std::to_string(declared_edges) + ", found " +
                         std::to_string(g.edges.size()),
                     text.size());
  try {
    g.canonicalize();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), text.size());
  }
  return g;
}

GraphInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

void save_instance(const GraphInstance& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write instance file: " + path);
  out << serialize_instance(g);
}

}  // namespace pbnco
