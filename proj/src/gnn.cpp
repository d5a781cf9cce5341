#include "pbnco/gnn.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pbnco {

namespace {

Eigen::MatrixXd uniform_init(int rows, int cols, double bound, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-bound, bound);
  return m;
}

Eigen::MatrixXd fan_in_init(int rows, int cols, Rng& rng) {
  return uniform_init(rows, cols, 1.0 / std::sqrt(static_cast<double>(rows)),
                      rng);
}

PolicyParameters allocate_policy(const GnnConfig& cfg) {
  if (cfg.dim % cfg.heads != 0)
    throw std::invalid_argument("gnn: heads must divide dim");
  PolicyParameters pp;
  pp.config = cfg;
  const int d = cfg.dim, dh = cfg.head_dim();
  pp.node_proj = Eigen::MatrixXd::Zero(cfg.node_in, d);
  pp.node_proj_b = Eigen::MatrixXd::Zero(1, d);
  pp.layers.resize(cfg.layers);
  for (auto& l : pp.layers) {
    l.edge_bias = Eigen::MatrixXd::Zero(cfg.edge_in, cfg.heads);
    l.wq.assign(cfg.heads, Eigen::MatrixXd::Zero(d, dh));
    l.wk.assign(cfg.heads, Eigen::MatrixXd::Zero(d, dh));
    l.wv.assign(cfg.heads, Eigen::MatrixXd::Zero(d, dh));
    l.wo = Eigen::MatrixXd::Zero(d, d);
    l.ln1_g = Eigen::MatrixXd::Ones(1, d);
    l.ln1_b = Eigen::MatrixXd::Zero(1, d);
    l.ff1 = Eigen::MatrixXd::Zero(d, cfg.ff_dim);
    l.ff1_b = Eigen::MatrixXd::Zero(1, cfg.ff_dim);
    l.ff2 = Eigen::MatrixXd::Zero(cfg.ff_dim, d);
    l.ff2_b = Eigen::MatrixXd::Zero(1, d);
    l.ln2_g = Eigen::MatrixXd::Ones(1, d);
    l.ln2_b = Eigen::MatrixXd::Zero(1, d);
  }
  pp.dec1 = Eigen::MatrixXd::Zero(d, d);
  pp.dec1_b = Eigen::MatrixXd::Zero(1, d);
  pp.dec2 = Eigen::MatrixXd::Zero(d, 1);
  pp.dec2_b = Eigen::MatrixXd::Zero(1, 1);
  if (cfg.has_anchor) pp.anchor = Eigen::MatrixXd::Zero(1, d);
  return pp;
}

}  // namespace

PolicyParameters make_policy(const GnnConfig& cfg, std::uint64_t seed) {
  PolicyParameters pp = allocate_policy(cfg);
  Rng rng(seed);
  const int d = cfg.dim;
  pp.node_proj = fan_in_init(cfg.node_in, d, rng);
  for (auto& l : pp.layers) {
    l.edge_bias = fan_in_init(cfg.edge_in, cfg.heads, rng);
    for (int h = 0; h < cfg.heads; ++h) {
      l.wq[h] = fan_in_init(d, cfg.head_dim(), rng);
      l.wk[h] = fan_in_init(d, cfg.head_dim(), rng);
      l.wv[h] = fan_in_init(d, cfg.head_dim(), rng);
    }
    l.wo = fan_in_init(d, d, rng);
    l.ff1 = fan_in_init(d, cfg.ff_dim, rng);
    l.ff2 = fan_in_init(cfg.ff_dim, d, rng);
  }
  pp.dec1 = fan_in_init(d, d, rng);
  pp.dec2 = fan_in_init(d, 1, rng);
  if (cfg.has_anchor)
    pp.anchor = uniform_init(1, d, 1.0 / std::sqrt(static_cast<double>(d)), rng);
  return pp;
}

Eigen::MatrixXd attention_mask(const GraphInstance& g, bool dense) {
  if (dense) return Eigen::MatrixXd::Ones(g.node_count, g.node_count);
  Eigen::MatrixXd mask =
      Eigen::MatrixXd::Identity(g.node_count, g.node_count);
  for (const auto& [u, v] : g.edges) {
    mask(u, v) = 1.0;
    mask(v, u) = 1.0;
  }
  return mask;
}

Eigen::VectorXd action_distribution(const Eigen::VectorXd& logits,
                                    const std::vector<char>& legal) {
  if (static_cast<std::size_t>(logits.size()) != legal.size())
    throw std::invalid_argument("action_distribution: mask length mismatch");
  Eigen::MatrixXd row(1, logits.size());
  Eigen::MatrixXd mask(1, logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    row(0, i) = logits(i);
    mask(0, i) = legal[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  }
  return ad::masked_softmax_value(row, mask).row(0).transpose();
}

int sample_action(const Eigen::VectorXd& dist, Rng& rng) {
  const double r = rng.uniform();
  double cum = 0.0;
  int last_positive = -1;
  for (Eigen::Index i = 0; i < dist.size(); ++i) {
    if (dist(i) > 0.0) {
      last_positive = static_cast<int>(i);
      cum += dist(i);
      if (r < cum) return static_cast<int>(i);
    }
  }
  if (last_positive < 0)
    throw std::invalid_argument("sample_action: empty distribution");
  return last_positive;  // r landed in the rounding tail
}

int greedy_action(const Eigen::VectorXd& dist) {
  int best = 0;
  for (Eigen::Index i = 1; i < dist.size(); ++i)
    if (dist(i) > dist(best)) best = static_cast<int>(i);
  return best;
}

namespace {

constexpr char kMagic[8] = {'P', 'B', 'N', 'C', 'O', 'C', 'K', '1'};

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void put_u64(std::string& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

void put_i64(std::string& out, std::int64_t x) {
  put_u64(out, static_cast<std::uint64_t>(x));
}

void put_f64(std::string& out, double x) {
  put_u64(out, std::bit_cast<std::uint64_t>(x));
}

struct ByteReader {
  const std::string& bytes;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) const {
    if (pos + n > bytes.size())
      throw std::runtime_error(std::string("checkpoint truncated reading ") +
                               what);
  }

  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i)
      x |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(bytes[pos + i]))
           << (8 * i);
    pos += 8;
    return x;
  }

  std::int64_t i64(const char* what) {
    return static_cast<std::int64_t>(u64(what));
  }

  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  std::string out(kMagic, sizeof kMagic);
  const GnnConfig& c = ck.params.config;
  put_i64(out, ck.meta.kind == PolicyKind::Improvement ? 0 : 1);
  put_i64(out, ck.meta.problem == Problem::MaxCut ? 0 : 1);
  put_i64(out, ck.meta.k_max);
  put_i64(out, c.layers);
  put_i64(out, c.dim);
  put_i64(out, c.heads);
  put_i64(out, c.ff_dim);
  put_i64(out, c.node_in);
  put_i64(out, c.edge_in);
  put_i64(out, c.has_anchor ? 1 : 0);
  put_i64(out, c.dense_attention ? 1 : 0);
  ck.params.visit([&](const Eigen::MatrixXd& m) {
    put_i64(out, m.rows());
    put_i64(out, m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
  });
  put_u64(out, fnv1a64(out));
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic + 8 ||
      bytes.compare(0, sizeof kMagic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("checkpoint: bad magic");
  {
    const std::string payload = bytes.substr(0, bytes.size() - 8);
    ByteReader tail{bytes, bytes.size() - 8};
    const std::uint64_t stored = tail.u64("digest");
    if (fnv1a64(payload) != stored)
      throw std::runtime_error("checkpoint: digest mismatch (corrupt file)");
  }

  ByteReader r{bytes, sizeof kMagic};
  Checkpoint ck;
  const auto kind = r.i64("kind");
  const auto problem = r.i64("problem");
  if (kind != 0 && kind != 1) throw std::runtime_error("checkpoint: bad kind");
  if (problem != 0 && problem != 1)
    throw std::runtime_error("checkpoint: bad problem");
  ck.meta.kind = kind == 0 ? PolicyKind::Improvement : PolicyKind::Constructive;
  ck.meta.problem = problem == 0 ? Problem::MaxCut : Problem::Mis;
  ck.meta.k_max = static_cast<int>(r.i64("k_max"));
  GnnConfig c;
  c.layers = static_cast<int>(r.i64("layers"));
  c.dim = static_cast<int>(r.i64("dim"));
  c.heads = static_cast<int>(r.i64("heads"));
  c.ff_dim = static_cast<int>(r.i64("ff_dim"));
  c.node_in = static_cast<int>(r.i64("node_in"));
  c.edge_in = static_cast<int>(r.i64("edge_in"));
  c.has_anchor = r.i64("has_anchor") != 0;
  c.dense_attention = r.i64("dense_attention") != 0;
  if (c.layers < 1 || c.dim < 1 || c.heads < 1 || c.ff_dim < 1 ||
      c.node_in < 1 || c.edge_in < 1 || c.dim % c.heads != 0)
    throw std::runtime_error("checkpoint: invalid hyperparameters");

  ck.params = allocate_policy(c);
  ck.params.visit([&](Eigen::MatrixXd& m) {
    const auto rows = r.i64("matrix rows");
    const auto cols = r.i64("matrix cols");
    if (rows != m.rows() || cols != m.cols())
      throw std::runtime_error("checkpoint: matrix shape mismatch");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = r.f64("matrix");
  });
  if (r.pos != bytes.size() - 8)
    throw std::runtime_error("checkpoint: trailing bytes");
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  const std::string bytes = serialize_checkpoint(ck);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace pbnco
