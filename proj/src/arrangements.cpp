#include "luce/arrangements.hpp"

#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

namespace luce::arr {

SignVector::SignVector(std::vector<int> entries) {
  if (entries.empty()) throw InvalidArgument("sign vector must be nonempty");
  entries_.reserve(entries.size());
  for (int e : entries) {
    if (e < -1 || e > 1) throw InvalidArgument("sign vector entries must be -1, 0 or +1");
    entries_.push_back(static_cast<std::int8_t>(e));
  }
}

SignVector SignVector::parse(const std::string& text) {
  std::vector<int> v;
  for (char ch : text) {
    switch (ch) {
    case '+': v.push_back(1); break;
    case '-': v.push_back(-1); break;
    case '0': v.push_back(0); break;
    case ' ':
    case ',': break;
    default: throw InvalidArgument(std::string("bad sign character '") + ch + "'");
    }
  }
  return SignVector(std::move(v));
}

bool SignVector::is_chamber() const noexcept {
  return std::none_of(entries_.begin(), entries_.end(), [](std::int8_t e) { return e == 0; });
}

std::string SignVector::to_string() const {
  std::string s;
  for (auto e : entries_) s += e > 0 ? '+' : (e < 0 ? '-' : '0');
  return s;
}

OrderedSetPartition::OrderedSetPartition(std::vector<std::vector<int>> blocks)
    : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw InvalidArgument("set partition needs at least one block");
  for (auto& b : blocks_) {
    if (b.empty()) throw InvalidArgument("set partition blocks must be nonempty");
    std::sort(b.begin(), b.end());
    n_ += b.size();
  }
  block_of_.assign(n_, n_);
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    for (int label : blocks_[bi]) {
      if (label < 1 || static_cast<std::size_t>(label) > n_)
        throw InvalidArgument("set partition label " + std::to_string(label) +
                              " outside 1.." + std::to_string(n_));
      if (block_of_[label - 1] != n_)
        throw InvalidArgument("set partition repeats label " + std::to_string(label));
      block_of_[label - 1] = bi;
    }
  }
}

OrderedSetPartition OrderedSetPartition::parse(const std::string& text) {
  std::vector<std::vector<int>> blocks;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '/')) {
    for (char& ch : part)
      if (ch == ',') ch = ' ';
    std::istringstream is(part);
    std::vector<int> block;
    int v;
    while (is >> v) block.push_back(v);
    if (!is.eof()) throw InvalidArgument("bad set partition block '" + part + "'");
    blocks.push_back(std::move(block));
  }
  return OrderedSetPartition(std::move(blocks));
}

OrderedSetPartition OrderedSetPartition::from_permutation(const Permutation& pi) {
  std::vector<std::vector<int>> blocks;
  for (int label : pi.labels()) blocks.push_back({label});
  return OrderedSetPartition(std::move(blocks));
}

std::string OrderedSetPartition::to_string() const {
  std::string s;
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    if (bi) s += '/';
    for (std::size_t j = 0; j < blocks_[bi].size(); ++j) {
      if (j) s += ' ';
      s += std::to_string(blocks_[bi][j]);
    }
  }
  return s;
}

SignVector project_boolean(const SignVector& c, const SignVector& f) {
  if (c.size() != f.size())
    throw InvalidArgument("chamber and face dimensions differ (" + std::to_string(c.size()) +
                          " vs " + std::to_string(f.size()) + ")");
  if (!c.is_chamber()) throw InvalidArgument("projection source must be a chamber");
  std::vector<int> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = f[i] != 0 ? f[i] : c[i];
  return SignVector(std::move(out));
}

Permutation project_braid(const Permutation& c, const OrderedSetPartition& f) {
  if (c.size() != f.size())
    throw InvalidArgument("permutation and face sizes differ (" + std::to_string(c.size()) +
                          " vs " + std::to_string(f.size()) + ")");
  // Stable bucket by block: scanning c top to bottom keeps relative order.
  std::vector<std::vector<int>> buckets(f.blocks().size());
  for (int label : c.labels()) buckets[f.block_of(label)].push_back(label);
  std::vector<int> out;
  out.reserve(c.size());
  for (const auto& b : buckets) out.insert(out.end(), b.begin(), b.end());
  return Permutation(std::move(out));
}

std::size_t BooleanArrangement::chamber_index(const Chamber& c) const {
  validate_chamber(c);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < dim; ++i)
    if (c[i] > 0) idx |= std::size_t{1} << i;
  return idx;
}

SignVector BooleanArrangement::chamber_at(std::size_t index) const {
  std::vector<int> v(dim);
  for (std::size_t i = 0; i < dim; ++i) v[i] = (index >> i) & 1u ? 1 : -1;
  return SignVector(std::move(v));
}

void BooleanArrangement::validate_face(const Face& f) const {
  if (f.size() != dim)
    throw InvalidArgument("face " + f.to_string() + " has dimension " +
                          std::to_string(f.size()) + ", expected " + std::to_string(dim));
}

void BooleanArrangement::validate_chamber(const Chamber& c) const {
  validate_face(c);
  if (!c.is_chamber()) throw InvalidArgument(c.to_string() + " is not a chamber");
}

bool BooleanArrangement::separates(std::span<const Face* const> faces) const {
  for (std::size_t i = 0; i < dim; ++i) {
    const bool cut =
        std::any_of(faces.begin(), faces.end(), [i](const Face* f) { return (*f)[i] != 0; });
    if (!cut) return false;
  }
  return true;
}

std::size_t BraidArrangement::chamber_count() const {
  std::size_t c = 1;
  for (std::size_t i = 2; i <= n; ++i) c *= i;
  return c;
}

std::size_t BraidArrangement::chamber_index(const Chamber& c) const {
  validate_chamber(c);
  // Lehmer code: count smaller labels to the right of each position.
  std::size_t rank = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j)
      if (c[j] < c[i]) ++smaller;
    rank = rank * (n - i) + smaller;
  }
  return rank;
}

Permutation BraidArrangement::chamber_at(std::size_t index) const {
  std::vector<std::size_t> digits(n);
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t base = n - i;
    digits[i] = index % base;
    index /= base;
  }
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 1);
  std::vector<int> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(pool[digits[i]]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(digits[i]));
  }
  return Permutation(std::move(out));
}

void BraidArrangement::validate_face(const Face& f) const {
  if (f.size() != n)
    throw InvalidArgument("face " + f.to_string() + " partitions " + std::to_string(f.size()) +
                          " labels, expected " + std::to_string(n));
}

void BraidArrangement::validate_chamber(const Chamber& c) const {
  if (c.size() != n)
    throw InvalidArgument("chamber has " + std::to_string(c.size()) + " labels, expected " +
                          std::to_string(n));
}

bool BraidArrangement::separates(std::span<const Face* const> faces) const {
  for (int i = 1; i <= static_cast<int>(n); ++i)
    for (int j = i + 1; j <= static_cast<int>(n); ++j) {
      const bool cut = std::any_of(faces.begin(), faces.end(),
                                   [i, j](const Face* f) { return f->block_of(i) != f->block_of(j); });
      if (!cut) return false;
    }
  return true;
}

std::string BraidArrangement::chamber_label(const Chamber& c) const {
  std::string s;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (j) s += ' ';
    s += std::to_string(c[j]);
  }
  return s;
}

namespace {

// Dense full-pivot LU is used up to this size; rank revealing but cubic.
constexpr Eigen::Index kDenseSolveLimit = 1024;
constexpr double kResidualTol = 1e-10;
constexpr double kNegativeTol = 1e-12;

void check_square(const TransitionMatrix& k) {
  if (k.rows() != k.cols() || k.rows() == 0)
    throw InvalidArgument("transition matrix must be square and nonempty");
}

} // namespace

std::vector<double> stationary_exact(const TransitionMatrix& k) {
  check_square(k);
  const Eigen::Index n = k.rows();
  // Rows of K^T - I, with the last replaced by the normalization sum pi = 1.
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd pi;
  if (n <= kDenseSolveLimit) {
    Eigen::MatrixXd a = Eigen::MatrixXd(k.transpose()) - Eigen::MatrixXd::Identity(n, n);
    a.row(n - 1).setOnes();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible())
      throw NumericalFailure("stationary system is singular: the stationary law is not unique");
    pi = lu.solve(rhs);
  } else {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(k.nonZeros() + 2 * n));
    for (Eigen::Index row = 0; row < n; ++row)
      for (TransitionMatrix::InnerIterator it(k, row); it; ++it)
        if (it.col() != n - 1) triplets.emplace_back(it.col(), row, it.value());
    for (Eigen::Index i = 0; i + 1 < n; ++i) triplets.emplace_back(i, i, -1.0);
    for (Eigen::Index col = 0; col < n; ++col) triplets.emplace_back(n - 1, col, 1.0);
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success)
      throw NumericalFailure("stationary system is singular: the stationary law is not unique");
    pi = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !pi.allFinite())
      throw NumericalFailure("stationary solve failed");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (pi(i) < -kNegativeTol)
      throw NumericalFailure("stationary solve produced a negative mass " +
                             std::to_string(pi(i)));
    if (pi(i) < 0.0) pi(i) = 0.0;
  }
  pi /= pi.sum();
  const Eigen::RowVectorXd residual = pi.transpose() * k - pi.transpose();
  if (residual.cwiseAbs().maxCoeff() > kResidualTol)
    throw NumericalFailure("stationary residual " + std::to_string(residual.cwiseAbs().maxCoeff()) +
                           " exceeds 1e-10");
  return {pi.data(), pi.data() + n};
}

std::size_t stationary_multiplicity(const TransitionMatrix& k) {
  check_square(k);
  const Eigen::Index n = k.rows();
  if (n > kDenseSolveLimit)
    throw InvalidArgument("stationary_multiplicity supports at most 1024 states");
  const Eigen::MatrixXd a = Eigen::MatrixXd(k.transpose()) - Eigen::MatrixXd::Identity(n, n);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-10);
  return static_cast<std::size_t>(n - lu.rank());
}

BraidFaceTable tsetlin_face_weights(const WeightVector& w) {
  if (!w.is_normalized(1e-9))
    throw InvalidArgument("tsetlin_face_weights needs weights summing to 1");
  const std::size_t n = w.size();
  std::map<OrderedSetPartition, double> table;
  if (n == 1) {
    table.emplace(OrderedSetPartition(std::vector<std::vector<int>>{{1}}), 1.0);
    return {BraidArrangement{n}, std::move(table)};
  }
  for (std::size_t i = 1; i <= n; ++i) {
    std::vector<int> rest;
    for (std::size_t j = 1; j <= n; ++j)
      if (j != i) rest.push_back(static_cast<int>(j));
    table.emplace(OrderedSetPartition(std::vector<std::vector<int>>{{static_cast<int>(i)}, rest}),
                  w.theta(static_cast<int>(i)) / w.total());
  }
  return {BraidArrangement{n}, std::move(table)};
}

BraidFaceTable riffle_face_weights(std::size_t n) {
  if (n < 1 || n > kMaxRiffleN)
    throw InvalidArgument("riffle_face_weights supports 1 <= n <= 15");
  const double unit = std::ldexp(1.0, -static_cast<int>(n));
  std::map<OrderedSetPartition, double> table;
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 1);
  table.emplace(OrderedSetPartition(std::vector<std::vector<int>>{all}), 2.0 * unit);
  const std::size_t full = (std::size_t{1} << n) - 1;
  for (std::size_t mask = 1; mask < full; ++mask) {
    std::vector<int> heads, tails;
    for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? heads : tails).push_back(static_cast<int>(i + 1));
    table.emplace(OrderedSetPartition({heads, tails}), unit);
  }
  return {BraidArrangement{n}, std::move(table)};
}

BooleanFaceTable ehrenfest_face_weights(std::size_t d) {
  if (d < 1) throw InvalidArgument("ehrenfest_face_weights needs d >= 1");
  const double w = 1.0 / (2.0 * static_cast<double>(d));
  std::map<SignVector, double> table;
  for (std::size_t i = 0; i < d; ++i)
    for (int sign : {1, -1}) {
      std::vector<int> v(d, 0);
      v[i] = sign;
      table.emplace(SignVector(std::move(v)), w);
    }
  return {BooleanArrangement{d}, std::move(table)};
}

Graph make_graph(std::size_t vertex_count, std::vector<std::pair<int, int>> edges) {
  if (vertex_count == 0) throw InvalidArgument("graph needs at least one vertex");
  if (edges.empty()) throw InvalidArgument("graph needs at least one edge");
  std::set<std::pair<int, int>> seen;
  std::vector<int> parent(vertex_count);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (auto& [u, v] : edges) {
    if (u < 1 || v < 1 || static_cast<std::size_t>(u) > vertex_count ||
        static_cast<std::size_t>(v) > vertex_count)
      throw InvalidArgument("edge (" + std::to_string(u) + "," + std::to_string(v) +
                            ") has a vertex outside 1.." + std::to_string(vertex_count));
    if (u == v) throw InvalidArgument("self-loop at vertex " + std::to_string(u));
    if (!seen.insert({std::min(u, v), std::max(u, v)}).second)
      throw InvalidArgument("duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    parent[find(u - 1)] = find(v - 1);
  }
  for (std::size_t v = 1; v < vertex_count; ++v)
    if (find(static_cast<int>(v)) != find(0)) throw InvalidArgument("graph is not connected");
  return Graph{vertex_count, std::move(edges)};
}

Graph path_graph(std::size_t vertex_count) {
  std::vector<std::pair<int, int>> edges;
  for (std::size_t v = 1; v < vertex_count; ++v)
    edges.emplace_back(static_cast<int>(v), static_cast<int>(v + 1));
  return make_graph(vertex_count, std::move(edges));
}

Graph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<int, int>> edges;
  int max_label = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    int u, v;
    if (!(ls >> u)) continue;
    std::string extra;
    if (!(ls >> v) || (ls >> extra))
      throw InvalidArgument("edge list line " + std::to_string(line_no) +
                            ": expected two vertex labels");
    edges.emplace_back(u, v);
    max_label = std::max({max_label, u, v});
  }
  return make_graph(static_cast<std::size_t>(std::max(max_label, 0)), std::move(edges));
}

SignVector graph_coloring_step(const SignVector& coloring, const Graph& graph, RngStream& rng) {
  if (graph.edges.empty()) throw InvalidArgument("graph coloring needs a nonempty edge list");
  if (coloring.size() != graph.vertex_count)
    throw InvalidArgument("coloring length does not match the vertex count");
  const auto& [u, v] = graph.edges[rng.below(graph.edges.size())];
  const int sign = rng.uniform() < 0.5 ? 1 : -1;
  std::vector<int> out(coloring.entries().begin(), coloring.entries().end());
  out[u - 1] = sign;
  out[v - 1] = sign;
  return SignVector(std::move(out));
}

TransitionMatrix graph_coloring_matrix(const Graph& graph) {
  if (graph.edges.empty()) throw InvalidArgument("graph coloring needs a nonempty edge list");
  if (graph.vertex_count > kMaxColoringVertices)
    throw InvalidArgument("graph coloring matrix supports at most 12 vertices");
  const std::size_t count = std::size_t{1} << graph.vertex_count;
  const double w = 0.5 / static_cast<double>(graph.edges.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(count * graph.edges.size() * 2);
  for (std::size_t from = 0; from < count; ++from)
    for (const auto& [u, v] : graph.edges) {
      const std::size_t bits = (std::size_t{1} << (u - 1)) | (std::size_t{1} << (v - 1));
      triplets.emplace_back(static_cast<int>(from), static_cast<int>(from | bits), w);
      triplets.emplace_back(static_cast<int>(from), static_cast<int>(from & ~bits), w);
    }
  TransitionMatrix k(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

} // namespace luce::arr
