#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "luce/error.hpp"
#include "luce/luce_model.hpp"
#include "luce/rng.hpp"
#include "luce/weights.hpp"

namespace luce::arr {

/// Face of the Boolean arrangement: entry i is the side of x_i = 0 (-1, 0, +1).
class SignVector {
public:
  SignVector() = default;
  explicit SignVector(std::vector<int> entries);
  /// Parses "+-0+" style strings.
  static SignVector parse(const std::string& text);

  std::size_t size() const noexcept { return entries_.size(); }
  int operator[](std::size_t i) const { return entries_[i]; }
  std::span<const std::int8_t> entries() const noexcept { return entries_; }
  bool is_chamber() const noexcept;
  std::string to_string() const;

  friend bool operator==(const SignVector&, const SignVector&) = default;
  friend auto operator<=>(const SignVector&, const SignVector&) = default;

private:
  std::vector<std::int8_t> entries_;
};

/// Face of the braid arrangement: blocks listed top to bottom, each block a
/// sorted set of labels; together the blocks partition {1..n}.
class OrderedSetPartition {
public:
  explicit OrderedSetPartition(std::vector<std::vector<int>> blocks);
  /// Parses "1 3/2/4 5" (blocks separated by '/', labels by spaces or commas).
  static OrderedSetPartition parse(const std::string& text);
  /// The chamber face listing `pi` as singletons.
  static OrderedSetPartition from_permutation(const Permutation& pi);

  std::size_t size() const noexcept { return n_; }
  const std::vector<std::vector<int>>& blocks() const noexcept { return blocks_; }
  /// Index of the block holding `label`.
  std::size_t block_of(int label) const { return block_of_[static_cast<std::size_t>(label - 1)]; }
  bool is_chamber() const noexcept { return blocks_.size() == n_; }
  std::string to_string() const;

  friend bool operator==(const OrderedSetPartition& a, const OrderedSetPartition& b) {
    return a.blocks_ == b.blocks_;
  }
  friend auto operator<=>(const OrderedSetPartition& a, const OrderedSetPartition& b) {
    return a.blocks_ <=> b.blocks_;
  }

private:
  std::vector<std::vector<int>> blocks_;
  std::vector<std::size_t> block_of_;
  std::size_t n_ = 0;
};

/// Tits projection on the Boolean arrangement: f's nonzero entries override c.
SignVector project_boolean(const SignVector& c, const SignVector& f);

/// Tits projection on the braid arrangement: f's blocks in order, each
/// block's labels in their relative order in c.
Permutation project_braid(const Permutation& c, const OrderedSetPartition& f);

/// Coordinate hyperplanes x_i = 0 in R^d.
struct BooleanArrangement {
  using Face = SignVector;
  using Chamber = SignVector;
  static constexpr const char* kName = "boolean";
  static constexpr std::size_t kMaxChamberDim = 15;

  std::size_t dim = 1;

  std::size_t chamber_count() const { return std::size_t{1} << dim; }
  /// Bit i of the index is set when coordinate i is +1.
  std::size_t chamber_index(const Chamber& c) const;
  Chamber chamber_at(std::size_t index) const;
  Chamber reference_chamber() const { return chamber_at(chamber_count() - 1); }
  Chamber project(const Chamber& c, const Face& f) const { return project_boolean(c, f); }
  void validate_face(const Face& f) const;
  void validate_chamber(const Chamber& c) const;
  /// Every hyperplane is cut by some face in `faces`.
  bool separates(std::span<const Face* const> faces) const;
  bool enumerable() const { return dim <= kMaxChamberDim; }
  std::string chamber_label(const Chamber& c) const { return c.to_string(); }
  std::string face_label(const Face& f) const { return f.to_string(); }
};

/// Hyperplanes x_i = x_j in R^n; chambers are permutations.
struct BraidArrangement {
  using Face = OrderedSetPartition;
  using Chamber = Permutation;
  static constexpr const char* kName = "braid";
  static constexpr std::size_t kMaxChamberN = 8;

  std::size_t n = 1;

  std::size_t chamber_count() const;
  /// Lexicographic rank of the permutation.
  std::size_t chamber_index(const Chamber& c) const;
  Chamber chamber_at(std::size_t index) const;
  Chamber reference_chamber() const { return Permutation::identity(n); }
  Chamber project(const Chamber& c, const Face& f) const { return project_braid(c, f); }
  void validate_face(const Face& f) const;
  void validate_chamber(const Chamber& c) const;
  bool separates(std::span<const Face* const> faces) const;
  bool enumerable() const { return n <= kMaxChamberN; }
  std::string chamber_label(const Chamber& c) const;
  std::string face_label(const Face& f) const { return f.to_string(); }
};

inline constexpr double kFaceWeightSumTol = 1e-12;

/// Sparse nonnegative face weights summing to one. Faces are kept in their
/// natural order so sampling is reproducible.
template <class Arrangement>
class FaceWeightTable {
public:
  using Face = typename Arrangement::Face;

  FaceWeightTable(Arrangement arrangement, std::map<Face, double> weights)
      : arrangement_(arrangement), weights_(std::move(weights)) {
    double total = 0.0;
    for (const auto& [face, w] : weights_) {
      arrangement_.validate_face(face);
      if (!(w >= 0.0) || !std::isfinite(w))
        throw InvalidArgument("face weight for " + arrangement_.face_label(face) +
                              " must be nonnegative and finite");
      total += w;
      if (w > 0.0) {
        positive_faces_.push_back(face);
        positive_weights_.push_back(w);
      }
    }
    if (std::abs(total - 1.0) > kFaceWeightSumTol)
      throw InvalidArgument("face weights must sum to 1 within 1e-12 (sum is " +
                            std::to_string(total) + ")");
  }

  const Arrangement& arrangement() const noexcept { return arrangement_; }
  const std::map<Face, double>& weights() const noexcept { return weights_; }
  /// Faces with positive weight, in key order, and their weights.
  const std::vector<Face>& positive_faces() const noexcept { return positive_faces_; }
  const std::vector<double>& positive_weights() const noexcept { return positive_weights_; }

private:
  Arrangement arrangement_;
  std::map<Face, double> weights_;
  std::vector<Face> positive_faces_;
  std::vector<double> positive_weights_;
};

using BooleanFaceTable = FaceWeightTable<BooleanArrangement>;
using BraidFaceTable = FaceWeightTable<BraidArrangement>;

/// The walk: pick a face by weight, project the current chamber onto it.
template <class Arrangement>
class ChamberChain {
public:
  using Chamber = typename Arrangement::Chamber;

  ChamberChain(FaceWeightTable<Arrangement> table, Chamber start)
      : table_(std::move(table)), current_(std::move(start)) {
    table_.arrangement().validate_chamber(current_);
    double acc = 0.0;
    for (double w : table_.positive_weights()) cumulative_.push_back(acc += w);
  }

  const Chamber& current() const noexcept { return current_; }
  const FaceWeightTable<Arrangement>& table() const noexcept { return table_; }

  const Chamber& step(RngStream& rng) {
    const double target = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    if (it == cumulative_.end()) --it;
    const auto& face = table_.positive_faces()[static_cast<std::size_t>(it - cumulative_.begin())];
    current_ = table_.arrangement().project(current_, face);
    return current_;
  }

private:
  FaceWeightTable<Arrangement> table_;
  Chamber current_;
  std::vector<double> cumulative_;
};

/// Row-stochastic kernel over enumerated chambers (rows = from).
using TransitionMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

template <class Arrangement>
TransitionMatrix transition_matrix(const FaceWeightTable<Arrangement>& table) {
  const auto& arrangement = table.arrangement();
  if (!arrangement.enumerable())
    throw InvalidArgument(std::string(Arrangement::kName) +
                          " arrangement too large to enumerate chambers");
  const std::size_t count = arrangement.chamber_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(count * table.positive_faces().size());
  for (std::size_t from = 0; from < count; ++from) {
    const auto chamber = arrangement.chamber_at(from);
    for (std::size_t f = 0; f < table.positive_faces().size(); ++f) {
      const auto to = arrangement.chamber_index(
          arrangement.project(chamber, table.positive_faces()[f]));
      triplets.emplace_back(static_cast<int>(from), static_cast<int>(to),
                            table.positive_weights()[f]);
    }
  }
  TransitionMatrix k(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

template <class Arrangement>
bool is_separating(const FaceWeightTable<Arrangement>& table) {
  std::vector<const typename Arrangement::Face*> faces;
  for (const auto& f : table.positive_faces()) faces.push_back(&f);
  return table.arrangement().separates(faces);
}

/// Stationary law by a direct solve of pi (K - I) = 0, sum pi = 1.
/// Throws NumericalFailure when the system is singular (non-unique law) or
/// the residual exceeds 1e-10.
std::vector<double> stationary_exact(const TransitionMatrix& k);

/// Dimension of the left eigenspace of K for eigenvalue 1.
std::size_t stationary_multiplicity(const TransitionMatrix& k);

/// Exact sample from the stationary law: draw the positive-weight faces
/// without replacement proportional to weight, then project `start` onto
/// them from the last drawn to the first.
template <class Arrangement>
typename Arrangement::Chamber
brown_diaconis_sample(const FaceWeightTable<Arrangement>& table, RngStream& rng,
                      const std::optional<typename Arrangement::Chamber>& start = std::nullopt) {
  if (!is_separating(table))
    throw PreconditionViolation("face weights are not separating; stationary law is not unique");
  const auto& arrangement = table.arrangement();
  auto chamber = start ? *start : arrangement.reference_chamber();
  arrangement.validate_chamber(chamber);
  const WeightVector urn(table.positive_weights());
  const Permutation order = sample_urn(urn, rng);
  for (std::size_t j = order.size(); j-- > 0;)
    chamber = arrangement.project(chamber, table.positive_faces()[order[j] - 1]);
  return chamber;
}

/// Weight theta_i on each face {i} / [n] minus {i}: move card i to the top.
BraidFaceTable tsetlin_face_weights(const WeightVector& w);
inline constexpr std::size_t kMaxRiffleN = 15;
/// Inverse riffle: 2^{-n} on each S / [n] minus S; the empty and full S
/// both act as the identity and share the one-block face.
BraidFaceTable riffle_face_weights(std::size_t n);
/// 1/(2d) on each face with exactly one nonzero coordinate.
BooleanFaceTable ehrenfest_face_weights(std::size_t d);

/// Simple connected graph on vertices 1..vertex_count.
struct Graph {
  std::size_t vertex_count = 0;
  std::vector<std::pair<int, int>> edges;
};

/// Validates simplicity and connectivity.
Graph make_graph(std::size_t vertex_count, std::vector<std::pair<int, int>> edges);
Graph path_graph(std::size_t vertex_count);
/// Reads "u v" lines; '#' starts a comment. Vertex count is the largest label.
Graph parse_edge_list(const std::string& text);

inline constexpr std::size_t kMaxColoringVertices = 12;

/// Pick a uniform edge and paint both endpoints + or - with chance 1/2.
SignVector graph_coloring_step(const SignVector& coloring, const Graph& graph, RngStream& rng);

/// Kernel of the coloring chain over all 2^V colorings, indexed like
/// Boolean chambers (bit v-1 set when vertex v is +).
TransitionMatrix graph_coloring_matrix(const Graph& graph);

} // namespace luce::arr
