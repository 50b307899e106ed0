#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "edgecache/trace.hpp"
#include "edgecache/types.hpp"

namespace edgecache {

struct RatingEntry {
  CellId cell = 0;
  ContentId content = 0;
  double rating = 0.0;

  bool operator==(const RatingEntry&) const = default;
};

/// Sparse N x F popularity matrix. Entries are kept sorted by (cell, content);
/// only strictly positive ratings are stored.
class RatingMatrix {
 public:
  RatingMatrix() = default;
  RatingMatrix(std::size_t num_cells, std::size_t num_contents);
  /// Entries may arrive in any order; duplicates, out-of-range indices and
  /// non-positive ratings throw std::invalid_argument.
  RatingMatrix(std::size_t num_cells, std::size_t num_contents, std::vector<RatingEntry> entries);

  std::size_t num_cells() const noexcept { return num_cells_; }
  std::size_t num_contents() const noexcept { return num_contents_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<RatingEntry>& entries() const noexcept { return entries_; }

  std::optional<double> find(CellId cell, ContentId content) const;
  /// find() or 0.
  double value(CellId cell, ContentId content) const { return find(cell, content).value_or(0.0); }
  double sum() const;

  bool operator==(const RatingMatrix&) const = default;

 private:
  std::size_t num_cells_ = 0;
  std::size_t num_contents_ = 0;
  std::vector<RatingEntry> entries_;
};

/// Row-major dense N x F matrix; the input to placement.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix to_dense(const RatingMatrix& m);

/// Request counts per (cell, content). Throws std::invalid_argument for an
/// unassigned log and std::out_of_range for ids outside the shape.
RatingMatrix build_rating_matrix(const RequestLog& log, std::size_t num_cells, std::size_t num_contents);

/// Divides each cell's ratings by that cell's total.
RatingMatrix normalize_per_cell(const RatingMatrix& m);

struct RatingSplit {
  RatingMatrix train;
  RatingMatrix test;
  double train_fraction = 1.0;
};

/// Uniform sample without replacement of round(fraction * nnz) entries for
/// training; the rest go to test.
RatingSplit split_ratings(const RatingMatrix& m, double train_fraction, std::uint64_t seed);

struct CfHyperParams {
  std::size_t rank = 16;
  double regularization = 0.02;
  double learning_rate = 0.005;
  std::size_t epochs = 100;
  double init_scale = 0.1;
  /// Subtract the global training mean before factorizing.
  bool center_on_mean = true;
  /// Divide the step by the RMS of the (centered) training ratings, so that
  /// learning_rate acts on unit-scale ratings. The objective is unchanged.
  bool scale_step = true;
  /// Bold-driver step control: after an epoch that raises the loss the
  /// factors roll back and the step halves; otherwise the step grows by 5%.
  bool adaptive_step = true;
  /// A loss above this multiple of the first-epoch loss aborts training early.
  double divergence_factor = 10.0;
  std::uint64_t seed = 7;
};

struct FactorModel {
  std::size_t num_cells = 0;
  std::size_t num_contents = 0;
  std::size_t rank = 0;
  std::vector<double> cell_factors;     // num_cells x rank, row-major
  std::vector<double> content_factors;  // num_contents x rank, row-major
  double global_mean = 0.0;
  double rating_floor = 0.0;
  double rating_ceiling = 0.0;
  /// Regularized objective after each epoch.
  std::vector<double> loss_history;

  std::span<const double> cell_row(CellId n) const { return {cell_factors.data() + n * rank, rank}; }
  std::span<const double> content_row(ContentId f) const {
    return {content_factors.data() + f * rank, rank};
  }

  /// Zero factors; every prediction is `mean` clamped to [floor, ceiling].
  static FactorModel constant(std::size_t num_cells, std::size_t num_contents, std::size_t rank, double mean,
                              double floor, double ceiling);
};

/// Regularized-SVD by SGD over the observed entries of `train`.
///
/// Objective: sum over observed (n,f) of (r - mu - U_n.V_f)^2 + lambda (|U|^2 + |V|^2),
/// where mu is the training mean (0 when center_on_mean is off). Each epoch
/// visits the entries in a fresh seeded permutation and applies, with
/// e = r - mu - U_n.V_f,
///   U_n <- (U_n + eta e V_f) / (1 + eta lambda)
///   V_f <- (V_f + eta e U_n) / (1 + eta lambda)
/// using the pre-update U_n in the second line. With scale_step, eta is
/// learning_rate divided by the RMS of r - mu. The weight decay is applied
/// in implicit form so that large lambda shrinks factors instead of making
/// the step unstable.
///
/// With adaptive_step the recorded loss never rises after the first epoch.
///
/// Throws std::invalid_argument for an empty train set or bad parameters, and
/// TrainingError when the first epoch yields non-finite factors or a loss
/// above divergence_factor times the initial objective. Without
/// adaptive_step it also throws when a later epoch is non-finite or exceeds
/// divergence_factor times the first-epoch loss, or the final loss is above
/// the first.
FactorModel train_reg_svd(const RatingMatrix& train, const CfHyperParams& hyper);

/// clamp(mu + U_n.V_f, floor, ceiling). Throws std::out_of_range.
double predict_rating(const FactorModel& model, CellId cell, ContentId content);

/// Which cells of the estimate are filled by the model.
enum class EstimateScope {
  /// Every pair not in the training set.
  AllUnobserved,
  /// Only the held-out ratings (split.test); pairs absent from the trace stay 0.
  HeldOut,
};

/// Dense popularity estimate: training ratings pass through, the rest come
/// from predict_rating according to `scope`.
DenseMatrix estimate_popularity(const FactorModel& model, const RatingMatrix& ground, const RatingSplit& split,
                                EstimateScope scope = EstimateScope::AllUnobserved,
                                Exec exec = Exec::Parallel);

/// Root-mean-square prediction error over the entries of `test`.
double rating_rmse(const FactorModel& model, const RatingMatrix& test);

/// CSV triples cell,content,rating (no header).
void write_rating_csv(std::ostream& out, const RatingMatrix& m);
RatingMatrix read_rating_csv(std::istream& in, std::size_t num_cells, std::size_t num_contents);

/// Text format, version 1:
///   edgecache-factor-model 1
///   <num_cells> <num_contents> <rank>
///   <global_mean> <rating_floor> <rating_ceiling>
///   num_cells lines of rank values, then num_contents lines of rank values.
void save_factor_model(std::ostream& out, const FactorModel& model);
FactorModel load_factor_model(std::istream& in);

}  // namespace edgecache
