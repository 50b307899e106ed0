#include "edgecache/popularity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "edgecache/error.hpp"
#include "edgecache/parallel.hpp"
#include "edgecache/rng.hpp"

namespace edgecache {

namespace {

bool entry_less(const RatingEntry& a, const RatingEntry& b) {
  return a.cell != b.cell ? a.cell < b.cell : a.content < b.content;
}

void fisher_yates(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(v[i - 1], v[j]);
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

RatingMatrix::RatingMatrix(std::size_t num_cells, std::size_t num_contents)
    : num_cells_(num_cells), num_contents_(num_contents) {}

RatingMatrix::RatingMatrix(std::size_t num_cells, std::size_t num_contents, std::vector<RatingEntry> entries)
    : num_cells_(num_cells), num_contents_(num_contents), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), entry_less);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const RatingEntry& e = entries_[i];
    if (e.cell >= num_cells_ || e.content >= num_contents_)
      throw std::invalid_argument("RatingMatrix: entry index out of range");
    if (!(e.rating > 0.0) || !std::isfinite(e.rating))
      throw std::invalid_argument("RatingMatrix: stored ratings must be finite and > 0");
    if (i > 0 && !entry_less(entries_[i - 1], e)) throw std::invalid_argument("RatingMatrix: duplicate entry");
  }
}

std::optional<double> RatingMatrix::find(CellId cell, ContentId content) const {
  const RatingEntry key{cell, content, 0.0};
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), key, entry_less);
  if (it == entries_.end() || it->cell != cell || it->content != content) return std::nullopt;
  return it->rating;
}

double RatingMatrix::sum() const {
  double s = 0.0;
  for (const RatingEntry& e : entries_) s += e.rating;
  return s;
}

DenseMatrix to_dense(const RatingMatrix& m) {
  DenseMatrix d(m.num_cells(), m.num_contents());
  for (const RatingEntry& e : m.entries()) d(e.cell, e.content) = e.rating;
  return d;
}

RatingMatrix build_rating_matrix(const RequestLog& log, std::size_t num_cells, std::size_t num_contents) {
  std::vector<std::uint64_t> keys;
  keys.reserve(log.size());
  for (const Request& r : log.requests) {
    if (!r.cell) throw std::invalid_argument("build_rating_matrix: log is not assigned to cells");
    if (*r.cell >= num_cells || r.content >= num_contents)
      throw std::out_of_range("build_rating_matrix: request outside the matrix shape");
    keys.push_back((static_cast<std::uint64_t>(*r.cell) << 32) | r.content);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<RatingEntry> entries;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    entries.push_back(RatingEntry{static_cast<CellId>(keys[i] >> 32), static_cast<ContentId>(keys[i] & 0xffffffffu),
                                  static_cast<double>(j - i)});
    i = j;
  }
  return RatingMatrix(num_cells, num_contents, std::move(entries));
}

RatingMatrix normalize_per_cell(const RatingMatrix& m) {
  std::vector<double> totals(m.num_cells(), 0.0);
  for (const RatingEntry& e : m.entries()) totals[e.cell] += e.rating;
  std::vector<RatingEntry> out = m.entries();
  for (RatingEntry& e : out) e.rating /= totals[e.cell];
  return RatingMatrix(m.num_cells(), m.num_contents(), std::move(out));
}

RatingSplit split_ratings(const RatingMatrix& m, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw std::invalid_argument("split_ratings: train_fraction must be in (0, 1]");
  const std::size_t n = m.nnz();
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  fisher_yates(order, rng);

  std::vector<char> in_train(n, 0);
  for (std::size_t i = 0; i < n_train; ++i) in_train[order[i]] = 1;
  std::vector<RatingEntry> train, test;
  train.reserve(n_train);
  test.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) (in_train[i] ? train : test).push_back(m.entries()[i]);

  return RatingSplit{RatingMatrix(m.num_cells(), m.num_contents(), std::move(train)),
                     RatingMatrix(m.num_cells(), m.num_contents(), std::move(test)), train_fraction};
}

FactorModel FactorModel::constant(std::size_t num_cells, std::size_t num_contents, std::size_t rank, double mean,
                                  double floor, double ceiling) {
  FactorModel m;
  m.num_cells = num_cells;
  m.num_contents = num_contents;
  m.rank = rank;
  m.cell_factors.assign(num_cells * rank, 0.0);
  m.content_factors.assign(num_contents * rank, 0.0);
  m.global_mean = mean;
  m.rating_floor = floor;
  m.rating_ceiling = ceiling;
  return m;
}

namespace {

double objective(const RatingMatrix& train, const FactorModel& m, double lambda) {
  double loss = 0.0;
  for (const RatingEntry& e : train.entries()) {
    const double err = e.rating - m.global_mean - dot(m.cell_row(e.cell), m.content_row(e.content));
    loss += err * err;
  }
  double norm = 0.0;
  for (double x : m.cell_factors) norm += x * x;
  for (double x : m.content_factors) norm += x * x;
  return loss + lambda * norm;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

FactorModel train_reg_svd(const RatingMatrix& train, const CfHyperParams& hyper) {
  if (train.empty()) throw std::invalid_argument("train_reg_svd: training set is empty");
  if (hyper.rank < 1) throw std::invalid_argument("train_reg_svd: rank must be >= 1");
  if (!(hyper.regularization >= 0.0)) throw std::invalid_argument("train_reg_svd: regularization must be >= 0");
  if (!(hyper.learning_rate > 0.0)) throw std::invalid_argument("train_reg_svd: learning_rate must be > 0");
  if (hyper.epochs < 1) throw std::invalid_argument("train_reg_svd: epochs must be >= 1");
  if (!(hyper.init_scale > 0.0)) throw std::invalid_argument("train_reg_svd: init_scale must be > 0");

  const auto& entries = train.entries();
  double lo = entries.front().rating, hi = lo;
  for (const RatingEntry& e : entries) {
    lo = std::min(lo, e.rating);
    hi = std::max(hi, e.rating);
  }
  const double mean = hyper.center_on_mean ? train.sum() / static_cast<double>(entries.size()) : 0.0;

  FactorModel m = FactorModel::constant(train.num_cells(), train.num_contents(), hyper.rank, mean, lo, hi);
  Rng rng(hyper.seed);
  for (double& x : m.cell_factors) x = rng.uniform(-hyper.init_scale, hyper.init_scale);
  for (double& x : m.content_factors) x = rng.uniform(-hyper.init_scale, hyper.init_scale);

  const std::size_t k = hyper.rank;
  double spread = 0.0;
  for (const RatingEntry& e : entries) spread += (e.rating - mean) * (e.rating - mean);
  spread = std::sqrt(spread / static_cast<double>(entries.size()));
  double eta = hyper.scale_step && spread > 0.0 ? hyper.learning_rate / spread : hyper.learning_rate;
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> u_old(k), cells_kept, contents_kept;
  m.loss_history.reserve(hyper.epochs);
  const double initial_loss = objective(train, m, hyper.regularization);

  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    if (hyper.adaptive_step) {
      cells_kept = m.cell_factors;
      contents_kept = m.content_factors;
    }
    const double shrink = 1.0 / (1.0 + eta * hyper.regularization);
    fisher_yates(order, rng);
    for (std::size_t idx : order) {
      const RatingEntry& e = entries[idx];
      double* u = m.cell_factors.data() + e.cell * k;
      double* v = m.content_factors.data() + e.content * k;
      double pred = mean;
      for (std::size_t j = 0; j < k; ++j) pred += u[j] * v[j];
      const double err = e.rating - pred;
      std::copy(u, u + k, u_old.begin());
      for (std::size_t j = 0; j < k; ++j) u[j] = (u[j] + eta * err * v[j]) * shrink;
      for (std::size_t j = 0; j < k; ++j) v[j] = (v[j] + eta * err * u_old[j]) * shrink;
    }
    const double loss = objective(train, m, hyper.regularization);
    const bool finite = std::isfinite(loss) && all_finite(m.cell_factors) && all_finite(m.content_factors);

    if (m.loss_history.empty()) {
      if (!finite) throw TrainingError("train_reg_svd: non-finite factors", epoch);
      if (loss > hyper.divergence_factor * initial_loss) throw TrainingError("train_reg_svd: loss diverged", epoch);
    } else if (hyper.adaptive_step) {
      if (!finite || loss > m.loss_history.back()) {
        m.cell_factors = cells_kept;
        m.content_factors = contents_kept;
        eta *= 0.5;
        m.loss_history.push_back(m.loss_history.back());
        continue;
      }
      eta *= 1.05;
    } else {
      if (!finite) throw TrainingError("train_reg_svd: non-finite factors", epoch);
      if (loss > hyper.divergence_factor * m.loss_history.front())
        throw TrainingError("train_reg_svd: loss diverged", epoch);
    }
    m.loss_history.push_back(loss);
  }
  if (m.loss_history.back() > m.loss_history.front())
    throw TrainingError("train_reg_svd: final loss above first-epoch loss", hyper.epochs);
  return m;
}

double predict_rating(const FactorModel& model, CellId cell, ContentId content) {
  if (cell >= model.num_cells || content >= model.num_contents)
    throw std::out_of_range("predict_rating: index out of range");
  const double raw = model.global_mean + dot(model.cell_row(cell), model.content_row(content));
  return std::clamp(raw, model.rating_floor, model.rating_ceiling);
}

DenseMatrix estimate_popularity(const FactorModel& model, const RatingMatrix& ground, const RatingSplit& split,
                                EstimateScope scope, Exec exec) {
  const std::size_t n_cells = ground.num_cells();
  const std::size_t n_contents = ground.num_contents();
  if (model.num_cells != n_cells || model.num_contents != n_contents || split.train.num_cells() != n_cells ||
      split.train.num_contents() != n_contents)
    throw std::invalid_argument("estimate_popularity: shape mismatch");

  DenseMatrix out(n_cells, n_contents);
  if (scope == EstimateScope::AllUnobserved) {
    parallel_for(n_cells, exec, [&](std::size_t n) {
      for (std::size_t f = 0; f < n_contents; ++f)
        out(n, f) = predict_rating(model, static_cast<CellId>(n), static_cast<ContentId>(f));
    });
  } else {
    for (const RatingEntry& e : split.test.entries()) out(e.cell, e.content) = predict_rating(model, e.cell, e.content);
  }
  for (const RatingEntry& e : split.train.entries()) out(e.cell, e.content) = e.rating;
  return out;
}

double rating_rmse(const FactorModel& model, const RatingMatrix& test) {
  if (test.empty()) throw std::invalid_argument("rating_rmse: test set is empty");
  double s = 0.0;
  for (const RatingEntry& e : test.entries()) {
    const double d = predict_rating(model, e.cell, e.content) - e.rating;
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(test.nnz()));
}

void write_rating_csv(std::ostream& out, const RatingMatrix& m) {
  char buf[32];
  for (const RatingEntry& e : m.entries()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.rating);
    out << e.cell << ',' << e.content << ',' << buf << '\n';
  }
}

RatingMatrix read_rating_csv(std::istream& in, std::size_t num_cells, std::size_t num_contents) {
  std::vector<RatingEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    RatingEntry e;
    char c1 = 0, c2 = 0;
    if (!(ls >> e.cell >> c1 >> e.content >> c2 >> e.rating) || c1 != ',' || c2 != ',')
      throw ParseError("rating csv: malformed line " + std::to_string(lineno));
    entries.push_back(e);
  }
  return RatingMatrix(num_cells, num_contents, std::move(entries));
}

void save_factor_model(std::ostream& out, const FactorModel& m) {
  char buf[32];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
  };
  out << "edgecache-factor-model 1\n" << m.num_cells << ' ' << m.num_contents << ' ' << m.rank << '\n';
  put(m.global_mean);
  out << ' ';
  put(m.rating_floor);
  out << ' ';
  put(m.rating_ceiling);
  out << '\n';
  auto rows = [&](const std::vector<double>& v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m.rank; ++j) {
        if (j) out << ' ';
        put(v[i * m.rank + j]);
      }
      out << '\n';
    }
  };
  rows(m.cell_factors, m.num_cells);
  rows(m.content_factors, m.num_contents);
}

FactorModel load_factor_model(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "edgecache-factor-model")
    throw ParseError("factor model: bad header");
  if (version != 1) throw ParseError("factor model: unsupported version " + std::to_string(version));
  FactorModel m;
  if (!(in >> m.num_cells >> m.num_contents >> m.rank >> m.global_mean >> m.rating_floor >> m.rating_ceiling))
    throw ParseError("factor model: bad dimensions line");
  m.cell_factors.resize(m.num_cells * m.rank);
  m.content_factors.resize(m.num_contents * m.rank);
  for (double& x : m.cell_factors)
    if (!(in >> x)) throw ParseError("factor model: truncated cell factors");
  for (double& x : m.content_factors)
    if (!(in >> x)) throw ParseError("factor model: truncated content factors");
  return m;
}

}  // namespace edgecache
