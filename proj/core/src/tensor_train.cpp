#include "tnp/tensor_train.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tnp/errors.hpp"

namespace tnp {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMat>;
using RowMap = Eigen::Map<RowMat>;

std::string dims_str(std::size_t a, std::size_t b) {
  return std::to_string(a) + " vs " + std::to_string(b);
}

// Smallest rank keeping the discarded tail within tol of the spectrum norm.
std::size_t choose_rank(const Eigen::VectorXd& sv, std::size_t rows, std::size_t cols,
                        std::size_t max_rank, double tol) {
  if (sv.size() == 0 || sv(0) <= 0.0) return 1;
  const double thresh = sv(0) * static_cast<double>(std::max(rows, cols)) *
                        std::numeric_limits<double>::epsilon();
  std::size_t r = 0;
  while (r < static_cast<std::size_t>(sv.size()) && sv(static_cast<Eigen::Index>(r)) > thresh) ++r;
  if (tol > 0.0) {
    const double budget = tol * tol * sv.squaredNorm();
    double tail = 0.0;
    while (r > 1) {
      const double s = sv(static_cast<Eigen::Index>(r - 1));
      if (tail + s * s > budget) break;
      tail += s * s;
      --r;
    }
  }
  return std::clamp<std::size_t>(r, 1, std::max<std::size_t>(max_rank, 1));
}

struct CoreBuf {
  std::size_t rl, n, rr;
  std::vector<double> v;
};

std::vector<CoreBuf> to_buffers(const TTFormat& tt) {
  std::vector<CoreBuf> out;
  out.reserve(tt.order());
  for (const auto& c : tt.cores()) out.push_back({c.dim(0), c.dim(1), c.dim(2), c.values()});
  return out;
}

TTFormat from_buffers(std::vector<CoreBuf>&& bufs) {
  std::vector<DenseTensor> cores;
  cores.reserve(bufs.size());
  for (auto& b : bufs) cores.emplace_back(Shape{b.rl, b.n, b.rr}, std::move(b.v));
  return TTFormat(std::move(cores));
}

}  // namespace

// ---------------------------------------------------------------------------
// Formats

TTFormat::TTFormat(std::vector<DenseTensor> cores) : cores_(std::move(cores)) {
  if (cores_.empty()) throw StructuralError("TT needs at least one core");
  for (std::size_t k = 0; k < cores_.size(); ++k) {
    if (cores_[k].order() != 3) {
      throw StructuralError("TT core " + std::to_string(k) + " is not 3-way");
    }
    if (k > 0 && cores_[k - 1].dim(2) != cores_[k].dim(0)) {
      throw StructuralError("TT rank mismatch between cores " + std::to_string(k - 1) +
                            " and " + std::to_string(k) + ": " +
                            dims_str(cores_[k - 1].dim(2), cores_[k].dim(0)));
    }
  }
  if (cores_.front().dim(0) != 1 || cores_.back().dim(2) != 1) {
    throw StructuralError("TT boundary ranks must be 1");
  }
}

std::vector<std::size_t> TTFormat::ranks() const {
  std::vector<std::size_t> r;
  r.reserve(cores_.size() + 1);
  for (const auto& c : cores_) r.push_back(c.dim(0));
  r.push_back(cores_.empty() ? 1 : cores_.back().dim(2));
  return r;
}

Shape TTFormat::mode_sizes() const {
  Shape s;
  for (const auto& c : cores_) s.push_back(c.dim(1));
  return s;
}

std::size_t TTFormat::max_rank() const {
  const auto r = ranks();
  return *std::max_element(r.begin(), r.end());
}

std::size_t TTFormat::parameter_count() const {
  std::size_t n = 0;
  for (const auto& c : cores_) n += c.size();
  return n;
}

bool TTFormat::all_finite() const {
  return std::all_of(cores_.begin(), cores_.end(),
                     [](const DenseTensor& c) { return c.all_finite(); });
}

MPOFormat::MPOFormat(std::vector<DenseTensor> cores) : cores_(std::move(cores)) {
  if (cores_.empty()) throw StructuralError("MPO needs at least one core");
  for (std::size_t k = 0; k < cores_.size(); ++k) {
    if (cores_[k].order() != 4) {
      throw StructuralError("MPO core " + std::to_string(k) + " is not 4-way");
    }
    if (k > 0 && cores_[k - 1].dim(3) != cores_[k].dim(0)) {
      throw StructuralError("MPO rank mismatch between cores " + std::to_string(k - 1) +
                            " and " + std::to_string(k));
    }
  }
  if (cores_.front().dim(0) != 1 || cores_.back().dim(3) != 1) {
    throw StructuralError("MPO boundary ranks must be 1");
  }
}

std::vector<std::size_t> MPOFormat::ranks() const {
  std::vector<std::size_t> r;
  for (const auto& c : cores_) r.push_back(c.dim(0));
  r.push_back(cores_.back().dim(3));
  return r;
}

Shape MPOFormat::input_dims() const {
  Shape s;
  for (const auto& c : cores_) s.push_back(c.dim(2));
  return s;
}

Shape MPOFormat::output_dims() const {
  Shape s;
  for (const auto& c : cores_) s.push_back(c.dim(1));
  return s;
}

// ---------------------------------------------------------------------------
// Contraction

DenseTensor tt_contract(const TTFormat& tt, std::size_t element_budget) {
  const Shape modes = tt.mode_sizes();
  if (shape_product(modes) > element_budget) {
    throw CapacityError("TT contraction of " + std::to_string(shape_product(modes)) +
                        " elements exceeds budget " + std::to_string(element_budget));
  }
  std::vector<double> acc{1.0};
  std::size_t rows = 1;
  for (const auto& c : tt.cores()) {
    const std::size_t rl = c.dim(0), n = c.dim(1), rr = c.dim(2);
    if (rows * n * rr > element_budget) {
      throw CapacityError("TT contraction intermediate exceeds element budget");
    }
    std::vector<double> next(rows * n * rr);
    RowMap(next.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n * rr))
        .noalias() = ConstRowMap(acc.data(), static_cast<Eigen::Index>(rows),
                                 static_cast<Eigen::Index>(rl)) *
                     ConstRowMap(c.data().data(), static_cast<Eigen::Index>(rl),
                                 static_cast<Eigen::Index>(n * rr));
    acc = std::move(next);
    rows *= n;
  }
  return DenseTensor(modes, std::move(acc));
}

// ---------------------------------------------------------------------------
// TT-SVD

TTFormat tt_svd(const DenseTensor& x, std::size_t max_rank, double tol) {
  if (x.size() == 0 || x.order() == 0) throw StructuralError("tt_svd: empty tensor");
  if (max_rank == 0) throw RangeError("tt_svd: max_rank must be positive");
  if (tol < 0.0) throw RangeError("tt_svd: tol must be nonnegative");
  const std::size_t order = x.order();

  if (x.norm() == 0.0) {
    std::vector<DenseTensor> cores;
    for (std::size_t k = 0; k < order; ++k) cores.emplace_back(Shape{1, x.dim(k), 1});
    return TTFormat(std::move(cores));
  }

  std::vector<DenseTensor> cores;
  std::vector<double> rest = x.values();
  std::size_t r_prev = 1;
  for (std::size_t k = 0; k + 1 < order; ++k) {
    const std::size_t rows = r_prev * x.dim(k);
    const std::size_t cols = rest.size() / rows;
    ConstRowMap m(rest.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const std::size_t r = std::min<std::size_t>(
        choose_rank(svd.singularValues(), rows, cols, max_rank, tol),
        static_cast<std::size_t>(svd.singularValues().size()));
    const auto er = static_cast<Eigen::Index>(r);

    std::vector<double> core(rows * r);
    RowMap(core.data(), static_cast<Eigen::Index>(rows), er) = svd.matrixU().leftCols(er);
    cores.emplace_back(Shape{r_prev, x.dim(k), r}, std::move(core));

    std::vector<double> next(r * cols);
    RowMap(next.data(), er, static_cast<Eigen::Index>(cols)) =
        svd.singularValues().head(er).asDiagonal() * svd.matrixV().leftCols(er).transpose();
    rest = std::move(next);
    r_prev = r;
  }
  cores.emplace_back(Shape{r_prev, x.dim(order - 1), 1}, std::move(rest));
  return TTFormat(std::move(cores));
}

// ---------------------------------------------------------------------------
// Rounding

TTFormat tt_round(const TTFormat& tt, std::size_t max_rank, double tol) {
  if (max_rank == 0) throw RangeError("tt_round: max_rank must be positive");
  if (tol < 0.0) throw RangeError("tt_round: tol must be nonnegative");
  auto cores = to_buffers(tt);
  const std::size_t order = cores.size();

  for (std::size_t k = order - 1; k >= 1; --k) {
    CoreBuf& c = cores[k];
    const auto nr = static_cast<Eigen::Index>(c.n * c.rr);
    const auto rl = static_cast<Eigen::Index>(c.rl);
    const Eigen::MatrixXd mt = ConstRowMap(c.v.data(), rl, nr).transpose();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(mt);
    const Eigen::Index q = std::min(nr, rl);
    const Eigen::MatrixXd qmat = qr.householderQ() * Eigen::MatrixXd::Identity(nr, q);
    const Eigen::MatrixXd rmat =
        qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();

    std::vector<double> nv(static_cast<std::size_t>(q * nr));
    RowMap(nv.data(), q, nr) = qmat.transpose();
    c.v = std::move(nv);
    c.rl = static_cast<std::size_t>(q);

    CoreBuf& p = cores[k - 1];
    const auto prow = static_cast<Eigen::Index>(p.rl * p.n);
    std::vector<double> pv(static_cast<std::size_t>(prow * q));
    RowMap(pv.data(), prow, q).noalias() =
        ConstRowMap(p.v.data(), prow, static_cast<Eigen::Index>(p.rr)) * rmat.transpose();
    p.v = std::move(pv);
    p.rr = static_cast<std::size_t>(q);
  }

  for (std::size_t k = 0; k + 1 < order; ++k) {
    CoreBuf& c = cores[k];
    const std::size_t rows = c.rl * c.n;
    ConstRowMap m(c.v.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(c.rr));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const std::size_t r = std::min<std::size_t>(
        choose_rank(svd.singularValues(), rows, c.rr, max_rank, tol),
        static_cast<std::size_t>(svd.singularValues().size()));
    const auto er = static_cast<Eigen::Index>(r);

    const RowMat sv =
        svd.singularValues().head(er).asDiagonal() * svd.matrixV().leftCols(er).transpose();
    std::vector<double> u(rows * r);
    RowMap(u.data(), static_cast<Eigen::Index>(rows), er) = svd.matrixU().leftCols(er);
    c.v = std::move(u);
    const std::size_t old_rr = c.rr;
    c.rr = r;

    CoreBuf& nx = cores[k + 1];
    const auto ncols = static_cast<Eigen::Index>(nx.n * nx.rr);
    std::vector<double> nv(r * static_cast<std::size_t>(ncols));
    RowMap(nv.data(), er, ncols).noalias() =
        sv * ConstRowMap(nx.v.data(), static_cast<Eigen::Index>(old_rr), ncols);
    nx.v = std::move(nv);
    nx.rl = r;
  }
  return from_buffers(std::move(cores));
}

TTFormat tt_balance(const TTFormat& tt) {
  const std::size_t order = tt.order();
  std::vector<double> norms(order);
  double log_sum = 0.0;
  for (std::size_t k = 0; k < order; ++k) {
    norms[k] = tt.core(k).norm();
    if (norms[k] == 0.0 || !std::isfinite(norms[k])) return tt;
    log_sum += std::log(norms[k]);
  }
  const double target = std::exp(log_sum / static_cast<double>(order));
  std::vector<DenseTensor> cores = tt.cores();
  for (std::size_t k = 0; k < order; ++k) {
    const double s = target / norms[k];
    for (double& v : cores[k].data()) v *= s;
  }
  return TTFormat(std::move(cores));
}

// ---------------------------------------------------------------------------
// MPO application

TTFormat mpo_apply(const MPOFormat& op, const TTFormat& tt) {
  const std::size_t op_order = op.order();
  const std::size_t tt_order = tt.order();
  if (op_order < tt_order) {
    throw StructuralError("mpo_apply: operator has " + std::to_string(op_order) +
                          " cores but TT has order " + std::to_string(tt_order));
  }
  const DenseTensor unit(Shape{1, 1, 1}, {1.0});
  std::vector<DenseTensor> out;
  out.reserve(op_order);
  for (std::size_t k = 0; k < op_order; ++k) {
    const DenseTensor& a = op.core(k);
    const DenseTensor& x = k < tt_order ? tt.core(k) : unit;
    const std::size_t sl = a.dim(0), nout = a.dim(1), nin = a.dim(2), sr = a.dim(3);
    const std::size_t rl = x.dim(0), rr = x.dim(2);
    if (nin != x.dim(1)) {
      throw StructuralError("mpo_apply: input dim mismatch at core " + std::to_string(k) +
                            ": " + dims_str(nin, x.dim(1)));
    }
    const std::size_t yl = sl * rl, yr = sr * rr;
    DenseTensor y(Shape{yl, nout, yr});
    auto yd = y.data();
    const auto ad = a.data();
    const auto xd = x.data();
    for (std::size_t al = 0; al < sl; ++al) {
      for (std::size_t j = 0; j < nout; ++j) {
        for (std::size_t i = 0; i < nin; ++i) {
          for (std::size_t ar = 0; ar < sr; ++ar) {
            const double w = ad[((al * nout + j) * nin + i) * sr + ar];
            if (w == 0.0) continue;
            for (std::size_t xl = 0; xl < rl; ++xl) {
              const double* xrow = &xd[(xl * nin + i) * rr];
              double* yrow = &yd[((al * rl + xl) * nout + j) * yr + ar * rr];
              for (std::size_t xr = 0; xr < rr; ++xr) yrow[xr] += w * xrow[xr];
            }
          }
        }
      }
    }
    out.push_back(std::move(y));
  }
  return TTFormat(std::move(out));
}

DenseTensor mpo_to_dense(const MPOFormat& op, std::size_t element_budget) {
  const Shape in = op.input_dims();
  const Shape outd = op.output_dims();
  const std::size_t n_in = shape_product(in);
  const std::size_t n_out = shape_product(outd);
  if (n_in > 0 && n_out > element_budget / n_in) {
    throw CapacityError("mpo_to_dense exceeds element budget");
  }
  // Contract as a TT over the fused (out, in) index, then unshuffle.
  std::vector<DenseTensor> fused;
  for (const auto& c : op.cores()) {
    fused.push_back(c.reshaped(Shape{c.dim(0), c.dim(1) * c.dim(2), c.dim(3)}));
  }
  const DenseTensor chain = tt_contract(TTFormat(std::move(fused)), element_budget);
  DenseTensor mat(Shape{n_out, n_in});
  const std::size_t order = op.order();
  std::vector<std::size_t> digits(order, 0);
  for (std::size_t flat = 0; flat < chain.size(); ++flat) {
    std::size_t rem = flat;
    for (std::size_t k = order; k-- > 0;) {
      const std::size_t m = outd[k] * in[k];
      digits[k] = rem % m;
      rem /= m;
    }
    std::size_t row = 0, col = 0;
    for (std::size_t k = 0; k < order; ++k) {
      row = row * outd[k] + digits[k] / in[k];
      col = col * in[k] + digits[k] % in[k];
    }
    mat[row * n_in + col] = chain[flat];
  }
  return mat;
}

// ---------------------------------------------------------------------------
// Gradients

std::vector<DenseTensor> mse_core_gradients(const TTFormat& tt, const DenseTensor& residual) {
  const Shape modes = tt.mode_sizes();
  if (shape_product(modes) != residual.size()) {
    throw StructuralError("mse_core_gradients: residual has " +
                          std::to_string(residual.size()) + " entries, TT has " +
                          std::to_string(shape_product(modes)));
  }
  if (residual.shape() != modes) {
    throw StructuralError("mse_core_gradients: residual shape differs from TT modes");
  }
  const std::size_t order = tt.order();

  // left[k] is the (prod_{j<k} n_j) x r_{k-1} partial contraction.
  std::vector<std::vector<double>> left(order);
  left[0] = {1.0};
  std::size_t rows = 1;
  for (std::size_t k = 0; k + 1 < order; ++k) {
    const DenseTensor& c = tt.core(k);
    const std::size_t rl = c.dim(0), n = c.dim(1), rr = c.dim(2);
    left[k + 1].resize(rows * n * rr);
    RowMap(left[k + 1].data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n * rr))
        .noalias() = ConstRowMap(left[k].data(), static_cast<Eigen::Index>(rows),
                                 static_cast<Eigen::Index>(rl)) *
                     ConstRowMap(c.data().data(), static_cast<Eigen::Index>(rl),
                                 static_cast<Eigen::Index>(n * rr));
    rows *= n;
  }

  std::vector<DenseTensor> grads(order);
  // w is the residual contracted with all cores right of k: (prod_{j<=k} n_j) x r_k.
  std::vector<double> w = residual.values();
  for (std::size_t k = order; k-- > 0;) {
    const DenseTensor& c = tt.core(k);
    const std::size_t rl = c.dim(0), n = c.dim(1), rr = c.dim(2);
    const std::size_t prefix = w.size() / (n * rr);
    ConstRowMap wk(w.data(), static_cast<Eigen::Index>(prefix), static_cast<Eigen::Index>(n * rr));
    DenseTensor g(Shape{rl, n, rr});
    RowMap(g.data().data(), static_cast<Eigen::Index>(rl), static_cast<Eigen::Index>(n * rr))
        .noalias() = ConstRowMap(left[k].data(), static_cast<Eigen::Index>(prefix),
                                 static_cast<Eigen::Index>(rl))
                         .transpose() *
                     wk;
    grads[k] = std::move(g);
    if (k > 0) {
      std::vector<double> next(prefix * rl);
      RowMap(next.data(), static_cast<Eigen::Index>(prefix), static_cast<Eigen::Index>(rl))
          .noalias() = wk * ConstRowMap(c.data().data(), static_cast<Eigen::Index>(rl),
                                        static_cast<Eigen::Index>(n * rr))
                                .transpose();
      w = std::move(next);
    }
  }
  return grads;
}

TTFormat tt_axpy(const TTFormat& tt, double step, const std::vector<DenseTensor>& direction) {
  if (direction.size() != tt.order()) {
    throw StructuralError("tt_axpy: direction has wrong number of cores");
  }
  std::vector<DenseTensor> cores = tt.cores();
  for (std::size_t k = 0; k < cores.size(); ++k) {
    if (direction[k].shape() != cores[k].shape()) {
      throw StructuralError("tt_axpy: direction core " + std::to_string(k) + " has wrong shape");
    }
    auto dst = cores[k].data();
    const auto src = direction[k].data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += step * src[i];
  }
  return TTFormat(std::move(cores));
}

}  // namespace tnp
