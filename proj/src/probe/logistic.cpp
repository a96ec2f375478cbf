#include <algorithm>
#include <cmath>
#include <deque>

#include "finelogic/probe/logistic.hpp"

namespace finelogic::probe {

namespace {

constexpr Eigen::Index kBlockRows = 256;

/// log(1 + exp(-m)) without overflow.
double log1p_exp_neg(double m) { return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

/// Unnormalized loss and gradient over rows [begin, end).
void accumulate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& wb, Eigen::Index begin,
                Eigen::Index end, double& loss, Eigen::VectorXd& grad) {
  Eigen::Index d = x.cols();
  auto w = wb.head(d);
  double b = wb(d);
  for (Eigen::Index i = begin; i < end; ++i) {
    double z = x.row(i).dot(w) + b;
    double s = 2 * y(i) - 1;  // ±1
    loss += log1p_exp_neg(s * z);
    double r = sigmoid(z) - y(i);
    grad.head(d) += r * x.row(i).transpose();
    grad(d) += r;
  }
}

Objective finish(double loss, Eigen::VectorXd grad, const Eigen::VectorXd& wb, double c, Eigen::Index n) {
  Eigen::Index d = wb.size() - 1;
  double nn = static_cast<double>(n);
  Objective o;
  o.value = loss / nn + wb.head(d).squaredNorm() / (2 * c * nn);
  grad /= nn;
  grad.head(d) += wb.head(d) / (c * nn);
  o.grad = std::move(grad);
  return o;
}

Objective objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& wb, double c,
                    bool parallel) {
  return parallel ? logistic_objective_parallel(x, y, wb, c) : logistic_objective_serial(x, y, wb, c);
}

/// Armijo decrease, or near the optimum where the value is flat to rounding,
/// a shrinking gradient.
bool accept(const Objective& cur, const Objective& next, double t, double slope) {
  if (!std::isfinite(next.value)) return false;
  if (next.value <= cur.value + 1e-4 * t * slope) return true;
  double flat = 1e-14 * std::max(1.0, std::abs(cur.value));
  return next.value <= cur.value + flat &&
         next.grad.lpNorm<Eigen::Infinity>() < 0.5 * cur.grad.lpNorm<Eigen::Infinity>();
}

Eigen::VectorXd newton(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const FitOptions& opts) {
  Eigen::Index n = x.rows(), d = x.cols();
  Eigen::MatrixXd xa(n, d + 1);
  xa << x, Eigen::VectorXd::Ones(n);
  Eigen::VectorXd wb = Eigen::VectorXd::Zero(d + 1);
  Objective o = objective(x, y, wb, opts.c, opts.parallel);
  for (int it = 0; it < opts.max_iterations; ++it) {
    if (o.grad.lpNorm<Eigen::Infinity>() <= opts.tolerance) return wb;
    Eigen::VectorXd p(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = sigmoid(xa.row(i).dot(wb));
      p(i) = s * (1 - s);
    }
    Eigen::MatrixXd h = xa.transpose() * p.asDiagonal() * xa / static_cast<double>(n);
    h.diagonal().head(d).array() += 1.0 / (opts.c * static_cast<double>(n));
    h(d, d) += 1e-12;  // the bias is unpenalized; keep the system definite
    Eigen::VectorXd step = h.ldlt().solve(-o.grad);
    double slope = o.grad.dot(step);
    if (!step.allFinite() || slope >= 0) {
      step = -o.grad;
      slope = -o.grad.squaredNorm();
    }
    double t = 1.0;
    Objective next;
    while (true) {
      next = objective(x, y, wb + t * step, opts.c, opts.parallel);
      if (accept(o, next, t, slope) || t < 1e-12) break;
      t *= 0.5;
    }
    if (t < 1e-12) throw ConvergenceError("Newton line search stalled");
    wb += t * step;
    o = std::move(next);
  }
  if (o.grad.lpNorm<Eigen::Infinity>() <= opts.tolerance) return wb;
  throw ConvergenceError("Newton did not reach gradient tolerance " + std::to_string(opts.tolerance));
}

Eigen::VectorXd lbfgs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const FitOptions& opts) {
  constexpr std::size_t kMemory = 10;
  Eigen::Index d = x.cols();
  Eigen::VectorXd wb = Eigen::VectorXd::Zero(d + 1);
  Objective o = objective(x, y, wb, opts.c, opts.parallel);
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> hist;  // (s, y)
  int max_it = opts.max_iterations * 40;
  for (int it = 0; it < max_it; ++it) {
    if (o.grad.lpNorm<Eigen::Infinity>() <= opts.tolerance) return wb;
    // two-loop recursion
    Eigen::VectorXd q = o.grad;
    std::vector<double> alpha(hist.size());
    for (std::size_t k = hist.size(); k-- > 0;) {
      const auto& [s, yk] = hist[k];
      alpha[k] = s.dot(q) / yk.dot(s);
      q -= alpha[k] * yk;
    }
    if (!hist.empty()) q *= hist.back().first.dot(hist.back().second) / hist.back().second.squaredNorm();
    for (std::size_t k = 0; k < hist.size(); ++k) {
      const auto& [s, yk] = hist[k];
      double beta = yk.dot(q) / yk.dot(s);
      q += (alpha[k] - beta) * s;
    }
    Eigen::VectorXd dir = -q;
    double slope = o.grad.dot(dir);
    if (slope >= 0) {
      hist.clear();
      dir = -o.grad;
      slope = -o.grad.squaredNorm();
    }
    double t = hist.empty() ? std::min(1.0, 1.0 / o.grad.lpNorm<1>()) : 1.0;
    Objective next;
    while (true) {
      next = objective(x, y, wb + t * dir, opts.c, opts.parallel);
      if (accept(o, next, t, slope) || t < 1e-16) break;
      t *= 0.5;
    }
    if (t < 1e-16) throw ConvergenceError("L-BFGS line search stalled");
    Eigen::VectorXd s = t * dir;
    Eigen::VectorXd yk = next.grad - o.grad;
    wb += s;
    o = std::move(next);
    if (yk.dot(s) > 1e-18) {
      hist.emplace_back(std::move(s), std::move(yk));
      if (hist.size() > kMemory) hist.pop_front();
    }
  }
  throw ConvergenceError("L-BFGS did not reach gradient tolerance " + std::to_string(opts.tolerance));
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
  return out;
}

Eigen::VectorXd targets(const std::vector<bool>& y, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = y[static_cast<std::size_t>(idx[i])];
  return out;
}

struct Fitted {
  Standardizer st;
  Eigen::VectorXd wb;
};

Fitted fit_raw(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double c, const ProbeOptions& opts) {
  Fitted f;
  f.st = Standardizer::fit(x);
  FitOptions fo;
  fo.c = c;
  fo.tolerance = opts.tolerance;
  fo.parallel = opts.parallel;
  f.wb = fit_logistic(f.st.apply(x), y, fo);
  return f;
}

}  // namespace

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  Standardizer s;
  s.mean = x.colwise().mean().transpose();
  Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
  s.scale = (centered.colwise().squaredNorm() / static_cast<double>(x.rows())).cwiseSqrt().transpose();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
    if (!(s.scale(j) > 0)) s.scale(j) = 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Objective logistic_objective_serial(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& wb,
                                    double c) {
  double loss = 0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(wb.size());
  accumulate(x, y, wb, 0, x.rows(), loss, grad);
  return finish(loss, std::move(grad), wb, c, x.rows());
}

Objective logistic_objective_parallel(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& wb,
                                      double c) {
  Eigen::Index n = x.rows();
  Eigen::Index blocks = (n + kBlockRows - 1) / kBlockRows;
  std::vector<double> losses(static_cast<std::size_t>(blocks), 0.0);
  std::vector<Eigen::VectorXd> grads(static_cast<std::size_t>(blocks), Eigen::VectorXd::Zero(wb.size()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < blocks; ++k) {
    auto kk = static_cast<std::size_t>(k);
    accumulate(x, y, wb, k * kBlockRows, std::min(n, (k + 1) * kBlockRows), losses[kk], grads[kk]);
  }
  double loss = 0;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(wb.size());
  for (std::size_t k = 0; k < losses.size(); ++k) {
    loss += losses[k];
    grad += grads[k];
  }
  return finish(loss, std::move(grad), wb, c, n);
}

Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const FitOptions& opts) {
  if (x.rows() == 0) throw std::invalid_argument("fit_logistic on zero rows");
  if (static_cast<std::size_t>(x.cols() + 1) <= opts.newton_max_params) return newton(x, y, opts);
  return lbfgs(x, y, opts);
}

double Probe::probability(const Eigen::VectorXd& x) const {
  Eigen::VectorXd z = (x - standardizer.mean).cwiseQuotient(standardizer.scale);
  return sigmoid(z.dot(weights) + bias);
}

bool Probe::predict(const Eigen::VectorXd& x) const { return probability(x) > 0.5; }

std::vector<bool> Probe::predict_all(const Eigen::MatrixXd& x) const {
  std::vector<bool> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = predict(Eigen::VectorXd(x.row(i)));
  return out;
}

int fold_of(const std::string& group, std::uint64_t seed, int folds) {
  return static_cast<int>(mix(fnv1a(group) ^ mix(seed)) % static_cast<std::uint64_t>(folds));
}

Probe train_probe(const Eigen::MatrixXd& x, const std::vector<bool>& y, const std::vector<std::string>& groups,
                  const ProbeOptions& opts) {
  auto n = static_cast<std::size_t>(x.rows());
  if (y.size() != n || groups.size() != n) {
    throw DimensionMismatch("features have " + std::to_string(n) + " rows, labels " + std::to_string(y.size()) +
                            ", groups " + std::to_string(groups.size()));
  }
  if (x.cols() == 0) throw DimensionMismatch("zero-width features");
  std::size_t pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), true));
  if (pos == 0 || pos == n) throw SingleClassTrainingSet("training labels contain one class");
  if (opts.c_grid.empty()) throw std::invalid_argument("empty C grid");

  std::vector<int> fold(n);
  for (std::size_t i = 0; i < n; ++i) fold[i] = fold_of(groups[i], opts.seed, opts.folds);

  Probe probe;
  probe.folds = opts.folds;
  probe.seed = opts.seed;
  probe.cv_accuracy.assign(opts.c_grid.size(), 0.0);
  std::vector<std::size_t> order(opts.c_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return opts.c_grid[a] < opts.c_grid[b]; });

  for (std::size_t gi : order) {
    double correct = 0;
    std::size_t scored = 0;
    for (int f = 0; f < opts.folds; ++f) {
      std::vector<Eigen::Index> tr, te;
      for (std::size_t i = 0; i < n; ++i) (fold[i] == f ? te : tr).push_back(static_cast<Eigen::Index>(i));
      if (te.empty() || tr.empty()) continue;
      Eigen::VectorXd ytr = targets(y, tr);
      if (ytr.sum() == 0 || ytr.sum() == static_cast<double>(tr.size())) continue;
      Fitted m = fit_raw(rows_of(x, tr), ytr, opts.c_grid[gi], opts);
      Eigen::MatrixXd xte = m.st.apply(rows_of(x, te));
      for (std::size_t k = 0; k < te.size(); ++k) {
        double z = xte.row(static_cast<Eigen::Index>(k)).dot(m.wb.head(x.cols())) + m.wb(x.cols());
        correct += (sigmoid(z) > 0.5) == y[static_cast<std::size_t>(te[k])];
      }
      scored += te.size();
    }
    probe.cv_accuracy[gi] = scored ? correct / static_cast<double>(scored) : 0.0;
  }
  std::size_t best = order.front();
  for (std::size_t gi : order) {
    if (probe.cv_accuracy[gi] > probe.cv_accuracy[best]) best = gi;
  }
  probe.c = opts.c_grid[best];

  std::vector<Eigen::Index> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<Eigen::Index>(i);
  Fitted m = fit_raw(x, targets(y, all), probe.c, opts);
  probe.standardizer = std::move(m.st);
  probe.weights = m.wb.head(x.cols());
  probe.bias = m.wb(x.cols());
  return probe;
}

double balanced_accuracy(const std::vector<bool>& predictions, const std::vector<bool>& labels) {
  if (predictions.size() != labels.size()) throw DimensionMismatch("predictions and labels differ in length");
  std::size_t p = 0, tp = 0, nn = 0, tn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      ++p;
      tp += predictions[i];
    } else {
      ++nn;
      tn += !predictions[i];
    }
  }
  if (p == 0 || nn == 0) throw MissingClass("balanced accuracy needs both classes in the labels");
  return 0.5 * (static_cast<double>(tp) / static_cast<double>(p) + static_cast<double>(tn) / static_cast<double>(nn));
}

nlohmann::json probe_to_json(const Probe& p) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"C", p.c},
          {"folds", p.folds},
          {"seed", p.seed},
          {"cv_accuracy", p.cv_accuracy},
          {"bias", p.bias},
          {"weights", vec(p.weights)},
          {"mean", vec(p.standardizer.mean)},
          {"scale", vec(p.standardizer.scale)}};
}

}  // namespace finelogic::probe
