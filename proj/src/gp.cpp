#include "scrbo/gp.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "scrbo/error.hpp"
#include "scrbo/rng.hpp"

namespace scrbo::gp {

namespace {

const double kSqrt5 = std::sqrt(5.0);

double matern_shape(double r) { return (1.0 + kSqrt5 * r + 5.0 * r * r / 3.0) * std::exp(-kSqrt5 * r); }

Eigen::MatrixXd scaled_inputs(const std::vector<Point>& xs, const std::vector<double>& ls) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  const auto d = static_cast<Eigen::Index>(ls.size());
  Eigen::MatrixXd z(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    require(xs[static_cast<std::size_t>(i)].size() == ls.size(), ErrorCode::shape, "gp: point dimension mismatch");
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] / ls[static_cast<std::size_t>(j)];
  }
  return z;
}

/// Pairwise distances in lengthscale units.
Eigen::MatrixXd distances(const Eigen::MatrixXd& z) {
  const Eigen::Index n = z.rows();
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 0.0;
    for (Eigen::Index j = 0; j < i; ++j) r(i, j) = r(j, i) = (z.row(i) - z.row(j)).norm();
  }
  return r;
}

/// Factorizes K + (noise + jitter) I, climbing the jitter ladder as needed.
bool factorize(const Eigen::MatrixXd& kf, double signal_var, double noise_var, Eigen::LLT<Eigen::MatrixXd>& chol,
               double& jitter) {
  const double cap = 1e-4 * signal_var;
  jitter = 0.0;
  double next = 1e-10 * signal_var;
  for (;;) {
    Eigen::MatrixXd k = kf;
    k.diagonal().array() += noise_var + jitter;
    chol.compute(k);
    if (chol.info() == Eigen::Success && (chol.matrixLLT().diagonal().array() > 0.0).all()) return true;
    if (next > cap * (1.0 + 1e-12)) return false;
    jitter = next;
    next *= 10.0;
  }
}

double lml_from(const Eigen::LLT<Eigen::MatrixXd>& chol, const Eigen::VectorXd& y, const Eigen::VectorXd& alpha) {
  const double n = static_cast<double>(y.size());
  return -0.5 * y.dot(alpha) - chol.matrixLLT().diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

// Sigmoid box: log p = lo + (hi - lo) * sigmoid(u).
struct Box {
  double lo, hi;
  double to_log(double u) const { return lo + (hi - lo) / (1.0 + std::exp(-u)); }
  double dlog_du(double u) const {
    const double s = 1.0 / (1.0 + std::exp(-u));
    return (hi - lo) * s * (1.0 - s);
  }
  double from_log(double p) const {
    const double f = std::clamp((p - lo) / (hi - lo), 1e-12, 1.0 - 1e-12);
    return std::log(f / (1.0 - f));
  }
};

/// Negative log likelihood on standardized targets, parametrized for the
/// unconstrained optimizer.
struct LikelihoodProblem {
  const std::vector<Point>* xs;
  Eigen::VectorXd y;
  std::size_t d;
  std::vector<Box> boxes;  // d lengthscales, signal, noise

  // Last factorization; the minimizer often asks for the gradient at the
  // point whose value it just computed.
  mutable std::vector<double> cached_u;
  mutable Hyperparameters cached_hp;
  mutable Eigen::MatrixXd cached_z, cached_r, cached_kf;
  mutable Eigen::LLT<Eigen::MatrixXd> cached_chol;
  mutable Eigen::VectorXd cached_alpha;
  mutable double cached_nll = 0.0;
  mutable bool cached_ok = false;

  Hyperparameters decode(const gsl_vector* u) const {
    Hyperparameters hp;
    hp.lengthscales.resize(d);
    for (std::size_t j = 0; j < d; ++j) hp.lengthscales[j] = std::exp(boxes[j].to_log(gsl_vector_get(u, j)));
    hp.signal_var = std::exp(boxes[d].to_log(gsl_vector_get(u, d)));
    hp.noise_var = std::exp(boxes[d + 1].to_log(gsl_vector_get(u, d + 1)));
    return hp;
  }

  void refresh(const gsl_vector* u) const {
    if (cached_u.size() == u->size && std::equal(cached_u.begin(), cached_u.end(), u->data)) return;
    cached_u.assign(u->data, u->data + u->size);
    cached_hp = decode(u);
    cached_z = scaled_inputs(*xs, cached_hp.lengthscales);
    cached_r = distances(cached_z);
    cached_kf = cached_hp.signal_var * cached_r.unaryExpr(&matern_shape);
    double jitter;
    cached_ok = factorize(cached_kf, cached_hp.signal_var, cached_hp.noise_var, cached_chol, jitter);
    if (!cached_ok) return;
    cached_alpha = cached_chol.solve(y);
    cached_nll = -lml_from(cached_chol, y, cached_alpha);
  }

  double evaluate(const gsl_vector* u, gsl_vector* grad) const {
    refresh(u);
    if (!cached_ok) {
      if (grad) gsl_vector_set_zero(grad);
      return 1e100;
    }
    if (!grad) return cached_nll;

    const Hyperparameters& hp = cached_hp;
    const Eigen::MatrixXd& z = cached_z;
    const Eigen::MatrixXd& r = cached_r;
    const Eigen::MatrixXd& kf = cached_kf;
    const Eigen::VectorXd& alpha = cached_alpha;
    const Eigen::Index n = y.size();

    // Lower triangle of K^-1 = L^-T L^-1.
    Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(n, n);
    cached_chol.matrixL().solveInPlace(linv);
    Eigen::MatrixXd kinv = Eigen::MatrixXd::Zero(n, n);
    kinv.selfadjointView<Eigen::Lower>().rankUpdate(linv.transpose());

    // W = alpha alpha^T - K^-1; dNLL/dtheta = -tr(W dK)/2.
    // d K / d log l_j = s2 (5/3)(1 + sqrt5 r) exp(-sqrt5 r) (dz_j)^2
    std::vector<double> acc(d, 0.0);
    double g_signal = 0.0, g_noise = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) {
      const double wbb = alpha(b) * alpha(b) - kinv(b, b);
      g_signal += wbb * kf(b, b);
      g_noise += wbb;
      for (Eigen::Index a = b + 1; a < n; ++a) {
        const double w = alpha(a) * alpha(b) - kinv(a, b);
        g_signal += 2.0 * w * kf(a, b);
        const double rr = r(a, b);
        const double c = 2.0 * w * hp.signal_var * (5.0 / 3.0) * (1.0 + kSqrt5 * rr) * std::exp(-kSqrt5 * rr);
        for (std::size_t j = 0; j < d; ++j) {
          const double dz = z(a, static_cast<Eigen::Index>(j)) - z(b, static_cast<Eigen::Index>(j));
          acc[j] += c * dz * dz;
        }
      }
    }
    for (std::size_t j = 0; j < d; ++j) gsl_vector_set(grad, j, -0.5 * acc[j] * boxes[j].dlog_du(gsl_vector_get(u, j)));
    gsl_vector_set(grad, d, -0.5 * g_signal * boxes[d].dlog_du(gsl_vector_get(u, d)));
    gsl_vector_set(grad, d + 1, -0.5 * hp.noise_var * g_noise * boxes[d + 1].dlog_du(gsl_vector_get(u, d + 1)));
    return cached_nll;
  }
};

double gsl_f(const gsl_vector* u, void* p) { return static_cast<const LikelihoodProblem*>(p)->evaluate(u, nullptr); }
void gsl_df(const gsl_vector* u, void* p, gsl_vector* g) { static_cast<const LikelihoodProblem*>(p)->evaluate(u, g); }
void gsl_fdf(const gsl_vector* u, void* p, double* f, gsl_vector* g) {
  *f = static_cast<const LikelihoodProblem*>(p)->evaluate(u, g);
}

struct GslVector {
  gsl_vector* v;
  explicit GslVector(std::size_t n) : v(gsl_vector_alloc(n)) {}
  ~GslVector() { gsl_vector_free(v); }
  GslVector(const GslVector&) = delete;
  GslVector& operator=(const GslVector&) = delete;
};

struct Minimizer {
  gsl_multimin_fdfminimizer* m;
  explicit Minimizer(std::size_t n) : m(gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n)) {}
  ~Minimizer() { gsl_multimin_fdfminimizer_free(m); }
  Minimizer(const Minimizer&) = delete;
  Minimizer& operator=(const Minimizer&) = delete;
};

}  // namespace

double matern52(std::span<const double> x1, std::span<const double> x2, std::span<const double> lengthscales,
                double signal_var) {
  double r2 = 0.0;
  for (std::size_t d = 0; d < x1.size(); ++d) {
    const double t = (x1[d] - x2[d]) / lengthscales[d];
    r2 += t * t;
  }
  return signal_var * matern_shape(std::sqrt(r2));
}

GPModel GPModel::from_hyperparameters(std::vector<Point> xs, std::span<const double> ys, Hyperparameters hp) {
  require(!xs.empty() && xs.size() == ys.size(), ErrorCode::shape, "gp: need matching, non-empty xs and ys");
  require(hp.signal_var > 0.0 && hp.noise_var >= 0.0, ErrorCode::invalid_argument, "gp: bad variances");
  for (double l : hp.lengthscales) require(l > 0.0, ErrorCode::invalid_argument, "gp: lengthscales must be positive");

  GPModel m;
  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= static_cast<double>(ys.size());
  m.y_offset_ = mean;
  m.train_y_.resize(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) m.train_y_[i] = ys[i] - mean;
  m.hp_ = std::move(hp);
  m.x_ = scaled_inputs(xs, m.hp_.lengthscales);
  m.train_x_ = std::move(xs);

  const Eigen::MatrixXd kf = m.hp_.signal_var * distances(m.x_).unaryExpr(&matern_shape);
  require(factorize(kf, m.hp_.signal_var, m.hp_.noise_var, m.chol_, m.jitter_), ErrorCode::ill_conditioned,
          "gp: Cholesky failed at maximum jitter");
  const Eigen::Map<const Eigen::VectorXd> y(m.train_y_.data(), static_cast<Eigen::Index>(m.train_y_.size()));
  m.alpha_ = m.chol_.solve(Eigen::VectorXd(y));
  m.lml_ = lml_from(m.chol_, y, m.alpha_);
  return m;
}

Posterior GPModel::posterior(std::span<const double> x) const {
  require(x.size() == dim(), ErrorCode::shape, "gp: query dimension mismatch");
  const Eigen::Index n = x_.rows(), d = x_.cols();
  Eigen::VectorXd zq(d);
  for (Eigen::Index j = 0; j < d; ++j) zq(j) = x[static_cast<std::size_t>(j)] / hp_.lengthscales[static_cast<std::size_t>(j)];
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) k(i) = hp_.signal_var * matern_shape((x_.row(i).transpose() - zq).norm());
  const double mean = y_offset_ + k.dot(alpha_);
  chol_.matrixL().solveInPlace(k);
  const double var = hp_.signal_var - k.squaredNorm();
  return {mean, std::sqrt(std::max(var, 0.0))};
}

double log_marginal_likelihood(const std::vector<Point>& xs, std::span<const double> ys_centered,
                               const Hyperparameters& hp) {
  const Eigen::MatrixXd kf = hp.signal_var * distances(scaled_inputs(xs, hp.lengthscales)).unaryExpr(&matern_shape);
  Eigen::LLT<Eigen::MatrixXd> chol;
  double jitter;
  require(factorize(kf, hp.signal_var, hp.noise_var, chol, jitter), ErrorCode::ill_conditioned,
          "gp: Cholesky failed at maximum jitter");
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys_centered.data(), static_cast<Eigen::Index>(ys_centered.size()));
  return lml_from(chol, y, chol.solve(y));
}

GPModel gp_fit(const std::vector<Point>& xs, std::span<const double> ys, const FitOptions& options) {
  require(xs.size() >= 2 && xs.size() == ys.size(), ErrorCode::shape, "gp_fit: need at least two observations");
  require(options.restarts >= 1, ErrorCode::invalid_argument, "gp_fit: restarts must be >= 1");
  const std::size_t d = xs.front().size();
  require(d >= 1, ErrorCode::shape, "gp_fit: zero-dimensional inputs");

  // Standardize so the bounds are relative to the target variance.
  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= static_cast<double>(ys.size());
  double var = 0.0;
  for (double y : ys) var += (y - mean) * (y - mean);
  var /= static_cast<double>(ys.size());
  if (!(var > 1e-24 * std::max(1.0, mean * mean))) var = 1.0;
  const double scale = std::sqrt(var);

  LikelihoodProblem problem;
  problem.xs = &xs;
  problem.d = d;
  problem.y.resize(static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < ys.size(); ++i) problem.y(static_cast<Eigen::Index>(i)) = (ys[i] - mean) / scale;
  for (std::size_t j = 0; j < d; ++j) problem.boxes.push_back({std::log(Bounds::lengthscale_lo), std::log(Bounds::lengthscale_hi)});
  problem.boxes.push_back({std::log(Bounds::signal_lo), std::log(Bounds::signal_hi)});
  problem.boxes.push_back({std::log(Bounds::noise_lo), std::log(Bounds::noise_hi)});

  gsl_multimin_function_fdf fdf{&gsl_f, &gsl_df, &gsl_fdf, d + 2, &problem};
  gsl_set_error_handler_off();

  Rng rng(options.seed);
  GslVector start(d + 2);
  Minimizer minimizer(d + 2);
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> best_u;

  for (std::size_t restart = 0; restart < options.restarts; ++restart) {
    if (restart == 0 && options.warm_start) {
      const auto& ws = *options.warm_start;
      require(ws.lengthscales.size() == d, ErrorCode::shape, "gp_fit: warm start dimension mismatch");
      for (std::size_t j = 0; j < d; ++j) gsl_vector_set(start.v, j, problem.boxes[j].from_log(std::log(ws.lengthscales[j])));
      gsl_vector_set(start.v, d, problem.boxes[d].from_log(std::log(ws.signal_var / var)));
      gsl_vector_set(start.v, d + 1, problem.boxes[d + 1].from_log(std::log(ws.noise_var / var)));
    } else {
      for (std::size_t j = 0; j < d + 2; ++j) {
        const auto& b = problem.boxes[j];
        gsl_vector_set(start.v, j, b.from_log(rng.uniform(b.lo, b.hi)));
      }
    }
    const double start_value = gsl_f(start.v, &problem);
    if (std::isfinite(start_value) && start_value < best_value) {
      best_value = start_value;
      best_u.assign(start.v->data, start.v->data + (d + 2));
    }
    gsl_multimin_fdfminimizer_set(minimizer.m, &fdf, start.v, 0.1, 0.1);
    double last = minimizer.m->f;
    for (std::size_t it = 0; it < options.max_iterations; ++it) {
      if (gsl_multimin_fdfminimizer_iterate(minimizer.m) != GSL_SUCCESS) break;
      if (gsl_multimin_test_gradient(minimizer.m->gradient, 1e-5) == GSL_SUCCESS) break;
      if (last - minimizer.m->f < 1e-3) break;  // nats
      last = minimizer.m->f;
    }
    const double value = minimizer.m->f;
    if (std::isfinite(value) && value < best_value) {
      best_value = value;
      best_u.assign(minimizer.m->x->data, minimizer.m->x->data + (d + 2));
    }
  }
  require(!best_u.empty() && best_value < 1e99, ErrorCode::ill_conditioned, "gp_fit: no restart produced a valid fit");

  GslVector u(d + 2);
  for (std::size_t j = 0; j < d + 2; ++j) gsl_vector_set(u.v, j, best_u[j]);
  Hyperparameters hp = problem.decode(u.v);
  hp.signal_var *= var;
  hp.noise_var *= var;
  return GPModel::from_hyperparameters(xs, ys, std::move(hp));
}

}  // namespace scrbo::gp
