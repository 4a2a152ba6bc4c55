#include "schubert/gru.hpp"

#include <cmath>

#include "schubert/error.hpp"

namespace schubert::model {

namespace {

Vector sigmoid(const Vector& a) {
  return a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

template <typename Derived>
std::span<double> flat(Eigen::PlainObjectBase<Derived>& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
template <typename Derived>
std::span<const double> flat(const Eigen::PlainObjectBase<Derived>& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

void fill_uniform(Matrix& m, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = bound * (2.0 * rng.uniform() - 1.0);
  }
}

void fill_normal(Matrix& m, double stddev, Rng& rng) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = stddev * rng.normal();
  }
}

}  // namespace

GruParams GruParams::zeros(Eigen::Index dim_in, Eigen::Index hidden) {
  GruParams p;
  p.w_z = p.w_r = p.w_h = Matrix::Zero(dim_in, hidden);
  p.u_z = p.u_r = p.u_h = Matrix::Zero(hidden, hidden);
  p.b_z = p.b_r = p.b_h = Vector::Zero(hidden);
  p.w_out = Vector::Zero(hidden);
  p.b_out = 0.0;
  return p;
}

std::size_t GruParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += t.size();
  return n;
}

std::array<std::span<double>, 11> GruParams::tensors() {
  return {flat(w_z), flat(w_r), flat(w_h), flat(u_z), flat(u_r), flat(u_h),
          flat(b_z), flat(b_r), flat(b_h), flat(w_out), std::span<double>(&b_out, 1)};
}

std::array<std::span<const double>, 11> GruParams::tensors() const {
  return {flat(w_z), flat(w_r), flat(w_h), flat(u_z), flat(u_r), flat(u_h),
          flat(b_z), flat(b_r), flat(b_h), flat(w_out), std::span<const double>(&b_out, 1)};
}

bool GruParams::all_finite() const {
  for (const auto& t : tensors()) {
    for (const double v : t) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

bool GruParams::operator==(const GruParams& o) const {
  if (dim_in() != o.dim_in() || hidden() != o.hidden()) return false;
  const auto a = tensors();
  const auto b = o.tensors();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!std::equal(a[k].begin(), a[k].end(), b[k].begin())) return false;
  }
  return true;
}

GruParams init_params(Eigen::Index dim_in, Eigen::Index hidden, std::uint64_t seed) {
  if (dim_in < 1 || hidden < 1) throw InvalidInput("GRU dimensions must be >= 1");
  Rng rng(seed);
  GruParams p = GruParams::zeros(dim_in, hidden);
  const double in_bound = std::sqrt(6.0 / static_cast<double>(dim_in + hidden));
  const double rec_std = std::sqrt(2.0 / static_cast<double>(2 * hidden));
  const double out_bound = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  fill_uniform(p.w_z, in_bound, rng);
  fill_uniform(p.w_r, in_bound, rng);
  fill_uniform(p.w_h, in_bound, rng);
  fill_normal(p.u_z, rec_std, rng);
  fill_normal(p.u_r, rec_std, rng);
  fill_normal(p.u_h, rec_std, rng);
  for (Eigen::Index j = 0; j < hidden; ++j) p.w_out(j) = out_bound * (2.0 * rng.uniform() - 1.0);
  return p;
}

Matrix to_matrix(const chunking::ChunkEmbeddings& doc) {
  const auto rows = static_cast<Eigen::Index>(doc.n_chunks());
  Matrix m(rows, static_cast<Eigen::Index>(doc.dim));
  for (Eigen::Index t = 0; t < rows; ++t) {
    const auto row = doc.chunk(static_cast<std::size_t>(t));
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(t, j) = static_cast<double>(row[static_cast<std::size_t>(j)]);
  }
  return m;
}

ForwardCache forward(const GruParams& params, const Matrix& inputs, Mode mode, double dropout_p,
                     Rng& rng) {
  if (inputs.rows() == 0) throw InvalidInput("GRU input has no chunks");
  if (inputs.cols() != params.dim_in()) {
    throw InvalidInput("GRU input width " + std::to_string(inputs.cols()) +
                       " does not match dim_in " + std::to_string(params.dim_in()));
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw InvalidInput("dropout must lie in [0, 1)");

  const Eigen::Index steps = inputs.rows();
  const Eigen::Index hidden = params.hidden();
  const Matrix xz = inputs * params.w_z;
  const Matrix xr = inputs * params.w_r;
  const Matrix xh = inputs * params.w_h;

  ForwardCache c;
  c.inputs = inputs;
  c.h.reserve(static_cast<std::size_t>(steps + 1));
  c.h.push_back(Vector::Zero(hidden));
  for (Eigen::Index t = 0; t < steps; ++t) {
    const Vector& prev = c.h.back();
    Vector z = sigmoid(xz.row(t).transpose() + params.u_z.transpose() * prev + params.b_z);
    Vector r = sigmoid(xr.row(t).transpose() + params.u_r.transpose() * prev + params.b_r);
    Vector cand = (xh.row(t).transpose() + params.u_h.transpose() * r.cwiseProduct(prev) +
                   params.b_h)
                      .array()
                      .tanh()
                      .matrix();
    Vector next = (Vector::Ones(hidden) - z).cwiseProduct(prev) + z.cwiseProduct(cand);
    c.z.push_back(std::move(z));
    c.r.push_back(std::move(r));
    c.candidate.push_back(std::move(cand));
    c.h.push_back(std::move(next));
  }

  c.dropout_mask = Vector::Ones(hidden);
  if (mode == Mode::train && dropout_p > 0.0) {
    const double keep_scale = 1.0 / (1.0 - dropout_p);
    for (Eigen::Index j = 0; j < hidden; ++j) {
      c.dropout_mask(j) = rng.uniform() < dropout_p ? 0.0 : keep_scale;
    }
  }
  c.prediction = params.w_out.dot(c.dropout_mask.cwiseProduct(c.h.back())) + params.b_out;
  return c;
}

double predict(const GruParams& params, const Matrix& inputs) {
  Rng unused(0);
  return forward(params, inputs, Mode::eval, 0.0, unused).prediction;
}

void accumulate_gradients(const GruParams& params, const ForwardCache& c, double upstream,
                          GruParams& grads) {
  const Eigen::Index steps = c.inputs.rows();
  const Eigen::Index hidden = params.hidden();

  grads.b_out += upstream;
  grads.w_out += upstream * c.dropout_mask.cwiseProduct(c.h.back());
  Vector dh = upstream * params.w_out.cwiseProduct(c.dropout_mask);

  Matrix da_z(steps, hidden), da_r(steps, hidden), da_h(steps, hidden);
  Matrix prev_states(steps, hidden), reset_states(steps, hidden);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto ts = static_cast<std::size_t>(t);
    const Vector& prev = c.h[ts];
    const Vector& z = c.z[ts];
    const Vector& r = c.r[ts];
    const Vector& cand = c.candidate[ts];

    const Vector d_cand = dh.cwiseProduct(z);
    const Vector d_z = dh.cwiseProduct(cand - prev);
    const Vector g_h = d_cand.cwiseProduct((Vector::Ones(hidden) - cand.cwiseProduct(cand)));
    const Vector g_z = d_z.cwiseProduct(z).cwiseProduct(Vector::Ones(hidden) - z);
    const Vector d_reset_prev = params.u_h * g_h;
    const Vector g_r =
        d_reset_prev.cwiseProduct(prev).cwiseProduct(r).cwiseProduct(Vector::Ones(hidden) - r);

    da_z.row(t) = g_z.transpose();
    da_r.row(t) = g_r.transpose();
    da_h.row(t) = g_h.transpose();
    prev_states.row(t) = prev.transpose();
    reset_states.row(t) = r.cwiseProduct(prev).transpose();

    dh = dh.cwiseProduct(Vector::Ones(hidden) - z) + d_reset_prev.cwiseProduct(r) +
         params.u_z * g_z + params.u_r * g_r;
  }

  grads.w_z += c.inputs.transpose() * da_z;
  grads.w_r += c.inputs.transpose() * da_r;
  grads.w_h += c.inputs.transpose() * da_h;
  grads.u_z += prev_states.transpose() * da_z;
  grads.u_r += prev_states.transpose() * da_r;
  grads.u_h += reset_states.transpose() * da_h;
  grads.b_z += da_z.colwise().sum().transpose();
  grads.b_r += da_r.colwise().sum().transpose();
  grads.b_h += da_h.colwise().sum().transpose();
}

double mae_loss(std::span<const ForwardCache> caches, std::span<const double> labels) {
  if (caches.size() != labels.size() || caches.empty()) {
    throw InvalidInput("mae_loss needs one label per cached forward pass");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < caches.size(); ++i) sum += std::abs(caches[i].prediction - labels[i]);
  return sum / static_cast<double>(caches.size());
}

GruParams backward(const GruParams& params, std::span<const ForwardCache> caches,
                   std::span<const double> labels) {
  if (caches.size() != labels.size() || caches.empty()) {
    throw InvalidInput("backward needs one label per cached forward pass");
  }
  GruParams grads = GruParams::zeros(params.dim_in(), params.hidden());
  const double scale = 1.0 / static_cast<double>(caches.size());
  for (std::size_t i = 0; i < caches.size(); ++i) {
    const double residual = caches[i].prediction - labels[i];
    if (residual == 0.0) continue;
    accumulate_gradients(params, caches[i], residual > 0.0 ? scale : -scale, grads);
  }
  return grads;
}

}  // namespace schubert::model
