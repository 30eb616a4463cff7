#include "mambatrack/ssm.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace mambatrack {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix to_matrix(const Tensor& t) {
  return Eigen::Map<const Matrix>(t.data(), t.rows(), t.cols());
}

Tensor to_tensor(const Matrix& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  Eigen::Map<Matrix>(t.data(), m.rows(), m.cols()) = m;
  return t;
}

void check_selective_shapes(const SelectiveScanInputs& in) {
  const std::size_t channels = in.A.rows();
  const std::size_t states = in.A.cols();
  const std::size_t steps = in.u.rows();
  auto bad = [](const char* name, const Tensor& t) {
    throw ShapeError(std::string("selective_ssm_scan: bad shape for ") + name + " " +
                     t.shape_string());
  };
  if (in.u.rank() != 2 || in.u.cols() != channels) bad("u", in.u);
  if (!in.delta.same_shape(in.u)) bad("delta", in.delta);
  if (in.B.rank() != 2 || in.B.rows() != steps || in.B.cols() != states) bad("B", in.B);
  if (!in.C.same_shape(in.B)) bad("C", in.C);
  if (in.D_skip.size() != channels) bad("D_skip", in.D_skip);
  for (std::size_t i = 0; i < in.delta.size(); ++i)
    if (!(in.delta[i] > 0.0))
      throw DomainError("selective_ssm_scan: delta must be positive, got " +
                        std::to_string(in.delta[i]));
}

}  // namespace

DiscreteSsm discretize(const SsmParams& params) {
  const std::size_t n = params.A.rows();
  if (params.A.rank() != 2 || params.A.cols() != n) throw ShapeError("discretize: A must be square");
  if (params.B.size() != n || params.C.size() != n) throw ShapeError("discretize: B/C size mismatch");
  if (!(params.delta > 0.0)) throw DomainError("discretize: delta must be positive");

  const Matrix A = to_matrix(params.A);
  const Matrix I = Matrix::Identity(n, n);
  const Matrix lhs = I - (params.delta / 2.0) * A;
  Eigen::FullPivLU<Matrix> lu(lhs);
  if (!lu.isInvertible()) throw SingularMatrixError("discretize: (I - delta/2 A) is singular");

  const Matrix rhs = I + (params.delta / 2.0) * A;
  const Matrix B = Eigen::Map<const Matrix>(params.B.data(), n, 1);
  DiscreteSsm d;
  d.A_bar = to_tensor(lu.solve(rhs));
  d.B_bar = to_tensor(lu.solve(params.delta * B));
  d.C_bar = Tensor({1, n}, std::vector<double>(params.C.values().begin(), params.C.values().end()));
  d.D_bar = params.D;
  return d;
}

std::vector<double> ssm_scan(const DiscreteSsm& disc, const std::vector<double>& x,
                             const std::vector<double>& h0) {
  const std::size_t n = disc.state_size();
  if (h0.size() != n) throw ShapeError("ssm_scan: initial state size mismatch");
  std::vector<double> h = h0;
  std::vector<double> next(n);
  std::vector<double> y;
  y.reserve(x.size());
  for (double xk : x) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = disc.B_bar[i] * xk;
      for (std::size_t j = 0; j < n; ++j) acc += disc.A_bar(i, j) * h[j];
      next[i] = acc;
    }
    h.swap(next);
    double out = disc.D_bar * xk;
    for (std::size_t i = 0; i < n; ++i) out += disc.C_bar[i] * h[i];
    y.push_back(out);
  }
  return y;
}

Tensor selective_ssm_scan(const SelectiveScanInputs& in) {
  check_selective_shapes(in);
  const std::size_t channels = in.A.rows();
  const std::size_t states = in.A.cols();
  const std::size_t steps = in.u.rows();
  const double* A = in.A.data();
  const double* U = in.u.data();
  const double* Dt = in.delta.data();
  const double* Bm = in.B.data();
  const double* Cm = in.C.data();

  Tensor y({steps, channels});
  double* Y = y.data();
  std::vector<double> h(channels * states, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const double* b_t = Bm + t * states;
    const double* c_t = Cm + t * states;
    for (std::size_t c = 0; c < channels; ++c) {
      const double dt = Dt[t * channels + c];
      const double u = U[t * channels + c];
      const double* a_c = A + c * states;
      double* h_c = h.data() + c * states;
      double out = in.D_skip[c] * u;
      for (std::size_t n = 0; n < states; ++n) {
        const double a = a_c[n];
        const double s = 1.0 - dt * a / 2.0;
        const double a_bar = (1.0 + dt * a / 2.0) / s;
        const double b_bar = dt / s;
        h_c[n] = a_bar * h_c[n] + b_bar * b_t[n] * u;
        out += c_t[n] * h_c[n];
      }
      Y[t * channels + c] = out;
    }
  }
  return y;
}

SelectiveScanGrads selective_ssm_scan_backward(const SelectiveScanInputs& in,
                                               const Tensor& grad_out) {
  check_selective_shapes(in);
  require_same_shape(in.u, grad_out, "selective_ssm_scan_backward");
  const std::size_t channels = in.A.rows();
  const std::size_t states = in.A.cols();
  const std::size_t steps = in.u.rows();
  const std::size_t plane = channels * states;
  const double* A = in.A.data();
  const double* U = in.u.data();
  const double* Dt = in.delta.data();
  const double* Bm = in.B.data();
  const double* Cm = in.C.data();
  const double* G = grad_out.data();

  // Replay the forward pass keeping every state.
  std::vector<double> hist((steps + 1) * plane, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const double* prev = &hist[t * plane];
    double* cur = &hist[(t + 1) * plane];
    const double* b_t = Bm + t * states;
    for (std::size_t c = 0; c < channels; ++c) {
      const double dt = Dt[t * channels + c];
      const double u = U[t * channels + c];
      const double* a_c = A + c * states;
      for (std::size_t n = 0; n < states; ++n) {
        const double a = a_c[n];
        const double s = 1.0 - dt * a / 2.0;
        const std::size_t k = c * states + n;
        cur[k] = (1.0 + dt * a / 2.0) / s * prev[k] + dt / s * b_t[n] * u;
      }
    }
  }

  SelectiveScanGrads g{Tensor::zeros_like(in.A),     Tensor::zeros_like(in.u),
                       Tensor::zeros_like(in.delta), Tensor::zeros_like(in.B),
                       Tensor::zeros_like(in.C),     Tensor::zeros_like(in.D_skip)};
  double* gA = g.A.data();
  double* gU = g.u.data();
  double* gDt = g.delta.data();
  double* gB = g.B.data();
  double* gC = g.C.data();
  // Adjoint of h_{t+1} propagated back through A_bar_{t+1}.
  std::vector<double> carry(plane, 0.0);
  for (std::size_t t = steps; t-- > 0;) {
    const double* prev = &hist[t * plane];
    const double* cur = &hist[(t + 1) * plane];
    const double* b_t = Bm + t * states;
    const double* c_t = Cm + t * states;
    double* gb_t = gB + t * states;
    double* gc_t = gC + t * states;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t tc = t * channels + c;
      const double dt = Dt[tc];
      const double u = U[tc];
      const double gy = G[tc];
      const double* a_c = A + c * states;
      double* ga_c = gA + c * states;
      g.D_skip[c] += gy * u;
      double gu = gy * in.D_skip[c];
      double gdt = 0.0;
      for (std::size_t n = 0; n < states; ++n) {
        const std::size_t k = c * states + n;
        const double a = a_c[n];
        const double s = 1.0 - dt * a / 2.0;
        const double a_bar = (1.0 + dt * a / 2.0) / s;
        const double b_bar = dt / s;
        const double gh = gy * c_t[n] + carry[k];
        gc_t[n] += gy * cur[k];
        const double g_abar = gh * prev[k];
        const double g_bbar = gh * b_t[n] * u;
        gb_t[n] += gh * b_bar * u;
        gu += gh * b_bar * b_t[n];
        const double inv_s2 = 1.0 / (s * s);
        gdt += (g_abar * a + g_bbar) * inv_s2;
        ga_c[n] += (g_abar * dt + g_bbar * dt * dt / 2.0) * inv_s2;
        carry[k] = gh * a_bar;
      }
      gU[tc] += gu;
      gDt[tc] += gdt;
    }
  }
  return g;
}

}  // namespace mambatrack
