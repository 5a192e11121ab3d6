#include "qsteady/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/QR>

#include "qsteady/errors.hpp"

namespace qsteady {

namespace {

constexpr double kTraceTolerance = 1e-10;

// Local index (first support site most significant) of a register index.
inline std::size_t local_index(std::size_t r, const std::vector<int>& bits) {
  std::size_t loc = 0;
  for (int b : bits) loc = (loc << 1) | ((r >> b) & 1u);
  return loc;
}

std::vector<int> register_bits(const SupportSet& s, int n) {
  std::vector<int> bits;
  for (int q : s) bits.push_back(n - 1 - q);
  return bits;
}

void reset_forward(const KrausChannel& ch, double weight, const Matrix& rho, Matrix& out) {
  const int n = num_qubits(rho);
  const std::size_t m = std::size_t{1} << (n - 1 - ch.support[0]);
  const Matrix& w = *ch.reset_state;
  const auto dim = static_cast<std::size_t>(rho.rows());
  const Complex w00 = weight * w(0, 0), w01 = weight * w(0, 1);
  const Complex w10 = weight * w(1, 0), w11 = weight * w(1, 1);
  for (std::size_t c = 0; c < dim; ++c) {
    if (c & m) continue;
    const auto c0 = static_cast<Eigen::Index>(c), c1 = static_cast<Eigen::Index>(c | m);
    for (std::size_t r = 0; r < dim; ++r) {
      if (r & m) continue;
      const auto r0 = static_cast<Eigen::Index>(r), r1 = static_cast<Eigen::Index>(r | m);
      const Complex s = rho(r0, c0) + rho(r1, c1);
      out(r0, c0) += w00 * s;
      out(r0, c1) += w01 * s;
      out(r1, c0) += w10 * s;
      out(r1, c1) += w11 * s;
    }
  }
}

void reset_adjoint(const KrausChannel& ch, double weight, const Matrix& a, Matrix& out) {
  // D^*(A) = Tr_i(A (1 (x) W)) (x) 1_i
  const int n = num_qubits(a);
  const std::size_t m = std::size_t{1} << (n - 1 - ch.support[0]);
  const Matrix& w = *ch.reset_state;
  const auto dim = static_cast<std::size_t>(a.rows());
  for (std::size_t c = 0; c < dim; ++c) {
    if (c & m) continue;
    const auto c0 = static_cast<Eigen::Index>(c), c1 = static_cast<Eigen::Index>(c | m);
    for (std::size_t r = 0; r < dim; ++r) {
      if (r & m) continue;
      const auto r0 = static_cast<Eigen::Index>(r), r1 = static_cast<Eigen::Index>(r | m);
      const Complex s = a(r0, c0) * w(0, 0) + a(r0, c1) * w(1, 0) + a(r1, c0) * w(0, 1) +
                        a(r1, c1) * w(1, 1);
      out(r0, c0) += weight * s;
      out(r1, c1) += weight * s;
    }
  }
}

// sum_k f_k(a) conj(f_k(b)) for diagonal Kraus operators.
Matrix diagonal_factor(const KrausChannel& ch, bool adjoint) {
  const auto k = static_cast<Eigen::Index>(std::size_t{1} << ch.support.size());
  Matrix g = Matrix::Zero(k, k);
  for (const auto& f : ch.kraus_ops) {
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index b = 0; b < k; ++b) {
        g(a, b) += adjoint ? std::conj(f(a, a)) * f(b, b) : f(a, a) * std::conj(f(b, b));
      }
    }
  }
  return g;
}

void diagonal_apply(const KrausChannel& ch, double weight, const Matrix& x, Matrix& out, bool adjoint) {
  const int n = num_qubits(x);
  const Matrix g = weight * diagonal_factor(ch, adjoint);
  const auto bits = register_bits(ch.support, n);
  const auto dim = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> loc(dim);
  for (std::size_t r = 0; r < dim; ++r) loc[r] = local_index(r, bits);
  for (std::size_t c = 0; c < dim; ++c) {
    const auto lc = static_cast<Eigen::Index>(loc[c]);
    for (std::size_t r = 0; r < dim; ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) +=
          g(static_cast<Eigen::Index>(loc[r]), lc) * x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    }
  }
}

void check_register(const Matrix& x, int n, const char* where) {
  if (num_qubits(x) != n) {
    std::ostringstream os;
    os << where << ": operator acts on " << num_qubits(x) << " qubits, channel on " << n;
    throw ShapeError(os.str());
  }
}

// Gram-Schmidt rank tracker for operator spans.
class SpanBasis {
 public:
  explicit SpanBasis(Eigen::Index dim) : dim_(dim) {}

  bool add(const Matrix& m) {
    Vector v = Eigen::Map<const Vector>(m.data(), m.size());
    const double norm0 = v.norm();
    if (norm0 == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis_) v -= b.dot(v) * b;
    }
    if (v.norm() <= 1e-10 * norm0) return false;
    basis_.push_back(v / v.norm());
    return true;
  }

  int dimension() const { return static_cast<int>(basis_.size()); }
  bool full() const { return dimension() == dim_; }

 private:
  Eigen::Index dim_;
  std::vector<Vector> basis_;
};

}  // namespace

bool KrausChannel::is_diagonal() const {
  return std::all_of(kraus_ops.begin(), kraus_ops.end(), [](const Matrix& f) {
    return (f - Matrix(f.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  });
}

Matrix KrausChannel::apply_local(const Matrix& rho) const {
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (const auto& f : kraus_ops) out += f * rho * f.adjoint();
  return out;
}

Matrix KrausChannel::apply_adjoint_local(const Matrix& a) const {
  Matrix out = Matrix::Zero(a.rows(), a.cols());
  for (const auto& f : kraus_ops) out += f.adjoint() * a * f;
  return out;
}

std::string to_string(CorrelatorKind kind) {
  switch (kind) {
    case CorrelatorKind::cz: return "cz";
    case CorrelatorKind::haar_mixture: return "haar_mixture";
    case CorrelatorKind::random_kraus: return "random_kraus";
  }
  return "unknown";
}

std::optional<CorrelatorKind> parse_correlator_kind(const std::string& name) {
  if (name == "cz") return CorrelatorKind::cz;
  if (name == "haar_mixture") return CorrelatorKind::haar_mixture;
  if (name == "random_kraus") return CorrelatorKind::random_kraus;
  return std::nullopt;
}

Matrix controlled_z() {
  Matrix cz = Matrix::Identity(4, 4);
  cz(3, 3) = -1.0;
  return cz;
}

Matrix bloch_state(double x, double y, double z) {
  Matrix rho = 0.5 * (Matrix(pauli(0)) + x * Matrix(pauli(1)) + y * Matrix(pauli(2)) + z * Matrix(pauli(3)));
  return rho;
}

Matrix haar_unitary(int dim, Rng& rng) {
  Matrix g(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) g(r, c) = rng.complex_normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    q.col(j) *= (mag == 0.0) ? Complex(1.0) : d / mag;
  }
  return q;
}

KrausChannel make_reset_dissipator(const Matrix& w, int site) {
  if (w.rows() != 2 || w.cols() != 2) throw ShapeError("reset state must be a single-qubit operator");
  require_density(w, "make_reset_dissipator");
  const auto eig = hermitian_eigendecompose(w);
  if (eig.eigenvalues.minCoeff() <= 1e-12) {
    std::ostringstream os;
    os << "reset state is rank deficient (eigenvalue " << eig.eigenvalues.minCoeff() << ")";
    throw RankDeficiencyError(os.str(), eig.eigenvalues.minCoeff());
  }
  KrausChannel ch;
  ch.support = SupportSet{site};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      Matrix f = Matrix::Zero(2, 2);
      f.col(b) = std::sqrt(eig.eigenvalues[a]) * eig.eigenvectors.col(a);
      ch.kraus_ops.push_back(f);
    }
  }
  ch.reset_state = 0.5 * (w + w.adjoint());
  return ch;
}

KrausChannel make_correlator(const CorrelatorSpec& spec, std::uint64_t seed, Edge edge) {
  KrausChannel ch;
  ch.support = SupportSet{edge.a, edge.b};
  Rng rng(seed);
  switch (spec.kind) {
    case CorrelatorKind::cz:
      ch.kraus_ops.push_back(controlled_z());
      break;
    case CorrelatorKind::haar_mixture: {
      if (spec.param < 1) throw ContractError("haar_mixture needs k >= 1");
      const double scale = 1.0 / std::sqrt(static_cast<double>(spec.param));
      for (int a = 0; a < spec.param; ++a) ch.kraus_ops.push_back(scale * haar_unitary(4, rng));
      break;
    }
    case CorrelatorKind::random_kraus: {
      const int rank = spec.param;
      if (rank < 1) throw ContractError("random_kraus needs rank >= 1");
      Matrix g(4 * rank, 4);
      for (Eigen::Index c = 0; c < 4; ++c) {
        for (Eigen::Index r = 0; r < 4 * rank; ++r) g(r, c) = rng.complex_normal();
      }
      Eigen::HouseholderQR<Matrix> qr(g);
      const Matrix v = qr.householderQ() * Matrix::Identity(4 * rank, 4);
      // Row (i, k) of V lives at i * rank + k.
      for (int k = 0; k < rank; ++k) {
        Matrix f(4, 4);
        for (Eigen::Index i = 0; i < 4; ++i) f.row(i) = v.row(i * rank + k);
        ch.kraus_ops.push_back(f);
      }
      break;
    }
  }
  return ch;
}

Matrix choi_matrix(const KrausChannel& ch) {
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << ch.support.size());
  Matrix choi = Matrix::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      Matrix e = Matrix::Zero(d, d);
      e(i, j) = 1.0;
      choi.block(i * d, j * d, d, d) = ch.apply_local(e);
    }
  }
  return choi;
}

CptpReport validate_cptp(const KrausChannel& ch) {
  CptpReport report;
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << ch.support.size());
  Matrix completeness = Matrix::Zero(d, d);
  for (const auto& f : ch.kraus_ops) {
    if (f.rows() != d || f.cols() != d) throw ShapeError("Kraus operator does not match its support");
    completeness += f.adjoint() * f;
  }
  report.trace_defect = operator_norm(completeness - Matrix::Identity(d, d));
  report.trace_preserving = report.trace_defect <= kTraceTolerance;
  const Matrix choi = choi_matrix(ch);
  report.cp_min_eig = hermitian_eigenvalues(0.5 * (choi + choi.adjoint())).minCoeff();
  report.completely_positive = report.cp_min_eig >= -kTraceTolerance;
  return report;
}

ErgodicityReport local_ergodicity_check(const KrausChannel& ch, int k_max) {
  if (ch.support.size() > 2) throw UnsupportedError("ergodicity check supports at most two qubits");
  if (k_max < 1) throw ContractError("k_max must be at least 1");
  const auto d = static_cast<Eigen::Index>(std::size_t{1} << ch.support.size());
  const Eigen::Index full = d * d;

  ErgodicityReport report;
  SpanBasis cumulative(full);
  // Orthonormal-ish generators of the exact-degree span, kept as matrices.
  std::vector<Matrix> layer;
  for (int k = 1; k <= k_max; ++k) {
    SpanBasis exact(full);
    std::vector<Matrix> next;
    if (k == 1) {
      for (const auto& f : ch.kraus_ops) {
        if (exact.add(f)) next.push_back(f);
      }
    } else {
      for (const auto& f : ch.kraus_ops) {
        for (const auto& g : layer) {
          Matrix p = f * g;
          if (exact.add(p)) next.push_back(p / p.norm());
          if (exact.full()) break;
        }
        if (exact.full()) break;
      }
    }
    for (const auto& m : next) cumulative.add(m);
    layer = std::move(next);
    report.exact_span_dim_at_k.push_back(exact.dimension());
    report.span_dim_at_k.push_back(cumulative.dimension());
    if (report.k_reached < 0 && cumulative.full()) report.k_reached = k;
  }
  report.ergodic = report.k_reached > 0;
  return report;
}

void ChannelModel::validate() const {
  const int n = graph.num_vertices();
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ContractError("epsilon must lie in [0, 1]");
  if (dissipators.size() != static_cast<std::size_t>(n)) {
    throw ContractError("model needs one dissipator per vertex");
  }
  if (correlators.size() != graph.num_edges()) {
    throw ContractError("model needs one correlator per edge");
  }
  for (int i = 0; i < n; ++i) {
    if (graph.vertex_weight(i) <= 0.0) {
      throw ContractError("vertex " + std::to_string(i) + " has zero weight q_i");
    }
    const auto& d = dissipators[static_cast<std::size_t>(i)];
    if (!(d.support == SupportSet{i})) {
      throw ContractError("dissipator " + std::to_string(i) + " must act on vertex " + std::to_string(i));
    }
    if (!validate_cptp(d).ok()) throw ContractError("dissipator " + std::to_string(i) + " is not CPTP");
  }
  for (std::size_t k = 0; k < graph.num_edges(); ++k) {
    const Edge& e = graph.edge(k);
    const auto& f = correlators[k];
    if (!(f.support == SupportSet{e.a, e.b})) {
      throw ContractError("correlator " + std::to_string(k) + " must act on its edge");
    }
    if (!validate_cptp(f).ok()) throw ContractError("correlator " + std::to_string(k) + " is not CPTP");
  }
}

std::optional<std::vector<Matrix>> ChannelModel::reset_states() const {
  std::vector<Matrix> states;
  for (const auto& d : dissipators) {
    if (!d.reset_state) return std::nullopt;
    states.push_back(*d.reset_state);
  }
  return states;
}

ChannelModel make_model(InteractionGraph graph, const std::vector<Matrix>& reset_states,
                        std::vector<KrausChannel> correlators, double epsilon) {
  std::vector<KrausChannel> dissipators;
  for (std::size_t i = 0; i < reset_states.size(); ++i) {
    dissipators.push_back(make_reset_dissipator(reset_states[i], static_cast<int>(i)));
  }
  ChannelModel model{std::move(graph), std::move(dissipators), std::move(correlators), epsilon};
  model.validate();
  return model;
}

ChannelModel make_cz_model(InteractionGraph graph, double epsilon) {
  // 0.9|+><+| + 0.1|-><-| = (1 + 0.8 X)/2
  const Matrix w = bloch_state(0.8, 0.0, 0.0);
  std::vector<Matrix> states(static_cast<std::size_t>(graph.num_vertices()), w);
  std::vector<KrausChannel> correlators;
  for (const auto& e : graph.edges()) correlators.push_back(make_correlator({CorrelatorKind::cz, 1}, 0, e));
  return make_model(std::move(graph), states, std::move(correlators), epsilon);
}

ChannelModel make_random_model(InteractionGraph graph, const RandomModelOptions& options,
                               std::uint64_t seed, double epsilon) {
  if (!(options.min_bloch >= 0.0 && options.max_bloch < 1.0 && options.min_bloch <= options.max_bloch)) {
    throw ContractError("Bloch radius range must satisfy 0 <= min <= max < 1");
  }
  Rng rng(derive_seed(seed, 0x57));
  std::vector<Matrix> states;
  for (int i = 0; i < graph.num_vertices(); ++i) {
    // Uniform direction from a normalized Gaussian vector.
    double x = rng.normal(), y = rng.normal(), z = rng.normal();
    double len = std::sqrt(x * x + y * y + z * z);
    while (len == 0.0) {
      x = rng.normal(); y = rng.normal(); z = rng.normal();
      len = std::sqrt(x * x + y * y + z * z);
    }
    const double radius = options.min_bloch + (options.max_bloch - options.min_bloch) * rng.uniform();
    states.push_back(bloch_state(radius * x / len, radius * y / len, radius * z / len));
  }
  std::vector<KrausChannel> correlators;
  for (std::size_t k = 0; k < graph.num_edges(); ++k) {
    correlators.push_back(make_correlator(options.correlator, derive_seed(seed, 0xC0, k), graph.edge(k)));
  }
  return make_model(std::move(graph), states, std::move(correlators), epsilon);
}

EpsilonChannel::EpsilonChannel(ChannelModel model)
    : model_(std::make_unique<ChannelModel>(std::move(model))) {
  model_->validate();
  edge_eps_.assign(model_->graph.num_edges(), model_->epsilon);
  build_terms();
}

EpsilonChannel::EpsilonChannel(ChannelModel model, std::vector<double> edge_epsilons)
    : model_(std::make_unique<ChannelModel>(std::move(model))), edge_eps_(std::move(edge_epsilons)) {
  model_->validate();
  if (edge_eps_.size() != model_->graph.num_edges()) {
    throw ContractError("need one epsilon per edge");
  }
  for (double e : edge_eps_) {
    if (!(e >= 0.0 && e <= 1.0)) throw ContractError("edge epsilon must lie in [0, 1]");
  }
  build_terms();
}

void EpsilonChannel::build_terms() {
  const auto& g = model_->graph;
  n_ = g.num_vertices();
  std::vector<double> vertex(static_cast<std::size_t>(n_), 0.0);
  for (std::size_t k = 0; k < g.num_edges(); ++k) {
    const double w = 0.5 * g.edge_weight(k) * (1.0 - edge_eps_[k]);
    vertex[static_cast<std::size_t>(g.edge(k).a)] += w;
    vertex[static_cast<std::size_t>(g.edge(k).b)] += w;
  }
  terms_.clear();
  for (int i = 0; i < n_; ++i) {
    const double w = vertex[static_cast<std::size_t>(i)];
    if (w != 0.0) terms_.push_back({w, &model_->dissipators[static_cast<std::size_t>(i)]});
  }
  for (std::size_t k = 0; k < g.num_edges(); ++k) {
    const double w = g.edge_weight(k) * edge_eps_[k];
    if (w != 0.0) terms_.push_back({w, &model_->correlators[k]});
  }
}

void accumulate_local_channel(const KrausChannel& ch, double weight, const Matrix& rho, Matrix& out) {
  if (ch.reset_state && ch.support.size() == 1) {
    reset_forward(ch, weight, rho, out);
    return;
  }
  if (ch.is_diagonal()) {
    diagonal_apply(ch, weight, rho, out, false);
    return;
  }
  Matrix x;
  for (const auto& f : ch.kraus_ops) {
    x = rho;
    apply_local_left(x, f, ch.support);
    apply_local_right_adjoint(x, f, ch.support);
    out += weight * x;
  }
}

void accumulate_local_adjoint(const KrausChannel& ch, double weight, const Matrix& a, Matrix& out) {
  if (ch.reset_state && ch.support.size() == 1) {
    reset_adjoint(ch, weight, a, out);
    return;
  }
  if (ch.is_diagonal()) {
    diagonal_apply(ch, weight, a, out, true);
    return;
  }
  Matrix x;
  for (const auto& f : ch.kraus_ops) {
    const Matrix fd = f.adjoint();
    x = a;
    apply_local_left(x, fd, ch.support);
    apply_local_right_adjoint(x, fd, ch.support);
    out += weight * x;
  }
}

Matrix EpsilonChannel::apply(const Matrix& rho) const {
  check_register(rho, n_, "apply_channel");
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (const auto& t : terms_) accumulate_local_channel(*t.channel, t.weight, rho, out);
  return out;
}

Matrix EpsilonChannel::apply_adjoint(const Matrix& a) const {
  check_register(a, n_, "apply_adjoint");
  Matrix out = Matrix::Zero(a.rows(), a.cols());
  for (const auto& t : terms_) accumulate_local_adjoint(*t.channel, t.weight, a, out);
  return out;
}

Matrix EpsilonChannel::apply_edge_grouped(const Matrix& rho) const {
  check_register(rho, n_, "apply_edge_grouped");
  const auto& g = model_->graph;
  Matrix out = Matrix::Zero(rho.rows(), rho.cols());
  for (std::size_t k = 0; k < g.num_edges(); ++k) {
    const Edge& e = g.edge(k);
    Matrix edge_term = Matrix::Zero(rho.rows(), rho.cols());
    const double half = 0.5 * (1.0 - edge_eps_[k]);
    accumulate_local_channel(model_->dissipators[static_cast<std::size_t>(e.a)], half, rho, edge_term);
    accumulate_local_channel(model_->dissipators[static_cast<std::size_t>(e.b)], half, rho, edge_term);
    accumulate_local_channel(model_->correlators[k], edge_eps_[k], rho, edge_term);
    out += g.edge_weight(k) * edge_term;
  }
  return out;
}

EpsilonChannel compose_epsilon_channel(const ChannelModel& model) { return EpsilonChannel(model); }

Matrix apply_channel(const EpsilonChannel& channel, const Matrix& rho) { return channel.apply(rho); }

Matrix apply_adjoint(const EpsilonChannel& channel, const Matrix& a) { return channel.apply_adjoint(a); }

Matrix product_reset_state(const ChannelModel& model) {
  const auto states = model.reset_states();
  if (!states) throw UnsupportedError("model has non-reset dissipators");
  Matrix rho = (*states)[0];
  for (std::size_t i = 1; i < states->size(); ++i) rho = kron(rho, (*states)[i]);
  return rho;
}

}  // namespace qsteady
