#include "qsteady/perturb.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "qsteady/errors.hpp"

namespace qsteady {

namespace {

constexpr int kMaxDenseQubits = 12;
// Up to this size T accumulates into a dense 4^n array.
constexpr int kDenseAccumulatorQubits = 11;

Matrix2 rotate(const Matrix2& u, const Matrix2& m) { return u.adjoint() * m * u; }

// Index into a product-basis coefficient vector over `sites`, the first site
// being the most significant base-4 digit.
WauliKey key_from_local_index(std::size_t index, const std::vector<int>& sites) {
  WauliKey key = 0;
  const std::size_t m = sites.size();
  for (std::size_t j = 0; j < m; ++j) {
    const int letter = static_cast<int>((index >> (2 * (m - 1 - j))) & 3u);
    key |= static_cast<WauliKey>(letter) << (2 * sites[j]);
  }
  return key;
}

std::size_t string_index_from_key(WauliKey key, int n) {
  std::size_t index = 0;
  for (int q = 0; q < n; ++q) index = (index << 2) | static_cast<std::size_t>(key_letter(key, q));
  return index;
}

void check_frame(const LocalFrame& frame, int n) {
  if (frame.num_qubits() != n) {
    std::ostringstream os;
    os << "frame has " << frame.num_qubits() << " qubits, operator has " << n;
    throw ShapeError(os.str());
  }
}

double tail_factor(double x, int k_used) {
  if (x >= 1.0) return std::numeric_limits<double>::infinity();
  return std::pow(x, k_used + 1) / (1.0 - x);
}

// Accumulates keyed coefficients, densely for small registers.
class Accumulator {
 public:
  explicit Accumulator(int n) : n_(n) {
    if (n <= kDenseAccumulatorQubits) dense_.assign(std::size_t{1} << (2 * n), Complex(0.0));
  }

  void add(WauliKey key, Complex value) {
    if (!dense_.empty()) {
      dense_[key] += value;
    } else {
      sparse_[key] += value;
    }
  }

  DualWauliOperator finish(double prune) {
    std::vector<DualWauliOperator::Term> terms;
    if (!dense_.empty()) {
      for (std::size_t k = 0; k < dense_.size(); ++k) {
        if (std::abs(dense_[k]) >= prune) terms.push_back({k, dense_[k]});
      }
    } else {
      terms.reserve(sparse_.size());
      for (const auto& [k, v] : sparse_) terms.push_back({k, v});
    }
    return DualWauliOperator::from_terms(n_, std::move(terms), prune);
  }

 private:
  int n_;
  std::vector<Complex> dense_;
  std::unordered_map<WauliKey, Complex> sparse_;
};

}  // namespace

LocalFrame frames_from_states(const std::vector<Matrix>& states) {
  LocalFrame frame;
  for (const auto& w : states) {
    if (w.rows() != 2 || w.cols() != 2) throw ShapeError("reset state must be 2x2");
    const auto eig = hermitian_eigendecompose(w);
    Matrix2 u = Matrix2::Identity();
    const double lambda = eig.eigenvalues[0] - eig.eigenvalues[1];
    if (lambda > 1e-14) {
      Matrix2 v = eig.eigenvectors;
      // Fix phases: the largest-magnitude entry of each eigenvector is real
      // and positive, so diagonal states get u = 1.
      for (int c = 0; c < 2; ++c) {
        Eigen::Index i = 0;
        v.col(c).cwiseAbs().maxCoeff(&i);
        v.col(c) *= std::conj(v(i, c)) / std::abs(v(i, c));
      }
      u = v.adjoint();
    }
    if (lambda >= 1.0) throw RankDeficiencyError("reset state is not full rank", eig.eigenvalues[1]);
    QubitBasis q, d;
    const Matrix2 id = Matrix2::Identity();
    const Matrix2 z = pauli(3);
    q[0] = rotate(u, 0.5 * (id + lambda * z));
    q[1] = rotate(u, 0.5 * pauli(1));
    q[2] = rotate(u, 0.5 * pauli(2));
    q[3] = rotate(u, 0.5 * z);
    d[0] = id;
    d[1] = rotate(u, pauli(1));
    d[2] = rotate(u, pauli(2));
    d[3] = rotate(u, z - lambda * id);
    frame.u.push_back(u);
    frame.lambda.push_back(lambda);
    frame.lambda_max = std::max(frame.lambda_max, lambda);
    frame.wauli.push_back(q);
    frame.dual.push_back(d);
  }
  return frame;
}

LocalFrame derive_frames(const ChannelModel& model) {
  const auto states = model.reset_states();
  if (!states) throw UnsupportedError("perturbation engine needs reset dissipators on every vertex");
  return frames_from_states(*states);
}

std::uint64_t key_support_mask(WauliKey key) {
  std::uint64_t pairs = (key | (key >> 1)) & 0x5555555555555555ull;
  std::uint64_t mask = 0;
  for (int i = 0; pairs != 0; ++i, pairs >>= 2) mask |= (pairs & 1u) << i;
  return mask;
}

DualWauliOperator::DualWauliOperator(int n) : n_(n) {
  if (n < 0 || n > kMaxDualWauliQubits) {
    throw UnsupportedError("dual-Wauli operators support at most " + std::to_string(kMaxDualWauliQubits) +
                           " qubits");
  }
}

DualWauliOperator DualWauliOperator::from_terms(int n, std::vector<Term> terms, double prune) {
  DualWauliOperator out(n);
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.key < b.key; });
  for (const auto& t : terms) {
    if (!out.terms_.empty() && out.terms_.back().key == t.key) {
      out.terms_.back().coeff += t.coeff;
    } else {
      out.terms_.push_back(t);
    }
  }
  std::erase_if(out.terms_, [prune](const Term& t) { return std::abs(t.coeff) < prune; });
  return out;
}

DualWauliOperator DualWauliOperator::identity(int n) {
  DualWauliOperator out(n);
  out.terms_.push_back({0, Complex(1.0)});
  return out;
}

Complex DualWauliOperator::coeff(WauliKey key) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), key,
                             [](const Term& t, WauliKey k) { return t.key < k; });
  return (it != terms_.end() && it->key == key) ? it->coeff : Complex(0.0);
}

std::uint64_t DualWauliOperator::support_mask() const {
  WauliKey all = 0;
  for (const auto& t : terms_) all |= t.key;
  return key_support_mask(all);
}

DualWauliOperator DualWauliOperator::scaled(Complex factor) const {
  std::vector<Term> terms = terms_;
  for (auto& t : terms) t.coeff *= factor;
  return from_terms(n_, std::move(terms), 0.0);
}

DualWauliOperator to_dual_wauli(const LocalOperator& a, const LocalFrame& frame) {
  const int n = frame.num_qubits();
  a.support.validate(n);
  const auto expected = static_cast<Eigen::Index>(std::size_t{1} << a.support.size());
  if (a.matrix.rows() != expected || a.matrix.cols() != expected) {
    throw ShapeError("local operator does not match its support");
  }
  if (a.support.empty()) {
    return DualWauliOperator::from_terms(n, {{0, a.matrix(0, 0)}});
  }
  if (static_cast<int>(a.support.size()) > kMaxDenseQubits) {
    throw UnsupportedError("support too large for dense dual-Wauli extraction");
  }
  std::vector<QubitBasis> bases;
  for (int s : a.support) bases.push_back(frame.wauli[static_cast<std::size_t>(s)]);
  const Vector c = product_basis_analysis(a.matrix, bases);
  std::vector<DualWauliOperator::Term> terms;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (std::abs(c[i]) >= kPruneThreshold) {
      terms.push_back({key_from_local_index(static_cast<std::size_t>(i), a.support.sites()), c[i]});
    }
  }
  return DualWauliOperator::from_terms(n, std::move(terms));
}

DualWauliOperator to_dual_wauli(const Matrix& a, const LocalFrame& frame) {
  check_frame(frame, num_qubits(a));
  LocalOperator local = restrict_to_support(a);
  if (static_cast<int>(local.support.size()) > kMaxDenseQubits) {
    throw UnsupportedError("support too large for dense dual-Wauli extraction");
  }
  return to_dual_wauli(local, frame);
}

Matrix from_dual_wauli(const DualWauliOperator& o, const LocalFrame& frame) {
  const int n = o.num_qubits();
  check_frame(frame, n);
  if (n > kMaxDenseQubits || n < 1) throw UnsupportedError("dense reconstruction needs 1 <= n <= 12");
  Vector c = Vector::Zero(static_cast<Eigen::Index>(std::size_t{1} << (2 * n)));
  for (const auto& t : o.terms()) c[static_cast<Eigen::Index>(string_index_from_key(t.key, n))] += t.coeff;
  return product_basis_synthesis(c, frame.dual);
}

double q1_norm(const DualWauliOperator& o) {
  double s = 0.0;
  for (const auto& t : o.terms()) s += std::abs(t.coeff);
  return s;
}

DualWauliOperator apply_adjoint_E0(const DualWauliOperator& o, const InteractionGraph& graph) {
  if (graph.num_vertices() != o.num_qubits()) throw ShapeError("graph and operator sizes differ");
  std::vector<DualWauliOperator::Term> terms;
  for (const auto& t : o.terms()) {
    double q = 0.0;
    for (std::uint64_t m = key_support_mask(t.key); m != 0; m &= m - 1) {
      q += graph.vertex_weight(std::countr_zero(m));
    }
    terms.push_back({t.key, (1.0 - q) * t.coeff});
  }
  return DualWauliOperator::from_terms(o.num_qubits(), std::move(terms));
}

TransitionEngine::TransitionEngine(const ChannelModel& model, double prune)
    : graph_(model.graph), frame_(derive_frames(model)), prune_(prune) {
  model.validate();
  if (graph_.num_vertices() > kMaxDualWauliQubits) throw UnsupportedError("too many qubits for WauliKey");
  for (std::size_t k = 0; k < graph_.num_edges(); ++k) {
    const Edge& e = graph_.edge(k);
    const KrausChannel& f = model.correlators[k];
    const auto& qa = frame_.wauli[static_cast<std::size_t>(e.a)];
    const auto& qb = frame_.wauli[static_cast<std::size_t>(e.b)];
    const auto& da = frame_.dual[static_cast<std::size_t>(e.a)];
    const auto& db = frame_.dual[static_cast<std::size_t>(e.b)];
    EdgeMatrix m;
    for (int alpha = 0; alpha < 16; ++alpha) {
      const Matrix image = f.apply_adjoint_local(kron(da[static_cast<std::size_t>(alpha >> 2)],
                                                      db[static_cast<std::size_t>(alpha & 3)]));
      for (int beta = 0; beta < 16; ++beta) {
        const Matrix qbeta = kron(qa[static_cast<std::size_t>(beta >> 2)], qb[static_cast<std::size_t>(beta & 3)]);
        const Complex v = (qbeta * image).trace();
        m(beta, alpha) = std::abs(v) < 1e-15 ? Complex(0.0) : v;
      }
    }
    edge_mats_.push_back(m);
  }
}

DualWauliOperator TransitionEngine::apply(const DualWauliOperator& o) const {
  const int n = num_qubits();
  if (o.num_qubits() != n) throw ShapeError("operator size does not match the engine");
  Accumulator acc(n);
  for (const auto& t : o.terms()) {
    if (t.key == 0) continue;  // unital maps send the identity to zero
    const std::uint64_t mask = key_support_mask(t.key);
    double q_alpha = 0.0;
    for (std::uint64_t m = mask; m != 0; m &= m - 1) q_alpha += graph_.vertex_weight(std::countr_zero(m));
    double p_e1 = 0.0;
    for (std::uint64_t m = mask; m != 0; m &= m - 1) {
      const int i = std::countr_zero(m);
      for (std::size_t k : graph_.incident_edges(i)) {
        const Edge& e = graph_.edge(k);
        const int other = e.a == i ? e.b : e.a;
        if (((mask >> other) & 1u) && other < i) continue;  // visited from `other`
        const double p = graph_.edge_weight(k);
        p_e1 += p;
        const int s = 4 * key_letter(t.key, e.a) + key_letter(t.key, e.b);
        const WauliKey base = key_with(key_with(t.key, e.a, 0), e.b, 0);
        const Complex scale = t.coeff * (p / q_alpha);
        const auto col = edge_mats_[k].col(s);
        for (int beta = 0; beta < 16; ++beta) {
          if (col[beta] == Complex(0.0)) continue;
          const WauliKey key = base | (static_cast<WauliKey>(beta >> 2) << (2 * e.a)) |
                               (static_cast<WauliKey>(beta & 3) << (2 * e.b));
          acc.add(key, scale * col[beta]);
        }
      }
    }
    acc.add(t.key, t.coeff * (1.0 - p_e1 / q_alpha));
  }
  return acc.finish(prune_);
}

DualWauliOperator TransitionEngine::apply_correlator_adjoint(std::size_t edge, const DualWauliOperator& o) const {
  const Edge& e = graph_.edge(edge);
  Accumulator acc(num_qubits());
  for (const auto& t : o.terms()) {
    const int s = 4 * key_letter(t.key, e.a) + key_letter(t.key, e.b);
    const WauliKey base = key_with(key_with(t.key, e.a, 0), e.b, 0);
    const auto col = edge_mats_[edge].col(s);
    for (int beta = 0; beta < 16; ++beta) {
      if (col[beta] == Complex(0.0)) continue;
      acc.add(base | (static_cast<WauliKey>(beta >> 2) << (2 * e.a)) | (static_cast<WauliKey>(beta & 3) << (2 * e.b)),
              t.coeff * col[beta]);
    }
  }
  return acc.finish(prune_);
}

DualWauliOperator apply_transition_T(const DualWauliOperator& o, const TransitionEngine& engine) {
  return engine.apply(o);
}

namespace {

AkMetadata describe(const DualWauliOperator& op, int k) {
  AkMetadata m;
  m.k = k;
  m.terms = op.size();
  m.support_mask = op.support_mask();
  m.support_size = std::popcount(m.support_mask);
  m.q1_norm = q1_norm(op);
  m.identity_coeff = op.identity_coefficient();
  return m;
}

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ContractError("series needs epsilon in [0, 1)");
}

}  // namespace

AkSequence a_k_sequence(const LocalOperator& a, const TransitionEngine& engine, int k_max,
                        const SequenceOptions& options) {
  if (k_max < 0) throw ContractError("k_max must be nonnegative");
  AkSequence seq;
  seq.ops.push_back(to_dual_wauli(a, engine.frame()));
  seq.meta.push_back(describe(seq.ops.back(), 0));
  for (int k = 1; k <= k_max; ++k) {
    DualWauliOperator next = engine.apply(seq.ops.back());
    if (next.size() > options.max_terms) {
      seq.capped = true;
      break;
    }
    seq.meta.push_back(describe(next, k));
    seq.ops.push_back(std::move(next));
    seq.k_reached = k;
  }
  return seq;
}

double epsilon_zero() { return std::exp(-6.0); }

SeriesResult series_from_sequence(const AkSequence& seq, const LocalOperator& a, double epsilon) {
  check_epsilon(epsilon);
  SeriesResult out;
  out.k_used = seq.k_reached;
  double sum = 0.0;
  double power = 1.0;
  for (int k = 0; k <= seq.k_reached; ++k) {
    const double c = seq.meta[static_cast<std::size_t>(k)].identity_coeff.real();
    out.orders.push_back(c);
    sum += power * c;
    out.partial_sums.push_back(sum);
    power *= epsilon;
  }
  out.value = sum;
  if (seq.ops.back().empty()) {
    out.tail_bound = 0.0;  // every later A_k vanishes as well
  } else {
    const double ell = static_cast<double>(a.support.size());
    out.tail_bound = tail_factor(epsilon * std::exp(6.0), out.k_used) * std::exp(6.0 * ell) *
                     operator_norm(a.matrix);
  }
  return out;
}

SeriesResult expectation_series(const LocalOperator& a, const TransitionEngine& engine, double epsilon,
                                int k_max, const SequenceOptions& options) {
  check_epsilon(epsilon);
  return series_from_sequence(a_k_sequence(a, engine, k_max, options), a, epsilon);
}

int truncation_order(double delta, double epsilon, int ell) {
  if (!(delta > 0.0)) throw ContractError("delta must be positive");
  if (ell < 0) throw ContractError("support size must be nonnegative");
  if (!(epsilon >= 0.0)) throw ContractError("epsilon must be nonnegative");
  if (epsilon >= epsilon_zero()) {
    std::ostringstream os;
    os << "epsilon = " << epsilon << " is not below eps0 = e^-6 = " << epsilon_zero();
    throw ContractError(os.str());
  }
  const double x = epsilon * std::exp(6.0);
  int k = 0;
  while (tail_factor(x, k) > delta) ++k;
  return k;
}

double covariance_bound(double epsilon, int ell_a, int ell_b, double norm_a, double norm_b, int distance) {
  if (distance < 0) return 0.0;
  const double r = epsilon / epsilon_zero();
  if (r >= 1.0) return std::numeric_limits<double>::infinity();
  const double c = (distance + 2.0) / ((1.0 - r) * (1.0 - r));
  return c * std::exp(6.0 * (ell_a + ell_b)) * norm_a * norm_b * std::pow(r, distance);
}

LocalOperator disjoint_product(const LocalOperator& a, const LocalOperator& b) {
  if (a.support.empty() || b.support.empty()) throw ContractError("covariance needs nonempty supports");
  if (a.support.intersects(b.support)) throw UnsupportedError("covariance_series needs disjoint supports");
  const SupportSet joint = a.support.unite(b.support);
  std::vector<int> pos_a, pos_b;
  for (int s : a.support) pos_a.push_back(joint.position_of(s));
  for (int s : b.support) pos_b.push_back(joint.position_of(s));
  const int m = static_cast<int>(joint.size());
  return LocalOperator{joint, tensor_embed(a.matrix, SupportSet(pos_a), m) *
                                  tensor_embed(b.matrix, SupportSet(pos_b), m)};
}

CovarianceResult covariance_from_sequences(const AkSequence& sa, const AkSequence& sb, const AkSequence& sab,
                                           const LocalOperator& a, const LocalOperator& b,
                                           const InteractionGraph& graph, double epsilon) {
  check_epsilon(epsilon);
  const int kk = std::min({sa.k_reached, sb.k_reached, sab.k_reached});

  CovarianceResult out;
  auto& s = out.series;
  s.k_used = kk;
  double sum = 0.0;
  double power = 1.0;
  for (int k = 0; k <= kk; ++k) {
    double ck = sab.meta[static_cast<std::size_t>(k)].identity_coeff.real();
    for (int j = 0; j <= k; ++j) {
      ck -= sa.meta[static_cast<std::size_t>(j)].identity_coeff.real() *
            sb.meta[static_cast<std::size_t>(k - j)].identity_coeff.real();
    }
    s.orders.push_back(ck);
    if (out.first_nonzero_order < 0 && std::abs(ck) > 1e-10) out.first_nonzero_order = k;
    sum += power * ck;
    s.partial_sums.push_back(sum);
    power *= epsilon;
  }
  s.value = sum;

  const double norm_a = operator_norm(a.matrix);
  const double norm_b = operator_norm(b.matrix);
  const int ell_a = static_cast<int>(a.support.size());
  const int ell_b = static_cast<int>(b.support.size());
  const auto d = graph_distance(graph, a.support, b.support);
  out.distance = d ? *d : -1;
  out.bound = covariance_bound(epsilon, ell_a, ell_b, norm_a, norm_b, out.distance);

  // sum_{k >= m} (k + 2) x^k = x^m ((m + 2) + x / (1 - x)) / (1 - x)
  const double x = epsilon * std::exp(6.0);
  if (x >= 1.0) {
    s.tail_bound = std::numeric_limits<double>::infinity();
  } else {
    const double mm = kk + 1.0;
    s.tail_bound = std::pow(x, mm) * ((mm + 2.0) + x / (1.0 - x)) / (1.0 - x) *
                   std::exp(6.0 * (ell_a + ell_b)) * norm_a * norm_b;
  }
  return out;
}

CovarianceResult covariance_series(const LocalOperator& a, const LocalOperator& b,
                                   const TransitionEngine& engine, double epsilon, int k_max,
                                   const SequenceOptions& options) {
  check_epsilon(epsilon);
  const LocalOperator ab = disjoint_product(a, b);
  const AkSequence sa = a_k_sequence(a, engine, k_max, options);
  const AkSequence sb = a_k_sequence(b, engine, k_max, options);
  const AkSequence sab = a_k_sequence(ab, engine, k_max, options);
  return covariance_from_sequences(sa, sb, sab, a, b, engine.graph(), epsilon);
}

}  // namespace qsteady
