#include "wlab/pd_system_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace wlab {

SystemCoefficients SystemCoefficients::constant(int d, int d1, std::vector<Eigen::MatrixXd> A) {
    SystemCoefficients c;
    c.d = d;
    c.d1 = d1;
    c.pieces.push_back(std::move(A));
    for (const auto& M : c.pieces[0]) c.K = std::max(c.K, M.norm());
    c.validate();
    return c;
}

SystemCoefficients SystemCoefficients::heat(int d, int d1) {
    std::vector<Eigen::MatrixXd> A(d * d, Eigen::MatrixXd::Zero(d1, d1));
    for (int i = 0; i < d; ++i) A[i * d + i] = Eigen::MatrixXd::Identity(d1, d1);
    return constant(d, d1, std::move(A));
}

int SystemCoefficients::piece_index(double t) const {
    return static_cast<int>(std::upper_bound(breakpoints.begin(), breakpoints.end(), t) - breakpoints.begin());
}

const std::vector<Eigen::MatrixXd>& SystemCoefficients::at(double t) const { return pieces[piece_index(t)]; }

void SystemCoefficients::validate() const {
    if (d < 1 || d1 < 1) throw std::invalid_argument("SystemCoefficients: d and d1 must be positive");
    if (pieces.empty() || breakpoints.size() + 1 != pieces.size())
        throw std::invalid_argument("SystemCoefficients: need one more piece than breakpoints");
    if (!std::is_sorted(breakpoints.begin(), breakpoints.end()))
        throw std::invalid_argument("SystemCoefficients: breakpoints must increase");
    for (const auto& piece : pieces) {
        if (piece.size() != static_cast<std::size_t>(d * d)) throw std::invalid_argument("SystemCoefficients: need d*d matrices");
        for (const auto& M : piece) {
            if (M.rows() != d1 || M.cols() != d1) throw std::invalid_argument("SystemCoefficients: matrices must be d1 x d1");
            if (!M.allFinite()) throw std::invalid_argument("SystemCoefficients: non-finite entry");
            if (M.norm() > K * (1 + 1e-12)) throw std::invalid_argument("SystemCoefficients: |A^{ij}| exceeds K");
        }
    }
}

namespace {
// symmetrised block matrix of the form, unknown ordered as (xi^1; ...; xi^d)
Eigen::MatrixXd form_matrix(const std::vector<Eigen::MatrixXd>& A, int d, int d1) {
    Eigen::MatrixXd B(d * d1, d * d1);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) B.block(i * d1, j * d1, d1, d1) = A[i * d + j];
    return 0.5 * (B + B.transpose());
}
}  // namespace

EllipticityReport validate_ellipticity(const SystemCoefficients& A, int samples) {
    A.validate();
    EllipticityReport R;
    R.delta = std::numeric_limits<double>::infinity();
    R.sample_min = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> N(0.0, 1.0);
    for (const auto& piece : A.pieces) {
        for (const auto& M : piece) R.K = std::max(R.K, M.norm());
        const Eigen::MatrixXd S = form_matrix(piece, A.d, A.d1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
        R.delta = std::min(R.delta, es.eigenvalues()(0));
        const int n = A.d * A.d1;
        Eigen::VectorXd best(n);
        double best_val = std::numeric_limits<double>::infinity();
        for (int s = 0; s < std::max(samples, 1); ++s) {
            Eigen::VectorXd v(n);
            for (int k = 0; k < n; ++k) v(k) = N(rng);
            v.normalize();
            const double q = v.dot(S * v);
            if (q < best_val) {
                best_val = q;
                best = v;
            }
        }
        // projected gradient descent on the sphere
        const double step = 0.5 / (S.norm() + 1e-300);
        for (int it = 0; it < 500; ++it) {
            const Eigen::VectorXd g = S * best - best.dot(S * best) * best;
            Eigen::VectorXd v = best - step * g;
            v.normalize();
            const double q = v.dot(S * v);
            if (!(q < best_val)) break;
            best_val = q;
            best = v;
        }
        R.sample_min = std::min(R.sample_min, best_val);
    }
    if (!(R.delta > 0.0)) {
        std::ostringstream os;
        os << "validate_ellipticity: form not positive (min " << R.delta << ")";
        throw std::domain_error(os.str());
    }
    return R;
}

bool theta_admissible(int d, double p, double theta) {
    if (p <= 2.0) return theta > d + 1 - p && theta < d + p - 1;
    return theta > d - 1 && theta < d + 1;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Central-difference operator restricted to interior nodes of a grid.
struct Discretization {
    GridSpec spec;
    int d = 1, d1 = 1;
    std::size_t ns = 0;
    std::vector<std::size_t> stride;
    std::vector<long> interior_of;  // -1 for face nodes
    std::vector<std::size_t> interior_nodes;

    explicit Discretization(const GridSpec& g) : spec(g), d(g.d()), d1(g.d1), ns(g.num_space_nodes()) {
        stride.assign(d, 1);
        for (int a = d - 2; a >= 0; --a) stride[a] = stride[a + 1] * g.n_nodes[a + 1];
        interior_of.assign(ns, -1);
        for (std::size_t n = 0; n < ns; ++n) {
            bool inner = true;
            for (int a = 0; a < d; ++a) {
                const int i = static_cast<int>((n / stride[a]) % g.n_nodes[a]);
                if (i == 0 || i == g.n_nodes[a] - 1) inner = false;
            }
            if (inner) {
                interior_of[n] = static_cast<long>(interior_nodes.size());
                interior_nodes.push_back(n);
            }
        }
        if (interior_nodes.empty()) throw std::invalid_argument("solver: grid has no interior nodes");
    }

    std::size_t unknowns() const { return interior_nodes.size() * d1; }

    struct Entry {
        std::size_t row;       // interior unknown
        std::size_t col_node;  // any node
        int comp;
        double value;
    };

    std::vector<Entry> entries(const std::vector<Eigen::MatrixXd>& A) const {
        std::vector<Entry> out;
        const auto& h = spec.step;
        for (std::size_t q = 0; q < interior_nodes.size(); ++q) {
            const std::size_t n = interior_nodes[q];
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    const Eigen::MatrixXd& M = A[i * d + j];
                    if (M.isZero(0.0)) continue;
                    std::vector<std::pair<std::size_t, double>> st;
                    if (i == j) {
                        const double w = 1.0 / (h[i] * h[i]);
                        st = {{n - stride[i], w}, {n, -2 * w}, {n + stride[i], w}};
                    } else {
                        const double w = 1.0 / (4 * h[i] * h[j]);
                        st = {{n + stride[i] + stride[j], w},
                              {n + stride[i] - stride[j], -w},
                              {n - stride[i] + stride[j], -w},
                              {n - stride[i] - stride[j], w}};
                    }
                    for (const auto& [m, w] : st)
                        for (int k = 0; k < d1; ++k)
                            for (int r = 0; r < d1; ++r)
                                if (M(k, r) != 0.0) out.push_back({q * d1 + k, m, r, w * M(k, r)});
                }
        }
        return out;
    }
};

struct PieceOperator {
    SpMat L;                                         // interior block
    std::vector<Discretization::Entry> boundary;     // entries hitting face nodes
};

PieceOperator build_piece(const Discretization& D, const std::vector<Eigen::MatrixXd>& A) {
    PieceOperator P;
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& e : D.entries(A)) {
        const long q = D.interior_of[e.col_node];
        if (q >= 0) trip.emplace_back(static_cast<int>(e.row), static_cast<int>(q * D.d1 + e.comp), e.value);
        else P.boundary.push_back(e);
    }
    const int n = static_cast<int>(D.unknowns());
    P.L.resize(n, n);
    P.L.setFromTriplets(trip.begin(), trip.end());
    P.L.makeCompressed();
    return P;
}

// L_IB g for a full slice of node values
Eigen::VectorXd boundary_term(const Discretization& D, const PieceOperator& P, const std::vector<double>& full) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(D.unknowns());
    for (const auto& e : P.boundary) b(e.row) += e.value * full[e.col_node * D.d1 + e.comp];
    return b;
}

Eigen::VectorXd gather(const Discretization& D, const double* full) {
    Eigen::VectorXd v(D.unknowns());
    for (std::size_t q = 0; q < D.interior_nodes.size(); ++q)
        for (int k = 0; k < D.d1; ++k) v(q * D.d1 + k) = full[D.interior_nodes[q] * D.d1 + k];
    return v;
}

void scatter(const Discretization& D, const Eigen::VectorXd& v, double* full) {
    for (std::size_t q = 0; q < D.interior_nodes.size(); ++q)
        for (int k = 0; k < D.d1; ++k) full[D.interior_nodes[q] * D.d1 + k] = v(q * D.d1 + k);
}

void factorize(Eigen::SparseLU<SpMat>& lu, const SpMat& M, const char* what) {
    lu.analyzePattern(M);
    lu.factorize(M);
    if (lu.info() != Eigen::Success) {
        std::ostringstream os;
        os << what << ": sparse LU failed (" << lu.lastErrorMessage() << ", n = " << M.rows() << ")";
        throw std::runtime_error(os.str());
    }
}

using SliceFn = std::function<void(int step, double t, std::vector<double>& full)>;

struct MarchResult {
    NodeField u;
    double residual = 0.0;
};

// Time marching on the fine grid `fine` (nt = number of fine nodes). Slices j with j % store_every == 0 are kept.
// `boundary` fills face values of a full slice; `forcing` fills a full slice of f (may be empty).
MarchResult march(const SystemCoefficients& A, const GridSpec& fine, const std::vector<double>& u0, const SliceFn& boundary,
                  const SliceFn& forcing, Scheme scheme, int store_every) {
    const Discretization D(fine);
    const std::size_t full_size = D.ns * D.d1;
    GridSpec stored = fine;
    stored.ht = fine.ht * store_every;
    stored.nt = (fine.nt - 1) / store_every + 1;
    MarchResult R{NodeField(stored), 0.0};
    auto vals = R.u.values();

    std::vector<double> cur = u0, next(full_size, 0.0), f_cur(full_size, 0.0), f_next(full_size, 0.0);
    if (boundary) boundary(0, fine.t0, cur);
    if (forcing) forcing(0, fine.t0, f_cur);
    std::copy(cur.begin(), cur.end(), vals.begin());

    const double ht = fine.ht;
    const int n = static_cast<int>(D.unknowns());
    SpMat I(n, n);
    I.setIdentity();
    int cached_piece = -1;
    PieceOperator P;
    Eigen::SparseLU<SpMat> lu;
    for (int s = 0; s + 1 < fine.nt; ++s) {
        const double t0 = fine.t0 + s * ht, t1 = fine.t0 + (s + 1) * ht;
        const int piece = A.piece_index(0.5 * (t0 + t1));
        if (piece != cached_piece) {
            P = build_piece(D, A.pieces[piece]);
            const double c = scheme == Scheme::ImplicitEuler ? ht : 0.5 * ht;
            SpMat M = I - c * P.L;
            factorize(lu, M, "solve_parabolic");
            cached_piece = piece;
        }
        std::fill(next.begin(), next.end(), 0.0);
        if (boundary) boundary(s + 1, t1, next);
        std::fill(f_next.begin(), f_next.end(), 0.0);
        if (forcing) forcing(s + 1, t1, f_next);
        const Eigen::VectorXd U = gather(D, cur.data());
        const Eigen::VectorXd b1 = boundary_term(D, P, next) + gather(D, f_next.data());
        Eigen::VectorXd rhs, b0;
        if (scheme == Scheme::ImplicitEuler) {
            rhs = U + ht * b1;
        } else {
            b0 = boundary_term(D, P, cur) + gather(D, f_cur.data());
            rhs = U + 0.5 * ht * (P.L * U + b0 + b1);
        }
        const Eigen::VectorXd V = lu.solve(rhs);
        if (lu.info() != Eigen::Success) throw std::runtime_error("solve_parabolic: back substitution failed");
        // discrete residual of the scheme
        Eigen::VectorXd res = (V - U) / ht;
        if (scheme == Scheme::ImplicitEuler) res -= P.L * V + b1;
        else res -= 0.5 * (P.L * V + b1 + P.L * U + b0);
        R.residual = std::max(R.residual, res.cwiseAbs().maxCoeff());
        scatter(D, V, next.data());
        std::swap(cur, next);
        std::swap(f_cur, f_next);
        if ((s + 1) % store_every == 0)
            std::copy(cur.begin(), cur.end(), vals.begin() + static_cast<std::ptrdiff_t>(((s + 1) / store_every) * full_size));
    }
    return R;
}

void copy_faces(const Discretization& D, const NodeField& g, int j, std::vector<double>& full) {
    for (std::size_t n = 0; n < D.ns; ++n)
        if (D.interior_of[n] < 0)
            for (int k = 0; k < D.d1; ++k) full[n * D.d1 + k] = g.at(j, n, k);
}

void check_shapes(const SystemCoefficients& A, const NodeField& f) {
    if (A.d != f.d() || A.d1 != f.d1()) throw std::invalid_argument("solver: coefficient and field dimensions differ");
}

}  // namespace

ParabolicSolution solve_parabolic(const SystemCoefficients& A, const NodeField& f, const SolverConfig& cfg,
                                  const ParabolicData& data) {
    check_shapes(A, f);
    ParabolicSolution S;
    S.ellipticity = validate_ellipticity(A);
    const GridSpec& g = f.spec();
    if (g.nt < 2) throw std::invalid_argument("solve_parabolic: need at least two time nodes");
    const Discretization D(g);
    const std::size_t full = D.ns * D.d1;
    std::vector<double> u0(full, 0.0);
    if (data.u0) {
        if (data.u0->num_space_nodes() != D.ns || data.u0->d1() != D.d1) throw std::invalid_argument("solve_parabolic: u0 grid");
        std::copy(data.u0->values().begin(), data.u0->values().begin() + static_cast<std::ptrdiff_t>(full), u0.begin());
    }
    if (data.boundary && !(data.boundary->spec() == g)) throw std::invalid_argument("solve_parabolic: boundary grid differs");
    SliceFn bfn;
    if (data.boundary)
        bfn = [&](int j, double, std::vector<double>& v) { copy_faces(D, *data.boundary, j, v); };
    SliceFn ffn = [&](int j, double, std::vector<double>& v) {
        const auto src = f.values().subspan(static_cast<std::size_t>(j) * full, full);
        std::copy(src.begin(), src.end(), v.begin());
    };
    MarchResult M = march(A, g, u0, bfn, ffn, cfg.scheme, 1);
    S.u = std::move(M.u);
    S.residual = M.residual;
    return S;
}

EllipticSolution solve_elliptic(const SystemCoefficients& A, const NodeField& f, const SolverConfig&,
                                const std::optional<NodeField>& boundary) {
    check_shapes(A, f);
    EllipticSolution S;
    S.ellipticity = validate_ellipticity(A);
    GridSpec g = f.spec();
    g.nt = 1;
    const Discretization D(g);
    const std::size_t full = D.ns * D.d1;
    const PieceOperator P = build_piece(D, A.at(g.t0));
    std::vector<double> gb(full, 0.0);
    if (boundary) copy_faces(D, *boundary, 0, gb);
    const Eigen::VectorXd rhs = gather(D, f.values().data()) - boundary_term(D, P, gb);
    Eigen::SparseLU<SpMat> lu;
    factorize(lu, P.L, "solve_elliptic");
    const Eigen::VectorXd U = lu.solve(rhs);
    S.residual = (P.L * U - rhs).cwiseAbs().maxCoeff();
    S.u = NodeField(g);
    auto vals = S.u.values();
    std::copy(gb.begin(), gb.end(), vals.begin());
    scatter(D, U, vals.data());
    return S;
}

NodeField apply_operator(const SystemCoefficients& A, const NodeField& u) {
    check_shapes(A, u);
    const int d = u.d(), d1 = u.d1();
    NodeField out(u.spec());
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            std::vector<int> beta(d, 0);
            beta[i] += 1;
            beta[j] += 1;
            const NodeField Dij = derivative(u, std::span<const int>(beta), 0);
            for (int s = 0; s < u.nt(); ++s) {
                const Eigen::MatrixXd& M = A.at(u.t(s))[i * d + j];
                for (std::size_t n = 0; n < u.num_space_nodes(); ++n)
                    for (int k = 0; k < d1; ++k) {
                        double acc = 0.0;
                        for (int r = 0; r < d1; ++r) acc += M(k, r) * Dij.at(s, n, r);
                        out.at(s, n, k) += acc;
                    }
            }
        }
    return out;
}

double caloric_residual(const SystemCoefficients& A, const NodeField& u) {
    const NodeField Lu = apply_operator(A, u);
    const NodeField ut = derivative(u, std::vector<int>(u.d(), 0), 1);
    const Discretization D(u.spec());
    double r = 0.0;
    for (int s = 0; s < u.nt(); ++s)
        for (std::size_t n : D.interior_nodes)
            for (int k = 0; k < u.d1(); ++k) r = std::max(r, std::fabs(ut.at(s, n, k) - Lu.at(s, n, k)));
    return r;
}

namespace {
double series_lp(const NodeField& u, int m, const NormSpec& spec) {
    NormSpec s = spec;
    s.gamma = 0;
    s.m_power = m;
    const auto g = weighted_lp_norm_series(u, s);
    return u.nt() > 1 ? time_lp(g, u.spec().ht, spec.p) : g[0];
}

AprioriTerms finish(AprioriTerms T) {
    const double num = T.inv_u + T.u_x + T.u_xx + T.u_t;
    if (T.f == 0.0) {
        if (num == 0.0) return T;
        throw std::domain_error("apriori_ratio: zero data norm with nonzero solution");
    }
    T.ratio = num / T.f;
    return T;
}

AprioriTerms spatial_terms(const NodeField& u, const NodeField& f, const NormSpec& spec) {
    AprioriTerms T;
    const auto tri = equiv_triple_series(u, spec);
    std::vector<double> a, b, c;
    for (const auto& e : tri) {
        a.push_back(e.a);
        b.push_back(e.b);
        c.push_back(e.c);
    }
    if (u.nt() > 1) {
        T.inv_u = time_lp(a, u.spec().ht, spec.p);
        T.u_x = time_lp(b, u.spec().ht, spec.p);
        T.u_xx = time_lp(c, u.spec().ht, spec.p);
    } else {
        T.inv_u = a[0];
        T.u_x = b[0];
        T.u_xx = c[0];
    }
    T.f = series_lp(f, 1, spec);
    return T;
}
}  // namespace

AprioriTerms apriori_ratio_parabolic(const NodeField& u, const NodeField& f, const NormSpec& spec) {
    spec.validate();
    if (!(u.spec() == f.spec())) throw std::invalid_argument("apriori_ratio_parabolic: grids differ");
    AprioriTerms T = spatial_terms(u, f, spec);
    T.u_t = series_lp(derivative(u, std::vector<int>(u.d(), 0), 1), 1, spec);
    return finish(T);
}

AprioriTerms apriori_ratio_elliptic(const NodeField& u, const NodeField& f, const NormSpec& spec) {
    spec.validate();
    return finish(spatial_terms(u.time_slice(0), f.time_slice(0), spec));
}

LocalSolveResult homogeneous_local_solve(const SystemCoefficients& A, const PointFunction& g, const LocalBox& box,
                                         const LocalSolveOptions& opt) {
    const int d = A.d, d1 = A.d1;
    if (static_cast<int>(box.x0prime.size()) != d - 1) throw std::invalid_argument("homogeneous_local_solve: x0' size");
    if (!(box.r > 0.0) || !(box.a > 0.0)) throw std::invalid_argument("homogeneous_local_solve: r, a must be positive");
    if (box.lambda * box.r / box.a < 2.0) throw std::domain_error("homogeneous_local_solve: need lambda r / a >= 2");
    if (opt.cells_per_r < 1 || opt.store_per_r2 < 1 || opt.steps_per_r2 % opt.store_per_r2 != 0)
        throw std::invalid_argument("homogeneous_local_solve: store_per_r2 must divide steps_per_r2");
    validate_ellipticity(A);
    const double R = box.lambda * box.r, h = box.r / opt.cells_per_r;
    GridSpec fine;
    fine.d1 = d1;
    const double lo1 = std::max(box.a - R, 0.0);
    const double n1 = (box.a + R - lo1) / h;
    if (std::fabs(n1 - std::round(n1)) > 1e-9 * n1) throw std::invalid_argument("homogeneous_local_solve: box not aligned with h");
    fine.origin.push_back(lo1);
    fine.step.push_back(h);
    fine.n_nodes.push_back(static_cast<int>(std::round(n1)) + 1);
    for (int k = 1; k < d; ++k) {
        fine.origin.push_back(box.x0prime[k - 1] - R);
        fine.step.push_back(h);
        fine.n_nodes.push_back(2 * static_cast<int>(std::round(R / h)) + 1);
    }
    const double ht = box.r * box.r / opt.steps_per_r2;
    const long steps = std::lround(box.lambda * box.lambda * opt.steps_per_r2);
    fine.t0 = box.t0 - R * R;
    fine.ht = ht;
    fine.nt = static_cast<int>(steps) + 1;
    fine.validate();

    const Discretization D(fine);
    std::vector<double> x(d);
    std::vector<int> idx(d);
    auto eval_slice = [&](double t, std::vector<double>& full, bool faces_only) {
        for (std::size_t n = 0; n < D.ns; ++n) {
            if (faces_only && D.interior_of[n] >= 0) continue;
            for (int a = 0; a < d; ++a) {
                idx[a] = static_cast<int>((n / D.stride[a]) % fine.n_nodes[a]);
                x[a] = fine.origin[a] + idx[a] * h;
            }
            g(t, x, std::span<double>(full.data() + n * d1, d1));
        }
    };
    std::vector<double> u0(D.ns * d1, 0.0);
    eval_slice(fine.t0, u0, false);

    LocalSolveResult out;
    // g_t - A g_xx at the bottom face nodes, by centred differences of g
    {
        const double e = 1e-3 * h;
        std::vector<double> gp(d1), gm(d1), tmp(d1);
        std::vector<double> xp(d);
        const auto& Am = A.at(fine.t0);
        for (std::size_t n = 0; n < D.ns; ++n) {
            if (D.interior_of[n] >= 0) continue;
            for (int a = 0; a < d; ++a) x[a] = fine.origin[a] + static_cast<int>((n / D.stride[a]) % fine.n_nodes[a]) * h;
            g(fine.t0 + e * e, x, gp);
            g(fine.t0 - e * e, x, gm);
            std::vector<double> res(d1);
            for (int k = 0; k < d1; ++k) res[k] = (gp[k] - gm[k]) / (2 * e * e);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    // second difference of g along e_i, e_j
                    std::vector<double> acc(d1, 0.0);
                    for (int si : {-1, 1})
                        for (int sj : {-1, 1}) {
                            xp = x;
                            xp[i] += si * e;
                            xp[j] += sj * e;
                            g(fine.t0, xp, tmp);
                            for (int k = 0; k < d1; ++k) acc[k] += si * sj * tmp[k] / (4 * e * e);
                        }
                    for (int k = 0; k < d1; ++k)
                        for (int r = 0; r < d1; ++r) res[k] -= Am[i * d + j](k, r) * acc[r];
                }
            for (int k = 0; k < d1; ++k) out.corner_incompatibility = std::max(out.corner_incompatibility, std::fabs(res[k]));
        }
        out.compatible = out.corner_incompatibility <= opt.corner_tolerance;
    }
    SliceFn bfn = [&](int, double t, std::vector<double>& full) { eval_slice(t, full, true); };
    MarchResult M = march(A, fine, u0, bfn, SliceFn(), opt.scheme, opt.steps_per_r2 / opt.store_per_r2);
    out.u = std::move(M.u);
    out.residual = M.residual;
    return out;
}

}  // namespace wlab
