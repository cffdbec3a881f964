#include "wlab/kernel_rep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace wlab {

void BatchSpec::validate() const {
    if (n_paths < 1 || batches < 2) throw std::invalid_argument("BatchSpec: need n_paths >= 1 and batches >= 2");
    if (n_paths % batches != 0) throw std::invalid_argument("BatchSpec: n_paths must be a multiple of batches");
    if (!(step > 0.0) || !(T_max > 0.0)) throw std::invalid_argument("BatchSpec: step and T_max must be positive");
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path) {
    // splitmix64 finaliser over (seed, path)
    std::uint64_t z = seed * 0xD1B54A32D192ED03ULL + (path + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return std::mt19937_64(z);
}

namespace {
long steps_of(double t, double step) { return std::lround(t / step); }
}  // namespace

SigmaSamples simulate_sigma(std::span<const double> x, const BatchSpec& spec, std::vector<double> times) {
    if (spec.n_paths < 1 || !(spec.step > 0.0)) throw std::invalid_argument("simulate_sigma: bad batch spec");
    const int d = static_cast<int>(x.size());
    if (d < 1) throw std::invalid_argument("simulate_sigma: empty point");
    std::sort(times.begin(), times.end());
    SigmaSamples S;
    S.d = d;
    S.n_paths = spec.n_paths;
    S.times = times;
    const std::size_t nt = times.size();
    S.x1.resize(spec.n_paths * nt);
    S.xi.resize(spec.n_paths * nt);
    S.xprime.resize(spec.n_paths * nt * (d - 1));
    S.eta.resize(spec.n_paths * nt * (d - 1));
    std::vector<long> at(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        if (times[k] < 0.0) throw std::invalid_argument("simulate_sigma: negative time");
        at[k] = steps_of(times[k], spec.step);
    }
    const double sd = std::sqrt(2.0 * spec.step), drift = 2.0 * spec.step;
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> eta(d - 1);
    for (int p = 0; p < spec.n_paths; ++p) {
        auto rng = path_rng(spec.seed, p);
        double xi = 0.0;
        std::fill(eta.begin(), eta.end(), 0.0);
        std::size_t k = 0;
        for (long s = 0; k < nt; ++s) {
            while (k < nt && at[k] == s) {
                const std::size_t r = p * nt + k;
                S.xi[r] = xi;
                S.x1[r] = std::exp(xi) * x[0];
                for (int j = 0; j + 1 < d; ++j) {
                    S.eta[r * (d - 1) + j] = eta[j];
                    S.xprime[r * (d - 1) + j] = x[j + 1] + x[0] * eta[j];
                }
                ++k;
            }
            const double e = std::exp(xi);
            const double dxi = drift + sd * N(rng);
            // sqrt2 e^{xi} dw with dw ~ N(0, step)
            for (int j = 0; j + 1 < d; ++j) eta[j] += e * sd * N(rng);
            xi += dxi;
        }
    }
    return S;
}

bool CompactFunction::in_support(std::span<const double> x) const {
    for (int a = 0; a < d(); ++a)
        if (x[a] < lo[a] || x[a] > hi[a]) return false;
    return true;
}

namespace {

// Per-batch trapezoid sums of f_q(sigma_t x_n): out[(q * B + b) * npts + n].
std::vector<double> accumulate(const std::vector<CompactFunction>& fs, const std::vector<std::vector<double>>& pts,
                               const BatchSpec& spec) {
    spec.validate();
    const int nf = static_cast<int>(fs.size());
    if (nf == 0) return {};
    const int d = fs[0].d();
    for (const auto& f : fs) {
        if (f.d() != d || static_cast<int>(f.hi.size()) != d) throw std::invalid_argument("estimate_Ef: support box dims");
        if (!(f.lo[0] > 0.0)) throw std::invalid_argument("estimate_Ef: support must lie in x1 > 0");
    }
    const std::size_t npts = pts.size();
    const int B = spec.batches;
    std::vector<double> out(static_cast<std::size_t>(nf) * B * npts, 0.0);
    // points ordered by x1 so the reachable ones form a contiguous range at every step
    std::vector<std::size_t> order;
    for (std::size_t n = 0; n < npts; ++n) {
        if (static_cast<int>(pts[n].size()) != d) throw std::invalid_argument("estimate_Ef: point dimension");
        if (pts[n][0] > 0.0) order.push_back(n);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pts[a][0] < pts[b][0]; });
    std::vector<double> xs1(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) xs1[i] = pts[order[i]][0];
    double lo1 = fs[0].lo[0], hi1 = fs[0].hi[0];
    for (const auto& f : fs) {
        lo1 = std::min(lo1, f.lo[0]);
        hi1 = std::max(hi1, f.hi[0]);
    }
    const long S = steps_of(spec.T_max, spec.step);
    const double sd = std::sqrt(2.0 * spec.step), drift = 2.0 * spec.step;
    const int per_batch = spec.n_paths / B;
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> eta(d - 1), y(d);
    for (int p = 0; p < spec.n_paths; ++p) {
        const int b = p / per_batch;
        auto rng = path_rng(spec.seed, p);
        double xi = 0.0;
        std::fill(eta.begin(), eta.end(), 0.0);
        for (long s = 0; s <= S; ++s) {
            const double e = std::exp(xi);
            const double w = (s == 0 || s == S) ? 0.5 * spec.step : spec.step;
            const auto first = std::lower_bound(xs1.begin(), xs1.end(), lo1 / e);
            const auto last = std::upper_bound(xs1.begin(), xs1.end(), hi1 / e);
            for (auto it = first; it < last; ++it) {
                const std::size_t n = order[it - xs1.begin()];
                y[0] = pts[n][0] * e;
                for (int j = 0; j + 1 < d; ++j) y[j + 1] = pts[n][j + 1] + pts[n][0] * eta[j];
                for (int q = 0; q < nf; ++q)
                    if (fs[q].in_support(y)) out[(static_cast<std::size_t>(q) * B + b) * npts + n] += w * fs[q].fn(y);
            }
            if (s == S) break;
            const double dxi = drift + sd * N(rng);
            for (int j = 0; j + 1 < d; ++j) eta[j] += e * sd * N(rng);
            xi += dxi;
        }
    }
    for (auto& v : out) v /= per_batch;
    return out;
}

double tail_budget(const CompactFunction& f, const BatchSpec& spec) { return f.sup_abs * std::exp(-spec.T_max); }

}  // namespace

Estimate estimate_Ef(const CompactFunction& f, std::span<const double> x, const BatchSpec& spec) {
    const auto out = accumulate({f}, {std::vector<double>(x.begin(), x.end())}, spec);
    const int B = spec.batches;
    Estimate E;
    double m = 0.0, v = 0.0;
    for (int b = 0; b < B; ++b) m += out[b];
    m /= B;
    for (int b = 0; b < B; ++b) v += (out[b] - m) * (out[b] - m);
    E.value = m;
    E.std_error = std::sqrt(v / (B - 1) / B);
    E.tail_budget = tail_budget(f, spec);
    return E;
}

std::vector<EfGrid> estimate_Ef_grid(const std::vector<CompactFunction>& fs, const GridSpec& grid, const BatchSpec& spec,
                                     const std::vector<char>* mask) {
    GridSpec g = grid;
    g.nt = 1;
    g.d1 = 1;
    const NodeField shape(g);
    const std::size_t ns = shape.num_space_nodes();
    if (mask && mask->size() != ns) throw std::invalid_argument("estimate_Ef_grid: mask size");
    std::vector<std::vector<double>> pts;
    std::vector<std::size_t> node_of_pt;
    std::vector<int> idx(g.d());
    for (std::size_t n = 0; n < ns; ++n) {
        if (mask && !(*mask)[n]) continue;
        shape.node_indices(n, idx);
        std::vector<double> x(g.d());
        for (int a = 0; a < g.d(); ++a) x[a] = shape.x(a, idx[a]);
        pts.push_back(std::move(x));
        node_of_pt.push_back(n);
    }
    const auto out = accumulate(fs, pts, spec);
    const int B = spec.batches;
    std::vector<EfGrid> res;
    for (std::size_t q = 0; q < fs.size(); ++q) {
        EfGrid E{NodeField(g), NodeField(g), {}, tail_budget(fs[q], spec)};
        for (int b = 0; b < B; ++b) {
            NodeField bm(g);
            for (std::size_t i = 0; i < pts.size(); ++i) bm.at(0, node_of_pt[i], 0) = out[(q * B + b) * pts.size() + i];
            E.batch_means.push_back(std::move(bm));
        }
        for (std::size_t n = 0; n < ns; ++n) {
            double m = 0.0, v = 0.0;
            for (int b = 0; b < B; ++b) m += E.batch_means[b].at(0, n, 0);
            m /= B;
            for (int b = 0; b < B; ++b) v += (E.batch_means[b].at(0, n, 0) - m) * (E.batch_means[b].at(0, n, 0) - m);
            E.mean.at(0, n, 0) = m;
            E.std_error.at(0, n, 0) = std::sqrt(v / (B - 1) / B);
        }
        res.push_back(std::move(E));
    }
    return res;
}

EfGrid estimate_Ef_grid(const CompactFunction& f, const GridSpec& grid, const BatchSpec& spec, const std::vector<char>* mask) {
    return std::move(estimate_Ef_grid(std::vector<CompactFunction>{f}, grid, spec, mask)[0]);
}

double exact_Ef_1d(const std::function<double(double)>& f, double lo, double hi, double x) {
    if (!(x > 0.0)) return 0.0;
    using boost::math::quadrature::gauss_kronrod;
    auto g = [&](double z) { return (z >= 0.0 ? 0.5 : 0.5 * std::exp(2.0 * z)) * f(x * std::exp(z)); };
    const double zl = std::log(lo / x), zh = std::log(hi / x);
    double s = 0.0;
    // split at the kink of g
    if (zl < 0.0) s += gauss_kronrod<double, 61>::integrate(g, zl, std::min(zh, 0.0), 15, 1e-13);
    if (zh > 0.0) s += gauss_kronrod<double, 61>::integrate(g, std::max(zl, 0.0), zh, 15, 1e-13);
    return s;
}

std::vector<double> trapezoid_Ef_1d(const std::function<double(double)>& f, double lo, double hi, std::span<const double> xs,
                                    double step, double T_max, double dz) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
    for (double x : xs)
        if (x > 0.0) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
        }
    std::vector<double> out(xs.size(), 0.0);
    if (xmax == 0.0) return out;
    const double zlo = std::log(lo / xmax) - dz, zhi = std::log(hi / xmin) + dz;
    const long nz = static_cast<long>(std::ceil((zhi - zlo) / dz)) + 1;
    // G(z) = sum_{k >= 1} w_k N(z; 2 t_k, 2 t_k), the Dirac mass of k = 0 handled separately
    std::vector<double> G(nz, 0.0);
    const long S = std::lround(T_max / step);
    const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (long k = 1; k <= S; ++k) {
        const double t = k * step, w = k == S ? 0.5 * step : step;
        const double m = 2.0 * t, sd = std::sqrt(2.0 * t);
        const long i0 = std::max(0L, static_cast<long>(std::floor((m - 12 * sd - zlo) / dz)));
        const long i1 = std::min(nz - 1, static_cast<long>(std::ceil((m + 12 * sd - zlo) / dz)));
        for (long i = i0; i <= i1; ++i) {
            const double u = (zlo + i * dz - m) / sd;
            G[i] += w * c / sd * std::exp(-0.5 * u * u);
        }
    }
    for (std::size_t n = 0; n < xs.size(); ++n) {
        const double x = xs[n];
        if (!(x > 0.0)) continue;
        double s = (x >= lo && x <= hi) ? 0.5 * step * f(x) : 0.0;
        for (long i = 0; i < nz; ++i) {
            const double y = x * std::exp(zlo + i * dz);
            if (y < lo || y > hi) continue;
            s += ((i == 0 || i == nz - 1) ? 0.5 : 1.0) * dz * G[i] * f(y);
        }
        out[n] = s;
    }
    return out;
}

Eigen::SparseMatrix<double> assemble_L(const GridSpec& grid) {
    GridSpec g = grid;
    g.nt = 1;
    g.d1 = 1;
    const NodeField shape(g);
    const int d = g.d();
    const std::size_t ns = shape.num_space_nodes();
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<int> idx(d);
    for (std::size_t n = 0; n < ns; ++n) {
        shape.node_indices(n, idx);
        bool inner = true;
        for (int a = 0; a < d; ++a)
            if (idx[a] == 0 || idx[a] == g.n_nodes[a] - 1) inner = false;
        if (!inner) continue;
        const double x1 = shape.x(0, idx[0]);
        const int row = static_cast<int>(n);
        for (int a = 0; a < d; ++a) {
            const double w = x1 * x1 / (g.step[a] * g.step[a]);
            const int s = static_cast<int>(shape.stride(a));
            trip.emplace_back(row, row - s, w);
            trip.emplace_back(row, row, -2 * w);
            trip.emplace_back(row, row + s, w);
        }
        const int s0 = static_cast<int>(shape.stride(0));
        const double c = 3 * x1 / (2 * g.step[0]);
        trip.emplace_back(row, row + s0, c);
        trip.emplace_back(row, row - s0, -c);
    }
    Eigen::SparseMatrix<double> L(static_cast<int>(ns), static_cast<int>(ns));
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

namespace {
NodeField apply_matrix(const Eigen::SparseMatrix<double>& L, const NodeField& u, bool transpose) {
    NodeField out(u.spec());
    const std::size_t ns = u.num_space_nodes();
    Eigen::VectorXd v(ns);
    for (int j = 0; j < u.nt(); ++j)
        for (int k = 0; k < u.d1(); ++k) {
            for (std::size_t n = 0; n < ns; ++n) v(n) = u.at(j, n, k);
            const Eigen::VectorXd w = transpose ? Eigen::VectorXd(L.transpose() * v) : Eigen::VectorXd(L * v);
            for (std::size_t n = 0; n < ns; ++n) out.at(j, n, k) = w(n);
        }
    return out;
}

double node_volume(const GridSpec& g) {
    double v = 1.0;
    for (double h : g.step) v *= h;
    return v;
}

double inner(const NodeField& a, const NodeField& b) {
    double s = 0.0;
    for (std::size_t n = 0; n < a.num_space_nodes(); ++n)
        for (int k = 0; k < a.d1(); ++k) s += a.at(0, n, k) * b.at(0, n, k);
    return s * node_volume(a.spec());
}
}  // namespace

NodeField apply_L(const NodeField& u) { return apply_matrix(assemble_L(u.spec()), u, false); }

NodeField apply_L_adjoint(const NodeField& phi) { return apply_matrix(assemble_L(phi.spec()), phi, true); }

double weak_residual(const NodeField& Ef, const NodeField& f, const NodeField& phi) {
    if (!(Ef.spec().n_nodes == phi.spec().n_nodes) || !(f.spec().n_nodes == phi.spec().n_nodes))
        throw std::invalid_argument("weak_residual: grids differ");
    return inner(Ef, apply_L_adjoint(phi)) + inner(f, phi);
}

std::vector<WeakResidual> weak_residual(const EfGrid& Ef, const NodeField& f, const std::vector<NodeField>& tests) {
    std::vector<WeakResidual> out;
    const int B = static_cast<int>(Ef.batch_means.size());
    for (const auto& phi : tests) {
        const NodeField Lt = apply_L_adjoint(phi);
        const double fphi = inner(f, phi);
        WeakResidual R;
        R.value = inner(Ef.mean, Lt) + fphi;
        if (B >= 2) {
            std::vector<double> r(B);
            for (int b = 0; b < B; ++b) r[b] = inner(Ef.batch_means[b], Lt) + fphi;
            const double m = std::accumulate(r.begin(), r.end(), 0.0) / B;
            double v = 0.0;
            for (double x : r) v += (x - m) * (x - m);
            R.std_error = std::sqrt(v / (B - 1) / B);
        }
        out.push_back(R);
    }
    return out;
}

namespace {
std::vector<NodeField> components_of(const NodeField& Ef) {
    const int d = Ef.d();
    std::vector<NodeField> comps;
    const GridSpec& g = Ef.spec();
    for (int i = 0; i < d; ++i) {
        std::vector<int> beta(d, 0);
        beta[i] = 1;
        NodeField c = derivative(Ef, std::span<const int>(beta), 0);
        std::vector<int> idx(d);
        for (int j = 0; j < Ef.nt(); ++j)
            for (std::size_t n = 0; n < Ef.num_space_nodes(); ++n) {
                Ef.node_indices(n, idx);
                const double x1 = g.origin[0] + idx[0] * g.step[0];
                for (int k = 0; k < Ef.d1(); ++k) {
                    double v = x1 * c.at(j, n, k);
                    if (i == 0) v += 2 * Ef.at(j, n, k);
                    c.at(j, n, k) = -v;
                }
            }
        comps.push_back(std::move(c));
    }
    return comps;
}

NodeField divergence_of(const std::vector<NodeField>& comps) {
    const NodeField& ref = comps[0];
    const int d = ref.d();
    NodeField out(ref.spec());
    std::vector<int> idx(d);
    for (int i = 0; i < d; ++i) {
        std::vector<int> beta(d, 0);
        beta[i] = 1;
        const NodeField D = derivative(comps[i], std::span<const int>(beta), 0);
        for (int j = 0; j < ref.nt(); ++j)
            for (std::size_t n = 0; n < ref.num_space_nodes(); ++n) {
                ref.node_indices(n, idx);
                const double x1 = ref.x(0, idx[0]);
                for (int k = 0; k < ref.d1(); ++k) out.at(j, n, k) += x1 * D.at(j, n, k);
            }
    }
    return out;
}

// discrete Lp norm over nodes at least `inset` nodes from every face, first time slice
double inset_norm(const NodeField& u, double p, int inset) {
    const int d = u.d();
    std::vector<int> idx(d);
    double s = 0.0;
    for (std::size_t n = 0; n < u.num_space_nodes(); ++n) {
        u.node_indices(n, idx);
        bool ok = true;
        for (int a = 0; a < d; ++a)
            if (idx[a] < inset || idx[a] > u.spec().n_nodes[a] - 1 - inset) ok = false;
        if (!ok) continue;
        for (int k = 0; k < u.d1(); ++k) s += std::pow(std::fabs(u.at(0, n, k)), p);
    }
    return std::pow(s * node_volume(u.spec()), 1.0 / p);
}
}  // namespace

Divergence divergence_decomposition(const NodeField& Ef, const NodeField& f, double p, int inset) {
    if (!(Ef.spec().n_nodes == f.spec().n_nodes) || Ef.d1() != f.d1())
        throw std::invalid_argument("divergence_decomposition: grids differ");
    Divergence D;
    D.components = components_of(Ef.time_slice(0));
    D.reconstruction = divergence_of(D.components);
    NodeField diff = D.reconstruction;
    for (std::size_t n = 0; n < diff.num_space_nodes(); ++n)
        for (int k = 0; k < diff.d1(); ++k) diff.at(0, n, k) -= f.at(0, n, k);
    D.reconstruction_error = inset_norm(diff, p, inset);
    const double nf = inset_norm(f, p, inset);
    double sum = 0.0;
    for (const auto& c : D.components) sum += inset_norm(c, p, inset);
    D.ratio = nf > 0.0 ? sum / nf : 0.0;
    return D;
}

Divergence divergence_decomposition(const EfGrid& Ef, const NodeField& f, double p, int inset) {
    Divergence D = divergence_decomposition(Ef.mean, f, p, inset);
    const int B = static_cast<int>(Ef.batch_means.size());
    if (B < 2) return D;
    std::vector<NodeField> rec;
    for (const auto& bm : Ef.batch_means) rec.push_back(divergence_of(components_of(bm)));
    NodeField se(D.reconstruction.spec());
    for (std::size_t e = 0; e < se.values().size(); ++e) {
        double m = 0.0, v = 0.0;
        for (int b = 0; b < B; ++b) m += rec[b].values()[e];
        m /= B;
        for (int b = 0; b < B; ++b) v += (rec[b].values()[e] - m) * (rec[b].values()[e] - m);
        se.values()[e] = std::sqrt(v / (B - 1) / B);
    }
    D.reconstruction_std_error = inset_norm(se, p, inset);
    return D;
}

}  // namespace wlab
