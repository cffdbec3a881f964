#include "wlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wlab {

std::size_t GridSpec::num_space_nodes() const {
    std::size_t n = 1;
    for (int v : n_nodes) n *= static_cast<std::size_t>(v);
    return n;
}

void GridSpec::validate() const {
    const std::size_t d = origin.size();
    if (d < 1 || step.size() != d || n_nodes.size() != d) throw std::invalid_argument("GridSpec: inconsistent axis counts");
    if (d1 < 1) throw std::invalid_argument("GridSpec: d1 >= 1");
    if (origin[0] < 0.0) throw std::domain_error("GridSpec: grid must lie in x1 >= 0");
    for (std::size_t k = 0; k < d; ++k)
        if (!(step[k] > 0.0) || n_nodes[k] < 1) throw std::invalid_argument("GridSpec: steps and node counts must be positive");
    if (nt < 1 || !(ht > 0.0)) throw std::invalid_argument("GridSpec: bad time axis");
}

GridSpec make_grid(int d1, double L1, std::vector<double> transverse, std::vector<int> cells, double T, int time_steps) {
    GridSpec g;
    g.d1 = d1;
    const std::size_t d = transverse.size() + 1;
    if (cells.size() != d) throw std::invalid_argument("make_grid: need one cell count per axis");
    g.origin.push_back(0.0);
    g.step.push_back(L1 / cells[0]);
    g.n_nodes.push_back(cells[0] + 1);
    for (std::size_t k = 1; k < d; ++k) {
        g.origin.push_back(-transverse[k - 1]);
        g.step.push_back(2.0 * transverse[k - 1] / cells[k]);
        g.n_nodes.push_back(cells[k] + 1);
    }
    g.t0 = 0.0;
    g.nt = time_steps + 1;
    g.ht = time_steps > 0 ? T / time_steps : 1.0;
    g.validate();
    return g;
}

NodeField::NodeField(GridSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    nspace_ = spec_.num_space_nodes();
    const int d = spec_.d();
    stride_.assign(d, 1);
    for (int a = d - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * static_cast<std::size_t>(spec_.n_nodes[a + 1]);
    values_.assign(nspace_ * spec_.nt * spec_.d1, 0.0);
}

void NodeField::node_indices(std::size_t node, std::span<int> out) const {
    for (int a = 0; a < d(); ++a) out[a] = static_cast<int>((node / stride_[a]) % spec_.n_nodes[a]);
}

std::size_t NodeField::node_of(std::span<const int> idx) const {
    std::size_t n = 0;
    for (int a = 0; a < d(); ++a) n += static_cast<std::size_t>(idx[a]) * stride_[a];
    return n;
}

NodeField NodeField::time_slice(int j) const {
    if (j < 0 || j >= nt()) throw std::out_of_range("time_slice: index out of range");
    GridSpec s = spec_;
    s.t0 = t(j);
    s.nt = 1;
    NodeField out(s);
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(j * nspace_ * d1()), nspace_ * d1(), out.values_.begin());
    return out;
}

double NodeField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::fabs(v));
    return m;
}

NodeField sample(const PointFunction& fn, const GridSpec& spec) {
    NodeField u(spec);
    const int d = u.d();
    std::vector<int> idx(d);
    std::vector<double> x(d), out(spec.d1);
    for (int j = 0; j < u.nt(); ++j)
        for (std::size_t node = 0; node < u.num_space_nodes(); ++node) {
            u.node_indices(node, idx);
            for (int a = 0; a < d; ++a) x[a] = u.x(a, idx[a]);
            std::fill(out.begin(), out.end(), 0.0);
            fn(u.t(j), x, out);
            for (int k = 0; k < spec.d1; ++k) {
                if (!std::isfinite(out[k])) throw std::domain_error("sample: non-finite function value");
                u.at(j, node, k) = out[k];
            }
        }
    return u;
}

namespace {

// One application of a first or second difference along a line of n values spaced by `stride`.
void diff_line(const double* in, double* out, int n, std::size_t stride, double h, int order) {
    auto v = [&](int i) { return in[static_cast<std::size_t>(i) * stride]; };
    auto w = [&](int i) -> double& { return out[static_cast<std::size_t>(i) * stride]; };
    if (order == 1) {
        for (int i = 1; i + 1 < n; ++i) w(i) = (v(i + 1) - v(i - 1)) / (2 * h);
        w(0) = (-3 * v(0) + 4 * v(1) - v(2)) / (2 * h);
        w(n - 1) = (3 * v(n - 1) - 4 * v(n - 2) + v(n - 3)) / (2 * h);
    } else {
        const double h2 = h * h;
        for (int i = 1; i + 1 < n; ++i) w(i) = (v(i + 1) - 2 * v(i) + v(i - 1)) / h2;
        w(0) = (2 * v(0) - 5 * v(1) + 4 * v(2) - v(3)) / h2;
        w(n - 1) = (2 * v(n - 1) - 5 * v(n - 2) + 4 * v(n - 3) - v(n - 4)) / h2;
    }
}

// axis -1 is time
void apply_diff(const NodeField& u, std::vector<double>& data, int axis, int order) {
    const int d1 = u.d1();
    const std::size_t ns = u.num_space_nodes();
    const int n = axis < 0 ? u.nt() : u.spec().n_nodes[axis];
    const double h = axis < 0 ? u.spec().ht : u.spec().step[axis];
    if (n < (order == 1 ? 3 : 4)) throw std::invalid_argument("derivative: too few nodes for the stencil");
    const std::size_t stride = (axis < 0 ? ns : u.stride(axis)) * d1;
    std::vector<double> out(data.size());
    // enumerate line starts: all entries whose index along the axis is zero
    const std::size_t total = data.size();
    for (std::size_t e = 0; e < total; ++e) {
        const std::size_t pos = (e / stride) % static_cast<std::size_t>(n);
        if (pos != 0) continue;
        diff_line(data.data() + e, out.data() + e, n, stride, h, order);
    }
    data.swap(out);
}

}  // namespace

NodeField derivative(const NodeField& u, std::span<const int> beta, int time_order) {
    if (static_cast<int>(beta.size()) != u.d()) throw std::invalid_argument("derivative: multi-index length must be d");
    int total = 0;
    for (int b : beta) {
        if (b < 0) throw std::invalid_argument("derivative: negative multi-index");
        total += b;
    }
    if (total > 4) throw std::invalid_argument("derivative: |beta| too large (max 4)");
    if (time_order < 0 || time_order > 1) throw std::invalid_argument("derivative: time order 0 or 1");
    NodeField out = u;
    std::vector<double> data(u.values().begin(), u.values().end());
    for (int a = 0; a < u.d(); ++a) {
        int b = beta[a];
        while (b >= 2) {
            apply_diff(u, data, a, 2);
            b -= 2;
        }
        if (b == 1) apply_diff(u, data, a, 1);
    }
    if (time_order == 1) apply_diff(u, data, -1, 1);
    std::copy(data.begin(), data.end(), out.values().begin());
    return out;
}

NodeField derivative(const NodeField& u, std::initializer_list<int> beta, int time_order) {
    std::vector<int> b(beta);
    return derivative(u, std::span<const int>(b), time_order);
}

NodeField dilate(const NodeField& u, double c) {
    if (!(c > 0.0)) throw std::invalid_argument("dilate: c must be positive");
    GridSpec s = u.spec();
    for (int a = 0; a < s.d(); ++a) {
        s.origin[a] /= c;
        s.step[a] /= c;
    }
    s.t0 /= c * c;
    s.ht /= c * c;
    NodeField out(s);
    std::copy(u.values().begin(), u.values().end(), out.values().begin());
    return out;
}

namespace {
int commensurate(double big, double small, const char* what) {
    const double q = big / small;
    const double r = std::round(q);
    if (r < 1.0 || std::fabs(q - r) > 1e-9 * q) throw std::invalid_argument(std::string("to_cellfield: non-commensurate ") + what);
    return static_cast<int>(r);
}
}  // namespace

CellField to_cellfield(const NodeField& u, int n_max, const WeightParams& w) {
    const GridSpec& s = u.spec();
    const int d = s.d();
    const double hc = std::ldexp(1.0, -n_max), htc = std::ldexp(1.0, -2 * n_max);
    if (s.nt < 2) throw std::invalid_argument("to_cellfield: needs a time axis with at least two nodes");
    std::vector<int> m(d + 1), ncell(d + 1);
    CellWindow W;
    m[0] = commensurate(htc, s.ht, "time step");
    const double t_off = s.t0 / htc;
    if (std::fabs(t_off - std::round(t_off)) > 1e-9 * std::max(1.0, std::fabs(t_off)))
        throw std::invalid_argument("to_cellfield: time origin not on the cell grid");
    ncell[0] = (s.nt - 1) / m[0];
    W.t_lo = static_cast<std::int64_t>(std::round(t_off));
    W.t_hi = W.t_lo + ncell[0];
    for (int a = 0; a < d; ++a) {
        m[a + 1] = commensurate(hc, s.step[a], "space step");
        const double off = s.origin[a] / hc;
        if (std::fabs(off - std::round(off)) > 1e-9 * std::max(1.0, std::fabs(off)))
            throw std::invalid_argument("to_cellfield: origin not on the cell grid");
        ncell[a + 1] = (s.n_nodes[a] - 1) / m[a + 1];
        W.lo.push_back(static_cast<std::int64_t>(std::round(off)));
        W.hi.push_back(W.lo.back() + ncell[a + 1]);
    }
    for (int v : ncell)
        if (v < 1) throw std::invalid_argument("to_cellfield: grid shorter than one cell");
    CellField f(s.d1, w, n_max, W);
    std::vector<double> count(f.num_cells(), 0.0);
    std::vector<int> idx(d);
    std::vector<std::int64_t> ci(d);
    for (int j = 0; j < ncell[0] * m[0]; ++j)
        for (std::size_t node = 0; node < u.num_space_nodes(); ++node) {
            u.node_indices(node, idx);
            bool inside = true;
            for (int a = 0; a < d && inside; ++a) {
                if (idx[a] >= ncell[a + 1] * m[a + 1]) inside = false;
                ci[a] = W.lo[a] + idx[a] / m[a + 1];
            }
            if (!inside) continue;
            const std::size_t cell = f.cell_of(W.t_lo + j / m[0], ci);
            count[cell] += 1.0;
            for (int k = 0; k < s.d1; ++k) f.value(cell, k) += u.at(j, node, k);
        }
    for (std::size_t cell = 0; cell < f.num_cells(); ++cell)
        for (int k = 0; k < s.d1; ++k) f.value(cell, k) /= count[cell];
    return f;
}

double max_abs_on_margin(const NodeField& u, int margin) {
    double m = 0.0;
    std::vector<int> idx(u.d());
    for (std::size_t node = 0; node < u.num_space_nodes(); ++node) {
        u.node_indices(node, idx);
        bool on = false;
        for (int a = 0; a < u.d(); ++a)
            if (idx[a] < margin || idx[a] >= u.spec().n_nodes[a] - margin) on = true;
        if (!on) continue;
        for (int j = 0; j < u.nt(); ++j)
            for (int k = 0; k < u.d1(); ++k) m = std::max(m, std::fabs(u.at(j, node, k)));
    }
    return m;
}

NodeField operator+(const NodeField& a, const NodeField& b) {
    if (!(a.spec() == b.spec())) throw std::invalid_argument("NodeField sum: grids differ");
    NodeField out = a;
    for (std::size_t i = 0; i < out.values().size(); ++i) out.values()[i] += b.values()[i];
    return out;
}

NodeField operator*(double c, const NodeField& a) {
    NodeField out = a;
    for (double& v : out.values()) v *= c;
    return out;
}

}  // namespace wlab
