#include "wlab/cube_operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wlab {

namespace {

// Calls fn(cell, idx) for window cells with window-relative indices in [lo, hi) per axis (time first).
template <class Fn>
void for_each_cell_in(const CellField& f, const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi,
                      Fn&& fn) {
    const auto& shape = f.shape();
    const int axes = static_cast<int>(shape.size());
    std::vector<std::int64_t> a(axes), b(axes);
    for (int k = 0; k < axes; ++k) {
        a[k] = std::max<std::int64_t>(lo[k], 0);
        b[k] = std::min<std::int64_t>(hi[k], shape[k]);
        if (a[k] >= b[k]) return;
    }
    std::vector<std::size_t> stride(axes, 1);
    for (int k = axes - 2; k >= 0; --k) stride[k] = stride[k + 1] * static_cast<std::size_t>(shape[k + 1]);
    std::vector<std::int64_t> idx = a;
    while (true) {
        std::size_t base = 0;
        for (int k = 0; k < axes - 1; ++k) base += static_cast<std::size_t>(idx[k]) * stride[k];
        for (std::int64_t j = a[axes - 1]; j < b[axes - 1]; ++j) {
            idx[axes - 1] = j;
            fn(base + static_cast<std::size_t>(j), idx);
        }
        int k = axes - 2;
        for (; k >= 0; --k) {
            if (++idx[k] < b[k]) break;
            idx[k] = a[k];
        }
        if (k < 0) return;
    }
}

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

void check_box(const CellField& f, const SpaceTimeBox& Q) {
    if (Q.d() != f.d() || Q.hi.size() != Q.lo.size()) throw std::invalid_argument("box dimension mismatch");
}

// Per-cell mass of Q cap cell for every window cell meeting Q.
template <class Fn>
void for_each_overlap(const CellField& f, const SpaceTimeBox& Q, Fn&& fn) {
    check_box(f, Q);
    const int d = f.d();
    const double h = std::ldexp(1.0, -f.n_max()), ht = std::ldexp(1.0, -2 * f.n_max());
    const CellWindow& W = f.window();
    std::vector<std::int64_t> lo(d + 1), hi(d + 1);
    auto range = [](double a, double b, double step, std::int64_t base, std::int64_t& l, std::int64_t& u) {
        l = static_cast<std::int64_t>(std::floor(a / step)) - base;
        u = static_cast<std::int64_t>(std::ceil(b / step)) - base;
    };
    range(Q.t_lo, Q.t_hi, ht, W.t_lo, lo[0], hi[0]);
    for (int k = 0; k < d; ++k) range(k == 0 ? std::max(0.0, Q.lo[0]) : Q.lo[k], Q.hi[k], h, W.lo[k], lo[k + 1], hi[k + 1]);
    const WeightParams& w = f.weight();
    for_each_cell_in(f, lo, hi, [&](std::size_t cell, const std::vector<std::int64_t>& idx) {
        const double t0 = static_cast<double>(W.t_lo + idx[0]) * ht;
        double m = overlap(Q.t_lo, Q.t_hi, t0, t0 + ht);
        for (int k = 1; k < d && m > 0.0; ++k) {
            const double x0 = static_cast<double>(W.lo[k] + idx[k + 1]) * h;
            m *= overlap(Q.lo[k], Q.hi[k], x0, x0 + h);
        }
        const double x0 = static_cast<double>(W.lo[0] + idx[1]) * h;
        const double a = std::max({Q.lo[0], x0, 0.0}), b = std::min(Q.hi[0], x0 + h);
        if (m > 0.0 && b > a) fn(cell, m * interval_weight(HalfLineInterval(a, b), w));
    });
}

}  // namespace

SpaceTimeBox ParabolicBox::extent() const {
    if (!(r > 0.0)) throw std::invalid_argument("ParabolicBox: radius must be positive");
    SpaceTimeBox B;
    B.t_lo = t;
    B.t_hi = t + r * r;
    B.lo.push_back(x1 - r);
    B.hi.push_back(x1 + r);
    for (double v : xprime) {
        B.lo.push_back(v - r);
        B.hi.push_back(v + r);
    }
    return B;
}

double box_mass(const SpaceTimeBox& Q, const WeightParams& w) {
    if (Q.lo.empty() || Q.hi.size() != Q.lo.size()) throw std::invalid_argument("box_mass: bad box");
    double m = std::max(0.0, Q.t_hi - Q.t_lo);
    for (int k = 1; k < Q.d(); ++k) m *= std::max(0.0, Q.hi[k] - Q.lo[k]);
    const double a = std::max(0.0, Q.lo[0]);
    if (Q.hi[0] <= a) return 0.0;
    return m * interval_weight(HalfLineInterval(a, Q.hi[0]), w);
}

double box_mass(const ParabolicBox& Q, const WeightParams& w) { return box_mass(Q.extent(), w); }

std::vector<double> box_average(const CellField& f, const SpaceTimeBox& Q) {
    const double M = box_mass(Q, f.weight());
    if (!(M > 0.0)) throw std::domain_error("box_average: box has zero mass");
    std::vector<double> s(f.d1(), 0.0);
    for_each_overlap(f, Q, [&](std::size_t cell, double m) {
        for (int k = 0; k < f.d1(); ++k) s[k] += m * f.value(cell, k);
    });
    for (double& v : s) v /= M;
    return s;
}

std::vector<double> box_average(const CellField& f, const ParabolicBox& Q) { return box_average(f, Q.extent()); }

std::vector<double> box_oscillation(const CellField& f, const SpaceTimeBox& Q) {
    const auto avg = box_average(f, Q);
    const double M = box_mass(Q, f.weight());
    std::vector<double> o(f.d1(), 0.0);
    double inside = 0.0;
    for_each_overlap(f, Q, [&](std::size_t cell, double m) {
        inside += m;
        for (int k = 0; k < f.d1(); ++k) o[k] += m * std::fabs(f.value(cell, k) - avg[k]);
    });
    for (int k = 0; k < f.d1(); ++k) o[k] = (o[k] + std::fabs(avg[k]) * std::max(0.0, M - inside)) / M;
    return o;
}

std::vector<double> dyadic_ladder(int m_fine, int m_coarse) {
    if (m_coarse > m_fine) throw std::invalid_argument("dyadic_ladder: empty ladder");
    std::vector<double> r;
    for (int m = m_fine; m >= m_coarse; --m) r.push_back(std::ldexp(1.0, -m));
    return r;
}

FamilyValues family_operators(const CellField& f, const std::vector<double>& radii) {
    if (radii.empty()) throw std::invalid_argument("family operators: empty radius family");
    const int d = f.d(), d1 = f.d1(), nmax = f.n_max();
    const CellWindow& W = f.window();
    const auto& shape = f.shape();
    std::vector<double> vmax(f.num_cells() * d1, -std::numeric_limits<double>::infinity());
    std::vector<double> vsharp(f.num_cells() * d1, 0.0);
    const WeightParams& w = f.weight();
    const double h = std::ldexp(1.0, -nmax), ht = std::ldexp(1.0, -2 * nmax);

    for (double r : radii) {
        int e = 0;
        const double mant = std::frexp(r, &e);
        if (mant != 0.5) throw std::invalid_argument("family radii must be powers of two");
        const int m = 1 - e;  // r = 2^{-m}
        if (m > nmax + 1) throw std::invalid_argument("family radius below half a cell");
        if (m == nmax + 1) {
            // boxes inside a single cell: average is the cell value, oscillation zero
            for (std::size_t i = 0; i < vmax.size(); ++i) vmax[i] = std::max(vmax[i], f.values()[i]);
            continue;
        }
        const int s = nmax - m;
        const std::int64_t E = std::int64_t{2} << s;        // spatial extent in cells
        const std::int64_t E0 = std::int64_t{1} << (2 * s);  // time extent in cells
        const std::int64_t S = std::max<std::int64_t>(E / 4, 1);
        const std::int64_t T = std::max<std::int64_t>(E0 / 4, 1);
        auto first = [](std::int64_t lo, std::int64_t ext, std::int64_t step) {
            const std::int64_t v = lo - ext + 1;
            return (v >= 0 ? v / step : -((-v + step - 1) / step)) * step;
        };
        std::vector<std::int64_t> a_lo(d + 1), a_hi(d + 1), step(d + 1), ext(d + 1);
        step[0] = T;
        ext[0] = E0;
        a_lo[0] = first(W.t_lo, E0, T);
        a_hi[0] = W.t_hi;
        for (int k = 0; k < d; ++k) {
            step[k + 1] = S;
            ext[k + 1] = E;
            a_lo[k + 1] = first(W.lo[k], E, S);
            a_hi[k + 1] = W.hi[k];
        }
        a_lo[1] = std::max<std::int64_t>(a_lo[1], 0);  // boxes inside Omega
        const double transverse = std::pow(static_cast<double>(E) * h, d - 1);

        std::vector<std::int64_t> a = a_lo;
        std::vector<double> sum(d1), osc(d1), avg(d1);
        std::vector<std::int64_t> lo(d + 1), hi(d + 1);
        while (true) {
            for (int k = 0; k <= d; ++k) {
                const std::int64_t base = k == 0 ? W.t_lo : W.lo[k - 1];
                lo[k] = a[k] - base;
                hi[k] = a[k] + ext[k] - base;
            }
            const double x1a = static_cast<double>(a[1]) * h;
            const double M = static_cast<double>(E0) * ht * transverse *
                             interval_weight(HalfLineInterval(x1a, x1a + static_cast<double>(E) * h), w);
            std::fill(sum.begin(), sum.end(), 0.0);
            double inside = 0.0;
            for_each_cell_in(f, lo, hi, [&](std::size_t cell, const std::vector<std::int64_t>&) {
                const double cm = f.cell_mass(cell);
                inside += cm;
                for (int k = 0; k < d1; ++k) sum[k] += cm * f.value(cell, k);
            });
            if (inside > 0.0) {
                for (int k = 0; k < d1; ++k) avg[k] = sum[k] / M;
                std::fill(osc.begin(), osc.end(), 0.0);
                for_each_cell_in(f, lo, hi, [&](std::size_t cell, const std::vector<std::int64_t>&) {
                    const double cm = f.cell_mass(cell);
                    for (int k = 0; k < d1; ++k) osc[k] += cm * std::fabs(f.value(cell, k) - avg[k]);
                });
                for (int k = 0; k < d1; ++k) osc[k] = (osc[k] + std::fabs(avg[k]) * std::max(0.0, M - inside)) / M;
                for_each_cell_in(f, lo, hi, [&](std::size_t cell, const std::vector<std::int64_t>&) {
                    for (int k = 0; k < d1; ++k) {
                        vmax[cell * d1 + k] = std::max(vmax[cell * d1 + k], avg[k]);
                        vsharp[cell * d1 + k] = std::max(vsharp[cell * d1 + k], osc[k]);
                    }
                });
            }
            int k = d;
            for (; k >= 0; --k) {
                a[k] += step[k];
                if (a[k] < a_hi[k]) break;
                a[k] = a_lo[k];
            }
            if (k < 0) break;
        }
        (void)shape;
    }
    FamilyValues out{CellField(d1, w, nmax, W), CellField(d1, w, nmax, W)};
    std::copy(vmax.begin(), vmax.end(), out.maximal.values().begin());
    std::copy(vsharp.begin(), vsharp.end(), out.sharp.values().begin());
    return out;
}

CellField maximal_family(const CellField& f, const std::vector<double>& radii) {
    return family_operators(f, radii).maximal;
}

CellField sharp_family(const CellField& f, const std::vector<double>& radii) {
    return family_operators(f, radii).sharp;
}

ParabolicBox comparison_box(const ParabolicCube& c) {
    if (c.i.empty() || c.i[0] < 0) throw std::domain_error("comparison_box: cube outside the half space");
    const int d = c.d();
    const double h = std::ldexp(1.0, -c.level);
    ParabolicBox Q;
    Q.t = std::ldexp(static_cast<double>(c.i0), -2 * c.level);
    Q.x1 = static_cast<double>(c.i[0] + d) * h;
    for (int k = 1; k < d; ++k) Q.xprime.push_back(static_cast<double>(c.i[k]) * h);
    Q.r = d * h;
    if (!closure_contains(Q, c)) throw std::logic_error("comparison box does not contain its cube");
    return Q;
}

bool closure_contains(const ParabolicBox& Q, const ParabolicCube& c) {
    const SpaceTimeBox B = Q.extent();
    const double h = std::ldexp(1.0, -c.level), ht = std::ldexp(1.0, -2 * c.level);
    const double t0 = static_cast<double>(c.i0) * ht;
    if (t0 < B.t_lo || t0 + ht > B.t_hi) return false;
    for (int k = 0; k < c.d(); ++k) {
        const double x0 = static_cast<double>(c.i[k]) * h;
        if (x0 < B.lo[k] || x0 + h > B.hi[k]) return false;
    }
    return true;
}

ClippedBox expand_clip(const ParabolicBox& Q, const WeightParams& w) {
    const SpaceTimeBox B = Q.extent();
    ClippedBox C;
    const double tc = 0.5 * (B.t_lo + B.t_hi), half = 1.5 * Q.r * Q.r;
    C.box.t_lo = tc - half;
    C.box.t_hi = tc + half;
    for (int k = 0; k < Q.d(); ++k) {
        const double c = k == 0 ? Q.x1 : Q.xprime[k - 1];
        C.box.lo.push_back(c - 3.0 * Q.r);
        C.box.hi.push_back(c + 3.0 * Q.r);
    }
    C.clipped = C.box.lo[0] < 0.0;
    C.box.lo[0] = std::max(0.0, C.box.lo[0]);
    C.mass = box_mass(C.box, w);
    C.ratio = C.mass / box_mass(B, w);
    return C;
}

double expansion_bound(double alpha, int d) { return std::pow(3.0, d) * (2.0 + std::pow(2.0, alpha + 1.0)); }

}  // namespace wlab
