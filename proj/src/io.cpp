#include "wlab/io.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace wlab::io {

namespace {
std::vector<double> parse_row(const std::string& line, std::size_t expected) {
    std::vector<double> v;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    if (v.size() != expected) throw std::runtime_error("field row has " + std::to_string(v.size()) + " entries, expected " + std::to_string(expected));
    return v;
}

json read_header(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("missing field header");
    return json::parse(line);
}

Eigen::MatrixXd matrix_of(const json& j, int d1) {
    Eigen::MatrixXd M(d1, d1);
    if (!j.is_array() || static_cast<int>(j.size()) != d1) throw std::runtime_error("coefficient block must be d1 x d1");
    for (int r = 0; r < d1; ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != d1) throw std::runtime_error("coefficient block must be d1 x d1");
        for (int c = 0; c < d1; ++c) M(r, c) = j[r][c].get<double>();
    }
    return M;
}

std::vector<Eigen::MatrixXd> blocks_of(const json& j, int d, int d1) {
    if (!j.is_array() || static_cast<int>(j.size()) != d) throw std::runtime_error("A must be a d x d array of blocks");
    std::vector<Eigen::MatrixXd> out;
    for (int a = 0; a < d; ++a) {
        if (!j[a].is_array() || static_cast<int>(j[a].size()) != d) throw std::runtime_error("A must be a d x d array of blocks");
        for (int b = 0; b < d; ++b) out.push_back(matrix_of(j[a][b], d1));
    }
    return out;
}
}  // namespace

void write_cellfield(std::ostream& os, const CellField& f) {
    const auto& W = f.window();
    json h = {{"d", f.d()}, {"d1", f.d1()}, {"alpha", f.weight().alpha()}, {"n_max", f.n_max()},
              {"window", {{"t", {W.t_lo, W.t_hi}}, {"lo", W.lo}, {"hi", W.hi}}}};
    os << h.dump() << '\n';
    os.precision(17);
    std::vector<std::int64_t> idx(f.d() + 1);
    for (std::size_t c = 0; c < f.num_cells(); ++c) {
        f.cell_indices(c, idx);
        for (std::size_t k = 0; k < idx.size(); ++k) os << (k ? "," : "") << idx[k];
        for (int k = 0; k < f.d1(); ++k) os << ',' << f.value(c, k);
        os << '\n';
    }
}

CellField read_cellfield(std::istream& is) {
    const json h = read_header(is);
    CellWindow W;
    W.t_lo = h["window"]["t"][0].get<std::int64_t>();
    W.t_hi = h["window"]["t"][1].get<std::int64_t>();
    W.lo = h["window"]["lo"].get<std::vector<std::int64_t>>();
    W.hi = h["window"]["hi"].get<std::vector<std::int64_t>>();
    const int d = h["d"].get<int>(), d1 = h["d1"].get<int>();
    if (W.d() != d || static_cast<int>(W.hi.size()) != d) throw std::runtime_error("cell field window does not match d");
    CellField f(d1, WeightParams(h["alpha"].get<double>()), h["n_max"].get<int>(), W);
    std::string line;
    std::vector<std::int64_t> sp(d);
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto v = parse_row(line, d + 1 + d1);
        for (int k = 0; k < d; ++k) sp[k] = static_cast<std::int64_t>(v[k + 1]);
        const std::size_t c = f.cell_of(static_cast<std::int64_t>(v[0]), sp);
        if (c == f.num_cells()) throw std::runtime_error("cell outside the window");
        for (int k = 0; k < d1; ++k) f.value(c, k) = v[d + 1 + k];
        ++rows;
    }
    if (rows != f.num_cells()) throw std::runtime_error("cell field has missing rows");
    return f;
}

void write_nodefield(std::ostream& os, const NodeField& u) {
    const GridSpec& g = u.spec();
    json h = {{"d", g.d()}, {"d1", g.d1}, {"steps", {{"x", g.step}, {"t", g.ht}}},
              {"domain", {{"origin", g.origin}, {"n_nodes", g.n_nodes}}}, {"T", {{"t0", g.t0}, {"nt", g.nt}}}};
    os << h.dump() << '\n';
    os.precision(17);
    std::vector<int> idx(g.d());
    for (int j = 0; j < u.nt(); ++j)
        for (std::size_t n = 0; n < u.num_space_nodes(); ++n) {
            u.node_indices(n, idx);
            os << j;
            for (int i : idx) os << ',' << i;
            for (int k = 0; k < u.d1(); ++k) os << ',' << u.at(j, n, k);
            os << '\n';
        }
}

NodeField read_nodefield(std::istream& is) {
    const json h = read_header(is);
    GridSpec g;
    g.d1 = h["d1"].get<int>();
    g.origin = h["domain"]["origin"].get<std::vector<double>>();
    g.n_nodes = h["domain"]["n_nodes"].get<std::vector<int>>();
    g.step = h["steps"]["x"].get<std::vector<double>>();
    g.ht = h["steps"]["t"].get<double>();
    g.t0 = h["T"]["t0"].get<double>();
    g.nt = h["T"]["nt"].get<int>();
    g.validate();
    NodeField u(g);
    const int d = g.d();
    std::string line;
    std::vector<int> idx(d);
    std::size_t rows = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto v = parse_row(line, d + 1 + g.d1);
        for (int k = 0; k < d; ++k) idx[k] = static_cast<int>(v[k + 1]);
        const std::size_t n = u.node_of(idx);
        for (int k = 0; k < g.d1; ++k) u.at(static_cast<int>(v[0]), n, k) = v[d + 1 + k];
        ++rows;
    }
    if (rows != static_cast<std::size_t>(g.nt) * u.num_space_nodes()) throw std::runtime_error("node field has missing rows");
    return u;
}

SolveConfig parse_solve_config(const json& j, bool parabolic) {
    if (!j.is_object()) throw std::runtime_error("solver config must be a JSON object");
    SolveConfig S;
    const int d1 = j.value("d1", 1);
    const auto transverse = j.value("transverse", std::vector<double>{});
    const int d = 1 + static_cast<int>(transverse.size());
    const auto cells = j.at("cells").get<std::vector<int>>();
    const double T = parabolic ? j.at("T").get<double>() : 0.0;
    const int steps = parabolic ? j.at("time_steps").get<int>() : 0;
    S.grid = make_grid(d1, j.at("L").get<double>(), transverse, cells, T, steps);
    if (j.contains("pieces")) {
        S.A.d = d;
        S.A.d1 = d1;
        for (const auto& p : j["pieces"]) S.A.pieces.push_back(blocks_of(p, d, d1));
        S.A.breakpoints = j.value("breakpoints", std::vector<double>{});
        double K = 0.0;
        for (const auto& P : S.A.pieces)
            for (const auto& M : P) K = std::max(K, M.norm());
        S.A.K = j.value("K", K);
    } else if (j.contains("A")) {
        S.A = SystemCoefficients::constant(d, d1, blocks_of(j["A"], d, d1));
    } else {
        S.A = SystemCoefficients::heat(d, d1);
    }
    S.A.validate();
    const std::string scheme = j.value("scheme", std::string("implicit-euler"));
    if (scheme == "implicit-euler") S.solver.scheme = Scheme::ImplicitEuler;
    else if (scheme == "crank-nicolson") S.solver.scheme = Scheme::CrankNicolson;
    else throw std::runtime_error("scheme must be implicit-euler or crank-nicolson");
    S.solver.norm.p = j.value("p", 2.0);
    S.solver.norm.theta = j.value("theta", static_cast<double>(d));
    S.solver.norm.validate();
    const json F = j.value("forcing", json::object());
    S.forcing.center = F.value("center", std::vector<double>{});
    if (S.forcing.center.empty()) {
        S.forcing.center.assign(d, 0.0);
        S.forcing.center[0] = j.at("L").get<double>() / 3;
    }
    if (static_cast<int>(S.forcing.center.size()) != d) throw std::runtime_error("forcing centre must have d entries");
    S.forcing.width = F.value("width", S.forcing.center[0] * 0.4);
    S.forcing.amplitude = F.value("amplitude", std::vector<double>(d1, 1.0));
    if (static_cast<int>(S.forcing.amplitude.size()) != d1) throw std::runtime_error("forcing amplitude must have d1 entries");
    if (!(S.forcing.width > 0) || S.forcing.center[0] - S.forcing.width <= 0)
        throw std::runtime_error("forcing must vanish near x1 = 0");
    return S;
}

NodeField sample_forcing(const ForcingSpec& F, const GridSpec& g) {
    return sample([&F](double t, std::span<const double> x, std::span<double> o) {
        double r2 = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) r2 += (x[k] - F.center[k]) * (x[k] - F.center[k]);
        const double s = std::sqrt(r2) / F.width;
        const double b = s < 1 ? std::pow(std::cos(std::numbers::pi * s / 2), 4) * (1 + t) : 0.0;
        for (std::size_t k = 0; k < o.size(); ++k) o[k] = F.amplitude[k] * b;
    }, g);
}

BatchSpec parse_batch_spec(const json& j) {
    BatchSpec b;
    b.seed = j.value("seed", b.seed);
    b.n_paths = j.value("n_paths", b.n_paths);
    b.step = j.value("step", b.step);
    b.T_max = j.value("T_max", b.T_max);
    b.batches = j.value("batches", b.batches);
    b.validate();
    return b;
}

void write_estimates_csv(std::ostream& os, const std::vector<double>& x, const std::vector<Estimate>& est) {
    os.precision(17);
    os << "x,estimate,stderr,tail_budget\n";
    for (std::size_t k = 0; k < x.size() && k < est.size(); ++k)
        os << x[k] << ',' << est[k].value << ',' << est[k].std_error << ',' << est[k].tail_budget << '\n';
}

}  // namespace wlab::io
