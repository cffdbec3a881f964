#pragma once

#include <functional>
#include <span>
#include <vector>

#include "wlab/dyadic_grid.hpp"

namespace wlab {

// Uniform node grid: x_k = origin_k + i * step_k, i < n_nodes_k; t = t0 + j * ht, j < nt.
struct GridSpec {
    int d1 = 1;
    std::vector<double> origin;
    std::vector<double> step;
    std::vector<int> n_nodes;
    double t0 = 0.0;
    double ht = 1.0;
    int nt = 1;

    int d() const { return static_cast<int>(origin.size()); }
    std::size_t num_space_nodes() const;
    void validate() const;
    bool operator==(const GridSpec&) const = default;
};

// Grid on [0, L1] x prod [-L_k, L_k] and [0, T] with nodes on both ends of every axis.
GridSpec make_grid(int d1, double L1, std::vector<double> transverse, std::vector<int> cells, double T, int time_steps);

class NodeField {
public:
    NodeField() = default;
    explicit NodeField(GridSpec spec);

    const GridSpec& spec() const { return spec_; }
    int d() const { return spec_.d(); }
    int d1() const { return spec_.d1; }
    int nt() const { return spec_.nt; }
    std::size_t num_space_nodes() const { return nspace_; }

    double x(int axis, int i) const { return spec_.origin[axis] + i * spec_.step[axis]; }
    double t(int j) const { return spec_.t0 + j * spec_.ht; }
    // spatial multi-index of a flat node
    void node_indices(std::size_t node, std::span<int> out) const;
    std::size_t node_of(std::span<const int> idx) const;
    std::size_t stride(int axis) const { return stride_[axis]; }

    double& at(int j, std::size_t node, int comp) { return values_[(j * nspace_ + node) * spec_.d1 + comp]; }
    double at(int j, std::size_t node, int comp) const { return values_[(j * nspace_ + node) * spec_.d1 + comp]; }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    NodeField time_slice(int j) const;
    double max_abs() const;

private:
    GridSpec spec_;
    std::size_t nspace_ = 0;
    std::vector<std::size_t> stride_;
    std::vector<double> values_;
};

using PointFunction = std::function<void(double t, std::span<const double> x, std::span<double> out)>;

NodeField sample(const PointFunction& fn, const GridSpec& spec);

// D^beta in space (|beta| <= 4) combined with an optional first time derivative.
NodeField derivative(const NodeField& u, std::span<const int> beta, int time_order = 0);
NodeField derivative(const NodeField& u, std::initializer_list<int> beta, int time_order = 0);

// u(c^2 t, c x) on the grid with steps (h_t / c^2, h / c); the values are reused as they are.
NodeField dilate(const NodeField& u, double c);

// Cell value = arithmetic mean of the nodes with indices in [k m, (k+1) m) on each axis.
CellField to_cellfield(const NodeField& u, int n_max, const WeightParams& w);

// max |value| over nodes within `margin` nodes of x1 = origin or of any outer face
double max_abs_on_margin(const NodeField& u, int margin);

NodeField operator+(const NodeField& a, const NodeField& b);
NodeField operator*(double c, const NodeField& a);

}  // namespace wlab
