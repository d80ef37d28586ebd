#ifndef HYPGRAPH_GRID_HPP
#define HYPGRAPH_GRID_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hypgraph/geometry.hpp"

namespace hypgraph {

enum class DomainShape { Rectangle, Disk, Annulus };

struct DomainSpec {
    DomainShape shape = DomainShape::Disk;
    Eigen::VectorXd lo, hi;   // rectangle corners
    Eigen::VectorXd center;   // disk / annulus
    double radius = 0.0;      // disk
    double r_in = 0.0, r_out = 0.0;
    double clearance = 1e-3;  // required min y_n over the closure

    static DomainSpec rectangle(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                double clearance = 1e-3);
    static DomainSpec disk(const Eigen::VectorXd& center, double radius, double clearance = 1e-3);
    static DomainSpec annulus(const Eigen::VectorXd& center, double r_in, double r_out,
                              double clearance = 1e-3);

    int dim() const;
    void validate() const;
    double min_height() const;
    double distance_to_boundary(const Eigen::VectorXd& y) const;

    struct Ball {
        Eigen::VectorXd center;
        double radius = 0.0;
    };
    // Smallest ball of radius diam/2 containing the domain.
    Ball enclosing_ball() const;
    double interior_radius() const;  // uniform interior sphere radius of the boundary
    double exterior_radius() const;  // uniform exterior sphere radius (infinity if convex)
    std::string describe() const;
};

enum class NodeRole : std::uint8_t { Interior, Boundary, Exterior };
enum class GridKind { Tensor, Polar };

using SparseOp = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Structured grid with precomputed derivative operators.  Node i has
// coordinates nodes.col(i); d(s) * u approximates u_s and dd(s,t) * u
// approximates u_st at every node (one-sided rows on the boundary).
struct Grid {
    DomainSpec domain;
    GridKind kind = GridKind::Tensor;
    std::vector<int> lattice;      // tensor: nodes per axis; polar: {n_r, n_phi}
    Eigen::MatrixXd nodes;         // dim x size
    std::vector<NodeRole> roles;
    std::vector<int> depth;        // lattice distance to the boundary
    std::vector<int> component;    // boundary component per node, -1 inside
    Eigen::MatrixXd normals;       // inward unit normal on boundary nodes, 0 elsewhere
    Eigen::VectorXd spacing;       // tensor: h per axis; polar: (dr, dphi)
    double h = 0.0;                // largest physical spacing
    std::vector<SparseOp> first;
    std::vector<SparseOp> second;  // packed upper triangle, see dd()

    int dim() const { return static_cast<int>(nodes.rows()); }
    long size() const { return static_cast<long>(nodes.cols()); }
    bool is_boundary(long i) const { return roles[i] == NodeRole::Boundary; }
    const SparseOp& d(int s) const { return first[s]; }
    const SparseOp& dd(int s, int t) const;
    std::vector<long> interior_indices() const;
    std::vector<long> boundary_indices() const;
    int boundary_components() const;
};

// Scalar resolution: tensor grids use it per axis; polar grids map it to
// n_r = (N+1)/2 rings and n_phi = 2(N-1) angles, about N^2 nodes.
Grid build_grid(const DomainSpec& domain, int resolution);
Grid build_grid(const DomainSpec& domain, const std::vector<int>& resolution);

struct GraphField {
    std::shared_ptr<const Grid> grid;
    Eigen::VectorXd values;

    GraphField() = default;
    GraphField(std::shared_ptr<const Grid> g, Eigen::VectorXd v)
        : grid(std::move(g)), values(std::move(v)) {}
    static GraphField constant(std::shared_ptr<const Grid> g, double value);
};

struct FieldDerivatives {
    Eigen::MatrixXd grad;  // dim x size
    Eigen::MatrixXd hess;  // dim*dim x size, column-major per node

    Eigen::VectorXd gradient(long i) const { return grad.col(i); }
    Eigen::MatrixXd hessian(long i) const;
};

// op * v evaluated row by row as sum_j w_ij (v_j - v_i).  Every derivative
// operator annihilates constants, and the difference form keeps the large
// weights near the polar center from amplifying roundoff in v.
Eigen::VectorXd apply_derivative(const SparseOp& op, const Eigen::VectorXd& v);

FieldDerivatives fd_derivatives(const GraphField& field);
GraphSample<double> node_sample(const GraphField& field, const FieldDerivatives& der, long i);
GraphField apply_dirichlet(const GraphField& field, double eps);

}  // namespace hypgraph

#endif
