#include "hypgraph/grid.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace hypgraph {

// ---------------------------------------------------------------------------
// DomainSpec

DomainSpec DomainSpec::rectangle(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                 double clearance) {
    DomainSpec d;
    d.shape = DomainShape::Rectangle;
    d.lo = lo;
    d.hi = hi;
    d.clearance = clearance;
    d.validate();
    return d;
}

DomainSpec DomainSpec::disk(const Eigen::VectorXd& center, double radius, double clearance) {
    DomainSpec d;
    d.shape = DomainShape::Disk;
    d.center = center;
    d.radius = radius;
    d.clearance = clearance;
    d.validate();
    return d;
}

DomainSpec DomainSpec::annulus(const Eigen::VectorXd& center, double r_in, double r_out,
                               double clearance) {
    DomainSpec d;
    d.shape = DomainShape::Annulus;
    d.center = center;
    d.r_in = r_in;
    d.r_out = r_out;
    d.clearance = clearance;
    d.validate();
    return d;
}

int DomainSpec::dim() const {
    return static_cast<int>(shape == DomainShape::Rectangle ? lo.size() : center.size());
}

void DomainSpec::validate() const {
    if (!(clearance > 0.0)) throw DomainError("domain clearance must be positive");
    switch (shape) {
        case DomainShape::Rectangle:
            if (lo.size() < 2 || lo.size() != hi.size())
                throw DomainError("rectangle corners need matching dimension >= 2");
            if (!((hi - lo).minCoeff() > 0.0)) throw DomainError("rectangle must have y_min < y_max");
            break;
        case DomainShape::Disk:
            if (center.size() != 2) throw DomainError("disk domains are two-dimensional");
            if (!(radius > 0.0)) throw DomainError("disk radius must be positive");
            break;
        case DomainShape::Annulus:
            if (center.size() != 2) throw DomainError("annulus domains are two-dimensional");
            if (!(r_in > 0.0 && r_out > r_in)) throw DomainError("annulus needs 0 < r_in < r_out");
            break;
    }
    if (min_height() < clearance)
        throw DomainError("domain violates clearance: min y_n = " + std::to_string(min_height()));
}

double DomainSpec::min_height() const {
    switch (shape) {
        case DomainShape::Rectangle: return lo(lo.size() - 1);
        case DomainShape::Disk: return center(center.size() - 1) - radius;
        case DomainShape::Annulus: return center(center.size() - 1) - r_out;
    }
    return 0.0;
}

double DomainSpec::distance_to_boundary(const Eigen::VectorXd& y) const {
    switch (shape) {
        case DomainShape::Rectangle:
            return std::min((y - lo).minCoeff(), (hi - y).minCoeff());
        case DomainShape::Disk:
            return radius - (y - center).norm();
        case DomainShape::Annulus: {
            const double r = (y - center).norm();
            return std::min(r - r_in, r_out - r);
        }
    }
    return 0.0;
}

DomainSpec::Ball DomainSpec::enclosing_ball() const {
    switch (shape) {
        case DomainShape::Rectangle: return {0.5 * (lo + hi), 0.5 * (hi - lo).norm()};
        case DomainShape::Disk: return {center, radius};
        case DomainShape::Annulus: return {center, r_out};
    }
    return {};
}

double DomainSpec::interior_radius() const {
    switch (shape) {
        case DomainShape::Rectangle: return 0.5 * (hi - lo).minCoeff();
        case DomainShape::Disk: return radius;
        case DomainShape::Annulus: return 0.5 * (r_out - r_in);
    }
    return 0.0;
}

double DomainSpec::exterior_radius() const {
    if (shape == DomainShape::Annulus) return r_in;
    return std::numeric_limits<double>::infinity();
}

std::string DomainSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    auto vec = [&](const Eigen::VectorXd& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v(i);
    };
    switch (shape) {
        case DomainShape::Rectangle:
            os << "rectangle lo=";
            vec(lo);
            os << " hi=";
            vec(hi);
            break;
        case DomainShape::Disk:
            os << "disk center=";
            vec(center);
            os << " radius=" << radius;
            break;
        case DomainShape::Annulus:
            os << "annulus center=";
            vec(center);
            os << " r_in=" << r_in << " r_out=" << r_out;
            break;
    }
    os << " clearance=" << clearance;
    return os.str();
}

// ---------------------------------------------------------------------------
// Grid

namespace {

using Stencil = std::vector<std::pair<int, double>>;  // (offset, weight)
using Triplet = Eigen::Triplet<double>;

int packed_index(int n, int s, int t) {
    if (s > t) std::swap(s, t);
    return s * n - s * (s - 1) / 2 + (t - s);
}

// Second-order 1-D stencils on a uniform line of m points, node i.
Stencil line_first(int i, int m, double h) {
    if (i == 0) return {{0, -1.5 / h}, {1, 2.0 / h}, {2, -0.5 / h}};
    if (i == m - 1) return {{0, 1.5 / h}, {-1, -2.0 / h}, {-2, 0.5 / h}};
    return {{-1, -0.5 / h}, {1, 0.5 / h}};
}

Stencil line_second(int i, int m, double h) {
    const double h2 = h * h;
    if (i == 0) return {{0, 2.0 / h2}, {1, -5.0 / h2}, {2, 4.0 / h2}, {3, -1.0 / h2}};
    if (i == m - 1) return {{0, 2.0 / h2}, {-1, -5.0 / h2}, {-2, 4.0 / h2}, {-3, -1.0 / h2}};
    return {{-1, 1.0 / h2}, {0, -2.0 / h2}, {1, 1.0 / h2}};
}

SparseOp from_triplets(long size, const std::vector<Triplet>& t) {
    SparseOp op(size, size);
    op.setFromTriplets(t.begin(), t.end());
    op.makeCompressed();
    return op;
}

SparseOp scaled(const Eigen::VectorXd& w, const SparseOp& op) {
    return SparseOp(w.asDiagonal() * op);
}

void build_tensor(Grid& g, const std::vector<int>& counts) {
    const DomainSpec& dom = g.domain;
    const int n = dom.dim();
    if (static_cast<int>(counts.size()) != n) throw DomainError("resolution needs one entry per axis");
    for (int c : counts)
        if (c < 8) throw DomainError("resolution must be >= 8 per axis");
    g.kind = GridKind::Tensor;
    g.lattice = counts;
    std::vector<long> stride(n, 1);
    long total = 1;
    for (int a = 0; a < n; ++a) {
        stride[a] = total;
        total *= counts[a];
    }
    g.spacing.resize(n);
    for (int a = 0; a < n; ++a) g.spacing(a) = (dom.hi(a) - dom.lo(a)) / (counts[a] - 1);
    g.h = g.spacing.maxCoeff();

    g.nodes.resize(n, total);
    g.roles.assign(total, NodeRole::Interior);
    g.depth.assign(total, 0);
    g.component.assign(total, -1);
    g.normals = Eigen::MatrixXd::Zero(n, total);
    std::vector<std::vector<int>> idx(total, std::vector<int>(n));
    for (long k = 0; k < total; ++k) {
        long rem = k;
        int depth = std::numeric_limits<int>::max();
        Eigen::VectorXd normal = Eigen::VectorXd::Zero(n);
        for (int a = 0; a < n; ++a) {
            const int i = static_cast<int>(rem % counts[a]);
            rem /= counts[a];
            idx[k][a] = i;
            // Exact end points, so boundary nodes sit on the boundary.
            g.nodes(a, k) = (i == counts[a] - 1) ? dom.hi(a) : dom.lo(a) + i * g.spacing(a);
            depth = std::min({depth, i, counts[a] - 1 - i});
            if (i == 0) normal(a) += 1.0;
            if (i == counts[a] - 1) normal(a) -= 1.0;
        }
        g.depth[k] = depth;
        if (depth == 0) {
            g.roles[k] = NodeRole::Boundary;
            g.component[k] = 0;
            g.normals.col(k) = normal.normalized();
        }
    }

    std::vector<SparseOp> line1(n), line2(n);
    for (int a = 0; a < n; ++a) {
        std::vector<Triplet> t1, t2;
        for (long k = 0; k < total; ++k) {
            const int i = idx[k][a];
            for (auto [off, w] : line_first(i, counts[a], g.spacing(a)))
                t1.emplace_back(k, k + off * stride[a], w);
            for (auto [off, w] : line_second(i, counts[a], g.spacing(a)))
                t2.emplace_back(k, k + off * stride[a], w);
        }
        line1[a] = from_triplets(total, t1);
        line2[a] = from_triplets(total, t2);
    }
    g.first = line1;
    g.second.assign(n * (n + 1) / 2, SparseOp());
    for (int s = 0; s < n; ++s)
        for (int t = s; t < n; ++t)
            g.second[packed_index(n, s, t)] = (s == t) ? line2[s] : SparseOp(line1[s] * line1[t]);
}

// Five-point periodic stencils exact for the trigonometric modes 0, 1, 2.
std::pair<Eigen::Vector2d, Eigen::Vector3d> angular_weights(double dphi) {
    Eigen::Matrix2d a;
    a << std::sin(dphi), std::sin(2 * dphi), std::sin(2 * dphi), std::sin(4 * dphi);
    const Eigen::Vector2d d = a.partialPivLu().solve(Eigen::Vector2d(0.5, 1.0));
    Eigen::Matrix3d b;
    for (int k = 0; k < 3; ++k) b.row(k) << 1.0, 2 * std::cos(k * dphi), 2 * std::cos(2 * k * dphi);
    const Eigen::Vector3d c = b.partialPivLu().solve(Eigen::Vector3d(0.0, -1.0, -4.0));
    return {d, c};
}

void build_polar(Grid& g, int n_r, int n_phi) {
    const DomainSpec& dom = g.domain;
    const bool disk = dom.shape == DomainShape::Disk;
    if (n_r < 4) throw DomainError("polar grids need at least 4 rings");
    if (n_phi < 8 || n_phi % 2 != 0) throw DomainError("polar grids need an even n_phi >= 8");
    g.kind = GridKind::Polar;
    g.lattice = {n_r, n_phi};
    const long total = static_cast<long>(n_r) * n_phi;
    const double dphi = 2 * M_PI / n_phi;
    const double dr = disk ? dom.radius / (n_r - 0.5) : (dom.r_out - dom.r_in) / (n_r - 1);
    const double r_outer = disk ? dom.radius : dom.r_out;
    g.spacing = Eigen::Vector2d(dr, dphi);
    g.h = std::max(dr, r_outer * dphi);

    auto ring_radius = [&](int i) {
        if (disk) return i == n_r - 1 ? dom.radius : (i + 0.5) * dr;
        if (i == 0) return dom.r_in;
        if (i == n_r - 1) return dom.r_out;
        return dom.r_in + i * dr;
    };
    // Node on ring k (negative k crosses the disk center) at angle index j.
    auto node = [&](int k, int j) -> long {
        if (k < 0) {
            k = -k - 1;
            j += n_phi / 2;
        }
        j = ((j % n_phi) + n_phi) % n_phi;
        return static_cast<long>(k) * n_phi + j;
    };

    g.nodes.resize(2, total);
    g.roles.assign(total, NodeRole::Interior);
    g.depth.assign(total, 0);
    g.component.assign(total, -1);
    g.normals = Eigen::MatrixXd::Zero(2, total);
    Eigen::VectorXd cs(total), sn(total), rad(total);
    for (int i = 0; i < n_r; ++i)
        for (int j = 0; j < n_phi; ++j) {
            const long k = node(i, j);
            const double phi = j * dphi, r = ring_radius(i);
            cs(k) = std::cos(phi);
            sn(k) = std::sin(phi);
            rad(k) = r;
            g.nodes(0, k) = dom.center(0) + r * cs(k);
            g.nodes(1, k) = dom.center(1) + r * sn(k);
            g.depth[k] = disk ? n_r - 1 - i : std::min(i, n_r - 1 - i);
            if (i == n_r - 1) {
                g.roles[k] = NodeRole::Boundary;
                g.component[k] = 0;
                g.normals.col(k) = Eigen::Vector2d(-cs(k), -sn(k));
            } else if (!disk && i == 0) {
                g.roles[k] = NodeRole::Boundary;
                g.component[k] = 1;
                g.normals.col(k) = Eigen::Vector2d(cs(k), sn(k));
            }
        }

    // Radial first derivative: fourth order where the line through the
    // center allows it (the 1/r metric factor would otherwise amplify the
    // truncation error near the center), second order next to the boundary.
    auto radial_first = [&](int i) -> Stencil {
        if (!disk) return line_first(i, n_r, dr);
        if (i + 2 <= n_r - 1)
            return {{-2, 1.0 / (12 * dr)}, {-1, -8.0 / (12 * dr)}, {1, 8.0 / (12 * dr)},
                    {2, -1.0 / (12 * dr)}};
        if (i + 1 <= n_r - 1) return {{-1, -0.5 / dr}, {1, 0.5 / dr}};
        return line_first(n_r - 1, n_r, dr);
    };
    auto radial_second = [&](int i) -> Stencil {
        if (!disk) return line_second(i, n_r, dr);
        if (i <= n_r - 2) return {{-1, 1.0 / (dr * dr)}, {0, -2.0 / (dr * dr)}, {1, 1.0 / (dr * dr)}};
        return line_second(n_r - 1, n_r, dr);
    };
    const auto [dw, cw] = angular_weights(dphi);

    std::vector<Triplet> tr, trr, tp, tpp;
    for (int i = 0; i < n_r; ++i)
        for (int j = 0; j < n_phi; ++j) {
            const long k = node(i, j);
            for (auto [off, w] : radial_first(i)) tr.emplace_back(k, node(i + off, j), w);
            for (auto [off, w] : radial_second(i)) trr.emplace_back(k, node(i + off, j), w);
            for (int m = 1; m <= 2; ++m) {
                tp.emplace_back(k, node(i, j + m), dw(m - 1));
                tp.emplace_back(k, node(i, j - m), -dw(m - 1));
                tpp.emplace_back(k, node(i, j + m), cw(m));
                tpp.emplace_back(k, node(i, j - m), cw(m));
            }
            tpp.emplace_back(k, k, cw(0));
        }
    const SparseOp Dr = from_triplets(total, tr), Drr = from_triplets(total, trr);
    const SparseOp Dp = from_triplets(total, tp), Dpp = from_triplets(total, tpp);
    const SparseOp Drp = Dr * Dp;

    const Eigen::VectorXd inv_r = rad.cwiseInverse();
    const Eigen::VectorXd inv_r2 = inv_r.cwiseProduct(inv_r);
    const SparseOp Hrr = Drr;
    const SparseOp Hrp = SparseOp(scaled(inv_r, Drp) - scaled(inv_r2, Dp));
    const SparseOp Hpp = SparseOp(scaled(inv_r, Dr) + scaled(inv_r2, Dpp));
    const Eigen::VectorXd c2 = cs.cwiseProduct(cs), s2 = sn.cwiseProduct(sn);
    const Eigen::VectorXd csn = cs.cwiseProduct(sn);

    g.first = {SparseOp(scaled(cs, Dr) - scaled(sn.cwiseProduct(inv_r), Dp)),
               SparseOp(scaled(sn, Dr) + scaled(cs.cwiseProduct(inv_r), Dp))};
    g.second.assign(3, SparseOp());
    g.second[packed_index(2, 0, 0)] =
        SparseOp(scaled(c2, Hrr) - scaled(2 * csn, Hrp) + scaled(s2, Hpp));
    g.second[packed_index(2, 0, 1)] =
        SparseOp(scaled(csn, Hrr) + scaled(c2 - s2, Hrp) - scaled(csn, Hpp));
    g.second[packed_index(2, 1, 1)] =
        SparseOp(scaled(s2, Hrr) + scaled(2 * csn, Hrp) + scaled(c2, Hpp));
    for (auto& op : g.first) op.prune(0.0);
    for (auto& op : g.second) op.prune(0.0);
}

}  // namespace

const SparseOp& Grid::dd(int s, int t) const { return second[packed_index(dim(), s, t)]; }

std::vector<long> Grid::interior_indices() const {
    std::vector<long> out;
    for (long i = 0; i < size(); ++i)
        if (roles[i] == NodeRole::Interior) out.push_back(i);
    return out;
}

std::vector<long> Grid::boundary_indices() const {
    std::vector<long> out;
    for (long i = 0; i < size(); ++i)
        if (roles[i] == NodeRole::Boundary) out.push_back(i);
    return out;
}

int Grid::boundary_components() const {
    int m = -1;
    for (int c : component) m = std::max(m, c);
    return m + 1;
}

Grid build_grid(const DomainSpec& domain, int resolution) {
    if (resolution < 8) throw DomainError("resolution must be >= 8");
    if (domain.shape == DomainShape::Rectangle)
        return build_grid(domain, std::vector<int>(domain.dim(), resolution));
    return build_grid(domain, std::vector<int>{(resolution + 1) / 2, 2 * (resolution - 1)});
}

Grid build_grid(const DomainSpec& domain, const std::vector<int>& resolution) {
    domain.validate();
    Grid g;
    g.domain = domain;
    if (domain.shape == DomainShape::Rectangle) {
        build_tensor(g, resolution);
    } else {
        if (resolution.size() != 2) throw DomainError("polar resolution is {n_r, n_phi}");
        build_polar(g, resolution[0], resolution[1]);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Fields

GraphField GraphField::constant(std::shared_ptr<const Grid> g, double value) {
    const long n = g->size();
    return GraphField(std::move(g), Eigen::VectorXd::Constant(n, value));
}

Eigen::MatrixXd FieldDerivatives::hessian(long i) const {
    const int n = static_cast<int>(grad.rows());
    return Eigen::Map<const Eigen::MatrixXd>(hess.col(i).data(), n, n);
}

Eigen::VectorXd apply_derivative(const SparseOp& op, const Eigen::VectorXd& v) {
    Eigen::VectorXd out(op.rows());
    for (Eigen::Index i = 0; i < op.outerSize(); ++i) {
        double acc = 0.0;
        for (SparseOp::InnerIterator it(op, i); it; ++it) acc += it.value() * (v(it.col()) - v(i));
        out(i) = acc;
    }
    return out;
}

FieldDerivatives fd_derivatives(const GraphField& field) {
    const Grid& g = *field.grid;
    const int n = g.dim();
    FieldDerivatives der;
    der.grad.resize(n, g.size());
    der.hess.resize(n * n, g.size());
    for (int s = 0; s < n; ++s) der.grad.row(s) = apply_derivative(g.d(s), field.values).transpose();
    for (int s = 0; s < n; ++s)
        for (int t = s; t < n; ++t) {
            const Eigen::VectorXd v = apply_derivative(g.dd(s, t), field.values);
            der.hess.row(s * n + t) = v.transpose();
            der.hess.row(t * n + s) = v.transpose();
        }
    return der;
}

GraphSample<double> node_sample(const GraphField& field, const FieldDerivatives& der, long i) {
    GraphSample<double> s;
    s.y = field.grid->nodes.col(i);
    s.u = field.values(i);
    s.du = der.gradient(i);
    s.d2u = der.hessian(i);
    return s;
}

GraphField apply_dirichlet(const GraphField& field, double eps) {
    if (!(eps > 0.0 && eps < M_PI / 2)) throw DomainError("apply_dirichlet: eps outside (0, pi/2)");
    GraphField out = field;
    for (long i = 0; i < field.grid->size(); ++i)
        if (field.grid->is_boundary(i)) out.values(i) = eps;
    return out;
}

}  // namespace hypgraph
