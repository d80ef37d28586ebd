#include "hypgraph/cli.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "hypgraph/report.hpp"

namespace hypgraph {

namespace {

const char* kMagic = "# hypgraph solution v1";

std::string rows(const GraphField& field, const RunConfig& config, bool interior_only) {
    const Grid& g = *field.grid;
    const int n = g.dim();
    const FieldDerivatives der = fd_derivatives(field);
    const double c = std::cos(config.solve.eps);
    std::ostringstream os;
    os << "# columns = index";
    for (int k = 1; k <= n; ++k) os << " y" << k;
    os << " u omega";
    for (int k = 1; k <= n; ++k) os << " kappa" << k;
    os << " margin\n";
    for (long i = 0; i < g.size(); ++i) {
        if (interior_only && g.is_boundary(i)) continue;
        const ShapeSample<double> sh = shape_at(node_sample(field, der, i));
        os << i;
        for (int k = 0; k < n; ++k) os << ' ' << format_double(g.nodes(k, i));
        os << ' ' << format_double(field.values(i)) << ' ' << format_double(sh.omega);
        for (int k = 0; k < n; ++k) os << ' ' << format_double(sh.kappa(k));
        os << ' ' << format_double(sh.kappa(0) / c) << '\n';
    }
    return os.str();
}

std::string header(const GraphField& field, const RunConfig& config) {
    std::ostringstream os;
    os << kMagic << '\n';
    std::istringstream cfg(render_config(config));
    std::string line;
    while (std::getline(cfg, line)) os << "# " << line << '\n';
    os << "# lattice =";
    for (int k : field.grid->lattice) os << ' ' << k;
    os << '\n';
    return os.str();
}

}  // namespace

std::string solution_text(const GraphField& field, const RunConfig& config) {
    return header(field, config) + rows(field, config, false);
}

std::string plot_text(const GraphField& field, const RunConfig& config) {
    return header(field, config) + rows(field, config, true);
}

StoredSolution parse_solution(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != kMagic) throw ConfigError("not a solution file");
    std::string cfg;
    StoredSolution out;
    std::vector<std::pair<long, double>> values;
    std::vector<std::vector<double>> coords;
    int ncols = -1;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string body = line.size() > 2 ? line.substr(2) : "";
            if (body.rfind("lattice =", 0) == 0) {
                std::istringstream ls(body.substr(9));
                int k;
                while (ls >> k) out.lattice.push_back(k);
            } else if (body.rfind("columns =", 0) == 0) {
                std::istringstream ls(body.substr(9));
                std::string w;
                ncols = 0;
                while (ls >> w) ++ncols;
            } else {
                cfg += body + '\n';
            }
            continue;
        }
        if (ncols < 0) throw ConfigError("solution file: data before the column header");
        std::istringstream ls(line);
        long idx;
        if (!(ls >> idx)) throw ConfigError("solution file: malformed row");
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) row.push_back(std::strtod(tok.c_str(), nullptr));
        if (static_cast<int>(row.size()) + 1 != ncols)
            throw ConfigError("solution file: row width does not match the column header");
        values.emplace_back(idx, 0.0);
        coords.push_back(row);
    }
    out.config = run_config_from(parse_config_text(cfg));
    auto grid = std::make_shared<Grid>(build_grid(out.config.domain, out.config.resolution));
    if (grid->lattice != out.lattice) throw ConfigError("solution file: lattice mismatch");
    const int n = grid->dim();
    if (static_cast<long>(values.size()) != grid->size())
        throw ConfigError("solution file: node count mismatch");
    Eigen::VectorXd u(grid->size());
    for (std::size_t r = 0; r < values.size(); ++r) {
        const long i = values[r].first;
        if (i < 0 || i >= grid->size()) throw ConfigError("solution file: node index out of range");
        for (int k = 0; k < n; ++k)
            if (std::abs(coords[r][k] - grid->nodes(k, i)) > 1e-12)
                throw ConfigError("solution file: node coordinates do not match the grid");
        u(i) = coords[r][n];
    }
    out.field = GraphField(grid, u);
    return out;
}

StoredSolution load_solution(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open solution file " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_solution(os.str());
}

}  // namespace hypgraph
