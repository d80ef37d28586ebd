#include "hypgraph/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "hypgraph/report.hpp"

extern char** environ;

namespace hypgraph {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double to_double(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    char* end = nullptr;
    const double x = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(x))
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return x;
}

long to_long(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    char* end = nullptr;
    const long x = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size())
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    const std::string t = lower(trim(v));
    if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
    if (t == "false" || t == "no" || t == "0" || t == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(v);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const std::string& s : split_list(v)) out.push_back(to_double(key, s));
    return out;
}

Eigen::VectorXd to_vector(const std::string& key, const std::string& v) {
    const std::vector<double> d = to_doubles(key, v);
    if (d.empty()) throw ConfigError(key + ": empty vector");
    return Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
}

std::string join(const Eigen::VectorXd& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v(i));
    return s;
}

// Reads known keys and rejects the rest.
class SectionReader {
public:
    SectionReader(const ConfigDocument& doc, const std::string& name) : name_(name) {
        auto it = doc.find(name);
        if (it != doc.end()) entries_ = it->second;
    }
    const std::string* get(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return nullptr;
        used_.push_back(key);
        return &it->second;
    }
    std::string key(const std::string& k) const { return name_ + "." + k; }
    void finish() const {
        for (const auto& [k, v] : entries_)
            if (std::find(used_.begin(), used_.end(), k) == used_.end())
                throw ConfigError("unknown key " + name_ + "." + k);
    }

private:
    std::string name_;
    std::map<std::string, std::string> entries_;
    std::vector<std::string> used_;
};

const std::vector<std::string> kSections = {"diagnostics", "domain", "grid", "output",
                                            "problem",     "run",    "solver"};

}  // namespace

ConfigDocument parse_config_text(const std::string& text) {
    ConfigDocument doc;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = lower(trim(line.substr(1, line.size() - 2)));
            if (std::find(kSections.begin(), kSections.end(), section) == kSections.end())
                throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" +
                                  section + "]");
            doc[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        const std::string key = lower(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        doc[section][key] = trim(line.substr(eq + 1));
    }
    return doc;
}

void apply_env_overrides(ConfigDocument& doc, const std::map<std::string, std::string>& env) {
    const std::string prefix = "HYPGRAPH_";
    for (const auto& [name, value] : env) {
        if (name.rfind(prefix, 0) != 0) continue;
        const std::string rest = lower(name.substr(prefix.size()));
        for (const std::string& section : kSections) {
            if (rest.size() > section.size() + 1 && rest.compare(0, section.size(), section) == 0 &&
                rest[section.size()] == '_') {
                doc[section][rest.substr(section.size() + 1)] = value;
                break;
            }
        }
    }
}

std::map<std::string, std::string> process_environment() {
    std::map<std::string, std::string> env;
    for (char** e = environ; e && *e; ++e) {
        const std::string kv = *e;
        const auto eq = kv.find('=');
        if (eq != std::string::npos) env[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return env;
}

RunConfig run_config_from(const ConfigDocument& doc) {
    for (const auto& [section, entries] : doc)
        if (std::find(kSections.begin(), kSections.end(), section) == kSections.end())
            throw ConfigError("unknown section [" + section + "]");
    RunConfig rc;
    const std::string* v = nullptr;

    {
        SectionReader s(doc, "domain");
        const std::string shape = (v = s.get("shape")) ? lower(trim(*v)) : "disk";
        const double clearance = (v = s.get("clearance")) ? to_double(s.key("clearance"), *v) : 1e-3;
        if (shape == "rectangle") {
            const std::string* lo = s.get("lo");
            const std::string* hi = s.get("hi");
            if (!lo || !hi) throw ConfigError("domain: rectangle needs lo and hi");
            rc.domain = DomainSpec::rectangle(to_vector(s.key("lo"), *lo),
                                              to_vector(s.key("hi"), *hi), clearance);
        } else if (shape == "disk" || shape == "annulus") {
            Eigen::VectorXd center(2);
            center << 0.0, 2.0;
            if ((v = s.get("center"))) center = to_vector(s.key("center"), *v);
            if (shape == "disk") {
                const double r = (v = s.get("radius")) ? to_double(s.key("radius"), *v) : 0.5;
                rc.domain = DomainSpec::disk(center, r, clearance);
            } else {
                const std::string* ri = s.get("r_in");
                const std::string* ro = s.get("r_out");
                if (!ri || !ro) throw ConfigError("domain: annulus needs r_in and r_out");
                rc.domain = DomainSpec::annulus(center, to_double(s.key("r_in"), *ri),
                                                to_double(s.key("r_out"), *ro), clearance);
            }
        } else {
            throw ConfigError("domain.shape: expected rectangle, disk or annulus, got '" + shape +
                              "'");
        }
        s.finish();
    }
    {
        SectionReader s(doc, "grid");
        if ((v = s.get("resolution"))) rc.resolution = static_cast<int>(to_long(s.key("resolution"), *v));
        s.finish();
    }
    {
        SectionReader s(doc, "problem");
        std::string fn = "quotient(n=2,l=0)";
        if ((v = s.get("function"))) fn = trim(*v);
        try {
            rc.solve.spec = SymmetricFunctionSpec::parse(fn);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("problem.function: ") + e.what());
        }
        if ((v = s.get("sigma"))) rc.solve.sigma = to_double(s.key("sigma"), *v);
        if ((v = s.get("eps"))) rc.solve.eps = to_double(s.key("eps"), *v);
        if ((v = s.get("eps_schedule"))) {
            rc.eps_schedule = to_doubles(s.key("eps_schedule"), *v);
            if (rc.eps_schedule.empty()) throw ConfigError("problem.eps_schedule: empty list");
            if (!s.get("eps")) rc.solve.eps = rc.eps_schedule.front();
        }
        s.finish();
    }
    {
        SectionReader s(doc, "solver");
        SolveConfig& c = rc.solve;
        if ((v = s.get("newton_tol"))) c.newton_tol = to_double(s.key("newton_tol"), *v);
        if ((v = s.get("max_newton_iters")))
            c.max_newton_iters = static_cast<int>(to_long(s.key("max_newton_iters"), *v));
        if ((v = s.get("damping_factor"))) c.damping.factor = to_double(s.key("damping_factor"), *v);
        if ((v = s.get("max_halvings")))
            c.damping.max_halvings = static_cast<int>(to_long(s.key("max_halvings"), *v));
        if ((v = s.get("admissibility_margin")))
            c.admissibility_margin = to_double(s.key("admissibility_margin"), *v);
        if ((v = s.get("initial_step"))) c.homotopy.initial_step = to_double(s.key("initial_step"), *v);
        if ((v = s.get("min_step"))) c.homotopy.min_step = to_double(s.key("min_step"), *v);
        if ((v = s.get("max_step"))) c.homotopy.max_step = to_double(s.key("max_step"), *v);
        if ((v = s.get("fast_iterations")))
            c.homotopy.fast_iterations = static_cast<int>(to_long(s.key("fast_iterations"), *v));
        s.finish();
    }
    {
        SectionReader s(doc, "output");
        if ((v = s.get("directory"))) rc.output.directory = trim(*v);
        if ((v = s.get("formats"))) {
            rc.output.table = rc.output.structured = false;
            for (const std::string& f : split_list(*v)) {
                const std::string fl = lower(f);
                if (fl == "table") rc.output.table = true;
                else if (fl == "structured") rc.output.structured = true;
                else throw ConfigError("output.formats: unknown format '" + f + "'");
            }
        }
        if ((v = s.get("plot_data"))) rc.output.plot_data = to_bool(s.key("plot_data"), *v);
        s.finish();
    }
    {
        SectionReader s(doc, "run");
        if ((v = s.get("seed"))) {
            const long seed = to_long(s.key("seed"), *v);
            if (seed < 0) throw ConfigError("run.seed must be non-negative");
            rc.seed = static_cast<std::uint64_t>(seed);
        }
        s.finish();
    }
    {
        SectionReader s(doc, "diagnostics");
        DiagnosticsOptions& d = rc.diagnostics;
        if ((v = s.get("identity_samples")))
            d.identity_samples = static_cast<int>(to_long(s.key("identity_samples"), *v));
        if ((v = s.get("lower_bound_samples")))
            d.lower_bound_samples = static_cast<int>(to_long(s.key("lower_bound_samples"), *v));
        if ((v = s.get("identity_step"))) d.identity_step = to_double(s.key("identity_step"), *v);
        s.finish();
    }
    rc.diagnostics.seed = rc.seed;
    return rc;
}

void RunConfig::validate() const {
    try {
        domain.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("domain: ") + e.what());
    }
    if (resolution < 8) throw ConfigError("grid.resolution must be at least 8");
    if (!(solve.sigma > 0.0 && solve.sigma < 1.0))
        throw ConfigError("problem.sigma must lie in (0,1), got " + format_double(solve.sigma));
    std::vector<double> sched = eps_schedule.empty() ? std::vector<double>{solve.eps} : eps_schedule;
    for (std::size_t i = 0; i < sched.size(); ++i) {
        if (!(sched[i] > 0.0 && sched[i] < M_PI / 2))
            throw ConfigError("problem.eps must lie in (0, pi/2)");
        if (i > 0 && !(sched[i] < sched[i - 1]))
            throw ConfigError("problem.eps_schedule must be strictly decreasing");
    }
    const double eps_min = *std::min_element(sched.begin(), sched.end());
    if (!(solve.sigma < std::cos(eps_min)))
        throw ConfigError("problem.sigma must be smaller than cos(eps) = " +
                          format_double(std::cos(eps_min)));
    SolveConfig c = solve;
    c.eps = eps_min;
    try {
        c.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("solver: ") + e.what());
    }
    if (diagnostics.identity_samples < 0 || diagnostics.lower_bound_samples < 0)
        throw ConfigError("diagnostics sample counts must be non-negative");
    if (!(diagnostics.identity_step > 0.0))
        throw ConfigError("diagnostics.identity_step must be positive");
    if (output.directory.empty()) throw ConfigError("output.directory must not be empty");
}

std::string render_config(const RunConfig& c) {
    std::ostringstream os;
    const DomainSpec& d = c.domain;
    os << "[domain]\n";
    switch (d.shape) {
        case DomainShape::Rectangle:
            os << "shape = rectangle\nlo = " << join(d.lo) << "\nhi = " << join(d.hi) << "\n";
            break;
        case DomainShape::Disk:
            os << "shape = disk\ncenter = " << join(d.center) << "\nradius = "
               << format_double(d.radius) << "\n";
            break;
        case DomainShape::Annulus:
            os << "shape = annulus\ncenter = " << join(d.center) << "\nr_in = "
               << format_double(d.r_in) << "\nr_out = " << format_double(d.r_out) << "\n";
            break;
    }
    os << "clearance = " << format_double(d.clearance) << "\n";
    os << "[grid]\nresolution = " << c.resolution << "\n";
    os << "[problem]\nfunction = " << c.solve.spec.describe() << "\nsigma = "
       << format_double(c.solve.sigma) << "\neps = " << format_double(c.solve.eps) << "\n";
    if (!c.eps_schedule.empty()) {
        os << "eps_schedule = ";
        for (std::size_t i = 0; i < c.eps_schedule.size(); ++i)
            os << (i ? ", " : "") << format_double(c.eps_schedule[i]);
        os << "\n";
    }
    const SolveConfig& s = c.solve;
    os << "[solver]\nnewton_tol = " << format_double(s.newton_tol)
       << "\nmax_newton_iters = " << s.max_newton_iters
       << "\ndamping_factor = " << format_double(s.damping.factor)
       << "\nmax_halvings = " << s.damping.max_halvings
       << "\nadmissibility_margin = " << format_double(s.admissibility_margin)
       << "\ninitial_step = " << format_double(s.homotopy.initial_step)
       << "\nmin_step = " << format_double(s.homotopy.min_step)
       << "\nmax_step = " << format_double(s.homotopy.max_step)
       << "\nfast_iterations = " << s.homotopy.fast_iterations << "\n";
    os << "[run]\nseed = " << c.seed << "\n";
    os << "[diagnostics]\nidentity_samples = " << c.diagnostics.identity_samples
       << "\nlower_bound_samples = " << c.diagnostics.lower_bound_samples
       << "\nidentity_step = " << format_double(c.diagnostics.identity_step) << "\n";
    return os.str();
}

}  // namespace hypgraph
