#ifndef HYPGRAPH_CLI_HPP
#define HYPGRAPH_CLI_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hypgraph/diagnostics.hpp"

namespace hypgraph {

// Sections of key = value pairs, in lexical order for stable output.
using ConfigDocument = std::map<std::string, std::map<std::string, std::string>>;

struct OutputOptions {
    std::string directory = "hypgraph_out";
    bool table = true;
    bool structured = true;
    bool plot_data = false;
};

struct RunConfig {
    DomainSpec domain;
    int resolution = 65;
    SolveConfig solve;
    std::vector<double> eps_schedule;  // continue-eps only; empty means {solve.eps}
    OutputOptions output;
    std::uint64_t seed = 7;
    DiagnosticsOptions diagnostics;

    // Throws ConfigError naming the offending key.
    void validate() const;
};

// [section] headers, key = value lines, '#' or ';' comments.
ConfigDocument parse_config_text(const std::string& text);
// HYPGRAPH_<SECTION>_<KEY>=value overrides (section and key upper-cased).
void apply_env_overrides(ConfigDocument& doc, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> process_environment();
RunConfig run_config_from(const ConfigDocument& doc);
std::string render_config(const RunConfig& config);

// Solution files: '#' header lines in config syntax, then one row per node
//   index y_1..y_n u omega kappa_1..kappa_n margin
// with margin = lambda_min(A[u]) / cos(eps).
struct StoredSolution {
    RunConfig config;
    std::vector<int> lattice;
    GraphField field;
};

std::string solution_text(const GraphField& field, const RunConfig& config);
// Interior nodes only, same columns.
std::string plot_text(const GraphField& field, const RunConfig& config);
StoredSolution parse_solution(const std::string& text);
StoredSolution load_solution(const std::string& path);

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitConvergence = 2, kExitVerification = 3 };

// Entry point of the command line tool.
int cli_main(int argc, char** argv);

}  // namespace hypgraph

#endif
