#ifndef HYPGRAPH_ERRORS_HPP
#define HYPGRAPH_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace hypgraph {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Caller broke a documented precondition (shape mismatch, asymmetric input...).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Spectrum left the open positive cone.
class AdmissibilityError : public std::runtime_error {
public:
    AdmissibilityError(const std::string& what, double lambda_min,
                       std::vector<long> nodes = {})
        : std::runtime_error(what), lambda_min_(lambda_min), nodes_(std::move(nodes)) {}

    double lambda_min() const { return lambda_min_; }
    const std::vector<long>& nodes() const { return nodes_; }

private:
    double lambda_min_;
    std::vector<long> nodes_;
};

// Gradient of f requested on the boundary of the cone.
class SingularGradientError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Parameters for which the problem (or a barrier construction) has no solution.
class InfeasibleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Unreadable or invalid run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hypgraph

#endif
