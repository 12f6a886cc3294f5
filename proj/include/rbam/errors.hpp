#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rbam {

/// Base class of every error raised by the library. Argument validation
/// uses std::invalid_argument directly.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Assembly produced a matrix that is not SPD (broken mesh).
class AssemblyError : public Error {
public:
    using Error::Error;
};

/// Active-set iteration did not settle within the iteration budget.
class SolverDivergence : public Error {
public:
    SolverDivergence(const std::string& what, double primal_violation, double dual_violation)
        : Error(what), primal_violation_(primal_violation), dual_violation_(dual_violation) {}

    double primal_violation() const noexcept { return primal_violation_; }
    double dual_violation() const noexcept { return dual_violation_; }

private:
    double primal_violation_;
    double dual_violation_;
};

/// A linear system required by a solver was singular.
class NumericalBreakdown : public Error {
public:
    using Error::Error;
};

/// Basis Gram matrix too close to singular for a V-projection.
class IllConditionedBasis : public Error {
public:
    using Error::Error;
};

/// Input vectors vanish where a direction is required (POD of zeros, angle of zero).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// A greedy loop ran out of new directions before reaching its budget.
class SaturationError : public Error {
public:
    SaturationError(const std::string& what, std::size_t achieved)
        : Error(what), achieved_(achieved) {}

    std::size_t achieved() const noexcept { return achieved_; }

private:
    std::size_t achieved_;
};

class BasisSaturation : public SaturationError {
public:
    using SaturationError::SaturationError;
};

class ConeSaturation : public SaturationError {
public:
    using SaturationError::SaturationError;
};

/// Reduced primal/dual coupling lost full column rank.
class InfSupFailure : public Error {
public:
    using Error::Error;
};

/// Reduced model data is inconsistent (singular reduced operators, bad recomputation).
class ModelCorruption : public Error {
public:
    using Error::Error;
};

/// Model file could not be read or failed validation.
class LoadError : public Error {
public:
    using Error::Error;
};

class VersionMismatch : public LoadError {
public:
    using LoadError::LoadError;
};

/// Run configuration could not be parsed or holds out-of-range values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A required input file does not exist.
class MissingArtifact : public Error {
public:
    using Error::Error;
};

/// Runs fn and appends context to solver errors without changing their type.
template <typename Fn>
auto with_context(const std::string& context, Fn&& fn) {
    try {
        return fn();
    } catch (const SolverDivergence& e) {
        throw SolverDivergence(e.what() + context, e.primal_violation(), e.dual_violation());
    } catch (const NumericalBreakdown& e) {
        throw NumericalBreakdown(e.what() + context);
    }
}

}  // namespace rbam
