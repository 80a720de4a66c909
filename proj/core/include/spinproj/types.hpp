#pragma once

#include <stdexcept>
#include <string>

namespace spinproj {

/// Raised for malformed input files or inconsistent configuration.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when an SCF or iterative eigensolver fails to converge.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a determinant-space or guard cap is exceeded.
struct SizeCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when internal numerical consistency checks fail.
struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a spin constraint cannot be met within the multiplier range.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised for arguments outside an operation's domain.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Particle-number and basis-size bookkeeping for one system.
struct SystemSpec {
    int n_orbitals = 0;       ///< spatial orbitals L
    int n_alpha = 0;
    int n_beta = 0;
    int ms2 = 0;              ///< 2*Ms = n_alpha - n_beta
    double core_energy = 0.0; ///< Hartree

    int n_electrons() const { return n_alpha + n_beta; }
    double ms() const { return 0.5 * (n_alpha - n_beta); }

    void validate() const {
        if (n_orbitals < 1)
            throw DomainError("SystemSpec: n_orbitals must be >= 1");
        if (n_alpha < 0 || n_beta < 0)
            throw DomainError("SystemSpec: negative electron count");
        if (n_alpha + n_beta > 2 * n_orbitals)
            throw DomainError("SystemSpec: more electrons than spin-orbitals");
        if (n_alpha - n_beta != ms2)
            throw DomainError("SystemSpec: ms2 inconsistent with n_alpha - n_beta");
    }
};

} // namespace spinproj
