#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "spinproj/types.hpp"

namespace spinproj {

/// Two-electron integrals (pq|rs) in chemists' notation over L spatial
/// orbitals, stored once per 8-fold permutational symmetry orbit.
class TwoElectronIntegrals {
  public:
    TwoElectronIntegrals() = default;
    explicit TwoElectronIntegrals(int n_orbitals);

    int n_orbitals() const { return L_; }

    double get(int p, int q, int r, int s) const {
        return data_[canonical_index(p, q, r, s)];
    }
    void set(int p, int q, int r, int s, double value) {
        data_[canonical_index(p, q, r, s)] = value;
    }

    std::size_t canonical_index(int p, int q, int r, int s) const;
    std::size_t size() const { return data_.size(); }

    bool operator==(const TwoElectronIntegrals&) const = default;

  private:
    int L_ = 0;
    std::vector<double> data_;
};

/// One- and two-electron integrals plus the scalar core energy, all in an
/// orthonormal orbital basis.
struct IntegralSet {
    Eigen::MatrixXd h;
    TwoElectronIntegrals v;
    double core_energy = 0.0;

    int n_orbitals() const { return static_cast<int>(h.rows()); }
};

enum class Spin : int { Up = 0, Down = 1 };

/// Dense rank-4 tensor over L^4, chemists' index order (p,q,r,s).
struct Tensor4 {
    int L = 0;
    std::vector<double> data;

    Tensor4() = default;
    explicit Tensor4(int n) : L(n), data(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

    double operator()(int p, int q, int r, int s) const {
        return data[((static_cast<std::size_t>(p) * L + q) * L + r) * L + s];
    }
    double& operator()(int p, int q, int r, int s) {
        return data[((static_cast<std::size_t>(p) * L + q) * L + r) * L + s];
    }
};

/// General second-quantized one- plus two-body operator with spin-dependent
/// blocks over a common orthonormal spatial basis of L orbitals:
///
///   O = scalar + sum_{(s,t)} sum_{pq} h^{st}_{pq} b+_{p s} b_{q t}
///       + 1/2 sum_{(s,s',t,t')} sum_{pqrs} V_{pqrs} b+_{p s} b+_{r t} b_{s t'} b_{q s'}
///
/// Two-body blocks are keyed by the spin quadruple (s, s', t, t'); electron 1
/// scatters q,s' -> p,s and electron 2 scatters s,t' -> r,t. Blocks must come
/// in electron-exchange symmetric pairs. Tensors are shared so that the four
/// spin-diagonal Hamiltonian channels alias one physical (pq|rs).
struct SpinBlockedOperator {
    using OneBodyKey = std::pair<Spin, Spin>;
    using TwoBodyKey = std::array<Spin, 4>;
    struct TwoBodyBlock {
        double coef = 1.0;
        std::shared_ptr<const Tensor4> tensor;
    };

    int n_orbitals = 0;
    double scalar = 0.0;
    std::map<OneBodyKey, Eigen::MatrixXd> one_body;
    std::map<TwoBodyKey, TwoBodyBlock> two_body;
};

/// Parse an FCIDUMP stream (namelist header, then "value i j k l" records).
std::pair<SystemSpec, IntegralSet> parse_fcidump(std::istream& in);
std::pair<SystemSpec, IntegralSet> parse_fcidump_file(const std::string& path);

/// Write the canonical-unique entries back out; parse(write(x)) is
/// bit-identical to x.
void write_fcidump(const SystemSpec& spec, const IntegralSet& ints, std::ostream& out);

/// Hamiltonian as a generic spin-blocked operator (dense two-body tensor).
SpinBlockedOperator hamiltonian_operator(const IntegralSet& ints);

/// Exact second-quantized tensors of S^2 over 2L spin-orbitals: 3/4 identity
/// one-body per sector, +-1/2 delta.delta z-z blocks (template convention)
/// and unit spin-flip exchange blocks realizing S+S- + S-S+.
SpinBlockedOperator s2_operator(int n_orbitals);

/// Restrict an operator to the subspace spanned by the orthonormal columns
/// of Q (L x d). Exact for states whose occupied orbitals lie in span(Q).
SpinBlockedOperator project_operator(const SpinBlockedOperator& op,
                                     const Eigen::MatrixXd& Q);

/// Rotate an integral set by a square orthogonal matrix Q (columns = new
/// basis vectors in the old basis).
IntegralSet transform_integrals(const IntegralSet& ints, const Eigen::MatrixXd& Q);

} // namespace spinproj
