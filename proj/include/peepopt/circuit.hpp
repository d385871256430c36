#pragma once

// Gate-level circuit representation and exact unitary semantics.
//
// Basis convention: qubit 0 is the least-significant bit of a basis index,
// i.e. |q_{n-1} ... q_1 q_0> has index sum_i q_i 2^i. Every matrix in the
// library (unitaries, density matrices, outcome vectors) follows it.

#include "peepopt/errors.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace peepopt {

using complex_t = std::complex<double>;
using UnitaryMatrix = Eigen::MatrixXcd;
using Matrix2 = Eigen::Matrix2cd;

using qubit_t = std::uint32_t;

enum class GateKind : std::uint8_t { CX, RX, RY, RZ, U3 };

[[nodiscard]] constexpr auto param_count(GateKind kind) noexcept -> std::size_t
{
    switch (kind) {
    case GateKind::CX: return 0;
    case GateKind::U3: return 3;
    default: return 1;
    }
}

[[nodiscard]] constexpr auto arity(GateKind kind) noexcept -> std::size_t
{
    return kind == GateKind::CX ? 2 : 1;
}

[[nodiscard]] constexpr auto gate_name(GateKind kind) noexcept -> std::string_view
{
    switch (kind) {
    case GateKind::CX: return "cx";
    case GateKind::RX: return "rx";
    case GateKind::RY: return "ry";
    case GateKind::RZ: return "rz";
    case GateKind::U3: return "u3";
    }
    return "?";
}

/// One gate. `qubits[0]` is the control of a CX, `qubits[1]` its target.
/// Unused parameter and qubit slots are zero so that `==` is structural.
struct Gate {
    GateKind kind = GateKind::RZ;
    std::array<double, 3> params{};
    std::array<qubit_t, 2> qubits{};

    [[nodiscard]] auto angles() const noexcept -> std::span<double const>
    {
        return {params.data(), param_count(kind)};
    }
    [[nodiscard]] auto targets() const noexcept -> std::span<qubit_t const>
    {
        return {qubits.data(), arity(kind)};
    }

    static auto cx(qubit_t control, qubit_t target) -> Gate
    {
        return Gate{GateKind::CX, {}, {control, target}};
    }
    static auto rx(qubit_t q, double theta) -> Gate { return Gate{GateKind::RX, {theta, 0, 0}, {q, 0}}; }
    static auto ry(qubit_t q, double theta) -> Gate { return Gate{GateKind::RY, {theta, 0, 0}, {q, 0}}; }
    static auto rz(qubit_t q, double theta) -> Gate { return Gate{GateKind::RZ, {theta, 0, 0}, {q, 0}}; }
    static auto u3(qubit_t q, double theta, double phi, double lambda) -> Gate
    {
        return Gate{GateKind::U3, {theta, phi, lambda}, {q, 0}};
    }

    friend auto operator==(Gate const&, Gate const&) -> bool = default;
};

/// 2x2 matrix of a single-qubit gate kind with explicit angles.
[[nodiscard]] inline auto single_qubit_matrix(GateKind kind, std::span<double const> p) -> Matrix2
{
    using namespace std::complex_literals;
    Matrix2 m;
    switch (kind) {
    case GateKind::RX: {
        double const c = std::cos(p[0] / 2), s = std::sin(p[0] / 2);
        m << c, -1i * s, -1i * s, c;
        break;
    }
    case GateKind::RY: {
        double const c = std::cos(p[0] / 2), s = std::sin(p[0] / 2);
        m << c, -s, s, c;
        break;
    }
    case GateKind::RZ:
        m << std::exp(-0.5i * p[0]), 0.0, 0.0, std::exp(0.5i * p[0]);
        break;
    case GateKind::U3: {
        double const c = std::cos(p[0] / 2), s = std::sin(p[0] / 2);
        m << c, -std::exp(1i * p[2]) * s, std::exp(1i * p[1]) * s, std::exp(1i * (p[1] + p[2])) * c;
        break;
    }
    case GateKind::CX: throw CircuitError{"cx has no single-qubit matrix"};
    }
    return m;
}

[[nodiscard]] inline auto single_qubit_matrix(Gate const& g) -> Matrix2
{
    return single_qubit_matrix(g.kind, g.angles());
}

/// Ordered gate list over `num_qubits` qubits. Every gate is validated on
/// insertion, so a constructed Circuit always satisfies its invariants.
class Circuit {
  public:
    Circuit() = default;
    explicit Circuit(std::size_t num_qubits) : num_qubits_{num_qubits}
    {
        if (num_qubits == 0) { throw CircuitError{"circuit needs at least one qubit"}; }
    }
    Circuit(std::size_t num_qubits, std::vector<Gate> gates) : Circuit{num_qubits}
    {
        for (auto const& g : gates) { validate(g); }
        gates_ = std::move(gates);
    }

    [[nodiscard]] auto num_qubits() const noexcept -> std::size_t { return num_qubits_; }
    [[nodiscard]] auto gates() const noexcept -> std::vector<Gate> const& { return gates_; }
    [[nodiscard]] auto size() const noexcept -> std::size_t { return gates_.size(); }
    [[nodiscard]] auto empty() const noexcept -> bool { return gates_.empty(); }

    auto push(Gate const& g) -> Circuit&
    {
        validate(g);
        gates_.push_back(g);
        return *this;
    }
    auto cx(qubit_t c, qubit_t t) -> Circuit& { return push(Gate::cx(c, t)); }
    auto rx(qubit_t q, double a) -> Circuit& { return push(Gate::rx(q, a)); }
    auto ry(qubit_t q, double a) -> Circuit& { return push(Gate::ry(q, a)); }
    auto rz(qubit_t q, double a) -> Circuit& { return push(Gate::rz(q, a)); }
    auto u3(qubit_t q, double t, double p, double l) -> Circuit& { return push(Gate::u3(q, t, p, l)); }

    /// Appends all gates of `other`, which must be over the same width.
    auto append(Circuit const& other) -> Circuit&
    {
        if (other.num_qubits_ != num_qubits_) { throw CircuitError{"append: qubit count mismatch"}; }
        gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
        return *this;
    }

    friend auto operator==(Circuit const&, Circuit const&) -> bool = default;

  private:
    void validate(Gate const& g) const
    {
        if (num_qubits_ == 0) { throw CircuitError{"gate added to a zero-width circuit"}; }
        auto const qs = g.targets();
        for (auto q : qs) {
            if (q >= num_qubits_) {
                throw CircuitError{"qubit index " + std::to_string(q) + " out of range for "
                                   + std::to_string(num_qubits_) + "-qubit circuit"};
            }
        }
        if (qs.size() == 2 && qs[0] == qs[1]) { throw CircuitError{"cx control equals target"}; }
        for (auto a : g.angles()) {
            if (!std::isfinite(a)) { throw CircuitError{"gate angle is not finite"}; }
        }
        for (std::size_t i = param_count(g.kind); i < g.params.size(); ++i) {
            if (g.params[i] != 0.0) { throw CircuitError{"unused gate parameter must be zero"}; }
        }
        if (arity(g.kind) == 1 && g.qubits[1] != 0) { throw CircuitError{"unused qubit slot must be zero"}; }
    }

    std::size_t num_qubits_ = 0;
    std::vector<Gate> gates_;
};

// --- in-place gate application ------------------------------------------------

/// m <- G m for a single-qubit matrix `g` acting on qubit `q`.
inline void apply_left(UnitaryMatrix& m, Matrix2 const& g, qubit_t q)
{
    auto const bit = Eigen::Index{1} << q;
    auto const dim = m.rows();
    for (Eigen::Index i0 = 0; i0 < dim; ++i0) {
        if (i0 & bit) { continue; }
        auto const i1 = i0 | bit;
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            complex_t const a = m(i0, c), b = m(i1, c);
            m(i0, c) = g(0, 0) * a + g(0, 1) * b;
            m(i1, c) = g(1, 0) * a + g(1, 1) * b;
        }
    }
}

inline void apply_cx_left(UnitaryMatrix& m, qubit_t control, qubit_t target)
{
    auto const cbit = Eigen::Index{1} << control, tbit = Eigen::Index{1} << target;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if ((i & cbit) && !(i & tbit)) { m.row(i).swap(m.row(i | tbit)); }
    }
}

/// m <- m G for a single-qubit matrix `g` acting on qubit `q`.
inline void apply_right(UnitaryMatrix& m, Matrix2 const& g, qubit_t q)
{
    auto const bit = Eigen::Index{1} << q;
    for (Eigen::Index j0 = 0; j0 < m.cols(); ++j0) {
        if (j0 & bit) { continue; }
        auto const j1 = j0 | bit;
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            complex_t const a = m(r, j0), b = m(r, j1);
            m(r, j0) = a * g(0, 0) + b * g(1, 0);
            m(r, j1) = a * g(0, 1) + b * g(1, 1);
        }
    }
}

inline void apply_cx_right(UnitaryMatrix& m, qubit_t control, qubit_t target)
{
    auto const cbit = Eigen::Index{1} << control, tbit = Eigen::Index{1} << target;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if ((j & cbit) && !(j & tbit)) { m.col(j).swap(m.col(j | tbit)); }
    }
}

inline void apply_left(UnitaryMatrix& m, Gate const& g)
{
    if (g.kind == GateKind::CX) {
        apply_cx_left(m, g.qubits[0], g.qubits[1]);
    } else {
        apply_left(m, single_qubit_matrix(g), g.qubits[0]);
    }
}

inline void apply_right(UnitaryMatrix& m, Gate const& g)
{
    if (g.kind == GateKind::CX) {
        apply_cx_right(m, g.qubits[0], g.qubits[1]);
    } else {
        apply_right(m, single_qubit_matrix(g), g.qubits[0]);
    }
}

// --- operations ---------------------------------------------------------------

/// Product of gate unitaries in application order: U = G_{L-1} ... G_1 G_0.
[[nodiscard]] inline auto unitary_of(Circuit const& circuit) -> UnitaryMatrix
{
    auto const dim = Eigen::Index{1} << circuit.num_qubits();
    UnitaryMatrix u = UnitaryMatrix::Identity(dim, dim);
    for (auto const& g : circuit.gates()) { apply_left(u, g); }
    return u;
}

[[nodiscard]] inline auto cnot_count(Circuit const& circuit) noexcept -> std::size_t
{
    std::size_t n = 0;
    for (auto const& g : circuit.gates()) { n += g.kind == GateKind::CX ? 1 : 0; }
    return n;
}

/// Local-to-global qubit map of one block: `embedding[local] = global`.
using QubitMap = std::vector<qubit_t>;

/// Rewrites `local` through `embedding` and appends its gates to `out`.
inline void append_embedded(Circuit& out, Circuit const& local, QubitMap const& embedding)
{
    if (embedding.size() != local.num_qubits()) {
        throw EmbeddingError{"embedding has " + std::to_string(embedding.size()) + " entries for a "
                             + std::to_string(local.num_qubits()) + "-qubit block"};
    }
    std::vector<bool> seen(out.num_qubits(), false);
    for (auto q : embedding) {
        if (q >= out.num_qubits()) {
            throw EmbeddingError{"embedding target " + std::to_string(q) + " out of range"};
        }
        if (seen[q]) { throw EmbeddingError{"embedding is not injective"}; }
        seen[q] = true;
    }
    for (auto g : local.gates()) {
        for (std::size_t i = 0; i < arity(g.kind); ++i) { g.qubits[i] = embedding[g.qubits[i]]; }
        out.push(g);
    }
}

/// Concatenates blocks in order, each rewritten through its embedding, into
/// an `n`-qubit circuit.
[[nodiscard]] inline auto compose(std::span<Circuit const> blocks, std::span<QubitMap const> embeddings,
                                  std::size_t n) -> Circuit
{
    if (blocks.size() != embeddings.size()) {
        throw EmbeddingError{"compose: one embedding per block required"};
    }
    Circuit out{n};
    for (std::size_t b = 0; b < blocks.size(); ++b) { append_embedded(out, blocks[b], embeddings[b]); }
    return out;
}

} // namespace peepopt
