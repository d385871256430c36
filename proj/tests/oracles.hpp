#pragma once

// Reference implementations used only by tests. They share no code with the
// library beyond the Circuit/Gate value types.

#include "peepopt/circuit.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline auto gate2(peepopt::Gate const& g) -> Mat
{
    cplx const i{0.0, 1.0};
    Mat m(2, 2);
    double const t = g.params[0];
    switch (g.kind) {
    case peepopt::GateKind::RX:
        m << std::cos(t / 2), -i * std::sin(t / 2), -i * std::sin(t / 2), std::cos(t / 2);
        break;
    case peepopt::GateKind::RY:
        m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
        break;
    case peepopt::GateKind::RZ:
        m << std::exp(-i * t / 2.0), 0.0, 0.0, std::exp(i * t / 2.0);
        break;
    case peepopt::GateKind::U3: {
        double const phi = g.params[1], lam = g.params[2];
        m << std::cos(t / 2), -std::exp(i * lam) * std::sin(t / 2), std::exp(i * phi) * std::sin(t / 2),
            std::exp(i * (phi + lam)) * std::cos(t / 2);
        break;
    }
    case peepopt::GateKind::CX: break;
    }
    return m;
}

inline auto kron(Mat const& a, Mat const& b) -> Mat
{
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) { out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b; }
    }
    return out;
}

/// Full-register matrix of one gate built from Kronecker products, with
/// qubit 0 as the rightmost factor.
inline auto full_gate(peepopt::Gate const& g, std::size_t n) -> Mat
{
    Mat const id = Mat::Identity(2, 2);
    if (g.kind != peepopt::GateKind::CX) {
        Mat out = Mat::Identity(1, 1);
        for (std::size_t q = n; q-- > 0;) { out = kron(out, q == g.qubits[0] ? gate2(g) : id); }
        return out;
    }
    Mat p0 = Mat::Zero(2, 2), p1 = Mat::Zero(2, 2), x = Mat::Zero(2, 2);
    p0(0, 0) = 1;
    p1(1, 1) = 1;
    x(0, 1) = x(1, 0) = 1;
    Mat a = Mat::Identity(1, 1), b = Mat::Identity(1, 1);
    for (std::size_t q = n; q-- > 0;) {
        if (q == g.qubits[0]) {
            a = kron(a, p0);
            b = kron(b, p1);
        } else if (q == g.qubits[1]) {
            a = kron(a, id);
            b = kron(b, x);
        } else {
            a = kron(a, id);
            b = kron(b, id);
        }
    }
    return a + b;
}

inline auto unitary(peepopt::Circuit const& c) -> Mat
{
    auto const dim = Eigen::Index{1} << c.num_qubits();
    Mat u = Mat::Identity(dim, dim);
    for (auto const& g : c.gates()) { u = full_gate(g, c.num_qubits()) * u; }
    return u;
}

/// Statevector evolution from |0...0> by direct amplitude updates.
inline auto statevector(peepopt::Circuit const& c) -> Vec
{
    auto const dim = std::size_t{1} << c.num_qubits();
    Vec psi = Vec::Zero(static_cast<Eigen::Index>(dim));
    psi(0) = 1.0;
    for (auto const& g : c.gates()) {
        if (g.kind == peepopt::GateKind::CX) {
            auto const cb = std::size_t{1} << g.qubits[0], tb = std::size_t{1} << g.qubits[1];
            for (std::size_t s = 0; s < dim; ++s) {
                if ((s & cb) && !(s & tb)) { std::swap(psi(static_cast<Eigen::Index>(s)), psi(static_cast<Eigen::Index>(s | tb))); }
            }
            continue;
        }
        Mat const m = gate2(g);
        auto const bit = std::size_t{1} << g.qubits[0];
        for (std::size_t s = 0; s < dim; ++s) {
            if (s & bit) { continue; }
            auto const i0 = static_cast<Eigen::Index>(s), i1 = static_cast<Eigen::Index>(s | bit);
            cplx const a = psi(i0), b = psi(i1);
            psi(i0) = m(0, 0) * a + m(0, 1) * b;
            psi(i1) = m(1, 0) * a + m(1, 1) * b;
        }
    }
    return psi;
}

inline auto hs(Mat const& u, Mat const& v) -> double
{
    return 1.0 - std::abs((u.adjoint() * v).trace()) / static_cast<double>(u.rows());
}

/// Jensen-Shannon divergence via the entropy form H(m) - (H(p) + H(q)) / 2.
inline auto jsd_entropy(std::vector<double> const& p, std::vector<double> const& q) -> double
{
    auto h = [](std::vector<double> const& d) {
        double s = 0.0;
        for (double x : d) {
            if (x > 0) { s -= x * std::log(x); }
        }
        return s / std::log(2.0);
    };
    std::vector<double> m(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) { m[i] = 0.5 * (p[i] + q[i]); }
    return h(m) - 0.5 * (h(p) + h(q));
}

inline auto random_circuit(std::size_t n, std::size_t gates, std::mt19937_64& rng, double cx_fraction = 0.35)
    -> peepopt::Circuit
{
    std::uniform_real_distribution<double> angle{-M_PI, M_PI};
    std::uniform_real_distribution<double> unit{0.0, 1.0};
    std::uniform_int_distribution<std::uint32_t> qubit{0, static_cast<std::uint32_t>(n - 1)};
    peepopt::Circuit c{n};
    for (std::size_t i = 0; i < gates; ++i) {
        if (n > 1 && unit(rng) < cx_fraction) {
            auto a = qubit(rng), b = qubit(rng);
            while (b == a) { b = qubit(rng); }
            c.cx(a, b);
            continue;
        }
        auto const q = qubit(rng);
        switch (rng() % 4) {
        case 0: c.rx(q, angle(rng)); break;
        case 1: c.ry(q, angle(rng)); break;
        case 2: c.rz(q, angle(rng)); break;
        default: {
            double const t = angle(rng), p = angle(rng), l = angle(rng);
            c.u3(q, t, p, l);
            break;
        }
        }
    }
    return c;
}

/// Haar-ish random unitary from the QR of a complex Gaussian matrix.
inline auto random_unitary(Eigen::Index dim, std::mt19937_64& rng) -> Mat
{
    std::normal_distribution<double> n01;
    Mat z(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) { z(r, c) = cplx{n01(rng), n01(rng)}; }
    }
    Eigen::HouseholderQR<Mat> qr{z};
    Mat q = qr.householderQ();
    Mat const r = qr.matrixQR();
    for (Eigen::Index k = 0; k < dim; ++k) { q.col(k) *= r(k, k) / std::abs(r(k, k)); }
    return q;
}

} // namespace oracle
