#include "oracles.hpp"

#include "peepopt/noise.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace peepopt;

namespace {

/// Depolarizing channel as a Pauli twirl over the gate's qubits:
/// (1-p) rho + p/4^|S| sum_P P rho P, with every P built by Kronecker products.
auto pauli_twirl(oracle::Mat const& rho, Gate const& g, double p, std::size_t n) -> oracle::Mat
{
    using oracle::Mat;
    std::array<Mat, 4> paulis;
    paulis[0] = Mat::Identity(2, 2);
    paulis[1] = Mat::Zero(2, 2);
    paulis[1] << 0, 1, 1, 0;
    paulis[2] = Mat::Zero(2, 2);
    paulis[2] << 0, oracle::cplx{0, -1}, oracle::cplx{0, 1}, 0;
    paulis[3] = Mat::Zero(2, 2);
    paulis[3] << 1, 0, 0, -1;
    auto const qs = g.targets();
    std::size_t const terms = qs.size() == 1 ? 4 : 16;
    Mat sum = Mat::Zero(rho.rows(), rho.cols());
    for (std::size_t t = 0; t < terms; ++t) {
        Mat op = Mat::Identity(1, 1);
        for (std::size_t q = n; q-- > 0;) {
            std::size_t which = 0;
            if (q == qs[0]) { which = t % 4; }
            if (qs.size() == 2 && q == qs[1]) { which = t / 4; }
            op = oracle::kron(op, paulis[which]);
        }
        sum += op * rho * op.adjoint();
    }
    return (1.0 - p) * rho + p / static_cast<double>(terms) * sum;
}

auto reference_density(Circuit const& c, double p1, double p2) -> oracle::Mat
{
    auto const dim = Eigen::Index{1} << c.num_qubits();
    oracle::Mat rho = oracle::Mat::Zero(dim, dim);
    rho(0, 0) = 1;
    for (auto const& g : c.gates()) {
        auto const u = oracle::full_gate(g, c.num_qubits());
        rho = u * rho * u.adjoint();
        rho = pauli_twirl(rho, g, arity(g.kind) == 2 ? p2 : p1, c.num_qubits());
    }
    return rho;
}

auto x_circuit() -> Circuit
{
    Circuit c{1};
    c.u3(0, std::numbers::pi, 0, std::numbers::pi);
    return c;
}

auto dist(std::vector<double> p) -> OutcomeDistribution { return OutcomeDistribution{std::move(p)}; }

} // namespace

TEST(SimulateDensity, EmptyCircuitIsGroundState)
{
    auto const rho = simulate_density(Circuit{2}, NoiseModel{0.1, 0.1});
    EXPECT_EQ(rho.matrix(), DensityMatrix::ground(2).matrix());
}

TEST(SimulateDensity, DepolarizedXGate)
{
    auto const rho = simulate_density(x_circuit(), NoiseModel{0.1, 0.0});
    EXPECT_NEAR(rho.matrix()(0, 0).real(), 0.05, 1e-12);
    EXPECT_NEAR(rho.matrix()(1, 1).real(), 0.95, 1e-12);
    EXPECT_NEAR(std::abs(rho.matrix()(0, 1)), 0.0, 1e-12);
}

TEST(SimulateDensity, MatchesPauliTwirlOracle)
{
    std::mt19937_64 rng{55};
    for (int t = 0; t < 20; ++t) {
        auto const n = 1 + rng() % 4;
        auto const c = oracle::random_circuit(n, 20, rng);
        double const p1 = 0.002 * static_cast<double>(t), p2 = 0.01 * static_cast<double>(t);
        auto const rho = simulate_density(c, NoiseModel{p1, p2});
        EXPECT_LT((rho.matrix() - reference_density(c, p1, p2)).cwiseAbs().maxCoeff(), 1e-12) << "case " << t;
    }
}

TEST(SimulateDensity, NoiselessDiagonalMatchesStatevector)
{
    std::mt19937_64 rng{56};
    for (int t = 0; t < 50; ++t) {
        auto const n = 1 + rng() % 6;
        auto const c = oracle::random_circuit(n, 30, rng);
        auto const rho = simulate_density(c, NoiseModel::ideal());
        auto const psi = oracle::statevector(c);
        for (Eigen::Index i = 0; i < psi.size(); ++i) {
            EXPECT_NEAR(rho.matrix()(i, i).real(), std::norm(psi(i)), 1e-10);
        }
        EXPECT_LT((rho.matrix() - psi * psi.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(SimulateDensity, TraceHermitianAndPositive)
{
    std::mt19937_64 rng{57};
    for (double p : {0.001, 0.01, 0.05, 0.5, 1.0}) {
        for (int t = 0; t < 10; ++t) {
            auto const c = oracle::random_circuit(1 + rng() % 5, 25, rng);
            auto const rho = simulate_density(c, NoiseModel{p, p});
            EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
            EXPECT_NEAR(rho.trace().imag(), 0.0, 1e-10);
            EXPECT_LT((rho.matrix() - rho.matrix().adjoint()).cwiseAbs().maxCoeff(), 1e-10);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es{rho.matrix()};
            EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
        }
    }
}

TEST(SimulateDensity, RejectsWideCircuits)
{
    EXPECT_THROW((void)simulate_density(Circuit{13}, NoiseModel::ideal()), DimensionError);
}

TEST(NoiseModel, OverridesTakeTheLargestProbability)
{
    NoiseModel m{0.01, 0.02};
    m.overrides[1] = QubitNoise{0.3, std::nullopt};
    m.overrides[2] = QubitNoise{0.001, 0.5};
    EXPECT_EQ(m.gate_probability(Gate::rx(0, 0.1)), 0.01);
    EXPECT_EQ(m.gate_probability(Gate::rx(1, 0.1)), 0.3);
    EXPECT_EQ(m.gate_probability(Gate::rx(2, 0.1)), 0.01);
    EXPECT_EQ(m.gate_probability(Gate::cx(0, 1)), 0.02);
    EXPECT_EQ(m.gate_probability(Gate::cx(1, 2)), 0.5);

    auto const local = m.restricted({2, 5});
    EXPECT_EQ(local.gate_probability(Gate::rx(0, 0.1)), 0.01);
    EXPECT_EQ(local.gate_probability(Gate::cx(0, 1)), 0.5);
    EXPECT_EQ(local.gate_probability(Gate::cx(1, 0)), 0.5);
}

TEST(NoiseModel, OverrideChangesSimulation)
{
    NoiseModel m{0.0, 0.0};
    m.overrides[0] = QubitNoise{0.1, std::nullopt};
    auto const rho = simulate_density(x_circuit(), m);
    EXPECT_NEAR(rho.matrix()(0, 0).real(), 0.05, 1e-12);
}

TEST(NoiseModel, ValidateRejectsOutOfRange)
{
    EXPECT_THROW((NoiseModel{-0.1, 0.0}.validate()), ConfigError);
    EXPECT_THROW((NoiseModel{0.0, 1.5}.validate()), ConfigError);
    EXPECT_THROW((NoiseModel{0.0, std::nan("")}.validate()), ConfigError);
    NoiseModel r{0.0, 0.0, std::vector<double>{0.1, 2.0}, {}};
    EXPECT_THROW(r.validate(), ConfigError);
    NoiseModel o{0.0, 0.0};
    o.overrides[0] = QubitNoise{std::nullopt, -1.0};
    EXPECT_THROW(o.validate(), ConfigError);
    EXPECT_NO_THROW((NoiseModel{0.001, 0.01}.validate()));
}

TEST(MeasureDistribution, Examples)
{
    auto const ground = DensityMatrix::ground(1);
    EXPECT_EQ(measure_distribution(ground).probs, (std::vector<double>{1.0, 0.0}));
    DensityMatrix mixed{Eigen::MatrixXcd::Identity(2, 2) * 0.5};
    EXPECT_EQ(measure_distribution(mixed).probs, (std::vector<double>{0.5, 0.5}));
    auto const flipped = measure_distribution(ground, std::vector<double>{0.1});
    EXPECT_NEAR(flipped[0], 0.9, 1e-15);
    EXPECT_NEAR(flipped[1], 0.1, 1e-15);
}

TEST(MeasureDistribution, ReadoutActsPerBit)
{
    // |10> (q1 = 1) with flips 0.1 on q0 and 0.2 on q1: product of two binary channels.
    auto rho = DensityMatrix::ground(2);
    rho.matrix()(0, 0) = 0;
    rho.matrix()(2, 2) = 1;
    auto const d = measure_distribution(rho, std::vector<double>{0.1, 0.2});
    EXPECT_NEAR(d[0], 0.9 * 0.2, 1e-15);
    EXPECT_NEAR(d[1], 0.1 * 0.2, 1e-15);
    EXPECT_NEAR(d[2], 0.9 * 0.8, 1e-15);
    EXPECT_NEAR(d[3], 0.1 * 0.8, 1e-15);
}

TEST(SampleCounts, DegenerateDistribution)
{
    EXPECT_EQ(sample_counts(dist({1.0, 0.0}), 1024, 1), (Counts{{0, 1024}}));
    EXPECT_THROW((void)sample_counts(dist({1.0, 0.0}), 0, 1), ConfigError);
}

TEST(SampleCounts, FairCoinWithinSixSigma)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto const c = sample_counts(dist({0.5, 0.5}), 8192, seed);
        ASSERT_EQ(c.size(), 2u);
        EXPECT_NEAR(static_cast<double>(c.at(0)), 4096.0, 300.0);
        EXPECT_EQ(c.at(0) + c.at(1), 8192u);
    }
}

TEST(SampleCounts, DeterministicAndConserving)
{
    auto const d = dist({0.1, 0.0, 0.25, 0.3, 0.05, 0.3, 0.0, 0.0});
    auto const a = sample_counts(d, 5000, 99);
    EXPECT_EQ(a, sample_counts(d, 5000, 99));
    EXPECT_NE(a, sample_counts(d, 5000, 100));
    std::uint64_t total = 0;
    for (auto const& [k, v] : a) {
        total += v;
        EXPECT_GT(d[k], 0.0);
    }
    EXPECT_EQ(total, 5000u);
}

TEST(SampleCounts, EmpiricalFrequenciesConverge)
{
    auto const d = dist({0.1, 0.2, 0.3, 0.4});
    auto const freq = counts_to_distribution(sample_counts(d, 200000, 5), 4);
    for (std::size_t i = 0; i < 4; ++i) { EXPECT_NEAR(freq[i], d[i], 0.005); }
}

TEST(FrobeniusDistance, Examples)
{
    auto const a = DensityMatrix::ground(1);
    DensityMatrix b{Eigen::MatrixXcd::Identity(2, 2) * 0.5};
    EXPECT_EQ(frobenius_distance(a, a), 0.0);
    EXPECT_NEAR(frobenius_distance(a, b), std::sqrt(0.5), 1e-15);
    EXPECT_EQ(frobenius_distance(a, b), frobenius_distance(b, a));
    EXPECT_THROW((void)frobenius_distance(a, DensityMatrix::ground(2)), DimensionError);
}

namespace {

auto whole(Circuit const& c) -> PartitionBlock
{
    QubitMap q;
    for (qubit_t i = 0; i < c.num_qubits(); ++i) { q.push_back(i); }
    return PartitionBlock{0, q, c, {}};
}

} // namespace

TEST(BlockFidelityScore, Examples)
{
    auto const x = x_circuit();
    auto const original = make_candidate(x, unitary_of(x));
    EXPECT_NEAR(block_fidelity_score(original, whole(x), NoiseModel::ideal()), 0.0, 1e-15);
    auto const identity = make_candidate(Circuit{1}, unitary_of(x));
    EXPECT_NEAR(block_fidelity_score(identity, whole(x), NoiseModel::ideal()), std::numbers::sqrt2, 1e-12);
    EXPECT_GT(block_fidelity_score(original, whole(x), NoiseModel{0.01, 0.0}), 0.0);
}

TEST(BlockFidelityScore, IgnoresReadoutAndUsesBlockPlacement)
{
    auto const x = x_circuit();
    auto const cand = make_candidate(x, unitary_of(x));
    NoiseModel with_readout{0.0, 0.0, std::vector<double>{0.4, 0.4, 0.4}, {}};
    EXPECT_NEAR(block_fidelity_score(cand, whole(x), with_readout), 0.0, 1e-15);

    NoiseModel hot{0.0, 0.0};
    hot.overrides[2] = QubitNoise{0.1, std::nullopt};
    auto block = whole(x);
    EXPECT_EQ(block_fidelity_score(cand, block, hot), 0.0);
    block.qubits = {2};
    // Only the placed block sees the override on global qubit 2: |0.05 - 0| and |0.95 - 1|.
    EXPECT_NEAR(block_fidelity_score(cand, block, hot), std::sqrt(2 * 0.05 * 0.05), 1e-12);
}

TEST(BlockFidelityScore, MonotoneInNoiseStrength)
{
    std::mt19937_64 rng{58};
    for (int t = 0; t < 20; ++t) {
        auto const c = oracle::random_circuit(3, 20, rng);
        auto const cand = make_candidate(c, unitary_of(c));
        double prev = -1.0;
        for (double p : {0.0, 0.001, 0.01, 0.05}) {
            double const s = block_fidelity_score(cand, whole(c), NoiseModel{p, p});
            EXPECT_GE(s, prev - 1e-12) << "case " << t << " p=" << p;
            prev = s;
        }
    }
}

TEST(ScoreCandidates, FillsEveryCandidateConsistently)
{
    Circuit c{3};
    c.cx(0, 1).rx(1, 0.7).cx(1, 2).cx(0, 1);
    auto const blocks = scan_partition(c, 2);
    auto approx = expand_all(blocks, 3, 1.0, 2, {2, 30});
    NoiseModel const noise{0.001, 0.01};
    score_candidates(approx, blocks, noise, 2);
    for (std::size_t b = 0; b < approx.num_blocks(); ++b) {
        for (auto const& cand : approx.candidates[b]) {
            ASSERT_TRUE(cand.fidelity_score.has_value());
            EXPECT_DOUBLE_EQ(*cand.fidelity_score, block_fidelity_score(cand, blocks[b], noise));
        }
    }
    auto mismatched = approx;
    mismatched.candidates.pop_back();
    EXPECT_THROW(score_candidates(mismatched, blocks, noise), DimensionError);
}
