import numpy as np
import pytest
from qudit_portrait.errors import (
    ArityMismatch, BudgetTooLarge, DimensionMismatch, IndexOutOfRange,
    OverlappingGroups,
)
from qudit_portrait.inequalities import (
    BudgetMode, GroupingSpec, InequalityKind, InequalityVerdict, ScanBudget,
    default_kind, derive_grouping, evaluate_grouping, falsify, quantum_cmi,
    scan_permutations, shannon_information, strong_subadditivity_classical,
    strong_subadditivity_quantum, subadditivity_classical, subadditivity_quantum,
)
from qudit_portrait.numerics import entropy_kernel
from qudit_portrait.placements import lex_placement, permuted_placement, placement_from_cells
from qudit_portrait.serialization import bundled_spec
from qudit_portrait.states import (
    DensityMatrix, ProbabilityVector, RandomSource, diagonal_density,
    pure_state_density, sample_density_matrix, sample_probability_vector,
)

LN2 = np.log(2)


def vector(*values) -> ProbabilityVector:
    return ProbabilityVector(components=np.array(values, dtype=float))


@pytest.fixture
def lattice7():
    return lex_placement(7, (2, 2, 2))


class TestVerdict:
    def test_holds_within_tolerance(self):
        """Test that holds is decided by gap >= -tolerance."""
        assert InequalityVerdict.from_sides(1.0, 1.0 - 1e-13, 1e-12).holds
        assert not InequalityVerdict.from_sides(1.0, 1.0 - 1e-11, 1e-12).holds

    def test_to_dict(self):
        """Test the report form of a verdict."""
        verdict = InequalityVerdict.from_sides(1.0, 2.0, 1e-9, "x")
        assert verdict.to_dict() == {
            "label": "x", "lhs": 1.0, "rhs": 2.0, "gap": 1.0, "holds": True, "tolerance": 1e-9,
        }


class TestClassicalSubadditivity:
    def test_uniform_product(self):
        """Test that the uniform 4-vector on 2x2 has zero gap."""
        verdict = subadditivity_classical(vector(0.25, 0.25, 0.25, 0.25), lex_placement(4, (2, 2)))
        assert verdict.gap == pytest.approx(0.0, abs=1e-12)
        assert verdict.holds

    def test_perfect_correlation(self):
        """Test the correlated vector (1/2, 0, 0, 1/2)."""
        verdict = subadditivity_classical(vector(0.5, 0, 0, 0.5), lex_placement(4, (2, 2)))
        assert verdict.lhs == pytest.approx(LN2, abs=1e-14)
        assert verdict.rhs == pytest.approx(2 * LN2, abs=1e-14)
        assert verdict.gap == pytest.approx(LN2, abs=1e-14)

    def test_random_vectors_on_2x4(self):
        """Test that subadditivity holds for random 7-vectors on 2x4."""
        rng = RandomSource(10)
        placement = lex_placement(7, (2, 4))
        for _ in range(200):
            assert subadditivity_classical(sample_probability_vector(7, rng), placement).holds

    def test_wrong_arity(self, lattice7):
        """Test that subadditivity needs a two-axis placement."""
        with pytest.raises(ArityMismatch):
            subadditivity_classical(sample_probability_vector(7, RandomSource(0)), lattice7)


class TestShannonInformation:
    def test_product_distribution(self):
        """Test that a product distribution carries no information."""
        p = np.outer([0.3, 0.7], [0.2, 0.5, 0.3]).reshape(-1)
        assert shannon_information(vector(*p), lex_placement(6, (2, 3))) == pytest.approx(0.0, abs=1e-12)

    def test_correlated_distribution(self):
        """Test that perfect correlation carries ln 2."""
        assert shannon_information(vector(0.5, 0, 0, 0.5), lex_placement(4, (2, 2))) == pytest.approx(LN2)

    def test_bounded_by_smaller_factor(self):
        """Test that I <= min(ln n1, ln n2) on random draws."""
        rng = RandomSource(12)
        placement = lex_placement(6, (2, 3))
        for _ in range(200):
            info = shannon_information(sample_probability_vector(6, rng), placement)
            assert -1e-12 <= info <= LN2 + 1e-12

    def test_equals_subadditivity_gap(self):
        """Test that the information is exactly the subadditivity gap."""
        p = sample_probability_vector(7, RandomSource(13))
        placement = lex_placement(7, (2, 4))
        assert shannon_information(p, placement) == subadditivity_classical(p, placement).gap


class TestClassicalStrongSubadditivity:
    def test_uniform_eight_vector(self):
        """Test the uniform 8-vector on 2x2x2."""
        verdict = strong_subadditivity_classical(vector(*[1 / 8] * 8), lex_placement(8, (2, 2, 2)))
        assert verdict.lhs == pytest.approx(4 * LN2, abs=1e-12)
        assert verdict.rhs == pytest.approx(4 * LN2, abs=1e-12)
        assert verdict.gap == pytest.approx(0.0, abs=1e-12)

    def test_first_and_fifth_components(self, lattice7):
        """Test p1 = p5 = 1/2 on the seven-component lattice."""
        verdict = strong_subadditivity_classical(vector(0.5, 0, 0, 0, 0.5, 0, 0), lattice7)
        assert verdict.lhs == pytest.approx(LN2, abs=1e-14)
        assert verdict.rhs == pytest.approx(LN2, abs=1e-14)
        assert verdict.holds

    def test_random_vectors(self, lattice7):
        """Test that strong subadditivity holds for random 7-vectors."""
        rng = RandomSource(14)
        for _ in range(500):
            assert strong_subadditivity_classical(sample_probability_vector(7, rng), lattice7).gap >= -1e-12

    def test_wrong_arity(self):
        """Test that strong subadditivity needs three axes."""
        with pytest.raises(ArityMismatch):
            strong_subadditivity_classical(vector(0.25, 0.25, 0.25, 0.25), lex_placement(4, (2, 2)))


class TestQuantumSubadditivity:
    def test_maximally_mixed(self):
        """Test that I/4 on 2x2 has zero gap."""
        rho = DensityMatrix(matrix=np.eye(4, dtype=complex) / 4)
        assert subadditivity_quantum(rho, lex_placement(4, (2, 2))).gap == pytest.approx(0.0, abs=1e-12)

    def test_bell_state(self):
        """Test that the Bell state is pure with maximally mixed halves."""
        verdict = subadditivity_quantum(pure_state_density([1, 0, 0, 1]), lex_placement(4, (2, 2)))
        assert verdict.lhs == pytest.approx(0.0, abs=1e-12)
        assert verdict.rhs == pytest.approx(2 * LN2, abs=1e-12)
        assert verdict.holds

    def test_random_states_on_2x4(self):
        """Test that subadditivity holds for random 7x7 states on 2x4."""
        rng = RandomSource(15)
        placement = lex_placement(7, (2, 4))
        for rank in (1, 3, 7):
            for _ in range(30):
                assert subadditivity_quantum(sample_density_matrix(7, rank, rng), placement).gap >= -1e-9


class TestQuantumStrongSubadditivity:
    def test_maximally_mixed_portraits(self, lattice7):
        """Test the portraits of I/7 and the four-entropy gap."""
        result = strong_subadditivity_quantum(DensityMatrix(matrix=np.eye(7, dtype=complex) / 7), lattice7)
        np.testing.assert_allclose(result.r2.matrix, np.diag([4 / 7, 3 / 7]), atol=1e-15)
        np.testing.assert_allclose(result.r12.matrix, np.diag([2, 2, 2, 1]) / 7, atol=1e-15)
        np.testing.assert_allclose(result.r23.matrix, np.diag([2, 2, 2, 1]) / 7, atol=1e-15)

        s12 = entropy_kernel([2 / 7, 2 / 7, 2 / 7, 1 / 7])
        expected = 2 * s12 - np.log(7) - entropy_kernel([4 / 7, 3 / 7])
        assert result.verdict.gap == pytest.approx(expected, abs=1e-12)
        assert result.verdict.gap > 0

    def test_pure_basis_state(self, lattice7):
        """Test that a basis state has four zero entropies."""
        result = strong_subadditivity_quantum(pure_state_density(np.eye(7)[0]), lattice7)
        assert result.verdict.lhs == pytest.approx(0.0, abs=1e-12)
        assert result.verdict.rhs == pytest.approx(0.0, abs=1e-12)

    def test_diagonal_state_matches_classical(self, lattice7):
        """Test that diagonal states reproduce the classical entropies."""
        rng = RandomSource(16)
        for _ in range(50):
            p = sample_probability_vector(7, rng)
            quantum = strong_subadditivity_quantum(diagonal_density(p), lattice7).verdict
            classical = strong_subadditivity_classical(p, lattice7)
            assert quantum.lhs == pytest.approx(classical.lhs, abs=1e-10)
            assert quantum.rhs == pytest.approx(classical.rhs, abs=1e-10)

    def test_compressed_portraits(self):
        """Test that compression drops the empty level of the five-level R12."""
        result = strong_subadditivity_quantum(sample_density_matrix(5, 5, RandomSource(17)), lex_placement(5, (2, 2, 2)))
        compressed = result.compressed()
        assert compressed["R12"].dimension == 3
        assert compressed["R23"].dimension == 4
        assert compressed["R2"].dimension == 2

    def test_cmi_of_product_state(self):
        """Test that a product state across the three factors has zero CMI."""
        factors = [sample_density_matrix(2, 2, RandomSource(seed)).matrix for seed in (20, 21, 22)]
        rho = DensityMatrix(matrix=np.kron(np.kron(factors[0], factors[1]), factors[2]))
        assert quantum_cmi(rho, lex_placement(8, (2, 2, 2))) == pytest.approx(0.0, abs=1e-9)

    def test_cmi_conjugation_invariant(self, lattice7):
        """Test that complex conjugation leaves the CMI unchanged."""
        rho = sample_density_matrix(7, 4, RandomSource(23))
        conjugate = DensityMatrix(matrix=rho.matrix.conj())
        assert quantum_cmi(conjugate, lattice7) == pytest.approx(quantum_cmi(rho, lattice7), abs=1e-10)

    def test_cmi_equals_gap(self, lattice7):
        """Test that the CMI is the strong subadditivity gap."""
        rho = sample_density_matrix(7, 7, RandomSource(24))
        assert quantum_cmi(rho, lattice7) == strong_subadditivity_quantum(rho, lattice7).verdict.gap


class TestGroupingSpecs:
    def test_rejects_out_of_range(self):
        """Test that indices must lie in [0, n)."""
        with pytest.raises(IndexOutOfRange):
            GroupingSpec.from_groups(3, [[[0], [3]]], [])

    def test_rejects_overlap(self):
        """Test that groups within one family must be disjoint."""
        with pytest.raises(OverlappingGroups):
            GroupingSpec.from_groups(3, [[[0, 1], [1, 2]]], [])

    def test_derived_grouping_of_lattice(self, lattice7):
        """Test that the lexicographic lattice derives the bundled 7-vector grouping."""
        derived = derive_grouping(lattice7)
        bundled = bundled_spec("eq12")
        assert derived.lhs == bundled.lhs
        assert derived.rhs == bundled.rhs

    def test_derived_grouping_skips_empty_cells(self):
        """Test that the hole of the 2x3 placement contributes no group."""
        placement = placement_from_cells((2, 3), [(0, 0), (0, 1), (0, 2), (1, 0), (1, 2)])
        derived = derive_grouping(placement)
        assert derived.rhs == (((0, 1, 2), (3, 4)), ((0, 3), (1,), (2, 4)))

    def test_derived_grouping_reproduces_verdicts(self, lattice7):
        """Test that evaluating the derived grouping matches the placement check."""
        rng = RandomSource(25)
        spec = derive_grouping(lattice7)
        for _ in range(100):
            p = sample_probability_vector(7, rng)
            by_spec = evaluate_grouping(p, spec)
            by_placement = strong_subadditivity_classical(p, lattice7)
            assert by_spec.lhs == pytest.approx(by_placement.lhs, abs=1e-12)
            assert by_spec.rhs == pytest.approx(by_placement.rhs, abs=1e-12)

    def test_equal_sides(self):
        """Test that identical sides give a zero gap."""
        family = [[[0, 1], [2]]]
        spec = GroupingSpec.from_groups(3, family, family)
        assert evaluate_grouping(vector(0.2, 0.3, 0.5), spec).gap == 0.0

    def test_printed_tomogram_form_fails(self):
        """Test the printed j=3 tomogram grouping at w(-3) = w(1) = 1/2."""
        verdict = evaluate_grouping(vector(0.5, 0, 0, 0, 0.5, 0, 0), bundled_spec("sub1_printed"))
        assert verdict.lhs == pytest.approx(LN2, abs=1e-12)
        assert verdict.rhs == pytest.approx(0.0, abs=1e-12)
        assert not verdict.holds

    def test_short_vector(self):
        """Test that a spec cannot address missing components."""
        with pytest.raises(IndexOutOfRange):
            evaluate_grouping(vector(0.5, 0.5), bundled_spec("eq12"))

    def test_kind_must_match_arity(self, lattice7):
        """Test that a placement only derives its own kind."""
        assert default_kind(lattice7) is InequalityKind.STRONG_SUBADDITIVITY
        with pytest.raises(ArityMismatch):
            derive_grouping(lattice7, InequalityKind.SUBADDITIVITY)
        with pytest.raises(ArityMismatch):
            default_kind(lex_placement(2, (2,)))


class TestFalsify:
    def test_printed_tomogram_form_fails_at_a_corner(self):
        """Test that the falsifier finds the p1 = p5 = 1/2 corner."""
        result = falsify(bundled_spec("sub1_printed"), trials=1000, rng=RandomSource(0))
        assert result.violated
        assert result.source == "corner"
        # Seven basis vectors, then pairs (1,2), (1,3), (1,4), (1,5)
        assert result.evaluated == 11
        np.testing.assert_array_equal(result.vector.components, [0.5, 0, 0, 0, 0.5, 0, 0])
        assert result.verdict.gap == pytest.approx(-LN2, abs=1e-12)

    def test_valid_inequality_survives(self):
        """Test that the derived 7-vector inequality is never violated."""
        result = falsify(bundled_spec("eq12"), trials=5000, rng=RandomSource(1))
        assert not result.violated
        assert result.evaluated == 7 + 21 + 5000
        assert result.to_dict()["violation"] is None

    def test_empty_right_side(self):
        """Test that entropy <= 0 fails on the first mixed corner."""
        spec = GroupingSpec.from_groups(3, [[[0], [1], [2]]], [])
        result = falsify(spec, trials=0, rng=RandomSource(2))
        assert result.violated
        assert result.evaluated == 4

    def test_deterministic_per_seed(self):
        """Test that equal seeds give equal outcomes."""
        spec = GroupingSpec.from_groups(4, [[[0, 1, 2, 3]]], [[[0], [1], [2], [3]]])
        a = falsify(spec, trials=100, rng=RandomSource(3), n=6)
        b = falsify(spec, trials=100, rng=RandomSource(3), n=6)
        assert a.evaluated == b.evaluated == 6 + 15 + 100

    def test_dimension_too_small(self):
        """Test that n below the spec's index range is rejected."""
        with pytest.raises(IndexOutOfRange):
            falsify(bundled_spec("eq12"), trials=10, rng=RandomSource(0), n=5)


class TestScanBudget:
    def test_parse(self):
        """Test the accepted budget strings."""
        assert ScanBudget.parse("all") == ScanBudget(BudgetMode.ALL)
        assert ScanBudget.parse("identity").mode is BudgetMode.IDENTITY
        assert ScanBudget.parse("random:100") == ScanBudget(BudgetMode.RANDOM, 100)
        assert ScanBudget.parse("random:100").describe() == "random:100"

    @pytest.mark.parametrize("text", ["some", "random:0", "random:x"])
    def test_parse_rejects(self, text):
        """Test that malformed budgets are rejected."""
        with pytest.raises(ValueError):
            ScanBudget.parse(text)


class TestScanPermutations:
    def test_exhaustive_seven(self, lattice7):
        """Test all 5040 relabelings of a random 7-vector."""
        p = sample_probability_vector(7, RandomSource(30))
        report = scan_permutations(p, lattice7, ScanBudget.parse("all"))
        assert report.count == 5040
        assert report.min_gap >= -1e-12
        assert report.min_gap <= report.max_gap

    def test_extremes_match_direct_checks(self, lattice7):
        """Test that reported permutations reproduce their gaps."""
        p = sample_probability_vector(7, RandomSource(31))
        report = scan_permutations(p, lattice7, ScanBudget.parse("all"))
        for sigma, gap in ((report.argmin, report.min_gap), (report.argmax, report.max_gap)):
            direct = strong_subadditivity_classical(p, permuted_placement(lattice7, sigma))
            assert direct.gap == pytest.approx(gap, abs=1e-12)

    def test_identity_budget(self, lattice7):
        """Test that the identity budget reproduces the single verdict."""
        p = sample_probability_vector(7, RandomSource(32))
        report = scan_permutations(p, lattice7, ScanBudget.parse("identity"))
        assert report.count == 1
        assert report.argmin == tuple(range(7))
        assert report.min_gap == pytest.approx(strong_subadditivity_classical(p, lattice7).gap, abs=1e-12)

    def test_uniform_vector(self, lattice7):
        """Test that every relabeling of the uniform vector has the same gap."""
        report = scan_permutations(vector(*[1 / 7] * 7), lattice7, ScanBudget.parse("all"))
        assert report.max_gap - report.min_gap == pytest.approx(0.0, abs=1e-12)
        # Ties resolve to the smallest permutation
        assert report.argmin == tuple(range(7))

    def test_relabeling_invariance(self):
        """Test that permuting the input leaves the multiset of gaps unchanged."""
        placement = lex_placement(6, (2, 3))
        p = sample_probability_vector(6, RandomSource(33))
        shuffled = vector(*p.components[[3, 1, 5, 0, 2, 4]])
        a = scan_permutations(p, placement, ScanBudget.parse("all"))
        b = scan_permutations(shuffled, placement, ScanBudget.parse("all"))
        np.testing.assert_allclose(np.sort(a.gaps), np.sort(b.gaps), atol=1e-12)

    def test_random_budget_is_deterministic(self, lattice7):
        """Test that random budgets repeat under the same seed."""
        p = sample_probability_vector(7, RandomSource(34))
        a = scan_permutations(p, lattice7, ScanBudget.parse("random:50"), rng=RandomSource(7))
        b = scan_permutations(p, lattice7, ScanBudget.parse("random:50"), rng=RandomSource(7))
        assert a.count == 50
        assert a.to_dict() == b.to_dict()

    def test_random_budget_needs_rng(self, lattice7):
        """Test that a random budget without a stream is rejected."""
        with pytest.raises(ValueError):
            scan_permutations(vector(*[1 / 7] * 7), lattice7, ScanBudget.parse("random:5"))

    def test_quantum_scan(self):
        """Test a quantum scan over the 24 relabelings of four levels."""
        placement = lex_placement(4, (2, 2))
        rho = sample_density_matrix(4, 2, RandomSource(35))
        report = scan_permutations(rho, placement, ScanBudget.parse("all"))
        assert report.count == 24
        assert report.min_gap >= -1e-9
        direct = subadditivity_quantum(rho, permuted_placement(placement, report.argmin))
        assert direct.gap == pytest.approx(report.min_gap, abs=1e-12)

    def test_budget_too_large(self):
        """Test that exhaustive scans beyond 10! are refused."""
        p = vector(*[1 / 11] * 11)
        with pytest.raises(BudgetTooLarge):
            scan_permutations(p, lex_placement(11, (2, 2, 3)), ScanBudget.parse("all"))

    def test_dimension_mismatch(self, lattice7):
        """Test that the input must match the placement."""
        with pytest.raises(DimensionMismatch):
            scan_permutations(vector(0.5, 0.5), lattice7, ScanBudget.parse("all"))

    def test_report_is_one_based(self, lattice7):
        """Test that reported permutations use 1-based labels."""
        report = scan_permutations(vector(*[1 / 7] * 7), lattice7, ScanBudget.parse("identity"))
        assert report.to_dict()["argmin"] == [1, 2, 3, 4, 5, 6, 7]
