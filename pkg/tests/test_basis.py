import numpy as np
import pytest

from cliffordqc.basis import (
    AtomicOrbital,
    ContractedShell,
    CliffordPrimitive,
    FreePrimitive,
    axis_factor,
    build_ao_basis,
    cartesian_components,
    contracted_overlap,
    eval_primitive,
    load_basis,
    parse_basis_file,
)
from cliffordqc.errors import BasisParseError, ConfigError
from cliffordqc.topology import Geometry, SupercellTopology, build_ring_chain, build_torus_chain

from . import oracles

POB_NWCHEM = """\
BASIS "ao basis" PRINT
#BASIS SET: (5s,1p) -> [3s,1p]
H    S
     34.0613410              0.60251978E-02
      5.1235746              0.45021094E-01
      1.1646626              0.20189726
H    S
      0.41574551             1.0000000
H    S
      0.17951110             1.0000000
H    P
      0.80000000             1.0000000
END
"""


def test_eval_primitive_trivial_points():
    t = SupercellTopology(1, (5.0,))
    assert eval_primitive(CliffordPrimitive(1.0, (0, 0, 0), (0, 0, 0), t), [0, 0, 0]) == 1.0
    assert eval_primitive(CliffordPrimitive(1.0, (0, 0, 0), (1, 0, 0), t), [0, 0, 0]) == 0.0


def test_axis_factor_matches_sin_squared_form():
    rng = np.random.default_rng(3)
    x = rng.uniform(-10, 10, 500)
    for i in range(3):
        ours = axis_factor(i, 0.7, 1.3, x, 6.0)
        ref = oracles.clifford_factor(i, 0.7, 1.3, x, 6.0)
        assert np.allclose(ours, ref, rtol=1e-13, atol=1e-15)


def test_periodicity_random_draws():
    rng = np.random.default_rng(1)
    for _ in range(100):
        L = rng.uniform(2, 20, 3)
        t = SupercellTopology(3, tuple(L))
        p = CliffordPrimitive(rng.uniform(0.1, 3), tuple(rng.uniform(0, 10, 3)), tuple(rng.integers(0, 3, 3)), t)
        r = rng.uniform(-10, 10, 3)
        shift = L * rng.integers(-3, 4, 3)
        assert eval_primitive(p, r + shift) == pytest.approx(eval_primitive(p, r), abs=1e-14)


def test_odd_index_is_antisymmetric():
    t = SupercellTopology(1, (7.0,))
    p = CliffordPrimitive(0.9, (2.0, 0, 0), (1, 0, 0), t)
    d = np.linspace(0.01, 3.4, 50)
    r_plus = np.column_stack([2.0 + d, np.zeros(50), np.zeros(50)])
    r_minus = np.column_stack([2.0 - d, np.zeros(50), np.zeros(50)])
    assert np.allclose(eval_primitive(p, r_plus), -eval_primitive(p, r_minus), atol=1e-15)


def test_large_box_matches_free_gaussian():
    t = SupercellTopology(1, (200.0,))
    x = np.linspace(-3, 3, 61)
    x = x[np.abs(x) > 1e-3]
    r = np.column_stack([x, 0.3 * np.ones_like(x), -0.2 * np.ones_like(x)])
    for i in range(3):
        clif = eval_primitive(CliffordPrimitive(1.0, (0, 0, 0), (i, 0, 0), t), r)
        free = eval_primitive(FreePrimitive(1.0, (0, 0, 0), (i, 0, 0)), r)
        assert np.max(np.abs(clif / free - 1)) < 1e-6


def test_pointwise_gap_scales_as_inverse_square_length():
    # exponent gap alpha x^4 pi^2 / (3 L^2) at leading order
    x = np.linspace(0.5, 3, 11)
    scaled = []
    for L in (200.0, 400.0, 800.0):
        r = np.column_stack([x, np.zeros_like(x), np.zeros_like(x)])
        t = SupercellTopology(1, (L,))
        clif = eval_primitive(CliffordPrimitive(1.0, (0, 0, 0), (0, 0, 0), t), r)
        free = eval_primitive(FreePrimitive(1.0, (0, 0, 0), (0, 0, 0)), r)
        scaled.append((clif / free - 1) * L**2)
    assert np.allclose(scaled[1], scaled[2], rtol=1e-3)
    assert np.allclose(scaled[2], np.pi**2 * x**4 / 3, rtol=1e-3)


def test_normalised_convergence_is_monotone():
    alpha = 0.8
    x = np.linspace(-4, 4, 801) / np.sqrt(alpha)
    errors = []
    for i in range(3):
        free = oracles.free_factor(i, alpha, 0.0, x)
        free /= np.sqrt(oracles.free_overlap_1d(i, alpha, 0.0, i, alpha, 0.0))
        per_i = []
        for lsa in (50, 100, 200):
            L = lsa / np.sqrt(alpha)
            g = oracles.clifford_factor(i, alpha, 0.0, x, L)
            g /= np.sqrt(oracles.periodic_overlap_1d(i, alpha, 0.0, i, alpha, 0.0, L))
            per_i.append(np.max(np.abs(g - free)))
        errors.append(per_i)
    for per_i in errors:
        assert per_i[0] > per_i[1] > per_i[2]


def test_cartesian_components_order():
    assert cartesian_components(0) == [(0, 0, 0)]
    assert cartesian_components(1) == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    assert cartesian_components(2) == [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]


def test_parse_minimal_and_sto3g():
    b = parse_basis_file("ELEMENT H\ns 1\n1.0 1.0\n")
    (sh,) = b.for_element("H")
    assert sh.l == 0 and sh.exponents == (1.0,) and sh.coefficients == (1.0,)
    sto = load_basis("sto-3g")
    (sh,) = sto.for_element("H")
    assert len(sh.exponents) == 3
    assert sh.exponents[0] == pytest.approx(3.425250914)
    assert sh.coefficients[0] == pytest.approx(0.1543289673)


def test_parse_errors_carry_line_numbers():
    with pytest.raises(BasisParseError, match="line 3"):
        parse_basis_file("ELEMENT H\ns 1\n-1.0 1.0\n")
    with pytest.raises(BasisParseError, match="unknown shell letter"):
        parse_basis_file("ELEMENT H\nf 1\n1.0 1.0\n")
    with pytest.raises(BasisParseError, match="line 2: unexpected end"):
        parse_basis_file("ELEMENT H\ns 2\n1.0 1.0\n")
    with pytest.raises(BasisParseError):
        parse_basis_file("s 1\n1.0 1.0\n")
    with pytest.raises(BasisParseError):
        parse_basis_file("# nothing\n")


def test_exchange_format_matches_bundled_pob_tzvp():
    nw = parse_basis_file(POB_NWCHEM, "pob-tzvp")
    ours = load_basis("pob-tzvp")
    a, b = nw.for_element("H"), ours.for_element("H")
    assert [s.l for s in a] == [s.l for s in b] == [0, 0, 0, 1]
    for sa, sb in zip(a, b):
        assert np.allclose(sa.exponents, sb.exponents, rtol=1e-7)
        assert np.allclose(sa.coefficients, sb.coefficients, rtol=1e-7)


def test_shell_invariants():
    sh = ContractedShell(0, (0.5, 2.0, 1.0), (0.1, 0.2, 0.3))
    assert sh.exponents == (2.0, 1.0, 0.5)
    assert sh.coefficients == (0.2, 0.3, 0.1)
    with pytest.raises(ConfigError):
        ContractedShell(3, (1.0,), (1.0,))
    with pytest.raises(ConfigError):
        ContractedShell(0, (1.0, 1.0), (1.0, 1.0))
    with pytest.raises(ConfigError):
        FreePrimitive(-1.0, (0, 0, 0))


def test_ao_counts_and_unit_self_overlap():
    g = build_torus_chain(2, 1.8)
    ao = build_ao_basis(g, load_basis("minimal"))
    assert len(ao) == 2
    ao = build_ao_basis(g, load_basis("pob-tzvp"))
    assert len(ao) == 12
    assert [o.angular for o in ao[:6]] == [(0, 0, 0)] * 3 + [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    for o in ao:
        assert contracted_overlap(o, o, g.topology) == pytest.approx(1.0, abs=1e-10)
    ring = build_ring_chain(3, 1.8)
    for o in build_ao_basis(ring, load_basis("pob-tzvp")):
        assert contracted_overlap(o, o, ring.topology) == pytest.approx(1.0, abs=1e-10)


def test_h_with_s_and_p_gives_four_aos():
    b = parse_basis_file("ELEMENT H\ns 1\n1.0 1.0\np 1\n0.8 1.0\n")
    ao = build_ao_basis(Geometry((1,), np.zeros((1, 3))), b)
    assert len(ao) == 4


def test_missing_element_is_named():
    g = Geometry((2,), np.zeros((1, 3)))
    with pytest.raises(ConfigError, match="He"):
        build_ao_basis(g, load_basis("sto-3g"))


def test_normalisation_torus_vs_free():
    basis = load_basis("pob-tzvp")
    torus = Geometry((1,), np.array([[0.0, 0.0, 0.0]]), SupercellTopology(1, (200.0,)))
    free = Geometry((1,), np.zeros((1, 3)))
    for a, b in zip(build_ao_basis(torus, basis), build_ao_basis(free, basis)):
        assert np.allclose(a.coefficients, b.coefficients, rtol=1e-6)


def test_normalisation_gap_scales_as_inverse_square_length():
    basis = load_basis("pob-tzvp")
    free = build_ao_basis(Geometry((1,), np.zeros((1, 3))), basis)
    gaps = []
    for L in (200.0, 400.0, 800.0):
        torus = build_ao_basis(Geometry((1,), np.zeros((1, 3)), SupercellTopology(1, (L,))), basis)
        gaps.append(max(np.max(np.abs(np.array(a.coefficients) / b.coefficients - 1)) for a, b in zip(torus, free)))
    assert gaps[0] / gaps[1] == pytest.approx(4.0, rel=0.05)
    assert gaps[1] / gaps[2] == pytest.approx(4.0, rel=0.05)


def test_contracted_evaluate_sums_primitives():
    t = SupercellTopology(1, (9.0,))
    ao = AtomicOrbital(0, 0, (1, 0, 0), (1.0, 0, 0), (2.0, 0.5), (0.3, 0.7))
    r = np.array([[1.7, 0.2, -0.4]])
    ref = 0.3 * eval_primitive(CliffordPrimitive(2.0, (1, 0, 0), (1, 0, 0), t), r)
    ref += 0.7 * eval_primitive(CliffordPrimitive(0.5, (1, 0, 0), (1, 0, 0), t), r)
    assert np.allclose(ao.evaluate(r, t), ref, rtol=1e-14)
