import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from cliffordqc.basis import FreePrimitive, build_ao_basis, cartesian_components, load_basis, parse_basis_file
from cliffordqc.cgto_integrals import (
    assemble_free_tensors,
    free_eri,
    free_kinetic,
    free_nuclear,
    free_overlap,
    pack_eri,
)
from cliffordqc.topology import Geometry, build_ring_chain

from . import oracles

ANGULAR = [c for l in range(3) for c in cartesian_components(l)]


def _random_prim(rng, angular=None):
    ang = ANGULAR[rng.integers(len(ANGULAR))] if angular is None else angular
    return (float(rng.uniform(0.3, 2.5)), tuple(rng.uniform(-1, 1, 3)), ang)


def _free(p):
    return FreePrimitive(*p)


def _fd_kinetic(pa, pb, h=2e-3):
    # 6th-order central differences for d2/dx2, integrated by adaptive quadrature
    (a, A, la), (b, B, lb) = pa, pb
    c = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])
    S, T = [], []
    for s in range(3):
        lo, hi = min(A[s], B[s]) - 10.0, max(A[s], B[s]) + 10.0

        def dd(x, s=s):
            return sum(ck * oracles.free_factor(lb[s], b, B[s], x + k * h) for k, ck in zip(range(-3, 4), c)) / h**2

        S.append(oracles.free_overlap_1d(la[s], a, A[s], lb[s], b, B[s]))
        T.append(-0.5 * oracles.quad(lambda x: oracles.free_factor(la[s], a, A[s], x) * dd(x), lo, hi, points=[A[s], B[s]]))
    return T[0] * S[1] * S[2] + S[0] * T[1] * S[2] + S[0] * S[1] * T[2]


def test_overlap_closed_forms():
    a = FreePrimitive(1.0, (0, 0, 0))
    assert free_overlap(a, a) == pytest.approx((np.pi / 2) ** 1.5, rel=1e-15)
    assert free_overlap(a, FreePrimitive(1.0, (0, 0, 0), (1, 0, 0))) == 0.0
    b = FreePrimitive(0.7, (0.3, -0.2, 0.5))
    p = 1.7
    ref = (np.pi / p) ** 1.5 * np.exp(-0.7 / p * 0.38)
    assert free_overlap(a, b) == pytest.approx(ref, rel=1e-14)


def test_overlap_against_quadrature():
    rng = np.random.default_rng(0)
    for _ in range(60):
        pa, pb = _random_prim(rng), _random_prim(rng)
        ref = oracles.overlap_3d(pa, pb, ())
        assert free_overlap(_free(pa), _free(pb)) == pytest.approx(ref, rel=1e-10, abs=1e-14)


def test_s_d_overlap_against_quadrature():
    pa = (1.1, (0.2, 0.0, -0.1), (0, 0, 0))
    pb = (0.6, (-0.3, 0.4, 0.2), (1, 1, 0))
    assert free_overlap(_free(pa), _free(pb)) == pytest.approx(oracles.overlap_3d(pa, pb, ()), rel=1e-10)


def test_kinetic_same_centre_s():
    a = FreePrimitive(1.0, (0, 0, 0))
    # 3 a b / p (pi/p)^{3/2} for coincident s functions
    assert free_kinetic(a, a) == pytest.approx(1.5 * (np.pi / 2) ** 1.5, rel=1e-14)
    s = (1.0, (0, 0, 0), (0, 0, 0))
    assert free_kinetic(a, a) == pytest.approx(_fd_kinetic(s, s), rel=1e-9)


def test_kinetic_against_fd_quadrature():
    rng = np.random.default_rng(1)
    for _ in range(50):
        pa, pb = _random_prim(rng), _random_prim(rng)
        ref = _fd_kinetic(pa, pb)
        assert free_kinetic(_free(pa), _free(pb)) == pytest.approx(ref, rel=1e-8, abs=1e-10)


def test_kinetic_against_analytic_second_derivative():
    rng = np.random.default_rng(2)
    for _ in range(20):
        pa, pb = _random_prim(rng), _random_prim(rng)
        # FD route above, this one with the exact g''
        (a, A, la), (b, B, lb) = pa, pb
        S, T = [], []
        for s in range(3):
            S.append(oracles.free_overlap_1d(la[s], a, A[s], lb[s], b, B[s]))
            lo, hi = min(A[s], B[s]) - 10.0, max(A[s], B[s]) + 10.0
            T.append(-0.5 * oracles.quad(
                lambda x, s=s: oracles.free_factor(la[s], a, A[s], x) * oracles.free_factor_dd(lb[s], b, B[s], x), lo, hi))
        ref = T[0] * S[1] * S[2] + S[0] * T[1] * S[2] + S[0] * S[1] * T[2]
        assert free_kinetic(_free(pa), _free(pb)) == pytest.approx(ref, rel=1e-10, abs=1e-13)


def test_nuclear_on_centre_hits_f0_at_zero():
    a = FreePrimitive(1.0, (0, 0, 0))
    g = Geometry((1,), np.zeros((1, 3)))
    assert free_nuclear(a, a, g) == pytest.approx(-2 * np.pi / 2.0, rel=1e-15)


def test_nuclear_against_symbolic_oracle():
    rng = np.random.default_rng(3)
    low = [c for l in range(2) for c in cartesian_components(l)] + [(2, 0, 0), (1, 1, 0)]
    for _ in range(50):
        pa = _random_prim(rng, low[rng.integers(len(low))])
        pb = _random_prim(rng, low[rng.integers(4)])
        cpos = tuple(rng.uniform(-1.5, 1.5, 3))
        z = int(rng.integers(1, 3))
        ref = oracles.free_nuclear_symbolic(pa, pb, z, cpos)
        got = free_nuclear(_free(pa), _free(pb), Geometry((z,), np.array([cpos])))
        assert got == pytest.approx(ref, rel=1e-8, abs=1e-13)


def test_eri_all_coincident_s():
    a = FreePrimitive(1.0, (0.3, 0.1, -0.2))
    assert free_eri(a, a, a, a) == pytest.approx(2 * np.pi**2.5 / (2 * 2 * np.sqrt(4)), rel=1e-15)


def test_eri_against_symbolic_oracle():
    rng = np.random.default_rng(4)
    s, px, py, pz, dxx = (0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (2, 0, 0)
    patterns = [(s, s, s, s), (px, s, s, s), (s, py, s, s), (px, s, py, s), (pz, s, s, pz), (dxx, s, s, s),
                (px, px, s, s), (s, s, py, pz), (py, pz, px, s)]
    for k in range(54):
        ang = patterns[k % len(patterns)]
        prims = [_random_prim(rng, ang[i]) for i in range(4)]
        ref = oracles.free_eri_symbolic(*prims)
        got = free_eri(*[_free(p) for p in prims])
        assert got == pytest.approx(ref, rel=1e-8, abs=1e-13)


def test_eri_permutational_symmetry():
    rng = np.random.default_rng(5)
    p = [_free(_random_prim(rng)) for _ in range(4)]
    ref = free_eri(p[0], p[1], p[2], p[3])
    for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1), (3, 2, 1, 0)):
        assert free_eri(*[p[i] for i in perm]) == pytest.approx(ref, rel=1e-12, abs=1e-15)


# textbook H2/STO-3G at R = 1.4 bohr, four-decimal tabulation
H2_STO3G = {"S01": 0.6593, "T00": 0.7600, "T01": 0.2365, "H00": -1.1204, "H01": -0.9584,
            "(00|00)": 0.7746, "(00|11)": 0.5697, "(10|00)": 0.4441, "(10|10)": 0.2970}


def _h2_sto3g(shift=(0.0, 0.0, 0.0)):
    g = Geometry((1, 1), np.array([[0, 0, 0], [1.4, 0, 0]]) + np.array(shift))
    return g, assemble_free_tensors(g, build_ao_basis(g, load_basis("sto-3g")))


def test_h2_sto3g_textbook_values():
    _, t = _h2_sto3g()
    ref = H2_STO3G
    assert t.S[0, 1] == pytest.approx(ref["S01"], abs=5e-5)
    assert t.T[0, 0] == pytest.approx(ref["T00"], abs=5e-5)
    assert t.T[0, 1] == pytest.approx(ref["T01"], abs=5e-5)
    assert t.H[0, 0] == pytest.approx(ref["H00"], abs=5e-5)
    assert t.H[0, 1] == pytest.approx(ref["H01"], abs=5e-5)
    assert t.eri[0, 0, 0, 0] == pytest.approx(ref["(00|00)"], abs=5e-5)
    assert t.eri[0, 0, 1, 1] == pytest.approx(ref["(00|11)"], abs=5e-5)
    assert t.eri[1, 0, 0, 0] == pytest.approx(ref["(10|00)"], abs=5e-5)
    assert t.eri[1, 0, 1, 0] == pytest.approx(ref["(10|10)"], abs=5e-5)


def test_h2_sto3g_overlap_by_quadrature():
    g, t = _h2_sto3g()
    ao = build_ao_basis(g, load_basis("sto-3g"))
    ref = 0.0
    for ca, ea in zip(ao[0].coefficients, ao[0].exponents):
        for cb, eb in zip(ao[1].coefficients, ao[1].exponents):
            ref += ca * cb * oracles.overlap_3d((ea, ao[0].center, (0, 0, 0)), (eb, ao[1].center, (0, 0, 0)), ())
    assert t.S[0, 1] == pytest.approx(ref, rel=1e-10)


def test_single_ao_system():
    g = Geometry((1,), np.zeros((1, 3)))
    t = assemble_free_tensors(g, build_ao_basis(g, parse_basis_file("ELEMENT H\ns 1\n1.0 1.0\n")))
    assert t.S.shape == (1, 1) and t.S[0, 0] == pytest.approx(1.0, abs=1e-14)
    assert t.eri_packed.shape == (1,)


def _pob_ring():
    g = build_ring_chain(3, 1.8)
    return g, assemble_free_tensors(g, build_ao_basis(g, load_basis("pob-tzvp")))


def test_tensor_invariants_and_symmetry():
    _, t = _pob_ring()
    assert np.allclose(t.S, t.S.T) and np.allclose(t.T, t.T.T) and np.allclose(t.V, t.V.T)
    assert t.smallest_overlap_eigenvalue() > 0
    assert np.all(np.diag(t.T) >= 0)
    eri = t.eri
    for perm in ((1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)):
        assert np.array_equal(eri, eri.transpose(perm))
    n = t.n_ao
    pair = eri.reshape(n * n, n * n)
    assert np.linalg.eigvalsh(pair)[0] > -1e-10
    assert np.array_equal(pack_eri(eri), t.eri_packed)


def test_contracted_tensors_against_primitive_sums():
    g, t = _pob_ring()
    ao = build_ao_basis(g, load_basis("pob-tzvp"))

    def contract(f, *aos):
        total = 0.0
        grids = [list(zip(o.coefficients, o.exponents)) for o in aos]
        import itertools

        for combo in itertools.product(*grids):
            w = np.prod([c for c, _ in combo])
            prims = [FreePrimitive(e, o.center, o.angular) for (_, e), o in zip(combo, aos)]
            total += w * f(*prims)
        return total

    for mu, nu in ((0, 1), (3, 8), (4, 4), (2, 11)):
        assert t.T[mu, nu] == pytest.approx(contract(free_kinetic, ao[mu], ao[nu]), rel=1e-12, abs=1e-14)
        assert t.V[mu, nu] == pytest.approx(contract(lambda a, b: free_nuclear(a, b, g), ao[mu], ao[nu]), rel=1e-12, abs=1e-14)
    for idx in ((0, 1, 2, 3), (3, 3, 4, 8), (11, 0, 5, 7)):
        assert t.eri[idx] == pytest.approx(contract(free_eri, *[ao[i] for i in idx]), rel=1e-11, abs=1e-14)


def test_translation_and_rotation_invariance():
    _, ref = _h2_sto3g()
    _, moved = _h2_sto3g((3.1, -2.0, 0.7))
    for name in ("S", "T", "V"):
        assert np.allclose(getattr(moved, name), getattr(ref, name), atol=1e-12)
    assert np.allclose(moved.eri_packed, ref.eri_packed, atol=1e-12)
    # rotation with p functions: tensors transform, invariant spectra
    g = build_ring_chain(3, 1.8)
    rot = Rotation.from_euler("xyz", [0.3, -0.7, 1.1])
    g2 = Geometry(g.charges, rot.apply(g.positions))
    basis = load_basis("pob-tzvp")
    t1 = assemble_free_tensors(g, build_ao_basis(g, basis))
    t2 = assemble_free_tensors(g2, build_ao_basis(g2, basis))
    for name in ("S", "T", "V"):
        assert np.allclose(np.linalg.eigvalsh(getattr(t1, name)), np.linalg.eigvalsh(getattr(t2, name)), atol=1e-10)
    n = t1.n_ao
    e1 = np.linalg.eigvalsh(t1.eri.reshape(n * n, n * n))
    e2 = np.linalg.eigvalsh(t2.eri.reshape(n * n, n * n))
    assert np.allclose(e1, e2, atol=1e-10)
    assert t1.nuclear_repulsion == pytest.approx(t2.nuclear_repulsion, rel=1e-13)


def test_periodic_geometry_rejected():
    from cliffordqc.topology import build_torus_chain

    g = build_torus_chain(2, 1.8)
    with pytest.raises(ValueError):
        assemble_free_tensors(g, build_ao_basis(g, load_basis("minimal")))
