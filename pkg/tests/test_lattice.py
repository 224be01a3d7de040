from fractions import Fraction
import random

import pytest

from kstab import (
    DivClass,
    IntersectionLattice,
    LatticeError,
    NotPseudoeffectiveError,
    chamber_radius,
    intersect,
    is_nef,
    restricted_volume,
    volume,
    vertical_lattice,
    zariski,
)
from kstab.corpus import corpus
from kstab.lattice import chamber_interval
from kstab.plfun import normalize_ge_fiber

from oracles import brute_force_zariski


def test_intersect_examples(blp2):
    H, E = blp2.basis("H"), blp2.basis("E")
    assert intersect(blp2, H + E, E) == -1
    assert intersect(blp2, blp2.zero(), E) == 0
    rng = random.Random(1)
    for _ in range(20):
        u = DivClass([Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(2)])
        v = DivClass([Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(2)])
        assert intersect(blp2, u, v) == intersect(blp2, v, u)


def test_intersect_dimension_mismatch(blp2):
    with pytest.raises(LatticeError):
        intersect(blp2, [1, 0, 0], [1, 0])


def test_is_nef(blp2):
    assert is_nef(blp2, [1, 0])
    assert not is_nef(blp2, [1, 1])
    assert is_nef(blp2, [0, 0])


def test_zariski_blp2(blp2):
    z = zariski(blp2, [1, 1])
    assert z.positive == DivClass([1, 0])
    assert z.negative == ((0, Fraction(1)),)
    assert z.is_pseff and z.is_big
    assert brute_force_zariski(blp2, [Fraction(1), Fraction(1)]) == ((1, 0), {0: 1})


def test_zariski_nef_is_its_own_positive_part(blp2):
    z = zariski(blp2, [1, 0])
    assert z.positive == DivClass([1, 0]) and z.negative == ()


def test_zariski_m1(m1):
    L = vertical_lattice(m1)
    u = m1.A_class() + m1.vertical([1, 2])
    z = zariski(L, u)
    assert z.positive == m1.A_class() + m1.vertical([1, 1])
    assert z.negative == ((1, Fraction(1)),)
    P, sig = brute_force_zariski(L, list(u))
    assert DivClass(P) == z.positive and sig == {1: 1}


def test_volume_examples(blp2, m1):
    assert volume(blp2, [1, 1]) == 1
    L = vertical_lattice(m1)
    assert volume(L, m1.A_class() + m1.vertical([1, 2])) == 4
    assert volume(blp2, [1, -2]) == 0
    assert not zariski(blp2, [1, -2]).is_pseff


def test_boundary_class_is_not_big(blp2):
    z = zariski(blp2, [1, -1])  # H - E: nef, square 0
    assert z.is_pseff and not z.is_big
    assert volume(blp2, [1, -1]) == 0


def test_restricted_volume_examples(m1, blp2):
    L = vertical_lattice(m1)
    u = m1.A_class() + m1.vertical([1, 2])
    assert restricted_volume(L, u, 1) == 0
    assert restricted_volume(L, u, 0) == 2
    assert restricted_volume(blp2, [2, -1], 0) == intersect(blp2, [2, -1], [0, 1])
    with pytest.raises(NotPseudoeffectiveError):
        restricted_volume(blp2, [1, -2], 0)


def test_lattice_validation():
    with pytest.raises(LatticeError):
        IntersectionLattice(["a", "b"], [[1, 2], [3, 1]])
    with pytest.raises(LatticeError):
        IntersectionLattice(["a"], [[1]], [("C", [1, 0])])
    with pytest.raises(LatticeError):
        IntersectionLattice(["a"], [[-11]], [("C", [1])])


def test_lattice_json_roundtrip(blp2):
    doc = blp2.to_json()
    again = IntersectionLattice.from_json(doc)
    assert again == blp2
    short = IntersectionLattice.from_json({"labels": ["H", "E"], "form": [["1", "0"], ["0", "-1"]], "test_curves": ["E"]})
    assert short.curve(0) == DivClass([0, 1])


def test_zariski_matches_brute_force_on_corpus():
    for model, D in corpus(seed=11, size=40):
        L = vertical_lattice(model, check=False)
        Dn, _ = normalize_ge_fiber(D)
        u = model.A_class() + model.vertical(Dn.coeffs)
        z = zariski(L, u)
        P, sig = brute_force_zariski(L, list(u))
        assert z.positive == DivClass(P)
        assert dict(z.negative) == sig


def test_chamber_radius_examples(blp2):
    # H + E moving along E: support {E} until sigma = 1 + s hits 0
    ch = chamber_interval(blp2, [1, 1], [0, 1])
    assert ch.back == 1 and ch.fwd is None
    assert chamber_radius(blp2, [1, 1], [0, 1]) == 1
    # 3H - E moving along -E: H - E direction ... P.(H-E) = 3 - 1 = 2 decreases at rate 1
    assert chamber_interval(blp2, [3, -1], [0, -1]).fwd == 2


def test_diffvol_exact_inside_chamber(blp2):
    u = DivClass([3, Fraction(-1, 2)])
    E = DivClass([0, 1])
    r = chamber_radius(blp2, u, E)
    for h in (Fraction(1, 64), Fraction(1, 128)):
        assert h < r
        d = (volume(blp2, u + h * E) - volume(blp2, u - h * E)) / (2 * h)
        assert d == 2 * restricted_volume(blp2, u, 0)


def test_linearity_across_fiber_relation(m1):
    """sum_i b_i <P>_{|E_i} = <P>_{|X_1}; the general fiber X_1 carries degree V."""
    L = vertical_lattice(m1)
    for coeffs in ([1, 2], [3, 1], [1, 1]):
        u = m1.A_class() + m1.vertical(coeffs)
        lhs = sum(b * restricted_volume(L, u, i) for i, b in enumerate(m1.multiplicities))
        assert lhs == intersect(L, zariski(L, u).positive, m1.fiber_class()) == m1.V
