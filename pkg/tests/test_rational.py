from fractions import Fraction

import pytest

from kstab.rational import (
    SingularSystemError,
    bilinear,
    fmt,
    fmt_float,
    is_negative_definite,
    is_symmetric,
    solve,
    to_fraction,
)


def test_to_fraction_accepts_strings_ints_floats():
    assert to_fraction("3/6") == Fraction(1, 2)
    assert to_fraction(" -4 ") == -4
    assert to_fraction(0.5) == Fraction(1, 2)
    assert to_fraction(Fraction(2, 3)) == Fraction(2, 3)


@pytest.mark.parametrize("bad", ["", "   ", None, True, [1]])
def test_to_fraction_rejects_garbage(bad):
    with pytest.raises((TypeError, ValueError)):
        to_fraction(bad)


def test_fmt_is_always_p_over_q():
    assert fmt(3) == "3/1"
    assert fmt(Fraction(-6, 4)) == "-3/2"
    assert fmt_float(1 / 3) == 0.333333333333


def test_solve_exact():
    A = [[2, 1], [1, 3]]
    x = solve(A, [3, 5])
    assert x == [Fraction(4, 5), Fraction(7, 5)]


def test_solve_singular():
    with pytest.raises(SingularSystemError):
        solve([[1, 2], [2, 4]], [1, 2])


def test_negative_definite():
    assert is_negative_definite([[-1]])
    assert is_negative_definite([[-2, 1], [1, -2]])
    assert not is_negative_definite([[-1, 1], [1, -1]])
    assert not is_negative_definite([[1]])


def test_symmetry_and_bilinear():
    form = [[1, 2], [2, -1]]
    assert is_symmetric(form)
    assert not is_symmetric([[1, 2], [3, 1]])
    assert bilinear(form, [1, 1], [0, 1]) == 1
