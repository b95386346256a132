import math
from fractions import Fraction as F

import numpy as np
import pytest

from arithdyn import (
    LogValue,
    MonicPoly,
    PlaceQ,
    SliceSpec,
    classify_places,
    count_rationals_upto,
    height,
    is_ordinary,
    local_profile,
    sample,
    sample_rational,
)


def test_parse_and_format():
    f = MonicPoly.from_text("z^3 + (3/4)z + 7")
    assert f.coeffs == (F(7), F(3, 4), F(0))
    assert MonicPoly.from_text(f.to_text()) == f
    assert MonicPoly.from_text("z^2-2").coeffs == (F(-2), F(0))
    assert MonicPoly.from_text("z^2+(1/7)z+1/11").coeffs == (F(1, 11), F(1, 7))
    assert MonicPoly.from_text("z^2 - z").coeffs == (F(0), F(-1))
    with pytest.raises(ValueError):
        MonicPoly.from_text("2z^2 + 1")
    with pytest.raises(ValueError):
        MonicPoly.from_text("z + 1")


def test_json_roundtrip():
    f = MonicPoly.from_text("z^3 + (3/4)z + 7")
    assert MonicPoly.from_json_dict(f.to_json_dict()) == f
    assert f.to_json_dict()["coeffs"][1] == ["3", "4"]


def test_local_profile_examples():
    f = MonicPoly.make(2)
    prof = local_profile(f, PlaceQ.arch())
    assert math.isclose(float(prof.R), math.log(3))
    assert prof.M.is_zero()

    g = MonicPoly.from_text("z^2+1/2")
    p2 = local_profile(g, PlaceQ.finite(2))
    assert p2.reduction == "bad"
    assert float(p2.M) == pytest.approx(math.log(2))
    assert p2.R == LogValue.of_prime(2, F(1, 2))  # R = 2^(1/2)

    h = MonicPoly.from_text("z^3 + 5z")
    p5 = local_profile(h, PlaceQ.finite(5))
    assert p5.reduction == "explicit-good"
    assert p5.M.is_zero()


def test_height_examples():
    assert height(MonicPoly.make(2)).is_zero()
    assert height(MonicPoly.from_text("z^2+1/2")) == LogValue.of_prime(2)
    f = MonicPoly.from_text("z^3 + (3/4)z + 7")
    assert height(f) == LogValue.from_rational(4) + LogValue.from_rational(7)


def test_height_nonnegative_and_box_bound(rng):
    for _ in range(100):
        d = int(rng.integers(2, 6))
        X = int(rng.integers(1, 30))
        f = sample(d, X, rng)
        h = float(height(f))
        assert h >= 0
        assert h <= d * math.log(X) + 1e-9
    # equality iff all coefficients integral-like
    assert float(height(MonicPoly.from_text("z^2 - z"))) == 0.0


def test_is_ordinary_examples():
    f = MonicPoly.from_text("z^2+1/5")
    g = MonicPoly.from_text("z^2+(1/7)z+1/11")
    ok, witness = is_ordinary(f, g, 11, 0.2)
    assert ok and witness is None
    ok, witness = is_ordinary(f, MonicPoly.from_text("z^2+1/5"), 11, 0.2)
    assert not ok and "gcd" in witness
    ok, witness = is_ordinary(MonicPoly.from_text("z^2+2"), MonicPoly.make(2), 4, 0.1)
    assert not ok and "rad" in witness


def test_is_ordinary_preconditions():
    f = MonicPoly.from_text("z^2+z+1")  # not centered
    with pytest.raises(ValueError):
        is_ordinary(f, MonicPoly.make(2), 10, 0.1)
    with pytest.raises(ValueError):
        is_ordinary(MonicPoly.make(2), MonicPoly.from_text("z^2+100"), 10, 0.1)


def test_classify_places_examples():
    f = MonicPoly.from_text("z^2+1/5")
    g = MonicPoly.from_text("z^2+(1/7)z+1/11")
    prof = classify_places(f, g)
    assert prof.assoc == {5: ("f", 0), 7: ("g", 1), 11: ("g", 0)}
    assert prof.bad == ()
    assert prof.eps_ordinary(11, 0.2)
    assert prof.places() == (5, 7, 11)

    prof2 = classify_places(MonicPoly.from_text("z^2+1/6"), MonicPoly.from_text("z^2+1/10"))
    assert prof2.assoc == {3: ("f", 0), 5: ("g", 0)}
    assert prof2.bad == (2,)

    prof3 = classify_places(MonicPoly.make(2), MonicPoly.make(2))
    assert prof3.assoc == {} and prof3.bad == ()


def test_classify_partition_and_good_reduction(rng):
    for _ in range(100):
        d = int(rng.integers(2, 5))
        f = sample(d, 20, rng, centered=True)
        g = sample(d, 20, rng)
        prof = classify_places(f, g)
        places = prof.places()
        assert len(places) == len(set(prof.assoc) | set(prof.bad))
        assert not (set(prof.assoc) & set(prof.bad))
        for p, (side, j) in prof.assoc.items():
            other = g if side == "f" else f
            assert other.explicit_good_at(p)


def test_sum_assoc_mass_bound(rng):
    # For ordinary pairs each nonzero coefficient's associated places carry
    # log-mass at least (1 - 4 d eps) log X.
    d, X, eps = 2, 1000, F(1, 50)
    found = 0
    while found < 20:
        f = sample(d, X, rng, centered=True)
        g = sample(d, X, rng)
        ok, _ = is_ordinary(f, g, X, eps)
        if not ok:
            continue
        found += 1
        prof = classify_places(f, g)
        bound = (1 - 4 * d * float(eps)) * math.log(X)
        for side, poly in (("f", f), ("g", g)):
            for j, c in enumerate(poly.coeffs):
                if c == 0:
                    continue
                mass = sum(
                    -math.log(p) * _ord(c, p)
                    for p, tag in prof.assoc.items()
                    if tag == (side, j)
                )
                assert mass >= bound - 1e-9


def _ord(c, p):
    from arithdyn.rationals import ord_p

    return ord_p(c, p)


def test_sample_height_one():
    rng = np.random.default_rng(0)
    for _ in range(50):
        f = sample(3, 1, rng)
        assert all(c in (F(-1), F(0), F(1)) for c in f.coeffs)


def test_sample_slice_and_centered():
    rng = np.random.default_rng(1)
    sl = SliceSpec({1: F(0)})
    for _ in range(20):
        f = sample(3, 10, rng, slice=sl)
        assert f.coeffs[1] == 0
    g = sample(4, 10, rng, centered=True)
    assert g.centered
    with pytest.raises(ValueError):
        SliceSpec({0: F(1)})
    with pytest.raises(ValueError):
        sample(3, 10, rng, centered=True, slice=SliceSpec({2: F(1)}))


def test_sample_rational_marginal_chi2():
    # Empirical marginal over the 127-element set {H <= 10} vs uniform.
    rng = np.random.default_rng(123)
    n_cells = count_rationals_upto(10)
    assert n_cells == 127
    N = 10**5
    counts = {}
    for _ in range(N):
        x = sample_rational(10, rng)
        counts[x] = counts.get(x, 0) + 1
    assert len(counts) == n_cells
    expected = N / n_cells
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    # dof = 126; mean 126, sd ~ 15.9; allow 5 sigma
    assert chi2 < 126 + 5 * math.sqrt(2 * 126)
