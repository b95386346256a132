from fractions import Fraction as F

import pytest

from arithdyn import (
    MonicPoly,
    canonical_height,
    disjoint_certificate,
    is_rational_preperiodic,
    prep_intersect,
    preperiodic_complex,
    rational_prep,
    sample,
)
from arithdyn.preperiodic import CapExceeded

Z2 = MonicPoly.make(2)
CHEB = MonicPoly.from_text("z^2-2")
HALF = MonicPoly.from_text("z^2+1/2")


def test_disjoint_certificate_examples():
    assert disjoint_certificate(Z2, HALF).p == 2
    f3 = MonicPoly.from_text("z^2+1/3")
    assert disjoint_certificate(f3, MonicPoly.from_text("z^2+1/3")) is None
    assert disjoint_certificate(Z2, CHEB) is None
    # symmetrized: large constant on the first polynomial also fires
    assert disjoint_certificate(HALF, Z2).p == 2


def test_preperiodic_complex_power_map():
    clusters = preperiodic_complex(Z2, 3, 2)
    for z, tags in clusters:
        assert abs(abs(z) - 1) < 1e-9 or abs(z) < 1e-9
        for m, n in tags:
            assert 0 <= n < m <= 3


def test_preperiodic_complex_chebyshev_m2_n1():
    clusters = preperiodic_complex(CHEB, 2, 1)
    pts = [z for z, tags in clusters if (2, 1) in tags]
    assert any(abs(z - 2) < 1e-9 for z in pts)
    assert any(abs(z + 1) < 1e-9 for z in pts)


def test_preperiodic_complex_count_bound():
    for m_cap, n_cap in ((2, 1), (3, 2)):
        clusters = preperiodic_complex(Z2, m_cap, n_cap)
        total_roots = sum(len(tags) for _, tags in clusters)
        bound = sum(
            2**m + 2**n for m in range(1, m_cap + 1) for n in range(0, min(n_cap, m - 1) + 1)
        )
        assert total_roots <= bound


def test_preperiodic_complex_degree_budget():
    with pytest.raises(CapExceeded):
        preperiodic_complex(MonicPoly.make(6), 6, 2)


def test_prep_intersect_chebyshev_benchmark():
    cert = prep_intersect(Z2, CHEB)
    assert cert.verdict == "intersection"
    minpolys = sorted(p.min_poly for p in cert.points)
    assert minpolys == [(-1, 1), (0, 1), (1, 1)]  # roots 1, 0, -1
    assert all(p.hf == 0.0 and p.hg == 0.0 for p in cert.points)


def test_prep_intersect_disjoint_and_errors():
    cert = prep_intersect(Z2, HALF)
    assert cert.verdict == "disjoint" and cert.witness_place == 2
    with pytest.raises(ValueError):
        prep_intersect(Z2, Z2)


def test_prep_intersect_same_julia_flag():
    cert = prep_intersect(Z2, MonicPoly.make(4), m_cap=3, n_cap=2)
    assert cert.suspected_equal
    assert cert.matched_clusters > 8


def test_certificate_implies_no_matches(rng):
    # Certified-disjoint pairs must produce zero matched clusters in search.
    checked = 0
    while checked < 25:
        f = sample(2, 25, rng, centered=True)
        g = sample(2, 25, rng)
        if g == f or disjoint_certificate(f, g) is None:
            continue
        cert = prep_intersect(f, g, m_cap=3, n_cap=2, use_certificate=False,
                              check_suspected_equal=False)
        assert cert.matched_clusters == 0, (f.to_text(), g.to_text())
        checked += 1


def test_rational_prep_examples():
    assert rational_prep(CHEB) == [F(-2), F(-1), F(0), F(1), F(2)]
    assert rational_prep(Z2) == [F(-1), F(0), F(1)]
    assert rational_prep(MonicPoly.from_text("z^2+1")) == []


def test_rational_prep_forward_invariant(rng):
    for _ in range(10):
        f = sample(2, 6, rng)
        pts = set(rational_prep(f))
        for x in pts:
            assert f.eval_exact(x) in pts


def test_rational_prep_fractional():
    # z^2 - z: rational preperiodic points include 0, 1 and -? check exact walk
    f = MonicPoly.from_text("z^2 - z")
    pts = rational_prep(f)
    assert F(0) in pts and F(1) in pts
    # bad-place polynomial keeps denominators under control
    g = MonicPoly.from_text("z^2-3/4")
    pts2 = rational_prep(g)
    assert F(-1, 2) in pts2 and F(3, 2) in pts2  # -1/2 is fixed; 3/2 maps to it


def test_is_rational_preperiodic_matches_height(rng):
    for _ in range(10):
        f = sample(2, 8, rng)
        for _ in range(5):
            x = F(int(rng.integers(-4, 5)), int(rng.integers(1, 5)))
            pre = is_rational_preperiodic(f, x)
            hval = canonical_height(f, x).value
            if pre:
                assert hval <= 1e-6
            else:
                assert hval > 1e-9
