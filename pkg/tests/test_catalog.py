import math

import numpy as np
import pytest

from psgauss import catalog, dsl, gaussmap
from psgauss.algebra import Signature
from psgauss.errors import CatalogError, ValidationError
from psgauss.gaussmap import Verdict

NAMES = ["clifford", "lorentz_clifford", "tensor_product", "lightcone_example", "geodesic_sphere", "small_sphere"]


def test_list_names():
    assert catalog.list_names() == NAMES


def test_unknown_name():
    with pytest.raises(CatalogError, match="nosuch"):
        catalog.get("nosuch")


def test_clifford_entry():
    e = catalog.get("clifford")
    assert e.expected is Verdict.ONE_TYPE and e.expected_values["lambda"] == 2.0
    assert catalog.expected_label(e) == "OneType(2)"
    x = dsl.evaluate(e.spec, 1.0, 2.0).value
    np.testing.assert_allclose(x, np.array([math.cos(1), math.sin(1), math.cos(2), math.sin(2)]) / math.sqrt(2))


def test_signatures():
    sigs = {n: catalog.get(n).spec.signature for n in NAMES}
    assert sigs == {
        "clifford": Signature(4, 0),
        "lorentz_clifford": Signature(4, 1),
        "tensor_product": Signature(4, 2),
        "lightcone_example": Signature(4, 1),
        "geodesic_sphere": Signature(5, 1),
        "small_sphere": Signature(4, 0),
    }


@pytest.fixture(scope="module")
def verdicts():
    out = {}
    for name in NAMES:
        e = catalog.get(name)
        out[name] = gaussmap.classify(e.spec, *e.grid())
    return out


@pytest.mark.parametrize("name", NAMES)
def test_expected_verdict_reproduced(verdicts, name):
    e = catalog.get(name)
    assert catalog.matches(e, verdicts[name])


@pytest.mark.parametrize("name", NAMES)
def test_expected_values_reproduced(verdicts, name):
    e, r = catalog.get(name), verdicts[name]
    vals = e.expected_values
    assert np.max(r.points["mean_curvature"]) == pytest.approx(vals["H"], abs=1e-9)
    np.testing.assert_allclose(r.points["K"], vals["K"], atol=1e-8)
    if "S_h" in vals:
        np.testing.assert_allclose(r.points["S_h"], vals["S_h"], atol=1e-8)
    if "lambda" in vals:
        assert r.lam == pytest.approx(vals["lambda"], abs=1e-7)


def test_matches_rejects_wrong_lambda(verdicts):
    e = catalog.get("clifford")
    fake = gaussmap.ClassificationVerdict(Verdict.ONE_TYPE, 2.5, {}, {}, {})
    assert not catalog.matches(e, fake)
    assert not catalog.matches(catalog.get("small_sphere"), verdicts["clifford"])


def test_pad_layout():
    spec = catalog.get("lorentz_clifford").spec
    padded = catalog.pad(spec, 7, 2)
    assert padded.signature == Signature(7, 2)
    x = dsl.evaluate(padded, 0.4, 0.3).value
    base = dsl.evaluate(spec, 0.4, 0.3).value
    # three spacelike, then 2 extra spacelike zeros, then one extra timelike zero, then the old timelike slot
    np.testing.assert_array_equal(x, [base[0], base[1], base[2], 0, 0, 0, base[3]])


def test_pad_cannot_shrink():
    with pytest.raises(ValidationError):
        catalog.pad(catalog.get("tensor_product").spec, 5, 1)


@pytest.mark.parametrize("name", ["clifford", "tensor_product", "lightcone_example"])
def test_padded_verdicts_unchanged(name):
    e = catalog.get(name)
    padded = catalog.pad(e.spec, 6, 2)
    r = gaussmap.classify(padded, *e.grid(7, 7))
    assert catalog.matches(e, r)


@pytest.mark.parametrize("name", NAMES)
def test_export_round_trip(name):
    text = catalog.export(name)
    assert text.startswith(f"# {name}: ")
    assert dsl.parse(text) == catalog.get(name).spec


def test_clifford_grid_skips_periodic_endpoint():
    u, v = catalog.get("clifford").grid()
    assert len(u) == 441 and u.max() < 2 * math.pi
