import json
import math
import numpy as np
import pytest
from dqm.core.params import QPower
from dqm.domain.errors import (
    EvaluationSingularity, MissingParameter, NotImplementedForFamily, OutOfDomain, UnknownFamily, UnknownParameter,
)
from dqm.families.askey import Charlier, Krawtchouk
from dqm.families.base import ParameterDef
from dqm.families.catalog import XI_STUBS, FamilyCatalog
from dqm.families.series import hyper, qhyper, qpochhammer
from dqm.infrastructure.computation_context import ComputationContext
from dqm.services.casorati import varphi_ell
from dqm.services.family_services import (
    eval_energy, eval_potentials, eval_sinusoidal, grid_for, grid_potentials, leading_coefficient, lookup_family, norm_factor,
    parse_parameters,
    phi0_closed_form_check, polynomial_table, sample, shift_factors, validate_parameters,
)


def test_catalog_contents() -> None:
    catalog = FamilyCatalog.default(with_plugins=False)
    assert set(catalog.ids()) == {
        "krawtchouk", "hahn", "racah", "q_racah", "meixner", "charlier",
        "dual_quantum_q_krawtchouk", "dual_little_q_jacobi", "dual_alternative_q_charlier",
    }
    assert len(catalog.stubs()) == len(XI_STUBS) == 16
    assert all(info["xi_implemented"] for info in catalog.catalog_list())
    finite = {info["id"] for info in catalog.catalog_list() if info["finite"]}
    assert finite == {"krawtchouk", "hahn", "racah", "q_racah", "dual_quantum_q_krawtchouk"}


def test_catalog_export_is_json() -> None:
    doc = json.loads(FamilyCatalog.default(with_plugins=False).export_catalog())
    assert doc["schema"] == "dqm-report/1"
    assert doc["kind"] == "catalog"
    assert len(doc["families"]) == 9
    q_racah = next(f for f in doc["families"] if f["id"] == "q_racah")
    assert q_racah["most_generic"]
    assert q_racah["defaults"]["q"] == 0.7


def test_stub_has_no_xi() -> None:
    catalog = FamilyCatalog.default(with_plugins=False)
    stub = catalog.lookup_stub("dual_hahn").unwrap()
    with pytest.raises(NotImplementedForFamily):
        stub.xi(2, np.arange(3.0))


def test_lookup_unknown_family() -> None:
    assert isinstance(lookup_family("legendre").unwrap_err(), UnknownFamily)


def test_unknown_parameter() -> None:
    family = lookup_family("krawtchouk").unwrap()
    err = parse_parameters(family, {"alpha": 1.0}).unwrap_err()
    assert isinstance(err, UnknownParameter)
    assert str(err) == "Family krawtchouk has no parameter alpha"


def test_missing_parameter() -> None:
    class Unset(Krawtchouk):
        parameters = (ParameterDef("p", None), ParameterDef("N", 8, "int", -1.0))

    assert isinstance(parse_parameters(Unset()).unwrap_err(), MissingParameter)
    assert parse_parameters(Unset(), {"p": 0.3}).unwrap().value("p") == 0.3


def test_integer_parameter_must_be_integral() -> None:
    family = Krawtchouk()
    assert isinstance(parse_parameters(family, {"N": 2.5}).unwrap_err(), OutOfDomain)


def test_q_parameters_are_powers(dqqk) -> None:
    family, lam, grid = dqqk
    assert lam.q == 0.5
    dlqj = lookup_family("dual_little_q_jacobi").unwrap()
    b = dlqj.make_parameters().entries["b"]
    assert isinstance(b, QPower)
    assert math.isclose(0.5 ** b.exponent, 0.5)


def test_out_of_domain_p(ctx: ComputationContext) -> None:
    family = lookup_family("dual_quantum_q_krawtchouk").unwrap()
    lam = family.make_parameters({"q": 0.5, "N": 3, "p": 4})
    err = validate_parameters(ctx, family.id, lam).unwrap_err()
    assert isinstance(err, OutOfDomain)
    assert err.parameter == "p"


def test_energies_and_sinusoidal(ctx: ComputationContext, dqqk, dlqj, daqc) -> None:
    family, lam, _ = dqqk
    assert math.isclose(float(eval_energy(ctx, family, lam, 2).unwrap()), 3.0)
    assert math.isclose(float(eval_sinusoidal(ctx, family, lam, 1).unwrap()), 0.5)
    assert math.isclose(float(eval_energy(ctx, *dlqj, 1).unwrap()), 0.5)
    assert math.isclose(float(eval_sinusoidal(ctx, *daqc, 1).unwrap()), 1.5)


def test_potentials_on_extended_grid(ctx: ComputationContext, krawtchouk) -> None:
    pair = eval_potentials(ctx, *krawtchouk, ell_max=1).unwrap()
    assert (pair.x_lo, pair.x_hi) == (-1, 10)
    B, D = pair.at(3)
    assert math.isclose(float(B), 2.0) and math.isclose(float(D), 1.8)
    assert float(pair.at(0)[1]) == 0.0
    assert float(pair.at(8)[0]) == 0.0


def test_varphi_two(ctx: ComputationContext, dqqk) -> None:
    family, lam, _ = dqqk
    values = varphi_ell(ctx, family, lam, 2, np.array([1])).unwrap()
    assert math.isclose(float(values[0]), 0.5)
    assert not ctx.failed_checks()


def test_polynomials_normalized_at_zero(krawtchouk, q_racah, dqqk) -> None:
    for family, lam, grid in (krawtchouk, q_racah, dqqk):
        for n in range(grid.x_max + 1):
            assert math.isclose(float(family.polynomial(n, np.zeros(1), lam)[0]), 1.0)


def test_polynomial_table_matches_series(ctx: ComputationContext, racah) -> None:
    family, lam, grid = racah
    table = polynomial_table(ctx, family, lam, range(4), grid).unwrap()
    assert table.values.shape == (4, grid.x_max + 1)
    assert not ctx.failed_checks()


def test_grid_for_truncates_infinite_families(ctx: ComputationContext) -> None:
    family = Charlier()
    grid = grid_for(ctx, family, family.make_parameters()).unwrap()
    assert not grid.finite
    assert grid.x_max >= 8
    assert grid.meta["tail"] < ctx.policy.tail_tol


def test_shift_structure(ctx: ComputationContext, q_racah) -> None:
    family, lam, grid = q_racah
    for n in (1, 2, 3):
        f, b = shift_factors(ctx, family, lam, n, grid).unwrap()
        assert math.isclose(f * b, float(family.energy(float(n), lam)), rel_tol=1e-9)
    leading_coefficient(ctx, family, lam, 2).unwrap()
    assert not ctx.failed_checks()


def test_phi0_closed_form(ctx: ComputationContext, dqqk, krawtchouk) -> None:
    for family, lam, grid in (dqqk, krawtchouk):
        phi0_closed_form_check(ctx, family, lam, grid).unwrap()
    assert not ctx.failed_checks()


def test_norm_factor(dqqk) -> None:
    family, lam, _ = dqqk
    assert math.isclose(norm_factor(family, lam, 3, range(2)), 42.0)
    assert math.isclose(norm_factor(family, lam, 3, [1, 2]), 24.0)


def test_series_helpers() -> None:
    assert math.isclose(float(hyper([-2, 1], [1], 1.0, 2)), 0.0)
    assert math.isclose(float(qpochhammer(0.5, 0.5, 2)), 0.5 * 0.75)
    assert math.isclose(float(qhyper([0.25], [], 0.5, 1.0, 0)), 1.0)


def test_twist_negates_named_entries(krawtchouk) -> None:
    family, lam, _ = krawtchouk
    twisted = family.twist(lam)
    assert twisted.value("N") == -8.0
    assert twisted.value("p") == lam.value("p")


def test_poles_outside_the_grid_read_as_nan() -> None:
    values = sample(lambda x: 1 / (x + 1), -1, 3, np.float64, "D", (0, 3))
    assert np.isnan(values[0])
    assert values[1:].tolist() == [1.0, 0.5, 1 / 3, 0.25]
    with pytest.raises(EvaluationSingularity):
        sample(lambda x: 1 / (x + 1), -1, 3, np.float64, "D")
    with pytest.raises(EvaluationSingularity):
        sample(lambda x: 1 / (x - 2), -1, 3, np.float64, "D", (0, 3))


def test_grid_potentials_at_shifted_parameters(ctx: ComputationContext, dlqj) -> None:
    family, lam = dlqj
    grid = grid_for(ctx, family, lam).unwrap()
    for s in range(4):
        B, D = grid_potentials(family, lam.shifted(s), grid, ctx.policy)
        assert len(B) == grid.x_max + 1
        assert np.all(B[:-1] > 0) and np.all(D[1:] > 0)
