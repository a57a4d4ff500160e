import numpy as np
import pytest

from core.entities.dirac import MassParameter, Potential
from core.entities.errors import GridError
from core.entities.grid import SpacetimeGrid, SpinorField
from core.entities.two_particle import PAIR_COMPONENTS, TwoParticleField
from core.use_cases.dirac_core import build_gamma_set
from core.use_cases.expectations import expect_1
from core.use_cases.functionals import a1
from core.use_cases.nparticle_ext import (a1_nparticle, a1_nparticle_terms, expect_1_nparticle,
                                          on_particle)

GRID = SpacetimeGrid(n_t=4, n_x=4, dt=0.25, dx=0.5)


@pytest.fixture
def pair(make_field):
    return make_field(GRID), make_field(GRID, offset=0.5)


def test_operators_lift_onto_their_own_particle():
    gamma0 = build_gamma_set().gamma0
    assert np.allclose(on_particle(gamma0, 0), np.kron(gamma0, np.eye(4)))
    assert np.allclose(on_particle(gamma0, 1), np.kron(np.eye(4), gamma0))
    assert on_particle(gamma0, 0).shape == (PAIR_COMPONENTS, PAIR_COMPONENTS)


def test_lifting_rejects_bad_inputs():
    with pytest.raises(GridError):
        on_particle(np.eye(3), 0)
    with pytest.raises(GridError):
        on_particle(np.eye(4), 2)


def test_product_state_expectation_factorizes(pair):
    psi_a, psi_b = pair
    psi2 = TwoParticleField.product(psi_a, psi_b)
    gamma0 = build_gamma_set().gamma0
    assert expect_1_nparticle(on_particle(gamma0, 0), psi2) == pytest.approx(expect_1(gamma0, psi_a))
    assert expect_1_nparticle(on_particle(gamma0, 1), psi2) == pytest.approx(expect_1(gamma0, psi_b))


def test_callable_operator_is_applied_to_the_field(pair):
    psi2 = TwoParticleField.product(*pair)
    assert expect_1_nparticle(lambda field: 2.0 * field.values, psi2) == pytest.approx(2.0)


def test_pair_operator_must_be_sixteen_square(pair):
    with pytest.raises(GridError):
        expect_1_nparticle(np.eye(4), TwoParticleField.product(*pair))


def test_product_state_a1_splits_per_particle(pair):
    psi_a, psi_b = pair
    potential, mass = Potential.zeros(GRID), MassParameter(1.0)
    terms = a1_nparticle_terms(TwoParticleField.product(psi_a, psi_b), (potential, potential), mass)
    assert terms[0] == pytest.approx(a1(psi_a, potential, mass), rel=1e-10)
    assert terms[1] == pytest.approx(a1(psi_b, potential, mass), rel=1e-10)


def test_swapping_particles_swaps_terms(pair):
    psi2 = TwoParticleField.product(*pair)
    swapped = TwoParticleField.from_matrix(GRID, GRID, psi2.as_matrix().T)
    potentials = (Potential.zeros(GRID), Potential.zeros(GRID))
    masses = (MassParameter(1.0), MassParameter(2.0))
    forward = a1_nparticle_terms(psi2, potentials, masses)
    backward = a1_nparticle_terms(swapped, potentials, masses[::-1])
    assert backward == pytest.approx(forward[::-1], rel=1e-10)


def test_total_a1_is_the_sum_of_terms(pair):
    psi2 = TwoParticleField.product(*pair)
    potentials = (Potential.zeros(GRID), Potential.zeros(GRID))
    assert a1_nparticle(psi2, potentials, MassParameter(1.0)) == pytest.approx(
        sum(a1_nparticle_terms(psi2, potentials, MassParameter(1.0))))


def test_a1_needs_one_potential_per_particle(pair):
    with pytest.raises(GridError):
        a1_nparticle(TwoParticleField.product(*pair), (Potential.zeros(GRID),), MassParameter(1.0))


def test_matrix_view_inverts(rng):
    other = SpacetimeGrid(n_t=3, n_x=5, dt=0.25, dx=0.5)
    shape = (GRID.n_t, GRID.n_x, other.n_t, other.n_x, PAIR_COMPONENTS)
    psi2 = TwoParticleField(GRID, other, rng.normal(size=shape) + 1j * rng.normal(size=shape))
    rebuilt = TwoParticleField.from_matrix(GRID, other, psi2.as_matrix())
    assert np.array_equal(rebuilt.values, psi2.values)
    assert psi2.as_matrix().shape == psi2.dims


def test_equal_time_slice_picks_matching_times(pair):
    psi2 = TwoParticleField.product(*pair)
    diagonal = psi2.equal_time_slice()
    assert diagonal.shape == (GRID.n_t, GRID.n_x, GRID.n_x, PAIR_COMPONENTS)
    assert np.array_equal(diagonal[2], psi2.values[2, :, 2])


def test_equal_time_slice_needs_matching_clocks(pair):
    other = SpacetimeGrid(n_t=3, n_x=4, dt=0.25, dx=0.5)
    psi_b = SpinorField(other, np.ones(other.shape))
    with pytest.raises(GridError):
        TwoParticleField.product(pair[0], psi_b).equal_time_slice()


def test_product_norm_multiplies(pair):
    psi_a, psi_b = pair
    expected = (np.vdot(psi_a.values, psi_a.values).real * np.vdot(psi_b.values, psi_b.values).real
                * GRID.cell_volume ** 2)
    assert TwoParticleField.product(psi_a, psi_b).norm() == pytest.approx(expected)
    assert TwoParticleField.product(psi_a, psi_b).metadata()["representation"] == "independent-times"


def test_equal_time_reduction_records_itself_in_metadata(pair):
    psi2 = TwoParticleField.product(*pair)
    reduced = psi2.equal_time_field()
    assert np.array_equal(reduced.values, psi2.equal_time_slice())
    assert np.array_equal(reduced.times, GRID.times)
    metadata = reduced.metadata()
    assert metadata["representation"] == "equal-time"
    assert metadata["reduced_from"] == psi2.metadata()["representation"]
    assert metadata["time_axis"] == "shared"
    assert "t_a = t_b" in metadata["note"]
    assert psi2.metadata()["equal_time_reduction"] == metadata["note"]
