import math

import numpy as np
import pytest

from gsbq.errors import DegenerateIterate, DomainError, NonConvergence, TailTruncation
from gsbq.grid import RealField, make_grid
from gsbq.model import WaveParams
from gsbq.petviashvili import (
    SolveOptions,
    SolitaryWave,
    evaluate_diagnostics,
    exact_beta,
    exact_profile,
    gaussian_init,
    petviashvili_solve,
    read_profile_csv,
    solitary_residual,
    write_profile_csv,
)


def l2(g, a):
    return math.sqrt(g.integrate(a * a))


def test_exact_profile_values(big_grid):
    w = exact_profile(2, 0.0, big_grid)
    assert w.params.beta == pytest.approx(-13 / 6, rel=1e-15)
    assert w.phi.max() == pytest.approx(35 / 24, rel=1e-14)
    # width argument sqrt(6)/12: phi = A sech^4(kappa x)
    x = 1.3
    expect = 35 / 24 / math.cosh(math.sqrt(6) / 12 * x) ** 4
    from gsbq.petviashvili import exact_samples

    assert exact_samples(2, 0.0, np.array([x]))[0] == pytest.approx(expect, rel=1e-14)
    w3 = exact_profile(3, 0.0, big_grid)
    assert w3.phi.max() == pytest.approx(math.sqrt(1.875), rel=1e-14)
    assert w3.params.beta == pytest.approx(-2.5)
    for wave in (w, w3):
        assert abs(wave.phi[0]) <= 1e-12 * wave.phi.max()


@pytest.mark.parametrize("p", [2, 3, 4, 5])
@pytest.mark.parametrize("c", [0.0, 0.4, 0.8])
def test_exact_profile_solves_the_profile_equation(big_grid, p, c):
    w = exact_profile(p, c, big_grid)
    assert w.params.beta == pytest.approx(exact_beta(p, c))
    assert solitary_residual(w) <= 1e-8 * w.phi.max()


def test_exact_profile_rejects_short_box():
    with pytest.raises(TailTruncation):
        exact_profile(2, 0.0, make_grid(10.0, 256))
    with pytest.raises(ValueError):
        exact_profile(2.5, 0.0, make_grid(200.0, 4096))


def test_recovers_exact_solution(big_grid, exact_p2):
    w = petviashvili_solve(exact_p2.params, big_grid)
    assert w.diagnostics.iterations <= 200
    assert l2(big_grid, w.phi - exact_p2.phi) <= 1e-5
    assert w.diagnostics.ik_gap_rel <= 1e-8


def test_cubic_ground_state_satisfies_identities(mid_grid):
    w = petviashvili_solve(WaveParams(0.0, 0.0, 3.0), mid_grid)
    d = w.diagnostics
    assert d.ik_gap_rel <= 1e-8
    assert d.pohozaev_rel <= 1e-6
    assert d.m_deviation <= 1e-10
    assert d.residual_sup <= 1e-6 * w.phi.max()


def test_even_parity_profile_is_positive_with_real_decay_rates(mid_grid):
    # for beta < -beta_star the kernel is positive, so phi = kernel * f(phi) > 0
    w = petviashvili_solve(WaveParams(-3.0, 0.3, 3.0, "even"), mid_grid)
    assert w.phi.min() > -1e-10 * w.phi.max()
    assert w.diagnostics.ik_gap_rel <= 1e-8


def test_profile_is_even_and_centred(mid_grid):
    w = petviashvili_solve(WaveParams(-0.5, 0.2, 2.0), mid_grid)
    phi = w.phi
    # nodes are -L + j dx, so x -> -x maps j to n - j
    np.testing.assert_allclose(phi[1:], phi[:0:-1], atol=1e-10 * phi.max())
    assert np.argmax(phi) == mid_grid.n_points // 2


def test_domain_and_degenerate_inputs(mid_grid):
    with pytest.raises(DomainError):
        petviashvili_solve(WaveParams(0.0, 1.5), mid_grid)
    with pytest.raises(DegenerateIterate):
        petviashvili_solve(WaveParams(0.0, 0.0, 2.0, "even"), mid_grid, init=RealField(mid_grid, np.zeros(2048)))
    with pytest.raises(DegenerateIterate):
        petviashvili_solve(WaveParams(0.0, 0.0, 2.0, "even"), mid_grid, init=-1.0 * gaussian_init(mid_grid))


def test_iteration_budget(mid_grid):
    with pytest.raises(NonConvergence):
        petviashvili_solve(WaveParams(0.0, 0.0, 2.0), mid_grid, opts=SolveOptions(max_iterations=3))
    with pytest.raises(ValueError):
        SolveOptions(max_iterations=0)


def test_short_box_is_reported(mid_grid):
    with pytest.raises(TailTruncation):
        petviashvili_solve(WaveParams(1.9, 0.0, 2.0), make_grid(20.0, 512))


def test_residual_examples(mid_grid):
    prm = WaveParams(0.0, 0.0, 2.0)
    zero = SolitaryWave(prm, RealField(mid_grid, np.zeros(2048)), None)
    assert solitary_residual(zero) == 0.0
    gauss = SolitaryWave(prm, RealField(mid_grid, np.exp(-mid_grid.nodes**2)), None)
    assert solitary_residual(gauss) >= 0.1


def test_initial_guess_does_not_matter(mid_grid):
    prm = WaveParams(-1.0, 0.3, 2.0)
    a = petviashvili_solve(prm, mid_grid)
    b = petviashvili_solve(prm, mid_grid, init=gaussian_init(mid_grid, amplitude=3.0, width=2.0))
    assert np.max(np.abs(a.phi - b.phi)) <= 1e-9 * a.phi.max()


def test_profile_csv_round_trip(tmp_path, exact_p2):
    path = tmp_path / "profile.csv"
    write_profile_csv(exact_p2, path)
    assert path.read_text().splitlines()[0] == "x,phi"
    x, phi = read_profile_csv(path)
    np.testing.assert_array_equal(x, exact_p2.grid.nodes)
    np.testing.assert_array_equal(phi, exact_p2.phi)


def test_diagnostics_dict(exact_p2):
    d = evaluate_diagnostics(exact_p2.params, exact_p2.profile).to_dict()
    assert set(d) >= {"iterations", "residual_sup", "ik_gap_rel", "pohozaev_rel", "boundary_tail"}
