import json
import math

import pytest

import heatlab


def test_line_closed_forms():
    g = heatlab.gen_lattice(1, 41)
    walk = heatlab.Walk(g, 0.0)
    for R in range(1, 15):
        assert heatlab.mean_exit(walk, 20, R) == pytest.approx(R * R, rel=1e-12)
    assert heatlab.resistance(heatlab.Walk(g), 20, 1, 3) == pytest.approx(1.5)
    assert heatlab.harnack(heatlab.Walk(g), 20, 2) == pytest.approx(5 / 3)
    assert g.mu[20] * heatlab.green(walk, 20, 6, 20) == pytest.approx(6.0)


def test_exit_distribution_is_a_cdf():
    g = heatlab.gen_sierpinski(4)
    walk = heatlab.Walk(g)
    cdf = heatlab.exit_distribution(walk, 0, 4, 200)
    assert cdf[0] == 0.0
    assert all(b >= a for a, b in zip(cdf, cdf[1:]))
    assert 0.99 < cdf[-1] <= 1.0


def test_heat_kernel_mass_and_symmetry():
    g = heatlab.gen_lattice(2, 9)
    walk = heatlab.Walk(g)
    row = heatlab.heat_kernel_row(walk, 7, 10)
    assert sum(p * m for p, m in zip(row, g.mu)) == pytest.approx(1.0, abs=1e-12)
    assert heatlab.heat_kernel(walk, 7, 10, 33) == pytest.approx(heatlab.heat_kernel(walk, 7, 33, 10), abs=1e-15)


def test_graph_round_trip_and_errors():
    g = heatlab.gen_sierpinski(2)
    assert g.n == 15 and len(g.edges) == 27
    back = heatlab.graph_from_json(g.to_json())
    assert back.hash() == g.hash()
    with pytest.raises(heatlab.HeatlabError):
        heatlab.gen_lattice(1, 2)


def test_iteration_counts_and_chain():
    walk = heatlab.Walk(heatlab.gen_lattice(1, 101))
    kappa, nu = heatlab.iter_counts(walk, 50, 1e6, 5)
    assert kappa == 0 and nu == 1
    _, nu_fast = heatlab.iter_counts(walk, 50, 0.5, 5)
    assert math.isinf(nu_fast)
    bound, exact = heatlab.chain_bound(walk, 40, 52, 200.0, 2)
    assert 0.0 <= bound <= exact


def test_cli_in_process():
    code, out, _ = heatlab.run(["gen", "--family", "lattice", "--dim", "1", "--side", "9"])
    assert code == 0 and json.loads(out)["n"] == 9
    code, _, err = heatlab.run(["mean-exit", "--radii", "1"])
    assert code == 2 and "graph" in err
