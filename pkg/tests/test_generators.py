import pytest

from services.generators import generate_graph


def test_path():
    g = generate_graph("path", 5)
    assert (g.n, g.m) == (5, 4)
    assert g.n_off == 0


def test_star_center_is_vertex_zero():
    g = generate_graph("star", 9)
    assert g.degree(0) == 8


def test_grid_dimensions():
    g = generate_graph("grid", 3, 4)
    assert (g.n, g.m) == (12, 17)


def test_cliques_joined_by_one_edge():
    g = generate_graph("cliques-bridge", 12)
    assert g.m == 2 * 15 + 1
    assert g.has_edge(5, 6)


def test_gnm_is_deterministic_per_seed():
    first = generate_graph("gnm", 30, 60, n_off=7, seed=4)
    again = generate_graph("gnm", 30, 60, n_off=7, seed=4)
    assert first.to_text() == again.to_text()
    assert first.m == 60
    assert first.n_off == 7


@pytest.mark.parametrize(
    "args",
    [("gnm", 4, 7), ("gnm", 4, None), ("path", 3, None, 4), ("torus", 5, None), ("star", 0, None)],
)
def test_infeasible_parameters_are_rejected(args):
    with pytest.raises(ValueError):
        generate_graph(*args)
