import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import CONFIGS, random_network
from oracles import dense_hamiltonian, excitation_counts
from spinwire import ChainSpec, CouplingKind, NetworkError, build_network, chain_from_couplings, load_network
from spinwire.network import (
    Edge,
    SpinNetwork,
    chain_spec_of,
    dumps_network,
    full_hamiltonian,
    random_chain_couplings,
    z_total,
)


def test_heisenberg_300_chain_is_valid():
    net = build_network(
        {"kind": "heisenberg", "n_sites": 300, "strength": 1.0, "n_alice": 20, "n_bob": 20}
    )
    assert net.n_sites == 300
    assert len(net.edges) == 299
    assert all(e.kind is CouplingKind.HEISENBERG and e.strength == 1.0 for e in net.edges)
    assert net.alice_sites == tuple(range(20))
    assert net.bob_sites == tuple(range(280, 300))


def test_two_site_xy_is_smallest_legal_network():
    net = build_network({"n_sites": 2, "edges": [[0, 1, "xy", 1.0]], "alice_sites": [0], "bob_sites": [1]})
    assert net.edges == (Edge(0, 1, CouplingKind.XY, 1.0),)
    assert net.z_fields == (0.0, 0.0)


@pytest.mark.parametrize(
    "desc, match",
    [
        ({"n_sites": 10, "edges": [[0, 1, "xy", 1]], "alice_sites": [0, 5], "bob_sites": [5, 9]}, "overlapping"),
        ({"n_sites": 3, "edges": [[0, 1, "xy", 1], [1, 0, "xy", 2]], "alice_sites": [0], "bob_sites": [2]}, "duplicate"),
        ({"n_sites": 3, "edges": [[0, 3, "xy", 1]], "alice_sites": [0], "bob_sites": [2]}, "out of range"),
        ({"n_sites": 3, "edges": [[0, 1, "dm", 1]], "alice_sites": [0], "bob_sites": [2]}, "unknown coupling"),
        ({"n_sites": 3, "edges": [[1, 1, "xy", 1]], "alice_sites": [0], "bob_sites": [2]}, "self-coupling"),
        ({"n_sites": 3, "edges": [], "alice_sites": [], "bob_sites": [2]}, "non-empty"),
        ({"n_sites": 3, "edges": [], "alice_sites": [0], "bob_sites": [7]}, "out of range"),
        ({"n_sites": 3, "edges": [[0, 1, "xy", "nan"]], "alice_sites": [0], "bob_sites": [2]}, "non-finite"),
        ({"kind": "xy", "couplings": [1, 1], "n_alice": 2, "n_bob": 2}, "overlap"),
        ({"kind": "transverse", "couplings": [1], "n_alice": 1, "n_bob": 1}, "unknown coupling"),
        ({"foo": 1}, "neither"),
    ],
)
def test_build_network_rejects(desc, match):
    with pytest.raises(NetworkError, match=match):
        build_network(desc)


def test_network_error_is_a_value_error():
    with pytest.raises(ValueError):
        build_network({"kind": "nope", "couplings": [1], "n_alice": 1, "n_bob": 1})


def test_chain_from_couplings_random_29():
    couplings = random_chain_couplings(29, 0.95, 1.05, seed=6)
    net = chain_from_couplings(couplings, CouplingKind.XY, 2, 2)
    assert net.n_sites == 29
    assert net.alice_sites == (0, 1) and net.bob_sites == (27, 28)
    assert [e.strength for e in net.edges] == list(couplings)


def test_chain_from_couplings_uniform_104():
    net = chain_from_couplings([1.0] * 103, "xy", 2, 2)
    assert net.n_sites == 104
    assert [(e.i, e.j) for e in net.edges] == [(k, k + 1) for k in range(103)]


def test_zero_couplings_give_static_dynamics():
    net = chain_from_couplings([0.0, 0.0], CouplingKind.XY, 1, 1)
    assert net.n_sites == 3
    assert not np.any(full_hamiltonian(net))


def test_chain_from_couplings_errors():
    with pytest.raises(NetworkError):
        chain_from_couplings([], CouplingKind.XY, 1, 1)
    with pytest.raises(NetworkError, match="overlap"):
        chain_from_couplings([1.0] * 3, CouplingKind.XY, 3, 2)


def test_random_couplings_are_seeded_and_bounded():
    a = random_chain_couplings(29, 0.95, 1.05, seed=6)
    b = random_chain_couplings(29, 0.95, 1.05, seed=6)
    c = random_chain_couplings(29, 0.95, 1.05, seed=7)
    assert a == b and a != c
    assert len(a) == 28
    assert a[0] == a[-1] == 1.0
    assert all(0.95 <= x <= 1.05 for x in a)
    free = random_chain_couplings(29, 0.95, 1.05, seed=6, fixed_ends=False)
    assert free[0] != 1.0


def test_kind_aliases():
    assert CouplingKind.parse("Ising-Z") is CouplingKind.ISING_Z
    assert CouplingKind.parse("zz") is CouplingKind.ISING_Z
    assert CouplingKind.parse("XY") is CouplingKind.XY


@pytest.mark.parametrize("kind", list(CouplingKind))
def test_pair_operator_is_hermitian_and_conserving(kind):
    op = kind.pair_operator()
    z2 = np.diag([2.0, 0.0, 0.0, -2.0])
    assert np.array_equal(op, op.conj().T)
    assert np.allclose(op @ z2, z2 @ op, atol=0)


def test_pair_operator_hops_with_amplitude_two():
    # |01> <-> |10> in the (0, 1) block of sigma.sigma
    op = CouplingKind.XY.pair_operator()
    assert op[1, 2] == 2 and op[2, 1] == 2
    assert op[0, 0] == 0 and op[3, 3] == 0


def test_full_hamiltonian_matches_kron_oracle(rng):
    for n in (2, 3, 5):
        net = random_network(rng, n)
        assert np.allclose(full_hamiltonian(net), dense_hamiltonian(net), atol=1e-14)


def test_full_hamiltonian_refuses_large_networks():
    with pytest.raises(NetworkError):
        full_hamiltonian(chain_from_couplings([1.0] * 19, "xy", 1, 1))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 8))
def test_hamiltonian_hermitian_and_conserves_z_total(seed, n):
    net = random_network(np.random.default_rng(seed), n)
    h = full_hamiltonian(net)
    assert np.array_equal(h, h.conj().T)
    z = np.diag(z_total(n))
    assert np.abs(h @ z - z @ h).max() <= 1e-12


def test_z_total_counts_excitations():
    n = 5
    assert np.array_equal(z_total(n), n - 2 * excitation_counts(n))


def test_conservation_at_ten_sites(rng):
    net = random_network(rng, 10)
    h = full_hamiltonian(net)
    z = z_total(10)
    assert np.array_equal(h, h.conj().T)
    assert np.abs(h * z[None, :] - z[:, None] * h).max() <= 1e-12


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 12))
def test_round_trip(seed, n):
    net = random_network(np.random.default_rng(seed), n)
    again = build_network(json.loads(dumps_network(net)))
    assert again == net


def test_load_shipped_configs():
    h300 = load_network(CONFIGS / "heisenberg300.json")
    xy104 = load_network(CONFIGS / "xy104.json")
    r29 = load_network(CONFIGS / "xy29_random.json")
    assert (h300.n_sites, xy104.n_sites, r29.n_sites) == (300, 104, 29)
    # the seed flag overrides the file's seed
    other = load_network(CONFIGS / "xy29_random.json", seed=7)
    assert other != r29


def test_load_network_reports_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(NetworkError, match="not valid JSON"):
        load_network(path)


def test_chain_spec_round_trip():
    spec = ChainSpec.from_couplings([1.0, 0.5, 2.0], "xy")
    assert chain_spec_of(spec.to_network(1, 1)) == spec
    ring = SpinNetwork(
        3,
        (Edge(0, 1, CouplingKind.XY, 1), Edge(0, 2, CouplingKind.XY, 1), Edge(1, 2, CouplingKind.XY, 1)),
        (0.0,) * 3,
        (0,),
        (2,),
    )
    with pytest.raises(NetworkError, match="not an open chain"):
        chain_spec_of(ring)
