
import numpy as np
import pytest

from kzising.ed_oracle import (SpinChain, bogoliubov_ground_energy, build_hamiltonian, compare,
                               oracle_run)


def test_classical_limit():
    H = build_hamiltonian(4, 0.0).toarray()
    assert np.linalg.eigvalsh(H)[0] == pytest.approx(-4.0)


def test_paramagnetic_limit():
    chain = SpinChain.build(6)
    _, psi = chain.ground_state(1e4)
    assert chain.magnetization(psi) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("N", [4, 6, 8])
@pytest.mark.parametrize("g", [0.5, 1.0, 2.0])
def test_ground_energy_matches_mode_sum(N, g):
    e, psi = SpinChain.build(N).ground_state(g)
    assert abs(e - bogoliubov_ground_energy(N, g)) < 1e-10
    assert SpinChain.build(N).parity_expectation(psi) == pytest.approx(1.0)


def test_hamiltonian_is_hermitian():
    H = build_hamiltonian(6, 0.7)
    assert abs(H - H.T.conj()).max() == 0


@pytest.mark.parametrize("N", [3, 5, 12])
def test_size_limits(N):
    with pytest.raises(ValueError):
        SpinChain.build(N)


def test_parity_conserved():
    res = oracle_run(6, 5.0, n_times=41)
    assert np.max(np.abs(res.parity - 1.0)) < 1e-10
    assert res.echo[0] == pytest.approx(1.0, abs=1e-12)


def test_matches_mode_pipeline():
    d = compare(6, 5.0)
    assert d["max_dSz"] < 1e-7 and d["max_dL"] < 1e-7
    assert d["dp_gs"] < 1e-7
    assert d["dE0"] < 1e-10


def test_series_export(tmp_path):
    sz, echo = oracle_run(4, 2.0, n_times=11).series()
    assert sz.observable == "Sz_ed" and echo.observable == "LoschmidtEcho_ed"
    echo.to_csv(tmp_path / "e.csv")
    from kzising.observables import TimeSeries
    back = TimeSeries.from_csv(tmp_path / "e.csv")
    assert back.observable == "LoschmidtEcho_ed"
    np.testing.assert_array_equal(back.values, echo.values)
