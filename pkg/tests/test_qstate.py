import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qbottleneck import InvalidStateError, NotCompletelyPositiveError
from qbottleneck.checks import (
    cptp_roundtrip_errors,
    fannes_sample,
    purification_errors,
    random_density,
    random_kraus,
)
from qbottleneck.presets import bell_mix_state, classical_state
from qbottleneck.qstate import (
    ChoiMatrix,
    KrausChannel,
    apply_channel,
    choi_apply,
    choi_to_kraus,
    decode_matrix,
    encode_matrix,
    entropies,
    joint_from_choi,
    kraus_to_choi,
    load_channel,
    mutual_information,
    purification_vector,
    purify,
    save_channel,
    validate_cptp,
    validate_density,
    von_neumann_entropy,
)
from qbottleneck.tensor_core import SubsystemDims, partial_trace, partial_transpose

from conftest import DOWN, UP, ket, proj

seeds = st.integers(0, 2**32 - 1)
XY = SubsystemDims.of(x=2, y=2)
RHO1 = classical_state([0.1, 0.2, 0.3, 0.4])
RHO2 = bell_mix_state()


def h(*p):
    return -sum(x * math.log(x) for x in p if x > 0)


# states and entropies

def test_validate_density():
    validate_density(np.eye(2) / 2)
    with pytest.raises(InvalidStateError):
        validate_density(np.eye(2))
    with pytest.raises(InvalidStateError):
        validate_density(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidStateError):
        validate_density(np.array([[0.5, 0.1], [0.0, 0.5]]))
    with pytest.raises(InvalidStateError):
        validate_density(np.ones(3))


def test_entropy_examples():
    assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(math.log(2), abs=1e-14)
    v = random_density(3, np.random.default_rng(0), rank=1)
    assert abs(von_neumann_entropy(v)) <= 1e-10
    assert von_neumann_entropy(np.diag([0.4, 0.6])) == pytest.approx(0.673012, abs=1e-6)
    assert von_neumann_entropy(np.diag([0.4, 0.6])) == pytest.approx(h(0.4, 0.6), abs=1e-14)


def test_entropy_clamps_noise_but_rejects_negativity():
    assert von_neumann_entropy(np.diag([1.0, -1e-12])) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InvalidStateError):
        von_neumann_entropy(np.diag([1.1, -0.1]))


@given(seeds, st.integers(1, 6))
def test_entropy_range(seed, d):
    rho = random_density(d, np.random.default_rng(seed))
    s = von_neumann_entropy(rho)
    assert -1e-12 <= s <= math.log(d) + 1e-12
    assert s == pytest.approx(h(*np.linalg.eigvalsh(rho)), abs=1e-10)


def test_batched_entropies_match():
    rng = np.random.default_rng(1)
    stack = np.stack([random_density(4, rng) for _ in range(10)])
    assert np.allclose(entropies(stack), [von_neumann_entropy(r) for r in stack], atol=1e-12)


def test_mutual_information_examples():
    rng = np.random.default_rng(2)
    prod = np.kron(random_density(2, rng), random_density(2, rng))
    assert abs(mutual_information(prod, XY)) <= 1e-10
    assert mutual_information(RHO2, XY) == pytest.approx(0.823959, abs=1e-6)
    assert mutual_information(RHO2, XY) == pytest.approx(2 * math.log(2) - h(0.75, 0.25), abs=1e-12)
    # joint table P[x, y] = [[0.1, 0.3], [0.2, 0.4]]
    p = np.array([[0.1, 0.3], [0.2, 0.4]])
    classical = sum(
        p[i, j] * math.log(p[i, j] / (p[i].sum() * p[:, j].sum())) for i in range(2) for j in range(2)
    )
    assert mutual_information(RHO1, XY) == pytest.approx(classical, abs=1e-12)
    assert mutual_information(RHO1, XY) == pytest.approx(0.004021, abs=1e-6)
    with pytest.raises(ValueError):
        mutual_information(np.eye(8) / 8, SubsystemDims.of(a=2, b=2, c=2))


@given(seeds, st.integers(1, 4))
def test_mutual_information_nonnegative(seed, rank):
    rho = random_density(4, np.random.default_rng(seed), rank=rank)
    assert mutual_information(rho, XY) >= -1e-9


# purification

def test_purify_diagonal():
    w = purification_vector(np.diag([0.4, 0.6])).reshape(-1)
    expected = math.sqrt(0.4) * ket(UP, UP) + math.sqrt(0.6) * ket(DOWN, DOWN)
    assert np.allclose(w, expected, atol=1e-14)


def test_purify_pure_input_is_product():
    v = np.array([0.6, 0.8j])
    tau, dims = purify(proj(v))
    assert np.allclose(partial_trace(tau, dims, ["x"]), proj(v), atol=1e-12)
    assert np.allclose(partial_trace(tau, dims, ["xp"]), proj(np.array([1.0, 0])), atol=1e-12)


def test_purify_maximally_mixed():
    tau, dims = purify(np.eye(2) / 2)
    bell = (ket(UP, UP) + ket(DOWN, DOWN)) / math.sqrt(2)
    assert np.allclose(tau, proj(bell), atol=1e-14)


@given(seeds, st.integers(1, 4))
def test_purify_properties(seed, d):
    rng = np.random.default_rng(seed)
    rho = random_density(d, rng, rank=int(rng.integers(1, d + 1)))
    tau, dims = purify(rho)
    assert dims.sizes == (d, d)
    assert np.max(np.abs(partial_trace(tau, dims, ["x"]) - rho)) <= 1e-10
    assert abs(von_neumann_entropy(tau)) <= 1e-9
    assert mutual_information(tau, dims) == pytest.approx(2 * von_neumann_entropy(rho), abs=1e-9)


def test_purification_sample():
    marg, purity = purification_errors(50, seed=0)
    assert marg <= 1e-10 and purity <= 1e-9


# channels

def test_kraus_validation():
    with pytest.raises(ValueError):
        KrausChannel(np.stack([np.eye(2), np.eye(2)]))
    with pytest.raises(ValueError):
        KrausChannel(np.zeros((2, 2, 2, 2)))
    ch = KrausChannel(np.eye(3))
    assert (ch.rank, ch.d_in, ch.d_out) == (1, 3, 3)


def test_apply_identity_and_dephasing():
    rng = np.random.default_rng(3)
    rho = random_density(4, rng)
    assert np.allclose(apply_channel(KrausChannel.identity(2), rho, XY, "x"), rho)
    deph = KrausChannel.dephasing()
    assert np.allclose(apply_channel(deph, RHO1, XY, "x"), RHO1, atol=1e-15)
    expected = 0.5 * proj(ket(UP, UP)) + 0.5 * proj(ket(DOWN, DOWN))
    assert np.allclose(apply_channel(deph, RHO2, XY, "x"), expected, atol=1e-15)
    # hand evaluation of (rho + Z rho Z) / 2 with Z on x
    z = np.kron(np.diag([1, -1]), np.eye(2))
    assert np.allclose(apply_channel(deph, rho, XY, "x"), 0.5 * (rho + z @ rho @ z))


def test_apply_on_second_factor_and_resize():
    rng = np.random.default_rng(4)
    rho = random_density(6, rng)
    dims = SubsystemDims.of(a=3, b=2)
    ch = random_kraus(2, 3, 2, rng)
    out = apply_channel(ch, rho, dims, "b")
    assert out.shape == (9, 9)
    assert np.trace(out).real == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        apply_channel(ch, rho, dims, "a")


def test_choi_examples():
    phi = np.eye(2).reshape(-1)
    assert np.allclose(kraus_to_choi(KrausChannel.identity(2)).matrix, np.outer(phi, phi))
    assert np.allclose(kraus_to_choi(KrausChannel.dephasing()).matrix, np.diag([1, 0, 0, 1]))
    sigma = np.array([[0.7, 0.2j], [-0.2j, 0.3]])
    rep = KrausChannel.replacement(sigma, 2)
    assert np.allclose(kraus_to_choi(rep).matrix, np.kron(np.eye(2), sigma), atol=1e-14)


def test_choi_to_kraus_examples():
    ident = choi_to_kraus(ChoiMatrix.identity(2))
    assert ident.rank == 1
    k = ident.kraus[0]
    assert np.allclose(k / k[0, 0], np.eye(2)) and abs(abs(k[0, 0]) - 1) < 1e-12
    deph = choi_to_kraus(kraus_to_choi(KrausChannel.dephasing()))
    assert deph.rank == 2
    # the span of the operators is span{I, Z}
    span = np.stack([np.eye(2).reshape(-1), np.diag([1, -1]).reshape(-1)], axis=1) / math.sqrt(2)
    for op in deph.kraus:
        coef = span.conj().T @ op.reshape(-1)
        assert np.allclose(span @ coef, op.reshape(-1), atol=1e-12)
    with pytest.raises(NotCompletelyPositiveError):
        choi_to_kraus(ChoiMatrix(partial_transpose(ChoiMatrix.identity(2).matrix, XY, "x"), 2, 2))


@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_kraus_choi_roundtrip(seed, d_in, d_out):
    rng = np.random.default_rng(seed)
    rank = int(rng.integers(-(-d_in // d_out), d_in * d_out + 1))
    ch = random_kraus(d_in, d_out, rank, rng)
    choi = kraus_to_choi(ch)
    assert validate_cptp(choi).passed
    back = kraus_to_choi(choi_to_kraus(choi))
    assert np.max(np.abs(back.matrix - choi.matrix)) <= 1e-9
    for i in range(d_in):
        for j in range(d_in):
            unit = np.zeros((d_in, d_in))
            unit[i, j] = 1
            assert np.max(np.abs(ch(unit) - choi_to_kraus(choi)(unit))) <= 1e-9


def test_cptp_roundtrip_sample():
    errs, valid = cptp_roundtrip_errors(50, seed=0)
    assert valid and errs.max() <= 1e-9


def test_choi_apply_examples():
    rng = np.random.default_rng(5)
    rho = random_density(4, rng)
    out, dims = choi_apply(ChoiMatrix.identity(2), rho, XY, "x")
    assert np.allclose(out, rho) and dims.labels == ("xt", "y")
    deph = kraus_to_choi(KrausChannel.dephasing())
    assert np.allclose(choi_apply(deph, RHO2, XY, "x")[0], apply_channel(KrausChannel.dephasing(), RHO2, XY, "x"))
    sigma = np.diag([0.3, 0.7])
    rep = kraus_to_choi(KrausChannel.replacement(sigma, 2))
    rho_y = partial_trace(rho, XY, ["y"])
    assert np.allclose(choi_apply(rep, rho, XY, "x")[0], np.kron(sigma, rho_y), atol=1e-14)
    with pytest.raises(ValueError):
        choi_apply(ChoiMatrix.identity(3), rho, XY, "x")


@given(seeds, st.integers(1, 3), st.integers(1, 4))
def test_choi_apply_matches_kraus(seed, d_out, rank):
    rng = np.random.default_rng(seed)
    d_in = 2
    rank = max(rank, -(-d_in // d_out))
    ch = random_kraus(d_in, d_out, rank, rng)
    rho = random_density(6, rng)
    dims = SubsystemDims.of(x=2, y=3)
    out, _ = choi_apply(kraus_to_choi(ch), rho, dims, "x")
    assert np.max(np.abs(out - apply_channel(ch, rho, dims, "x"))) <= 1e-9
    # target on the second factor
    dims2 = SubsystemDims.of(y=3, x=2)
    out2, d2 = choi_apply(kraus_to_choi(ch), rho, dims2, "x", new_label="xo")
    assert d2.labels == ("y", "xo")
    assert np.max(np.abs(out2 - apply_channel(ch, rho, dims2, "x"))) <= 1e-9


def test_validate_cptp_examples():
    phi = ChoiMatrix.identity(2)
    assert validate_cptp(phi).passed
    rep = validate_cptp(ChoiMatrix(1.1 * phi.matrix, 2, 2))
    assert not rep.trace_preserving and rep.tp_deviation == pytest.approx(0.1, abs=1e-12)
    swap = validate_cptp(ChoiMatrix(partial_transpose(phi.matrix, XY, "x"), 2, 2))
    assert not swap.positive and swap.min_eigenvalue == pytest.approx(-1.0, abs=1e-12)
    assert "CPTP: pass" in str(validate_cptp(phi))


def test_joint_from_choi_examples():
    tau, dims = purify(np.diag([0.4, 0.6]))
    assert np.allclose(joint_from_choi(ChoiMatrix.identity(2), tau, dims), tau, atol=1e-14)
    out = joint_from_choi(kraus_to_choi(KrausChannel.dephasing()), tau, dims)
    assert np.allclose(out, 0.4 * proj(ket(UP, UP)) + 0.6 * proj(ket(DOWN, DOWN)), atol=1e-14)
    sigma = np.diag([0.2, 0.8])
    rep = kraus_to_choi(KrausChannel.replacement(sigma, 2))
    assert np.allclose(joint_from_choi(rep, tau, dims), np.kron(np.diag([0.4, 0.6]), sigma), atol=1e-14)
    with pytest.raises(InvalidStateError):
        joint_from_choi(ChoiMatrix.identity(2), np.eye(4) / 4, dims)


@given(seeds, st.integers(1, 4))
def test_joint_from_choi_matches_choi_apply(seed, rank):
    rng = np.random.default_rng(seed)
    tau, dims = purify(random_density(2, rng))
    choi = kraus_to_choi(random_kraus(2, 2, rank, rng))
    direct, _ = choi_apply(choi, tau, dims, "x")
    assert np.max(np.abs(joint_from_choi(choi, tau, dims) - direct)) <= 1e-9


def test_fannes_sample():
    lhs, rhs = fannes_sample(200, seed=0)
    assert np.all(lhs <= rhs + 1e-12)


@given(seeds)
def test_data_processing(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(4, rng, rank=int(rng.integers(1, 5)))
    ch = random_kraus(2, 2, int(rng.integers(1, 5)), rng)
    out = apply_channel(ch, rho, XY, "x")
    assert mutual_information(out, XY) <= mutual_information(rho, XY) + 1e-9


# serialization

def test_channel_json_roundtrip(tmp_path):
    ch = random_kraus(2, 3, 2, np.random.default_rng(6))
    save_channel(tmp_path / "k.json", ch)
    back = load_channel(tmp_path / "k.json")
    assert isinstance(back, KrausChannel) and np.array_equal(back.kraus, ch.kraus)
    choi = kraus_to_choi(ch)
    save_channel(tmp_path / "c.json", choi)
    back = load_channel(tmp_path / "c.json")
    assert isinstance(back, ChoiMatrix) and np.array_equal(back.matrix, choi.matrix)
    obj = json.loads((tmp_path / "k.json").read_text())
    assert set(obj) == {"d_in", "d_out", "kraus"}
    assert obj["kraus"][0][0][0] == [ch.kraus[0, 0, 0].real, ch.kraus[0, 0, 0].imag]


def test_channel_json_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("[1, 2]")
    with pytest.raises(ValueError):
        load_channel(p)
    p.write_text('{"d_in": 2}')
    with pytest.raises(ValueError):
        load_channel(p)
    with pytest.raises(ValueError):
        decode_matrix([[1.0, 0.0]], 2, 2)
    m = np.array([[1 + 2j, 3], [0, -1j]])
    assert np.array_equal(decode_matrix(encode_matrix(m), 2, 2), m)
    flat = [pair for row in encode_matrix(m) for pair in row]
    assert np.array_equal(decode_matrix(flat, 2, 2), m)
