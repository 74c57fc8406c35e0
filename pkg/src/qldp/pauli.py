"""Pauli strings, observable decompositions, and Clifford group access.

Pauli labels are plain strings over {I, X, Y, Z} ("XZ" means X tensor Z).
Clifford elements are dense unitaries; groups for one and two qubits are
enumerated exhaustively up to global phase, larger ones are sampled by
composing random generators (approximately uniform, see
:func:`random_clifford`).
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from . import qops
from .errors import DegenerateObservableError, InvalidInputError

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_PHASE = np.array([[1, 0], [0, 1j]], dtype=complex)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)


def pauli_labels(m: int) -> list[str]:
    """All 4^m labels in lexicographic I, X, Y, Z order."""
    if m < 1:
        raise InvalidInputError(f"m must be >= 1, got {m}")
    return ["".join(t) for t in itertools.product("IXYZ", repeat=m)]


def pauli_matrix(label: str) -> np.ndarray:
    """Tensor product of single-qubit Pauli matrices for a label like "XZI"."""
    if not label or any(c not in PAULI_1Q for c in label):
        raise InvalidInputError(f"invalid Pauli label {label!r}")
    out = PAULI_1Q[label[0]]
    for c in label[1:]:
        out = np.kron(out, PAULI_1Q[c])
    return out


@dataclass(frozen=True)
class PauliDecomposition:
    """Real coefficients of a Hermitian observable in the Pauli basis."""

    m: int
    coeffs: dict[str, float]
    weight: float          # S = sum |alpha_P|
    lambda_max: float
    lambda_min: float

    def reconstruct(self) -> np.ndarray:
        d = 2**self.m
        out = np.zeros((d, d), dtype=complex)
        for label, a in self.coeffs.items():
            if a != 0.0:
                out += a * pauli_matrix(label)
        return out

    def support(self) -> list[str]:
        return [lab for lab, a in self.coeffs.items() if a != 0.0]


def decompose(obs: np.ndarray, m: int) -> PauliDecomposition:
    """Expand a Hermitian observable as sum_P alpha_P P with alpha_P = Tr[P O]/2^m."""
    obs = qops.check_hermitian(obs)
    d = 2**m
    if obs.shape != (d, d):
        raise InvalidInputError(f"observable shape {obs.shape} does not match m={m} (need {d}x{d})")
    coeffs = {}
    for label in pauli_labels(m):
        a = np.trace(pauli_matrix(label) @ obs) / d
        if abs(a.imag) > 1e-10:
            raise InvalidInputError(f"coefficient of {label} is not real: {a!r}")
        coeffs[label] = float(a.real)
    w = np.linalg.eigvalsh(obs)
    return PauliDecomposition(
        m=m,
        coeffs=coeffs,
        weight=float(sum(abs(a) for a in coeffs.values())),
        lambda_max=float(w[-1]),
        lambda_min=float(w[0]),
    )


def from_coeffs(coeffs: dict[str, float]) -> PauliDecomposition:
    """Decomposition from explicit coefficients (labels must share one length)."""
    if not coeffs:
        raise InvalidInputError("coefficient map is empty")
    lengths = {len(lab) for lab in coeffs}
    if len(lengths) != 1:
        raise InvalidInputError(f"labels of mixed length: {sorted(coeffs)}")
    m = lengths.pop()
    full = {lab: 0.0 for lab in pauli_labels(m)}
    for lab, a in coeffs.items():
        if lab not in full:
            raise InvalidInputError(f"invalid Pauli label {lab!r}")
        full[lab] = float(a)
    obs = np.zeros((2**m, 2**m), dtype=complex)
    for lab, a in full.items():
        if a != 0.0:
            obs += a * pauli_matrix(lab)
    w = np.linalg.eigvalsh(obs)
    return PauliDecomposition(
        m=m,
        coeffs=full,
        weight=float(sum(abs(a) for a in full.values())),
        lambda_max=float(w[-1]),
        lambda_min=float(w[0]),
    )


def sampling_distribution(decomp: PauliDecomposition) -> tuple[list[str], np.ndarray]:
    """Support labels and probabilities |alpha_P| / S."""
    if decomp.weight <= 0:
        raise DegenerateObservableError("observable has zero Pauli weight")
    labels = decomp.support()
    probs = np.array([abs(decomp.coeffs[lab]) for lab in labels]) / decomp.weight
    return labels, probs


def sample_pauli(decomp: PauliDecomposition, rng: np.random.Generator) -> str:
    """Draw a label with probability |alpha_P| / S."""
    labels, probs = sampling_distribution(decomp)
    return labels[rng.choice(len(labels), p=probs)]


@dataclass(frozen=True)
class CliffordElement:
    m: int
    matrix: np.ndarray

    def __post_init__(self):
        d = 2**self.m
        if self.matrix.shape != (d, d):
            raise InvalidInputError(f"matrix shape {self.matrix.shape} does not match m={self.m}")


def _canonical_phase(u: np.ndarray) -> np.ndarray:
    flat = u.ravel()
    idx = int(np.argmax(np.abs(flat) > 1e-8))
    z = flat[idx]
    return u * (z.conjugate() / abs(z))


def _key(u: np.ndarray) -> bytes:
    return (np.round(_canonical_phase(u), 8) + 0.0).tobytes()


def _generators(m: int) -> list[np.ndarray]:
    gens = []
    for i in range(m):
        for g in (_HADAMARD, _PHASE):
            ops = [np.eye(2, dtype=complex)] * m
            ops[i] = g
            full = ops[0]
            for o in ops[1:]:
                full = np.kron(full, o)
            gens.append(full)
    for i in range(m):
        for j in range(i + 1, m):
            gens.append(_embed_cz(m, i, j))
    return gens


def _embed_cz(m: int, i: int, j: int) -> np.ndarray:
    d = 2**m
    u = np.eye(d, dtype=complex)
    for b in range(d):
        bits = [(b >> (m - 1 - k)) & 1 for k in range(m)]
        if bits[i] == 1 and bits[j] == 1:
            u[b, b] = -1
    return u


@functools.cache
def enumerate_cliffords(m: int = 1) -> tuple[CliffordElement, ...]:
    """Exhaustive Clifford group up to global phase; 24 elements at m=1, 11520 at m=2.

    Breadth-first closure of the generator set {H_i, S_i, CZ_ij}, deduplicated
    by phase-canonical matrices.
    """
    if m not in (1, 2):
        raise InvalidInputError(f"enumeration supports m in {{1, 2}}, got {m}")
    gens = _generators(m)
    d = 2**m
    start = _canonical_phase(np.eye(d, dtype=complex))
    seen = {_key(start): start}
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for g in gens:
                v = _canonical_phase(g @ u)
                k = _key(v)
                if k not in seen:
                    seen[k] = v
                    nxt.append(v)
        frontier = nxt
    return tuple(CliffordElement(m=m, matrix=u) for u in seen.values())


def random_clifford(m: int, rng: np.random.Generator, depth: int = 50) -> CliffordElement:
    """Uniform draw for m in {1, 2} (by index into the enumeration).

    For m in {3, 4} the element is a composition of ``depth`` uniformly chosen
    generators: a rapidly mixing random walk, approximately uniform but with
    no exact-uniformity guarantee.
    """
    if m in (1, 2):
        group = enumerate_cliffords(m)
        return group[int(rng.integers(len(group)))]
    if m in (3, 4):
        gens = _generators(m)
        u = np.eye(2**m, dtype=complex)
        for _ in range(depth):
            u = gens[int(rng.integers(len(gens)))] @ u
        return CliffordElement(m=m, matrix=u)
    raise InvalidInputError(f"random_clifford supports m <= 4, got {m}")


def conjugate_pauli(u: np.ndarray, label: str) -> tuple[complex, str]:
    """Resolve U P U^dag as (phase, label); raises if the result is not a Pauli."""
    m = len(label)
    conj = u @ pauli_matrix(label) @ u.conj().T
    d = 2**m
    for out in pauli_labels(m):
        c = np.trace(pauli_matrix(out) @ conj) / d
        if abs(c) > 0.5:
            residual = np.abs(conj - c * pauli_matrix(out)).max()
            if residual > 1e-9 or abs(abs(c) - 1.0) > 1e-9:
                break
            return complex(c), out
    raise InvalidInputError("conjugation does not map the Pauli to a signed Pauli")


def is_clifford(u: np.ndarray, m: int, tol: float = 1e-9) -> bool:
    """Check that conjugation maps every generator Pauli to a phased Pauli."""
    d = 2**m
    if u.shape != (d, d) or np.abs(u.conj().T @ u - np.eye(d)).max() > tol:
        return False
    for i in range(m):
        for letter in ("X", "Z"):
            label = "".join(letter if k == i else "I" for k in range(m))
            try:
                conjugate_pauli(u, label)
            except InvalidInputError:
                return False
    return True
