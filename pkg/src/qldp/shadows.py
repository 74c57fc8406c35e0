"""Private classical shadows: noisy snapshots, inversion, median-of-means.

One snapshot: rotate by a uniformly random Clifford, depolarize with strength
p_hat, measure in the computational basis, and keep the rotated-back outcome
projector.  The group average of that procedure is itself a depolarizing
channel with q = 1 - (1 - p_hat)/(d + 1), which is what makes the linear
snapshot inversion unbiased and pins the privacy calibration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qops
from .channels import FiniteUnitaryGroup, QuantumChannel, depolarizing
from .errors import InfeasibleError, InvalidInputError, NoninvertibleError
from .estimate import AccuracyDemand
from .pauli import CliffordElement, enumerate_cliffords, random_clifford
from .privacy import PrivacyBudget


@dataclass(frozen=True)
class ShadowSample:
    """One snapshot record: the sampled Clifford and the measured bitstring."""

    clifford: CliffordElement
    bits: str
    index: int | None = None  # position in the enumerated group, when applicable

    def __post_init__(self):
        if len(self.bits) != self.clifford.m or any(c not in "01" for c in self.bits):
            raise InvalidInputError(f"bits {self.bits!r} do not match m={self.clifford.m}")


@dataclass(frozen=True)
class ShadowConfig:
    p_hat: float
    ell: int
    n_batches: int

    def __post_init__(self):
        if not 0.0 <= self.p_hat < 1.0:
            raise InvalidInputError("p_hat must lie in [0, 1); inversion needs p_hat < 1")
        if self.ell < 1 or self.n_batches < 1:
            raise InvalidInputError("batch size and count must be >= 1")

    @property
    def n_samples(self) -> int:
        return self.ell * self.n_batches


def private_shadow_p_hat(d: int, budget: PrivacyBudget) -> float:
    """Depolarizing strength calibrating the snapshot mechanism to the budget.

    1 - min{1, (e^eps - 1 + d delta)(d + 1)/(e^eps + d - 1)}; clamps to 0
    whenever e^eps + delta (d + 1) >= 2 (no noise needed beyond measurement).
    """
    if d < 2:
        raise InvalidInputError(f"d must be >= 2, got {d}")
    ratio = (budget.gamma - 1.0 + d * budget.delta) * (d + 1.0) / (budget.gamma + d - 1.0)
    return 1.0 - min(1.0, ratio)


def effective_depolarizing_q(p_hat: float, d: int) -> float:
    """Depolarizing level of the group-averaged snapshot channel: 1 - (1-p_hat)/(d+1)."""
    if not 0.0 <= p_hat <= 1.0:
        raise InvalidInputError(f"p_hat must be in [0, 1], got {p_hat}")
    return 1.0 - (1.0 - p_hat) / (d + 1.0)


def clifford_unitary_group(m: int) -> FiniteUnitaryGroup:
    """Enumerated Clifford group packaged for twirling (m in {1, 2})."""
    elems = [c.matrix for c in enumerate_cliffords(m)]
    return FiniteUnitaryGroup(dim=2**m, elements=elems, exact=True)


def _born_probs(rho: np.ndarray, u: np.ndarray, p_hat: float) -> np.ndarray:
    d = rho.shape[0]
    rot = u @ rho @ u.conj().T
    probs = (1.0 - p_hat) * np.diag(rot).real + p_hat / d
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def shadow_sample(rho: np.ndarray, p_hat: float, rng: np.random.Generator) -> ShadowSample:
    """Draw one snapshot record from the state."""
    if not 0.0 <= p_hat <= 1.0:
        raise InvalidInputError(f"p_hat must be in [0, 1], got {p_hat}")
    d = rho.shape[0]
    m = int(round(math.log2(d)))
    if 2**m != d:
        raise InvalidInputError(f"state dimension {d} is not a power of two")
    if m <= 2:
        group = enumerate_cliffords(m)
        index = int(rng.integers(len(group)))
        element = group[index]
    else:
        element = random_clifford(m, rng)
        index = None
    probs = _born_probs(rho, element.matrix, p_hat)
    b = int(rng.choice(d, p=probs))
    return ShadowSample(clifford=element, bits=format(b, f"0{m}b"), index=index)


def snapshot_inverse(sample: ShadowSample, p_hat: float, d: int) -> np.ndarray:
    """Unbiased linear inversion of one snapshot.

    With x = (d+1)/(1-p_hat): ``x U^dag |b><b| U - (x - 1) I/d``.  Unit trace
    by construction; the average over Cliffords and outcomes reproduces the
    input state exactly.
    """
    if p_hat >= 1.0:
        raise NoninvertibleError("p_hat = 1 erases the state; snapshots cannot be inverted")
    u = sample.clifford.matrix
    if u.shape[0] != d:
        raise InvalidInputError(f"snapshot dimension {u.shape[0]} does not match d={d}")
    x = (d + 1.0) / (1.0 - p_hat)
    b = int(sample.bits, 2)
    v = u.conj().T[:, b]
    return qops.hermitize(x * np.outer(v, v.conj()) - (x - 1.0) * np.eye(d) / d)


def median_of_means_estimate(snapshots, obs: np.ndarray, ell: int) -> float:
    """Median over per-batch means of Tr[O rho_hat], batches of ell consecutive snapshots."""
    n = len(snapshots)
    if n == 0:
        raise InvalidInputError("no snapshots")
    if ell < 1 or n % ell != 0:
        raise InvalidInputError(f"batch size {ell} does not divide the snapshot count {n}")
    vals = np.array([np.trace(obs @ s).real for s in snapshots])
    batches = vals.reshape(n // ell, ell).mean(axis=1)
    return float(np.median(batches))


def shadow_required_samples(tr_obs_sq: float, d: int, budget: PrivacyBudget,
                            demand: AccuracyDemand) -> int:
    """Snapshot count sufficient for the private shadow pipeline.

    ceil of (204 Tr[O^2]/beta^2) max{1, ((e^eps+d-1)/((e^eps-1+d delta)(d+1)))^2} ln(2/eta);
    the max saturates at 1 exactly when e^eps + delta (d + 1) >= 2.
    """
    denom = budget.gamma - 1.0 + d * budget.delta
    if denom <= 0:
        raise InfeasibleError("epsilon = 0 and delta = 0 admit no finite sample size")
    ratio = (budget.gamma + d - 1.0) / (denom * (d + 1.0))
    v = 204.0 * tr_obs_sq / demand.beta**2 * max(1.0, ratio**2) * math.log(2.0 / demand.eta)
    return math.ceil(v)


def naive_shadow_required_samples(tr_obs_sq: float, d: int, budget: PrivacyBudget,
                                  demand: AccuracyDemand) -> int:
    """Comparator: snapshot count when calibrating with the generic-utility noise level.

    Uses p_hat = d(1-delta)/(e^eps+d-1) directly in the noisy-shadow bound,
    which picks up an extra (d+1)^2 relative to :func:`shadow_required_samples`.
    """
    denom = budget.gamma - 1.0 + d * budget.delta
    if denom <= 0:
        raise InfeasibleError("epsilon = 0 and delta = 0 admit no finite sample size")
    ratio = (budget.gamma + d - 1.0) / denom
    v = 204.0 * tr_obs_sq / demand.beta**2 * ratio**2 * math.log(2.0 / demand.eta)
    return math.ceil(v)


def default_batch_count(n: int, eta: float) -> int:
    """Divisor of n closest to max(1, floor(2 ln(2/eta))); ties take the smaller."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    target = max(1, math.floor(2.0 * math.log(2.0 / eta)))
    divisors = set()
    i = 1
    while i * i <= n:
        if n % i == 0:
            divisors.add(i)
            divisors.add(n // i)
        i += 1
    return min(sorted(divisors), key=lambda k: (abs(k - target), k))


def composite_shadow_channel(p_hat: float, m: int = 1) -> QuantumChannel:
    """Exact group-averaged snapshot channel, built by full enumeration (m = 1).

    Kraus operators U^dag |b><b| A_k U / sqrt(|G|) over all group elements,
    outcomes, and depolarizing Kraus terms A_k.
    """
    if m != 1:
        raise InvalidInputError("exact composite enumeration is supported at m = 1 only")
    d = 2**m
    group = enumerate_cliffords(m)
    dep = depolarizing(d, p_hat)
    scale = 1.0 / math.sqrt(len(group))
    ops = []
    for c in group:
        u = c.matrix
        for b in range(d):
            proj = np.zeros((d, d), dtype=complex)
            proj[b, b] = 1.0
            for k in dep.kraus:
                ops.append(scale * (u.conj().T @ proj @ k @ u))
    return QuantumChannel(np.stack(ops))


def _snapshot_tables(rho: np.ndarray, obs: np.ndarray, p_hat: float, m: int):
    """Joint (group element, outcome) distribution and Tr[O rho_hat] values."""
    d = 2**m
    group = enumerate_cliffords(m)
    us = np.stack([c.matrix for c in group])
    rot = np.einsum("gij,jk,glk->gil", us, rho, us.conj())
    probs = (1.0 - p_hat) * np.einsum("gii->gi", rot).real + p_hat / d
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    x = (d + 1.0) / (1.0 - p_hat)
    # Tr[O rho_hat] for outcome (g, b): x <b| U O U^dag |b> - (x-1) Tr[O]/d
    rot_obs = np.einsum("gij,jk,gik->gi", us, obs, us.conj()).real
    vals = x * rot_obs - (x - 1.0) * np.trace(obs).real / d
    return probs.ravel(), vals.ravel()


def run_shadow_trials(rho: np.ndarray, obs: np.ndarray, p_hat: float, n: int,
                      ell: int, trials: int, seed: int) -> np.ndarray:
    """Monte Carlo median-of-means estimates, one per trial (m <= 2).

    Samples (Clifford, outcome) pairs from the exact joint distribution and
    aggregates Tr[O rho_hat]; per-trial RNG streams spawn from the seed.
    """
    if p_hat >= 1.0:
        raise NoninvertibleError("p_hat = 1 erases the state; snapshots cannot be inverted")
    d = rho.shape[0]
    m = int(round(math.log2(d)))
    if 2**m != d or m > 2:
        raise InvalidInputError("vectorized trials support m in {1, 2}")
    if n % ell != 0:
        raise InvalidInputError(f"batch size {ell} does not divide n={n}")
    probs, vals = _snapshot_tables(rho, obs, p_hat, m)
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    streams = np.random.SeedSequence(seed).spawn(trials)
    out = np.empty(trials)
    for i, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        idx = np.searchsorted(cum, rng.random(n), side="right")
        batches = vals[idx].reshape(n // ell, ell).mean(axis=1)
        out[i] = np.median(batches)
    return out


def samples_to_csv(samples) -> str:
    """Rows ``clifford_index,bits`` for samples drawn from an enumerated group."""
    lines = ["clifford_index,bits"]
    for s in samples:
        if s.index is None:
            raise InvalidInputError("sample has no enumeration index; cannot serialize")
        lines.append(f"{s.index},{s.bits}")
    return "\n".join(lines) + "\n"


def samples_from_csv(text: str, m: int) -> list[ShadowSample]:
    group = enumerate_cliffords(m)
    out = []
    lines = [ln for ln in text.strip().splitlines() if ln]
    for ln in lines[1:]:
        idx_str, bits = ln.split(",")
        idx = int(idx_str)
        out.append(ShadowSample(clifford=group[idx], bits=bits, index=idx))
    return out


def snapshots_to_csv(snapshots) -> str:
    """Flattened snapshot matrices, one row each: re/im pairs in row-major order."""
    if not snapshots:
        raise InvalidInputError("no snapshots")
    d = snapshots[0].shape[0]
    header = ",".join(f"re_{i}{j},im_{i}{j}" for i in range(d) for j in range(d))
    lines = [header]
    for s in snapshots:
        flat = s.ravel()
        lines.append(",".join(f"{z.real:.12g},{z.imag:.12g}" for z in flat))
    return "\n".join(lines) + "\n"
