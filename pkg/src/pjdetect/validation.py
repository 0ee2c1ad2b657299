"""Monte Carlo oracles for the closed-form pairwise error probabilities.

Each oracle simulates the actual decision statistic of a detector on a fixed
channel (noise is the only randomness) and counts how often the wrong
hypothesis wins a two-point test. The operating noise level is picked from
the large-array limit so that it does not depend on the formula under test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import analysis
from .channel import ChannelConfig, generate_iid
from .modem import Constellation, make_qam
from .numerics import SeededRng

__all__ = ["OracleCheck", "run_oracle_suite", "format_oracle_report"]


@dataclass
class OracleCheck:
    name: str
    predicted: float
    estimate: float
    trials: int

    @property
    def sigma(self) -> float:
        p = self.predicted
        return float(np.sqrt(p * (1 - p) / self.trials))

    @property
    def z_score(self) -> float:
        return (self.estimate - self.predicted) / self.sigma

    @property
    def passed(self) -> bool:
        return abs(self.z_score) <= 3.0 and 1e-3 <= self.predicted <= 1e-1


def _noise(gen: np.random.Generator, n: int, M: int, sigma_v_sq: float) -> np.ndarray:
    g = gen.standard_normal((n, M, 2))
    return np.sqrt(sigma_v_sq / 2) * (g[..., 0] + 1j * g[..., 1])


def _count(stat, trials: int, chunk: int, gen: np.random.Generator) -> float:
    hits = 0
    for start in range(0, trials, chunk):
        hits += int(stat(min(chunk, trials - start), gen))
    return hits / trials


def _sigma_for(e: np.ndarray, target: float) -> float:
    # noise level at which the large-array limit of the PEP equals ``target``
    return float(np.vdot(e, e).real / (2 * norm.isf(target) ** 2))


def run_oracle_suite(
    trials: int = 1_000_000,
    seed: int = 7,
    M: int = 16,
    N: int = 4,
    J: int = 16,
    target: float = 0.01,
    chunk: int = 100_000,
) -> list[OracleCheck]:
    """Check every closed-form PEP against its Monte Carlo oracle."""
    rng = SeededRng(seed, 0)
    c: Constellation = make_qam(J)
    H = generate_iid(ChannelConfig(M, N), rng).H
    gen = rng.child(1).generator
    x = c.points[gen.integers(0, J, N)]
    d = c.d_min
    Hh = H.conj().T
    A = Hh @ H
    D = A.diagonal().real
    checks = []

    def pairwise_receive(e, sigma_v_sq):
        Hx, Hz = H @ x, H @ (x - e)

        def stat(n, g):
            y = Hx + _noise(g, n, M, sigma_v_sq)
            return np.sum(np.sum(np.abs(y - Hz) ** 2, 1) < np.sum(np.abs(y - Hx) ** 2, 1))
        return stat

    def pairwise_symbol(estimate, e):
        z = x - e

        def stat(n, g):
            xh = estimate(n, g)
            return np.sum(np.sum(np.abs(xh - z) ** 2, 1) < np.sum(np.abs(xh - x) ** 2, 1))
        return stat

    # exact ML PEP, two-stream error
    e2 = np.zeros(N, complex)
    e2[0], e2[2] = d, 1j * d
    sv = _sigma_for(e2, target)
    ctx = analysis.PepContext(H, c, sv)
    checks.append(OracleCheck("mld (general error)", analysis.pep_mld(ctx, e2),
                              _count(pairwise_receive(e2, sv), trials, chunk, gen), trials))

    # ML PEP, single nearest-neighbour error on stream 1
    e1 = np.zeros(N, complex)
    e1[1] = d
    sv = _sigma_for(e1, target)
    ctx = analysis.PepContext(H, c, sv)
    checks.append(OracleCheck("mld (single nearest neighbour)", analysis.pep_mld_single(ctx, 1),
                              _count(pairwise_receive(e1, sv), trials, chunk, gen), trials))

    # matched-filter bound: x + D^-1 H^H v
    sv = _sigma_for(e2, target)
    ctx = analysis.PepContext(H, c, sv)
    mfb = lambda n, g: x + (_noise(g, n, M, sv) @ H.conj()) / D
    checks.append(OracleCheck("mfb", analysis.pep_mfb(ctx, e2),
                              _count(pairwise_symbol(mfb, e2), trials, chunk, gen), trials))

    def pj_one_step(zbar, sigma_v_sq):
        b0 = Hh @ (H @ x)
        base = zbar + (b0 - A @ zbar) / D

        def estimate(n, g):
            b_noise = _noise(g, n, M, sigma_v_sq) @ H.conj()
            return base + b_noise / D
        return estimate

    # one PJ update from an initializer carrying an arbitrary planted error
    ebar = np.zeros(N, complex)
    ebar[1], ebar[3] = -d, 1j * d
    sv = _sigma_for(e2, target)
    ctx = analysis.PepContext(H, c, sv)
    checks.append(OracleCheck("pj (general planted error)", analysis.pep_pj_general(ctx, e2, ebar),
                              _count(pairwise_symbol(pj_one_step(x + ebar, sv), e2), trials, chunk, gen), trials))

    # one PJ update, single nearest-neighbour initializer error on stream k,
    # stratified evenly over the four relative directions
    n_s, k_s = 0, 2
    sv = _sigma_for(e1, target)
    ctx = analysis.PepContext(H, c, sv)
    e_n = np.zeros(N, complex)
    e_n[n_s] = d
    hits = 0.0
    for u in (1, -1, 1j, -1j):
        eb = np.zeros(N, complex)
        eb[k_s] = d * u
        hits += _count(pairwise_symbol(pj_one_step(x + eb, sv), e_n), trials // 4, chunk, gen)
    checks.append(OracleCheck("pj (single initializer error)", analysis.pep_pj_conditional(ctx, n_s, k_s),
                              hits / 4, trials))

    # zero-forcing single-stream error
    k_zf = 3
    Ainv = np.linalg.inv(A)
    sv = _sigma_for(e1, target) / Ainv[k_zf, k_zf].real
    ctx = analysis.PepContext(H, c, sv)

    def zf_stat(n, g):
        xk = x[k_zf] + (_noise(g, n, M, sv) @ H.conj() @ Ainv.T)[:, k_zf]
        zk = x[k_zf] - d
        return np.sum(np.abs(xk - zk) < np.abs(xk - x[k_zf]))
    checks.append(OracleCheck("zf (single stream)", analysis.pep_zf_single(ctx, k_zf),
                              _count(zf_stat, trials, chunk, gen), trials))
    return checks


def format_oracle_report(checks: list[OracleCheck]) -> str:
    lines = [f"{'check':<34} {'closed form':>12} {'monte carlo':>12} {'z':>7}  result"]
    for ch in checks:
        lines.append(f"{ch.name:<34} {ch.predicted:>12.5g} {ch.estimate:>12.5g} {ch.z_score:>7.2f}  "
                     f"{'PASS' if ch.passed else 'FAIL'}")
    return "\n".join(lines)
