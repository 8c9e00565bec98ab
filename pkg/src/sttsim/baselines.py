"""Reference beam-selection methods: the SVD oracle, a blind ping-pong
power method, and a far-field hierarchical codebook search."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .training import BeamformerSet, PingPongSim, _crandn


def svd_oracle(h: np.ndarray, n_streams: int, total_power: float = 1.0
               ) -> BeamformerSet:
    """Top singular-vector combiner/precoder pair (fully digital optimum).

    Args:
        h: (M, N) channel.
        n_streams: streams to keep (<= min(M, N)).
        total_power: transmit budget used for the uniform power split.

    Returns:
        BeamformerSet whose S^H H P is diagonal with the top singular
        values (nonnegative by construction).
    """
    m, n = h.shape
    if not 1 <= n_streams <= min(m, n):
        raise ValueError("n_streams must be in [1, min(M, N)]")
    u, _, vh = np.linalg.svd(h)
    lam = np.diag(np.full(n_streams, math.sqrt(total_power / n_streams)))
    return BeamformerSet(s=u[:, :n_streams], p=vh.conj().T[:, :n_streams],
                         lam=lam, constraint="fully_digital")


def power_method(sim: PingPongSim, n_streams: int, rounds: int) -> BeamformerSet:
    """Blind block power iteration over ping-pong pilots.

    Each round transmits n_streams simultaneous pilot beams down (power
    split equally), orthonormalizes the received block into the new
    combiner, transmits it back up with conjugate beamforming, and
    orthonormalizes the conjugated received block into the new precoder.
    Noise enters every block; no averaging is applied.

    Args:
        sim: pilot simulator (consumes one counted round per iteration).
        n_streams: number of simultaneous beams.
        rounds: iterations (>= 1).

    Returns:
        BeamformerSet with orthonormal (unit 2-norm) columns.
    """
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    h = sim.matrix
    m, n = h.shape
    if not 1 <= n_streams <= min(m, n):
        raise ValueError("n_streams must be in [1, min(M, N)]")
    start = _crandn(sim.rng, n * n_streams, 1.0).reshape(n, n_streams)
    p_blk = np.linalg.qr(start)[0]
    s_blk = None
    amp_dl = math.sqrt(sim.tx_power_bs / n_streams)
    amp_ul = math.sqrt(sim.tx_power_ue / n_streams)
    for _ in range(rounds):
        sim.round_counter += 1
        noise_dl = _crandn(sim.rng, m * n_streams, sim.noise_variance).reshape(m, n_streams)
        y_dl = amp_dl * (h @ p_blk) + noise_dl
        s_blk = np.linalg.qr(y_dl)[0]
        noise_ul = _crandn(sim.rng, n * n_streams, sim.noise_variance).reshape(n, n_streams)
        y_ul = amp_ul * (h.T @ s_blk.conj()) + noise_ul
        p_blk = np.linalg.qr(y_ul.conj())[0]
    lam = np.diag(np.full(n_streams, math.sqrt(sim.tx_power_bs / n_streams)))
    return BeamformerSet(s=s_blk, p=p_blk, lam=lam, constraint="fully_digital")


@dataclass
class CodebookNode:
    """One node of a binary angular codebook.

    Attributes:
        level: tree depth of this node (1 = coarsest).
        interval: covered sin-angle interval [lo, hi).
        beam: (N,) constant-modulus beam matched to the interval (receive
            convention; conjugate for transmission).
        children: the two finer nodes splitting the interval (empty at the
            leaf level).
    """

    level: int
    interval: tuple[float, float]
    beam: np.ndarray
    children: list["CodebookNode"] = field(default_factory=list)


def _steering(n: int, v: float) -> np.ndarray:
    idx = np.arange(n) - (n - 1) / 2.0
    return np.exp(1j * math.pi * idx * v)


def _sector_beam(n: int, lo: float, hi: float, grid: np.ndarray) -> np.ndarray:
    """Least-squares fit of the far-field response to a sector indicator,
    phase-projected to constant modulus."""
    idx = np.arange(n) - (n - 1) / 2.0
    a = np.exp(1j * math.pi * np.outer(idx, grid))
    target = ((grid >= lo) & (grid < hi)).astype(float)
    coeff, *_ = np.linalg.lstsq(a.conj().T, target, rcond=None)
    coeff[coeff == 0] = 1e-12
    return coeff / np.abs(coeff) / math.sqrt(n)


def build_hierarchical_codebook(n: int, depth: int | None = None
                                ) -> list[CodebookNode]:
    """Binary beam tree over sin-angle space [-1, 1).

    Level-l nodes cover intervals of width 2 / 2**l with widened
    (sector-fitted) beams; leaves are steering beams at their interval
    centre.

    Args:
        n: array size.
        depth: tree depth (default ceil(log2 n)).

    Returns:
        The two level-1 nodes; children reach down to the leaf level.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if depth is None:
        depth = max(1, math.ceil(math.log2(n)))
    if depth < 1:
        raise ValueError("depth must be at least 1")
    grid = np.linspace(-1.0, 1.0, 8 * n, endpoint=False)

    def make(level: int, lo: float, hi: float) -> CodebookNode:
        if level == depth:
            centre = 0.5 * (lo + hi)
            beam = _steering(n, centre) / math.sqrt(n)
        else:
            beam = _sector_beam(n, lo, hi, grid)
        node = CodebookNode(level=level, interval=(lo, hi), beam=beam)
        if level < depth:
            mid = 0.5 * (lo + hi)
            node.children = [make(level + 1, lo, mid), make(level + 1, mid, hi)]
        return node

    return [make(1, -1.0, 0.0), make(1, 0.0, 1.0)]


def hierarchical_search(sim: PingPongSim, bs_tree: list[CodebookNode],
                        ue_tree: list[CodebookNode]
                        ) -> tuple[np.ndarray, np.ndarray, int]:
    """Descend both codebooks with ping-pong power measurements.

    Per level: the BS transmits each candidate (conjugated beam, downlink)
    and the UE scores it with its current combiner; then the UE transmits
    each of its candidates (uplink) and the BS scores them with its chosen
    precoder. The stronger child wins. Four pilots per level.

    Args:
        sim: pilot simulator (noise included).
        bs_tree: BS codebook (level-1 nodes).
        ue_tree: UE codebook (level-1 nodes).

    Returns:
        (s, p, pilots_used): UE combiner, BS transmit precoder, and the
        pilot count 4 * depth.
    """
    h = sim.matrix
    m, n = h.shape
    amp_dl = math.sqrt(sim.tx_power_bs)
    amp_ul = math.sqrt(sim.tx_power_ue)
    s_cur = np.ones(m, dtype=complex) / math.sqrt(m)
    p_cur = np.ones(n, dtype=complex) / math.sqrt(n)
    bs_nodes = list(bs_tree)
    ue_nodes = list(ue_tree)
    pilots = 0
    rounds = 0
    while bs_nodes or ue_nodes:
        rounds += 2
        if bs_nodes:
            scores = []
            for node in bs_nodes:
                cand = node.beam.conj()
                y = amp_dl * (h @ cand) + _crandn(sim.rng, m, sim.noise_variance)
                scores.append(abs(np.vdot(s_cur, y)))
                pilots += 1
            bs_pick = bs_nodes[int(np.argmax(scores))]
            p_cur = bs_pick.beam.conj()
            bs_nodes = bs_pick.children

        if ue_nodes:
            scores = []
            for node in ue_nodes:
                y = amp_ul * (h.T @ node.beam.conj()) + _crandn(sim.rng, n, sim.noise_variance)
                scores.append(abs(p_cur.T @ y))
                pilots += 1
            ue_pick = ue_nodes[int(np.argmax(scores))]
            s_cur = ue_pick.beam
            ue_nodes = ue_pick.children
    sim.round_counter += rounds
    return s_cur, p_cur, pilots
