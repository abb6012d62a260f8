"""Per-transmission beamformer design.

solve_maxmin finds the max-min-SINR beamformers of one transmission through
uplink-downlink duality: an outer bisection on the balanced SINR target, an
inner MMSE power fixed point, and a closed-form downlink power recovery.
solve_zero_forcing is the nulling baseline with SINR-equalizing powers.

Interference accounting mirrors the decodability rule of the delivery plan:
a cross stream contributes interference at a user only when that user sits
in the stream's suppress set; every other cross term is cancelled from
cache and excluded.  In the dual uplink the coupling pattern transposes:
the receive filter of stream n sees interference exactly from the streams
owned by the users n must be suppressed at.  (Writing the downlink pattern
into the uplink expressions instead breaks the duality power identity and
lands off the max-min optimum; see the backend kernels.)

The hot kernel is provided by the compiled extension ``cycache._solver``
when it was built, with ``cycache._solver_py`` as a pure-numpy fallback;
set CYCACHE_PURE_PYTHON=1 to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .delivery import StreamDescriptor
from .errors import ParameterError, RankDeficiencyError, SolverError

from . import _solver_py

if os.environ.get("CYCACHE_PURE_PYTHON"):
    _kernel = _solver_py
else:
    try:
        from . import _solver as _kernel  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _kernel = _solver_py

__all__ = [
    "ChannelRealization",
    "DualityWorkspace",
    "BeamformerSolution",
    "backend_name",
    "solve_maxmin",
    "solve_zero_forcing",
    "uplink_sinr",
    "inner_power_fixed_point",
    "downlink_sinrs",
]

DEFAULT_EPS_INNER = 1e-9
DEFAULT_MAX_INNER = 500
DEFAULT_MAX_OUTER = 256


def backend_name() -> str:
    """Which balancing kernel is active: "compiled" or "python"."""
    return _kernel.BACKEND


@dataclass(frozen=True)
class ChannelRealization:
    """Channel rows h_k (one per user, 1-based lookup), noise power and budget."""

    H: np.ndarray = field(repr=False)  # (n_users, L) complex
    N0: float = 1.0
    P_T: float = 1.0

    def __post_init__(self):
        if self.N0 <= 0:
            raise ParameterError(f"N0 must be positive, got {self.N0}")
        if self.P_T <= 0:
            raise ParameterError(f"P_T must be positive, got {self.P_T}")

    @property
    def L(self) -> int:
        return self.H.shape[1]

    @property
    def snr_db(self) -> float:
        return 10.0 * np.log10(self.P_T / self.N0)

    def h(self, user: int) -> np.ndarray:
        if not 1 <= user <= self.H.shape[0]:
            raise IndexError(f"user {user} outside [1, {self.H.shape[0]}]")
        return self.H[user - 1]


@dataclass(frozen=True)
class DualityWorkspace:
    """Intermediates of one duality solve, exposed for inspection and tests."""

    uplink_powers: np.ndarray  # nu
    filters: np.ndarray  # normalized receive vectors, (n, L)
    coupling: np.ndarray  # downlink G matrix used in the power recovery
    scalings: np.ndarray  # a_n
    gamma_bar: float


@dataclass(frozen=True)
class BeamformerSolution:
    weights: np.ndarray  # (n, L) complex downlink beamformers
    powers: np.ndarray  # rho, per-stream downlink powers
    sinrs: np.ndarray  # achieved downlink SINRs
    balanced: float  # balanced level gamma_bar
    uplink_powers: np.ndarray
    outer_iterations: int
    inner_iterations: int
    workspace: DualityWorkspace | None = None

    @property
    def total_power(self) -> float:
        return float(np.sum(np.abs(self.weights) ** 2))

    @property
    def min_sinr(self) -> float:
        return float(np.min(self.sinrs))


def _stream_arrays(channel: ChannelRealization, streams: Sequence[StreamDescriptor]):
    """Channel rows plus uplink/downlink coupling lists for one transmission."""
    if not streams:
        raise ParameterError("a transmission needs at least one stream")
    users = [s.user for s in streams]
    if len(set(users)) != len(users):
        raise ParameterError(f"served users are not distinct: {users}")
    pos = {u: i for i, u in enumerate(users)}
    H = np.ascontiguousarray([channel.h(u) for u in users], dtype=np.complex128)
    norms = np.sum(np.abs(H) ** 2, axis=1)
    if np.any(norms == 0.0):
        raise SolverError("zero channel vector: SINR target bracket collapses")
    ul: list[list[int]] = []
    for s in streams:
        row = []
        for u in sorted(s.suppress_at):
            if u not in pos:
                raise ParameterError(
                    f"suppress set of user {s.user} names user {u}, which is "
                    f"not served in this transmission"
                )
            row.append(pos[u])
        ul.append(row)
    dl = [[b for b, s in enumerate(streams) if users[n] in s.suppress_at] for n in range(len(streams))]
    return H, ul, dl


def _csr(lists: list[list[int]]):
    indptr = np.zeros(len(lists) + 1, dtype=np.int64)
    for i, row in enumerate(lists):
        indptr[i + 1] = indptr[i] + len(row)
    indices = np.fromiter(
        (b for row in lists for b in row), dtype=np.int64, count=int(indptr[-1])
    )
    return indptr, indices


def downlink_sinrs(
    channel: ChannelRealization,
    streams: Sequence[StreamDescriptor],
    weights: np.ndarray,
) -> np.ndarray:
    """Downlink SINRs with cache-cancelled cross terms excluded.

    Interference at stream n's user comes only from the streams whose
    suppress set contains that user.
    """
    H, _, dl = _stream_arrays(channel, streams)
    cross = np.abs(H.conj() @ weights.T) ** 2  # cross[n, b] = |h_n^H w_b|^2
    out = np.empty(len(streams))
    for n in range(len(streams)):
        interference = sum(cross[n, b] for b in dl[n])
        out[n] = cross[n, n] / (interference + channel.N0)
    return out


def uplink_sinr(
    workspace: DualityWorkspace | Sequence[float],
    channel: ChannelRealization,
    streams: Sequence[StreamDescriptor],
    n: int,
) -> float:
    """Dual-uplink SINR of stream n (1-based) at the workspace's powers.

    gamma_n = nu_n h_n^H (sum_{b in UL(n)} nu_b h_b h_b^H + N0 I)^{-1} h_n
    with UL(n) the streams owned by the users in stream n's suppress set.
    """
    nu = np.asarray(getattr(workspace, "uplink_powers", workspace), dtype=float)
    if not 1 <= n <= len(streams):
        raise IndexError(f"position {n} outside [1, {len(streams)}]")
    H, ul, _ = _stream_arrays(channel, streams)
    i = n - 1
    M = channel.N0 * np.eye(channel.L, dtype=np.complex128)
    for b in ul[i]:
        M += nu[b] * np.outer(H[b], H[b].conj())
    x = np.linalg.solve(M, H[i])
    return float(nu[i] * np.real(np.vdot(H[i], x)))


def inner_power_fixed_point(
    channel: ChannelRealization,
    streams: Sequence[StreamDescriptor],
    gamma_bar: float,
    eps_inner: float = DEFAULT_EPS_INNER,
    max_iter: int = DEFAULT_MAX_INNER,
) -> np.ndarray:
    """Uplink powers meeting the SINR target, by the joint update iteration.

    Raises SolverError when the fixed point has not converged after
    ``max_iter`` sweeps (the caller's cue to lower or raise gamma_bar).
    """
    if gamma_bar < 0:
        raise ParameterError(f"gamma_bar must be non-negative, got {gamma_bar}")
    H, ul, _ = _stream_arrays(channel, streams)
    indptr, indices = _csr(ul)
    nu, converged, _, _ = _solver_py._power_iteration(
        H, indptr, indices, channel.N0, gamma_bar, eps_inner, max_iter, np.inf
    )
    if not converged:
        raise SolverError(
            f"power fixed point did not converge in {max_iter} iterations "
            f"at gamma_bar={gamma_bar}"
        )
    return nu


def solve_maxmin(
    channel: ChannelRealization,
    streams: Sequence[StreamDescriptor],
    eps_power: float | None = None,
    eps_inner: float = DEFAULT_EPS_INNER,
    max_inner: int = DEFAULT_MAX_INNER,
    max_outer: int = DEFAULT_MAX_OUTER,
    keep_workspace: bool = True,
) -> BeamformerSolution:
    """Max-min SINR beamformers for one transmission under a sum power budget.

    Bisection runs on the balanced uplink level until |P_T - sum(nu)| falls
    below ``eps_power`` (default 1e-6 * P_T).  Downlink powers follow from
    rho = (I - D G)^{-1} N0 a with a_n = gamma_n / ((1+gamma_n) |h_n^H v_n|^2)
    and G carrying |h_n^H v_b|^2 on the diagonal and on the downlink
    coupling pattern; the downlink beamformers are w_n = sqrt(rho_n) v_n.
    At the solution sum(rho) = sum(nu) = P_T and every downlink SINR equals
    the balanced level.
    """
    P_T, N0 = channel.P_T, channel.N0
    if eps_power is None:
        eps_power = 1e-6 * P_T
    H, ul, dl = _stream_arrays(channel, streams)
    indptr, indices = _csr(ul)
    gamma_bar, nu, v, gamma_ul, outer, inner, converged = _kernel.balance_maxmin(
        H, indptr, indices, N0, P_T, eps_power, eps_inner, max_inner, max_outer
    )
    if not converged:
        raise SolverError(
            f"power bisection failed to meet |P_T - sum(nu)| < {eps_power:g} "
            f"within {max_outer} outer iterations"
        )

    n = len(streams)
    gains = np.abs(np.einsum("ij,ij->i", H.conj(), v)) ** 2  # |h_n^H v_n|^2
    a = gamma_ul / ((1.0 + gamma_ul) * gains)
    G = np.zeros((n, n))
    cross = np.abs(H.conj() @ v.T) ** 2  # cross[n, b] = |h_n^H v_b|^2
    for i in range(n):
        G[i, i] = cross[i, i]
        for b in dl[i]:
            G[i, b] = cross[i, b]
    try:
        rho = np.linalg.solve(np.eye(n) - np.diag(a) @ G, N0 * a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - theory excludes it
        raise SolverError("downlink power recovery is singular") from exc
    if np.any(rho < 0):
        raise SolverError("downlink power recovery produced negative powers")
    weights = np.sqrt(rho)[:, None] * v
    sinrs = downlink_sinrs(channel, streams, weights)
    workspace = (
        DualityWorkspace(
            uplink_powers=nu, filters=v, coupling=G, scalings=a, gamma_bar=gamma_bar
        )
        if keep_workspace
        else None
    )
    return BeamformerSolution(
        weights=weights,
        powers=rho,
        sinrs=sinrs,
        balanced=float(gamma_bar),
        uplink_powers=nu,
        outer_iterations=int(outer),
        inner_iterations=int(inner),
        workspace=workspace,
    )


def solve_zero_forcing(
    channel: ChannelRealization,
    streams: Sequence[StreamDescriptor],
    null_tol: float = 1e-12,
) -> BeamformerSolution:
    """Zero-forcing baseline: null every suppressed cross term exactly.

    Each beamformer is the projection of the user's channel onto the null
    space of its suppress set's channels; powers equalize the per-stream
    SNRs under the total budget (after nulling the streams decouple, so the
    balanced level is P_T / sum_n(N0 / g_n) with g_n the post-projection
    gain).  A stream whose projection degenerates (target collinear with a
    suppressed channel) yields the balanced level 0, reported as SINR 0 on
    all streams.
    """
    P_T, N0 = channel.P_T, channel.N0
    H, ul, _ = _stream_arrays(channel, streams)
    n, L = H.shape
    directions = np.zeros((n, L), dtype=np.complex128)
    gains = np.zeros(n)
    for i, s in enumerate(streams):
        if ul[i]:
            # orthonormal basis (Hermitian sense) of the suppressed users'
            # channel span: left singular vectors of the L x m column stack
            A = H[ul[i]].T
            basis, sv, _ = np.linalg.svd(A, full_matrices=False)
            rank = int(np.sum(sv > sv[0] * 1e-12)) if sv.size else 0
            if rank >= L:
                raise RankDeficiencyError(
                    f"stream of user {s.user}: {rank} suppressed dimensions "
                    f"leave no null space in C^{L}"
                )
            basis = basis[:, :rank]
            w = H[i] - basis @ (basis.conj().T @ H[i])
        else:
            w = H[i].copy()
        g = float(np.real(np.vdot(w, w)))
        if g <= null_tol * float(np.real(np.vdot(H[i], H[i]))):
            gains[i] = 0.0
        else:
            directions[i] = w / np.sqrt(g)
            gains[i] = g

    if np.any(gains == 0.0):
        zeros = np.zeros(n)
        return BeamformerSolution(
            weights=np.zeros((n, L), dtype=np.complex128),
            powers=zeros,
            sinrs=zeros,
            balanced=0.0,
            uplink_powers=zeros,
            outer_iterations=0,
            inner_iterations=0,
        )

    balanced = P_T / float(np.sum(N0 / gains))
    rho = balanced * N0 / gains
    weights = np.sqrt(rho)[:, None] * directions
    sinrs = downlink_sinrs(channel, streams, weights)
    return BeamformerSolution(
        weights=weights,
        powers=rho,
        sinrs=sinrs,
        balanced=float(balanced),
        uplink_powers=np.zeros(n),
        outer_iterations=0,
        inner_iterations=0,
    )
