"""Monte-Carlo symmetric-rate evaluation over i.i.d. Rayleigh channels.

One draw is one channel realization shared by every transmission of the
plan (slow fading); the ``fast_fading`` option redraws per transmission.
Each transmission's multicast rate is log(1 + balanced SINR) in nats, its
duration is the per-stream payload divided by that rate, and the symmetric
rate of the draw is K*f over the total duration.  Draw substreams derive
from (seed, draw index) only, so runs are deterministic and different
schemes or SNR points see identical channels under a common seed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Sequence

import numpy as np

from .beamforming import BeamformerSolution, ChannelRealization, solve_maxmin, solve_zero_forcing
from .delivery import StreamDescriptor, Transmission, TransmissionPlan, mod1
from .errors import ParameterError, SolverError
from .grouping import SLOT_POLICIES, build_scheme_plan
from .params import SchemeParams, validate

__all__ = [
    "BEAMFORMERS",
    "SIM_SCHEMES",
    "SimConfig",
    "RatePoint",
    "DegenerateRateWarning",
    "draw_channel",
    "nocc_plan",
    "symmetric_rate",
    "simulate",
    "rate_points_csv",
]

SIM_SCHEMES = ("LIN", "RED", "NoCC")
BEAMFORMERS = ("maxmin_duality", "zero_forcing")


class DegenerateRateWarning(RuntimeWarning):
    """A transmission achieved zero rate, forcing the symmetric rate to 0."""


@dataclass(frozen=True)
class SimConfig:
    params: SchemeParams
    scheme: str = "LIN"
    beamformer: str = "maxmin_duality"
    snr_points_db: tuple[float, ...] = (0.0, 10.0, 20.0, 30.0)
    draws: int = 100
    seed: int = 0
    fast_fading: bool = False
    phantom_slot_policy: str = "skip"
    keep_rates: bool = False

    def __post_init__(self):
        object.__setattr__(self, "snr_points_db", tuple(float(s) for s in self.snr_points_db))
        if self.scheme not in SIM_SCHEMES:
            raise ParameterError(f"scheme must be one of {SIM_SCHEMES}, got {self.scheme!r}")
        if self.beamformer not in BEAMFORMERS:
            raise ParameterError(
                f"beamformer must be one of {BEAMFORMERS}, got {self.beamformer!r}"
            )
        if not self.snr_points_db:
            raise ParameterError("snr_points_db must not be empty")
        if self.draws < 1:
            raise ParameterError(f"draws must be >= 1, got {self.draws}")
        if self.phantom_slot_policy not in SLOT_POLICIES:
            raise ParameterError(f"phantom_slot_policy must be one of {SLOT_POLICIES}")


@dataclass(frozen=True)
class RatePoint:
    snr_db: float
    mean_rate: float
    std_err: float
    draws: int
    degenerate_draws: int = 0
    rates: tuple[float, ...] | None = None


def _rng_for(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed % 2**64, spawn_key=key))


def _rayleigh(rng: np.random.Generator, n_users: int, L: int) -> np.ndarray:
    re = rng.standard_normal((n_users, L))
    im = rng.standard_normal((n_users, L))
    return (re + 1j * im) / np.sqrt(2.0)


def draw_channel(
    params: SchemeParams,
    snr_db: float,
    rng: np.random.Generator,
    n_users: int | None = None,
) -> ChannelRealization:
    """One realization: h_k entries i.i.d. CN(0,1), N0 = 1, P_T = 10^(snr/10)."""
    n = params.K_eff if n_users is None else n_users
    return ChannelRealization(
        H=_rayleigh(rng, n, params.L), N0=1.0, P_T=10.0 ** (snr_db / 10.0)
    )


def nocc_plan(params: SchemeParams) -> TransmissionPlan:
    """Baseline schedule without coded caching.

    K transmissions; transmission i serves the circularly shifted window of
    alpha users starting at i.  Every user appears in exactly alpha
    transmissions and receives there the alpha pieces of its uncached
    (1 - M/N) file fraction, so the per-stream payload is (1 - t/K) f / alpha.
    Suppress sets contain all other served users: no cache cancellation of
    cross terms.  Encoded as a single uncached packet split into alpha
    subpackets so that the standard plan checker applies.
    """
    validate(params)
    K, alpha = params.K, params.alpha
    if alpha > K:
        raise ParameterError(f"alpha={alpha} cannot exceed K={K} users")
    counters: dict[tuple[int, int], int] = {}
    transmissions = []
    for i in range(1, K + 1):
        users = [mod1(i + m, K) for m in range(alpha)]
        streams = []
        for n, user in enumerate(users, start=1):
            q = counters.get((user, 1), 1)
            counters[(user, 1)] = q + 1
            streams.append(
                StreamDescriptor(
                    position=n,
                    user=user,
                    packet=1,
                    subpacket=q,
                    suppress_at=frozenset(u for u in users if u != user),
                )
            )
        transmissions.append(Transmission(round_index=i, slot=1, streams=tuple(streams)))
    return TransmissionPlan(
        params=params,
        cache_matrix=np.zeros((1, K), dtype=np.uint8),
        transmissions=tuple(transmissions),
        counters=MappingProxyType(counters),
        n_subpackets=alpha,
        suppress_size=alpha - 1,
        payload=(1.0 - params.cache_fraction) / alpha,
        scheme="NoCC",
    )


def _rate_sum(K: int, f: float, payload: float, rates: Sequence[float]) -> tuple[float, bool]:
    total = 0.0
    for r in rates:
        if r <= 0.0:
            return 0.0, True
        total += payload * f / r
    return K * f / total, False


def symmetric_rate(
    plan: TransmissionPlan,
    rates_per_transmission: Sequence[float],
    params: SchemeParams | None = None,
) -> float:
    """K f / sum_i(L_i / R_i) with L_i the per-stream payload of the plan.

    A non-positive transmission rate makes the delivery take forever; the
    result degenerates to 0 and a DegenerateRateWarning is emitted.
    """
    if len(rates_per_transmission) != len(plan.transmissions):
        raise ParameterError(
            f"need one rate per transmission: got {len(rates_per_transmission)} "
            f"for {len(plan.transmissions)} transmissions"
        )
    p = params if params is not None else plan.params
    rate, degenerate = _rate_sum(p.K, p.f, plan.payload, rates_per_transmission)
    if degenerate:
        warnings.warn(
            "a transmission achieved zero rate; symmetric rate reported as 0",
            DegenerateRateWarning,
            stacklevel=2,
        )
    return rate


def build_sim_plan(config: SimConfig) -> TransmissionPlan:
    if config.scheme == "NoCC":
        return nocc_plan(config.params)
    return build_scheme_plan(config.params, config.scheme, config.phantom_slot_policy)


def _solver_for(config: SimConfig) -> Callable[..., BeamformerSolution]:
    return solve_maxmin if config.beamformer == "maxmin_duality" else solve_zero_forcing


def transmission_rates(
    plan: TransmissionPlan,
    channels: Sequence[ChannelRealization],
    solver: Callable[..., BeamformerSolution],
) -> list[float]:
    """log(1 + balanced SINR) per transmission, in nats.

    ``channels`` holds one realization per transmission (identical objects
    under slow fading).  Idle phantom slots are priced by solving their
    retained streams.
    """
    rates = []
    for i, tx in enumerate(plan.transmissions):
        streams = tx.streams if tx.streams else tx.idle_streams
        try:
            solution = solver(channels[i], streams)
        except SolverError as exc:
            raise SolverError(
                f"transmission {i + 1} (round {tx.round_index} slot {tx.slot}): {exc}"
            ) from exc
        rates.append(math.log1p(solution.balanced))
    return rates


def simulate(config: SimConfig) -> list[RatePoint]:
    """Mean symmetric rate (and standard error) per SNR point.

    Deterministic given (config, seed).  Draws are independent work units;
    results aggregate by draw index, so any evaluation order yields the
    same output.
    """
    params = validate(config.params)
    plan = build_sim_plan(config)
    solver = _solver_for(config)
    n_users = plan.n_users
    n_tx = len(plan.transmissions)
    per_snr: list[list[float]] = [[] for _ in config.snr_points_db]
    degenerate = [0 for _ in config.snr_points_db]

    for draw in range(config.draws):
        if config.fast_fading:
            Hs = [
                _rayleigh(_rng_for(config.seed, draw, i), n_users, params.L)
                for i in range(n_tx)
            ]
        else:
            H = _rayleigh(_rng_for(config.seed, draw), n_users, params.L)
            Hs = [H] * n_tx
        for s, snr_db in enumerate(config.snr_points_db):
            p_t = 10.0 ** (snr_db / 10.0)
            channels = [ChannelRealization(H=h, N0=1.0, P_T=p_t) for h in Hs]
            try:
                rates = transmission_rates(plan, channels, solver)
            except SolverError as exc:
                raise SolverError(
                    f"solver failed at snr={snr_db} dB, draw {draw}: {exc}"
                ) from exc
            value, bad = _rate_sum(params.K, params.f, plan.payload, rates)
            per_snr[s].append(value)
            degenerate[s] += int(bad)

    points = []
    for s, snr_db in enumerate(config.snr_points_db):
        arr = np.asarray(per_snr[s])
        std_err = float(arr.std(ddof=1) / np.sqrt(len(arr))) if len(arr) > 1 else 0.0
        points.append(
            RatePoint(
                snr_db=float(snr_db),
                mean_rate=float(arr.mean()),
                std_err=std_err,
                draws=config.draws,
                degenerate_draws=degenerate[s],
                rates=tuple(arr.tolist()) if config.keep_rates else None,
            )
        )
    return points


CSV_HEADER = "scheme,beamformer,K,t,L,alpha,K_f,snr_db,mean_rate_nats,std_err,draws,seed"


def rate_points_csv(config: SimConfig, points: Sequence[RatePoint]) -> str:
    """Fixed-column CSV (header included), byte-stable for a given input."""
    p = config.params
    lines = [CSV_HEADER]
    for pt in points:
        lines.append(
            ",".join(
                [
                    config.scheme,
                    config.beamformer,
                    str(p.K),
                    str(p.t),
                    str(p.L),
                    str(p.alpha),
                    str(p.K_f),
                    repr(float(pt.snr_db)),
                    repr(float(pt.mean_rate)),
                    repr(float(pt.std_err)),
                    str(pt.draws),
                    str(config.seed),
                ]
            )
        )
    return "\n".join(lines) + "\n"
